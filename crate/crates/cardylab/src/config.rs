//! Experiment configuration.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::domain_file::{DomainFile, Xy};
use crate::error::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    /// Cardy estimate at mark d for each scale against the conformal oracle.
    CardySweep,
    /// Crossing function along a ray of probes into arc C.
    BoundaryDecay,
    /// Monochromatic circuit frequency in a fixed annulus.
    HarrisRings,
    /// Exploration traces and the well-organized check on their two sides.
    Exploration,
    /// Sensitivity of the Cardy value to small moves of a slit.
    Equicontinuity,
    /// Interior-approximation and kernel-convergence audits.
    ApproxAudit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Plotdata,
}

/// Experiment-specific knobs. Every field has a default derived from the
/// domain, so only the ones that matter for a kind need to be set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Params {
    /// Tolerance for the conformal map construction.
    pub oracle_tol: f64,
    /// Probe count along the decay ray.
    pub probes: usize,
    /// Decay ray; defaults to the segment from c to the midpoint of arc C.
    pub ray: Option<[Xy; 2]>,
    /// Annulus center; defaults to the midpoint of arc C.
    pub ring_center: Option<Xy>,
    /// Outer square side; defaults to 0.9 times the smaller bounding-box side.
    pub ring_side: Option<f64>,
    /// Outer side over inner side.
    pub ring_ratio: f64,
    pub traces: usize,
    pub max_steps: usize,
    /// Explorations stop this close to c; defaults to a tenth of the
    /// domain diameter.
    pub target_radius: Option<f64>,
    pub perturbations: usize,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            oracle_tol: 1e-6,
            probes: 10,
            ray: None,
            ring_center: None,
            ring_side: None,
            ring_ratio: 4.0,
            traces: 100,
            max_steps: 400,
            target_radius: None,
            perturbations: 20,
        }
    }
}

/// Everything that determines the numbers of a run. Its hash is embedded
/// in every output file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigRecord {
    pub kind: ExperimentKind,
    pub scales: Vec<f64>,
    pub samples: u64,
    pub seed: u64,
    pub params: Params,
    pub domain: DomainFile,
}

impl ConfigRecord {
    /// SHA-256 of the canonical JSON form, in hex.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(&crate::num::rounded(self)).expect("config serializes");
        Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub domain_path: Option<PathBuf>,
    pub record: ConfigRecord,
    pub out: PathBuf,
    pub format: Format,
}

impl ExperimentConfig {
    pub fn new(kind: ExperimentKind, domain: DomainFile, scales: Vec<f64>, samples: u64, seed: u64) -> Self {
        ExperimentConfig {
            domain_path: None,
            record: ConfigRecord { kind, scales, samples, seed, params: Params::default(), domain },
            out: PathBuf::from("out"),
            format: Format::Json,
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let r = &self.record;
        if r.scales.is_empty() {
            return Err(HarnessError::Config("at least one scale is required".into()));
        }
        if r.scales.iter().any(|&e| !(e > 0.0 && e.is_finite())) {
            return Err(HarnessError::Config("scales must be positive".into()));
        }
        if r.scales.windows(2).any(|w| w[1] >= w[0]) {
            return Err(HarnessError::Config("scales must be strictly decreasing".into()));
        }
        if r.samples < 100 {
            return Err(HarnessError::Config(format!("samples must be at least 100, got {}", r.samples)));
        }
        let p = &r.params;
        if !(p.oracle_tol > 0.0) || p.probes == 0 || !(p.ring_ratio > 1.0) || p.max_steps == 0 {
            return Err(HarnessError::Config("experiment parameters out of range".into()));
        }
        Ok(())
    }
}

/// Parses a comma-separated list of scales such as `1/16,1/32,0.01`.
pub fn parse_scales(s: &str) -> Result<Vec<f64>, HarnessError> {
    s.split(',')
        .map(|t| {
            let t = t.trim();
            let v = match t.split_once('/') {
                Some((num, den)) => {
                    let num: f64 = num.trim().parse().map_err(|_| bad_scale(t))?;
                    let den: f64 = den.trim().parse().map_err(|_| bad_scale(t))?;
                    num / den
                }
                None => t.parse().map_err(|_| bad_scale(t))?,
            };
            Ok(v)
        })
        .collect()
}

fn bad_scale(t: &str) -> HarnessError {
    HarnessError::Config(format!("cannot read scale {t:?}"))
}

/// Seed for item `index` of a run with master seed `seed` (SplitMix64
/// finalizer over the pair).
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
