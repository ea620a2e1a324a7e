//! Run reports and their file formats.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use cardylab_core::cardy_oracle::CardyValue;
use cardylab_core::domain_approx::minkowski::MinkowskiEstimate;
use cardylab_core::domain_approx::{HomotopyReport, InteriorReport, KernelReport, WellOrganizedReport};
use cardylab_core::percolation::{CrossingEstimate, StopReason};
use serde::{Deserialize, Serialize};

use crate::config::{ConfigRecord, Format};
use crate::error::HarnessError;
use crate::num::fmt_num;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// One estimate at one scale and one probe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub eps: f64,
    pub probe: usize,
    pub x: f64,
    pub y: f64,
    /// Kind-specific coordinate: ray parameter, annulus ratio or
    /// perturbation size.
    pub param: f64,
    pub estimate: CrossingEstimate,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub c0: Option<f64>,
    pub abs_err: Option<f64>,
}

impl Row {
    pub fn new(eps: f64, probe: usize, at: [f64; 2], param: f64, estimate: CrossingEstimate, c0: Option<f64>) -> Self {
        let (ci_lo, ci_hi) = estimate.interval();
        Row {
            eps,
            probe,
            x: at[0],
            y: at[1],
            param,
            estimate,
            ci_lo,
            ci_hi,
            c0,
            abs_err: c0.map(|c| (estimate.value - c).abs()),
        }
    }

    /// Interval for `|C_eps - C0|` implied by the Wilson interval.
    pub fn abs_err_interval(&self) -> Option<(f64, f64)> {
        let c = self.c0?;
        let (lo, hi) = (self.ci_lo - c, self.ci_hi - c);
        let lo_abs = if lo <= 0.0 && hi >= 0.0 { 0.0 } else { lo.abs().min(hi.abs()) };
        Some((lo_abs, lo.abs().max(hi.abs())))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditRecord {
    pub eps: f64,
    pub sites: usize,
    pub interior: InteriorReport,
    /// `None` at scales too coarse to resolve the clearance around arc C.
    pub homotopy: Option<HomotopyReport>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub eps: f64,
    pub index: usize,
    pub seed: u64,
    pub steps: usize,
    /// Length of the prefix that was checked.
    pub kept: usize,
    pub stop: StopReason,
    /// Reports for the left (blue) and right (yellow) faces; `None` when no
    /// prefix left the side checkable.
    pub sides: Vec<Option<WellOrganizedReport>>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeRow {
    pub eps: f64,
    pub delta: f64,
    pub perturbations: usize,
    /// Largest `|C_eps(base) - C_eps(perturbed)|`.
    pub mc_max_diff: f64,
    /// Half-width of the difference at the maximizing perturbation.
    pub mc_half_width: f64,
    /// Largest `|C0(base) - C0(perturbed)|`.
    pub continuum_max_diff: f64,
    pub consistent: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// `|C_eps - C0|` never rises by more than three combined half-widths
    /// from one scale to the next.
    Envelope { nonincreasing: bool, final_abs_err: f64 },
    /// Estimates agree pairwise within three combined half-widths.
    Plateau { consistent: bool, min_value: f64 },
    /// Envelope of slit sensitivity shrinks with the perturbation size and
    /// matches the continuum.
    Equicontinuity { nonincreasing: bool, consistent: bool },
    /// Every audited item passed.
    AllPassed { passed: bool, failures: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub version: String,
    pub config_hash: String,
    pub seed: u64,
    pub config: ConfigRecord,
    pub oracle: Option<CardyValue>,
    pub rows: Vec<Row>,
    pub audits: Vec<AuditRecord>,
    pub kernel: Option<KernelReport>,
    pub minkowski: Option<MinkowskiEstimate>,
    pub traces: Vec<TraceRecord>,
    pub envelopes: Vec<EnvelopeRow>,
    pub verdict: Option<Verdict>,
}

impl SweepReport {
    pub fn empty(config: ConfigRecord) -> Self {
        SweepReport {
            version: VERSION.to_string(),
            config_hash: config.hash(),
            seed: config.seed,
            config,
            oracle: None,
            rows: Vec::new(),
            audits: Vec::new(),
            kernel: None,
            minkowski: None,
            traces: Vec::new(),
            envelopes: Vec::new(),
            verdict: None,
        }
    }

    pub fn passed(&self) -> bool {
        match &self.verdict {
            Some(Verdict::Envelope { nonincreasing, .. }) => *nonincreasing,
            Some(Verdict::Plateau { consistent, .. }) => *consistent,
            Some(Verdict::Equicontinuity { nonincreasing, consistent }) => *nonincreasing && *consistent,
            Some(Verdict::AllPassed { passed, .. }) => *passed,
            None => true,
        }
    }

    fn header_lines(&self) -> String {
        format!(
            "# cardylab {}\n# config_hash {}\n# seed {}\n# kind {}\n",
            self.version,
            self.config_hash,
            self.seed,
            serde_json::to_value(self.config.kind).expect("kind").as_str().unwrap_or_default()
        )
    }

    pub const CSV_COLUMNS: &'static str =
        "eps,probe,x,y,param,value,half_width,ci_lo,ci_hi,successes,samples,seed,c0,abs_err";

    /// One line per row after `#` metadata lines and the column header.
    pub fn to_csv(&self) -> String {
        let mut s = self.header_lines();
        s.push_str(Self::CSV_COLUMNS);
        s.push('\n');
        let opt = |x: Option<f64>| x.map(fmt_num).unwrap_or_default();
        for r in &self.rows {
            let e = &r.estimate;
            writeln!(
                s,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                fmt_num(r.eps),
                r.probe,
                fmt_num(r.x),
                fmt_num(r.y),
                fmt_num(r.param),
                fmt_num(e.value),
                fmt_num(e.half_width),
                fmt_num(r.ci_lo),
                fmt_num(r.ci_hi),
                e.successes,
                e.samples,
                e.seed,
                opt(r.c0),
                opt(r.abs_err),
            )
            .expect("string write");
        }
        s
    }

    pub const PLOT_COLUMNS: &'static str = "log_eps abs_err ci_lo ci_hi";

    /// Whitespace-separated `log_eps abs_err ci_lo ci_hi` for rows with an
    /// oracle value; `ci_*` bound `|C_eps - C0|`. Rows are grouped into
    /// blocks by probe.
    pub fn to_plotdata(&self) -> String {
        let mut s = self.header_lines();
        writeln!(s, "# {}", Self::PLOT_COLUMNS).expect("string write");
        let mut probes: Vec<usize> = self.rows.iter().map(|r| r.probe).collect();
        probes.sort_unstable();
        probes.dedup();
        for (k, p) in probes.iter().enumerate() {
            if k > 0 {
                s.push_str("\n\n");
            }
            writeln!(s, "# probe {p}").expect("string write");
            for r in self.rows.iter().filter(|r| r.probe == *p) {
                if let (Some(err), Some((lo, hi))) = (r.abs_err, r.abs_err_interval()) {
                    writeln!(s, "{} {} {} {}", fmt_num(r.eps.ln()), fmt_num(err), fmt_num(lo), fmt_num(hi))
                        .expect("string write");
                }
            }
        }
        s
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&crate::num::rounded(self)).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        serde_json::from_str(text).map_err(|e| HarnessError::Config(format!("not a report: {e}")))
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
            Format::Plotdata => self.to_plotdata(),
        }
    }
}

pub fn file_name(format: Format) -> &'static str {
    match format {
        Format::Csv => "report.csv",
        Format::Json => "report.json",
        Format::Plotdata => "report.dat",
    }
}

/// Writes the report in `format` into `dir` and returns the file path.
pub fn emit(report: &SweepReport, format: Format, dir: &Path) -> Result<PathBuf, HarnessError> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(file_name(format));
    std::fs::write(&path, report.render(format))?;
    Ok(path)
}

/// Wall-clock seconds per stage. Kept out of the report so reports stay
/// reproducible.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub config_hash: String,
    pub seed: u64,
    pub version: String,
    pub threads: usize,
    pub stages: Vec<(String, f64)>,
}

impl Timings {
    pub fn write(&self, dir: &Path) -> Result<PathBuf, HarnessError> {
        std::fs::create_dir_all(dir)?;
        let path = dir.join("timings.json");
        let mut s = serde_json::to_string_pretty(&crate::num::rounded(self)).expect("timings serialize");
        s.push('\n');
        std::fs::write(&path, s)?;
        Ok(path)
    }
}
