//! Monte Carlo estimators with Wilson intervals.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::events::{holds, EventScratch};
use super::{CrossingFunction, CrossingSpec, PercolationError, Prepared};
use crate::domain_approx::{CurveTrace, DiscreteDomain};
use crate::exec::Executor;
use crate::geometry::Point;
use crate::lattice::{Color, Coloring};
use crate::math;

/// z-value of a two-sided 95% interval.
const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossingEstimate {
    pub value: f64,
    /// Half-width of the 95% Wilson interval.
    pub half_width: f64,
    pub successes: u64,
    pub samples: u64,
    pub seed: u64,
}

impl CrossingEstimate {
    pub fn from_counts(successes: u64, samples: u64, seed: u64) -> Self {
        let n = samples as f64;
        let p = successes as f64 / n;
        let z2 = Z95 * Z95;
        let half_width = Z95 / (1.0 + z2 / n) * math::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
        CrossingEstimate { value: p, half_width, successes, samples, seed }
    }

    /// Wilson interval `(lo, hi)`.
    pub fn interval(&self) -> (f64, f64) {
        let n = self.samples as f64;
        let z2 = Z95 * Z95;
        let mid = (self.value + z2 / (2.0 * n)) / (1.0 + z2 / n);
        let lo = if self.successes == 0 { 0.0 } else { (mid - self.half_width).max(0.0) };
        let hi = if self.successes == self.samples { 1.0 } else { (mid + self.half_width).min(1.0) };
        (lo, hi)
    }

    /// `|self - other| <= k * sqrt(hw1^2 + hw2^2)`.
    pub fn agrees_with(&self, other: &CrossingEstimate, k: f64) -> bool {
        let hw = math::hypot(self.half_width, other.half_width);
        (self.value - other.value).abs() <= k * hw
    }
}

struct Worker {
    words: Vec<u64>,
    col: Coloring,
    scratch: EventScratch,
}

fn worker() -> Worker {
    Worker { words: Vec::new(), col: Coloring { colors: Vec::new() }, scratch: EventScratch::default() }
}

/// Estimates several events on shared colorings: replica `r` uses the
/// same coloring for every spec.
pub fn estimate_many<E: Executor>(
    dd: &DiscreteDomain,
    specs: &[CrossingSpec],
    n: u64,
    seed: u64,
    exec: &E,
) -> Result<Vec<CrossingEstimate>, PercolationError> {
    if n < 100 {
        return Err(PercolationError::TooFewSamples(n));
    }
    let prep = Prepared::new(dd)?;
    let mut jobs = Vec::with_capacity(specs.len());
    for s in specs {
        let probe = prep.index_of(s.probe).ok_or(PercolationError::ProbeOutside(s.probe))?;
        let (x, others) = s.function.arcs();
        jobs.push((x, others, s.color, probe));
    }
    let counts = exec.run(n, jobs.len(), worker, |w, r, counts| {
        prep.sample(seed, r, &mut w.words, &mut w.col);
        for (k, &(x, others, color, probe)) in jobs.iter().enumerate() {
            if holds(&prep, &w.col, x, others, color, probe, &mut w.scratch) {
                counts[k] += 1;
            }
        }
    });
    Ok(counts.into_iter().map(|c| CrossingEstimate::from_counts(c, n, seed)).collect())
}

pub fn estimate_crossing<E: Executor>(
    dd: &DiscreteDomain,
    spec: CrossingSpec,
    n: u64,
    seed: u64,
    exec: &E,
) -> Result<CrossingEstimate, PercolationError> {
    Ok(estimate_many(dd, &[spec], n, seed, exec)?[0])
}

/// Blue `U` event at the tile of the probe mark.
pub fn estimate_cardy<E: Executor>(
    dd: &DiscreteDomain,
    n: u64,
    seed: u64,
    exec: &E,
) -> Result<CrossingEstimate, PercolationError> {
    let probe = dd.probe_site().ok_or(PercolationError::MissingProbe)?;
    estimate_crossing(dd, CrossingSpec { function: CrossingFunction::U, color: Color::Blue, probe }, n, seed, exec)
}

/// Blue `U` estimates at each probe point, snapped to the nearest tile.
pub fn boundary_decay_profile<E: Executor>(
    dd: &DiscreteDomain,
    probes: &[Point],
    n: u64,
    seed: u64,
    exec: &E,
) -> Result<Vec<CrossingEstimate>, PercolationError> {
    let prep = Prepared::new(dd)?;
    let mut specs = Vec::with_capacity(probes.len());
    for &p in probes {
        let probe = prep.snap(p, dd).ok_or(PercolationError::ProbeOutside(crate::lattice::site_containing(p, dd.scale())))?;
        specs.push(CrossingSpec { function: CrossingFunction::U, color: Color::Blue, probe });
    }
    estimate_many(dd, &specs, n, seed, exec)
}

/// Cardy estimate on the domain slit along `trace`, whose tip becomes
/// mark a. Colorings are fresh, not the ones revealed by the exploration.
pub fn slit_cardy_after_exploration<E: Executor>(
    dd: &DiscreteDomain,
    trace: &CurveTrace,
    n: u64,
    seed: u64,
    exec: &E,
) -> Result<CrossingEstimate, PercolationError> {
    let slit = dd.with_slit(trace)?;
    estimate_cardy(&slit, n, seed, exec)
}
