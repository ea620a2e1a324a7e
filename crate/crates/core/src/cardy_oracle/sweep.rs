//! Continuity of the Cardy value under small changes of a slit from a.

use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use super::{build_triangle_map, OracleError};
use crate::domain_approx::ContinuousDomain;
use crate::geometry::{frechet_distance, Point, Polyline};
use crate::math;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquicontinuityRow {
    pub delta: f64,
    pub base_value: f64,
    /// `C0(perturbed)` per perturbation.
    pub values: Vec<f64>,
    /// `|C0(base) - C0(perturbed)|` per perturbation.
    pub diffs: Vec<f64>,
    pub max_diff: f64,
}

/// Cardy values of `dom` slit along `base` and along each perturbation,
/// grouped by the Fréchet bound they were drawn under.
pub fn equicontinuity_sweep(
    dom: &ContinuousDomain,
    base: &Polyline,
    families: &[(f64, Vec<Polyline>)],
    tol: f64,
) -> Result<Vec<EquicontinuityRow>, OracleError> {
    let value = |path: &Polyline| -> Result<f64, OracleError> {
        let slit = dom.slit_from_a(path.clone())?;
        Ok(build_triangle_map(&slit, tol)?.probe_value()?.value)
    };
    let base_value = value(base)?;
    let mut rows = Vec::with_capacity(families.len());
    for &(delta, ref paths) in families {
        let mut values = Vec::with_capacity(paths.len());
        for (index, p) in paths.iter().enumerate() {
            let dist = frechet_distance(base, p);
            // The discrete distance overshoots by up to one sampling step.
            let slack = base.length().max(p.length()) / 1000.0 + dom.tolerance();
            if !(dist <= delta + slack) {
                return Err(OracleError::PerturbationTooFar { index, dist, delta });
            }
            values.push(value(p)?);
        }
        let diffs: Vec<f64> = values.iter().map(|v| (v - base_value).abs()).collect();
        let max_diff = diffs.iter().copied().fold(0.0, f64::max);
        rows.push(EquicontinuityRow { delta, base_value, values, diffs, max_diff });
    }
    Ok(rows)
}

fn unit(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
}

/// Moves every vertex of `base` but the first by at most `delta`, so the
/// result is within Fréchet distance `delta`. Retries until the slit is
/// valid in `dom`.
pub fn perturb_slit(dom: &ContinuousDomain, base: &Polyline, delta: f64, seed: u64) -> Result<Polyline, OracleError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut last_err = OracleError::Unsupported("no valid perturbation found");
    for _ in 0..100 {
        let pts: Vec<Point> = base
            .points()
            .iter()
            .enumerate()
            .map(|(i, &p)| {
                if i == 0 {
                    return p;
                }
                let r = delta * math::sqrt(unit(&mut rng));
                let th = 2.0 * core::f64::consts::PI * unit(&mut rng);
                Point::new(p.x + r * math::cos(th), p.y + r * math::sin(th))
            })
            .collect();
        let path = Polyline::new(pts)?;
        match dom.slit_from_a(path.clone()) {
            Ok(_) => return Ok(path),
            Err(e) => last_err = e.into(),
        }
    }
    Err(last_err)
}
