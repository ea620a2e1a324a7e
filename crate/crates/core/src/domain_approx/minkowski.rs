//! Box-counting dimension of a boundary made of polylines.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::CheckError;
use crate::geometry::Polyline;
use crate::math;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinkowskiEstimate {
    /// Box sizes, strictly decreasing.
    pub scales: Vec<f64>,
    pub counts: Vec<usize>,
    /// Least-squares slope of `ln count` against `ln(1/scale)`.
    pub fitted_dimension: f64,
}

/// Needs at least 4 distinct scales spanning two decades.
pub fn minkowski_dimension(boundary: &[Polyline], scales: &[f64]) -> Result<MinkowskiEstimate, CheckError> {
    let mut s: Vec<f64> = scales.iter().copied().filter(|x| *x > 0.0 && x.is_finite()).collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s.dedup();
    if s.len() < 4 || s.len() != scales.len() || s[0] / s[s.len() - 1] < 100.0 * (1.0 - 1e-12) {
        return Err(CheckError::InsufficientScales);
    }
    let counts: Vec<usize> = s.iter().map(|&h| box_count(boundary, h)).collect();
    let xs: Vec<f64> = s.iter().map(|h| math::ln(1.0 / h)).collect();
    let ys: Vec<f64> = counts.iter().map(|&c| math::ln(c.max(1) as f64)).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok(MinkowskiEstimate { scales: s, counts, fitted_dimension: sxy / sxx })
}

/// Number of grid squares of side `h` met by the curves.
fn box_count(boundary: &[Polyline], h: f64) -> usize {
    let mut boxes = BTreeSet::new();
    for line in boundary {
        for p in line.densify(h / 8.0) {
            boxes.insert((math::floor(p.x / h) as i64, math::floor(p.y / h) as i64));
        }
    }
    boxes.len()
}
