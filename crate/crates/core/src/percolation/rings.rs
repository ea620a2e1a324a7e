//! Harris rings: monochromatic circuits in nested square annuli.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::estimate::CrossingEstimate;
use super::{PercolationError, Prepared};
use crate::domain_approx::{ArcLabel, DiscreteDomain};
use crate::exec::Executor;
use crate::geometry::{GeomError, Point, Polygon};
use crate::lattice::{circuit_in_annulus, Color, Coloring};

/// Nested squares centered at one point. Each side is the previous one
/// divided by a fixed ratio (2 unless built with `with_ratio`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnulusFamily {
    pub center: Point,
    pub squares: Vec<Polygon>,
}

impl AnnulusFamily {
    pub fn new(center: Point, side: f64, count: usize) -> Result<Self, GeomError> {
        Self::with_ratio(center, side, count, 2.0)
    }

    pub fn with_ratio(center: Point, side: f64, count: usize, ratio: f64) -> Result<Self, GeomError> {
        if !(ratio > 1.0) {
            return Err(GeomError::ZeroArea);
        }
        let mut squares = Vec::with_capacity(count);
        let mut h = side / 2.0;
        for _ in 0..count {
            let c = center;
            squares.push(Polygon::new(alloc::vec![
                Point::new(c.x - h, c.y - h),
                Point::new(c.x + h, c.y - h),
                Point::new(c.x + h, c.y + h),
                Point::new(c.x - h, c.y + h),
            ])?);
            h /= ratio;
        }
        Ok(AnnulusFamily { center, squares })
    }

    pub fn side(&self, level: usize) -> f64 {
        let (lo, hi) = self.squares[level].bbox();
        hi.x - lo.x
    }
}

/// Frequency of a `color` circuit in the annulus between squares `level`
/// and `level + 1`. With `assist = Some(l)` the annulus may lean on
/// boundary arc `l` (the circuit closes up through it); every other
/// boundary piece counts as a way around the circuit.
#[allow(clippy::too_many_arguments)]
pub fn harris_ring_probability<E: Executor>(
    dd: &DiscreteDomain,
    fam: &AnnulusFamily,
    level: usize,
    color: Color,
    assist: Option<ArcLabel>,
    n: u64,
    seed: u64,
    exec: &E,
) -> Result<CrossingEstimate, PercolationError> {
    if n < 100 {
        return Err(PercolationError::TooFewSamples(n));
    }
    if level + 1 >= fam.squares.len()
        || (fam.side(level) - fam.side(level + 1)) / 2.0 < 4.0 * dd.scale().eps() {
        return Err(PercolationError::AnnulusTooThin);
    }
    let prep = Prepared::new(dd)?;
    let (outer, inner) = (&fam.squares[level], &fam.squares[level + 1]);
    let scale = dd.scale();
    let escape = |i: usize| ArcLabel::ALL.iter().any(|&l| Some(l) != assist && prep.touches(i, l));
    // Surface a misplaced annulus once instead of per sample.
    circuit_in_annulus(prep.region(), &Coloring::uniform(prep.len(), color), scale, inner, outer, color, escape)?;
    let counts = exec.run(
        n,
        1,
        || (Vec::new(), Coloring { colors: Vec::new() }),
        |(words, col), r, counts| {
            prep.sample(seed, r, words, col);
            if circuit_in_annulus(prep.region(), col, scale, inner, outer, color, escape).unwrap_or(false) {
                counts[0] += 1;
            }
        },
    );
    Ok(CrossingEstimate::from_counts(counts[0], n, seed))
}
