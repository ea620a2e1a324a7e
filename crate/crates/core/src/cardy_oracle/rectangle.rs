//! Closed-form crossing probability of a rectangle.

use super::quad::incomplete_beta_third;
use super::CardyValue;
use crate::math;

/// Jacobi theta functions `theta_2(q)`, `theta_3(q)` for `0 < q < 1`.
fn theta23(q: f64) -> (f64, f64) {
    let mut t2 = 0.0;
    let mut t3 = 1.0;
    for n in 0..200 {
        let nf = n as f64;
        let a = math::pow(q, nf * (nf + 1.0));
        let b = math::pow(q, (nf + 1.0) * (nf + 1.0));
        t2 += a;
        t3 += 2.0 * b;
        if a < 1e-18 * t2 && b < 1e-18 {
            break;
        }
    }
    (2.0 * math::pow(q, 0.25) * t2, t3)
}

/// Probability of a crossing between the two sides of length 1 of an
/// `aspect x 1` rectangle, i.e. across a distance `aspect`.
///
/// The corners have half-plane cross-ratio `eta = (theta_2/theta_3)^4` at
/// `q = exp(-pi * aspect)`, and the crossing probability is
/// `I_eta(1/3, 1/3)`.
pub fn cardy_rectangle(aspect: f64) -> CardyValue {
    assert!(aspect > 0.0 && aspect.is_finite(), "aspect must be positive");
    if aspect < 1.0 {
        let v = cardy_rectangle(1.0 / aspect);
        return CardyValue { value: 1.0 - v.value, accuracy: v.accuracy };
    }
    let q = math::exp(-core::f64::consts::PI * aspect);
    let (t2, t3) = theta23(q);
    let r = t2 / t3;
    let eta = r * r * r * r;
    CardyValue { value: incomplete_beta_third(eta), accuracy: 1e-12 }
}
