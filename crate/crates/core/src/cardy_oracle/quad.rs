//! Gauss rules and the incomplete beta function with parameters (1/3, 1/3).

use alloc::vec::Vec;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::math;

/// Nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    /// `sum w_i f(x_i)`.
    pub fn apply(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

/// Gauss-Legendre rule with `n` nodes.
pub fn gauss_legendre(n: usize) -> Rule {
    assert!(n > 0);
    let mut nodes = alloc::vec![0.0; n];
    let mut weights = alloc::vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = math::cos(core::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5));
        let mut pp = 0.0;
        for _ in 0..100 {
            let (mut p1, mut p2) = (1.0, 0.0);
            for j in 1..=n {
                let p3 = p2;
                p2 = p1;
                p1 = ((2 * j - 1) as f64 * z * p2 - (j - 1) as f64 * p3) / j as f64;
            }
            pp = n as f64 * (z * p1 - p2) / (z * z - 1.0);
            let dz = p1 / pp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - z * z) * pp * pp);
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    Rule { nodes, weights }
}

/// Gauss-Jacobi rule for the weight `(1 - x)^alpha (1 + x)^beta`,
/// computed from the recurrence matrix (Golub-Welsch).
pub fn gauss_jacobi(n: usize, alpha: f64, beta: f64) -> Rule {
    assert!(n > 0 && alpha > -1.0 && beta > -1.0);
    let (a, b) = (alpha, beta);
    let ab = a + b;
    let mut m = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        let kf = k as f64;
        m[(k, k)] = if k == 0 {
            (b - a) / (ab + 2.0)
        } else {
            (b * b - a * a) / ((2.0 * kf + ab) * (2.0 * kf + ab + 2.0))
        };
        if k + 1 < n {
            let j = kf + 1.0;
            let s = 2.0 * j + ab;
            let off2 = if k == 0 {
                4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + ab) * (2.0 + ab) * (3.0 + ab))
            } else {
                4.0 * j * (j + a) * (j + b) * (j + ab) / (s * s * (s + 1.0) * (s - 1.0))
            };
            let off = math::sqrt(off2);
            m[(k, k + 1)] = off;
            m[(k + 1, k)] = off;
        }
    }
    let mu0 = math::exp(
        (ab + 1.0) * core::f64::consts::LN_2 + math::lgamma(a + 1.0) + math::lgamma(b + 1.0) - math::lgamma(ab + 2.0),
    );
    let eig = SymmetricEigen::new(m);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let v0 = eig.eigenvectors[(0, i)];
            (eig.eigenvalues[i], mu0 * v0 * v0)
        })
        .collect();
    pairs.sort_by(|p, q| p.0.total_cmp(&q.0));
    Rule { nodes: pairs.iter().map(|p| p.0).collect(), weights: pairs.iter().map(|p| p.1).collect() }
}

/// `int_0^x t^{-2/3} (1 - t)^{-2/3} dt` for `0 <= x <= 1/2`, through
/// `t = s^3`, which leaves a smooth integrand.
fn beta_third_lower(x: f64, gl: &Rule) -> f64 {
    let top = math::cbrt(x);
    let h = top / 2.0;
    3.0 * h * gl.apply(|s| {
        let s = h * (s + 1.0);
        math::pow(1.0 - s * s * s, -2.0 / 3.0)
    })
}

/// Regularized incomplete beta function `I_x(1/3, 1/3)`, clamped to
/// `[0, 1]` outside the unit interval.
pub fn incomplete_beta_third(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let gl = gauss_legendre(32);
    let total = 2.0 * beta_third_lower(0.5, &gl);
    if x <= 0.5 {
        beta_third_lower(x, &gl) / total
    } else {
        1.0 - beta_third_lower(1.0 - x, &gl) / total
    }
}

/// Complete beta function `B(1/3, 1/3)`.
pub fn beta_third() -> f64 {
    2.0 * beta_third_lower(0.5, &gauss_legendre(32))
}
