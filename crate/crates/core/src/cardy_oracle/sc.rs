//! Schwarz-Christoffel maps from the upper half-plane, with the first
//! polygon vertex sent to infinity.
//!
//! `f(z) = w_1 + C * int_{x_1}^{z} prod_k (s - x_k)^{beta_k} ds` with the
//! branch of each power continuous on the closed upper half-plane.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use super::quad::{gauss_jacobi, gauss_legendre, Rule};
use super::OracleError;
use crate::geometry::{segments_intersect, Point};
use crate::math;

const NQ: usize = 16;
const MAX_DEPTH: u32 = 200;

/// `z^e` with `arg z` taken in `[0, pi]`.
pub(crate) fn upow(z: C64, e: f64) -> C64 {
    let r = z.norm();
    if r == 0.0 {
        return C64::new(0.0, 0.0);
    }
    let arg = math::atan2(z.im.abs(), z.re);
    C64::from_polar(math::exp(e * math::ln(r)), e * arg)
}

fn seg_dist(p: C64, a: C64, b: C64) -> f64 {
    let d = b - a;
    let l2 = d.norm_sqr();
    let t = if l2 == 0.0 { 0.0 } else { ((p - a).re * d.re + (p - a).im * d.im) / l2 };
    (a + d * t.clamp(0.0, 1.0) - p).norm()
}

/// `prod_k (s - x_k)^{beta_k}` over sorted real prevertices, with
/// quadrature that treats the endpoint singularities exactly.
#[derive(Debug, Clone)]
pub(crate) struct Integrand {
    pub x: Vec<f64>,
    pub beta: Vec<f64>,
    jac: Vec<Rule>,
    gl: Rule,
}

impl Integrand {
    pub fn new(x: Vec<f64>, beta: Vec<f64>) -> Self {
        let mut cache: Vec<(f64, Rule)> = Vec::new();
        let jac = beta
            .iter()
            .map(|&b| match cache.iter().find(|(c, _)| *c == b) {
                Some((_, r)) => r.clone(),
                None => {
                    let r = gauss_jacobi(NQ, 0.0, b);
                    cache.push((b, r.clone()));
                    r
                }
            })
            .collect();
        Integrand { x, beta, jac, gl: gauss_legendre(NQ) }
    }

    pub fn set_x(&mut self, x: Vec<f64>) {
        self.x = x;
    }

    fn abs_at(&self, t: f64, skip: usize) -> f64 {
        let mut s = 0.0;
        for (k, (&xk, &b)) in self.x.iter().zip(&self.beta).enumerate() {
            if k != skip && b != 0.0 {
                s += b * math::ln((t - xk).abs());
            }
        }
        math::exp(s)
    }

    /// Integrand value, leaving out factor `skip` (`usize::MAX` keeps all).
    pub fn eval(&self, z: C64, skip: usize) -> C64 {
        let mut re = 0.0;
        let mut im = 0.0;
        for (k, (&xk, &b)) in self.x.iter().zip(&self.beta).enumerate() {
            if k != skip && b != 0.0 {
                let d = z - xk;
                re += b * math::ln(d.norm());
                im += b * math::atan2(d.im.abs(), d.re);
            }
        }
        C64::from_polar(math::exp(re), im)
    }

    /// Distance from prevertex `k` to its nearest neighbour.
    fn gap(&self, k: usize) -> f64 {
        let mut g = f64::INFINITY;
        if k > 0 {
            g = g.min(self.x[k] - self.x[k - 1]);
        }
        if k + 1 < self.x.len() {
            g = g.min(self.x[k + 1] - self.x[k]);
        }
        g
    }

    pub fn nearest(&self, z: C64) -> usize {
        let i = self.x.partition_point(|&x| x < z.re);
        match (i.checked_sub(1), (i < self.x.len()).then_some(i)) {
            (Some(l), Some(r)) => {
                if z.re - self.x[l] <= self.x[r] - z.re {
                    l
                } else {
                    r
                }
            }
            (Some(l), None) => l,
            (None, Some(r)) => r,
            (None, None) => 0,
        }
    }

    fn real_dist(&self, a: f64, b: f64) -> f64 {
        let i = self.x.partition_point(|&x| x < a);
        let mut d = f64::INFINITY;
        if i > 0 {
            d = d.min(a - self.x[i - 1]);
        }
        if i < self.x.len() {
            d = d.min((self.x[i] - b).max(0.0));
        }
        d
    }

    fn real_plain(&self, a: f64, b: f64, depth: u32) -> f64 {
        let h = b - a;
        if h <= 0.0 {
            return 0.0;
        }
        if depth >= MAX_DEPTH || self.real_dist(a, b) >= 0.5 * h {
            let (m, r) = (0.5 * (a + b), 0.5 * h);
            return r * self.gl.apply(|s| self.abs_at(m + r * s, usize::MAX));
        }
        let m = 0.5 * (a + b);
        self.real_plain(a, m, depth + 1) + self.real_plain(m, b, depth + 1)
    }

    /// `int_lo^hi |integrand|` along the real axis. `lo`/`hi` may be the
    /// prevertices `sing_lo`/`sing_hi`; no other prevertex may lie inside.
    pub fn real_integral(&self, lo: f64, hi: f64, sing_lo: Option<usize>, sing_hi: Option<usize>) -> f64 {
        if hi <= lo {
            return 0.0;
        }
        match (sing_lo, sing_hi) {
            (Some(_), Some(_)) => {
                let m = 0.5 * (lo + hi);
                self.real_integral(lo, m, sing_lo, None) + self.real_integral(m, hi, None, sing_hi)
            }
            (Some(k), None) => {
                let h0 = (hi - lo).min(0.5 * self.gap(k));
                let half = 0.5 * h0;
                let v = math::pow(half, self.beta[k] + 1.0) * self.jac[k].apply(|s| self.abs_at(lo + half * (1.0 + s), k));
                v + self.real_plain(lo + h0, hi, 0)
            }
            (None, Some(k)) => {
                let h0 = (hi - lo).min(0.5 * self.gap(k));
                let half = 0.5 * h0;
                let v = math::pow(half, self.beta[k] + 1.0) * self.jac[k].apply(|s| self.abs_at(hi - half * (1.0 + s), k));
                v + self.real_plain(lo, hi - h0, 0)
            }
            (None, None) => self.real_plain(lo, hi, 0),
        }
    }

    fn complex_plain(&self, p: C64, q: C64, depth: u32) -> C64 {
        let h = (q - p).norm();
        if h == 0.0 {
            return C64::new(0.0, 0.0);
        }
        let d = self.x.iter().map(|&x| seg_dist(C64::new(x, 0.0), p, q)).fold(f64::INFINITY, f64::min);
        let m = (p + q) * 0.5;
        if depth >= MAX_DEPTH || d >= 0.5 * h {
            let r = (q - p) * 0.5;
            let mut acc = C64::new(0.0, 0.0);
            for (&s, &w) in self.gl.nodes.iter().zip(&self.gl.weights) {
                acc += self.eval(m + r * s, usize::MAX) * w;
            }
            return acc * r;
        }
        self.complex_plain(p, m, depth + 1) + self.complex_plain(m, q, depth + 1)
    }

    /// `int_{x_k}^{z}` along the straight segment.
    pub fn complex_from(&self, k: usize, z: C64) -> C64 {
        let xk = C64::new(self.x[k], 0.0);
        let dz = z - xk;
        let len = dz.norm();
        if len == 0.0 {
            return C64::new(0.0, 0.0);
        }
        let h0 = len.min(0.5 * self.gap(k));
        let tau0 = h0 / len;
        let half = 0.5 * tau0;
        let b = self.beta[k];
        let mut acc = C64::new(0.0, 0.0);
        for (&s, &w) in self.jac[k].nodes.iter().zip(&self.jac[k].weights) {
            acc += self.eval(xk + dz * (half * (1.0 + s)), k) * w;
        }
        let head = acc * upow(dz, b + 1.0) * math::pow(half, b + 1.0);
        head + self.complex_plain(xk + dz * tau0, z, 0)
    }
}

/// A solved map. Vertex 0 is the image of infinity; finite prevertex `j`
/// belongs to vertex `j + 1`.
#[derive(Debug, Clone)]
pub(crate) struct ScMap {
    pub w: Vec<C64>,
    pub integrand: Integrand,
    pub c: C64,
    /// Largest vertex mismatch of the assembled map, relative to the
    /// polygon diameter.
    pub accuracy: f64,
    pub iterations: usize,
    samples: Vec<(C64, C64)>,
    diam: f64,
}

fn side_phase(beta: &[f64], j: usize) -> f64 {
    core::f64::consts::PI * beta[j + 1..].iter().sum::<f64>()
}

fn gaps_to_x(y: &[f64]) -> Vec<f64> {
    let mut x = Vec::with_capacity(y.len() + 2);
    x.push(0.0);
    x.push(1.0);
    for &yi in y {
        let last = *x.last().unwrap();
        x.push(last + math::exp(yi));
    }
    x
}

impl ScMap {
    /// Solves the parameter problem for a polygon with vertices `w`
    /// (counterclockwise, domain on the left) and interior angles
    /// `alpha[k] * pi`.
    pub fn solve(w: Vec<C64>, alpha: &[f64], tol: f64) -> Result<ScMap, OracleError> {
        let n = w.len();
        assert!(n >= 3 && alpha.len() == n);
        let nf = n - 1;
        let beta: Vec<f64> = alpha[1..].iter().map(|a| a - 1.0).collect();
        let len: Vec<f64> = (0..nf - 1).map(|j| (w[j + 2] - w[j + 1]).norm()).collect();
        let target: Vec<f64> = (1..nf - 1).map(|j| math::ln(len[j] / len[0])).collect();
        let mut integrand = Integrand::new(vec![0.0; nf], beta.clone());
        let m = nf - 2;

        let residual = |y: &[f64], integ: &mut Integrand| -> DVector<f64> {
            integ.set_x(gaps_to_x(y));
            let side = |j: usize| integ.real_integral(integ.x[j], integ.x[j + 1], Some(j), Some(j + 1));
            let i0 = side(0);
            DVector::from_iterator(m, (1..nf - 1).map(|j| math::ln(side(j) / i0) - target[j - 1]))
        };

        // Start from gaps proportional to side lengths.
        let mut y: Vec<f64> = (1..nf - 1).map(|j| math::ln(len[j] / len[0])).collect();
        let mut r = residual(&y, &mut integrand);
        let mut norm = r.norm_squared();
        let mut lambda = 1e-3;
        let mut iterations = 0;
        let goal = 1e-11;
        while r.amax() > goal {
            iterations += 1;
            if iterations > 200 {
                break;
            }
            let mut jac = DMatrix::<f64>::zeros(m, m);
            for k in 0..m {
                let mut yk = y.clone();
                let h = 1e-7 * (1.0 + y[k].abs());
                yk[k] += h;
                let rk = residual(&yk, &mut integrand);
                jac.set_column(k, &((rk - &r) / h));
            }
            let a = jac.transpose() * &jac;
            let g = jac.transpose() * &r;
            let mut improved = false;
            while lambda < 1e14 {
                let mut damped = a.clone();
                for i in 0..m {
                    damped[(i, i)] += lambda * a[(i, i)].max(1e-12);
                }
                let Some(step) = damped.lu().solve(&(-&g)) else {
                    lambda *= 10.0;
                    continue;
                };
                let trial: Vec<f64> = y.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
                let rt = residual(&trial, &mut integrand);
                let nt = rt.norm_squared();
                if nt.is_finite() && nt < norm {
                    y = trial;
                    r = rt;
                    norm = nt;
                    lambda = (lambda / 10.0).max(1e-15);
                    improved = true;
                    break;
                }
                lambda *= 10.0;
            }
            if !improved {
                break;
            }
        }
        if !(r.amax() <= tol.max(goal)) {
            return Err(OracleError::NoConvergence { tol, iterations });
        }
        integrand.set_x(gaps_to_x(&y));

        let sides: Vec<f64> =
            (0..nf - 1).map(|j| integrand.real_integral(integrand.x[j], integrand.x[j + 1], Some(j), Some(j + 1))).collect();
        let j0 = (0..nf - 1).max_by(|&a, &b| len[a].total_cmp(&len[b])).unwrap();
        let c = (w[j0 + 2] - w[j0 + 1]) / (C64::from_polar(1.0, side_phase(&beta, j0)) * sides[j0]);
        let diam = w.iter().flat_map(|p| w.iter().map(move |q| (p - q).norm())).fold(0.0, f64::max);
        let mut f = w[1];
        let mut err: f64 = 0.0;
        for j in 0..nf - 1 {
            f += c * C64::from_polar(sides[j], side_phase(&beta, j));
            err = err.max((f - w[j + 2]).norm());
        }
        let mut map = ScMap { w, integrand, c, accuracy: err / diam, iterations, samples: Vec::new(), diam };
        map.samples = map.build_samples();
        Ok(map)
    }

    pub fn finite_w(&self, j: usize) -> C64 {
        self.w[j + 1]
    }

    pub fn x(&self) -> &[f64] {
        &self.integrand.x
    }

    /// Forward map on the closed upper half-plane.
    pub fn eval(&self, z: C64) -> C64 {
        let k = self.integrand.nearest(z);
        self.finite_w(k) + self.c * self.integrand.complex_from(k, z)
    }

    pub fn deriv(&self, z: C64) -> C64 {
        self.c * self.integrand.eval(z, usize::MAX)
    }

    fn build_samples(&self) -> Vec<(C64, C64)> {
        let x = self.x();
        let nf = x.len();
        let span = x[nf - 1] - x[0];
        let mut pts = Vec::new();
        for j in 0..nf {
            let g = self.integrand.gap(j).min(span);
            pts.push(C64::new(x[j], 0.5 * g));
        }
        for j in 0..nf - 1 {
            let h = 0.5 * (x[j + 1] - x[j]);
            pts.push(C64::new(x[j] + h, h));
            pts.push(C64::new(x[j] + h, 4.0 * h));
        }
        for s in [0.25, 1.0, 4.0, 16.0, 64.0] {
            pts.push(C64::new(0.5 * (x[0] + x[nf - 1]), s * span));
        }
        pts.into_iter().map(|z| (z, self.eval(z))).collect()
    }

    fn visible(&self, p: C64, q: C64) -> bool {
        let n = self.w.len();
        let pt = |z: C64| Point::new(z.re, z.im);
        (0..n).all(|k| !segments_intersect(pt(p), pt(q), pt(self.w[k]), pt(self.w[(k + 1) % n])))
    }

    /// Preimage of an interior point.
    pub fn inverse(&self, z: C64) -> Result<C64, OracleError> {
        let mut order: Vec<usize> = (0..self.samples.len()).collect();
        order.sort_by(|&a, &b| (self.samples[a].1 - z).norm().total_cmp(&(self.samples[b].1 - z).norm()));
        let goal = 1e-12 * self.diam;
        for &i in order.iter().take(12) {
            let (mut zeta, w0) = self.samples[i];
            if !self.visible(w0, z) {
                continue;
            }
            let dw = z - w0;
            let steps = 24;
            let h = 1.0 / steps as f64;
            let rhs = |zz: C64| dw / self.deriv(zz);
            for _ in 0..steps {
                let k1 = rhs(zeta);
                let k2 = rhs(zeta + k1 * (0.5 * h));
                let k3 = rhs(zeta + k2 * (0.5 * h));
                let k4 = rhs(zeta + k3 * h);
                zeta += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
                if zeta.im < 0.0 {
                    zeta.im = 1e-14 * zeta.norm().max(1e-300);
                }
            }
            for _ in 0..40 {
                let res = self.eval(zeta) - z;
                if !res.norm().is_finite() {
                    break;
                }
                if res.norm() <= goal {
                    return Ok(zeta);
                }
                zeta -= res / self.deriv(zeta);
                if zeta.im < 0.0 {
                    zeta.im = 1e-14 * zeta.norm().max(1e-300);
                }
            }
        }
        Err(OracleError::NoConvergence { tol: goal, iterations: 40 })
    }
}
