//! Continuum side: the conformal map from a marked domain onto the
//! equilateral triangle with vertices `1, e^{±2πi/3}`, and the Cardy value
//! it yields.
//!
//! The map is the composition of a Schwarz-Christoffel map from the upper
//! half-plane (mark a at infinity) with the explicit half-plane to triangle
//! map. A finite-element solve of the mixed boundary problem gives an
//! independent value on convex domains.

use alloc::vec::Vec;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::domain_approx::{ArcLabel, ContinuousDomain, DomainError, MarkName};
use crate::geometry::{GeomError, Point};
use crate::math;

mod fem;
mod quad;
mod rectangle;
mod sc;
mod sweep;

pub use fem::{cardy_value_fem, FemEstimate};
pub use quad::{beta_third, gauss_jacobi, gauss_legendre, incomplete_beta_third, Rule};
pub use rectangle::cardy_rectangle;
pub use sweep::{equicontinuity_sweep, perturb_slit, EquicontinuityRow};

use sc::{Integrand, ScMap};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OracleError {
    #[error("solver did not reach tolerance {tol:e} after {iterations} iterations")]
    NoConvergence { tol: f64, iterations: usize },
    #[error("point ({}, {}) is not on arc A", .0.x, .0.y)]
    ProbeOffArc(Point),
    #[error("point ({}, {}) is not inside the domain", .0.x, .0.y)]
    PointOutside(Point),
    #[error("domain has no probe mark d")]
    MissingProbe,
    #[error("unsupported domain: {0}")]
    Unsupported(&'static str),
    #[error("perturbation {index} is {dist} away from the base slit, above {delta}")]
    PerturbationTooFar { index: usize, dist: f64, delta: f64 },
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error(transparent)]
    Geometry(#[from] GeomError),
}

/// Triangle vertices: a, b, c.
pub fn triangle_vertices() -> [C64; 3] {
    let t = 2.0 * core::f64::consts::PI / 3.0;
    [C64::from_polar(1.0, t), C64::from_polar(1.0, -t), C64::new(1.0, 0.0)]
}

/// Barycentric coordinates `(u, v, w)` of a triangle point, for the
/// vertices c, a, b in that order.
pub fn barycentric(f: C64) -> [f64; 3] {
    let u = (2.0 * f.re + 1.0) / 3.0;
    let s = f.im / math::sqrt(3.0);
    [u, (1.0 - u) / 2.0 + s, (1.0 - u) / 2.0 - s]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CardyValue {
    pub value: f64,
    /// Absolute error bound from the solver residuals.
    pub accuracy: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundarySample {
    /// Arc-length parameter along the domain's boundary cycle.
    pub param: f64,
    pub point: Point,
    pub image: (f64, f64),
}

/// Numerical conformal map onto the triangle, normalized by the marks.
#[derive(Debug, Clone)]
pub struct TriangleMap {
    domain: ContinuousDomain,
    sc: ScMap,
    /// Cycle parameters of the SC vertices, vertex 0 being mark a.
    params: Vec<f64>,
    ib: usize,
    ic: usize,
    id: Option<usize>,
    tri: Integrand,
    tri_norm: C64,
    accuracy: f64,
    residual: f64,
}

/// Arc-length distance travelled from `from` to `t` counterclockwise.
fn rel(t: f64, from: f64, per: f64) -> f64 {
    math::rem_euclid(t - from, per)
}

fn to_c(p: Point) -> C64 {
    C64::new(p.x, p.y)
}

/// Builds the map with residuals verified against `tol`.
pub fn build_triangle_map(dom: &ContinuousDomain, tol: f64) -> Result<TriangleMap, OracleError> {
    let per = dom.perimeter();
    let gtol = dom.tolerance();
    let mut verts: Vec<(f64, Point)> = dom.cycle().iter().map(|s| (s.t0, s.a)).collect();
    let marks = [MarkName::A, MarkName::B, MarkName::C, MarkName::D];
    let mut mark_t = [f64::NAN; 4];
    for m in marks {
        let t = dom.mark_param(m);
        if !t.is_finite() {
            continue;
        }
        let hit = verts.iter().find(|(tv, _)| {
            let d = rel(*tv, t, per);
            d.min(per - d) <= gtol
        });
        mark_t[m as usize] = match hit {
            Some(&(tv, _)) => tv,
            None => {
                verts.push((t, dom.point_at(t)));
                t
            }
        };
    }
    let ta = mark_t[0];
    verts.sort_by(|p, q| rel(p.0, ta, per).total_cmp(&rel(q.0, ta, per)));
    let n = verts.len();
    let index_of = |t: f64| verts.iter().position(|v| v.0 == t);
    let alpha: Vec<f64> = (0..n)
        .map(|k| {
            let p = verts[(k + n - 1) % n].1;
            let q = verts[k].1;
            let r = verts[(k + 1) % n].1;
            let (u, v) = (q - p, r - q);
            let cr = u.cross(v);
            let dt = u.dot(v);
            if cr.abs() <= 1e-12 * u.norm() * v.norm() && dt < 0.0 {
                2.0
            } else {
                1.0 - math::atan2(cr, dt) / core::f64::consts::PI
            }
        })
        .collect();
    let w: Vec<C64> = verts.iter().map(|v| to_c(v.1)).collect();
    let sc = ScMap::solve(w, &alpha, tol)?;
    let ib = index_of(mark_t[1]).expect("mark b inserted") - 1;
    let ic = index_of(mark_t[2]).expect("mark c inserted") - 1;
    let id = mark_t[3].is_finite().then(|| index_of(mark_t[3]).expect("mark d inserted") - 1);
    let tri = Integrand::new(alloc::vec![0.0, 1.0], alloc::vec![-2.0 / 3.0, -2.0 / 3.0]);
    let tri_norm = C64::from_polar(beta_third(), -2.0 * core::f64::consts::PI / 3.0);
    let mut map = TriangleMap {
        domain: dom.clone(),
        params: verts.iter().map(|v| v.0).collect(),
        accuracy: sc.accuracy,
        sc,
        ib,
        ic,
        id,
        tri,
        tri_norm,
        residual: 0.0,
    };
    map.residual = map.verify()?;
    if !(map.accuracy <= tol && map.residual <= tol) {
        return Err(OracleError::NoConvergence { tol, iterations: map.sc.iterations });
    }
    Ok(map)
}

impl TriangleMap {
    pub fn domain(&self) -> &ContinuousDomain {
        &self.domain
    }

    /// Relative vertex mismatch of the solved parameter problem.
    pub fn accuracy(&self) -> f64 {
        self.accuracy
    }

    /// Largest of the mean-value residual of u at interior test points and
    /// |u| at sample points of arc C.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn prevertices(&self) -> &[f64] {
        self.sc.x()
    }

    /// Half-plane to triangle map, with `x_b -> b`, `x_c -> c`, infinity
    /// to a.
    fn triangle(&self, zeta: C64) -> C64 {
        let x = self.sc.x();
        let (xb, xc) = (x[self.ib], x[self.ic]);
        let s = (zeta - xb) / (xc - xb);
        let g = if s.norm() <= (s - 1.0).norm() {
            self.tri.complex_from(0, s) / self.tri_norm
        } else {
            (self.tri_norm + self.tri.complex_from(1, s)) / self.tri_norm
        };
        let [_, b, c] = triangle_vertices();
        b + (c - b) * g
    }

    fn real_to_w(&self, x: f64) -> f64 {
        let xs = self.sc.x();
        (x - xs[self.ib]) / (xs[self.ic] - xs[self.ib])
    }

    /// Prevertex on the real axis of the boundary point at cycle
    /// parameter `t`.
    fn boundary_prevertex(&self, t: f64) -> Option<f64> {
        let per = self.domain.perimeter();
        let ta = self.params[0];
        let r = rel(t, ta, per);
        let n = self.params.len();
        if r == 0.0 {
            return None;
        }
        let v = (0..n).rev().find(|&k| rel(self.params[k], ta, per) <= r).unwrap_or(0);
        let it = &self.sc.integrand;
        let x = self.sc.x();
        let cabs = self.sc.c.norm();
        let p = self.domain.point_at(t);
        let bisect = |mut lo: f64, mut hi: f64, f: &dyn Fn(f64) -> f64, target: f64| {
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if f(mid) < target {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        };
        if v == 0 {
            // Side from a (at infinity) to the first finite vertex.
            let target = (to_c(p) - self.sc.finite_w(0)).norm();
            let f = |s: f64| cabs * it.real_integral(x[0] - s, x[0], None, Some(0));
            let mut h = x[1] - x[0];
            while f(h) < target {
                h *= 2.0;
            }
            let s = bisect(0.0, h, &f, target);
            return Some(x[0] - s);
        }
        let j = v - 1;
        if j + 1 == x.len() {
            let target = (to_c(p) - self.sc.finite_w(j)).norm();
            let f = |s: f64| cabs * it.real_integral(x[j], x[j] + s, Some(j), None);
            let mut h = x[j] - x[j - 1];
            while f(h) < target {
                h *= 2.0;
            }
            let s = bisect(0.0, h, &f, target);
            return Some(x[j] + s);
        }
        let whole = it.real_integral(x[j], x[j + 1], Some(j), Some(j + 1));
        let len = (self.sc.finite_w(j + 1) - self.sc.finite_w(j)).norm();
        let frac = ((to_c(p) - self.sc.finite_w(j)).norm() / len).clamp(0.0, 1.0);
        if frac == 0.0 {
            return Some(x[j]);
        }
        if frac == 1.0 {
            return Some(x[j + 1]);
        }
        let mid = 0.5 * (x[j] + x[j + 1]);
        let f = |s: f64| {
            if s <= mid {
                it.real_integral(x[j], s, Some(j), None)
            } else {
                whole - it.real_integral(s, x[j + 1], None, Some(j + 1))
            }
        };
        Some(bisect(x[j], x[j + 1], &f, frac * whole))
    }

    /// Image of a point of the closed domain. Boundary points go through
    /// their boundary parameter; two-sided slit points take the face
    /// returned by the domain's nearest-point rule.
    pub fn forward(&self, z: Point) -> Result<C64, OracleError> {
        let tol = self.domain.tolerance();
        let near = self.domain.nearest(z);
        if near.dist <= tol {
            return Ok(match self.boundary_prevertex(near.param) {
                Some(x) => self.triangle(C64::new(x, 0.0)),
                None => triangle_vertices()[0],
            });
        }
        if self.domain.locate(z) != crate::geometry::Location::Inside {
            return Err(OracleError::PointOutside(z));
        }
        let zeta = self.sc.inverse(to_c(z))?;
        Ok(self.triangle(zeta))
    }

    /// Barycentric coordinates `(u, v, w)` of `F(z)`.
    pub fn coordinates(&self, z: Point) -> Result<[f64; 3], OracleError> {
        Ok(barycentric(self.forward(z)?))
    }

    /// The coordinate that equals 1 at c and vanishes on arc C.
    pub fn u(&self, z: Point) -> Result<f64, OracleError> {
        Ok(self.coordinates(z)?[0])
    }

    /// `u` at the boundary point with cycle parameter `t`, evaluated with
    /// the incomplete beta function when the point lies on arc A.
    pub fn boundary_u(&self, t: f64) -> f64 {
        match self.boundary_prevertex(t) {
            None => 0.0,
            Some(x) => {
                let s = self.real_to_w(x);
                if (0.0..=1.0).contains(&s) {
                    incomplete_beta_third(s)
                } else {
                    barycentric(self.triangle(C64::new(x, 0.0)))[0]
                }
            }
        }
    }

    /// Cardy value at the domain's probe mark.
    pub fn probe_value(&self) -> Result<CardyValue, OracleError> {
        let id = self.id.ok_or(OracleError::MissingProbe)?;
        let s = self.real_to_w(self.sc.x()[id]);
        Ok(CardyValue { value: incomplete_beta_third(s), accuracy: self.error_bound() })
    }

    fn error_bound(&self) -> f64 {
        (self.accuracy + self.residual).max(1e-12)
    }

    /// `n` samples per polygon side of the boundary correspondence, mark a
    /// excluded.
    pub fn boundary_correspondence(&self, n: usize) -> Vec<BoundarySample> {
        let per = self.domain.perimeter();
        let ta = self.params[0];
        let k = self.params.len();
        let mut out = Vec::new();
        for v in 0..k {
            let t0 = rel(self.params[v], ta, per);
            let t1 = if v + 1 == k { per } else { rel(self.params[v + 1], ta, per) };
            for i in 0..n {
                let r = t0 + (t1 - t0) * (i as f64 + 0.5) / n as f64;
                let t = ta + r;
                if let Some(x) = self.boundary_prevertex(t) {
                    let f = self.triangle(C64::new(x, 0.0));
                    out.push(BoundarySample { param: r, point: self.domain.point_at(t), image: (f.re, f.im) });
                }
            }
        }
        out
    }

    /// Residual checks: mean-value property of u at a few interior points
    /// and u on arc C.
    fn verify(&self) -> Result<f64, OracleError> {
        let dom = &self.domain;
        let mut worst: f64 = 0.0;
        let (lo, hi) = dom.outer().bbox();
        let mut cands: Vec<(f64, Point)> = Vec::new();
        for i in 1..6 {
            for j in 1..6 {
                let p = Point::new(lo.x + (hi.x - lo.x) * i as f64 / 6.0, lo.y + (hi.y - lo.y) * j as f64 / 6.0);
                if dom.locate(p) == crate::geometry::Location::Inside {
                    cands.push((dom.distance_to_boundary(p), p));
                }
            }
        }
        cands.sort_by(|a, b| b.0.total_cmp(&a.0));
        let mut tests = alloc::vec![dom.z0()];
        tests.extend(cands.iter().take(2).map(|c| c.1));
        for z in tests {
            let r = 0.4 * dom.distance_to_boundary(z);
            let center = self.u(z)?;
            let m = 32;
            let mut mean = 0.0;
            for k in 0..m {
                let th = 2.0 * core::f64::consts::PI * k as f64 / m as f64;
                mean += self.u(Point::new(z.x + r * math::cos(th), z.y + r * math::sin(th)))?;
            }
            worst = worst.max((center - mean / m as f64).abs());
        }
        let per = dom.perimeter();
        let (ta, tb) = (dom.mark_param(MarkName::A), dom.mark_param(MarkName::B));
        let span = rel(tb, ta, per);
        for f in [0.25, 0.5, 0.75] {
            let t = ta + f * span;
            debug_assert_eq!(dom.label_at(t), ArcLabel::C);
            if let Some(x) = self.boundary_prevertex(t) {
                worst = worst.max(barycentric(self.triangle(C64::new(x, 0.0)))[0].abs());
            }
        }
        Ok(worst)
    }
}

/// Cardy value `u(d)` for a point `d` on arc A.
pub fn cardy_value(map: &TriangleMap, d: Point) -> Result<CardyValue, OracleError> {
    let dom = map.domain();
    let tol = dom.tolerance();
    let near = dom.nearest(d);
    if near.dist > tol {
        return Err(OracleError::ProbeOffArc(d));
    }
    let per = dom.perimeter();
    let ta = dom.mark_param(MarkName::A);
    let r = rel(near.param, ta, per);
    let rb = rel(dom.mark_param(MarkName::B), ta, per);
    let rc = rel(dom.mark_param(MarkName::C), ta, per);
    if r < rb - tol || r > rc + tol {
        return Err(OracleError::ProbeOffArc(d));
    }
    let value = if r <= rb + tol {
        0.0
    } else if r >= rc - tol {
        1.0
    } else {
        map.boundary_u(near.param)
    };
    Ok(CardyValue { value, accuracy: map.error_bound() })
}
