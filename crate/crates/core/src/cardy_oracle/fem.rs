//! Finite-element route to the Cardy value on convex domains.
//!
//! The harmonic function with value 0 on the boundary arc from b to d, 1 on
//! the arc from c to a and zero normal derivative elsewhere has Dirichlet
//! energy equal to the conformal modulus of the quadrilateral (b, d, c, a).
//! The Cardy value is the rectangle crossing probability at that modulus.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{cardy_rectangle, OracleError};
use crate::domain_approx::{ContinuousDomain, MarkName};
use crate::geometry::Point;
use crate::math;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FemEstimate {
    pub value: f64,
    /// Change of the value between the finest level and the extrapolation.
    pub accuracy: f64,
    /// Energies at `n`, `2n` and `4n` subdivisions per fan triangle edge.
    pub energies: [f64; 3],
    pub extrapolated_energy: f64,
    pub order: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Key {
    Center,
    Spoke(usize, usize),
    Edge(usize, usize),
    Inner(usize, usize, usize),
}

struct Csr {
    ptr: Vec<usize>,
    col: Vec<usize>,
    val: Vec<f64>,
}

impl Csr {
    fn from_rows(rows: Vec<Vec<(usize, f64)>>) -> Csr {
        let mut ptr = vec![0];
        let mut col = Vec::new();
        let mut val = Vec::new();
        for mut r in rows {
            r.sort_by_key(|e| e.0);
            let mut last = usize::MAX;
            for (c, v) in r {
                if c == last {
                    *val.last_mut().unwrap() += v;
                } else {
                    col.push(c);
                    val.push(v);
                    last = c;
                }
            }
            ptr.push(col.len());
        }
        Csr { ptr, col, val }
    }

    fn mul(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let mut s = 0.0;
            for k in self.ptr[i]..self.ptr[i + 1] {
                s += self.val[k] * x[self.col[k]];
            }
            *yi = s;
        }
    }

    fn diag(&self, i: usize) -> f64 {
        (self.ptr[i]..self.ptr[i + 1]).find(|&k| self.col[k] == i).map_or(0.0, |k| self.val[k])
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Energy of the discrete harmonic function on the refined fan mesh.
fn energy(verts: &[Point], fixed_vertex: &[Option<f64>], fixed_edge: &[Option<f64>], n: usize) -> Result<f64, OracleError> {
    let m = verts.len();
    let g = verts.iter().fold(Point::new(0.0, 0.0), |acc, &p| acc + p * (1.0 / m as f64));
    let mut ids: BTreeMap<Key, usize> = BTreeMap::new();
    let mut pos: Vec<Point> = Vec::new();
    let mut bc: Vec<Option<f64>> = Vec::new();
    let mut tris: Vec<[usize; 3]> = Vec::new();
    for k in 0..m {
        let (p, q) = (verts[k], verts[(k + 1) % m]);
        let mut node = |i: usize, j: usize| -> usize {
            let key = if i == 0 && j == 0 {
                Key::Center
            } else if j == 0 {
                Key::Spoke(k, i)
            } else if i == 0 {
                Key::Spoke((k + 1) % m, j)
            } else if i + j == n {
                Key::Edge(k, j)
            } else {
                Key::Inner(k, i, j)
            };
            *ids.entry(key).or_insert_with(|| {
                let fi = i as f64 / n as f64;
                let fj = j as f64 / n as f64;
                pos.push(g + (p - g) * fi + (q - g) * fj);
                bc.push(match key {
                    Key::Spoke(s, i) if i == n => fixed_vertex[s],
                    Key::Edge(e, _) => fixed_edge[e],
                    _ => None,
                });
                pos.len() - 1
            })
        };
        for i in 0..n {
            for j in 0..n - i {
                let a = node(i, j);
                let b = node(i + 1, j);
                let c = node(i, j + 1);
                tris.push([a, b, c]);
                if i + j + 1 < n {
                    let d = node(i + 1, j + 1);
                    tris.push([b, d, c]);
                }
            }
        }
    }
    let nn = pos.len();
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); nn];
    for t in &tris {
        let p = [pos[t[0]], pos[t[1]], pos[t[2]]];
        let area2 = (p[1] - p[0]).cross(p[2] - p[0]);
        let grads: [Point; 3] = core::array::from_fn(|i| {
            let (a, b) = (p[(i + 1) % 3], p[(i + 2) % 3]);
            Point::new(a.y - b.y, b.x - a.x) * (1.0 / area2)
        });
        for i in 0..3 {
            for j in 0..3 {
                rows[t[i]].push((t[j], 0.5 * area2.abs() * grads[i].dot(grads[j])));
            }
        }
    }
    let k = Csr::from_rows(rows);
    let mut h: Vec<f64> = bc.iter().map(|b| b.unwrap_or(0.5)).collect();
    // Conjugate gradients on the free nodes, Jacobi preconditioned.
    let free: Vec<bool> = bc.iter().map(|b| b.is_none()).collect();
    let mask = |v: &mut [f64]| v.iter_mut().zip(&free).for_each(|(x, &f)| if !f { *x = 0.0 });
    let dinv: Vec<f64> = (0..nn).map(|i| if free[i] { 1.0 / k.diag(i) } else { 0.0 }).collect();
    let mut r = vec![0.0; nn];
    k.mul(&h, &mut r);
    r.iter_mut().for_each(|x| *x = -*x);
    mask(&mut r);
    let mut z: Vec<f64> = r.iter().zip(&dinv).map(|(a, b)| a * b).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let r0 = math::sqrt(dot(&r, &r)).max(1e-300);
    let mut ap = vec![0.0; nn];
    let max_iter = 20 * nn + 100;
    let mut it = 0;
    while math::sqrt(dot(&r, &r)) > 1e-13 * r0 {
        it += 1;
        if it > max_iter {
            return Err(OracleError::NoConvergence { tol: 1e-13, iterations: it });
        }
        k.mul(&p, &mut ap);
        mask(&mut ap);
        let alpha = rz / dot(&p, &ap);
        for i in 0..nn {
            h[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        for i in 0..nn {
            z[i] = r[i] * dinv[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..nn {
            p[i] = z[i] + beta * p[i];
        }
    }
    let mut kh = vec![0.0; nn];
    k.mul(&h, &mut kh);
    Ok(dot(&h, &kh))
}

/// Cardy value at mark d from P1 elements on a fan of the convex outer
/// polygon, at `n`, `2n`, `4n` subdivisions with Richardson extrapolation.
pub fn cardy_value_fem(dom: &ContinuousDomain, n: usize) -> Result<FemEstimate, OracleError> {
    if !dom.slits().is_empty() {
        return Err(OracleError::Unsupported("slit domains"));
    }
    if !dom.outer().is_convex() {
        return Err(OracleError::Unsupported("non-convex outer polygon"));
    }
    if n == 0 {
        return Err(OracleError::Unsupported("zero subdivision"));
    }
    let per = dom.perimeter();
    let tol = dom.tolerance();
    let rel = |t: f64, from: f64| math::rem_euclid(t - from, per);
    let ta = dom.mark_param(MarkName::A);
    let td = dom.mark_param(MarkName::D);
    if !td.is_finite() {
        return Err(OracleError::MissingProbe);
    }
    let mut verts: Vec<(f64, Point)> = dom.cycle().iter().map(|s| (rel(s.t0, ta), s.a)).collect();
    let mut mark_r = [0.0; 4];
    for m in [MarkName::A, MarkName::B, MarkName::C, MarkName::D] {
        let t = dom.mark_param(m);
        let r = rel(t, ta);
        match verts.iter().find(|v| (v.0 - r).abs() <= tol || (per - (v.0 - r).abs()) <= tol) {
            Some(v) => mark_r[m as usize] = v.0,
            None => {
                verts.push((r, dom.point_at(t)));
                mark_r[m as usize] = r;
            }
        }
    }
    verts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let idx = |r: f64| verts.iter().position(|v| v.0 == r).expect("mark inserted");
    let (ia, ib, ic, id) = (idx(mark_r[0]), idx(mark_r[1]), idx(mark_r[2]), idx(mark_r[3]));
    verts.rotate_left(ia);
    let m = verts.len();
    let sh = |i: usize| (i + m - ia) % m;
    let (ib, ic, id) = (sh(ib), sh(ic), sh(id));
    let pts: Vec<Point> = verts.iter().map(|v| v.1).collect();
    let fixed_vertex: Vec<Option<f64>> = (0..m)
        .map(|k| {
            if (ib..=id).contains(&k) {
                Some(0.0)
            } else if k >= ic || k == 0 {
                Some(1.0)
            } else {
                None
            }
        })
        .collect();
    let fixed_edge: Vec<Option<f64>> = (0..m)
        .map(|k| {
            if (ib..id).contains(&k) {
                Some(0.0)
            } else if k >= ic {
                Some(1.0)
            } else {
                None
            }
        })
        .collect();
    let e = [
        energy(&pts, &fixed_vertex, &fixed_edge, n)?,
        energy(&pts, &fixed_vertex, &fixed_edge, 2 * n)?,
        energy(&pts, &fixed_vertex, &fixed_edge, 4 * n)?,
    ];
    let (d1, d2) = (e[0] - e[1], e[1] - e[2]);
    let (order, extrapolated) = if d1 > 0.0 && d2 > 0.0 {
        let p = math::log2(d1 / d2).clamp(0.5, 4.0);
        (p, e[2] - d2 / (math::pow(2.0, p) - 1.0))
    } else {
        (f64::NAN, e[2])
    };
    let value = cardy_rectangle(1.0 / extrapolated).value;
    let coarse = cardy_rectangle(1.0 / e[2]).value;
    Ok(FemEstimate { value, accuracy: (value - coarse).abs().max(1e-12), energies: e, extrapolated_energy: extrapolated, order })
}
