//! Continuum domains: a simple polygon with slits attached to its boundary,
//! three boundary marks and an optional probe mark.
//!
//! The boundary is stored as a closed counterclockwise cycle of segments in
//! which each slit appears twice, once per side. A slit's left side is the
//! one traversed from its attachment point towards its tip.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{ArcLabel, DomainError, MarkName};
use crate::math;
use crate::geometry::{
    point_in_polygon_tol, point_segment, segments_intersect, Location, Point, Polygon, Polyline,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Attachment {
    Outer,
    Slit { index: usize, side: Side },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Slit {
    pub path: Polyline,
    pub attach: Attachment,
}

/// A boundary point, with the slit side when the point is a two-sided
/// prime end.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryMark {
    pub point: Point,
    pub side: Option<Side>,
}

impl BoundaryMark {
    pub fn at(point: Point) -> Self {
        BoundaryMark { point, side: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Marks {
    pub a: BoundaryMark,
    pub b: BoundaryMark,
    pub c: BoundaryMark,
    pub d: Option<BoundaryMark>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Piece {
    Outer(usize),
    Slit { index: usize, side: Side },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CycleSegment {
    pub a: Point,
    pub b: Point,
    pub piece: Piece,
    /// Arc-length parameter of `a` along the cycle.
    pub t0: f64,
    pub label: ArcLabel,
}

impl CycleSegment {
    pub fn len(&self) -> f64 {
        self.a.dist(self.b)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousDomain {
    outer: Polygon,
    slits: Vec<Slit>,
    marks: Marks,
    z0: Point,
    cycle: Vec<CycleSegment>,
    perimeter: f64,
    params: [f64; 4],
    tol: f64,
}

/// Nearest boundary point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Nearest {
    pub dist: f64,
    pub segment: usize,
    pub param: f64,
    pub point: Point,
}

impl ContinuousDomain {
    pub fn new(outer: Polygon, slits: Vec<Slit>, marks: Marks, z0: Point) -> Result<Self, DomainError> {
        let tol = outer.tolerance();
        let mut raw: Vec<(Point, Point, Piece)> =
            outer.edges().enumerate().map(|(i, (a, b))| (a, b, Piece::Outer(i))).collect();
        for (i, slit) in slits.iter().enumerate() {
            validate_slit(&outer, &slits[..i], slit, i, tol)?;
            let p = slit.path.start();
            let want = match slit.attach {
                Attachment::Outer => None,
                Attachment::Slit { index, side } => {
                    if index >= i {
                        return Err(DomainError::SlitNotAttached(i));
                    }
                    Some(Piece::Slit { index, side })
                }
            };
            let host = raw
                .iter()
                .position(|(a, b, piece)| {
                    let kind_ok = match want {
                        None => matches!(piece, Piece::Outer(_)),
                        Some(w) => *piece == w,
                    };
                    kind_ok && point_segment(p, *a, *b).0 <= tol
                })
                .ok_or(DomainError::SlitNotAttached(i))?;
            let (ha, hb, hp) = raw[host];
            let pts = slit.path.points();
            let mut insert: Vec<(Point, Point, Piece)> = Vec::new();
            for w in pts.windows(2) {
                insert.push((w[0], w[1], Piece::Slit { index: i, side: Side::Left }));
            }
            for w in pts.windows(2).rev() {
                insert.push((w[1], w[0], Piece::Slit { index: i, side: Side::Right }));
            }
            let at = if p.dist(hb) <= tol {
                host + 1
            } else if p.dist(ha) <= tol {
                host
            } else {
                raw[host] = (ha, p, hp);
                raw.insert(host + 1, (p, hb, hp));
                host + 1
            };
            raw.splice(at..at, insert);
        }

        let mut dom = ContinuousDomain {
            outer,
            slits,
            marks,
            z0,
            cycle: Vec::new(),
            perimeter: 0.0,
            params: [0.0; 4],
            tol,
        };
        dom.set_cycle(&raw);
        if dom.locate(z0) != Location::Inside {
            return Err(DomainError::ReferenceOutside);
        }
        let ta = dom.locate_mark(MarkName::A, marks.a)?;
        let tb = dom.locate_mark(MarkName::B, marks.b)?;
        let tc = dom.locate_mark(MarkName::C, marks.c)?;
        let l = dom.perimeter;
        let rel = |t: f64| math::rem_euclid(t - ta, l);
        if !(rel(tb) > tol && rel(tc) > rel(tb) + tol) {
            return Err(DomainError::MarksNotCounterclockwise);
        }
        let td = match marks.d {
            Some(d) => {
                let td = dom.locate_mark(MarkName::D, d)?;
                if rel(td) < rel(tb) - tol || rel(td) > rel(tc) + tol {
                    return Err(DomainError::ProbeOffArc);
                }
                td
            }
            None => f64::NAN,
        };
        dom.params = [ta, tb, tc, td];
        // Split segments at the marks so that every segment carries one label.
        let mut split: Vec<(Point, Point, Piece)> = Vec::new();
        for s in &dom.cycle {
            let mut cuts: Vec<f64> = [ta, tb, tc]
                .iter()
                .copied()
                .filter(|&t| t > s.t0 + tol && t < s.t0 + s.len() - tol)
                .collect();
            cuts.sort_by(|x, y| x.total_cmp(y));
            let mut start = s.a;
            for t in cuts {
                let p = s.a.lerp(s.b, (t - s.t0) / s.len());
                split.push((start, p, s.piece));
                start = p;
            }
            split.push((start, s.b, s.piece));
        }
        dom.set_cycle(&split);
        for i in 0..dom.cycle.len() {
            let mid = dom.cycle[i].t0 + dom.cycle[i].len() / 2.0;
            dom.cycle[i].label = dom.label_at(mid);
        }
        Ok(dom)
    }

    fn set_cycle(&mut self, raw: &[(Point, Point, Piece)]) {
        let mut t = 0.0;
        self.cycle = raw
            .iter()
            .map(|&(a, b, piece)| {
                let s = CycleSegment { a, b, piece, t0: t, label: ArcLabel::C };
                t += a.dist(b);
                s
            })
            .collect();
        self.perimeter = t;
    }

    fn locate_mark(&self, name: MarkName, m: BoundaryMark) -> Result<f64, DomainError> {
        let mut cands: Vec<(f64, Piece)> = Vec::new();
        for s in &self.cycle {
            let (d, u) = point_segment(m.point, s.a, s.b);
            if d <= self.tol.max(1e-12) {
                let mut t = s.t0 + u * s.len();
                if t >= self.perimeter - self.tol {
                    t = 0.0;
                }
                cands.push((t, s.piece));
            }
        }
        if cands.is_empty() {
            return Err(DomainError::MarkOffBoundary(name));
        }
        let distinct = |c: &[(f64, Piece)]| {
            let mut ts: Vec<f64> = c.iter().map(|x| x.0).collect();
            ts.sort_by(|x, y| x.total_cmp(y));
            ts.dedup_by(|x, y| (*x - *y).abs() <= self.tol);
            ts
        };
        let ts = distinct(&cands);
        if ts.len() == 1 {
            return Ok(ts[0]);
        }
        let side = m.side.ok_or(DomainError::MarkAmbiguous(name))?;
        let on_side: Vec<(f64, Piece)> = cands
            .into_iter()
            .filter(|(_, p)| matches!(p, Piece::Slit { side: s, .. } if *s == side))
            .collect();
        distinct(&on_side).first().copied().ok_or(DomainError::MarkAmbiguous(name))
    }

    pub fn outer(&self) -> &Polygon {
        &self.outer
    }

    pub fn slits(&self) -> &[Slit] {
        &self.slits
    }

    pub fn marks(&self) -> &Marks {
        &self.marks
    }

    pub fn z0(&self) -> Point {
        self.z0
    }

    pub fn cycle(&self) -> &[CycleSegment] {
        &self.cycle
    }

    pub fn perimeter(&self) -> f64 {
        self.perimeter
    }

    pub fn tolerance(&self) -> f64 {
        self.tol
    }

    pub fn diameter(&self) -> f64 {
        self.outer.diameter()
    }

    /// Cycle parameter of a mark (NaN for an absent probe).
    pub fn mark_param(&self, m: MarkName) -> f64 {
        self.params[m as usize]
    }

    pub fn mark_point(&self, m: MarkName) -> Option<Point> {
        match m {
            MarkName::A => Some(self.marks.a.point),
            MarkName::B => Some(self.marks.b.point),
            MarkName::C => Some(self.marks.c.point),
            MarkName::D => self.marks.d.map(|d| d.point),
        }
    }

    /// Arc containing cycle parameter `t`.
    pub fn label_at(&self, t: f64) -> ArcLabel {
        let l = self.perimeter;
        let [ta, tb, tc, _] = self.params;
        let rel = |x: f64| math::rem_euclid(x - ta, l);
        let r = rel(t);
        if r < rel(tb) {
            ArcLabel::C
        } else if r < rel(tc) {
            ArcLabel::A
        } else {
            ArcLabel::B
        }
    }

    pub fn point_at(&self, t: f64) -> Point {
        let t = math::rem_euclid(t, self.perimeter);
        for s in &self.cycle {
            if t <= s.t0 + s.len() {
                return s.a.lerp(s.b, ((t - s.t0) / s.len()).clamp(0.0, 1.0));
            }
        }
        self.cycle[0].a
    }

    /// Nearest boundary point. Segments seen from their back side (the
    /// far face of a slit) only count through their endpoints; among
    /// equidistant candidates the first segment wins.
    pub fn nearest(&self, p: Point) -> Nearest {
        let mut best: Option<Nearest> = None;
        let mut fallback: Option<Nearest> = None;
        for (i, s) in self.cycle.iter().enumerate() {
            let (d, u) = point_segment(p, s.a, s.b);
            let cand = Nearest { dist: d, segment: i, param: s.t0 + u * s.len(), point: s.a.lerp(s.b, u) };
            let back = (s.b - s.a).cross(p - s.a) < 0.0 && u > 0.0 && u < 1.0;
            let slot = if back { &mut fallback } else { &mut best };
            if slot.is_none_or(|b| d < b.dist - self.tol) {
                *slot = Some(cand);
            }
        }
        best.or(fallback).expect("cycle is never empty")
    }

    pub fn distance_to_boundary(&self, p: Point) -> f64 {
        self.cycle.iter().map(|s| point_segment(p, s.a, s.b).0).fold(f64::INFINITY, f64::min)
    }

    /// Distances from `p` to the arcs, indexed by [`ArcLabel`], counting
    /// only boundary points seen from their interior side: a segment
    /// interior when `p` is on its left, a vertex when `p` is in its
    /// interior wedge. The two faces of a slit never both see `p`.
    pub fn arc_distances(&self, p: Point) -> [f64; 3] {
        let n = self.cycle.len();
        let mut out = [f64::INFINITY; 3];
        for (i, s) in self.cycle.iter().enumerate() {
            let (d, u) = point_segment(p, s.a, s.b);
            let visible = if u <= 0.0 {
                in_wedge(p, self.cycle[(i + n - 1) % n].a, s.a, s.b)
            } else if u >= 1.0 {
                in_wedge(p, s.a, s.b, self.cycle[(i + 1) % n].b)
            } else {
                (s.b - s.a).cross(p - s.a) >= 0.0
            };
            if visible {
                let k = s.label as usize;
                out[k] = out[k].min(d);
            }
        }
        out
    }

    pub fn locate(&self, p: Point) -> Location {
        if self.distance_to_boundary(p) <= self.tol {
            return Location::OnBoundary;
        }
        match point_in_polygon_tol(p, &self.outer, self.tol) {
            Location::Inside => Location::Inside,
            other => other,
        }
    }

    /// Closed boundary cycle as a vertex list (slit points repeated).
    pub fn cycle_vertices(&self) -> Vec<Point> {
        self.cycle.iter().map(|s| s.a).collect()
    }

    /// Same outer polygon and marks b, c, d with one more slit starting at
    /// mark a; its tip becomes the new mark a.
    pub fn slit_from_a(&self, path: Polyline) -> Result<ContinuousDomain, DomainError> {
        let a = self.marks.a;
        if path.start().dist(a.point) > self.tol {
            return Err(DomainError::SlitNotAttached(self.slits.len()));
        }
        let seg = self.nearest(a.point).segment;
        let attach = match self.cycle[seg].piece {
            Piece::Outer(_) => Attachment::Outer,
            Piece::Slit { index, side } => Attachment::Slit { index, side: a.side.unwrap_or(side) },
        };
        let tip = path.end();
        let mut slits = self.slits.clone();
        slits.push(Slit { path, attach });
        let marks = Marks { a: BoundaryMark::at(tip), ..self.marks };
        ContinuousDomain::new(self.outer.clone(), slits, marks, self.z0)
    }
}

/// Whether `p` lies in the interior wedge at `v` of a boundary traversed
/// `u -> v -> w` with the domain on the left.
fn in_wedge(p: Point, u: Point, v: Point, w: Point) -> bool {
    let (d_in, d_out, r) = (v - u, w - v, p - v);
    let (l_in, l_out) = (d_in.cross(r) >= 0.0, d_out.cross(r) >= 0.0);
    if d_in.cross(d_out) > 0.0 {
        l_in && l_out
    } else {
        l_in || l_out
    }
}

fn validate_slit(outer: &Polygon, earlier: &[Slit], slit: &Slit, i: usize, tol: f64) -> Result<(), DomainError> {
    let pts = slit.path.points();
    for p in &pts[1..] {
        if point_in_polygon_tol(*p, outer, tol) != Location::Inside {
            return Err(DomainError::SlitLeavesDomain(i));
        }
    }
    // The first segment may touch its host only at the attachment point.
    let nudge = |k: usize, a: Point, b: Point| if k == 0 { a.lerp(b, 1e-6) } else { a };
    for (k, (a, b)) in slit.path.segments().enumerate() {
        let a = nudge(k, a, b);
        if outer.edges().any(|(c, d)| segments_intersect(a, b, c, d)) {
            return Err(DomainError::SlitLeavesDomain(i));
        }
        for (j, other) in earlier.iter().enumerate() {
            if other.path.segments().any(|(c, d)| segments_intersect(a, b, c, d)) {
                return Err(DomainError::SlitsCross(j, i));
            }
        }
        for (m, (c, d)) in slit.path.segments().enumerate() {
            if m + 1 < k && segments_intersect(a, b, c, d) {
                return Err(DomainError::SlitsCross(i, i));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn square() -> Polygon {
        Polygon::new(vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(1.0, 1.0), Point::new(0.0, 1.0)])
            .unwrap()
    }

    fn corner_marks() -> Marks {
        Marks {
            a: BoundaryMark::at(Point::new(0.0, 0.0)),
            b: BoundaryMark::at(Point::new(1.0, 0.0)),
            c: BoundaryMark::at(Point::new(0.0, 1.0)),
            d: Some(BoundaryMark::at(Point::new(1.0, 1.0))),
        }
    }

    #[test]
    fn square_arcs() {
        let d = ContinuousDomain::new(square(), vec![], corner_marks(), Point::new(0.5, 0.5)).unwrap();
        assert_eq!(d.perimeter(), 4.0);
        assert_eq!(d.label_at(0.5), ArcLabel::C);
        assert_eq!(d.label_at(1.5), ArcLabel::A);
        assert_eq!(d.label_at(2.5), ArcLabel::A);
        assert_eq!(d.label_at(3.5), ArcLabel::B);
        assert_eq!(d.mark_param(MarkName::D), 2.0);
        assert_eq!(d.arc_distances(Point::new(0.5, 0.1)), [0.5, 0.5, 0.1]);
    }

    #[test]
    fn clockwise_marks_are_rejected() {
        let mut m = corner_marks();
        core::mem::swap(&mut m.b, &mut m.c);
        m.d = None;
        let r = ContinuousDomain::new(square(), vec![], m, Point::new(0.5, 0.5));
        assert_eq!(r.unwrap_err(), DomainError::MarksNotCounterclockwise);
    }

    #[test]
    fn slit_doubles_into_cycle() {
        let slit = Slit {
            path: Polyline::new(vec![Point::new(0.5, 0.0), Point::new(0.5, 0.5)]).unwrap(),
            attach: Attachment::Outer,
        };
        let marks = Marks { d: None, ..corner_marks() };
        let d = ContinuousDomain::new(square(), vec![slit], marks, Point::new(0.2, 0.7)).unwrap();
        assert!((d.perimeter() - 5.0).abs() < 1e-12);
        // Points left and right of the slit see different sides.
        let l = d.nearest(Point::new(0.45, 0.25));
        let r = d.nearest(Point::new(0.55, 0.25));
        assert_eq!(d.cycle()[l.segment].piece, Piece::Slit { index: 0, side: Side::Left });
        assert_eq!(d.cycle()[r.segment].piece, Piece::Slit { index: 0, side: Side::Right });
        assert!(l.param > 0.5 && l.param < 1.0);
        assert!(r.param > 1.0 && r.param < 1.5);
        assert_eq!(d.locate(Point::new(0.5, 0.3)), Location::OnBoundary);
    }

    #[test]
    fn two_sided_mark_needs_a_side() {
        let slit = Slit {
            path: Polyline::new(vec![Point::new(0.5, 0.0), Point::new(0.5, 0.5)]).unwrap(),
            attach: Attachment::Outer,
        };
        let mut m = Marks { d: None, ..corner_marks() };
        m.b = BoundaryMark::at(Point::new(0.5, 0.25));
        let r = ContinuousDomain::new(square(), vec![slit.clone()], m, Point::new(0.2, 0.7));
        assert_eq!(r.unwrap_err(), DomainError::MarkAmbiguous(MarkName::B));
        m.b.side = Some(Side::Right);
        let d = ContinuousDomain::new(square(), vec![slit], m, Point::new(0.2, 0.7)).unwrap();
        assert!((d.mark_param(MarkName::B) - 1.25).abs() < 1e-12);
    }

    #[test]
    fn slit_tip_becomes_mark_a() {
        let d = ContinuousDomain::new(square(), vec![], corner_marks(), Point::new(0.5, 0.5)).unwrap();
        let path = Polyline::new(vec![Point::new(0.0, 0.0), Point::new(0.3, 0.3)]).unwrap();
        let s = d.slit_from_a(path).unwrap();
        assert_eq!(s.marks().a.point, Point::new(0.3, 0.3));
        assert_eq!(s.label_at(s.mark_param(MarkName::A) + 0.01), ArcLabel::C);
        assert_eq!(s.label_at(s.mark_param(MarkName::A) - 0.01), ArcLabel::B);
    }

    #[test]
    fn bent_slit_faces_are_told_apart() {
        let m = Marks { a: BoundaryMark::at(Point::new(0.5, 0.0)), d: None, ..corner_marks() };
        let d = ContinuousDomain::new(square(), vec![], m, Point::new(0.25, 0.75)).unwrap();
        let path = Polyline::new(vec![Point::new(0.5, 0.0), Point::new(0.5, 0.2), Point::new(0.55, 0.35)]).unwrap();
        let s = d.slit_from_a(path).unwrap();
        let nearest = |p: Point| {
            let ds = s.arc_distances(p);
            let (k, _) = ds.iter().enumerate().min_by(|x, y| x.1.total_cmp(y.1)).unwrap();
            let mut sorted = ds;
            sorted.sort_by(|x, y| x.total_cmp(y));
            (k, sorted[1] - sorted[0])
        };
        // Points beside the bend on either side, closest to the bend vertex.
        let (left, gap_l) = nearest(Point::new(0.46, 0.21));
        let (right, gap_r) = nearest(Point::new(0.54, 0.19));
        assert_ne!(left, right);
        assert!(gap_l > 0.01 && gap_r > 0.01, "{gap_l} {gap_r}");
        let (low_l, _) = nearest(Point::new(0.48, 0.1));
        let (low_r, _) = nearest(Point::new(0.52, 0.1));
        assert_eq!((low_l, low_r), (left, right));
    }

    #[test]
    fn escaping_slit_is_rejected() {
        let slit = Slit {
            path: Polyline::new(vec![Point::new(0.5, 0.0), Point::new(0.5, 1.5)]).unwrap(),
            attach: Attachment::Outer,
        };
        let m = Marks { d: None, ..corner_marks() };
        let r = ContinuousDomain::new(square(), vec![slit], m, Point::new(0.2, 0.7));
        assert_eq!(r.unwrap_err(), DomainError::SlitLeavesDomain(0));
    }
}
