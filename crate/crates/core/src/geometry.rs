//! Planar primitives: points, polylines, simple polygons, containment and
//! curve distances.
//!
//! All tolerance decisions go through [`Polygon::tolerance`], which is
//! `1e-9` times the polygon diameter.

use alloc::vec::Vec;
use core::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::math;

/// Relative geometric tolerance (fraction of a diameter).
pub const REL_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeomError {
    #[error("non-finite coordinate at index {0}")]
    NonFinite(usize),
    #[error("need at least {need} points, got {got}")]
    TooFewPoints { need: usize, got: usize },
    #[error("consecutive points {0} and {1} coincide")]
    DegenerateSegment(usize, usize),
    #[error("polygon edges {0} and {1} intersect")]
    SelfIntersecting(usize, usize),
    #[error("polygon has zero area")]
    ZeroArea,
    #[error("step must be positive and finite")]
    BadStep,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn dot(self, o: Point) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the 3d cross product.
    pub fn cross(self, o: Point) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        math::hypot(self.x, self.y)
    }

    pub fn dist(self, o: Point) -> f64 {
        (self - o).norm()
    }

    pub fn lerp(self, o: Point, t: f64) -> Point {
        self + (o - self) * t
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, s: f64) -> Point {
        Point::new(self.x * s, self.y * s)
    }
}

fn check_points(pts: &[Point], need: usize) -> Result<(), GeomError> {
    if pts.len() < need {
        return Err(GeomError::TooFewPoints { need, got: pts.len() });
    }
    if let Some(i) = pts.iter().position(|p| !p.is_finite()) {
        return Err(GeomError::NonFinite(i));
    }
    Ok(())
}

/// Axis-aligned bounding box `(min, max)`.
pub fn bbox(pts: &[Point]) -> (Point, Point) {
    let mut lo = Point::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in pts {
        lo.x = lo.x.min(p.x);
        lo.y = lo.y.min(p.y);
        hi.x = hi.x.max(p.x);
        hi.y = hi.y.max(p.y);
    }
    (lo, hi)
}

/// Open polyline with at least two points and no repeated consecutive points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polyline {
    points: Vec<Point>,
}

impl Polyline {
    pub fn new(points: Vec<Point>) -> Result<Self, GeomError> {
        check_points(&points, 2)?;
        for i in 1..points.len() {
            if points[i] == points[i - 1] {
                return Err(GeomError::DegenerateSegment(i - 1, i));
            }
        }
        Ok(Polyline { points })
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn start(&self) -> Point {
        self.points[0]
    }

    pub fn end(&self) -> Point {
        self.points[self.points.len() - 1]
    }

    pub fn segments(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        self.points.windows(2).map(|w| (w[0], w[1]))
    }

    pub fn length(&self) -> f64 {
        self.segments().map(|(a, b)| a.dist(b)).sum()
    }

    pub fn reversed(&self) -> Polyline {
        let mut points = self.points.clone();
        points.reverse();
        Polyline { points }
    }

    /// Vertices plus extra points so that consecutive samples are at most
    /// `step` apart.
    pub fn densify(&self, step: f64) -> Vec<Point> {
        densify_chain(&self.points, step)
    }
}

fn densify_chain(pts: &[Point], step: f64) -> Vec<Point> {
    let mut out = Vec::with_capacity(pts.len());
    out.push(pts[0]);
    for w in pts.windows(2) {
        let len = w[0].dist(w[1]);
        let k = (math::ceil(len / step) as usize).max(1);
        for j in 1..=k {
            out.push(w[0].lerp(w[1], j as f64 / k as f64));
        }
    }
    out
}

/// Simple polygon, stored counterclockwise without a repeated closing point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Point>", into = "Vec<Point>")]
pub struct Polygon {
    vertices: Vec<Point>,
    diameter: f64,
}

impl TryFrom<Vec<Point>> for Polygon {
    type Error = GeomError;
    fn try_from(v: Vec<Point>) -> Result<Self, GeomError> {
        Polygon::new(v)
    }
}

impl From<Polygon> for Vec<Point> {
    fn from(p: Polygon) -> Vec<Point> {
        p.vertices
    }
}

/// Result of a containment query.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Location {
    Inside,
    OnBoundary,
    Outside,
}

impl Polygon {
    /// Validates simplicity and reorients clockwise input.
    pub fn new(mut vertices: Vec<Point>) -> Result<Self, GeomError> {
        check_points(&vertices, 3)?;
        if vertices.len() > 3 && vertices.first() == vertices.last() {
            vertices.pop();
        }
        let n = vertices.len();
        for i in 0..n {
            if vertices[i] == vertices[(i + 1) % n] {
                return Err(GeomError::DegenerateSegment(i, (i + 1) % n));
            }
        }
        let area = signed_area(&vertices);
        let (lo, hi) = bbox(&vertices);
        let diam = lo.dist(hi);
        if area.abs() <= REL_TOLERANCE * diam * diam {
            return Err(GeomError::ZeroArea);
        }
        for i in 0..n {
            for j in i + 1..n {
                let adjacent = j == i + 1 || (i == 0 && j == n - 1);
                let (a, b) = (vertices[i], vertices[(i + 1) % n]);
                let (c, d) = (vertices[j], vertices[(j + 1) % n]);
                if adjacent {
                    // Adjacent edges may only share their common vertex.
                    let shared = if j == i + 1 { b } else { a };
                    let (p, q) = if j == i + 1 { (a, d) } else { (b, c) };
                    if collinear_overlap(shared, p, q) {
                        return Err(GeomError::SelfIntersecting(i, j));
                    }
                } else if segments_intersect(a, b, c, d) {
                    return Err(GeomError::SelfIntersecting(i, j));
                }
            }
        }
        if area < 0.0 {
            vertices.reverse();
        }
        let mut diameter: f64 = 0.0;
        for (i, p) in vertices.iter().enumerate() {
            for q in &vertices[i + 1..] {
                diameter = diameter.max(p.dist(*q));
            }
        }
        Ok(Polygon { vertices, diameter })
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn edges(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.vertices)
    }

    pub fn bbox(&self) -> (Point, Point) {
        bbox(&self.vertices)
    }

    /// Largest vertex-to-vertex distance.
    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    pub fn tolerance(&self) -> f64 {
        REL_TOLERANCE * self.diameter()
    }

    pub fn perimeter(&self) -> f64 {
        self.edges().map(|(a, b)| a.dist(b)).sum()
    }

    /// Closed boundary as a polyline (first vertex repeated at the end).
    pub fn boundary(&self) -> Polyline {
        let mut pts = self.vertices.clone();
        pts.push(self.vertices[0]);
        Polyline { points: pts }
    }

    /// Same shape with every vertex mapped through `f`.
    pub fn map(&self, f: impl Fn(Point) -> Point) -> Result<Polygon, GeomError> {
        Polygon::new(self.vertices.iter().map(|p| f(*p)).collect())
    }

    pub fn is_convex(&self) -> bool {
        let n = self.vertices.len();
        (0..n).all(|i| {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            let c = self.vertices[(i + 2) % n];
            (b - a).cross(c - b) >= -self.tolerance()
        })
    }
}

fn signed_area(v: &[Point]) -> f64 {
    let n = v.len();
    0.5 * (0..n).map(|i| v[i].cross(v[(i + 1) % n])).sum::<f64>()
}

fn collinear_overlap(shared: Point, p: Point, q: Point) -> bool {
    // Edges shared->p and shared->q fold back onto each other.
    let u = p - shared;
    let w = q - shared;
    u.cross(w).abs() <= 1e-12 * u.norm() * w.norm() && u.dot(w) > 0.0
}

fn orient(a: Point, b: Point, c: Point) -> f64 {
    (b - a).cross(c - a)
}

fn on_segment(a: Point, b: Point, p: Point) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

/// Closed-segment intersection test (touching counts).
pub fn segments_intersect(a: Point, b: Point, c: Point, d: Point) -> bool {
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    (d1 == 0.0 && on_segment(c, d, a))
        || (d2 == 0.0 && on_segment(c, d, b))
        || (d3 == 0.0 && on_segment(a, b, c))
        || (d4 == 0.0 && on_segment(a, b, d))
}

/// Distance from `p` to the closed segment `[a, b]`, with the segment
/// parameter of the nearest point.
pub fn point_segment(p: Point, a: Point, b: Point) -> (f64, f64) {
    let ab = b - a;
    let len2 = ab.dot(ab);
    let t = if len2 == 0.0 { 0.0 } else { ((p - a).dot(ab) / len2).clamp(0.0, 1.0) };
    (p.dist(a + ab * t), t)
}

pub fn distance_point_segment(p: Point, a: Point, b: Point) -> f64 {
    point_segment(p, a, b).0
}

pub fn distance_point_to_polyline(p: Point, line: &Polyline) -> f64 {
    line.segments()
        .map(|(a, b)| distance_point_segment(p, a, b))
        .fold(f64::INFINITY, f64::min)
}

pub fn distance_point_to_boundary(p: Point, poly: &Polygon) -> f64 {
    poly.edges()
        .map(|(a, b)| distance_point_segment(p, a, b))
        .fold(f64::INFINITY, f64::min)
}

/// Containment with the polygon's own tolerance band for `OnBoundary`.
pub fn point_in_polygon(p: Point, poly: &Polygon) -> Location {
    point_in_polygon_tol(p, poly, poly.tolerance())
}

pub fn point_in_polygon_tol(p: Point, poly: &Polygon, tol: f64) -> Location {
    if distance_point_to_boundary(p, poly) <= tol {
        return Location::OnBoundary;
    }
    if winding_contains(p, &poly.vertices) {
        Location::Inside
    } else {
        Location::Outside
    }
}

/// Crossing-number test for a closed vertex ring (no boundary handling).
pub fn winding_contains(p: Point, ring: &[Point]) -> bool {
    let n = ring.len();
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (ring[i], ring[j]);
        if (a.y > p.y) != (b.y > p.y) {
            let x = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
            if p.x < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

fn default_step(a: &Polyline, b: &Polyline) -> f64 {
    a.length().max(b.length()) / 1000.0
}

/// Discrete Fréchet distance between densified samplings, default step of
/// one thousandth of the longer curve.
pub fn frechet_distance(a: &Polyline, b: &Polyline) -> f64 {
    let step = default_step(a, b);
    frechet_distance_with_step(a, b, step).unwrap_or(f64::NAN)
}

pub fn frechet_distance_with_step(a: &Polyline, b: &Polyline, step: f64) -> Result<f64, GeomError> {
    weighted_frechet_distance(a, b, step, |_| 1.0)
}

/// Discrete Fréchet distance where the coupling cost of a pair is
/// `weight(midpoint) * distance`. Weights must be positive.
pub fn weighted_frechet_distance<W>(a: &Polyline, b: &Polyline, step: f64, weight: W) -> Result<f64, GeomError>
where
    W: Fn(Point) -> f64,
{
    if !(step > 0.0 && step.is_finite()) {
        return Err(GeomError::BadStep);
    }
    let pa = a.densify(step);
    let pb = b.densify(step);
    let cost = |i: usize, j: usize| weight(pa[i].lerp(pb[j], 0.5)) * pa[i].dist(pb[j]);
    let m = pb.len();
    let mut prev = alloc::vec![0.0f64; m];
    let mut cur = alloc::vec![0.0f64; m];
    for i in 0..pa.len() {
        for j in 0..m {
            let c = cost(i, j);
            cur[j] = match (i, j) {
                (0, 0) => c,
                (0, _) => c.max(cur[j - 1]),
                (_, 0) => c.max(prev[0]),
                _ => c.max(prev[j].min(prev[j - 1]).min(cur[j - 1])),
            };
        }
        core::mem::swap(&mut prev, &mut cur);
    }
    Ok(prev[m - 1])
}

/// Hausdorff distance; samples of each curve are measured against the
/// other curve's exact segments.
pub fn hausdorff_distance(a: &Polyline, b: &Polyline) -> f64 {
    let step = default_step(a, b);
    let one = |x: &Polyline, y: &Polyline| {
        x.densify(step)
            .into_iter()
            .map(|p| distance_point_to_polyline(p, y))
            .fold(0.0, f64::max)
    };
    one(a, b).max(one(b, a))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn unit_square() -> Polygon {
        Polygon::new(vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(0.0, 1.0),
        ])
        .unwrap()
    }

    #[test]
    fn square_containment() {
        let sq = unit_square();
        assert_eq!(point_in_polygon(Point::new(0.5, 0.5), &sq), Location::Inside);
        assert_eq!(point_in_polygon(Point::new(1.0, 0.5), &sq), Location::OnBoundary);
        assert_eq!(point_in_polygon(Point::new(1.5, 0.5), &sq), Location::Outside);
        assert_eq!(point_in_polygon(Point::new(0.0, 0.0), &sq), Location::OnBoundary);
    }

    #[test]
    fn clockwise_input_is_reoriented() {
        let p = Polygon::new(vec![
            Point::new(0.0, 0.0),
            Point::new(0.0, 1.0),
            Point::new(1.0, 1.0),
            Point::new(1.0, 0.0),
        ])
        .unwrap();
        assert!(p.area() > 0.0);
    }

    #[test]
    fn bowtie_is_rejected() {
        let r = Polygon::new(vec![
            Point::new(0.0, 0.0),
            Point::new(2.0, 2.0),
            Point::new(2.0, 0.0),
            Point::new(0.0, 1.0),
        ]);
        assert!(matches!(r, Err(GeomError::SelfIntersecting(_, _))));
    }

    #[test]
    fn collinear_spike_is_rejected() {
        let r = Polygon::new(vec![
            Point::new(0.0, 0.0),
            Point::new(2.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 1.0),
        ]);
        assert!(r.is_err());
    }

    #[test]
    fn nan_and_short_inputs_fail() {
        assert_eq!(
            Polyline::new(vec![Point::new(0.0, f64::NAN), Point::new(1.0, 0.0)]),
            Err(GeomError::NonFinite(0))
        );
        assert!(matches!(
            Polygon::new(vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0)]),
            Err(GeomError::TooFewPoints { .. })
        ));
    }

    #[test]
    fn tent_frechet_is_half() {
        // The apex sits 0.5 above the nearest segment point.
        let seg = Polyline::new(vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0)]).unwrap();
        let tent = Polyline::new(vec![Point::new(0.0, 0.0), Point::new(0.5, 0.5), Point::new(1.0, 0.0)]).unwrap();
        let step = 1e-3;
        let d = frechet_distance_with_step(&seg, &tent, step).unwrap();
        assert!((d - 0.5).abs() <= step, "{d}");
        assert!((hausdorff_distance(&seg, &tent) - 0.5).abs() <= 2e-3);
    }

    #[test]
    fn identical_curves_have_zero_distance() {
        let c = Polyline::new(vec![Point::new(0.0, 0.0), Point::new(0.3, 0.9), Point::new(1.0, 0.2)]).unwrap();
        assert_eq!(frechet_distance(&c, &c), 0.0);
        assert!(hausdorff_distance(&c, &c) < 1e-12);
    }

    #[test]
    fn frechet_sees_direction() {
        // Same trace, opposite parametrisation: Hausdorff 0, Fréchet 1.
        let c = Polyline::new(vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0)]).unwrap();
        let r = c.reversed();
        assert!(hausdorff_distance(&c, &r) < 1e-12);
        assert!((frechet_distance(&c, &r) - 1.0).abs() < 1e-12);
    }
}
