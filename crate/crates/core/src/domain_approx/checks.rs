//! Auditors for approximation sequences. Each returns a report whose
//! failures carry a concrete witness.

use alloc::collections::{BTreeSet, VecDeque};
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::continuum::ContinuousDomain;
use super::discrete::{tile_inside, BoundaryEdge, DiscreteDomain};
use super::{ArcLabel, CheckError, MarkName};
use crate::geometry::{hausdorff_distance, point_segment, winding_contains, Location, Point, Polyline};
use crate::lattice::{center, site_containing, SiteCoord, VertexId, NONE};
use crate::math;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Witness {
    Point(Point),
    Tile(SiteCoord),
    Edge(BoundaryEdge),
    /// Two boundary edges that should share a label but do not.
    EdgePair(BoundaryEdge, BoundaryEdge),
    /// A point together with the index of the approximation it came from.
    Indexed(usize, Point),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub pass: bool,
    pub witness: Option<Witness>,
}

impl CheckOutcome {
    pub const PASS: CheckOutcome = CheckOutcome { pass: true, witness: None };

    fn from_witness(w: Option<Witness>) -> Self {
        CheckOutcome { pass: w.is_none(), witness: w }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelReport {
    pub tol_conv: f64,
    /// Interior probes are covered eventually.
    pub i_i: CheckOutcome,
    /// Complement points do not sit deep inside the domain.
    pub i_ii: CheckOutcome,
    /// Exterior and boundary probes are close to the complement.
    pub e: CheckOutcome,
}

impl KernelReport {
    pub fn passed(&self) -> bool {
        self.i_i.pass && self.i_ii.pass && self.e.pass
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InteriorReport {
    /// Every tile lies inside the domain.
    pub tiles_inside: CheckOutcome,
    /// Grid probes farther than one tile from the boundary are covered.
    pub coverage: CheckOutcome,
    /// Labels are contiguous, marks are close, labels match nearest arcs.
    pub arcs: CheckOutcome,
    /// Hausdorff distance of each discrete arc to its continuum arc,
    /// indexed by [`ArcLabel`].
    pub eta: [f64; 3],
}

impl InteriorReport {
    pub fn passed(&self) -> bool {
        self.tiles_inside.pass && self.coverage.pass && self.arcs.pass
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WellOrganizedReport {
    pub monochrome: bool,
    pub label: Option<ArcLabel>,
    /// Tiles in the flooded region next to the connector.
    pub region_size: usize,
    pub witness: Option<Witness>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomotopyReport {
    pub consistent: bool,
    pub path_len: usize,
    pub region_size: usize,
    pub witness: Option<Witness>,
}

/// Kernel-convergence audit of a sequence ordered by decreasing scale.
///
/// Each approximation is audited at tolerance `2 eps` of its own scale,
/// which equals `tol_conv` for the finest one.
pub fn check_kernel_convergence(
    seq: &[DiscreteDomain],
    dom: &ContinuousDomain,
    probes: &[Point],
) -> Result<KernelReport, CheckError> {
    if seq.len() < 3 {
        return Err(CheckError::InsufficientSequence { need: 3, got: seq.len() });
    }
    let finest = seq.last().unwrap();
    let tol_conv = 2.0 * finest.scale().eps();

    // (i_I): interior probes clear of the boundary are covered at the end.
    let i_i = probes
        .iter()
        .find(|&&p| dom.locate(p) == Location::Inside && dom.distance_to_boundary(p) > tol_conv && !finest.covers(p))
        .map(|&p| Witness::Indexed(seq.len() - 1, p));

    // (i_II): complement points (tiles just outside each boundary, plus
    // uncovered probes) stay near or outside the domain.
    let mut i_ii = None;
    'outer: for (n, dd) in seq.iter().enumerate() {
        let tol = 2.0 * dd.scale().eps();
        let deep = |p: Point| dom.locate(p) == Location::Inside && dom.distance_to_boundary(p) > tol;
        for c in principal_cycles(dd) {
            for e in &dd.cycles()[c] {
                let q = center(e.across(), dd.scale());
                if deep(q) {
                    i_ii = Some(Witness::Indexed(n, q));
                    break 'outer;
                }
            }
        }
        for &p in probes {
            if !dd.covers(p) && deep(p) {
                i_ii = Some(Witness::Indexed(n, p));
                break 'outer;
            }
        }
    }

    // (e): exterior and boundary probes have complement points nearby.
    let walls: Vec<(Point, Point)> = principal_cycles(finest)
        .flat_map(|c| finest.cycles()[c].iter())
        .map(|e| (e.start_vertex().position(finest.scale()), e.end_vertex().position(finest.scale())))
        .collect();
    let e = probes
        .iter()
        .find(|&&p| {
            dom.locate(p) != Location::Inside
                && finest.covers(p)
                && walls.iter().map(|&(a, b)| point_segment(p, a, b).0).fold(f64::INFINITY, f64::min) > tol_conv
        })
        .map(|&p| Witness::Indexed(seq.len() - 1, p));

    Ok(KernelReport {
        tol_conv,
        i_i: CheckOutcome::from_witness(i_i),
        i_ii: CheckOutcome::from_witness(i_ii),
        e: CheckOutcome::from_witness(e),
    })
}

fn principal_cycles(dd: &DiscreteDomain) -> impl Iterator<Item = usize> + '_ {
    (0..dd.cycles().len()).filter(move |&c| dd.contains_principal(dd.cycles()[c][0].site))
}

/// Probe grid used by the coverage audit.
pub fn probe_grid(dom: &ContinuousDomain, n: usize) -> Vec<Point> {
    let (lo, hi) = dom.outer().bbox();
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let x = lo.x + (hi.x - lo.x) * (i as f64 + 0.5) / n as f64;
            let y = lo.y + (hi.y - lo.y) * (j as f64 + 0.5) / n as f64;
            out.push(Point::new(x, y));
        }
    }
    out
}

pub fn check_interior_conditions(dd: &DiscreteDomain, dom: &ContinuousDomain) -> InteriorReport {
    let scale = dd.scale();
    let eps = scale.eps();
    let tiles_inside = dd.sites().iter().find(|&&s| !tile_inside(dom, s, scale)).map(|&s| Witness::Tile(s));

    let coverage = probe_grid(dom, 64)
        .into_iter()
        .find(|&p| dom.locate(p) == Location::Inside && dom.distance_to_boundary(p) > eps && !dd.covers(p))
        .map(Witness::Point);

    InteriorReport {
        tiles_inside: CheckOutcome::from_witness(tiles_inside),
        coverage: CheckOutcome::from_witness(coverage),
        arcs: CheckOutcome::from_witness(arc_witness(dd, dom)),
        eta: arc_eta(dd, dom),
    }
}

fn arc_witness(dd: &DiscreteDomain, dom: &ContinuousDomain) -> Option<Witness> {
    let scale = dd.scale();
    let window = dd.delta() + scale.eps();
    let cyc = dd.boundary_cycle();
    let labels = dd.boundary_labels();
    let n = cyc.len();

    // Marks close to their continuum targets.
    for m in [MarkName::A, MarkName::B, MarkName::C, MarkName::D] {
        let (Some(target), Some(v)) = (dom.mark_point(m), dd.mark_vertex(m)) else { continue };
        let p = v.position(scale);
        if p.dist(target) > window {
            return Some(Witness::Point(p));
        }
    }

    // Principal labels: C from a to b, A from b to c, B from c to a.
    let [ia, ib, ic] = [MarkName::A, MarkName::B, MarkName::C].map(|m| dd.mark_position(m).unwrap());
    let rel = |i: usize| (i + n - ia) % n;
    for j in 0..n {
        let r = (j + 2 * n - ia - 1) % n;
        let want = if r < rel(ib) {
            ArcLabel::C
        } else if r < rel(ic) {
            ArcLabel::A
        } else {
            ArcLabel::B
        };
        if labels[j] != Some(want) {
            let anchor = cyc[([ia, ib, ic][anchor_index(want)] + 1) % n];
            return Some(Witness::EdgePair(anchor, cyc[j]));
        }
    }

    // Away from the marks every edge carries its nearest continuum arc.
    let marks: Vec<Point> = [MarkName::A, MarkName::B, MarkName::C].iter().filter_map(|&m| dom.mark_point(m)).collect();
    for (c, edges) in dd.cycles().iter().enumerate() {
        for (j, e) in edges.iter().enumerate() {
            let mid = e.midpoint(scale);
            if marks.iter().any(|m| m.dist(mid) <= window) {
                continue;
            }
            let d = dom.arc_distances(mid);
            let mut order = ArcLabel::ALL;
            order.sort_by(|x, y| d[*x as usize].total_cmp(&d[*y as usize]));
            if d[order[1] as usize] - d[order[0] as usize] <= dom.tolerance() {
                continue;
            }
            if dd.cycle_labels(c)[j] != Some(order[0]) {
                return Some(Witness::Edge(*e));
            }
        }
    }
    None
}

/// Edge right after the mark that opens the run of `label`.
fn anchor_index(label: ArcLabel) -> usize {
    match label {
        ArcLabel::C => 0,
        ArcLabel::A => 1,
        ArcLabel::B => 2,
    }
}

fn arc_eta(dd: &DiscreteDomain, dom: &ContinuousDomain) -> [f64; 3] {
    let scale = dd.scale();
    let cyc = dd.boundary_cycle();
    let n = cyc.len();
    let mut eta = [f64::NAN; 3];
    let starts = [MarkName::A, MarkName::B, MarkName::C];
    let ends = [MarkName::B, MarkName::C, MarkName::A];
    let labels = [ArcLabel::C, ArcLabel::A, ArcLabel::B];
    for k in 0..3 {
        let i0 = dd.mark_position(starts[k]).unwrap();
        let i1 = dd.mark_position(ends[k]).unwrap();
        let mut pts = vec![cyc[i0].end_vertex().position(scale)];
        let mut i = i0;
        while i != i1 {
            i = (i + 1) % n;
            pts.push(cyc[i].end_vertex().position(scale));
        }
        let discrete = polyline_dedup(pts);
        let continuum = continuum_arc(dom, starts[k], ends[k]);
        if let (Some(a), Some(b)) = (discrete, continuum) {
            eta[labels[k] as usize] = hausdorff_distance(&a, &b);
        }
    }
    eta
}

fn polyline_dedup(mut pts: Vec<Point>) -> Option<Polyline> {
    pts.dedup_by(|a, b| a.dist(*b) == 0.0);
    Polyline::new(pts).ok()
}

/// Continuum boundary from mark `from` to mark `to`, counterclockwise.
fn continuum_arc(dom: &ContinuousDomain, from: MarkName, to: MarkName) -> Option<Polyline> {
    let l = dom.perimeter();
    let t0 = dom.mark_param(from);
    let span = math::rem_euclid(dom.mark_param(to) - t0, l);
    let mut pts = vec![dom.point_at(t0)];
    let cycle = dom.cycle();
    let mut breaks: Vec<f64> = cycle.iter().map(|s| math::rem_euclid(s.t0 - t0, l)).filter(|&r| r > 0.0 && r < span).collect();
    breaks.sort_by(f64::total_cmp);
    for r in breaks {
        pts.push(dom.point_at(t0 + r));
    }
    pts.push(dom.point_at(t0 + span));
    polyline_dedup(pts)
}

/// Monochrome test for the boundary run from position `p` to position
/// `p2` on the principal cycle (positions index cycle edges and stand for
/// their end vertices).
///
/// The connector is the chain of tiles along the run, minus its ends inside
/// the `delta`-disks; the region is everything enclosed between the run and
/// the connector and reachable from it. All boundary edges met by that
/// region must carry one label.
pub fn check_well_organized(
    dd: &DiscreteDomain,
    p: usize,
    p2: usize,
    delta: f64,
) -> Result<WellOrganizedReport, CheckError> {
    let scale = dd.scale();
    let cyc = dd.boundary_cycle();
    let n = cyc.len();
    if p >= n || p2 >= n || p == p2 {
        return Err(CheckError::InvalidParameters("positions must be distinct cycle indices"));
    }
    let vpos = |i: usize| cyc[i % n].end_vertex().position(scale);
    let (cp, cq) = (vpos(p), vpos(p2));
    if !(delta > 0.0) || cp.dist(cq) <= 2.0 * delta {
        return Err(CheckError::InvalidParameters("delta-disks around p and p' must be disjoint"));
    }
    let len = (p2 + n - p) % n;
    // Last exit from the disk at p, then first entry into the disk at p'.
    let s = (0..=len).rev().find(|&k| vpos(p + k).dist(cp) <= delta).unwrap();
    let e = (s + 1..=len).find(|&k| vpos(p + k).dist(cq) <= delta).unwrap_or(len);
    if e <= s + 1 {
        return Err(CheckError::InvalidParameters("no boundary run between the disks"));
    }
    let run: Vec<usize> = (s + 1..=e).map(|k| (p + k) % n).collect();

    let outside = |t: SiteCoord| {
        let c = center(t, scale);
        c.dist(cp) > delta && c.dist(cq) > delta
    };
    // Shore chain: tiles met while walking the run, including the tiles
    // swept around each vertex between consecutive edges.
    let mut shore: Vec<SiteCoord> = Vec::new();
    for w in run.windows(2) {
        let (e0, e1) = (cyc[w[0]], cyc[w[1]]);
        for t in tiles_around(dd, e0, e1) {
            if shore.last() != Some(&t) {
                shore.push(t);
            }
        }
    }
    if shore.is_empty() {
        shore.push(cyc[run[0]].site);
    }
    // The connector is the shore with its ends inside the disks dropped.
    let (i0, i1) = match (shore.iter().position(|&t| outside(t)), shore.iter().rposition(|&t| outside(t))) {
        (Some(i0), Some(i1)) => (i0, i1),
        _ => return Err(CheckError::NoConnector),
    };
    let connector = shore[i0..=i1].to_vec();

    // Region enclosed by the run and the connector.
    let mut ring: Vec<Point> = vec![vpos(p + s)];
    ring.extend(run.iter().map(|&i| vpos(i)));
    ring.extend(connector.iter().rev().map(|&t| center(t, scale)));
    let region = dd.region();
    let on_connector: BTreeSet<SiteCoord> = connector.iter().copied().collect();
    let allowed = |i: usize| {
        let t = region.sites()[i];
        dd.is_principal(i) && outside(t) && (on_connector.contains(&t) || winding_contains(center(t, scale), &ring))
    };
    let mut seen = vec![false; region.len()];
    let mut queue = VecDeque::new();
    for t in &connector {
        let i = region.index_of(*t).unwrap();
        if !seen[i] {
            seen[i] = true;
            queue.push_back(i);
        }
    }
    let mut size = 0;
    // Boundary met by the region: the run itself and every other boundary
    // edge strictly inside the ring. Edges of connector tiles facing away
    // from the run lie outside.
    let mut touched: Vec<BoundaryEdge> = run.iter().map(|&i| cyc[i]).collect();
    while let Some(i) = queue.pop_front() {
        size += 1;
        for k in 0..6 {
            let j = region.neighbor(i, k);
            if j == NONE {
                let e = BoundaryEdge { site: region.sites()[i], dir: k as u8 };
                if winding_contains(e.midpoint(scale), &ring) {
                    touched.push(e);
                }
            } else if !seen[j as usize] && allowed(j as usize) {
                seen[j as usize] = true;
                queue.push_back(j as usize);
            }
        }
    }
    let first = touched[0];
    let label = dd.edge_label(first).flatten();
    let witness = touched
        .iter()
        .find(|&&t| dd.edge_label(t).flatten() != label)
        .map(|&t| Witness::EdgePair(first, t));
    Ok(WellOrganizedReport { monochrome: witness.is_none(), label, region_size: size, witness })
}

/// Tiles of the region around the vertex shared by consecutive boundary
/// edges `e0` and `e1`, in walking order.
fn tiles_around(dd: &DiscreteDomain, e0: BoundaryEdge, e1: BoundaryEdge) -> Vec<SiteCoord> {
    let region = dd.region();
    let mut out = vec![e0.site];
    let mut h = region.index_of(e0.site).unwrap();
    let mut d = e0.dir as usize;
    for _ in 0..6 {
        let site = region.sites()[h];
        if site == e1.site && (d + 1) % 6 == e1.dir as usize {
            break;
        }
        let nb = region.neighbor(h, (d + 1) % 6);
        if nb == NONE {
            break;
        }
        h = nb as usize;
        d = (d + 4) % 6;
        out.push(region.sites()[h]);
    }
    out
}

/// Shortest tile path inside the principal component through allowed tiles.
fn bfs_path(
    dd: &DiscreteDomain,
    from: SiteCoord,
    to: SiteCoord,
    allowed: &impl Fn(SiteCoord) -> bool,
) -> Option<Vec<SiteCoord>> {
    let region = dd.region();
    let s = region.index_of(from)?;
    let t = region.index_of(to)?;
    let mut prev = vec![NONE; region.len()];
    prev[s] = s as u32;
    let mut queue = VecDeque::from([s]);
    while let Some(i) = queue.pop_front() {
        if i == t {
            let mut path = vec![region.sites()[t]];
            let mut k = t;
            while k != s {
                k = prev[k] as usize;
                path.push(region.sites()[k]);
            }
            path.reverse();
            return Some(path);
        }
        for k in 0..6 {
            let j = region.neighbor(i, k);
            if j != NONE && prev[j as usize] == NONE && (j as usize == t || allowed(region.sites()[j as usize])) {
                prev[j as usize] = i as u32;
                queue.push_back(j as usize);
            }
        }
    }
    None
}

/// Reachability surrogate for the bottom-component argument.
///
/// A tile path joins the tiles at `a_eps` and `b_eps` while keeping
/// `2 delta_star` away from the continuum arc C outside the `big_delta`
/// disks around a and b. Flooding from the tile at `q` without crossing
/// that path or entering the disks must meet only C-labeled boundary edges.
pub fn check_homotopical_consistency(
    dd: &DiscreteDomain,
    dom: &ContinuousDomain,
    q: Point,
    big_delta: f64,
    delta_star: f64,
) -> Result<HomotopyReport, CheckError> {
    if !(delta_star > 0.0 && big_delta >= 10.0 * delta_star) {
        return Err(CheckError::InvalidParameters("need big_delta >= 10 delta_star > 0"));
    }
    let a = dom.mark_point(MarkName::A).unwrap();
    let b = dom.mark_point(MarkName::B).unwrap();
    if q.dist(a) <= big_delta || q.dist(b) <= big_delta {
        return Err(CheckError::InvalidParameters("q must be farther than big_delta from a and b"));
    }
    if dom.arc_distances(q)[ArcLabel::C as usize] > delta_star {
        return Err(CheckError::InvalidParameters("q must be within delta_star of arc C"));
    }
    let scale = dd.scale();
    let in_disks = |t: SiteCoord| {
        let c = center(t, scale);
        c.dist(a) <= big_delta || c.dist(b) <= big_delta
    };
    let away_from_c = |t: SiteCoord| {
        let c = center(t, scale);
        in_disks(t) || dom.arc_distances(c)[ArcLabel::C as usize] > 2.0 * delta_star
    };
    let start = vertex_tile(dd, dd.mark_vertex(MarkName::A).unwrap()).ok_or(CheckError::PathNotFound)?;
    let goal = vertex_tile(dd, dd.mark_vertex(MarkName::B).unwrap()).ok_or(CheckError::PathNotFound)?;
    let path = bfs_path(dd, start, goal, &away_from_c).ok_or(CheckError::PathNotFound)?;
    let blocked: BTreeSet<SiteCoord> = path.iter().copied().collect();

    let qs = nearest_tile(dd, q).ok_or(CheckError::InvalidParameters("q is not next to the approximation"))?;
    if blocked.contains(&qs) || in_disks(qs) {
        return Err(CheckError::InvalidParameters("q's tile lies on the separating path"));
    }
    let region = dd.region();
    let mut seen = vec![false; region.len()];
    let i0 = region.index_of(qs).unwrap();
    seen[i0] = true;
    let mut queue = VecDeque::from([i0]);
    let mut size = 0;
    let mut witness = None;
    while let Some(i) = queue.pop_front() {
        size += 1;
        for k in 0..6 {
            let j = region.neighbor(i, k);
            if j == NONE {
                let e = BoundaryEdge { site: region.sites()[i], dir: k as u8 };
                if witness.is_none() && dd.edge_label(e).flatten() != Some(ArcLabel::C) {
                    witness = Some(Witness::Edge(e));
                }
                continue;
            }
            let t = region.sites()[j as usize];
            if !seen[j as usize] && !blocked.contains(&t) && !in_disks(t) {
                seen[j as usize] = true;
                queue.push_back(j as usize);
            }
        }
    }
    Ok(HomotopyReport { consistent: witness.is_none(), path_len: path.len(), region_size: size, witness })
}

fn vertex_tile(dd: &DiscreteDomain, v: VertexId) -> Option<SiteCoord> {
    v.tiles().into_iter().filter(|&t| dd.contains_principal(t)).min()
}

fn nearest_tile(dd: &DiscreteDomain, q: Point) -> Option<SiteCoord> {
    let scale = dd.scale();
    let s0 = site_containing(q, scale);
    let mut best: Option<(f64, SiteCoord)> = None;
    for du in -3..=3 {
        for dv in -3..=3 {
            let t = SiteCoord::new(s0.u + du, s0.v + dv);
            if !dd.contains_principal(t) {
                continue;
            }
            let d = center(t, scale).dist(q);
            if best.is_none_or(|b| (d, t) < b) {
                best = Some((d, t));
            }
        }
    }
    best.map(|b| b.1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain_approx::continuum::{Attachment, BoundaryMark, Marks, Slit};
    use crate::domain_approx::discrete::{canonical_approximation, CurveTrace, TraceEdge};
    use crate::geometry::Polygon;
    use crate::lattice::LatticeScale;

    fn square(side: f64) -> ContinuousDomain {
        let pts = vec![Point::new(0.0, 0.0), Point::new(side, 0.0), Point::new(side, side), Point::new(0.0, side)];
        let marks = Marks {
            a: BoundaryMark::at(Point::new(0.0, 0.0)),
            b: BoundaryMark::at(Point::new(side, 0.0)),
            c: BoundaryMark::at(Point::new(side, side)),
            d: None,
        };
        ContinuousDomain::new(Polygon::new(pts).unwrap(), vec![], marks, Point::new(side / 2.0, side / 2.0)).unwrap()
    }

    fn seq(dom: &ContinuousDomain) -> Vec<DiscreteDomain> {
        [8.0, 16.0, 32.0, 64.0]
            .iter()
            .map(|k| canonical_approximation(dom, LatticeScale::new(1.0 / k).unwrap()).unwrap())
            .collect()
    }

    fn probes() -> Vec<Point> {
        let mut v = Vec::new();
        for i in -2..=12 {
            for j in -2..=12 {
                v.push(Point::new(i as f64 / 10.0, j as f64 / 10.0));
            }
        }
        v
    }

    #[test]
    fn kernel_conditions_hold_for_interior_approximations() {
        let dom = square(1.0);
        let r = check_kernel_convergence(&seq(&dom), &dom, &probes()).unwrap();
        assert!(r.passed(), "{r:?}");
    }

    #[test]
    fn kernel_check_catches_wrong_sequences() {
        let dom = square(1.0);
        // A bigger domain covers exterior probes far from its complement.
        let big = square(1.2);
        let r = check_kernel_convergence(&seq(&big), &dom, &probes()).unwrap();
        assert!(!r.e.pass);
        assert!(matches!(r.e.witness, Some(Witness::Indexed(3, _))));
        // A smaller domain leaves deep interior points uncovered.
        let small = square(0.8);
        let r = check_kernel_convergence(&seq(&small), &dom, &probes()).unwrap();
        assert!(!r.i_ii.pass && !r.i_i.pass);
        assert!(check_kernel_convergence(&seq(&dom)[..2], &dom, &[]).is_err());
    }

    #[test]
    fn canonical_square_passes_interior_audit() {
        let dom = square(1.0);
        for dd in seq(&dom) {
            let r = check_interior_conditions(&dd, &dom);
            assert!(r.passed(), "{r:?}");
            for x in r.eta {
                assert!(x < 2.0 * dd.delta(), "{x}");
            }
        }
    }

    #[test]
    fn leaked_label_is_caught() {
        let dom = square(1.0);
        let mut dd = canonical_approximation(&dom, LatticeScale::new(1.0 / 32.0).unwrap()).unwrap();
        // Carry label C up the right side well past b.
        let cyc = dd.boundary_cycle().to_vec();
        let ib = dd.mark_position(MarkName::B).unwrap();
        let victim = cyc[(ib + 20) % cyc.len()];
        assert!(dd.set_edge_label(victim, Some(ArcLabel::C)));
        let r = check_interior_conditions(&dd, &dom);
        assert!(!r.arcs.pass);
        assert!(r.tiles_inside.pass && r.coverage.pass);
    }

    #[test]
    fn homotopy_surrogate_on_square() {
        let dom = square(1.0);
        let mut dd = canonical_approximation(&dom, LatticeScale::new(1.0 / 64.0).unwrap()).unwrap();
        let q = Point::new(0.5, 0.01);
        let r = check_homotopical_consistency(&dd, &dom, q, 0.2, 0.02).unwrap();
        assert!(r.consistent, "{r:?}");
        assert!(r.region_size > 0);
        // Relabel a stretch of the bottom as arc A right under q.
        let cyc = dd.boundary_cycle().to_vec();
        let e = *cyc.iter().min_by(|x, y| x.midpoint(dd.scale()).dist(q).total_cmp(&y.midpoint(dd.scale()).dist(q))).unwrap();
        dd.set_edge_label(e, Some(ArcLabel::A));
        let r = check_homotopical_consistency(&dd, &dom, q, 0.2, 0.02).unwrap();
        assert_eq!(r.witness, Some(Witness::Edge(e)));
    }

    #[test]
    fn homotopy_surrogate_behind_slit() {
        // Vertical slit rising from the middle of arc C.
        let pts = vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(1.0, 1.0), Point::new(0.0, 1.0)];
        let slit = Slit { path: Polyline::new(vec![Point::new(0.5, 0.0), Point::new(0.5, 0.5)]).unwrap(), attach: Attachment::Outer };
        let marks = Marks {
            a: BoundaryMark::at(Point::new(0.0, 0.0)),
            b: BoundaryMark::at(Point::new(1.0, 0.0)),
            c: BoundaryMark::at(Point::new(1.0, 1.0)),
            d: None,
        };
        let dom = ContinuousDomain::new(Polygon::new(pts).unwrap(), vec![slit], marks, Point::new(0.25, 0.75)).unwrap();
        let dd = canonical_approximation(&dom, LatticeScale::new(1.0 / 64.0).unwrap()).unwrap();
        let r = check_homotopical_consistency(&dd, &dom, Point::new(0.49, 0.3), 0.2, 0.02).unwrap();
        assert!(r.consistent, "{r:?}");
    }

    /// Straight zigzag slit into the square from mark a, together with the
    /// approximation it cuts.
    fn slit_square() -> (DiscreteDomain, CurveTrace) {
        let dom = square(1.0);
        let dd = canonical_approximation(&dom, LatticeScale::new(1.0 / 32.0).unwrap()).unwrap();
        let cyc = dd.boundary_cycle();
        let ia = dd.mark_position(MarkName::A).unwrap();
        let (e_in, e_out) = (cyc[ia], cyc[(ia + 1) % cyc.len()]);
        let mut l = e_in.across();
        let mut k = l.direction_to(e_out.across()).unwrap();
        let mut edges = vec![TraceEdge { left: l, right: l.neighbor(k) }];
        // Alternating turns, starting to the left, head into the square.
        for step in 0..30 {
            if step % 2 == 1 {
                l = l.neighbor(k + 1);
                k = (k + 5) % 6;
            } else {
                k = (k + 1) % 6;
            }
            edges.push(TraceEdge { left: l, right: l.neighbor(k) });
        }
        let trace = CurveTrace { edges };
        (dd.with_slit(&trace).unwrap(), trace)
    }

    fn face_positions(dd: &DiscreteDomain, trace: &CurveTrace, left: bool) -> Vec<usize> {
        let faces: BTreeSet<BoundaryEdge> = trace
            .edges
            .iter()
            .map(|e| {
                let k = e.dir().unwrap();
                if left {
                    BoundaryEdge { site: e.left, dir: k as u8 }
                } else {
                    BoundaryEdge { site: e.right, dir: ((k + 3) % 6) as u8 }
                }
            })
            .collect();
        (0..dd.boundary_cycle().len()).filter(|&i| faces.contains(&dd.boundary_cycle()[i])).collect()
    }

    #[test]
    fn slit_sides_are_well_organized() {
        let (dd, trace) = slit_square();
        for left in [true, false] {
            let pos = face_positions(&dd, &trace, left);
            assert!(pos.len() > 20);
            let r = check_well_organized(&dd, pos[2], pos[pos.len() - 3], 2.0 * dd.scale().eps()).unwrap();
            assert!(r.monochrome, "{r:?}");
            assert!(r.region_size > 0);
        }
    }

    #[test]
    fn crisscrossed_sides_are_caught() {
        let (mut dd, trace) = slit_square();
        let left = face_positions(&dd, &trace, true);
        let right = face_positions(&dd, &trace, false);
        let cyc = dd.boundary_cycle().to_vec();
        let mid = |v: &[usize]| v[v.len() / 3..2 * v.len() / 3].to_vec();
        // Swap the side labels over the middle third of the slit.
        for i in mid(&left) {
            dd.set_edge_label(cyc[i], Some(ArcLabel::C));
        }
        for i in mid(&right) {
            dd.set_edge_label(cyc[i], Some(ArcLabel::B));
        }
        let r = check_well_organized(&dd, left[2], left[left.len() - 3], 2.0 * dd.scale().eps()).unwrap();
        assert!(!r.monochrome);
        assert!(matches!(r.witness, Some(Witness::EdgePair(_, _))));
    }
}
