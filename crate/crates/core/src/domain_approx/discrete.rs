//! Lattice domains: a set of tiles with optional cut edges, its boundary
//! cycles of honeycomb edges, and arc labels on those edges.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::continuum::ContinuousDomain;
use super::{ApproxError, ArcLabel, MarkName};
use crate::geometry::{point_in_polygon_tol, segments_intersect, winding_contains, Location, Point};
use crate::lattice::{
    center, hex_tile, site_containing, LatticeScale, LatticeWindow, Region, SiteCoord, VertexId, NONE, SQRT3,
};
use crate::math;

/// Side `dir` of tile `site`, oriented counterclockwise around the tile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct BoundaryEdge {
    pub site: SiteCoord,
    pub dir: u8,
}

impl BoundaryEdge {
    pub fn start_vertex(self) -> VertexId {
        VertexId::corner(self.site, self.dir as usize + 5)
    }

    pub fn end_vertex(self) -> VertexId {
        VertexId::corner(self.site, self.dir as usize)
    }

    /// Tile across this edge.
    pub fn across(self) -> SiteCoord {
        self.site.neighbor(self.dir as usize)
    }

    pub fn midpoint(self, scale: LatticeScale) -> Point {
        self.start_vertex().position(scale).lerp(self.end_vertex().position(scale), 0.5)
    }
}

/// Honeycomb edge between two adjacent tiles, walked with `left` on the
/// left.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEdge {
    pub left: SiteCoord,
    pub right: SiteCoord,
}

impl TraceEdge {
    pub fn dir(self) -> Option<usize> {
        self.left.direction_to(self.right)
    }

    pub fn start_vertex(self) -> Option<VertexId> {
        self.dir().map(|k| VertexId::corner(self.left, k + 5))
    }

    pub fn end_vertex(self) -> Option<VertexId> {
        self.dir().map(|k| VertexId::corner(self.left, k))
    }
}

/// Path of honeycomb edges (an exploration interface or a discrete slit).
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CurveTrace {
    pub edges: Vec<TraceEdge>,
}

impl CurveTrace {
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Start vertex followed by the end vertex of every edge, if the edges
    /// chain up.
    pub fn vertices(&self) -> Option<Vec<VertexId>> {
        let first = self.edges.first()?.start_vertex()?;
        let mut out = vec![first];
        for e in &self.edges {
            if e.start_vertex()? != *out.last()? {
                return None;
            }
            out.push(e.end_vertex()?);
        }
        Some(out)
    }

    pub fn is_simple(&self) -> bool {
        match self.vertices() {
            None => false,
            Some(v) => {
                let set: BTreeSet<_> = v.iter().collect();
                set.len() == v.len()
            }
        }
    }

    pub fn points(&self, scale: LatticeScale) -> Vec<Point> {
        self.vertices().unwrap_or_default().into_iter().map(|v| v.position(scale)).collect()
    }

    pub fn tip(&self) -> Option<VertexId> {
        self.edges.last()?.end_vertex()
    }
}

/// `eps * max(4, ceil(ln(1/eps)))`.
pub fn default_delta(scale: LatticeScale) -> f64 {
    let eps = scale.eps();
    eps * math::ceil(math::ln(1.0 / eps)).max(4.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDomain {
    scale: LatticeScale,
    window: LatticeWindow,
    region: Region,
    cuts: BTreeSet<(SiteCoord, u8)>,
    component: Vec<u32>,
    principal: u32,
    cycles: Vec<Vec<BoundaryEdge>>,
    labels: Vec<Vec<Option<ArcLabel>>>,
    principal_cycle: usize,
    marks: [usize; 3],
    probe: Option<usize>,
    delta: f64,
    /// Per site and direction: index into the flattened cycles, or NONE.
    edge_slot: Vec<[u32; 6]>,
    cycle_offset: Vec<usize>,
}

const NO_LABEL: u8 = 3;

impl DiscreteDomain {
    fn from_parts(
        scale: LatticeScale,
        window: LatticeWindow,
        sites: Vec<SiteCoord>,
        cuts: BTreeSet<(SiteCoord, u8)>,
        anchor: SiteCoord,
    ) -> Result<Self, ApproxError> {
        if sites.is_empty() {
            return Err(ApproxError::EmptyApproximation);
        }
        let region = Region::new(sites, &cuts);
        let (component, _) = region.components();
        let anchor = region.index_of(anchor).ok_or(ApproxError::NoPrincipalComponent)?;
        let principal = component[anchor];
        let cycles = trace_cycles(&region);
        let principal_cycle = (0..cycles.len())
            .filter(|&c| component[region.index_of(cycles[c][0].site).unwrap()] == principal)
            .max_by_key(|&c| (cycles[c].len(), core::cmp::Reverse(c)))
            .ok_or(ApproxError::NoPrincipalComponent)?;
        let labels = cycles.iter().map(|c| vec![None; c.len()]).collect();
        let mut dd = DiscreteDomain {
            scale,
            window,
            region,
            cuts,
            component,
            principal,
            cycles,
            labels,
            principal_cycle,
            marks: [0; 3],
            probe: None,
            delta: 0.0,
            edge_slot: Vec::new(),
            cycle_offset: Vec::new(),
        };
        dd.index_edges();
        Ok(dd)
    }

    fn index_edges(&mut self) {
        self.edge_slot = vec![[NONE; 6]; self.region.len()];
        self.cycle_offset.clear();
        let mut flat = 0usize;
        for c in &self.cycles {
            self.cycle_offset.push(flat);
            for e in c {
                let i = self.region.index_of(e.site).unwrap();
                self.edge_slot[i][e.dir as usize] = flat as u32;
                flat += 1;
            }
        }
    }

    /// Hand-built domain: all of `sites`, principal component taken at the
    /// first mark, arcs split at the given boundary vertices.
    pub fn from_sites(
        sites: Vec<SiteCoord>,
        scale: LatticeScale,
        marks: [VertexId; 3],
        probe: Option<VertexId>,
    ) -> Result<Self, ApproxError> {
        let window = LatticeWindow::covering(&sites);
        let set: BTreeSet<SiteCoord> = sites.iter().copied().collect();
        let anchor = marks[0].tiles().into_iter().find(|t| set.contains(t)).ok_or(ApproxError::MarkNotFound(MarkName::A))?;
        let mut dd = DiscreteDomain::from_parts(scale, window, sites, BTreeSet::new(), anchor)?;
        let pos = |dd: &DiscreteDomain, v: VertexId, m: MarkName| dd.vertex_position(v).ok_or(ApproxError::MarkNotFound(m));
        let ia = pos(&dd, marks[0], MarkName::A)?;
        let ib = pos(&dd, marks[1], MarkName::B)?;
        let ic = pos(&dd, marks[2], MarkName::C)?;
        let id = match probe {
            Some(v) => Some(pos(&dd, v, MarkName::D)?),
            None => None,
        };
        dd.delta = 4.0 * scale.eps();
        dd.set_marks([ia, ib, ic], id)?;
        Ok(dd)
    }

    /// Moves the marks to the given positions on the principal cycle and
    /// relabels it.
    pub fn with_mark_positions(mut self, marks: [usize; 3], probe: Option<usize>) -> Result<Self, ApproxError> {
        let n = self.boundary_cycle().len();
        if marks.iter().chain(probe.iter()).any(|&i| i >= n) {
            return Err(ApproxError::MarksOutOfOrder);
        }
        self.set_marks(marks, probe)?;
        Ok(self)
    }

    /// First position on the principal cycle whose end vertex is `v`.
    pub fn vertex_position(&self, v: VertexId) -> Option<usize> {
        self.cycles[self.principal_cycle].iter().position(|e| e.end_vertex() == v)
    }

    fn set_marks(&mut self, m: [usize; 3], probe: Option<usize>) -> Result<(), ApproxError> {
        let n = self.cycles[self.principal_cycle].len();
        let [ia, ib, ic] = m;
        let rel = |i: usize| (i + n - ia) % n;
        if !(rel(ib) > 0 && rel(ic) > rel(ib)) {
            return Err(ApproxError::MarksOutOfOrder);
        }
        if let Some(id) = probe {
            if rel(id) < rel(ib) || rel(id) > rel(ic) {
                return Err(ApproxError::MarkNotFound(MarkName::D));
            }
        }
        let labels = &mut self.labels[self.principal_cycle];
        for (j, slot) in labels.iter_mut().enumerate() {
            let r = (j + 2 * n - ia - 1) % n;
            *slot = Some(if r < rel(ib) {
                ArcLabel::C
            } else if r < rel(ic) {
                ArcLabel::A
            } else {
                ArcLabel::B
            });
        }
        self.marks = m;
        self.probe = probe;
        Ok(())
    }

    /// Labels every boundary edge. On the principal boundary the marks are
    /// placed at the nearest convex boundary vertices to the continuum
    /// marks (within `delta`), and labels are constant between them. Other
    /// components take the label of the nearest continuum arc.
    pub fn assign_boundary_arcs(mut self, dom: &ContinuousDomain, delta: f64) -> Result<Self, ApproxError> {
        if !(delta >= 4.0 * self.scale.eps() * (1.0 - 1e-12)) {
            return Err(ApproxError::BadDelta(delta));
        }
        self.delta = delta;
        let mark_pts = [MarkName::A, MarkName::B, MarkName::C].map(|m| dom.mark_point(m).unwrap());
        let near_mark = |p: Point| mark_pts.iter().any(|m| m.dist(p) <= delta + self.scale.eps());
        for c in 0..self.cycles.len() {
            for j in 0..self.cycles[c].len() {
                let mid = self.cycles[c][j].midpoint(self.scale);
                let ds = dom.arc_distances(mid);
                let label = nearest_label(dom, mid);
                if !near_mark(mid) {
                    let mut sorted = ds;
                    sorted.sort_by(|x, y| x.total_cmp(y));
                    if sorted[1] - sorted[0] <= dom.tolerance() {
                        return Err(ApproxError::AmbiguousArc(mid));
                    }
                }
                self.labels[c][j] = Some(label);
            }
        }
        let ia = self.find_mark_vertex(dom, MarkName::A, None)?;
        let ib = self.find_mark_vertex(dom, MarkName::B, None)?;
        let ic = self.find_mark_vertex(dom, MarkName::C, None)?;
        let id = match dom.marks().d {
            Some(_) => Some(self.find_mark_vertex(dom, MarkName::D, Some((ib, ic)))?),
            None => None,
        };
        self.set_marks([ia, ib, ic], id)?;
        Ok(self)
    }

    fn find_mark_vertex(
        &self,
        dom: &ContinuousDomain,
        m: MarkName,
        between: Option<(usize, usize)>,
    ) -> Result<usize, ApproxError> {
        let target = dom.mark_point(m).ok_or(ApproxError::MarkNotFound(m))?;
        let tm = dom.mark_param(m);
        let cyc = &self.cycles[self.principal_cycle];
        let n = cyc.len();
        let l = dom.perimeter();
        let window = self.delta + self.scale.eps();
        // At a slit tip the nearest vertex can sit on either wall of the
        // channel the slit cuts, which moves the split between the two arcs
        // across the whole cap. The split goes at the cap vertex nearest the
        // slit's extension beyond the tip instead.
        let tip_dir = dom
            .slits()
            .iter()
            .find(|sl| sl.path.end().dist(target) <= dom.tolerance())
            .map(|sl| {
                let pts = sl.path.points();
                let d = pts[pts.len() - 1] - pts[pts.len() - 2];
                d * (1.0 / d.norm())
            });
        let mut best: Option<(u8, f64, SiteCoord, usize)> = None;
        for i in 0..n {
            if let Some((ib, ic)) = between {
                let rel = |x: usize| (x + n - ib) % n;
                if rel(i) > rel(ic) {
                    continue;
                }
            }
            let p = cyc[i].end_vertex().position(self.scale);
            let d = p.dist(target);
            if d > window {
                continue;
            }
            let dt = (dom.nearest(p).param - tm).abs();
            if dt.min(l - dt) > window {
                continue;
            }
            let next = cyc[(i + 1) % n];
            let convex = next.site == cyc[i].site;
            // Convex corners first (an exploration has to start at one),
            // then distance, then lowest tile. Tip caps are reflex, so there
            // only the position relative to the extension counts.
            let key = match tip_dir {
                Some(dir) if dir.dot(p - target) >= -1e-12 => (0, dir.cross(p - target).abs(), cyc[i].site, i),
                Some(_) => (1, d, cyc[i].site, i),
                None => (u8::from(!convex), d, cyc[i].site, i),
            };
            if best.is_none_or(|b| (key.0, key.1, key.2) < (b.0, b.1, b.2)) {
                best = Some(key);
            }
        }
        best.map(|b| b.3).ok_or(ApproxError::MarkNotFound(m))
    }

    /// Inserts a discrete slit: edges between two tiles become cut edges
    /// and the slit's tip becomes mark a. Marks b, c and the probe keep
    /// their vertices and must stay on the principal component.
    pub fn with_slit(&self, slit: &CurveTrace) -> Result<Self, ApproxError> {
        if slit.is_empty() {
            return Ok(self.clone());
        }
        if !slit.is_simple() {
            return Err(ApproxError::NotSimple);
        }
        let inside = |s: SiteCoord| self.region.index_of(s).is_some_and(|i| self.component[i] == self.principal);
        let first = slit
            .edges
            .iter()
            .position(|e| inside(e.left) || inside(e.right))
            .ok_or(ApproxError::NonCommensurate)?;
        let start = slit.edges[first].start_vertex().unwrap();
        let jstart = self.vertex_position(start).ok_or(ApproxError::NonCommensurate)?;
        let cyc_labels = &self.labels[self.principal_cycle];
        let n = cyc_labels.len();
        let label_left = cyc_labels[jstart];
        let label_right = cyc_labels[(jstart + 1) % n];
        let mut cuts = self.cuts.clone();
        let mut new_left = BTreeSet::new();
        let mut new_right = BTreeSet::new();
        for e in &slit.edges[first..] {
            let (li, ri) = (inside(e.left), inside(e.right));
            if !li && !ri {
                return Err(ApproxError::SlitEscapesDomain(e.left));
            }
            let k = e.dir().unwrap();
            if li && ri {
                cuts.insert((e.left, k as u8));
                cuts.insert((e.right, ((k + 3) % 6) as u8));
            }
            if li {
                new_left.insert(BoundaryEdge { site: e.left, dir: k as u8 });
            }
            if ri {
                new_right.insert(BoundaryEdge { site: e.right, dir: ((k + 3) % 6) as u8 });
            }
        }
        let last = *slit.edges.last().unwrap();
        let anchor = if inside(last.left) { last.left } else { last.right };
        let mut dd = DiscreteDomain::from_parts(
            self.scale,
            self.window,
            self.region.sites().to_vec(),
            cuts,
            anchor,
        )?;
        dd.delta = self.delta;
        // Carry labels over to the non-principal cycles.
        for c in 0..dd.cycles.len() {
            for j in 0..dd.cycles[c].len() {
                let e = dd.cycles[c][j];
                dd.labels[c][j] = if new_left.contains(&e) {
                    label_left
                } else if new_right.contains(&e) {
                    label_right
                } else {
                    self.edge_label(e).flatten()
                };
            }
        }
        let tip = last.end_vertex().unwrap();
        let ia = dd.vertex_position(tip).ok_or(ApproxError::MarkSwallowed(MarkName::A))?;
        let old = &self.cycles[self.principal_cycle];
        let keep = |m: MarkName, i: usize| dd.vertex_position(old[i].end_vertex()).ok_or(ApproxError::MarkSwallowed(m));
        let ib = keep(MarkName::B, self.marks[1])?;
        let ic = keep(MarkName::C, self.marks[2])?;
        let id = match self.probe {
            Some(i) => Some(keep(MarkName::D, i)?),
            None => None,
        };
        dd.set_marks([ia, ib, ic], id).map_err(|_| ApproxError::MarkSwallowed(MarkName::A))?;
        Ok(dd)
    }

    pub fn scale(&self) -> LatticeScale {
        self.scale
    }

    /// Lattice block used to index random colors; shared by all domains
    /// built from the same outer polygon at the same scale.
    pub fn window(&self) -> LatticeWindow {
        self.window
    }

    pub fn region(&self) -> &Region {
        &self.region
    }

    pub fn sites(&self) -> &[SiteCoord] {
        self.region.sites()
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn is_cut(&self, s: SiteCoord, k: usize) -> bool {
        self.cuts.contains(&(s, k as u8))
    }

    /// Cut edges, listed from both sides.
    pub fn cuts(&self) -> &BTreeSet<(SiteCoord, u8)> {
        &self.cuts
    }

    pub fn cut_count(&self) -> usize {
        self.cuts.len() / 2
    }

    pub fn is_principal(&self, i: usize) -> bool {
        self.component[i] == self.principal
    }

    pub fn principal_len(&self) -> usize {
        self.component.iter().filter(|&&c| c == self.principal).count()
    }

    pub fn principal_sites(&self) -> impl Iterator<Item = SiteCoord> + '_ {
        (0..self.region.len()).filter(|&i| self.is_principal(i)).map(|i| self.region.sites()[i])
    }

    pub fn contains_principal(&self, s: SiteCoord) -> bool {
        self.region.index_of(s).is_some_and(|i| self.is_principal(i))
    }

    pub fn cycles(&self) -> &[Vec<BoundaryEdge>] {
        &self.cycles
    }

    pub fn cycle_labels(&self, c: usize) -> &[Option<ArcLabel>] {
        &self.labels[c]
    }

    pub fn principal_cycle_index(&self) -> usize {
        self.principal_cycle
    }

    pub fn boundary_cycle(&self) -> &[BoundaryEdge] {
        &self.cycles[self.principal_cycle]
    }

    pub fn boundary_labels(&self) -> &[Option<ArcLabel>] {
        &self.labels[self.principal_cycle]
    }

    /// Position of a mark vertex on the principal cycle (end of that edge).
    pub fn mark_position(&self, m: MarkName) -> Option<usize> {
        match m {
            MarkName::A => Some(self.marks[0]),
            MarkName::B => Some(self.marks[1]),
            MarkName::C => Some(self.marks[2]),
            MarkName::D => self.probe,
        }
    }

    pub fn mark_vertex(&self, m: MarkName) -> Option<VertexId> {
        self.mark_position(m).map(|i| self.boundary_cycle()[i].end_vertex())
    }

    /// Tile standing in for the probe mark d: the tile at the probe vertex
    /// closest to the vertex (lowest coordinates on ties).
    pub fn probe_site(&self) -> Option<SiteCoord> {
        let i = self.probe?;
        let cyc = self.boundary_cycle();
        let n = cyc.len();
        let (s1, s2) = (cyc[i].site, cyc[(i + 1) % n].site);
        Some(s1.min(s2))
    }

    /// Label of a boundary edge; `None` if the edge is not on a boundary.
    pub fn edge_label(&self, e: BoundaryEdge) -> Option<Option<ArcLabel>> {
        let i = self.region.index_of(e.site)?;
        let slot = self.edge_slot[i][e.dir as usize];
        if slot == NONE {
            return None;
        }
        let c = self.cycle_offset.partition_point(|&o| o <= slot as usize) - 1;
        Some(self.labels[c][slot as usize - self.cycle_offset[c]])
    }

    /// Per-site, per-direction arc code: `None` for interior edges, then
    /// the label (or `Some(None)` for an unlabeled boundary edge).
    pub fn edge_codes(&self) -> Vec<[u8; 6]> {
        let mut flat: Vec<u8> = Vec::new();
        for l in &self.labels {
            flat.extend(l.iter().map(|x| x.map_or(NO_LABEL, |a| a as u8)));
        }
        self.edge_slot
            .iter()
            .map(|row| row.map(|s| if s == NONE { u8::MAX } else { flat[s as usize] }))
            .collect()
    }

    /// Overrides one boundary label. Only meant for building deliberately
    /// broken audit fixtures.
    pub fn set_edge_label(&mut self, e: BoundaryEdge, label: Option<ArcLabel>) -> bool {
        let Some(i) = self.region.index_of(e.site) else { return false };
        let slot = self.edge_slot[i][e.dir as usize];
        if slot == NONE {
            return false;
        }
        let c = self.cycle_offset.partition_point(|&o| o <= slot as usize) - 1;
        self.labels[c][slot as usize - self.cycle_offset[c]] = label;
        true
    }

    /// Whether `p` lies in the closed union of principal tiles.
    pub fn covers(&self, p: Point) -> bool {
        let s = site_containing(p, self.scale);
        core::iter::once(s).chain(s.neighbors()).any(|t| {
            self.contains_principal(t) && hex_contains(&hex_tile(t, self.scale), p, 1e-9 * self.scale.eps())
        })
    }
}

fn nearest_label(dom: &ContinuousDomain, p: Point) -> ArcLabel {
    dom.cycle()[dom.nearest(p).segment].label
}

/// Boundary cycles of a region. Each cycle runs counterclockwise with the
/// region on its left; at a vertex the walk turns as far left as it can,
/// so a cut edge with tiles on both sides is walked on both sides.
fn trace_cycles(r: &Region) -> Vec<Vec<BoundaryEdge>> {
    let n = r.len();
    let mut seen = vec![[false; 6]; n];
    let mut out = Vec::new();
    for i in 0..n {
        for k in 0..6 {
            if seen[i][k] || r.neighbor(i, k) != NONE {
                continue;
            }
            let mut cyc = Vec::new();
            let (mut h, mut d) = (i, k);
            loop {
                seen[h][d] = true;
                cyc.push(BoundaryEdge { site: r.sites()[h], dir: d as u8 });
                // Rotate around the end vertex of (h, d).
                loop {
                    let d1 = (d + 1) % 6;
                    let nb = r.neighbor(h, d1);
                    if nb == NONE {
                        d = d1;
                        break;
                    }
                    h = nb as usize;
                    d = (d + 4) % 6;
                }
                if h == i && d == k {
                    break;
                }
            }
            out.push(cyc);
        }
    }
    out
}

fn hex_contains(hex: &[Point; 6], p: Point, tol: f64) -> bool {
    (0..6).all(|k| {
        let a = hex[k];
        let b = hex[(k + 1) % 6];
        (b - a).cross(p - a) >= -tol * a.dist(b)
    })
}

fn segment_hits_hex(hex: &[Point; 6], a: Point, b: Point) -> bool {
    if hex_contains(hex, a, 0.0) || hex_contains(hex, b, 0.0) {
        return true;
    }
    (0..6).any(|k| segments_intersect(a, b, hex[k], hex[(k + 1) % 6]))
}

/// Whether the closed tile lies in the open domain.
pub(crate) fn tile_inside(dom: &ContinuousDomain, s: SiteCoord, scale: LatticeScale) -> bool {
    let hex = hex_tile(s, scale);
    let tol = dom.tolerance();
    if !hex.iter().all(|&p| point_in_polygon_tol(p, dom.outer(), tol) == Location::Inside) {
        return false;
    }
    let c = center(s, scale);
    let r = scale.circumradius();
    let far = |a: Point, b: Point| {
        a.x.max(b.x) < c.x - r || a.x.min(b.x) > c.x + r || a.y.max(b.y) < c.y - r || a.y.min(b.y) > c.y + r
    };
    for (a, b) in dom.outer().edges() {
        if !far(a, b) && segment_hits_hex(&hex, a, b) {
            return false;
        }
    }
    for sl in dom.slits() {
        for (a, b) in sl.path.segments() {
            if !far(a, b) && segment_hits_hex(&hex, a, b) {
                return false;
            }
        }
    }
    true
}

/// Interior approximation: every tile contained in the domain, principal
/// component at `z0`, arcs assigned with the default delta.
pub fn canonical_approximation(dom: &ContinuousDomain, scale: LatticeScale) -> Result<DiscreteDomain, ApproxError> {
    let (lo, hi) = dom.outer().bbox();
    let h = scale.spacing();
    let row = h * SQRT3 / 2.0;
    let v0 = math::floor(lo.y / row) as i32 - 1;
    let v1 = math::ceil(hi.y / row) as i32 + 1;
    let u0 = math::floor(lo.x / h - v1 as f64 / 2.0) as i32 - 1;
    let u1 = math::ceil(hi.x / h - v0 as f64 / 2.0) as i32 + 1;
    let window = LatticeWindow { u0, v0, nu: (u1 - u0 + 1) as u32, nv: (v1 - v0 + 1) as u32 };
    let mut sites = Vec::new();
    for v in v0..=v1 {
        for u in u0..=u1 {
            let s = SiteCoord::new(u, v);
            let c = center(s, scale);
            if c.x < lo.x || c.x > hi.x || c.y < lo.y || c.y > hi.y {
                continue;
            }
            if tile_inside(dom, s, scale) {
                sites.push(s);
            }
        }
    }
    if sites.is_empty() {
        return Err(ApproxError::EmptyApproximation);
    }
    let z0 = dom.z0();
    let mut anchor = site_containing(z0, scale);
    if sites.binary_search(&anchor).is_err() {
        anchor = *sites
            .iter()
            .filter(|s| center(**s, scale).dist(z0) <= 2.0 * scale.eps())
            .min_by(|a, b| center(**a, scale).dist(z0).total_cmp(&center(**b, scale).dist(z0)))
            .ok_or(ApproxError::NoPrincipalComponent)?;
    }
    let dd = DiscreteDomain::from_parts(scale, window, sites, BTreeSet::new(), anchor)?;
    dd.assign_boundary_arcs(dom, default_delta(scale))
}

/// Canonical approximation of `base` with a discrete slit inserted.
pub fn sup_assemble(base: &ContinuousDomain, slit: &CurveTrace, scale: LatticeScale) -> Result<DiscreteDomain, ApproxError> {
    canonical_approximation(base, scale)?.with_slit(slit)
}

/// Closed polygon through the principal boundary vertices.
pub fn boundary_ring(dd: &DiscreteDomain) -> Vec<Point> {
    dd.boundary_cycle().iter().map(|e| e.end_vertex().position(dd.scale())).collect()
}

/// Whether `p` is enclosed by the principal boundary ring.
pub fn inside_ring(dd: &DiscreteDomain, p: Point) -> bool {
    winding_contains(p, &boundary_ring(dd))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain_approx::continuum::{BoundaryMark, Marks};
    use crate::geometry::Polygon;

    fn square_domain() -> ContinuousDomain {
        let sq = Polygon::new(vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(1.0, 1.0), Point::new(0.0, 1.0)])
            .unwrap();
        let marks = Marks {
            a: BoundaryMark::at(Point::new(0.0, 0.0)),
            b: BoundaryMark::at(Point::new(1.0, 0.0)),
            c: BoundaryMark::at(Point::new(0.0, 1.0)),
            d: Some(BoundaryMark::at(Point::new(1.0, 1.0))),
        };
        ContinuousDomain::new(sq, vec![], marks, Point::new(0.5, 0.5)).unwrap()
    }

    fn hexagon(radius: i32) -> Vec<SiteCoord> {
        let o = SiteCoord::new(0, 0);
        let mut v = Vec::new();
        for u in -radius..=radius {
            for w in -radius..=radius {
                let s = SiteCoord::new(u, w);
                if o.hex_distance(s) <= radius {
                    v.push(s);
                }
            }
        }
        v
    }

    #[test]
    fn single_tile_has_six_edge_cycle() {
        let r = Region::new(vec![SiteCoord::new(0, 0)], &BTreeSet::new());
        let c = trace_cycles(&r);
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].iter().map(|e| e.dir).collect::<Vec<_>>(), vec![0, 1, 2, 3, 4, 5]);
    }

    #[test]
    fn hexagon_boundary_length() {
        // A radius-r hexagon of tiles has 6(2r+1) boundary edges.
        for r in 0..5 {
            let reg = Region::new(hexagon(r), &BTreeSet::new());
            let c = trace_cycles(&reg);
            assert_eq!(c.len(), 1);
            assert_eq!(c[0].len(), 6 * (2 * r as usize + 1));
            for w in c[0].windows(2) {
                assert_eq!(w[0].end_vertex(), w[1].start_vertex());
            }
        }
    }

    #[test]
    fn ring_has_two_cycles() {
        let sites: Vec<_> = hexagon(2).into_iter().filter(|s| SiteCoord::new(0, 0).hex_distance(*s) > 0).collect();
        let reg = Region::new(sites, &BTreeSet::new());
        let mut lens: Vec<_> = trace_cycles(&reg).iter().map(|c| c.len()).collect();
        lens.sort();
        assert_eq!(lens, vec![6, 30]);
    }

    #[test]
    fn canonical_square_labels_are_contiguous() {
        let dom = square_domain();
        let dd = canonical_approximation(&dom, LatticeScale::new(1.0 / 16.0).unwrap()).unwrap();
        let labels = dd.boundary_labels();
        let changes = (0..labels.len()).filter(|&i| labels[i] != labels[(i + 1) % labels.len()]).count();
        assert_eq!(changes, 3);
        // Every tile is inside the square.
        for s in dd.sites() {
            for p in hex_tile(*s, dd.scale()) {
                assert!(p.x > 0.0 && p.x < 1.0 && p.y > 0.0 && p.y < 1.0);
            }
        }
        let a = dd.mark_vertex(MarkName::A).unwrap().position(dd.scale());
        assert!(a.norm() < 0.1, "{a:?}");
        let d = dd.mark_vertex(MarkName::D).unwrap().position(dd.scale());
        assert!(d.dist(Point::new(1.0, 1.0)) < 0.1);
    }

    #[test]
    fn every_edge_is_on_exactly_one_cycle() {
        let dom = square_domain();
        let dd = canonical_approximation(&dom, LatticeScale::new(1.0 / 10.0).unwrap()).unwrap();
        let mut count = 0;
        for (i, s) in dd.sites().iter().enumerate() {
            for k in 0..6 {
                let e = BoundaryEdge { site: *s, dir: k as u8 };
                assert_eq!(dd.edge_label(e).is_some(), dd.region().neighbor(i, k) == NONE);
                count += dd.edge_label(e).is_some() as usize;
            }
        }
        assert_eq!(count, dd.cycles().iter().map(|c| c.len()).sum::<usize>());
    }

    #[test]
    fn straight_interior_slit_adds_two_edges_per_cut() {
        let dom = square_domain();
        let dd = canonical_approximation(&dom, LatticeScale::new(1.0 / 16.0).unwrap()).unwrap();
        let a = dd.mark_position(MarkName::A).unwrap();
        let cyc = dd.boundary_cycle();
        let n = cyc.len();
        let (e_in, e_out) = (cyc[a], cyc[(a + 1) % n]);
        assert_eq!(e_in.site, e_out.site);
        // Walk into the domain keeping the same kind of turn, which traces
        // a zigzag between two rows of tiles.
        let s = e_in.site;
        let o1 = e_in.across();
        let o2 = e_out.across();
        let mut edges = vec![TraceEdge { left: o1, right: o2 }];
        let mut l = o1;
        let mut k = o1.direction_to(o2).unwrap();
        let mut turn_right = false;
        for _ in 0..10 {
            if turn_right {
                l = l.neighbor(k + 1);
                k = (k + 5) % 6;
            } else {
                k = (k + 1) % 6;
            }
            turn_right = !turn_right;
            edges.push(TraceEdge { left: l, right: l.neighbor(k) });
        }
        assert_eq!(edges[1].right, s);
        let trace = CurveTrace { edges };
        assert!(trace.is_simple());
        let cut_edges = trace.edges.iter().filter(|e| dd.contains_principal(e.left) && dd.contains_principal(e.right)).count();
        // The first two edges still touch the outside corner tile.
        assert_eq!(cut_edges, trace.len() - 2);
        let slit = dd.with_slit(&trace).unwrap();
        assert_eq!(slit.cut_count(), cut_edges);
        assert_eq!(slit.boundary_cycle().len(), dd.boundary_cycle().len() + 2 * cut_edges);
        assert_eq!(slit.mark_vertex(MarkName::A), trace.tip());
        assert_eq!(slit.mark_vertex(MarkName::B), dd.mark_vertex(MarkName::B));
    }

    #[test]
    fn empty_slit_is_identity() {
        let dom = square_domain();
        let scale = LatticeScale::new(1.0 / 12.0).unwrap();
        let dd = canonical_approximation(&dom, scale).unwrap();
        assert_eq!(sup_assemble(&dom, &CurveTrace::default(), scale).unwrap(), dd);
    }

    #[test]
    fn slit_tip_mark_sits_on_the_cap() {
        use crate::domain_approx::continuum::{Attachment, Slit};
        use crate::geometry::Polyline;
        let sq = square_domain();
        for dx in [0.0, 0.004, -0.007] {
            let tip = Point::new(0.5 + dx, 0.5);
            let slit = Slit { path: Polyline::new(vec![Point::new(0.5, 0.0), tip]).unwrap(), attach: Attachment::Outer };
            let marks = Marks {
                a: BoundaryMark::at(tip),
                b: BoundaryMark::at(Point::new(1.0, 0.0)),
                c: BoundaryMark::at(Point::new(0.0, 1.0)),
                d: None,
            };
            let dom = ContinuousDomain::new(sq.outer().clone(), vec![slit], marks, Point::new(0.5, 0.8)).unwrap();
            for inv in [16.0, 32.0, 64.0] {
                let scale = LatticeScale::new(1.0 / inv).unwrap();
                let dd = canonical_approximation(&dom, scale).unwrap();
                let p = dd.mark_vertex(MarkName::A).unwrap().position(scale);
                assert!(p.y >= tip.y - 1e-9, "eps 1/{inv}: {p:?} behind the tip");
                assert!((p.x - tip.x).abs() <= 0.5 / inv, "eps 1/{inv}: {p:?} off the extension");
            }
        }
    }

    #[test]
    fn coarse_scale_is_empty() {
        let dom = square_domain();
        assert_eq!(canonical_approximation(&dom, LatticeScale::new(2.0).unwrap()).unwrap_err(), ApproxError::EmptyApproximation);
    }
}
