//! Triangular lattice in axial coordinates, drawn as pointy-top hexagons of
//! diameter `eps`, plus colorings, clusters and annulus circuits.
//!
//! Direction `k` points at angle `60k` degrees. Hexagon corner `k` sits at
//! angle `30 + 60k` degrees, between the edges facing directions `k` and
//! `k + 1`.

use alloc::collections::{BTreeSet, VecDeque};
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::geometry::{point_in_polygon, Location, Point, Polygon};
use crate::math;

pub const SQRT3: f64 = 1.732_050_807_568_877_2;

/// Axial offsets of the six neighbours, counterclockwise from angle 0.
pub const DIRS: [(i32, i32); 6] = [(1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1)];

/// Sentinel for "no neighbour" in adjacency tables.
pub const NONE: u32 = u32::MAX;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LatticeError {
    #[error("lattice scale must be positive and finite, got {0}")]
    BadScale(f64),
    #[error("annulus contains no site of the region")]
    AnnulusOutsideDomain,
    #[error("coloring has {got} entries for {want} sites")]
    ColoringMismatch { got: usize, want: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct LatticeScale {
    eps: f64,
}

impl LatticeScale {
    pub fn new(eps: f64) -> Result<Self, LatticeError> {
        if eps > 0.0 && eps.is_finite() {
            Ok(LatticeScale { eps })
        } else {
            Err(LatticeError::BadScale(eps))
        }
    }

    /// Tile diameter.
    pub fn eps(self) -> f64 {
        self.eps
    }

    /// Distance between neighbouring centers.
    pub fn spacing(self) -> f64 {
        self.eps * SQRT3 / 2.0
    }

    pub fn circumradius(self) -> f64 {
        self.eps / 2.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SiteCoord {
    pub u: i32,
    pub v: i32,
}

impl SiteCoord {
    pub const fn new(u: i32, v: i32) -> Self {
        SiteCoord { u, v }
    }

    pub fn neighbor(self, k: usize) -> SiteCoord {
        let (du, dv) = DIRS[k % 6];
        SiteCoord::new(self.u + du, self.v + dv)
    }

    pub fn neighbors(self) -> [SiteCoord; 6] {
        core::array::from_fn(|k| self.neighbor(k))
    }

    /// Direction index of `other` if it is adjacent.
    pub fn direction_to(self, other: SiteCoord) -> Option<usize> {
        let d = (other.u - self.u, other.v - self.v);
        DIRS.iter().position(|&x| x == d)
    }

    /// Lattice distance (hex steps).
    pub fn hex_distance(self, o: SiteCoord) -> i32 {
        let du = o.u - self.u;
        let dv = o.v - self.v;
        (du.abs() + dv.abs() + (du + dv).abs()) / 2
    }
}

pub fn center(s: SiteCoord, scale: LatticeScale) -> Point {
    let h = scale.spacing();
    Point::new(h * (s.u as f64 + s.v as f64 / 2.0), h * s.v as f64 * SQRT3 / 2.0)
}

/// Unit vector at `30 + 60k` degrees.
fn corner_dir(k: usize) -> Point {
    const C: [(f64, f64); 6] = [
        (SQRT3 / 2.0, 0.5),
        (0.0, 1.0),
        (-SQRT3 / 2.0, 0.5),
        (-SQRT3 / 2.0, -0.5),
        (0.0, -1.0),
        (SQRT3 / 2.0, -0.5),
    ];
    let (x, y) = C[k % 6];
    Point::new(x, y)
}

/// Corners of the closed hexagonal tile, counterclockwise from corner 0.
pub fn hex_tile(s: SiteCoord, scale: LatticeScale) -> [Point; 6] {
    let c = center(s, scale);
    let r = scale.circumradius();
    core::array::from_fn(|k| c + corner_dir(k) * r)
}

/// Site whose tile contains `p` (ties resolved by axial rounding).
pub fn site_containing(p: Point, scale: LatticeScale) -> SiteCoord {
    let h = scale.spacing();
    let v = p.y / (h * SQRT3 / 2.0);
    let u = p.x / h - v / 2.0;
    let w = -u - v;
    let (mut ru, mut rv, rw) = (math::round(u), math::round(v), math::round(w));
    let (du, dv, dw) = ((ru - u).abs(), (rv - v).abs(), (rw - w).abs());
    if du > dv && du > dw {
        ru = -rv - rw;
    } else if dv > dw {
        rv = -ru - rw;
    }
    let s = SiteCoord::new(ru as i32, rv as i32);
    // Rounding can land one step off on tile edges; settle on the nearest center.
    let mut best = s;
    let mut bd = center(s, scale).dist(p);
    for n in s.neighbors() {
        let d = center(n, scale).dist(p);
        if d < bd {
            best = n;
            bd = d;
        }
    }
    best
}

/// Honeycomb vertex: the common corner of three mutually adjacent tiles.
/// `Up(s)` is corner 0 of `s`, `Down(s)` is corner 1 of `s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum VertexId {
    Up(SiteCoord),
    Down(SiteCoord),
}

impl VertexId {
    /// Corner `k` of site `s`.
    pub fn corner(s: SiteCoord, k: usize) -> VertexId {
        let SiteCoord { u, v } = s;
        match k % 6 {
            0 => VertexId::Up(s),
            1 => VertexId::Down(s),
            2 => VertexId::Up(SiteCoord::new(u - 1, v)),
            3 => VertexId::Down(SiteCoord::new(u, v - 1)),
            4 => VertexId::Up(SiteCoord::new(u, v - 1)),
            _ => VertexId::Down(SiteCoord::new(u + 1, v - 1)),
        }
    }

    pub fn position(self, scale: LatticeScale) -> Point {
        let (s, k) = match self {
            VertexId::Up(s) => (s, 0),
            VertexId::Down(s) => (s, 1),
        };
        center(s, scale) + corner_dir(k) * scale.circumradius()
    }

    /// The three tiles meeting at this vertex.
    pub fn tiles(self) -> [SiteCoord; 3] {
        match self {
            VertexId::Up(s) => [s, s.neighbor(0), s.neighbor(1)],
            VertexId::Down(s) => [s, s.neighbor(1), s.neighbor(2)],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Color {
    Blue,
    Yellow,
}

impl Color {
    pub fn flip(self) -> Color {
        match self {
            Color::Blue => Color::Yellow,
            Color::Yellow => Color::Blue,
        }
    }
}

/// Rectangular block of axial coordinates, used to index sites
/// independently of any particular region.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeWindow {
    pub u0: i32,
    pub v0: i32,
    pub nu: u32,
    pub nv: u32,
}

impl LatticeWindow {
    pub fn covering(sites: &[SiteCoord]) -> LatticeWindow {
        if sites.is_empty() {
            return LatticeWindow { u0: 0, v0: 0, nu: 0, nv: 0 };
        }
        let (mut u0, mut v0, mut u1, mut v1) = (i32::MAX, i32::MAX, i32::MIN, i32::MIN);
        for s in sites {
            u0 = u0.min(s.u);
            v0 = v0.min(s.v);
            u1 = u1.max(s.u);
            v1 = v1.max(s.v);
        }
        LatticeWindow { u0, v0, nu: (u1 - u0 + 1) as u32, nv: (v1 - v0 + 1) as u32 }
    }

    pub fn len(&self) -> usize {
        self.nu as usize * self.nv as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, s: SiteCoord) -> Option<usize> {
        let du = s.u - self.u0;
        let dv = s.v - self.v0;
        if du < 0 || dv < 0 || du as u32 >= self.nu || dv as u32 >= self.nv {
            None
        } else {
            Some(dv as usize * self.nu as usize + du as usize)
        }
    }

    pub fn contains(&self, s: SiteCoord) -> bool {
        self.index(s).is_some()
    }
}

/// Finite set of sites with its adjacency table. Edges listed in `cuts`
/// are removed from the adjacency (slits).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
    sites: Vec<SiteCoord>,
    nbr: Vec<[u32; 6]>,
}

impl Region {
    /// `cuts` holds `(site, direction)` pairs; either orientation blocks the edge.
    pub fn new(mut sites: Vec<SiteCoord>, cuts: &BTreeSet<(SiteCoord, u8)>) -> Region {
        sites.sort_unstable();
        sites.dedup();
        let mut nbr = vec![[NONE; 6]; sites.len()];
        for (i, s) in sites.iter().enumerate() {
            for (k, slot) in nbr[i].iter_mut().enumerate() {
                let n = s.neighbor(k);
                if cuts.contains(&(*s, k as u8)) || cuts.contains(&(n, ((k + 3) % 6) as u8)) {
                    continue;
                }
                if let Ok(j) = sites.binary_search(&n) {
                    *slot = j as u32;
                }
            }
        }
        Region { sites, nbr }
    }

    pub fn sites(&self) -> &[SiteCoord] {
        &self.sites
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn index_of(&self, s: SiteCoord) -> Option<usize> {
        self.sites.binary_search(&s).ok()
    }

    pub fn contains(&self, s: SiteCoord) -> bool {
        self.index_of(s).is_some()
    }

    /// Neighbour of site `i` in direction `k`, or [`NONE`].
    pub fn neighbor(&self, i: usize, k: usize) -> u32 {
        self.nbr[i][k]
    }

    pub fn adjacency(&self) -> &[[u32; 6]] {
        &self.nbr
    }

    /// Connected components; ids are assigned in order of smallest site.
    pub fn components(&self) -> (Vec<u32>, usize) {
        let mut comp = vec![NONE; self.len()];
        let mut next = 0u32;
        let mut queue = VecDeque::new();
        for start in 0..self.len() {
            if comp[start] != NONE {
                continue;
            }
            comp[start] = next;
            queue.push_back(start);
            while let Some(i) = queue.pop_front() {
                for &j in &self.nbr[i] {
                    if j != NONE && comp[j as usize] == NONE {
                        comp[j as usize] = next;
                        queue.push_back(j as usize);
                    }
                }
            }
            next += 1;
        }
        (comp, next as usize)
    }
}

/// Colors aligned with the site order of a [`Region`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Coloring {
    pub colors: Vec<Color>,
}

impl Coloring {
    pub fn uniform(n: usize, c: Color) -> Coloring {
        Coloring { colors: vec![c; n] }
    }

    /// Bit `i` of `mask` set means site `i` is blue.
    pub fn from_mask(n: usize, mask: u64) -> Coloring {
        Coloring {
            colors: (0..n)
                .map(|i| if (mask >> i) & 1 == 1 { Color::Blue } else { Color::Yellow })
                .collect(),
        }
    }

    pub fn swapped(&self) -> Coloring {
        Coloring { colors: self.colors.iter().map(|c| c.flip()).collect() }
    }

    pub fn len(&self) -> usize {
        self.colors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.colors.is_empty()
    }

    fn check(&self, r: &Region) -> Result<(), LatticeError> {
        if self.colors.len() == r.len() {
            Ok(())
        } else {
            Err(LatticeError::ColoringMismatch { got: self.colors.len(), want: r.len() })
        }
    }
}

/// Disjoint-set forest with path halving and union by size.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind { parent: (0..n as u32).collect(), size: vec![1; n] }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] as usize != x {
            let p = self.parent[x] as usize;
            self.parent[x] = self.parent[p];
            x = self.parent[x] as usize;
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            core::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra as u32;
        self.size[ra] += self.size[rb];
        true
    }
}

/// Monochromatic clusters of `color`, each sorted, listed by smallest site.
pub fn clusters(r: &Region, c: &Coloring, color: Color) -> Result<Vec<Vec<SiteCoord>>, LatticeError> {
    c.check(r)?;
    let mut uf = UnionFind::new(r.len());
    for i in 0..r.len() {
        if c.colors[i] != color {
            continue;
        }
        for &j in &r.nbr[i] {
            if j != NONE && c.colors[j as usize] == color {
                uf.union(i, j as usize);
            }
        }
    }
    let mut slot = vec![NONE; r.len()];
    let mut out: Vec<Vec<SiteCoord>> = Vec::new();
    // Sites are sorted, so clusters come out ordered by their smallest site.
    for i in 0..r.len() {
        if c.colors[i] != color {
            continue;
        }
        let root = uf.find(i);
        if slot[root] == NONE {
            slot[root] = out.len() as u32;
            out.push(Vec::new());
        }
        out[slot[root] as usize].push(r.sites[i]);
    }
    Ok(out)
}

/// Whether sites of `color` inside `outer` and outside `inner` contain a
/// circuit separating the two boundaries.
///
/// Computed through the dual: no path of the other color may join a site
/// touching the inner square to a site touching the outside of `outer`.
/// `escape(i)` marks region sites that count as reaching the outside too
/// (used for boundary pieces that are not allowed to close a circuit).
pub fn circuit_in_annulus(
    r: &Region,
    c: &Coloring,
    scale: LatticeScale,
    inner: &Polygon,
    outer: &Polygon,
    color: Color,
    escape: impl Fn(usize) -> bool,
) -> Result<bool, LatticeError> {
    c.check(r)?;
    let in_inner = |s: SiteCoord| point_in_polygon(center(s, scale), inner) != Location::Outside;
    let in_outer = |s: SiteCoord| point_in_polygon(center(s, scale), outer) != Location::Outside;
    let annulus: Vec<bool> = r.sites.iter().map(|&s| in_outer(s) && !in_inner(s)).collect();
    if !annulus.iter().any(|&a| a) {
        return Err(LatticeError::AnnulusOutsideDomain);
    }
    let open = |i: usize| annulus[i] && c.colors[i] != color;
    let mut seen = vec![false; r.len()];
    let mut queue = VecDeque::new();
    for i in 0..r.len() {
        if !open(i) {
            continue;
        }
        let s = r.sites[i];
        let touches_inner = (0..6).any(|k| {
            let n = s.neighbor(k);
            let inside_region = r.contains(n);
            // Cut edges are walls; a missing neighbour is domain boundary.
            (r.nbr[i][k] != NONE || !inside_region) && in_inner(n)
        });
        if touches_inner {
            seen[i] = true;
            queue.push_back(i);
        }
    }
    while let Some(i) = queue.pop_front() {
        let s = r.sites[i];
        let reaches_out = escape(i)
            || (0..6).any(|k| {
                let n = s.neighbor(k);
                (r.nbr[i][k] != NONE || !r.contains(n)) && !in_outer(n)
            });
        if reaches_out {
            return Ok(false);
        }
        for &j in &r.nbr[i] {
            if j != NONE && !seen[j as usize] && open(j as usize) {
                seen[j as usize] = true;
                queue.push_back(j as usize);
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scale() -> LatticeScale {
        LatticeScale::new(1.0).unwrap()
    }

    #[test]
    fn neighbours_are_one_spacing_apart() {
        let s = SiteCoord::new(3, -2);
        for n in s.neighbors() {
            let d = center(s, scale()).dist(center(n, scale()));
            assert!((d - SQRT3 / 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn neighbour_angles_follow_direction_index() {
        let o = center(SiteCoord::new(0, 0), scale());
        for k in 0..6 {
            let p = center(SiteCoord::new(0, 0).neighbor(k), scale()) - o;
            let ang = math::atan2(p.y, p.x).to_degrees().rem_euclid(360.0);
            assert!((ang - 60.0 * k as f64).abs() < 1e-9, "k={k} ang={ang}");
        }
    }

    #[test]
    fn corner_ids_agree_across_tiles() {
        for s in [SiteCoord::new(0, 0), SiteCoord::new(-4, 7)] {
            for k in 0..6 {
                let id = VertexId::corner(s, k);
                let p = hex_tile(s, scale())[k];
                assert!(id.position(scale()).dist(p) < 1e-12);
                assert!(id.tiles().contains(&s));
                // The same corner seen from the neighbour across edge k.
                let n = s.neighbor(k);
                assert_eq!(VertexId::corner(n, k + 2), id);
            }
        }
    }

    #[test]
    fn site_lookup_round_trips_centers() {
        let sc = LatticeScale::new(0.1).unwrap();
        for u in -5..5 {
            for v in -5..5 {
                let s = SiteCoord::new(u, v);
                assert_eq!(site_containing(center(s, sc), sc), s);
                let off = center(s, sc) + Point::new(0.02, -0.01);
                assert_eq!(site_containing(off, sc), s);
            }
        }
    }

    #[test]
    fn tiles_share_edges() {
        let s = SiteCoord::new(0, 0);
        let t = hex_tile(s, scale());
        for k in 0..6 {
            let n = hex_tile(s.neighbor(k), scale());
            // Edge k of s is corners k-1, k; it is edge k+3 of the neighbour.
            let a = t[(k + 5) % 6];
            let b = t[k];
            let na = n[(k + 2) % 6];
            let nb = n[(k + 3) % 6];
            assert!(a.dist(nb) < 1e-12 && b.dist(na) < 1e-12);
        }
    }

    #[test]
    fn cuts_remove_adjacency_both_ways() {
        let sites = vec![SiteCoord::new(0, 0), SiteCoord::new(1, 0)];
        let mut cuts = BTreeSet::new();
        cuts.insert((SiteCoord::new(1, 0), 3u8));
        let r = Region::new(sites, &cuts);
        assert_eq!(r.neighbor(0, 0), NONE);
        assert_eq!(r.neighbor(1, 3), NONE);
        assert_eq!(r.components().1, 2);
    }

    #[test]
    fn clusters_of_a_checkerboard_strip() {
        let sites: Vec<_> = (0..6).map(|u| SiteCoord::new(u, 0)).collect();
        let r = Region::new(sites, &BTreeSet::new());
        let c = Coloring::from_mask(6, 0b110011);
        let b = clusters(&r, &c, Color::Blue).unwrap();
        assert_eq!(b, vec![vec![SiteCoord::new(0, 0), SiteCoord::new(1, 0)], vec![SiteCoord::new(4, 0), SiteCoord::new(5, 0)]]);
        let y = clusters(&r, &c, Color::Yellow).unwrap();
        assert_eq!(y, vec![vec![SiteCoord::new(2, 0), SiteCoord::new(3, 0)]]);
        assert!(clusters(&r, &Coloring::from_mask(3, 0), Color::Blue).is_err());
    }
}
