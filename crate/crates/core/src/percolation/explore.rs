//! Exploration process: the interface between the blue cluster of arc B
//! and the yellow cluster of arcs C and A, started at mark a.

use alloc::vec;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use super::{PercolationError, Prepared};
use crate::domain_approx::{ArcLabel, BoundaryEdge, CurveTrace, DiscreteDomain, MarkName, TraceEdge};
use crate::lattice::{Color, SiteCoord};

/// Supplies the color of a site the first time the walk looks at it.
pub trait ColorSource {
    fn reveal(&mut self, site: SiteCoord) -> Color;
}

impl<F: FnMut(SiteCoord) -> Color> ColorSource for F {
    fn reveal(&mut self, site: SiteCoord) -> Color {
        self(site)
    }
}

/// Fair coins from a ChaCha8 stream, one bit per revealed site.
#[derive(Debug, Clone)]
pub struct RngColors {
    rng: ChaCha8Rng,
    word: u64,
    left: u32,
}

impl RngColors {
    pub fn new(seed: u64) -> Self {
        RngColors { rng: ChaCha8Rng::seed_from_u64(seed), word: 0, left: 0 }
    }
}

impl ColorSource for RngColors {
    fn reveal(&mut self, _site: SiteCoord) -> Color {
        if self.left == 0 {
            self.word = self.rng.next_u64();
            self.left = 64;
        }
        let bit = self.word & 1;
        self.word >>= 1;
        self.left -= 1;
        if bit == 1 {
            Color::Blue
        } else {
            Color::Yellow
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExploreStop {
    pub max_steps: usize,
    /// Stop once the tip is this close to `c_eps`.
    pub target_radius: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StopReason {
    StepLimit,
    ReachedTarget,
    /// The walk left the domain away from c.
    Trapped,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Exploration {
    pub trace: CurveTrace,
    pub stop: StopReason,
    /// Colors seen by the walk, aligned with the principal sites in
    /// increasing order.
    pub revealed: Vec<Option<Color>>,
}

pub fn explore(dd: &DiscreteDomain, seed: u64, stop: ExploreStop) -> Result<Exploration, PercolationError> {
    explore_with(dd, &mut RngColors::new(seed), stop)
}

/// Runs the interface walk with colors drawn from `source`.
///
/// Tiles outside the principal component take the color of the arc they
/// border: blue along B, yellow along C and A. The walk keeps blue on its
/// left and starts on the outside edge that ends at `a_eps`.
pub fn explore_with(
    dd: &DiscreteDomain,
    source: &mut impl ColorSource,
    stop: ExploreStop,
) -> Result<Exploration, PercolationError> {
    let prep = Prepared::new(dd)?;
    let cyc = dd.boundary_cycle();
    let n = cyc.len();
    let ia = dd.mark_position(MarkName::A).expect("a is always marked");
    let (e_in, e_out) = (cyc[ia], cyc[(ia + 1) % n]);
    if e_in.site != e_out.site {
        return Err(PercolationError::StartNotConvex);
    }
    let mut l = e_in.across();
    let mut k = (e_in.dir as usize + 2) % 6;
    let target = dd.mark_vertex(MarkName::C).expect("c is always marked").position(dd.scale());
    let mut revealed: Vec<Option<Color>> = vec![None; prep.len()];
    let mut edges = Vec::new();
    let arc_color = |site: SiteCoord, dir: usize| match dd.edge_label(BoundaryEdge { site, dir: (dir % 6) as u8 }) {
        Some(Some(ArcLabel::B)) => Color::Blue,
        _ => Color::Yellow,
    };
    let mut reason = StopReason::StepLimit;
    for _ in 0..stop.max_steps {
        let f = l.neighbor(k + 1);
        let color = match prep.index_of(f) {
            Some(i) => *revealed[i].get_or_insert_with(|| source.reveal(f)),
            None if prep.index_of(l).is_some() => arc_color(l, k + 1),
            None => arc_color(l.neighbor(k), k + 2),
        };
        match color {
            Color::Blue => {
                l = f;
                k = (k + 5) % 6;
            }
            Color::Yellow => k = (k + 1) % 6,
        }
        let r = l.neighbor(k);
        let edge = TraceEdge { left: l, right: r };
        let tip = edge.end_vertex().expect("adjacent tiles").position(dd.scale());
        let near_target = stop.target_radius.is_some_and(|rad| tip.dist(target) <= rad);
        if prep.index_of(l).is_none() && prep.index_of(r).is_none() {
            reason = if near_target || tip.dist(target) <= dd.scale().eps() {
                StopReason::ReachedTarget
            } else {
                StopReason::Trapped
            };
            break;
        }
        edges.push(edge);
        if near_target {
            reason = StopReason::ReachedTarget;
            break;
        }
    }
    Ok(Exploration { trace: CurveTrace { edges }, stop: reason, revealed })
}
