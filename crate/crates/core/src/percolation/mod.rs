//! Critical site percolation on discrete domains: crossing events,
//! Monte Carlo estimators, Harris rings and the exploration process.

use alloc::vec;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::domain_approx::{ApproxError, ArcLabel, BoundaryEdge, DiscreteDomain};
use crate::geometry::Point;
use crate::lattice::{center, site_containing, Color, Coloring, LatticeError, LatticeWindow, Region, SiteCoord, NONE};
use crate::math;

mod estimate;
mod events;
mod explore;
mod rings;

pub use estimate::{
    boundary_decay_profile, estimate_cardy, estimate_crossing, estimate_many, slit_cardy_after_exploration,
    CrossingEstimate,
};
pub use events::{crossing_event, crossing_event_direct, EventScratch};
pub use explore::{explore, explore_with, ColorSource, Exploration, ExploreStop, RngColors, StopReason};
pub use rings::{harris_ring_probability, AnnulusFamily};

/// Which crossing function: `U` separates from arc C, `V` from A, `W` from B.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CrossingFunction {
    U,
    V,
    W,
}

impl CrossingFunction {
    /// Arc the probe must be cut off from, and the two arcs the
    /// separating path joins.
    pub fn arcs(self) -> (ArcLabel, [ArcLabel; 2]) {
        match self {
            CrossingFunction::U => (ArcLabel::C, [ArcLabel::A, ArcLabel::B]),
            CrossingFunction::V => (ArcLabel::A, [ArcLabel::B, ArcLabel::C]),
            CrossingFunction::W => (ArcLabel::B, [ArcLabel::C, ArcLabel::A]),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrossingSpec {
    pub function: CrossingFunction,
    pub color: Color,
    pub probe: SiteCoord,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PercolationError {
    #[error("boundary edge {0:?} has no arc label")]
    UnlabeledDomain(BoundaryEdge),
    #[error("domain has no probe mark d")]
    MissingProbe,
    #[error("probe {0:?} is not in the principal component")]
    ProbeOutside(SiteCoord),
    #[error("need at least 100 samples, got {0}")]
    TooFewSamples(u64),
    #[error("annulus is narrower than four tiles")]
    AnnulusTooThin,
    #[error("exploration must start at a convex boundary corner")]
    StartNotConvex,
    #[error(transparent)]
    Approx(#[from] ApproxError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

/// Principal component of a discrete domain in the form the samplers use:
/// its own region, per-site arc contacts, and each site's slot in the
/// shared random-bit window.
#[derive(Debug, Clone)]
pub struct Prepared {
    region: Region,
    /// Bit `l` set when the site has a boundary edge labelled `l`.
    touches: Vec<u8>,
    slots: Vec<u32>,
    window: LatticeWindow,
}

impl Prepared {
    pub fn new(dd: &DiscreteDomain) -> Result<Prepared, PercolationError> {
        let sites: Vec<SiteCoord> = dd.principal_sites().collect();
        let region = Region::new(sites, dd.cuts());
        let window = dd.window();
        let mut touches = vec![0u8; region.len()];
        let mut slots = vec![0u32; region.len()];
        for (i, &s) in region.sites().iter().enumerate() {
            slots[i] = window.index(s).expect("window covers the domain") as u32;
            for k in 0..6 {
                if region.neighbor(i, k) != NONE {
                    continue;
                }
                let e = BoundaryEdge { site: s, dir: k as u8 };
                match dd.edge_label(e) {
                    Some(Some(l)) => touches[i] |= 1 << l as u8,
                    _ => return Err(PercolationError::UnlabeledDomain(e)),
                }
            }
        }
        Ok(Prepared { region, touches, slots, window })
    }

    pub fn region(&self) -> &Region {
        &self.region
    }

    pub fn len(&self) -> usize {
        self.region.len()
    }

    pub fn is_empty(&self) -> bool {
        self.region.is_empty()
    }

    pub fn index_of(&self, s: SiteCoord) -> Option<usize> {
        self.region.index_of(s)
    }

    pub fn touches(&self, i: usize, l: ArcLabel) -> bool {
        self.touches[i] & (1 << l as u8) != 0
    }

    /// Fills `out` with the coloring of replica `replica`: one ChaCha8
    /// stream per replica, bits laid out row by row over the lattice
    /// window, so domains sharing a window see the same colors.
    pub fn sample(&self, seed: u64, replica: u64, words: &mut Vec<u64>, out: &mut Coloring) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(replica);
        let nw = self.window.len().div_ceil(64);
        words.clear();
        words.extend((0..nw).map(|_| rng.next_u64()));
        out.colors.clear();
        out.colors.extend(self.slots.iter().map(|&b| {
            if words[b as usize / 64] >> (b % 64) & 1 == 1 {
                Color::Blue
            } else {
                Color::Yellow
            }
        }));
    }

    /// Principal site nearest to `p`, searching a few tiles around it.
    pub fn snap(&self, p: Point, dd: &DiscreteDomain) -> Option<SiteCoord> {
        let scale = dd.scale();
        let s0 = site_containing(p, scale);
        let mut best: Option<(f64, SiteCoord)> = None;
        for du in -4..=4 {
            for dv in -4..=4 {
                let t = SiteCoord::new(s0.u + du, s0.v + dv);
                if self.index_of(t).is_none() {
                    continue;
                }
                let d = math::hypot(center(t, scale).x - p.x, center(t, scale).y - p.y);
                if best.is_none_or(|b| (d, t) < b) {
                    best = Some((d, t));
                }
            }
        }
        best.map(|b| b.1)
    }
}
