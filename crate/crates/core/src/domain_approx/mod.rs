//! Continuum domains with marked boundary arcs, their lattice
//! approximations, and the checks that a sequence of approximations
//! behaves the way the convergence argument needs.

use serde::{Deserialize, Serialize};

use crate::geometry::{GeomError, Point};
use crate::lattice::SiteCoord;

pub mod checks;
pub mod continuum;
pub mod discrete;
pub mod minkowski;

pub use checks::{
    check_homotopical_consistency, check_interior_conditions, check_kernel_convergence, check_well_organized,
    CheckOutcome, HomotopyReport, InteriorReport, KernelReport, WellOrganizedReport,
};
pub use continuum::{Attachment, BoundaryMark, ContinuousDomain, Marks, Piece, Side, Slit};
pub use discrete::{
    canonical_approximation, default_delta, sup_assemble, BoundaryEdge, CurveTrace, DiscreteDomain, TraceEdge,
};
pub use minkowski::minkowski_dimension;

/// Boundary arcs: C runs from a to b, A from b to c, B from c to a.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ArcLabel {
    A = 0,
    B = 1,
    C = 2,
}

impl ArcLabel {
    pub const ALL: [ArcLabel; 3] = [ArcLabel::A, ArcLabel::B, ArcLabel::C];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum MarkName {
    A = 0,
    B = 1,
    C = 2,
    D = 3,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DomainError {
    #[error(transparent)]
    Geometry(#[from] GeomError),
    #[error("slit {0} does not start on its host boundary")]
    SlitNotAttached(usize),
    #[error("slit {0} leaves the domain")]
    SlitLeavesDomain(usize),
    #[error("slits {0} and {1} intersect")]
    SlitsCross(usize, usize),
    #[error("reference point z0 is not inside the domain")]
    ReferenceOutside,
    #[error("mark {0:?} is not on the boundary")]
    MarkOffBoundary(MarkName),
    #[error("mark {0:?} sits on a two-sided slit point and needs a side")]
    MarkAmbiguous(MarkName),
    #[error("marks a, b, c are not in counterclockwise order")]
    MarksNotCounterclockwise,
    #[error("probe mark d is not on the arc from b to c")]
    ProbeOffArc,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ApproxError {
    #[error("no tile fits inside the domain at this scale")]
    EmptyApproximation,
    #[error("reference point is not covered by any tile")]
    NoPrincipalComponent,
    #[error("boundary edge near ({}, {}) is equidistant from two arcs", .0.x, .0.y)]
    AmbiguousArc(Point),
    #[error("no admissible boundary vertex for mark {0:?}")]
    MarkNotFound(MarkName),
    #[error("mark vertices are not in counterclockwise order on the principal boundary")]
    MarksOutOfOrder,
    #[error("mark {0:?} is no longer on the principal component")]
    MarkSwallowed(MarkName),
    #[error("slit does not start on a boundary vertex of the principal component")]
    NonCommensurate,
    #[error("slit edge at {0:?} lies outside the domain")]
    SlitEscapesDomain(SiteCoord),
    #[error("slit is not a simple path of honeycomb edges")]
    NotSimple,
    #[error("delta must be at least four lattice steps, got {0}")]
    BadDelta(f64),
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CheckError {
    #[error("need at least {need} approximations, got {got}")]
    InsufficientSequence { need: usize, got: usize },
    #[error("could not join the shore path outside the excluded disks")]
    NoConnector,
    #[error("no separating path between the mark neighbourhoods")]
    PathNotFound,
    #[error("invalid parameters: {0}")]
    InvalidParameters(&'static str),
    #[error("need at least 4 scales spanning two decades")]
    InsufficientScales,
}
