//! JSON domain files.
//!
//! ```json
//! {
//!   "outer": [[0, 0], [1, 0], [1, 1], [0, 1]],
//!   "slits": [
//!     { "points": [[0.5, 1], [0.5, 0.6]], "attach": "outer" },
//!     { "points": [[0.5, 0.8], [0.7, 0.8]], "attach": { "slit": 0, "side": "right" } }
//!   ],
//!   "marks": {
//!     "a": { "point": [0, 0] },
//!     "b": { "point": [1, 0] },
//!     "c": { "point": [0, 1] },
//!     "d": { "point": [1, 1], "side": "left" }
//!   },
//!   "z0": [0.25, 0.25]
//! }
//! ```
//!
//! `outer` is a simple polygon in counterclockwise order. Each slit is a
//! polyline whose first point lies on the outer boundary or on an earlier
//! slit. `d` and `slits` may be omitted; `side` is only needed for marks on
//! a two-sided slit point.

use std::path::Path;

use cardylab_core::domain_approx::{Attachment, BoundaryMark, ContinuousDomain, Marks, Side, Slit};
use cardylab_core::geometry::{Point, Polygon, Polyline};
use serde::{Deserialize, Serialize};

use crate::error::HarnessError;

pub type Xy = [f64; 2];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainFile {
    pub outer: Vec<Xy>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub slits: Vec<SlitSpec>,
    pub marks: MarksSpec,
    pub z0: Xy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SlitSpec {
    pub points: Vec<Xy>,
    pub attach: AttachSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OuterTag {
    Outer,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AttachSpec {
    Outer(OuterTag),
    Slit { slit: usize, side: SideSpec },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SideSpec {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarkSpec {
    pub point: Xy,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub side: Option<SideSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarksSpec {
    pub a: MarkSpec,
    pub b: MarkSpec,
    pub c: MarkSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<MarkSpec>,
}

fn pt(p: Xy) -> Point {
    Point::new(p[0], p[1])
}

fn side(s: SideSpec) -> Side {
    match s {
        SideSpec::Left => Side::Left,
        SideSpec::Right => Side::Right,
    }
}

impl MarkSpec {
    pub fn at(p: Point) -> Self {
        MarkSpec { point: [p.x, p.y], side: None }
    }

    fn to_mark(self) -> BoundaryMark {
        BoundaryMark { point: pt(self.point), side: self.side.map(side) }
    }
}

impl DomainFile {
    pub fn parse(text: &str) -> Result<Self, HarnessError> {
        serde_json::from_str(text).map_err(|e| HarnessError::DomainParse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::DomainParse(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("domain file serializes")
    }

    /// Validated continuum domain.
    pub fn build(&self) -> Result<ContinuousDomain, HarnessError> {
        if self.outer.iter().chain(self.slits.iter().flat_map(|s| &s.points)).flatten().any(|x| !x.is_finite()) {
            return Err(HarnessError::DomainParse("coordinates must be finite numbers".into()));
        }
        let outer = Polygon::new(self.outer.iter().map(|&p| pt(p)).collect())?;
        let mut slits = Vec::with_capacity(self.slits.len());
        for s in &self.slits {
            let attach = match s.attach {
                AttachSpec::Outer(_) => Attachment::Outer,
                AttachSpec::Slit { slit, side: sd } => Attachment::Slit { index: slit, side: side(sd) },
            };
            slits.push(Slit { path: Polyline::new(s.points.iter().map(|&p| pt(p)).collect())?, attach });
        }
        let m = &self.marks;
        let marks = Marks { a: m.a.to_mark(), b: m.b.to_mark(), c: m.c.to_mark(), d: m.d.map(MarkSpec::to_mark) };
        Ok(ContinuousDomain::new(outer, slits, marks, pt(self.z0))?)
    }

    /// Same domain with the slits removed.
    pub fn without_slits(&self) -> DomainFile {
        DomainFile { slits: Vec::new(), ..self.clone() }
    }
}
