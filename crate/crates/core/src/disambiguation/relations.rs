use std::fmt;

use serde::{Deserialize, Serialize};
use tracing::warn;

use crate::config::{DialogueConfig, ViewerPerspective};
use crate::geometry::Vec3;

/// Declaration order is the tie-break order when statements score equally.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpatialRelation {
    LeftOf,
    RightOf,
    InFront,
    Behind,
    CloseTo,
}

impl SpatialRelation {
    pub const ALL: [SpatialRelation; 5] = [
        SpatialRelation::LeftOf,
        SpatialRelation::RightOf,
        SpatialRelation::InFront,
        SpatialRelation::Behind,
        SpatialRelation::CloseTo,
    ];

    pub fn phrase(self) -> &'static str {
        match self {
            SpatialRelation::LeftOf => "to the left of",
            SpatialRelation::RightOf => "to the right of",
            SpatialRelation::InFront => "in front of",
            SpatialRelation::Behind => "behind",
            SpatialRelation::CloseTo => "close to",
        }
    }
}

impl fmt::Display for SpatialRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.phrase())
    }
}

/// Relations that hold for `a` with respect to landmark `b`, in declaration
/// order. Coincident points relate to nothing.
pub fn relations(a: Vec3, b: Vec3, cfg: &DialogueConfig) -> Vec<SpatialRelation> {
    if a.horizontal_distance(b) < cfg.coincident {
        warn!("relations requested for coincident positions {a} and {b}");
        return Vec::new();
    }
    let mut d = a - b;
    if cfg.viewer_perspective == ViewerPerspective::Operator {
        d.x = -d.x;
        d.y = -d.y;
    }
    let m = cfg.axis_margin;
    let mut out = Vec::new();
    if d.x <= -m {
        out.push(SpatialRelation::LeftOf);
    }
    if d.x >= m {
        out.push(SpatialRelation::RightOf);
    }
    if d.y <= -m {
        out.push(SpatialRelation::InFront);
    }
    if d.y >= m {
        out.push(SpatialRelation::Behind);
    }
    if a.horizontal_distance(b) <= cfg.close_radius {
        out.push(SpatialRelation::CloseTo);
    }
    out
}
