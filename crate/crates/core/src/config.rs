//! Tunable thresholds, tolerances and durations.
//!
//! Every section deserializes with defaults, so a config file only needs to
//! name the values it overrides.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub world: WorldConfig,
    pub perception: PerceptionConfig,
    pub learning: LearningConfig,
    pub dialogue: DialogueConfig,
}

impl Config {
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WorldConfig {
    /// Place tolerance: sphere radius around the target (m).
    pub place_tolerance: f64,
    /// Drop tolerance: cylinder radius around the target (m).
    pub drop_radius: f64,
    /// Drop tolerance: cylinder height above the frame origin (m).
    pub drop_height: f64,
    pub pick_duration: f64,
    pub release_duration: f64,
    /// Horizontal reach of the arm from the robot origin (m).
    pub workspace_radius: f64,
    /// Radius of the uniform release noise ball for Place (m).
    pub place_noise: f64,
    /// Radius of the uniform horizontal release noise disk for Drop (m).
    pub drop_noise: f64,
    /// Resting end-effector position.
    pub home: [f64; 3],
}

impl Default for WorldConfig {
    fn default() -> Self {
        Self {
            place_tolerance: 0.03,
            drop_radius: 0.10,
            drop_height: 0.20,
            pick_duration: 5.0,
            release_duration: 5.0,
            workspace_radius: 0.6,
            place_noise: 0.01,
            drop_noise: 0.04,
            home: [0.0, 0.25, 0.30],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PerceptionConfig {
    /// Standard deviation of per-axis detection jitter (m); 0 disables it.
    pub jitter: f64,
    /// Camera field: detections need `|x| <= field_half_width`.
    pub field_half_width: f64,
    /// Camera field: detections need `0 <= y <= field_depth`.
    pub field_depth: f64,
    /// Displacement window (m) within which two association candidates are
    /// considered tied.
    pub association_tie: f64,
    /// Displacement (m) above which an instance counts as moved.
    pub moved_threshold: f64,
}

impl Default for PerceptionConfig {
    fn default() -> Self {
        Self {
            jitter: 0.0,
            field_half_width: 0.8,
            field_depth: 1.0,
            association_tie: 0.001,
            moved_threshold: 0.02,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LearningConfig {
    /// Largest dispersion (m) still accepted as a reference-frame cluster.
    pub frame_threshold: f64,
    /// Dispersions closer than this (m) are treated as tied.
    pub frame_tie_margin: f64,
    /// Minimum displacement (m) for an object to carry a goal condition.
    pub goal_move_threshold: f64,
    /// Pairwise target tolerance (m) for two goals to be equivalent.
    pub goal_match_tolerance: f64,
    pub min_demos: usize,
}

impl Default for LearningConfig {
    fn default() -> Self {
        Self {
            frame_threshold: 0.05,
            frame_tie_margin: 0.001,
            goal_move_threshold: 0.02,
            goal_match_tolerance: 0.03,
            min_demos: 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViewerPerspective {
    /// Left/right and front/behind as seen from the robot base.
    #[default]
    Robot,
    /// Operator standing across the table, facing the robot.
    Operator,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DialogueConfig {
    /// Axis margin for left/right/front/behind (m).
    pub axis_margin: f64,
    /// Horizontal radius for "close to" (m).
    pub close_radius: f64,
    /// Positions closer than this (m) are coincident.
    pub coincident: f64,
    pub viewer_perspective: ViewerPerspective,
    /// Full passes over the candidates before the run gives up.
    pub max_passes: u32,
}

impl Default for DialogueConfig {
    fn default() -> Self {
        Self {
            axis_margin: 0.03,
            close_radius: 0.15,
            coincident: 0.001,
            viewer_perspective: ViewerPerspective::Robot,
            max_passes: 2,
        }
    }
}
