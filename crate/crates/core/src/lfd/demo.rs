use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Vec3;
use crate::perception::BASE_FRAME;
use crate::world::{validate_scene, ActionKind, ReleaseMode, SceneError, SceneObject};

const FRAME_CONSISTENCY: f64 = 1e-9;
const FINAL_SCENE_TOLERANCE: f64 = 1e-6;

/// One recorded action with the end-effector position in every frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DemoAction {
    pub kind: ActionKind,
    /// Picked category, or held category for releases.
    pub category: String,
    pub ee_pose_per_frame: BTreeMap<String, Vec3>,
}

impl DemoAction {
    pub fn release_mode(&self) -> Option<ReleaseMode> {
        match self.kind {
            ActionKind::Pick => None,
            ActionKind::Place => Some(ReleaseMode::Place),
            ActionKind::Drop => Some(ReleaseMode::Drop),
        }
    }

    pub fn base_pose(&self) -> Option<Vec3> {
        self.ee_pose_per_frame.get(BASE_FRAME).copied()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Demonstration {
    pub initial_scene: Vec<SceneObject>,
    pub actions: Vec<DemoAction>,
    pub final_scene: Vec<SceneObject>,
}

impl Demonstration {
    /// `(kind, category)` of every action, in order.
    pub fn signature(&self) -> Vec<(ActionKind, String)> {
        self.actions
            .iter()
            .map(|a| (a.kind, a.category.clone()))
            .collect()
    }
}

pub fn signature_text(signature: &[(ActionKind, String)]) -> String {
    signature
        .iter()
        .map(|(k, c)| format!("{k} {c}"))
        .collect::<Vec<_>>()
        .join(", ")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DemoFile {
    pub demos: Vec<Demonstration>,
}

impl DemoFile {
    pub fn from_json(text: &str) -> Result<Self, DemoError> {
        let file: DemoFile = serde_json::from_str(text).map_err(|e| DemoError::Json(e.to_string()))?;
        for (i, demo) in file.demos.iter().enumerate() {
            validate_demo(demo).map_err(|e| DemoError::InDemo {
                index: i,
                source: Box::new(e),
            })?;
        }
        Ok(file)
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("demo file serializes");
        text.push('\n');
        text
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DemoError {
    #[error("invalid demo JSON: {0}")]
    Json(String),
    #[error("demo {index}: {source}")]
    InDemo {
        index: usize,
        #[source]
        source: Box<DemoError>,
    },
    #[error(transparent)]
    Scene(#[from] SceneError),
    #[error("category `{0}` appears more than once in a demo scene")]
    DuplicateCategory(String),
    #[error("initial and final scenes hold different objects")]
    ObjectSetChanged,
    #[error("action {action}: no `{category}` object in the scene")]
    UnknownCategory { action: usize, category: String },
    #[error("action {action}: missing `base` frame entry")]
    MissingBase { action: usize },
    #[error("action {action}: unknown frame `{frame}`")]
    UnknownFrame { action: usize, frame: String },
    #[error("action {action}: pose in `{frame}` disagrees with the base pose")]
    InconsistentFrame { action: usize, frame: String },
    #[error("action {action}: pick while already holding `{held}`")]
    PickWhileHolding { action: usize, held: String },
    #[error("action {action}: release of `{category}` without a matching pick")]
    ReleaseWithoutPick { action: usize, category: String },
    #[error("demonstration ends with `{0}` still held")]
    EndsHolding(String),
    #[error("final scene disagrees with the recorded actions at `{0}`")]
    FinalSceneMismatch(String),
}

/// Where a released object comes to rest when the gripper opens at `ee`.
pub(crate) fn settle(obj: &SceneObject, ee: Vec3) -> Vec3 {
    let mut pos = ee - obj.grasp_offset();
    pos.z = pos.z.max(0.0);
    pos
}

/// Replays the actions over the initial scene, checking ordering, frame
/// entries and the final scene. Returns the id of the object each action
/// acted on.
pub fn validate_demo(demo: &Demonstration) -> Result<Vec<String>, DemoError> {
    validate_scene(&demo.initial_scene)?;
    validate_scene(&demo.final_scene)?;
    let mut seen = BTreeSet::new();
    for obj in &demo.initial_scene {
        if !seen.insert(obj.category.as_str()) {
            return Err(DemoError::DuplicateCategory(obj.category.clone()));
        }
    }
    let ids = |scene: &[SceneObject]| scene.iter().map(|o| o.id.clone()).collect::<BTreeSet<_>>();
    if ids(&demo.initial_scene) != ids(&demo.final_scene) {
        return Err(DemoError::ObjectSetChanged);
    }

    let mut world: BTreeMap<String, SceneObject> = demo
        .initial_scene
        .iter()
        .map(|o| (o.category.clone(), o.clone()))
        .collect();
    let mut held: Option<String> = None;
    let mut touched = Vec::with_capacity(demo.actions.len());

    for (i, action) in demo.actions.iter().enumerate() {
        let ee = action.base_pose().ok_or(DemoError::MissingBase { action: i })?;
        for (frame, pose) in &action.ee_pose_per_frame {
            if frame == BASE_FRAME {
                continue;
            }
            let obj = world.get(frame).ok_or_else(|| DemoError::UnknownFrame {
                action: i,
                frame: frame.clone(),
            })?;
            if (*pose + obj.grasp_point()).distance(ee) > FRAME_CONSISTENCY {
                return Err(DemoError::InconsistentFrame {
                    action: i,
                    frame: frame.clone(),
                });
            }
        }
        let obj = world
            .get_mut(&action.category)
            .ok_or_else(|| DemoError::UnknownCategory {
                action: i,
                category: action.category.clone(),
            })?;
        match action.kind {
            ActionKind::Pick => {
                if let Some(h) = &held {
                    return Err(DemoError::PickWhileHolding {
                        action: i,
                        held: h.clone(),
                    });
                }
                obj.position = settle(obj, ee);
                held = Some(action.category.clone());
            }
            ActionKind::Place | ActionKind::Drop => {
                if held.as_deref() != Some(action.category.as_str()) {
                    return Err(DemoError::ReleaseWithoutPick {
                        action: i,
                        category: action.category.clone(),
                    });
                }
                obj.position = settle(obj, ee);
                held = None;
            }
        }
        touched.push(obj.id.clone());
    }
    if let Some(h) = held {
        return Err(DemoError::EndsHolding(h));
    }
    for fin in &demo.final_scene {
        let replayed = world.get(&fin.category);
        if replayed.is_none_or(|o| o.position.distance(fin.position) > FINAL_SCENE_TOLERANCE) {
            return Err(DemoError::FinalSceneMismatch(fin.id.clone()));
        }
    }
    Ok(touched)
}

/// End-effector pose of `ee` expressed in the base frame and in the frame of
/// every object in `scene`.
pub fn poses_in_all_frames(ee: Vec3, scene: &[SceneObject]) -> BTreeMap<String, Vec3> {
    let mut poses = BTreeMap::new();
    poses.insert(BASE_FRAME.to_string(), ee);
    for obj in scene {
        poses.insert(obj.category.clone(), ee - obj.grasp_point());
    }
    poses
}
