use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Vec3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneObject {
    pub id: String,
    /// COCO-style label such as `banana` or `bowl`.
    pub category: String,
    /// Centroid in the world frame (m).
    pub position: Vec3,
    pub footprint_radius: f64,
}

impl SceneObject {
    pub fn new(id: &str, category: &str, position: Vec3, footprint_radius: f64) -> Self {
        Self {
            id: id.to_string(),
            category: category.to_string(),
            position,
            footprint_radius,
        }
    }

    pub fn grasp_point(&self) -> Vec3 {
        grasp_point(self)
    }

    /// Offset from centroid to grasp point.
    pub fn grasp_offset(&self) -> Vec3 {
        self.grasp_point() - self.position
    }
}

/// Category-specific grasp heuristic: bowls are taken by the rim on the
/// robot's right, everything else at the centroid.
pub fn grasp_point(obj: &SceneObject) -> Vec3 {
    match obj.category.as_str() {
        "bowl" => obj.position + Vec3::new(obj.footprint_radius, 0.0, 0.0),
        _ => obj.position,
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SceneError {
    #[error("invalid scene JSON: {0}")]
    Json(String),
    #[error("duplicate object id `{0}`")]
    DuplicateId(String),
    #[error("object `{0}` has an empty category")]
    EmptyCategory(String),
    #[error("object `{0}` is below the table (z < 0)")]
    BelowTable(String),
    #[error("object `{0}` has a non-finite position or radius")]
    NonFinite(String),
}

pub(crate) fn validate_object(obj: &SceneObject) -> Result<(), SceneError> {
    if obj.category.trim().is_empty() {
        return Err(SceneError::EmptyCategory(obj.id.clone()));
    }
    if !obj.position.is_finite() || !obj.footprint_radius.is_finite() || obj.footprint_radius < 0.0
    {
        return Err(SceneError::NonFinite(obj.id.clone()));
    }
    if obj.position.z < 0.0 {
        return Err(SceneError::BelowTable(obj.id.clone()));
    }
    Ok(())
}

pub fn validate_scene(objects: &[SceneObject]) -> Result<(), SceneError> {
    let mut ids = BTreeSet::new();
    for obj in objects {
        if !ids.insert(obj.id.as_str()) {
            return Err(SceneError::DuplicateId(obj.id.clone()));
        }
        validate_object(obj)?;
    }
    Ok(())
}

/// Parses a scene file: a JSON list of objects.
pub fn load_scene(text: &str) -> Result<Vec<SceneObject>, SceneError> {
    let objects: Vec<SceneObject> =
        serde_json::from_str(text).map_err(|e| SceneError::Json(e.to_string()))?;
    validate_scene(&objects)?;
    Ok(objects)
}

pub fn render_scene(objects: &[SceneObject]) -> String {
    let mut out = serde_json::to_string_pretty(objects).expect("scene serializes");
    out.push('\n');
    out
}
