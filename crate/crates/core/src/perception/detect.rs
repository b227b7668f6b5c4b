use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::PerceptionConfig;
use crate::geometry::{standard_normal, Vec3};
use crate::world::WorldState;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    /// Identity proposed by the detector; only used for newly seen instances.
    pub instance: String,
    pub category: String,
    /// Grasp point in the world frame.
    pub position: Vec3,
    pub timestamp: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DetectResult {
    Detections(Vec<Detection>),
    /// Detection is halted; the registry must not be touched.
    NoUpdate,
}

/// Ground-truth detector with optional Gaussian jitter.
#[derive(Debug, Clone)]
pub struct Detector {
    config: PerceptionConfig,
    rng: ChaCha8Rng,
}

impl Detector {
    pub fn new(config: PerceptionConfig, seed: u64) -> Self {
        Self {
            config,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn config(&self) -> &PerceptionConfig {
        &self.config
    }

    fn in_field(&self, p: Vec3) -> bool {
        p.x.abs() <= self.config.field_half_width && (0.0..=self.config.field_depth).contains(&p.y)
    }

    fn gaussian(&mut self) -> f64 {
        standard_normal(&mut self.rng)
    }

    /// One detection per visible object on the table. The held object is in
    /// the gripper, not on the table, and is skipped.
    pub fn detect(&mut self, world: &WorldState, halted: bool) -> DetectResult {
        if halted {
            return DetectResult::NoUpdate;
        }
        let sigma = self.config.jitter;
        let held = world.held().map(str::to_string);
        let visible: Vec<_> = world
            .objects()
            .filter(|o| Some(&o.id) != held.as_ref())
            .map(|o| (o.id.clone(), o.category.clone(), o.grasp_point()))
            .filter(|(_, _, p)| self.in_field(*p))
            .collect();
        let timestamp = world.clock();
        let dets = visible
            .into_iter()
            .map(|(id, category, mut position)| {
                if sigma > 0.0 {
                    position += Vec3::new(self.gaussian(), self.gaussian(), 0.0) * sigma;
                }
                Detection {
                    instance: id,
                    category,
                    position,
                    timestamp,
                }
            })
            .collect();
        DetectResult::Detections(dets)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::WorldConfig;
    use crate::world::SceneObject;

    fn s1() -> WorldState {
        WorldState::new(
            vec![
                SceneObject::new("b1", "banana", Vec3::new(0.10, 0.40, 0.0), 0.05),
                SceneObject::new("w1", "bowl", Vec3::new(-0.15, 0.35, 0.0), 0.08),
            ],
            WorldConfig::default(),
            1,
        )
        .unwrap()
    }

    #[test]
    fn halted_detection_reports_no_update() {
        let mut det = Detector::new(PerceptionConfig::default(), 0);
        assert_eq!(det.detect(&s1(), true), DetectResult::NoUpdate);
    }

    #[test]
    fn one_detection_per_object() {
        let mut det = Detector::new(PerceptionConfig::default(), 0);
        let DetectResult::Detections(dets) = det.detect(&s1(), false) else {
            panic!("expected detections");
        };
        assert_eq!(dets.len(), 2);
        let bowl = dets.iter().find(|d| d.category == "bowl").unwrap();
        assert!((bowl.position.x - (-0.07)).abs() < 1e-12);
    }

    #[test]
    fn objects_outside_the_camera_field_are_not_seen() {
        let world = WorldState::new(
            vec![SceneObject::new("far", "banana", Vec3::new(0.9, 0.4, 0.0), 0.05)],
            WorldConfig::default(),
            1,
        )
        .unwrap();
        let mut det = Detector::new(PerceptionConfig::default(), 0);
        assert_eq!(det.detect(&world, false), DetectResult::Detections(vec![]));
    }

    #[test]
    fn jitter_is_seeded() {
        let cfg = PerceptionConfig {
            jitter: 0.005,
            ..PerceptionConfig::default()
        };
        let a = Detector::new(cfg.clone(), 7).detect(&s1(), false);
        let b = Detector::new(cfg, 7).detect(&s1(), false);
        assert_eq!(a, b);
    }
}
