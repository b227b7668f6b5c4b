use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::demo::{poses_in_all_frames, settle, DemoAction, Demonstration};
use crate::geometry::{standard_normal, Vec3};
use crate::perception::BASE_FRAME;
use crate::world::{ActionKind, ReleaseMode, SceneObject};

/// One pick-and-release of a scripted task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskStep {
    pub pick: String,
    /// Category whose frame the release target is expressed in, or `base`.
    pub frame: String,
    pub offset: Vec3,
    pub mode: ReleaseMode,
}

/// Produces synthetic demonstrations: object layouts are reshuffled for
/// every demonstration and every recorded end-effector target gets
/// isotropic Gaussian noise.
#[derive(Debug, Clone)]
pub struct DemoGenerator {
    rng: ChaCha8Rng,
    /// Per-axis standard deviation of the target noise (m).
    pub noise: f64,
    /// Sampling box for object centroids: x range and y range (m).
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    /// Minimum horizontal distance between object centroids (m).
    pub min_separation: f64,
}

impl DemoGenerator {
    pub fn new(seed: u64, noise: f64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            noise,
            x_range: (-0.25, 0.25),
            y_range: (0.25, 0.45),
            min_separation: 0.12,
        }
    }

    fn jitter(&mut self) -> Vec3 {
        let n = self.noise;
        if n <= 0.0 {
            return Vec3::ZERO;
        }
        Vec3::new(
            standard_normal(&mut self.rng),
            standard_normal(&mut self.rng),
            standard_normal(&mut self.rng),
        ) * n
    }

    /// Copies `template` with fresh, well-separated horizontal positions.
    pub fn scatter(&mut self, template: &[SceneObject]) -> Vec<SceneObject> {
        'attempt: loop {
            let mut placed: Vec<SceneObject> = Vec::with_capacity(template.len());
            for obj in template {
                let mut found = None;
                for _ in 0..200 {
                    let p = Vec3::new(
                        self.rng.gen_range(self.x_range.0..=self.x_range.1),
                        self.rng.gen_range(self.y_range.0..=self.y_range.1),
                        obj.position.z,
                    );
                    if placed
                        .iter()
                        .all(|o| o.position.horizontal_distance(p) >= self.min_separation)
                    {
                        found = Some(p);
                        break;
                    }
                }
                let Some(p) = found else { continue 'attempt };
                let mut o = obj.clone();
                o.position = p;
                placed.push(o);
            }
            return placed;
        }
    }

    /// Performs `steps` in `scene`, recording every action in all frames.
    ///
    /// Panics if a step names a category missing from the scene.
    pub fn demonstrate(&mut self, scene: &[SceneObject], steps: &[TaskStep]) -> Demonstration {
        let mut world = scene.to_vec();
        let mut actions = Vec::new();
        let index = |world: &[SceneObject], cat: &str| {
            world
                .iter()
                .position(|o| o.category == cat)
                .unwrap_or_else(|| panic!("no `{cat}` in the scene"))
        };
        for step in steps {
            let obj = index(&world, &step.pick);
            let ee = world[obj].grasp_point() + self.jitter();
            actions.push(DemoAction {
                kind: ActionKind::Pick,
                category: step.pick.clone(),
                ee_pose_per_frame: poses_in_all_frames(ee, &world),
            });
            world[obj].position = settle(&world[obj], ee);

            let origin = if step.frame == BASE_FRAME {
                Vec3::ZERO
            } else {
                world[index(&world, &step.frame)].grasp_point()
            };
            let ee = origin + step.offset + self.jitter();
            actions.push(DemoAction {
                kind: step.mode.into(),
                category: step.pick.clone(),
                ee_pose_per_frame: poses_in_all_frames(ee, &world),
            });
            world[obj].position = settle(&world[obj], ee);
        }
        Demonstration {
            initial_scene: scene.to_vec(),
            actions,
            final_scene: world,
        }
    }

    /// `n` demonstrations of `steps`, each from a reshuffled `template`.
    pub fn generate(&mut self, template: &[SceneObject], steps: &[TaskStep], n: usize) -> Vec<Demonstration> {
        (0..n)
            .map(|_| {
                let scene = self.scatter(template);
                self.demonstrate(&scene, steps)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::LearningConfig;
    use crate::lfd::{learn, validate_demo};

    fn template() -> Vec<SceneObject> {
        vec![
            SceneObject::new("b1", "banana", Vec3::new(0.1, 0.4, 0.0), 0.04),
            SceneObject::new("w1", "bowl", Vec3::new(-0.15, 0.35, 0.0), 0.08),
        ]
    }

    fn drop_in_bowl() -> Vec<TaskStep> {
        vec![TaskStep {
            pick: "banana".into(),
            frame: "bowl".into(),
            offset: Vec3::new(-0.08, 0.0, 0.05),
            mode: ReleaseMode::Drop,
        }]
    }

    #[test]
    fn generated_demos_validate() {
        let mut g = DemoGenerator::new(7, 0.01);
        for d in g.generate(&template(), &drop_in_bowl(), 5) {
            validate_demo(&d).unwrap();
        }
    }

    #[test]
    fn same_seed_same_demos() {
        let a = DemoGenerator::new(3, 0.01).generate(&template(), &drop_in_bowl(), 3);
        let b = DemoGenerator::new(3, 0.01).generate(&template(), &drop_in_bowl(), 3);
        assert_eq!(a, b);
    }

    #[test]
    fn learning_recovers_the_demonstrated_frames() {
        let demos = DemoGenerator::new(11, 0.005).generate(&template(), &drop_in_bowl(), 3);
        let learned = learn(&demos, &LearningConfig::default()).unwrap();
        let frames: Vec<_> = learned.actions.iter().map(|a| a.frame.as_str()).collect();
        assert_eq!(frames, ["banana", "bowl"]);
        assert_eq!(learned.groups.len(), 1);
        assert!(learned.tree.is_some());
    }
}
