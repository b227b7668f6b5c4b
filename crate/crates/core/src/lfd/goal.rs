use serde::{Deserialize, Serialize};

use super::demo::{validate_demo, Demonstration};
use super::LearnError;
use crate::config::LearningConfig;
use crate::geometry::Vec3;
use crate::perception::BASE_FRAME;
use crate::world::ReleaseMode;

/// Final resting pose of one object, relative to a reference frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoalCondition {
    pub category: String,
    pub target_pose: Vec3,
    pub frame: String,
    pub mode: ReleaseMode,
}

impl GoalCondition {
    fn key(&self) -> (&str, &str, ReleaseMode) {
        (&self.category, &self.frame, self.mode)
    }
}

/// Goal conditions of one demonstration, given the inferred frame of each of
/// its actions.
///
/// Every object that moved more than the goal threshold yields a condition
/// taken from the last release acting on it, in order of that release.
pub fn extract_goal(
    demo: &Demonstration,
    frames: &[String],
    cfg: &LearningConfig,
) -> Result<Vec<GoalCondition>, LearnError> {
    let touched = validate_demo(demo)?;
    assert_eq!(frames.len(), demo.actions.len(), "one frame per action");

    let mut goals: Vec<(usize, GoalCondition)> = Vec::new();
    for initial in &demo.initial_scene {
        let fin = demo
            .final_scene
            .iter()
            .find(|o| o.id == initial.id)
            .expect("validated object sets match");
        if fin.position.distance(initial.position) <= cfg.goal_move_threshold {
            continue;
        }
        let last_release = demo
            .actions
            .iter()
            .enumerate()
            .rev()
            .find(|(i, a)| touched[*i] == initial.id && a.release_mode().is_some());
        let Some((idx, action)) = last_release else {
            return Err(LearnError::MovedWithoutRelease(initial.id.clone()));
        };
        let frame = &frames[idx];
        let origin = if frame == BASE_FRAME {
            Vec3::ZERO
        } else {
            demo.final_scene
                .iter()
                .find(|o| &o.category == frame)
                .ok_or_else(|| LearnError::UnknownFrame(frame.clone()))?
                .grasp_point()
        };
        goals.push((
            idx,
            GoalCondition {
                category: initial.category.clone(),
                target_pose: fin.grasp_point() - origin,
                frame: frame.clone(),
                mode: action.release_mode().expect("release"),
            },
        ));
    }
    goals.sort_by_key(|(idx, _)| *idx);
    Ok(goals.into_iter().map(|(_, g)| g).collect())
}

/// Demonstrations sharing a goal, with the goal fused over the members.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoalGroup {
    pub demos: Vec<usize>,
    pub goals: Vec<GoalCondition>,
}

fn equivalent(a: &[GoalCondition], b: &[GoalCondition], tolerance: f64) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let mut used = vec![false; b.len()];
    a.iter().all(|ga| {
        let hit = b.iter().enumerate().position(|(j, gb)| {
            !used[j] && ga.key() == gb.key() && ga.target_pose.distance(gb.target_pose) <= tolerance
        });
        if let Some(j) = hit {
            used[j] = true;
        }
        hit.is_some()
    })
}

/// Groups demonstrations whose goals agree: same (category, frame, mode)
/// multiset and pairwise target poses within tolerance of every member.
pub fn group_demos(goals: &[Vec<GoalCondition>], cfg: &LearningConfig) -> Vec<GoalGroup> {
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (i, g) in goals.iter().enumerate() {
        let home = groups.iter_mut().find(|members| {
            members
                .iter()
                .all(|&m| equivalent(&goals[m], g, cfg.goal_match_tolerance))
        });
        match home {
            Some(members) => members.push(i),
            None => groups.push(vec![i]),
        }
    }
    groups
        .into_iter()
        .map(|demos| {
            let first = &goals[demos[0]];
            let fused = first
                .iter()
                .map(|g| {
                    let poses: Vec<Vec3> = demos
                        .iter()
                        .filter_map(|&d| {
                            goals[d]
                                .iter()
                                .filter(|o| o.key() == g.key())
                                .min_by(|x, y| {
                                    x.target_pose
                                        .distance(g.target_pose)
                                        .total_cmp(&y.target_pose.distance(g.target_pose))
                                })
                                .map(|o| o.target_pose)
                        })
                        .collect();
                    GoalCondition {
                        target_pose: Vec3::centroid(&poses).expect("first member matches itself"),
                        ..g.clone()
                    }
                })
                .collect();
            GoalGroup { demos, goals: fused }
        })
        .collect()
}
