//! Learning behavior trees from demonstrations.
//!
//! Demonstrations are partitioned by their action sequence. Each action's
//! reference frame is the frame in which its recorded targets cluster
//! tightest, goals are the displaced objects at the end of a demonstration,
//! and demonstrations with equivalent goals are planned together by
//! backchaining over the action library.

mod demo;
mod frames;
mod generator;
mod goal;
mod planner;
mod templates;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use demo::{
    poses_in_all_frames, signature_text, validate_demo, DemoAction, DemoError, DemoFile, Demonstration,
};
pub use frames::{dispersion, infer_frame, FrameInference};
pub use generator::{DemoGenerator, TaskStep};
pub use goal::{extract_goal, group_demos, GoalCondition, GoalGroup};
pub use planner::{
    attach_disambiguation, has_disambiguation, plan_bt, plan_with_library, strip_disambiguation,
    AttachError, Plan, PlanError, DISAMBIGUATION_LABEL, GROUPS_LABEL, TASK_LABEL,
};
pub use templates::{achievers, action_library, ActionTemplate, ConditionKind};

use crate::bt::BtNode;
use crate::config::LearningConfig;
use crate::geometry::Vec3;
use crate::world::ActionKind;

/// Ordered (action, category) pairs of a demonstration.
type Signature = Vec<(ActionKind, String)>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LearnError {
    #[error("no demonstrations")]
    NoDemos,
    #[error("demo {index}: {source}")]
    Demo { index: usize, source: DemoError },
    #[error(transparent)]
    Invalid(#[from] DemoError),
    #[error(
        "{subject}: {count} demonstration(s) given, but at least {required} are needed to infer reference frames"
    )]
    FewerThanThreeDemos {
        subject: String,
        count: usize,
        required: usize,
    },
    #[error("samples lack a common base frame entry")]
    MissingBaseFrame,
    #[error("`{0}` moved but was never released")]
    MovedWithoutRelease(String),
    #[error("inferred frame `{0}` is not in the final scene")]
    UnknownFrame(String),
    #[error(transparent)]
    Plan(#[from] PlanError),
}

/// Inferred frame and fused target of one demonstrated action.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnedAction {
    /// Action sequence this action belongs to.
    pub partition: usize,
    pub index: usize,
    pub kind: ActionKind,
    pub category: String,
    pub frame: String,
    pub dispersion: f64,
    /// Centroid of the recorded targets in `frame`.
    pub target: Vec3,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Learned {
    pub actions: Vec<LearnedAction>,
    pub groups: Vec<GoalGroup>,
    pub tree: Option<BtNode>,
    pub warnings: Vec<String>,
}

/// Runs the full pipeline: validation, frame inference, goal extraction,
/// grouping and planning. The tree has no disambiguation subtree.
pub fn learn(demos: &[Demonstration], cfg: &LearningConfig) -> Result<Learned, LearnError> {
    if demos.is_empty() {
        return Err(LearnError::NoDemos);
    }
    for (index, d) in demos.iter().enumerate() {
        validate_demo(d).map_err(|source| LearnError::Demo { index, source })?;
    }

    let mut partitions: Vec<(Signature, Vec<usize>)> = Vec::new();
    for (i, d) in demos.iter().enumerate() {
        let sig = d.signature();
        match partitions.iter_mut().find(|(s, _)| *s == sig) {
            Some((_, members)) => members.push(i),
            None => partitions.push((sig, vec![i])),
        }
    }

    let mut actions = Vec::new();
    let mut warnings = Vec::new();
    let mut frames_per_demo: BTreeMap<usize, Vec<String>> = BTreeMap::new();
    for (p, (sig, members)) in partitions.iter().enumerate() {
        if members.len() < cfg.min_demos {
            return Err(LearnError::FewerThanThreeDemos {
                subject: format!("`{}`", signature_text(sig)),
                count: members.len(),
                required: cfg.min_demos,
            });
        }
        for (idx, (kind, category)) in sig.iter().enumerate() {
            let samples: Vec<BTreeMap<String, Vec3>> = members
                .iter()
                .map(|&m| demos[m].actions[idx].ee_pose_per_frame.clone())
                .collect();
            let excluded = if *kind == ActionKind::Pick {
                BTreeSet::new()
            } else {
                BTreeSet::from([category.clone()])
            };
            let inferred = infer_frame(&samples, &excluded, cfg)?;
            if *kind == ActionKind::Pick && &inferred.frame != category {
                warnings.push(format!(
                    "pick {category} clusters in `{}`, not in the picked object's frame",
                    inferred.frame
                ));
            }
            let points: Vec<Vec3> = samples.iter().map(|s| s[&inferred.frame]).collect();
            for &m in members {
                frames_per_demo.entry(m).or_default().push(inferred.frame.clone());
            }
            actions.push(LearnedAction {
                partition: p,
                index: idx,
                kind: *kind,
                category: category.clone(),
                dispersion: inferred.dispersion(),
                frame: inferred.frame,
                target: Vec3::centroid(&points).expect("at least three samples"),
            });
        }
    }

    let goals = demos
        .iter()
        .enumerate()
        .map(|(i, d)| extract_goal(d, &frames_per_demo[&i], cfg))
        .collect::<Result<Vec<_>, _>>()?;
    let groups = group_demos(&goals, cfg);
    let plan = plan_bt(&groups)?;
    warnings.extend(plan.warnings);
    if plan.tree.is_none() {
        warnings.push("demonstrations change nothing; the planned tree is empty".into());
    }
    Ok(Learned {
        actions,
        groups,
        tree: plan.tree,
        warnings,
    })
}
