use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::goal::{GoalCondition, GoalGroup};
use super::templates::{achievers, action_library, ActionTemplate, ConditionKind};
use crate::bt::{Behavior, BtNode, NodeKind, TreeError};
use crate::world::ActionKind;

pub const TASK_LABEL: &str = "task";
pub const GROUPS_LABEL: &str = "goal groups";
pub const DISAMBIGUATION_LABEL: &str = "disambiguation";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlanError {
    #[error("cyclic pre-conditions through `{0}`")]
    Cyclic(String),
    #[error("{count} actions achieve `{condition}`")]
    AmbiguousAchiever { condition: String, count: usize },
    #[error("cannot instantiate {action} for `{condition}`")]
    Instantiation { action: ActionKind, condition: String },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AttachError {
    #[error("the manipulation tree is empty")]
    Empty,
    #[error("the tree already has a disambiguation subtree")]
    AlreadyAttached,
    #[error(transparent)]
    Tree(#[from] TreeError),
}

/// Planner output. `tree` is `None` when no group has a goal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Plan {
    pub tree: Option<BtNode>,
    pub warnings: Vec<String>,
}

fn condition_kind(b: &Behavior) -> Option<ConditionKind> {
    match b {
        Behavior::GripperOpen => Some(ConditionKind::GripperOpen),
        Behavior::InGripper { .. } => Some(ConditionKind::InGripper),
        Behavior::ObjectAt { mode, .. } => Some(ConditionKind::ObjectAt(*mode)),
        _ => None,
    }
}

fn subject(b: &Behavior) -> Option<&str> {
    match b {
        Behavior::InGripper { category }
        | Behavior::ObjectAt { category, .. }
        | Behavior::Pick { category }
        | Behavior::Release { category, .. } => Some(category),
        _ => None,
    }
}

fn instantiate_action(t: &ActionTemplate, cond: &Behavior) -> Result<Behavior, PlanError> {
    let fail = || PlanError::Instantiation {
        action: t.kind,
        condition: cond.label(),
    };
    match (t.kind, cond) {
        (ActionKind::Pick, Behavior::InGripper { category }) => Ok(Behavior::Pick {
            category: category.clone(),
        }),
        (
            ActionKind::Place | ActionKind::Drop,
            Behavior::ObjectAt {
                category,
                pose,
                frame,
                mode,
            },
        ) => Ok(Behavior::Release {
            category: category.clone(),
            pose: *pose,
            frame: frame.clone(),
            mode: *mode,
        }),
        _ => Err(fail()),
    }
}

fn instantiate_condition(kind: ConditionKind, action: &Behavior) -> Result<Behavior, PlanError> {
    match (kind, subject(action)) {
        (ConditionKind::GripperOpen, _) => Ok(Behavior::GripperOpen),
        (ConditionKind::InGripper, Some(category)) => Ok(Behavior::InGripper {
            category: category.to_string(),
        }),
        _ => Err(PlanError::Instantiation {
            action: ActionKind::Pick,
            condition: format!("{kind:?}"),
        }),
    }
}

struct Planner<'a> {
    library: &'a [ActionTemplate],
    warnings: Vec<String>,
    stack: Vec<String>,
}

impl Planner<'_> {
    /// Fallback(condition, Sequence(pre-condition PPAs..., action)).
    fn ppa(&mut self, cond: Behavior) -> Result<BtNode, PlanError> {
        let label = cond.label();
        if self.stack.contains(&label) {
            return Err(PlanError::Cyclic(label));
        }
        let kind = condition_kind(&cond).expect("planner only expands conditions");
        let found = achievers(self.library, kind);
        let template = match found.as_slice() {
            [] => {
                self.warnings
                    .push(format!("no action achieves `{label}`; left as a bare condition"));
                return Ok(BtNode::leaf(cond));
            }
            [one] => *one,
            many => {
                return Err(PlanError::AmbiguousAchiever {
                    condition: label,
                    count: many.len(),
                })
            }
        };
        let action = instantiate_action(template, &cond)?;
        self.stack.push(label.clone());
        let mut children = Vec::new();
        for pre in template.planned_pre() {
            let pre_cond = instantiate_condition(pre, &action)?;
            children.push(self.ppa(pre_cond)?);
        }
        self.stack.pop();
        let action_label = action.label();
        children.push(BtNode::leaf(action));
        let body = if children.len() == 1 {
            children.pop().expect("one child")
        } else {
            BtNode::sequence(format!("do: {action_label}"), children)
        };
        Ok(BtNode::fallback(
            format!("achieve: {label}"),
            vec![BtNode::leaf(cond), body],
        ))
    }
}

fn goal_behavior(g: &GoalCondition) -> Behavior {
    Behavior::ObjectAt {
        category: g.category.clone(),
        pose: g.target_pose,
        frame: g.frame.clone(),
        mode: g.mode,
    }
}

/// Backchains every group's goal conditions into a tree, using the standard
/// action library.
pub fn plan_bt(groups: &[GoalGroup]) -> Result<Plan, PlanError> {
    plan_with_library(groups, &action_library())
}

/// Goals of one group run in order under a Sequence; several groups are
/// alternatives under a Fallback.
pub fn plan_with_library(groups: &[GoalGroup], library: &[ActionTemplate]) -> Result<Plan, PlanError> {
    let mut planner = Planner {
        library,
        warnings: Vec::new(),
        stack: Vec::new(),
    };
    let mut subtrees = Vec::new();
    for (i, group) in groups.iter().enumerate() {
        if group.goals.is_empty() {
            planner
                .warnings
                .push(format!("goal group {} is empty; nothing to plan", i + 1));
            continue;
        }
        let ppas = group
            .goals
            .iter()
            .map(|g| planner.ppa(goal_behavior(g)))
            .collect::<Result<Vec<_>, _>>()?;
        subtrees.push(ppas);
    }
    let tree = match subtrees.len() {
        0 => None,
        1 => Some(BtNode::sequence(TASK_LABEL, subtrees.pop().expect("one"))),
        _ => Some(BtNode::fallback(
            GROUPS_LABEL,
            subtrees
                .into_iter()
                .enumerate()
                .map(|(i, ppas)| BtNode::sequence(format!("{TASK_LABEL} {}", i + 1), ppas))
                .collect(),
        )),
    };
    let tree = tree.map(|mut t| {
        uniquify_labels(&mut t);
        t
    });
    Ok(Plan {
        tree,
        warnings: planner.warnings,
    })
}

/// Suffixes repeated labels with ` #2`, ` #3`, ... in pre-order.
fn uniquify_labels(tree: &mut BtNode) {
    fn walk(node: &mut BtNode, seen: &mut BTreeSet<String>) {
        if !seen.insert(node.label.clone()) {
            let mut k = 2;
            while seen.contains(&format!("{} #{k}", node.label)) {
                k += 1;
            }
            node.label = format!("{} #{k}", node.label);
            seen.insert(node.label.clone());
        }
        for child in &mut node.children {
            walk(child, seen);
        }
    }
    walk(tree, &mut BTreeSet::new());
}

pub fn has_disambiguation(tree: &BtNode) -> bool {
    tree.iter()
        .any(|n| matches!(n.payload, Some(Behavior::Disambiguate)))
}

fn disambiguation_subtree() -> BtNode {
    BtNode::fallback(
        DISAMBIGUATION_LABEL,
        vec![
            BtNode::leaf(Behavior::SceneClear),
            BtNode::leaf(Behavior::Disambiguate),
        ],
    )
}

/// Puts Fallback(Scene Clear?, Disambiguate) in front of the manipulation
/// tree. A Sequence root takes it as its first child, adding three nodes;
/// any other root is wrapped in a new Sequence.
pub fn attach_disambiguation(tree: &BtNode) -> Result<BtNode, AttachError> {
    if tree.kind.is_control() && tree.children.is_empty() {
        return Err(AttachError::Empty);
    }
    tree.validate()?;
    if has_disambiguation(tree) {
        return Err(AttachError::AlreadyAttached);
    }
    let out = if tree.kind == NodeKind::Sequence {
        let mut root = tree.clone();
        root.children.insert(0, disambiguation_subtree());
        root
    } else {
        BtNode::sequence("root", vec![disambiguation_subtree(), tree.clone()])
    };
    out.validate()?;
    Ok(out)
}

/// Removes the subtree added by [`attach_disambiguation`].
pub fn strip_disambiguation(tree: &BtNode) -> BtNode {
    let mut root = tree.clone();
    root.children.retain(|c| c.label != DISAMBIGUATION_LABEL);
    if root.label == "root" && root.children.len() == 1 {
        return root.children.pop().expect("one child");
    }
    root
}
