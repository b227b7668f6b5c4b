use serde::{Deserialize, Serialize};

use crate::world::{ActionKind, ReleaseMode};

/// Condition schemas an action can require or establish.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConditionKind {
    GripperOpen,
    InGripper,
    ObjectAt(ReleaseMode),
}

/// Pre- and post-conditions of one manipulation primitive.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionTemplate {
    pub kind: ActionKind,
    pub pre: Vec<ConditionKind>,
    pub post: Vec<ConditionKind>,
    /// Pre-conditions the action establishes by itself before acting; they
    /// are never expanded into subtrees.
    pub self_satisfied: Vec<ConditionKind>,
}

impl ActionTemplate {
    /// Pre-conditions that need their own subtree.
    pub fn planned_pre(&self) -> impl Iterator<Item = ConditionKind> + '_ {
        self.pre
            .iter()
            .copied()
            .filter(|c| !self.self_satisfied.contains(c))
    }
}

/// The action library.
pub fn action_library() -> Vec<ActionTemplate> {
    use ConditionKind::*;
    vec![
        ActionTemplate {
            kind: ActionKind::Pick,
            pre: vec![GripperOpen],
            post: vec![InGripper],
            self_satisfied: vec![GripperOpen],
        },
        ActionTemplate {
            kind: ActionKind::Place,
            pre: vec![InGripper],
            post: vec![ObjectAt(ReleaseMode::Place), GripperOpen],
            self_satisfied: vec![],
        },
        ActionTemplate {
            kind: ActionKind::Drop,
            pre: vec![InGripper],
            post: vec![ObjectAt(ReleaseMode::Drop), GripperOpen],
            self_satisfied: vec![],
        },
    ]
}

/// Templates listing `condition` among their post-conditions.
pub fn achievers(library: &[ActionTemplate], condition: ConditionKind) -> Vec<&ActionTemplate> {
    library
        .iter()
        .filter(|t| t.post.contains(&condition))
        .collect()
}
