use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Vec3;
use crate::world::ReleaseMode;

/// Result of ticking a node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NodeStatus {
    Success,
    Failure,
    Running,
}

impl fmt::Display for NodeStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NodeStatus::Success => "Success",
            NodeStatus::Failure => "Failure",
            NodeStatus::Running => "Running",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    Sequence,
    Fallback,
    Condition,
    Action,
}

impl NodeKind {
    pub fn is_control(self) -> bool {
        matches!(self, NodeKind::Sequence | NodeKind::Fallback)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            NodeKind::Sequence => "sequence",
            NodeKind::Fallback => "fallback",
            NodeKind::Condition => "condition",
            NodeKind::Action => "action",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "sequence" => Some(NodeKind::Sequence),
            "fallback" => Some(NodeKind::Fallback),
            "condition" => Some(NodeKind::Condition),
            "action" => Some(NodeKind::Action),
            _ => None,
        }
    }
}

/// What a leaf does when ticked.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Behavior {
    /// Condition: no disambiguation query is pending.
    SceneClear,
    /// Condition: the gripper is open.
    GripperOpen,
    /// Condition: an object of `category` is in the gripper.
    InGripper { category: String },
    /// Condition: the `category` object is at `pose` in `frame`, within the
    /// tolerance of `mode`.
    ObjectAt {
        category: String,
        pose: Vec3,
        frame: String,
        mode: ReleaseMode,
    },
    /// Action: close the gripper around the `category` object.
    Pick { category: String },
    /// Action: open the gripper with the held `category` object at `pose` in
    /// `frame`.
    Release {
        category: String,
        pose: Vec3,
        frame: String,
        mode: ReleaseMode,
    },
    /// Action: run the clarification dialogue for the head of the query queue.
    Disambiguate,
}

impl Behavior {
    pub fn is_condition(&self) -> bool {
        matches!(
            self,
            Behavior::SceneClear
                | Behavior::GripperOpen
                | Behavior::InGripper { .. }
                | Behavior::ObjectAt { .. }
        )
    }

    /// Human-readable node label.
    pub fn label(&self) -> String {
        match self {
            Behavior::SceneClear => "Scene Clear?".to_string(),
            Behavior::GripperOpen => "gripper open?".to_string(),
            Behavior::InGripper { category } => format!("in gripper {category}?"),
            Behavior::ObjectAt {
                category,
                pose,
                frame,
                mode: ReleaseMode::Place,
            } => format!("{category} at {pose} in {frame}?"),
            Behavior::ObjectAt {
                category,
                pose,
                frame,
                mode: ReleaseMode::Drop,
            } => format!("{category} roughly at {pose} in {frame}?"),
            Behavior::Pick { category } => format!("pick {category}"),
            Behavior::Release {
                category,
                pose,
                frame,
                mode,
            } => format!("{} {category} at {pose} in {frame}", mode.verb()),
            Behavior::Disambiguate => "Disambiguate".to_string(),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TreeError {
    #[error("empty tree document")]
    Empty,
    #[error("invalid JSON: {0}")]
    Json(String),
    #[error("{path}: unknown node kind `{kind}`")]
    UnknownKind { path: String, kind: String },
    #[error("{path}: missing field `{field}`")]
    MissingField { path: String, field: &'static str },
    #[error("{path}: duplicate label `{label}`")]
    DuplicateLabel { path: String, label: String },
    #[error("{path}: {kind} node with {children} children")]
    Arity {
        path: String,
        kind: &'static str,
        children: usize,
    },
    #[error("{path}: {message}")]
    Payload { path: String, message: String },
}

/// A behavior tree node. Leaves carry an optional [`Behavior`]; leaves
/// without one are bound by label alone (useful for stubs).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BtNode {
    pub kind: NodeKind,
    pub label: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<BtNode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub payload: Option<Behavior>,
}

impl BtNode {
    pub fn sequence(label: impl Into<String>, children: Vec<BtNode>) -> Self {
        Self {
            kind: NodeKind::Sequence,
            label: label.into(),
            children,
            payload: None,
        }
    }

    pub fn fallback(label: impl Into<String>, children: Vec<BtNode>) -> Self {
        Self {
            kind: NodeKind::Fallback,
            label: label.into(),
            children,
            payload: None,
        }
    }

    pub fn condition(label: impl Into<String>) -> Self {
        Self {
            kind: NodeKind::Condition,
            label: label.into(),
            children: Vec::new(),
            payload: None,
        }
    }

    pub fn action(label: impl Into<String>) -> Self {
        Self {
            kind: NodeKind::Action,
            label: label.into(),
            children: Vec::new(),
            payload: None,
        }
    }

    /// Leaf of the right kind for `behavior`, labelled after it.
    pub fn leaf(behavior: Behavior) -> Self {
        let kind = if behavior.is_condition() {
            NodeKind::Condition
        } else {
            NodeKind::Action
        };
        Self {
            kind,
            label: behavior.label(),
            children: Vec::new(),
            payload: Some(behavior),
        }
    }

    pub fn node_count(&self) -> usize {
        1 + self.children.iter().map(BtNode::node_count).sum::<usize>()
    }

    /// Pre-order iteration over all nodes.
    pub fn iter(&self) -> impl Iterator<Item = &BtNode> {
        let mut stack = vec![self];
        std::iter::from_fn(move || {
            let node = stack.pop()?;
            stack.extend(node.children.iter().rev());
            Some(node)
        })
    }

    pub fn find(&self, label: &str) -> Option<&BtNode> {
        self.iter().find(|n| n.label == label)
    }

    /// Checks arity, label uniqueness and payload/kind agreement.
    pub fn validate(&self) -> Result<(), TreeError> {
        let mut seen = BTreeSet::new();
        self.validate_at("$", &mut seen)
    }

    fn validate_at<'a>(
        &'a self,
        path: &str,
        seen: &mut BTreeSet<&'a str>,
    ) -> Result<(), TreeError> {
        if !seen.insert(self.label.as_str()) {
            return Err(TreeError::DuplicateLabel {
                path: path.to_string(),
                label: self.label.clone(),
            });
        }
        let arity_ok = if self.kind.is_control() {
            !self.children.is_empty()
        } else {
            self.children.is_empty()
        };
        if !arity_ok {
            return Err(TreeError::Arity {
                path: path.to_string(),
                kind: self.kind.as_str(),
                children: self.children.len(),
            });
        }
        if let Some(payload) = &self.payload {
            let fits = match self.kind {
                NodeKind::Condition => payload.is_condition(),
                NodeKind::Action => !payload.is_condition(),
                _ => false,
            };
            if !fits {
                return Err(TreeError::Payload {
                    path: path.to_string(),
                    message: format!(
                        "payload `{}` does not fit a {} node",
                        payload.label(),
                        self.kind.as_str()
                    ),
                });
            }
        }
        for (i, child) in self.children.iter().enumerate() {
            child.validate_at(&format!("{path}.children[{i}]"), seen)?;
        }
        Ok(())
    }
}
