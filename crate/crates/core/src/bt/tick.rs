use serde::{Deserialize, Serialize};

use super::node::{Behavior, BtNode, NodeKind, NodeStatus, TreeError};

/// Binds leaves to behaviors. Conditions answer instantly; actions may keep
/// returning [`NodeStatus::Running`] across ticks.
pub trait Leaves {
    fn condition(&mut self, label: &str, payload: Option<&Behavior>) -> bool;
    fn action(&mut self, label: &str, payload: Option<&Behavior>) -> NodeStatus;
}

/// One node returning a status during a tick, in return order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeVisit {
    pub label: String,
    pub status: NodeStatus,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TickOutcome {
    pub status: NodeStatus,
    pub visits: Vec<NodeVisit>,
}

/// A structurally validated tree.
#[derive(Debug, Clone, PartialEq)]
pub struct BehaviorTree {
    root: BtNode,
}

impl BehaviorTree {
    pub fn new(root: BtNode) -> Result<Self, TreeError> {
        root.validate()?;
        Ok(Self { root })
    }

    pub fn root(&self) -> &BtNode {
        &self.root
    }

    pub fn into_root(self) -> BtNode {
        self.root
    }

    pub fn tick(&self, leaves: &mut dyn Leaves) -> TickOutcome {
        let mut visits = Vec::new();
        let status = tick_node(&self.root, leaves, &mut visits);
        TickOutcome { status, visits }
    }
}

/// Validates `tree`, then ticks it once from the root.
pub fn tick_tree(tree: &BtNode, leaves: &mut dyn Leaves) -> Result<TickOutcome, TreeError> {
    tree.validate()?;
    let mut visits = Vec::new();
    let status = tick_node(tree, leaves, &mut visits);
    Ok(TickOutcome { status, visits })
}

fn tick_node(node: &BtNode, leaves: &mut dyn Leaves, visits: &mut Vec<NodeVisit>) -> NodeStatus {
    let status = match node.kind {
        NodeKind::Sequence => {
            let mut status = NodeStatus::Success;
            for child in &node.children {
                let s = tick_node(child, leaves, visits);
                if s != NodeStatus::Success {
                    status = s;
                    break;
                }
            }
            status
        }
        NodeKind::Fallback => {
            let mut status = NodeStatus::Failure;
            for child in &node.children {
                let s = tick_node(child, leaves, visits);
                if s != NodeStatus::Failure {
                    status = s;
                    break;
                }
            }
            status
        }
        NodeKind::Condition => {
            if leaves.condition(&node.label, node.payload.as_ref()) {
                NodeStatus::Success
            } else {
                NodeStatus::Failure
            }
        }
        NodeKind::Action => leaves.action(&node.label, node.payload.as_ref()),
    };
    visits.push(NodeVisit {
        label: node.label.clone(),
        status,
    });
    status
}
