use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::engine::RunStatus;
use super::event::RunEvent;
use crate::bt::{Behavior, BtNode, NodeKind, NodeStatus};
use crate::disambiguation::Phase;
use crate::perception::FrameEntry;
use crate::world::WorldSnapshot;

/// Tree node annotated with the status it returned on the last tick;
/// `None` if it was not reached.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatusNode {
    pub kind: NodeKind,
    pub label: String,
    pub status: Option<NodeStatus>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub payload: Option<Behavior>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<StatusNode>,
}

impl StatusNode {
    pub fn build(node: &BtNode, last: &BTreeMap<String, NodeStatus>) -> Self {
        Self {
            kind: node.kind,
            label: node.label.clone(),
            status: last.get(&node.label).copied(),
            payload: node.payload.clone(),
            children: node.children.iter().map(|c| Self::build(c, last)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlackboardView {
    pub disambiguation_queue: Vec<String>,
    pub perception_halted: bool,
    pub held_object: Option<String>,
    pub resolved_frames: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DialogueView {
    pub query: String,
    pub candidates: Vec<String>,
    pub cursor: usize,
    pub phase: Phase,
    /// Text of the outstanding question.
    pub question: Option<String>,
    /// Instance the outstanding question is about.
    pub candidate: Option<String>,
    /// An answer has been received and waits for the next tick.
    pub answer_queued: bool,
}

/// Everything a client needs to render a run, as of the last tick.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateDocument {
    /// Number of completed ticks.
    pub tick: u64,
    pub status: RunStatus,
    pub scene: WorldSnapshot,
    pub frames: Vec<FrameEntry>,
    pub blackboard: BlackboardView,
    pub tree: StatusNode,
    pub dialogue: Option<DialogueView>,
    /// Most recent events, oldest first.
    pub events: Vec<RunEvent>,
}
