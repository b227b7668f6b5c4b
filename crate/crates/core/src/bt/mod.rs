//! Behavior tree interpreter.
//!
//! Control nodes are memoryless: every tick restarts from the root, which is
//! what lets a running task react to a scene that changes under it.

mod blackboard;
mod format;
mod node;
mod tick;

pub use blackboard::{keys, Blackboard, BlackboardError, Value};
pub use format::{parse_tree, render_dot, render_json, render_tree, RenderFormat};
pub use node::{Behavior, BtNode, NodeKind, NodeStatus, TreeError};
pub use tick::{tick_tree, BehaviorTree, Leaves, NodeVisit, TickOutcome};
