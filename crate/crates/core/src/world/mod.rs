//! Kinematics-free ground truth for the tabletop: objects, gripper, and timed
//! pick / place / drop effects with their tolerances.

mod scene;
mod sim;

pub use scene::{grasp_point, load_scene, render_scene, validate_scene, SceneError, SceneObject};
pub use sim::{
    ActionKind, ActionProgress, FrameResolver, Gripper, ReleaseMode, ResolvedFrame, SimError,
    WorldEvent, WorldSnapshot, WorldState,
};
