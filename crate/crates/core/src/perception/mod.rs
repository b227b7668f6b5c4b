//! Simulated detection and the ambiguity-aware frame registry.
//!
//! A category seen once is reachable under its bare name (`banana`); seen
//! several times, its instances are named `banana_1`, `banana_2`, ... in order
//! of distance from the robot and the bare name stops resolving until the
//! operator has said which instance is meant.

mod detect;
mod registry;

pub use detect::{DetectResult, Detection, Detector};
pub use registry::{
    resolve_frame, FrameEntry, FrameError, FrameRegistry, RegistryError, RegistryResolver,
    RegistryUpdate, BASE_FRAME,
};
