//! Behavior trees learned from pick-and-place demonstrations, extended with a
//! disambiguation subtree and executed against a simulated tabletop where a
//! human operator resolves object ambiguities through yes/no questions.
//!
//! The crate is organised bottom-up:
//!
//! * [`bt`] - tree data structure, memoryless tick semantics, blackboard and
//!   the JSON / Graphviz formats.
//! * [`world`] - ground-truth scene, gripper and timed pick/place/drop effects.
//! * [`perception`] - simulated detection and the ambiguity-aware frame registry.
//! * [`lfd`] - demonstrations, reference-frame inference, goal extraction and
//!   the backchaining planner.
//! * [`disambiguation`] - spatial relations, statement selection, question
//!   templates and the yes/no dialogue automaton.
//! * [`executor`] - the tick loop that ties everything together and records an
//!   event log.

pub mod bt;
pub mod config;
pub mod disambiguation;
pub mod executor;
pub mod geometry;
pub mod lfd;
pub mod perception;
pub mod world;

pub use config::Config;
pub use geometry::Vec3;
