//! Clarification of ambiguous object categories.
//!
//! Candidates are the instances of the queried category. Each is described by
//! the most informative spatial relation to another object, turned into a
//! yes/no question, and the first candidate the operator confirms wins.

mod dialogue;
mod relations;
mod statement;

pub use dialogue::{apply_resolution, Answer, DialogueError, DialogueState, Phase, Question, ResolutionError};
pub use relations::{relations, SpatialRelation};
pub use statement::{
    candidates, form_question, select_statement, statement_holds, DisambiguationError,
    RelationStatement, SceneEntity,
};
