use serde::{Deserialize, Serialize};

use crate::disambiguation::{Answer, Question};

/// One line of an answers script: every question of `query` is answered
/// Yes exactly when it is about instance `yes_for`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScriptedAnswer {
    pub query: String,
    pub yes_for: String,
}

pub fn parse_answers(text: &str) -> Result<Vec<ScriptedAnswer>, serde_json::Error> {
    serde_json::from_str(text)
}

/// Headless stand-in for the human operator.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ScriptedOperator {
    script: Vec<ScriptedAnswer>,
}

impl ScriptedOperator {
    pub fn new(script: Vec<ScriptedAnswer>) -> Self {
        Self { script }
    }

    /// `None` when the script does not cover the query.
    pub fn answer(&self, question: &Question) -> Option<Answer> {
        let entry = self.script.iter().find(|a| a.query == question.query)?;
        Some(if entry.yes_for == question.candidate {
            Answer::Yes
        } else {
            Answer::No
        })
    }
}
