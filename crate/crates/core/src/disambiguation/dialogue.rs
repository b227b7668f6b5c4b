use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::statement::{form_question, select_statement, DisambiguationError, RelationStatement, SceneEntity};
use crate::bt::Blackboard;
use crate::config::DialogueConfig;
use crate::perception::{FrameRegistry, RegistryError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Answer {
    Yes,
    No,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "phase", content = "instance", rename_all = "snake_case")]
pub enum Phase {
    Asking,
    Resolved(String),
    Exhausted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Question {
    pub query: String,
    pub candidate: String,
    pub text: String,
    pub statement: RelationStatement,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DialogueError {
    #[error("answer received while no question is outstanding")]
    NoOutstandingQuestion,
    #[error("dialogue for `{0}` is already finished")]
    Finished(String),
}

/// The yes/no clarification automaton for one query.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DialogueState {
    pub query: String,
    pub candidates: Vec<String>,
    /// Statement used for each candidate, filled in as questions go out.
    pub statements: Vec<Option<RelationStatement>>,
    pub cursor: usize,
    pub phase: Phase,
    pub outstanding: Option<Question>,
    pub questions_asked: usize,
}

impl DialogueState {
    pub fn new(query: &str, candidates: Vec<String>) -> Self {
        let n = candidates.len();
        Self {
            query: query.to_string(),
            candidates,
            statements: vec![None; n],
            cursor: 0,
            phase: Phase::Asking,
            outstanding: None,
            questions_asked: 0,
        }
    }

    pub fn is_finished(&self) -> bool {
        self.phase != Phase::Asking
    }

    /// Advances the automaton.
    ///
    /// Without an answer, asks about the candidate under the cursor (or waits
    /// if a question is already out). `Yes` resolves to that candidate; `No`
    /// moves on and asks about the next one, or ends the pass exhausted.
    /// `objects` is the scene used to describe candidates at emission time.
    pub fn step(
        &self,
        answer: Option<Answer>,
        objects: &[SceneEntity],
        cfg: &DialogueConfig,
    ) -> Result<(DialogueState, Option<Question>), DialogueError> {
        if self.is_finished() {
            return Err(DialogueError::Finished(self.query.clone()));
        }
        let mut next = self.clone();
        match (answer, &self.outstanding) {
            (Some(_), None) => return Err(DialogueError::NoOutstandingQuestion),
            (None, Some(_)) => return Ok((next, None)),
            (Some(Answer::Yes), Some(q)) => {
                next.outstanding = None;
                next.phase = Phase::Resolved(q.candidate.clone());
                return Ok((next, None));
            }
            (Some(Answer::No), Some(_)) => {
                next.outstanding = None;
                next.cursor += 1;
                if next.cursor >= next.candidates.len() {
                    next.phase = Phase::Exhausted;
                    return Ok((next, None));
                }
            }
            (None, None) => {}
        }
        let question = next.ask(objects, cfg);
        Ok((next, question))
    }

    fn ask(&mut self, objects: &[SceneEntity], cfg: &DialogueConfig) -> Option<Question> {
        loop {
            let candidate = self.candidates.get(self.cursor)?.clone();
            match select_statement(&self.query, &candidate, &self.candidates, objects, cfg) {
                Ok(statement) => {
                    let q = Question {
                        query: self.query.clone(),
                        candidate,
                        text: form_question(&statement),
                        statement: statement.clone(),
                    };
                    self.statements[self.cursor] = Some(statement);
                    self.outstanding = Some(q.clone());
                    self.questions_asked += 1;
                    return Some(q);
                }
                // A candidate that cannot be described, or that left the
                // scene, is skipped.
                Err(DisambiguationError::UnknownCandidate(_)) | Err(DisambiguationError::NoStatement(_)) => {
                    self.cursor += 1;
                    if self.cursor >= self.candidates.len() {
                        self.phase = Phase::Exhausted;
                        return None;
                    }
                }
                Err(DisambiguationError::NotAmbiguous(_)) => unreachable!("not produced by select_statement"),
            }
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ResolutionError {
    /// The chosen instance left the scene; the query stays queued.
    #[error("`{instance}` is gone; `{query}` stays queued")]
    Vanished { query: String, instance: String },
    #[error(transparent)]
    Registry(#[from] RegistryError),
}

/// Attaches the bare `query` frame name to `chosen` and dequeues the query.
pub fn apply_resolution(
    reg: &FrameRegistry,
    bb: &mut Blackboard,
    query: &str,
    chosen: &str,
) -> Result<FrameRegistry, ResolutionError> {
    if reg.instance_category(chosen).is_none() {
        bb.enqueue_query(query);
        return Err(ResolutionError::Vanished {
            query: query.to_string(),
            instance: chosen.to_string(),
        });
    }
    let mut next = reg.clone();
    next.mark_resolved(query, chosen)?;
    bb.set_resolved_frames(next.resolved());
    bb.remove_query(query);
    Ok(next)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Vec3;
    use crate::perception::{resolve_frame, Detection};
    use crate::config::PerceptionConfig;

    fn s2() -> Vec<SceneEntity> {
        vec![
            SceneEntity::new("banana_1", "banana", Vec3::new(-0.05, 0.35, 0.0)),
            SceneEntity::new("banana_2", "banana", Vec3::new(0.25, 0.45, 0.0)),
            SceneEntity::new("bowl", "bowl", Vec3::new(-0.15, 0.35, 0.0)),
        ]
    }

    fn start() -> DialogueState {
        DialogueState::new("banana", vec!["banana_1".into(), "banana_2".into()])
    }

    fn run(answers: &[Answer]) -> (DialogueState, Vec<Question>) {
        let cfg = DialogueConfig::default();
        let (mut state, q) = start().step(None, &s2(), &cfg).unwrap();
        let mut asked = vec![q.unwrap()];
        for a in answers {
            let (next, q) = state.step(Some(*a), &s2(), &cfg).unwrap();
            state = next;
            asked.extend(q);
        }
        (state, asked)
    }

    #[test]
    fn yes_on_first_question_resolves_nearest() {
        let (state, asked) = run(&[Answer::Yes]);
        assert_eq!(state.phase, Phase::Resolved("banana_1".into()));
        assert_eq!(asked.len(), 1);
        assert_eq!(asked[0].text, "Is the banana close to the bowl?");
    }

    #[test]
    fn no_then_yes_resolves_second() {
        let (state, asked) = run(&[Answer::No, Answer::Yes]);
        assert_eq!(state.phase, Phase::Resolved("banana_2".into()));
        assert_eq!(asked.len(), 2);
        assert_eq!(state.questions_asked, 2);
    }

    #[test]
    fn two_noes_exhaust() {
        let (state, asked) = run(&[Answer::No, Answer::No]);
        assert_eq!(state.phase, Phase::Exhausted);
        assert_eq!(asked.len(), 2);
    }

    #[test]
    fn waiting_does_not_repeat_the_question() {
        let cfg = DialogueConfig::default();
        let (state, _) = start().step(None, &s2(), &cfg).unwrap();
        let (again, q) = state.step(None, &s2(), &cfg).unwrap();
        assert!(q.is_none());
        assert_eq!(again.questions_asked, 1);
    }

    #[test]
    fn answer_without_question_is_a_protocol_error() {
        let cfg = DialogueConfig::default();
        assert_eq!(
            start().step(Some(Answer::Yes), &s2(), &cfg),
            Err(DialogueError::NoOutstandingQuestion)
        );
    }

    fn bowls() -> FrameRegistry {
        let det = |id: &str, cat: &str, x: f64, y: f64| Detection {
            instance: id.into(),
            category: cat.into(),
            position: Vec3::new(x, y, 0.0),
            timestamp: 0.0,
        };
        FrameRegistry::from_detections(
            &[
                det("w1", "bowl", -0.07, 0.35),
                det("w2", "bowl", 0.3, 0.5),
                det("b1", "banana", 0.0, 0.3),
                det("b2", "banana", 0.1, 0.5),
            ],
            &PerceptionConfig::default(),
        )
    }

    #[test]
    fn resolution_renames_frame_and_dequeues() {
        let reg = bowls();
        let mut bb = Blackboard::new();
        assert!(resolve_frame(&reg, "bowl", &mut bb).is_err());
        let reg = apply_resolution(&reg, &mut bb, "bowl", "w1").unwrap();
        assert_eq!(reg.frame_names(), ["banana_1", "banana_2", "bowl", "bowl_2"]);
        assert!(bb.queue().is_empty());
        assert_eq!(bb.resolved("bowl").as_deref(), Some("w1"));
        assert_eq!(resolve_frame(&reg, "bowl", &mut bb).unwrap().instance.as_deref(), Some("w1"));
    }

    #[test]
    fn vanished_choice_is_requeued() {
        let reg = bowls();
        let mut bb = Blackboard::new();
        let err = apply_resolution(&reg, &mut bb, "bowl", "w9").unwrap_err();
        assert!(matches!(err, ResolutionError::Vanished { .. }));
        assert_eq!(bb.queue(), ["bowl"]);
    }
}
