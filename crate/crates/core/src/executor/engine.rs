use std::collections::hash_map::DefaultHasher;
use std::collections::BTreeMap;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use super::event::{EventKind, RunEvent};
use super::operator::{ScriptedAnswer, ScriptedOperator};
use super::state::{BlackboardView, DialogueView, StateDocument, StatusNode};
use super::{RunConfig, TimeMode};
use crate::bt::{Behavior, BehaviorTree, Blackboard, BtNode, Leaves, NodeStatus, TreeError};
use crate::config::Config;
use crate::disambiguation::{
    apply_resolution, candidates, Answer, DialogueState, Phase, Question, SceneEntity,
};
use crate::geometry::Vec3;
use crate::lfd::{attach_disambiguation, has_disambiguation, strip_disambiguation, AttachError};
use crate::perception::{DetectResult, Detector, FrameError, FrameRegistry, RegistryResolver};
use crate::world::{ActionProgress, Gripper, SceneObject, SimError, WorldEvent, WorldState};

const RECENT_EVENTS: usize = 50;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExecError {
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Attach(#[from] AttachError),
    #[error(transparent)]
    World(#[from] SimError),
    #[error("no question is outstanding")]
    NoOutstandingQuestion,
    #[error("an answer to the outstanding question is already queued")]
    AnswerPending,
    #[error("unknown object `{0}`")]
    UnknownObject(String),
    #[error("the run has finished")]
    Finished,
    #[error("{0}")]
    Config(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "snake_case")]
pub enum RunStatus {
    Running,
    Succeeded,
    Failed { reason: String },
}

impl RunStatus {
    pub fn is_finished(&self) -> bool {
        !matches!(self, RunStatus::Running)
    }
}

impl std::fmt::Display for RunStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunStatus::Running => f.write_str("running"),
            RunStatus::Succeeded => f.write_str("succeeded"),
            RunStatus::Failed { reason } => write!(f, "failed ({reason})"),
        }
    }
}

/// A scene change requested from outside the tick loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum SceneEdit {
    Add { object: SceneObject },
    Remove { id: String },
    Move { id: String, position: Vec3 },
}

/// What to run: a tree, a scene and optionally a scripted operator.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub tree: BtNode,
    pub scene: Vec<SceneObject>,
    pub answers: Option<Vec<ScriptedAnswer>>,
}

/// Categories with more than one object in `scene`.
pub fn ambiguous_categories(scene: &[SceneObject]) -> Vec<String> {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for o in scene {
        *counts.entry(&o.category).or_default() += 1;
    }
    counts
        .into_iter()
        .filter(|(_, n)| *n >= 2)
        .map(|(c, _)| c.to_string())
        .collect()
}

/// Mutable run state the leaves operate on.
struct Machine {
    cfg: Config,
    world: WorldState,
    detector: Detector,
    registry: FrameRegistry,
    bb: Blackboard,
    dialogue: Option<DialogueState>,
    exhausted: BTreeMap<String, u32>,
    inbox: Option<Answer>,
    operator: Option<ScriptedOperator>,
    /// Label of the node that started the action in flight.
    active_label: Option<String>,
    abort: Option<String>,
    tick: u64,
    log: Vec<RunEvent>,
}

impl Machine {
    fn emit(&mut self, kind: EventKind, data: Value) {
        let seq = self.log.len() as u64;
        self.log.push(RunEvent {
            seq,
            tick: self.tick,
            kind,
            data,
        });
    }

    fn warn(&mut self, message: String) {
        self.emit(EventKind::Warning, json!({ "message": message }));
    }

    fn note_enqueued(&mut self, before: &[String]) {
        for q in self.bb.queue() {
            if !before.contains(&q) {
                self.emit(EventKind::QueryEnqueued, json!({ "query": q }));
            }
        }
    }

    fn sync_blackboard(&mut self) {
        let held = self.world.held().map(str::to_string);
        self.bb.set_held_object(held.as_deref());
        let halted = self.world.is_busy() || held.is_some();
        self.bb.set_perception_halted(halted);
    }

    /// Scene objects on the table, for describing candidates.
    fn scene_entities(&self) -> Vec<SceneEntity> {
        self.world
            .objects()
            .filter(|o| Some(o.id.as_str()) != self.world.held())
            .map(|o| SceneEntity::new(&o.id, &o.category, o.position))
            .collect()
    }

    fn with_resolver<T>(
        &mut self,
        f: impl FnOnce(&mut WorldState, &mut RegistryResolver<'_>) -> T,
    ) -> T {
        let before = self.bb.queue();
        let out = {
            let mut resolver = RegistryResolver {
                registry: &self.registry,
                blackboard: &mut self.bb,
            };
            f(&mut self.world, &mut resolver)
        };
        self.note_enqueued(&before);
        out
    }

    fn started(&mut self, label: &str, progress: &ActionProgress) {
        self.active_label = Some(label.to_string());
        self.emit(
            EventKind::ActionStarted,
            json!({ "node": label, "action": progress }),
        );
    }

    fn manipulate(&mut self, label: &str, behavior: &Behavior) -> NodeStatus {
        if self.world.is_busy() {
            if self.active_label.as_deref() == Some(label) {
                return NodeStatus::Running;
            }
            let busy = self.active_label.clone().unwrap_or_default();
            self.warn(format!("`{label}` refused: the arm is busy with `{busy}`"));
            return NodeStatus::Failure;
        }
        let result = match behavior {
            Behavior::Pick { category } => {
                self.with_resolver(|world, frames| world.begin_pick(frames, category))
            }
            Behavior::Release {
                category,
                pose,
                frame,
                mode,
            } => self.with_resolver(|world, frames| {
                world.begin_release(frames, category, *pose, frame, *mode)
            }),
            _ => unreachable!("only manipulation behaviors"),
        };
        match result {
            Ok(progress) => {
                self.started(label, &progress);
                self.sync_blackboard();
                NodeStatus::Running
            }
            Err(SimError::Frame(FrameError::Unresolvable(_))) => NodeStatus::Failure,
            Err(e) => {
                self.warn(format!("`{label}` failed: {e}"));
                NodeStatus::Failure
            }
        }
    }

    fn disambiguate(&mut self) -> NodeStatus {
        let Some(head) = self.bb.queue_head() else {
            return NodeStatus::Success;
        };
        if self.dialogue.as_ref().is_none_or(|d| d.query != head) {
            match candidates(&head, &self.registry) {
                Ok(c) => {
                    self.dialogue = Some(DialogueState::new(&head, c));
                    self.inbox = None;
                }
                Err(e) => {
                    self.bb.remove_query(&head);
                    self.warn(format!("query `{head}` dropped: {e}"));
                    return NodeStatus::Success;
                }
            }
        }
        let dialogue = self.dialogue.take().expect("dialogue started above");
        let answer = if dialogue.outstanding.is_some() {
            self.inbox.take()
        } else {
            None
        };
        if let (Some(a), Some(q)) = (answer, &dialogue.outstanding) {
            self.emit(
                EventKind::AnswerReceived,
                json!({ "query": q.query, "candidate": q.candidate, "answer": a }),
            );
        }
        let entities = self.scene_entities();
        let (next, question) = match dialogue.step(answer, &entities, &self.cfg.dialogue) {
            Ok(out) => out,
            Err(e) => {
                self.warn(format!("dialogue for `{head}`: {e}"));
                self.dialogue = Some(dialogue);
                return NodeStatus::Running;
            }
        };
        if let Some(q) = &question {
            self.ask(q);
        }
        match next.phase.clone() {
            Phase::Asking => {
                self.dialogue = Some(next);
                NodeStatus::Running
            }
            Phase::Resolved(instance) => {
                match apply_resolution(&self.registry, &mut self.bb, &head, &instance) {
                    Ok(registry) => {
                        self.registry = registry;
                        self.exhausted.remove(&head);
                        self.emit(
                            EventKind::QueryResolved,
                            json!({ "query": head, "instance": instance }),
                        );
                        NodeStatus::Success
                    }
                    Err(e) => {
                        self.warn(format!("resolution of `{head}` dropped: {e}"));
                        NodeStatus::Running
                    }
                }
            }
            Phase::Exhausted => {
                let passes = self.exhausted.entry(head.clone()).or_insert(0);
                *passes += 1;
                let passes = *passes;
                if passes >= self.cfg.dialogue.max_passes {
                    let reason =
                        format!("no candidate for `{head}` was confirmed in {passes} passes");
                    self.warn(reason.clone());
                    self.abort = Some(reason);
                    NodeStatus::Failure
                } else {
                    self.warn(format!(
                        "every candidate for `{head}` was declined; asking again"
                    ));
                    self.bb.requeue(&head);
                    NodeStatus::Running
                }
            }
        }
    }

    fn ask(&mut self, q: &Question) {
        self.emit(
            EventKind::QuestionAsked,
            json!({
                "query": q.query,
                "candidate": q.candidate,
                "text": q.text,
                "relation": q.statement.relation,
                "landmark": q.statement.landmark,
            }),
        );
        if let Some(op) = &self.operator {
            match op.answer(q) {
                Some(a) => self.inbox = Some(a),
                None => {
                    let query = q.query.clone();
                    self.warn(format!("the answers script does not cover `{query}`"));
                }
            }
        }
    }
}

impl Leaves for Machine {
    fn condition(&mut self, label: &str, payload: Option<&Behavior>) -> bool {
        match payload {
            Some(Behavior::SceneClear) => self.bb.queue().is_empty(),
            Some(Behavior::GripperOpen) => self.world.gripper() == Gripper::Open,
            Some(Behavior::InGripper { category }) => self
                .world
                .held_object()
                .is_some_and(|o| &o.category == category),
            Some(Behavior::ObjectAt {
                category,
                pose,
                frame,
                mode,
            }) => {
                let r = self.with_resolver(|world, frames| {
                    world.check_at_pose(frames, category, *pose, frame, *mode)
                });
                match r {
                    Ok(b) => b,
                    Err(FrameError::Unresolvable(_)) => false,
                    Err(e) => {
                        self.warn(format!("`{label}`: {e}"));
                        false
                    }
                }
            }
            _ => {
                self.warn(format!("condition `{label}` has no behavior"));
                false
            }
        }
    }

    fn action(&mut self, label: &str, payload: Option<&Behavior>) -> NodeStatus {
        match payload {
            Some(b @ (Behavior::Pick { .. } | Behavior::Release { .. })) => self.manipulate(label, b),
            Some(Behavior::Disambiguate) => self.disambiguate(),
            _ => {
                self.warn(format!("action `{label}` has no behavior"));
                NodeStatus::Failure
            }
        }
    }
}

/// One run: tree, world, perception, blackboard and dialogue, advanced one
/// tick at a time. Answers and scene edits are queued and take effect at
/// the next tick boundary.
pub struct Executor {
    run: RunConfig,
    tree: BehaviorTree,
    m: Machine,
    pending_edits: Vec<SceneEdit>,
    last_status: BTreeMap<String, NodeStatus>,
    status: RunStatus,
}

impl Executor {
    pub fn new(scenario: Scenario, run: RunConfig, cfg: Config) -> Result<Self, ExecError> {
        if run.tick_period.is_nan() || run.tick_period <= 0.0 {
            return Err(ExecError::Config("tick period must be positive".into()));
        }
        let root = match (run.include_disambiguation, has_disambiguation(&scenario.tree)) {
            (true, false) => attach_disambiguation(&scenario.tree)?,
            (false, true) => strip_disambiguation(&scenario.tree),
            _ => scenario.tree,
        };
        let tree = BehaviorTree::new(root)?;
        let world = WorldState::new(scenario.scene, cfg.world.clone(), run.seed)?;
        let detector = Detector::new(cfg.perception.clone(), run.seed ^ 0x9e37_79b9_7f4a_7c15);
        let m = Machine {
            cfg,
            world,
            detector,
            registry: FrameRegistry::new(),
            bb: Blackboard::new(),
            dialogue: None,
            exhausted: BTreeMap::new(),
            inbox: None,
            operator: scenario.answers.map(ScriptedOperator::new),
            active_label: None,
            abort: None,
            tick: 0,
            log: Vec::new(),
        };
        Ok(Self {
            run,
            tree,
            m,
            pending_edits: Vec::new(),
            last_status: BTreeMap::new(),
            status: RunStatus::Running,
        })
    }

    pub fn run_config(&self) -> &RunConfig {
        &self.run
    }

    pub fn tree(&self) -> &BtNode {
        self.tree.root()
    }

    pub fn world(&self) -> &WorldState {
        &self.m.world
    }

    pub fn registry(&self) -> &FrameRegistry {
        &self.m.registry
    }

    pub fn blackboard(&self) -> &Blackboard {
        &self.m.bb
    }

    pub fn status(&self) -> &RunStatus {
        &self.status
    }

    pub fn is_finished(&self) -> bool {
        self.status.is_finished()
    }

    /// Completed ticks.
    pub fn ticks(&self) -> u64 {
        self.m.tick
    }

    pub fn events(&self) -> &[RunEvent] {
        &self.m.log
    }

    pub fn outstanding_question(&self) -> Option<&Question> {
        self.m.dialogue.as_ref()?.outstanding.as_ref()
    }

    /// Queues an answer to the outstanding question.
    pub fn submit_answer(&mut self, answer: Answer) -> Result<(), ExecError> {
        if self.is_finished() {
            return Err(ExecError::Finished);
        }
        if self.outstanding_question().is_none() {
            return Err(ExecError::NoOutstandingQuestion);
        }
        if self.m.inbox.is_some() {
            return Err(ExecError::AnswerPending);
        }
        self.m.inbox = Some(answer);
        Ok(())
    }

    fn id_taken(&self, id: &str) -> bool {
        self.m.world.object(id).is_some()
            || self
                .pending_edits
                .iter()
                .any(|e| matches!(e, SceneEdit::Add { object } if object.id == id))
    }

    fn id_pending_removal(&self, id: &str) -> bool {
        self.pending_edits
            .iter()
            .any(|e| matches!(e, SceneEdit::Remove { id: r } if r == id))
    }

    /// Queues a scene edit and returns the id of the object it touches. An
    /// added object with an empty id gets a fresh `{category}_{n}` id.
    pub fn edit_scene(&mut self, edit: SceneEdit) -> Result<String, ExecError> {
        if self.is_finished() {
            return Err(ExecError::Finished);
        }
        let edit = match edit {
            SceneEdit::Add { mut object } => {
                if object.id.is_empty() {
                    let mut n = 1;
                    while self.id_taken(&format!("{}_{n}", object.category)) {
                        n += 1;
                    }
                    object.id = format!("{}_{n}", object.category);
                } else if self.id_taken(&object.id) {
                    return Err(SimError::Scene(crate::world::SceneError::DuplicateId(object.id)).into());
                }
                crate::world::validate_scene(std::slice::from_ref(&object)).map_err(SimError::from)?;
                SceneEdit::Add { object }
            }
            SceneEdit::Remove { id } | SceneEdit::Move { id, .. }
                if !self.id_taken(&id) || self.id_pending_removal(&id) =>
            {
                return Err(ExecError::UnknownObject(id))
            }
            other => other,
        };
        let id = match &edit {
            SceneEdit::Add { object } => object.id.clone(),
            SceneEdit::Remove { id } | SceneEdit::Move { id, .. } => id.clone(),
        };
        self.pending_edits.push(edit);
        Ok(id)
    }

    fn apply_edit(&mut self, edit: SceneEdit) {
        let m = &mut self.m;
        let data = serde_json::to_value(&edit).expect("edits serialize");
        let result = match edit {
            SceneEdit::Add { object } => {
                let overlap = m
                    .world
                    .objects()
                    .find(|o| o.position.horizontal_distance(object.position) < o.footprint_radius)
                    .map(|o| o.id.clone());
                let id = object.id.clone();
                let r = m.world.add_object(object);
                if let (Ok(()), Some(other)) = (&r, overlap) {
                    m.warn(format!("`{id}` was added inside the footprint of `{other}`"));
                }
                r
            }
            SceneEdit::Remove { id } => m.world.remove_object(&id).map(|_| ()),
            SceneEdit::Move { id, position } => m.world.move_object(&id, position),
        };
        match result {
            Ok(()) => m.emit(EventKind::SceneEdited, data),
            Err(e) => m.warn(format!("scene edit rejected: {e}")),
        }
    }

    fn perceive(&mut self) {
        let m = &mut self.m;
        m.sync_blackboard();
        let halted = m.bb.perception_halted();
        let DetectResult::Detections(dets) = m.detector.detect(&m.world, halted) else {
            return;
        };
        let update = m.registry.update(&dets, &m.cfg.perception);
        for w in update.warnings {
            m.warn(w);
        }
        if update.registry != m.registry {
            m.registry = update.registry;
            let frames = m.registry.frames();
            m.emit(EventKind::RegistryUpdated, json!({ "frames": frames }));
        }
        let resolved = m.registry.resolved().clone();
        m.bb.set_resolved_frames(&resolved);
    }

    fn prune_queries(&mut self) {
        let m = &mut self.m;
        for q in m.bb.queue() {
            if m.registry.is_ambiguous(&q) {
                continue;
            }
            m.bb.remove_query(&q);
            if m.dialogue.as_ref().is_some_and(|d| d.query == q) {
                m.dialogue = None;
                m.inbox = None;
            }
            m.warn(format!("query `{q}` dropped: no longer ambiguous"));
        }
    }

    /// Runs one tick boundary and one tick.
    pub fn step(&mut self) -> Result<NodeStatus, ExecError> {
        if self.is_finished() {
            return Err(ExecError::Finished);
        }
        for edit in std::mem::take(&mut self.pending_edits) {
            self.apply_edit(edit);
        }
        if self.m.tick > 0 {
            for event in self.m.world.step(self.run.tick_period) {
                match event {
                    WorldEvent::Completed(progress) => {
                        let node = self.m.active_label.take();
                        self.m.emit(
                            EventKind::ActionCompleted,
                            json!({ "node": node, "action": progress }),
                        );
                    }
                    WorldEvent::Note(note) => self.m.warn(note),
                }
            }
        }
        self.perceive();
        self.prune_queries();

        let outcome = self.tree.tick(&mut self.m);
        self.last_status.clear();
        for v in &outcome.visits {
            self.last_status.insert(v.label.clone(), v.status);
            self.m.emit(
                EventKind::NodeVisit,
                json!({ "label": v.label, "status": v.status }),
            );
        }
        self.m.sync_blackboard();
        let queue = self.m.bb.queue();
        let halted = self.m.bb.perception_halted();
        self.m.emit(
            EventKind::TickResult,
            json!({ "status": outcome.status, "perception_halted": halted, "queue": queue }),
        );

        self.m.tick += 1;
        self.status = if let Some(reason) = self.m.abort.take() {
            RunStatus::Failed { reason }
        } else if outcome.status == NodeStatus::Success {
            RunStatus::Succeeded
        } else if self.m.tick >= self.run.max_ticks {
            RunStatus::Failed {
                reason: format!("no success within {} ticks", self.run.max_ticks),
            }
        } else {
            RunStatus::Running
        };
        Ok(outcome.status)
    }

    /// Steps until the run finishes, sleeping between ticks in real-time
    /// mode.
    pub fn run_to_end(&mut self) -> &RunStatus {
        while !self.is_finished() {
            self.step().expect("running executor steps");
            if self.run.time_mode == TimeMode::Real && !self.is_finished() {
                std::thread::sleep(std::time::Duration::from_secs_f64(self.run.tick_period));
            }
        }
        &self.status
    }

    pub fn state_document(&self) -> StateDocument {
        let m = &self.m;
        let dialogue = m.dialogue.as_ref().map(|d| DialogueView {
            query: d.query.clone(),
            candidates: d.candidates.clone(),
            cursor: d.cursor,
            phase: d.phase.clone(),
            question: d.outstanding.as_ref().map(|q| q.text.clone()),
            candidate: d.outstanding.as_ref().map(|q| q.candidate.clone()),
            answer_queued: m.inbox.is_some(),
        });
        let start = m.log.len().saturating_sub(RECENT_EVENTS);
        StateDocument {
            tick: m.tick,
            status: self.status.clone(),
            scene: m.world.snapshot(),
            frames: m.registry.frames(),
            blackboard: BlackboardView {
                disambiguation_queue: m.bb.queue(),
                perception_halted: m.bb.perception_halted(),
                held_object: m.bb.held_object(),
                resolved_frames: m.bb.resolved_frames(),
            },
            tree: StatusNode::build(self.tree.root(), &self.last_status),
            dialogue,
            events: m.log[start..].to_vec(),
        }
    }

    /// Hash of the state the tick loop owns. Queued answers and edits are
    /// not part of it, so it only changes at tick boundaries.
    pub fn state_hash(&self) -> u64 {
        let m = &self.m;
        let core = json!({
            "tick": m.tick,
            "status": self.status,
            "world": m.world.snapshot(),
            "registry": m.registry,
            "blackboard": m.bb.entries().map(|(k, v)| (k.to_string(), serde_json::to_value(v).expect("values serialize"))).collect::<BTreeMap<_, _>>(),
            "dialogue": m.dialogue,
            "events": m.log.len(),
        });
        let mut h = DefaultHasher::new();
        core.to_string().hash(&mut h);
        h.finish()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub status: RunStatus,
    pub ticks: u64,
    pub events: Vec<RunEvent>,
    pub final_state: StateDocument,
}

impl RunReport {
    pub fn events_of(&self, kind: EventKind) -> impl Iterator<Item = &RunEvent> {
        self.events.iter().filter(move |e| e.kind == kind)
    }

    /// Queries in the order they were enqueued.
    pub fn queries(&self) -> Vec<String> {
        self.events_of(EventKind::QueryEnqueued)
            .filter_map(|e| e.str_field("query").map(str::to_string))
            .collect()
    }
}

/// Runs a scenario headless until success, failure or the tick limit.
pub fn run(scenario: Scenario, run: &RunConfig, cfg: &Config) -> Result<RunReport, ExecError> {
    let mut ex = Executor::new(scenario, run.clone(), cfg.clone())?;
    ex.run_to_end();
    Ok(ex.into_report())
}

impl Executor {
    pub fn into_report(self) -> RunReport {
        let final_state = self.state_document();
        RunReport {
            status: self.status,
            ticks: self.m.tick,
            events: self.m.log,
            final_state,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn executor() -> Executor {
        let scene = vec![
            SceneObject::new("banana", "banana", Vec3::new(0.1, 0.4, 0.0), 0.04),
            SceneObject::new("bowl", "bowl", Vec3::new(-0.15, 0.35, 0.0), 0.08),
        ];
        let tree = BtNode::fallback(
            "achieve",
            vec![
                BtNode::leaf(Behavior::InGripper {
                    category: "banana".into(),
                }),
                BtNode::leaf(Behavior::Pick {
                    category: "banana".into(),
                }),
            ],
        );
        let run = RunConfig {
            include_disambiguation: false,
            ..RunConfig::default()
        };
        Executor::new(
            Scenario {
                tree,
                scene,
                answers: None,
            },
            run,
            Config::default(),
        )
        .unwrap()
    }

    #[test]
    fn a_busy_arm_refuses_other_actions() {
        let mut ex = executor();
        ex.step().unwrap();
        assert!(ex.world().is_busy());
        let pick_bowl = Behavior::Pick {
            category: "bowl".into(),
        };
        let status = ex.m.action("pick bowl", Some(&pick_bowl));
        assert_eq!(status, NodeStatus::Failure);
        let last = ex.m.log.last().unwrap();
        assert_eq!(last.kind, EventKind::Warning);
        assert!(last.str_field("message").unwrap().contains("busy"));
        let pick_banana = Behavior::Pick {
            category: "banana".into(),
        };
        assert_eq!(ex.m.action("pick banana", Some(&pick_banana)), NodeStatus::Running);
    }

    #[test]
    fn non_positive_tick_period_is_rejected() {
        let ex = executor();
        let mut run = ex.run_config().clone();
        run.tick_period = 0.0;
        let s = Scenario {
            tree: ex.tree().clone(),
            scene: Vec::new(),
            answers: None,
        };
        assert!(matches!(Executor::new(s, run, Config::default()), Err(ExecError::Config(_))));
    }

    #[test]
    fn finished_runs_refuse_to_step() {
        let mut ex = executor();
        ex.run_to_end();
        assert_eq!(ex.status(), &RunStatus::Succeeded);
        assert_eq!(ex.step(), Err(ExecError::Finished));
    }
}
