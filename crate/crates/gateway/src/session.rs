//! The executor thread and the handle used to talk to it.
//!
//! One thread owns the [`Executor`]. Requests reach it as messages and are
//! applied at the next tick boundary; readers get an immutable snapshot that
//! is republished after every tick.

use std::sync::mpsc::{self, RecvTimeoutError};
use std::sync::Arc;
use std::thread;
use std::time::{Duration, Instant};

use clarify_core::bt::BtNode;
use clarify_core::disambiguation::Answer;
use clarify_core::executor::{
    ExecError, Executor, RunConfig, RunEvent, RunStatus, Scenario, SceneEdit, StateDocument, TimeMode,
};
use clarify_core::Config;
use thiserror::Error;
use tokio::sync::{oneshot, watch};
use tracing::{debug, info};

/// How fast the executor thread ticks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Pacing {
    /// Wall-clock interval between ticks of accelerated runs. Real-time runs
    /// always wait their tick period.
    Interval(Duration),
    /// Ticks happen only on [`SessionHandle::step`].
    Manual,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionOptions {
    pub config: Config,
    pub pacing: Pacing,
}

impl Default for SessionOptions {
    fn default() -> Self {
        Self {
            config: Config::default(),
            pacing: Pacing::Interval(Duration::from_millis(50)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SessionError {
    #[error("no run has been started")]
    NoRun,
    #[error("a run is already in progress")]
    RunInProgress,
    #[error(transparent)]
    Exec(#[from] ExecError),
    #[error("the executor thread has stopped")]
    Stopped,
}

/// What readers see: the state after the last tick and the full event log.
#[derive(Debug, Clone, Default)]
pub struct Snapshot {
    /// Increments with every started run.
    pub run: u64,
    pub state: Option<StateDocument>,
    pub tree: Option<BtNode>,
    pub log: Arc<Vec<RunEvent>>,
}

impl Snapshot {
    pub fn is_finished(&self) -> bool {
        self.state.as_ref().is_some_and(|s| s.status.is_finished())
    }

    pub fn status(&self) -> Option<&RunStatus> {
        self.state.as_ref().map(|s| &s.status)
    }
}

type Reply<T> = oneshot::Sender<Result<T, SessionError>>;

enum Command {
    Start(Box<Scenario>, RunConfig, Reply<()>),
    Answer(Answer, Reply<()>),
    Edit(SceneEdit, Reply<String>),
    Step(Reply<()>),
}

/// Cheap to clone; every clone talks to the same executor thread.
#[derive(Clone)]
pub struct SessionHandle {
    commands: mpsc::Sender<Command>,
    snapshots: watch::Receiver<Arc<Snapshot>>,
}

impl SessionHandle {
    /// Starts the executor thread. It exits once every handle is dropped.
    pub fn spawn(options: SessionOptions) -> Self {
        let (commands, inbox) = mpsc::channel();
        let (publish, snapshots) = watch::channel(Arc::new(Snapshot::default()));
        thread::Builder::new()
            .name("executor".into())
            .spawn(move || Worker::new(options, publish).run(inbox))
            .expect("spawn executor thread");
        Self { commands, snapshots }
    }

    async fn request<T>(&self, make: impl FnOnce(Reply<T>) -> Command) -> Result<T, SessionError> {
        let (tx, rx) = oneshot::channel();
        self.commands.send(make(tx)).map_err(|_| SessionError::Stopped)?;
        rx.await.map_err(|_| SessionError::Stopped)?
    }

    /// Replaces a finished (or absent) run with a new one.
    pub async fn start(&self, scenario: Scenario, run: RunConfig) -> Result<(), SessionError> {
        self.request(|r| Command::Start(Box::new(scenario), run, r)).await
    }

    pub async fn answer(&self, answer: Answer) -> Result<(), SessionError> {
        self.request(|r| Command::Answer(answer, r)).await
    }

    /// Queues a scene edit; returns the id of the object it touches.
    pub async fn edit(&self, edit: SceneEdit) -> Result<String, SessionError> {
        self.request(|r| Command::Edit(edit, r)).await
    }

    /// Advances one tick. Only meaningful with [`Pacing::Manual`].
    pub async fn step(&self) -> Result<(), SessionError> {
        self.request(Command::Step).await
    }

    pub fn snapshot(&self) -> Arc<Snapshot> {
        self.snapshots.borrow().clone()
    }

    pub fn subscribe(&self) -> watch::Receiver<Arc<Snapshot>> {
        self.snapshots.clone()
    }

    /// Waits until the current run finishes.
    pub async fn finished(&self) -> Arc<Snapshot> {
        let mut rx = self.subscribe();
        loop {
            let snap = rx.borrow_and_update().clone();
            if snap.is_finished() {
                return snap;
            }
            if rx.changed().await.is_err() {
                return snap;
            }
        }
    }
}

struct Worker {
    options: SessionOptions,
    publish: watch::Sender<Arc<Snapshot>>,
    executor: Option<Executor>,
    run: u64,
    next_tick: Instant,
}

impl Worker {
    fn new(options: SessionOptions, publish: watch::Sender<Arc<Snapshot>>) -> Self {
        Self {
            options,
            publish,
            executor: None,
            run: 0,
            next_tick: Instant::now(),
        }
    }

    fn active(&self) -> bool {
        self.executor.as_ref().is_some_and(|e| !e.is_finished())
    }

    fn interval(&self) -> Option<Duration> {
        let ex = self.executor.as_ref()?;
        match (self.options.pacing, ex.run_config().time_mode) {
            (Pacing::Manual, _) => None,
            (Pacing::Interval(_), TimeMode::Real) => Some(Duration::from_secs_f64(ex.run_config().tick_period)),
            (Pacing::Interval(d), TimeMode::Accelerated) => Some(d),
        }
    }

    fn run(mut self, inbox: mpsc::Receiver<Command>) {
        loop {
            let timed = self.active().then(|| self.interval()).flatten();
            let received = match timed {
                Some(_) => {
                    let wait = self.next_tick.saturating_duration_since(Instant::now());
                    inbox.recv_timeout(wait)
                }
                None => inbox.recv().map_err(|_| RecvTimeoutError::Disconnected),
            };
            match received {
                Ok(cmd) => self.handle(cmd),
                Err(RecvTimeoutError::Timeout) => self.tick(),
                Err(RecvTimeoutError::Disconnected) => {
                    debug!("all session handles dropped; executor thread exits");
                    return;
                }
            }
        }
    }

    fn handle(&mut self, cmd: Command) {
        match cmd {
            Command::Start(scenario, run, reply) => {
                let _ = reply.send(self.start(*scenario, run));
            }
            Command::Answer(answer, reply) => {
                let r = match self.executor.as_mut() {
                    None => Err(SessionError::NoRun),
                    Some(ex) => ex.submit_answer(answer).map_err(Into::into),
                };
                let _ = reply.send(r);
            }
            Command::Edit(edit, reply) => {
                let r = match self.executor.as_mut() {
                    None => Err(SessionError::NoRun),
                    Some(ex) => ex.edit_scene(edit).map_err(Into::into),
                };
                let _ = reply.send(r);
            }
            Command::Step(reply) => {
                let r = match self.executor.as_mut() {
                    None => Err(SessionError::NoRun),
                    Some(ex) => ex.step().map(|_| ()).map_err(Into::into),
                };
                if r.is_ok() {
                    self.publish();
                }
                let _ = reply.send(r);
            }
        }
    }

    fn start(&mut self, scenario: Scenario, run: RunConfig) -> Result<(), SessionError> {
        if self.active() {
            return Err(SessionError::RunInProgress);
        }
        let ex = Executor::new(scenario, run, self.options.config.clone())?;
        self.run += 1;
        info!(run = self.run, "run started");
        self.executor = Some(ex);
        self.next_tick = Instant::now();
        self.publish();
        Ok(())
    }

    fn tick(&mut self) {
        let interval = self.interval().unwrap_or_default();
        let Some(ex) = self.executor.as_mut() else { return };
        if let Err(e) = ex.step() {
            debug!("step refused: {e}");
        }
        if ex.is_finished() {
            info!(run = self.run, status = ?ex.status(), ticks = ex.ticks(), "run finished");
        }
        self.next_tick += interval;
        let now = Instant::now();
        if self.next_tick < now {
            self.next_tick = now;
        }
        self.publish();
    }

    fn publish(&mut self) {
        let Some(ex) = self.executor.as_ref() else { return };
        let snap = Snapshot {
            run: self.run,
            state: Some(ex.state_document()),
            tree: Some(ex.tree().clone()),
            log: Arc::new(ex.events().to_vec()),
        };
        self.publish.send_replace(Arc::new(snap));
    }
}
