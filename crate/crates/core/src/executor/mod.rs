//! Tick loop that runs a tree against the simulated world.
//!
//! At every tick boundary the executor applies queued scene edits, advances
//! the world by one tick period, refreshes the frame registry unless
//! perception is halted, drops queries that are no longer ambiguous, and
//! finally ticks the tree once. Everything observable is appended to an
//! event log.

mod engine;
mod event;
mod operator;
mod state;

use serde::{Deserialize, Serialize};

pub use engine::{ambiguous_categories, run, ExecError, Executor, RunReport, RunStatus, Scenario, SceneEdit};
pub use event::{parse_json_lines, to_json_lines, EventKind, RunEvent};
pub use operator::{parse_answers, ScriptedAnswer, ScriptedOperator};
pub use state::{BlackboardView, DialogueView, StateDocument, StatusNode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeMode {
    /// Ticks follow each other immediately; virtual time still advances by
    /// one tick period per tick.
    #[default]
    Accelerated,
    /// One tick per tick period of wall-clock time.
    Real,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Seconds of virtual time per tick.
    pub tick_period: f64,
    pub max_ticks: u64,
    pub time_mode: TimeMode,
    pub seed: u64,
    pub include_disambiguation: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            tick_period: 2.5,
            max_ticks: 100,
            time_mode: TimeMode::Accelerated,
            seed: 0,
            include_disambiguation: true,
        }
    }
}
