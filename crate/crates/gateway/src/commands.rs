//! The work behind each command-line subcommand.

use std::fs;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clarify_core::bt::{parse_tree, render_dot, render_json, BtNode};
use clarify_core::executor::{
    ambiguous_categories, parse_answers, run, to_json_lines, RunConfig, RunStatus, Scenario, ScriptedAnswer, TimeMode,
};
use clarify_core::lfd::{attach_disambiguation, learn, DemoFile, DemoGenerator, TaskStep};
use clarify_core::world::{load_scene, ReleaseMode, SceneObject};
use clarify_core::{Config, Vec3};

use crate::http::router;
use crate::session::{Pacing, SessionHandle, SessionOptions};

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn load_config(path: Option<&Path>) -> Result<Config> {
    match path {
        None => Ok(Config::default()),
        Some(p) => Config::from_json(&read(p)?).with_context(|| format!("parsing config {}", p.display())),
    }
}

pub fn load_tree(path: &Path) -> Result<BtNode> {
    parse_tree(&read(path)?).with_context(|| format!("parsing tree {}", path.display()))
}

/// Learns a tree from a demonstration file and writes it to `out`. Returns
/// the report printed to the user.
pub fn learn_command(demos: &Path, out: &Path, disambiguation: bool, cfg: &Config) -> Result<String> {
    let file = DemoFile::from_json(&read(demos)?).with_context(|| format!("parsing demonstrations {}", demos.display()))?;
    let learned = learn(&file.demos, &cfg.learning)?;
    let mut report = String::new();
    for a in &learned.actions {
        report.push_str(&format!(
            "{} {}: frame {} (dispersion {:.4} m), target {}\n",
            a.kind,
            a.category,
            a.frame,
            a.dispersion,
            a.target
        ));
    }
    for w in &learned.warnings {
        report.push_str(&format!("warning: {w}\n"));
    }
    let Some(tree) = learned.tree else {
        bail!("the demonstrations contain no goal conditions, so there is nothing to plan");
    };
    let tree = if disambiguation { attach_disambiguation(&tree)? } else { tree };
    write(out, &render_json(&tree))?;
    report.push_str(&format!("wrote {} ({} nodes)\n", out.display(), tree.node_count()));
    Ok(report)
}

pub fn export_dot_command(tree: &Path) -> Result<String> {
    Ok(render_dot(&load_tree(tree)?))
}

/// Banana-into-bowl demonstrations from shuffled layouts.
pub fn gen_demos_command(out: &Path, count: usize, seed: u64, noise: f64) -> Result<()> {
    let template = [
        SceneObject::new("banana", "banana", Vec3::new(0.1, 0.4, 0.0), 0.04),
        SceneObject::new("bowl", "bowl", Vec3::new(-0.15, 0.35, 0.0), 0.08),
    ];
    let steps = [TaskStep {
        pick: "banana".into(),
        frame: "bowl".into(),
        offset: Vec3::new(-0.08, 0.0, 0.05),
        mode: ReleaseMode::Drop,
    }];
    let demos = DemoGenerator::new(seed, noise).generate(&template, &steps, count);
    write(out, &DemoFile { demos }.to_json())
}

#[derive(Debug, Clone)]
pub struct RunArgs {
    pub tree: PathBuf,
    pub scene: PathBuf,
    pub answers: Option<PathBuf>,
    pub max_ticks: u64,
    pub seed: u64,
    pub real_time: bool,
    pub disambiguation: bool,
    pub log: PathBuf,
    /// Serve the run over HTTP on this address instead of running headless.
    pub serve: Option<SocketAddr>,
    /// Wall-clock interval between accelerated ticks while serving.
    pub pace: Duration,
    /// How long to keep serving after the run ends.
    pub linger: Duration,
}

pub struct RunSummary {
    pub status: RunStatus,
    pub ticks: u64,
    pub queries: Vec<String>,
    pub log: PathBuf,
}

impl RunSummary {
    pub fn succeeded(&self) -> bool {
        self.status == RunStatus::Succeeded
    }
}

fn scenario(args: &RunArgs) -> Result<Scenario> {
    let tree = load_tree(&args.tree)?;
    let scene = load_scene(&read(&args.scene)?).with_context(|| format!("parsing scene {}", args.scene.display()))?;
    let answers: Option<Vec<ScriptedAnswer>> = match &args.answers {
        None => None,
        Some(p) => Some(parse_answers(&read(p)?).with_context(|| format!("parsing answers {}", p.display()))?),
    };
    let ambiguous = ambiguous_categories(&scene);
    if args.disambiguation && answers.is_none() && args.serve.is_none() && !ambiguous.is_empty() {
        bail!(
            "the scene has several instances of {}; a headless run needs an answers script (--answers) or a live operator (--serve)",
            ambiguous.join(", ")
        );
    }
    Ok(Scenario { tree, scene, answers })
}

pub fn run_config(args: &RunArgs) -> RunConfig {
    RunConfig {
        max_ticks: args.max_ticks,
        seed: args.seed,
        time_mode: if args.real_time { TimeMode::Real } else { TimeMode::Accelerated },
        include_disambiguation: args.disambiguation,
        ..RunConfig::default()
    }
}

/// Runs a scenario headless, or serves it live when `args.serve` is set,
/// and writes the event log.
pub fn run_command(args: &RunArgs, cfg: &Config) -> Result<RunSummary> {
    let scenario = scenario(args)?;
    let run_cfg = run_config(args);
    let (status, ticks, queries, events) = match args.serve {
        None => {
            let report = run(scenario, &run_cfg, cfg)?;
            let queries = report.queries();
            (report.status, report.ticks, queries, report.events)
        }
        Some(addr) => {
            let rt = tokio::runtime::Runtime::new()?;
            let snap = rt.block_on(serve_run(addr, scenario, run_cfg, cfg.clone(), args.pace, args.linger))?;
            let doc = snap.state.clone().context("run produced no state")?;
            let queries = snap
                .log
                .iter()
                .filter(|e| e.kind == clarify_core::executor::EventKind::QueryEnqueued)
                .filter_map(|e| e.str_field("query").map(str::to_string))
                .collect();
            (doc.status, doc.tick, queries, snap.log.to_vec())
        }
    };
    write(&args.log, &to_json_lines(&events))?;
    Ok(RunSummary {
        status,
        ticks,
        queries,
        log: args.log.clone(),
    })
}

async fn serve_run(
    addr: SocketAddr,
    scenario: Scenario,
    run_cfg: RunConfig,
    cfg: Config,
    pace: Duration,
    linger: Duration,
) -> Result<std::sync::Arc<crate::session::Snapshot>> {
    let session = SessionHandle::spawn(SessionOptions {
        config: cfg,
        pacing: Pacing::Interval(pace),
    });
    let listener = tokio::net::TcpListener::bind(addr)
        .await
        .with_context(|| format!("binding {addr}"))?;
    eprintln!("serving on http://{}", listener.local_addr()?);
    session.start(scenario, run_cfg).await?;
    let waiter = session.clone();
    let done = async move {
        waiter.finished().await;
        tokio::time::sleep(linger).await;
    };
    axum::serve(listener, router(session.clone()))
        .with_graceful_shutdown(done)
        .await?;
    Ok(session.snapshot())
}

/// Serves until interrupted; runs are started with `POST /run`.
pub async fn serve_command(addr: SocketAddr, cfg: Config, pace: Duration) -> Result<()> {
    let session = SessionHandle::spawn(SessionOptions {
        config: cfg,
        pacing: Pacing::Interval(pace),
    });
    let listener = tokio::net::TcpListener::bind(addr)
        .await
        .with_context(|| format!("binding {addr}"))?;
    eprintln!("serving on http://{}", listener.local_addr()?);
    axum::serve(listener, router(session))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
