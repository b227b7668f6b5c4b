use std::net::{IpAddr, SocketAddr};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, Subcommand};
use clarify_gateway::commands::{
    export_dot_command, gen_demos_command, learn_command, load_config, run_command, serve_command, RunArgs,
};
use tracing_subscriber::EnvFilter;

/// Learn behavior trees from demonstrations and run them with interactive
/// object disambiguation.
#[derive(Parser)]
#[command(name = "clarify-bt", version)]
struct Cli {
    /// JSON file overriding thresholds, tolerances and durations.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Learn a tree from a demonstration file.
    Learn {
        demos: PathBuf,
        #[arg(short, long, default_value = "tree.json")]
        out: PathBuf,
        /// Leave out the disambiguation subtree.
        #[arg(long)]
        no_disambiguation: bool,
    },
    /// Execute a tree in a scene.
    Run {
        tree: PathBuf,
        scene: PathBuf,
        /// Scripted operator answers.
        #[arg(long)]
        answers: Option<PathBuf>,
        #[arg(long, default_value_t = 100)]
        max_ticks: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Advance virtual time without waiting (the default).
        #[arg(long, conflicts_with = "real_time")]
        accelerated: bool,
        /// Wait one tick period of wall-clock time per tick.
        #[arg(long)]
        real_time: bool,
        /// Leave out the disambiguation subtree.
        #[arg(long)]
        no_disambiguation: bool,
        /// Event log (JSON lines).
        #[arg(long, default_value = "run_events.jsonl")]
        log: PathBuf,
        /// Serve the run over HTTP so an operator can answer live.
        #[arg(long)]
        serve: bool,
        #[arg(long, env = "CLARIFY_BT_PORT", default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: IpAddr,
        /// Milliseconds between accelerated ticks while serving.
        #[arg(long, default_value_t = 500)]
        pace_ms: u64,
        /// Seconds to keep serving after the run ends.
        #[arg(long, default_value_t = 0)]
        linger: u64,
    },
    /// Serve the HTTP API; runs are started with POST /run.
    Serve {
        #[arg(long, env = "CLARIFY_BT_PORT", default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: IpAddr,
        /// Milliseconds between accelerated ticks.
        #[arg(long, default_value_t = 500)]
        pace_ms: u64,
    },
    /// Print a tree file as Graphviz.
    ExportDot {
        tree: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Write synthetic banana-into-bowl demonstrations.
    GenDemos {
        #[arg(short, long, default_value = "demos.json")]
        out: PathBuf,
        #[arg(long, default_value_t = 3)]
        count: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Standard deviation of the recorded target noise (m).
        #[arg(long, default_value_t = 0.004)]
        noise: f64,
    },
}

fn execute(cli: Cli) -> anyhow::Result<bool> {
    let cfg = load_config(cli.config.as_deref())?;
    match cli.command {
        Command::Learn {
            demos,
            out,
            no_disambiguation,
        } => {
            print!("{}", learn_command(&demos, &out, !no_disambiguation, &cfg)?);
            Ok(true)
        }
        Command::Run {
            tree,
            scene,
            answers,
            max_ticks,
            seed,
            accelerated: _,
            real_time,
            no_disambiguation,
            log,
            serve,
            port,
            host,
            pace_ms,
            linger,
        } => {
            let args = RunArgs {
                tree,
                scene,
                answers,
                max_ticks,
                seed,
                real_time,
                disambiguation: !no_disambiguation,
                log,
                serve: serve.then_some(SocketAddr::new(host, port)),
                pace: Duration::from_millis(pace_ms),
                linger: Duration::from_secs(linger),
            };
            let s = run_command(&args, &cfg)?;
            println!("status: {}", s.status);
            println!("ticks: {}", s.ticks);
            println!("queries: {:?}", s.queries);
            println!("event log: {}", s.log.display());
            Ok(s.succeeded())
        }
        Command::Serve { port, host, pace_ms } => {
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(serve_command(SocketAddr::new(host, port), cfg, Duration::from_millis(pace_ms)))?;
            Ok(true)
        }
        Command::ExportDot { tree, out } => {
            let dot = export_dot_command(&tree)?;
            match out {
                Some(p) => std::fs::write(&p, dot)?,
                None => print!("{dot}"),
            }
            Ok(true)
        }
        Command::GenDemos {
            out,
            count,
            seed,
            noise,
        } => {
            gen_demos_command(&out, count, seed, noise)?;
            println!("wrote {count} demonstrations to {}", out.display());
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("warn")))
        .with_writer(std::io::stderr)
        .init();
    match execute(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
