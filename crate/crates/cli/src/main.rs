use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use vcsim_core::harness::{bench_table1, gen_trace_cmd, run_scenario, HarnessError, ScenarioConfig, TraceCmd};
use vcsim_core::netsim::ClockMode;
use vcsim_server::ServeError;

/// Vehicular cloud simulator.
#[derive(Debug, Parser)]
#[command(name = "vcsim", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Run a scenario and print its metrics report.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum)]
        mode: Option<Mode>,
        #[arg(long)]
        seed: Option<u64>,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Directory for the store snapshots and the event log.
        #[arg(long)]
        snapshot: Option<PathBuf>,
    },
    /// Calibration benchmarks.
    Bench {
        #[command(subcommand)]
        which: BenchCmd,
    },
    /// Trace files.
    Trace {
        #[command(subcommand)]
        what: TraceSub,
    },
    /// Run a scenario in realtime and serve the gateway API.
    Serve {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config's listen address.
        #[arg(long)]
        listen: Option<String>,
    },
}

#[derive(Debug, Subcommand)]
enum BenchCmd {
    /// Link and extraction times for the reference frame.
    Table1 {
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
enum TraceSub {
    /// Generate a synthetic trace.
    Gen {
        #[arg(long)]
        steps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// One plate per line.
        #[arg(long)]
        plates: Option<PathBuf>,
        /// One face code per line.
        #[arg(long)]
        faces: Option<PathBuf>,
        #[arg(long, default_value_t = 0.0)]
        repeat_prob: f64,
        #[arg(long, default_value_t = 0)]
        vehicle_id: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Mode {
    Virtual,
    Realtime,
}

#[derive(Debug)]
enum Failure {
    Config(String),
    Runtime(String),
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        if e.is_config_error() {
            Self::Config(e.to_string())
        } else {
            Self::Runtime(e.to_string())
        }
    }
}

impl From<ServeError> for Failure {
    fn from(e: ServeError) -> Self {
        match e {
            ServeError::Config(h) => h.into(),
            other => Self::Runtime(other.to_string()),
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Failure + '_ {
    move |e| Failure::Runtime(format!("{}: {e}", path.display()))
}

fn emit(json: &str, out: Option<&Path>) -> Result<(), Failure> {
    match out {
        Some(p) => fs::write(p, format!("{json}\n")).map_err(io_err(p)),
        None => {
            let mut so = std::io::stdout().lock();
            writeln!(so, "{json}").map_err(|e| Failure::Runtime(e.to_string()))
        }
    }
}

fn run(cmd: Cmd) -> Result<(), Failure> {
    match cmd {
        Cmd::Run { config, mode, seed, out, snapshot } => {
            let mut cfg = ScenarioConfig::load(&config)?;
            if let Some(m) = mode {
                cfg.mode = match m {
                    Mode::Virtual => ClockMode::Virtual,
                    Mode::Realtime => ClockMode::Realtime,
                };
            }
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let res = run_scenario(&cfg)?;
            if let Some(dir) = snapshot {
                res.stores().save_dir(&dir).map_err(|e| Failure::Runtime(e.to_string()))?;
                let mut log = String::new();
                for e in &res.log {
                    log.push_str(&serde_json::to_string(e).expect("log entry serializes"));
                    log.push('\n');
                }
                let p = dir.join("events.jsonl");
                fs::write(&p, log).map_err(io_err(&p))?;
            }
            emit(&res.report.to_json_pretty(), out.as_deref())
        }
        Cmd::Bench { which: BenchCmd::Table1 { out } } => {
            let table = bench_table1()?;
            emit(&serde_json::to_string_pretty(&table).expect("table serializes"), out.as_deref())
        }
        Cmd::Trace {
            what: TraceSub::Gen { steps, seed, plates, faces, repeat_prob, vehicle_id, out },
        } => Ok(gen_trace_cmd(&TraceCmd {
            steps,
            seed,
            plates,
            faces,
            repeat_prob,
            out,
            vehicle_id,
        })?),
        Cmd::Serve { config, listen } => {
            let mut cfg = ScenarioConfig::load(&config)?;
            if let Some(l) = listen {
                cfg.listen = l;
            }
            let rt = tokio::runtime::Runtime::new().map_err(|e| Failure::Runtime(e.to_string()))?;
            rt.block_on(vcsim_server::serve_scenario(cfg, async {
                let _ = tokio::signal::ctrl_c().await;
            }))?;
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    tracing_subscriber::fmt().with_writer(std::io::stderr).init();
    match run(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}
