//! `wssl`: generate datasets, discretize workspaces, train and evaluate
//! subspace networks, and benchmark them against the classical method.

pub mod commands;
pub mod config;
pub mod error;
pub mod repro;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::commands::{cmd_bench, cmd_eval, cmd_generate, cmd_train, cmd_workspace};
use crate::config::{
    BenchConfig, EvalConfig, GenerateConfig, ReproConfig, TrainCmdConfig, WorkspaceConfig,
};
use crate::error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(
    name = "wssl",
    version,
    about = "Workspace discretization and subspace learning"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// TOML configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the seed in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; defaults to all logical CPUs.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample manipulators and label their discretized workspaces.
    Generate(Common),
    /// Discretize the workspace of one manipulator.
    Workspace(Common),
    /// Train one bank entry on a dataset.
    Train(Common),
    /// Score a bank entry against a dataset.
    Eval(Common),
    /// Time the classical method against bank prediction.
    Bench(Common),
    /// Run the reproduction experiments.
    Repro(Common),
}

fn no_seed(seed: Option<u64>, command: &str) -> CliResult<()> {
    match seed {
        Some(_) => Err(CliError::validation(format!(
            "--seed has no effect on `{command}`"
        ))),
        None => Ok(()),
    }
}

fn base_dir(config: &Path) -> PathBuf {
    config.parent().map(Path::to_path_buf).unwrap_or_default()
}

fn dispatch(command: Command, out: &mut dyn Write) -> CliResult<()> {
    let (common, name) = match &command {
        Command::Generate(c) => (c, "generate"),
        Command::Workspace(c) => (c, "workspace"),
        Command::Train(c) => (c, "train"),
        Command::Eval(c) => (c, "eval"),
        Command::Bench(c) => (c, "bench"),
        Command::Repro(c) => (c, "repro"),
    };
    let threads = match common.threads {
        Some(0) => return Err(CliError::validation("--threads must be >= 1")),
        Some(n) => n,
        None => 0,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::runtime(format!("cannot start thread pool: {e}")))?;
    let base = base_dir(&common.config);
    let path = common.config.as_path();
    let seed = common.seed;

    let (text, failure) = pool.install(|| -> CliResult<(String, Option<CliError>)> {
        Ok(match name {
            "generate" => {
                let mut cfg: GenerateConfig = config::load(path)?;
                cfg.seed = seed.unwrap_or(cfg.seed);
                (cmd_generate(&cfg, &base)?.to_string(), None)
            }
            "workspace" => {
                no_seed(seed, name)?;
                let cfg: WorkspaceConfig = config::load(path)?;
                (cmd_workspace(&cfg, &base)?.to_string(), None)
            }
            "train" => {
                let mut cfg: TrainCmdConfig = config::load(path)?;
                cfg.train.seed = seed.unwrap_or(cfg.train.seed);
                (cmd_train(&cfg, &base)?.to_string(), None)
            }
            "eval" => {
                no_seed(seed, name)?;
                let cfg: EvalConfig = config::load(path)?;
                (cmd_eval(&cfg, &base)?.to_string(), None)
            }
            "bench" => {
                let mut cfg: BenchConfig = config::load(path)?;
                cfg.seed = seed.unwrap_or(cfg.seed);
                (cmd_bench(&cfg, &base)?.to_string(), None)
            }
            _ => {
                let mut cfg: ReproConfig = config::load(path)?;
                cfg.seed = seed.unwrap_or(cfg.seed);
                let workdir = config::resolve(&base, &cfg.workdir);
                let outcomes = repro::run_preset(cfg.preset, &workdir, cfg.seed)?;
                let lines: Vec<String> = outcomes.iter().map(ToString::to_string).collect();
                let failed = outcomes.iter().filter(|o| !o.passed).count();
                let failure = (failed > 0).then(|| {
                    CliError::runtime(format!("{failed} of {} criteria failed", outcomes.len()))
                });
                (lines.join("\n"), failure)
            }
        })
    })?;
    writeln!(out, "{text}").map_err(|e| CliError::runtime(format!("cannot write output: {e}")))?;
    failure.map_or(Ok(()), Err)
}

/// Parses `args` (including the program name), runs the command and
/// returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = write!(out, "{e}");
            return 0;
        }
        Err(e) => {
            let text = e.to_string();
            let msg: Vec<&str> = text
                .trim_start_matches("error: ")
                .lines()
                .take_while(|l| !l.starts_with("Usage:") && !l.starts_with("For more information"))
                .map(str::trim)
                .filter(|l| !l.is_empty())
                .collect();
            let msg = msg.join(" ");
            let _ = writeln!(err, "error: {msg}");
            return 2;
        }
    };
    match dispatch(cli.command, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
