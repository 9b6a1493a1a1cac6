//! The `rmpc-push` command line: `gen`, `run`, `eval` and `replay`.
//!
//! Settings are layered as built-in defaults, then the config file
//! (`--config`, or the file named by `RMPC_PUSH_CONFIG`), then `--set`
//! overrides, then the dedicated flags.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::{Settings, CONFIG_ENV};
use crate::error::{ConfigError, EvalError, SceneFileError};
use crate::eval::{
    compare_planners_with_progress, default_k_grid, load_batch, replay_text, run_episode,
    ReplayVerdict,
};
use crate::planners::{Planner, PlannerKind};
use crate::scene_file;
use crate::scenegen::{write_batch, BatchError};

#[derive(Debug, Parser)]
#[command(
    name = "rmpc-push",
    version,
    about = "Planar pushing with Riemannian motion predictive control"
)]
pub struct Cli {
    #[command(flatten)]
    pub overrides: Overrides,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Overrides {
    /// Settings file of `key = value` lines.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Override any settings key (repeatable).
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    #[arg(long, global = true)]
    pub seed: Option<String>,
    /// One of rmpc, rmp, mpc, open_loop, direct.
    #[arg(long, global = true)]
    pub planner: Option<String>,
    #[arg(long = "samples-K", global = true, value_name = "K")]
    pub samples_k: Option<String>,
    #[arg(long = "horizon-H", global = true, value_name = "H")]
    pub horizon_h: Option<String>,
    #[arg(long, global = true)]
    pub gamma: Option<String>,
    #[arg(long, global = true)]
    pub dt: Option<String>,
    /// Log-uniform weight bounds as `low,high`.
    #[arg(long = "weight-range", global = true, value_name = "LOW,HIGH")]
    pub weight_range: Option<String>,
    /// Worker threads (`auto` uses every core).
    #[arg(long, global = true)]
    pub workers: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a batch of scenes and its manifest.
    Gen {
        /// Number of scenes.
        n: usize,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Run one episode and print its summary line.
    Run {
        scene: PathBuf,
        #[arg(long = "trajectory-out", short = 'o', value_name = "PATH")]
        trajectory_out: Option<PathBuf>,
    },
    /// Run every listed planner on every scene of a manifest.
    Eval {
        manifest: PathBuf,
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "rmpc,rmp,mpc,open_loop,direct"
        )]
        planners: Vec<String>,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Re-simulate a trajectory's actions and compare states bit for bit.
    Replay { trajectory: PathBuf, scene: PathBuf },
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Scene(#[from] SceneFileError),
    #[error(transparent)]
    Batch(#[from] BatchError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("worker pool: {0}")]
    Pool(String),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(io_err(path))
}

impl Overrides {
    pub fn resolve(&self) -> Result<Settings, CliError> {
        let mut s = Settings::default();
        match (&self.config, std::env::var_os(CONFIG_ENV)) {
            (Some(path), _) => s.apply_file(path)?,
            (None, Some(path)) => s.apply_file(Path::new(&path))?,
            (None, None) => {}
        }
        for kv in &self.set {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("--set expects KEY=VALUE, got `{kv}`")))?;
            s.set(k.trim(), v)?;
        }
        let flags = [
            ("seed", &self.seed),
            ("planner", &self.planner),
            ("samples_K", &self.samples_k),
            ("horizon_H", &self.horizon_h),
            ("gamma", &self.gamma),
            ("dt", &self.dt),
            ("weight_range", &self.weight_range),
            ("workers", &self.workers),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                s.set(key, v)?;
            }
        }
        Ok(s)
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code. Errors are reported on standard error.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

pub fn execute(cli: &Cli) -> Result<ExitCode, CliError> {
    let settings = cli.overrides.resolve()?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = settings.workers {
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| CliError::Pool(e.to_string()))?;
    pool.install(|| match &cli.command {
        Command::Gen { n, out } => gen(&settings, *n, out),
        Command::Run {
            scene,
            trajectory_out,
        } => run(&settings, scene, trajectory_out.as_deref()),
        Command::Eval {
            manifest,
            planners,
            out,
        } => eval(&settings, manifest, planners, out),
        Command::Replay { trajectory, scene } => replay(&settings, trajectory, scene),
    })
}

fn gen(settings: &Settings, n: usize, out: &Path) -> Result<ExitCode, CliError> {
    let manifest = write_batch(&settings.scenegen, n, out)?;
    println!("wrote {n} scenes and {}", manifest.display());
    Ok(ExitCode::SUCCESS)
}

fn run(
    settings: &Settings,
    scene: &Path,
    trajectory_out: Option<&Path>,
) -> Result<ExitCode, CliError> {
    let (state, task) = scene_file::load(scene)?;
    let id = scene
        .file_stem()
        .map_or_else(|| "scene".into(), |s| s.to_string_lossy().into_owned());
    let log = run_episode(&id, &state, &task, &settings.planner, &settings.episode);
    if let Some(path) = trajectory_out {
        write(path, &log.trajectory_csv())?;
    }
    println!("{}", log.summary_line());
    match &log.failure {
        Some(f) => {
            eprintln!("planner failure: {f}");
            Ok(ExitCode::FAILURE)
        }
        None => Ok(ExitCode::SUCCESS),
    }
}

/// Where `eval` stores the trajectory of one episode, relative to its output directory.
pub fn trajectory_path(out: &Path, planner: PlannerKind, scene_id: &str) -> PathBuf {
    out.join("trajectories")
        .join(planner.name())
        .join(format!("{scene_id}.csv"))
}

fn eval(
    settings: &Settings,
    manifest: &Path,
    planners: &[String],
    out: &Path,
) -> Result<ExitCode, CliError> {
    let kinds = planners
        .iter()
        .map(|p| p.trim().parse::<PlannerKind>().map_err(CliError::Usage))
        .collect::<Result<Vec<_>, _>>()?;
    if kinds.is_empty() {
        return Err(CliError::Usage("no planners given".into()));
    }
    let scenes = load_batch(manifest)?;
    let planners: Vec<Planner> = kinds
        .iter()
        .map(|&k| settings.planner.with_kind(k))
        .collect();
    let report_every = (scenes.len() * planners.len() / 20).max(1);
    let comparison = compare_planners_with_progress(
        &scenes,
        &planners,
        &settings.episode,
        &default_k_grid(),
        &|done, total| {
            if done % report_every == 0 || done == total {
                eprintln!("eval: {done}/{total} episodes");
            }
        },
    )?;

    for kind in &kinds {
        let dir = out.join("trajectories").join(kind.name());
        std::fs::create_dir_all(&dir).map_err(io_err(&dir))?;
    }
    // the pool size never changes results, so it stays out of the echo
    let echo: String = settings
        .to_text()
        .lines()
        .filter(|l| !l.starts_with("workers "))
        .map(|l| format!("{l}\n"))
        .collect();
    write(&out.join("config.txt"), &echo)?;
    write(&out.join("episodes.csv"), &comparison.episodes_csv())?;
    write(&out.join("recall.csv"), &comparison.recall_csv())?;
    write(
        &out.join("recall_success.csv"),
        &comparison.recall_success_csv(),
    )?;
    write(&out.join("summary.csv"), &comparison.summary_csv())?;
    for log in &comparison.logs {
        write(
            &trajectory_path(out, log.planner, &log.scene_id),
            &log.trajectory_csv(),
        )?;
    }

    for s in &comparison.summaries {
        println!(
            "{} episodes={} mean_collision_ratio={:.4} success_rate={:.3} planner_failures={}",
            s.planner, s.episodes, s.mean_ratio, s.success_rate, s.planner_failures
        );
    }
    let failed: Vec<String> = comparison
        .logs
        .iter()
        .filter_map(|l| {
            l.failure
                .as_ref()
                .map(|f| format!("{} {}: {f}", l.planner, l.scene_id))
        })
        .collect();
    if !failed.is_empty() {
        eprintln!("{} episodes ended with a planner failure:", failed.len());
        for f in failed.iter().take(10) {
            eprintln!("  {f}");
        }
    }
    if comparison.logs.iter().any(|l| l.success) {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("no episode reached its goal");
        Ok(ExitCode::FAILURE)
    }
}

fn replay(settings: &Settings, trajectory: &Path, scene: &Path) -> Result<ExitCode, CliError> {
    let (state, task) = scene_file::load(scene)?;
    let csv = std::fs::read_to_string(trajectory).map_err(io_err(trajectory))?;
    match replay_text(&state, &task, &csv, &settings.planner.physics)? {
        ReplayVerdict::Match => {
            println!("match");
            Ok(ExitCode::SUCCESS)
        }
        ReplayVerdict::Diverged { step } => {
            println!("diverged at step {step}");
            Ok(ExitCode::FAILURE)
        }
    }
}
