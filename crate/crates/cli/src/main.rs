use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use foil::exec::Execution;
use foil::harness::{emit_outputs, load_config, run_sweep, ComparisonReport, ExperimentConfig};
use foil::interferometer::{regime_check, ScenarioKind};

#[derive(Parser)]
#[command(name = "foil", version, about = "Fourth-order interference experiments: Monte Carlo against closed form")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a sweep and write data, singles and summary files.
    Run {
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// List the available scenarios and their delay regimes.
    ListScenarios,
    /// Check a config; with --run, also run it and exit non-zero unless
    /// every point passes the z-score threshold.
    Validate {
        config: PathBuf,
        #[arg(long)]
        run: bool,
        #[command(flatten)]
        overrides: Overrides,
    },
}

#[derive(Args)]
struct Overrides {
    /// Monte-Carlo realizations per sweep point.
    #[arg(long)]
    realizations: Option<usize>,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Worker threads (default: all cores); 1 still uses the thread pool.
    #[arg(long)]
    workers: Option<usize>,
    /// Run realizations in a plain loop instead of the thread pool.
    #[arg(long)]
    sequential: bool,
}

impl Overrides {
    fn apply(&self, cfg: &mut ExperimentConfig) -> Result<()> {
        if let Some(r) = self.realizations {
            if r == 0 {
                bail!("--realizations must be at least 1");
            }
            cfg.ensemble.realizations = r;
        }
        if let Some(s) = self.seed {
            cfg.ensemble.seed = s;
        }
        if let Some(d) = &self.output_dir {
            cfg.output.directory = d.clone();
        }
        Ok(())
    }

    fn execution(&self) -> Execution {
        if self.sequential || !Execution::parallel_available() {
            Execution::Sequential
        } else {
            Execution::Parallel
        }
    }
}

fn load(path: &Path, o: &Overrides) -> Result<ExperimentConfig> {
    let mut cfg = load_config(path)?;
    o.apply(&mut cfg)?;
    Ok(cfg)
}

fn sweep(cfg: &ExperimentConfig, o: &Overrides) -> Result<ComparisonReport> {
    let exec = o.execution();
    let report = match o.workers {
        Some(0) => bail!("--workers must be at least 1"),
        Some(n) if exec == Execution::Parallel => {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build().context("building thread pool")?;
            pool.install(|| run_sweep(cfg, exec))?
        }
        _ => run_sweep(cfg, exec)?,
    };
    Ok(report)
}

fn print_report(r: &ComparisonReport) {
    println!("{:>14} {:>14} {:>12} {:>14} {:>8}", r.variable.name(), "mc_mean", "mc_stderr", "analytic", "z");
    for row in &r.rows {
        println!("{:>14.6} {:>14.6} {:>12.3e} {:>14.6} {:>8.2}", row.value, row.mean, row.stderr, row.analytic, row.z);
    }
    if let Some(f) = &r.fit {
        println!(
            "fit: baseline {:.5} ± {:.2e}, visibility {:.5} ± {:.2e}, period {:.6} ± {:.2e}, rms {:.3e}",
            f.baseline, f.baseline_stderr, f.visibility, f.visibility_stderr, f.period, f.period_stderr, f.residual_rms
        );
    }
    for w in &r.regime_warnings {
        println!("regime warning: {w}");
    }
    let s = &r.summary;
    println!(
        "summary: {} points, max |z| = {:.3}, fraction |z| <= 3 = {:.3}, {}",
        s.points,
        s.max_abs_z,
        s.fraction_within_3,
        if s.pass { "PASS" } else { "FAIL" }
    );
}

fn run(cmd: Command) -> Result<ExitCode> {
    match cmd {
        Command::ListScenarios => {
            for k in ScenarioKind::ALL {
                println!("{:<22} {}", k.name(), k.regime());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Run { config, overrides } => {
            let cfg = load(&config, &overrides)?;
            let report = sweep(&cfg, &overrides)?;
            print_report(&report);
            let paths = emit_outputs(&report, &cfg, &cfg.output.directory)?;
            println!("wrote {}, {}, {}", paths.data.display(), paths.singles.display(), paths.summary.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Validate { config, run, overrides } => {
            let cfg = load(&config, &overrides)?;
            println!("{}: valid {} config, {} sweep points", config.display(), cfg.scenario, cfg.sweep.steps);
            let resolve = cfg.scenario.uses_slow_detector().then_some(cfg.detector.resolve_time);
            let common = cfg.sources.iter().any(|s| s.kind == foil::interferometer::SourceKind::CommonOriginSplit);
            let check = regime_check(cfg.scenario, &cfg.delays, cfg.coherence_time(), common, resolve);
            for v in &check.violations {
                println!("regime warning: {v}");
            }
            for d in &cfg.applied_defaults {
                println!("default: {d}");
            }
            if !run {
                return Ok(ExitCode::SUCCESS);
            }
            let report = sweep(&cfg, &overrides)?;
            print_report(&report);
            Ok(if report.summary.pass { ExitCode::SUCCESS } else { ExitCode::from(2) })
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse().command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
