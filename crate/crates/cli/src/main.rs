use std::path::{Path, PathBuf};
use std::process::ExitCode;

use alertmapf_cli::config::SolverSettings;
use alertmapf_cli::{
    cmd_bench, cmd_gen, cmd_info_load, cmd_solve, CliError, ExperimentConfig, SolverName,
};
use alertmapf_core::SolveStatus;
use clap::{Parser, Subcommand};

/// Multi-agent pathfinding with alert-based coordination.
#[derive(Debug, Parser)]
#[command(name = "alertmapf", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate maps and instance files from a config.
    Gen {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config's master seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve one instance file. Exit code 0 = solved, 2 = timed out or stalled.
    Solve {
        instance: PathBuf,
        #[arg(long, default_value = "alert-bfs")]
        solver: SolverName,
        /// Take solver settings from this experiment config.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Overrides the instance file's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Seconds.
        #[arg(long)]
        time_limit: Option<f64>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Run a solver grid and write per-run and aggregate CSVs.
    Bench {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Run only this solver.
        #[arg(long)]
        solver: Option<SolverName>,
        /// Seconds per instance.
        #[arg(long)]
        time_limit: Option<f64>,
        /// Parallel solves; 0 uses every core.
        #[arg(long, default_value_t = 0)]
        jobs: usize,
    },
    /// Print distributed and alert information loads for N T D L C I_alert.
    InfoLoad {
        n: f64,
        t: f64,
        d: f64,
        l: f64,
        c: f64,
        i_alert: f64,
    },
}

fn load_config(path: &Path, seed: Option<u64>) -> Result<ExperimentConfig, CliError> {
    let mut config = ExperimentConfig::load(path)?;
    if let Some(seed) = seed {
        config.seed = seed;
    }
    Ok(config)
}

fn out_dir(flag: Option<PathBuf>, config: &ExperimentConfig) -> PathBuf {
    flag.or_else(|| config.out.clone())
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::Gen { config, seed, out } => {
            let config = load_config(&config, seed)?;
            let out = out_dir(out, &config);
            let written = cmd_gen(&config, &out)?;
            println!("wrote {} instances to {}", written.len(), out.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Solve {
            instance,
            solver,
            config,
            seed,
            time_limit,
            out,
        } => {
            let mut settings = match config {
                Some(path) => ExperimentConfig::load(&path)?.settings(),
                None => SolverSettings::default(),
            };
            if let Some(secs) = time_limit {
                settings.time_limit_secs = secs;
            }
            let report = cmd_solve(&instance, solver, &settings, seed, &out)?;
            let r = &report.row;
            println!(
                "{} {}: {} makespan={} collisions={} time={}ms",
                r.instance_id,
                r.solver,
                report.status,
                r.makespan.map_or_else(|| "-".to_owned(), |m| m.to_string()),
                r.collisions,
                r.wall_time_ms
            );
            Ok(match report.status {
                SolveStatus::Solved => ExitCode::SUCCESS,
                SolveStatus::TimedOut | SolveStatus::Stalled => ExitCode::from(2),
            })
        }
        Command::Bench {
            config,
            seed,
            out,
            solver,
            time_limit,
            jobs,
        } => {
            let mut config = load_config(&config, seed)?;
            if let Some(solver) = solver {
                config.solvers = vec![solver];
            }
            if let Some(secs) = time_limit {
                config.time_limit_secs = secs;
            }
            let out = out_dir(out, &config);
            let report = cmd_bench(&config, jobs, &out)?;
            println!("map,agents,solver,sr,mean_ms,mean_co,mean_t_ms,runs");
            for a in &report.aggregates {
                println!(
                    "{},{},{},{},{},{},{},{}",
                    a.map,
                    a.agents,
                    a.solver,
                    a.sr,
                    a.mean_ms.as_deref().unwrap_or(""),
                    a.mean_co.as_deref().unwrap_or(""),
                    a.mean_t_ms,
                    a.runs
                );
            }
            for f in &report.failures {
                eprintln!("failed: {f}");
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::InfoLoad {
            n,
            t,
            d,
            l,
            c,
            i_alert,
        } => {
            print!("{}", cmd_info_load(n, t, d, l, c, i_alert)?);
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
