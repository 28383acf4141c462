use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mcmo_core::airfoil::KtParams;
use mcmo_core::run::{self, RunConfig};
use mcmo_core::{Error, Result};

#[derive(Debug, Parser)]
#[command(
    name = "mcmo",
    version,
    about = "Multi-condition multi-objective optimization"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train on the configured problem and write a run directory.
    Optimize(RunArgs),
    /// Extract per-cell fronts and hypervolumes from a finished run.
    Analyze {
        /// Run directory written by `optimize`.
        run_dir: PathBuf,
        /// Number of condition cells (default: the run's analysis grid).
        #[arg(long, short = 'n')]
        cells: Option<usize>,
        /// HV reference point as `f1,f2`.
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        reference: Option<[f64; 2]>,
        /// Output directory (default: `<run_dir>/analysis-n<cells>`).
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Compare single- and multi-condition training on Kursawe.
    Experiment {
        #[command(flatten)]
        run: RunArgs,
        /// Number of prescribed conditions.
        #[arg(long)]
        conditions: Option<usize>,
        #[arg(long)]
        repetitions: Option<usize>,
    },
    /// Write the coordinate file of a Kármán–Trefftz section.
    AirfoilGeom {
        #[arg(long, allow_hyphen_values = true)]
        mu_x: f64,
        #[arg(long)]
        mu_y: f64,
        /// Trailing-edge angle in degrees.
        #[arg(long)]
        beta: f64,
        #[arg(long, default_value_t = 200)]
        points: usize,
        #[arg(long, short)]
        out: PathBuf,
    },
}

#[derive(Debug, Args)]
struct RunArgs {
    /// TOML run configuration.
    #[arg(long, short)]
    config: PathBuf,
    /// Output directory (default: `output` from the config).
    #[arg(long, short)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Analysis grid size used for HV logging.
    #[arg(long, short = 'n')]
    cells: Option<usize>,
    /// HV reference point as `f1,f2`.
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
    reference: Option<[f64; 2]>,
}

impl RunArgs {
    fn load(&self) -> Result<(RunConfig, PathBuf)> {
        let mut config = RunConfig::load(&self.config)?;
        if let Some(seed) = self.seed {
            config.training.seed = seed;
        }
        if let Some(cells) = self.cells {
            config.training.analysis_cells = cells;
        }
        if let Some(reference) = self.reference {
            config.training.hv_reference = Some(reference);
        }
        let out = self
            .out
            .clone()
            .or_else(|| config.output.clone())
            .ok_or_else(|| {
                Error::Config("no output directory: pass --out or set `output`".into())
            })?;
        config.validate()?;
        Ok((config, out))
    }
}

fn parse_point(s: &str) -> std::result::Result<[f64; 2], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    match parts.as_slice() {
        [a, b] => {
            let a: f64 = a.parse().map_err(|e| format!("`{a}`: {e}"))?;
            let b: f64 = b.parse().map_err(|e| format!("`{b}`: {e}"))?;
            Ok([a, b])
        }
        _ => Err(format!("expected two comma-separated numbers, got `{s}`")),
    }
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::Optimize(args) => {
            let (config, out) = args.load()?;
            let summary = run::optimize(&config, &out)?;
            println!(
                "{} episodes of {} (seed {}) written to {}",
                summary.episodes,
                summary.problem,
                summary.seed,
                out.display()
            );
            if let Some(hv) = summary.final_hv_avg {
                println!("final HV_avg {hv}");
            }
            if summary.failed_evaluations > 0 {
                println!("{} failed evaluations", summary.failed_evaluations);
            }
        }
        Command::Analyze {
            run_dir,
            cells,
            reference,
            out,
        } => {
            let a = run::analyze(&run_dir, cells, reference, out.as_deref())?;
            println!(
                "{} records, {} cells, {} front points, HV_avg {} at ({}, {})",
                a.records,
                a.cells,
                a.front_points,
                a.hv.average,
                a.hv.reference[0],
                a.hv.reference[1]
            );
            println!("written to {}", a.output.display());
        }
        Command::Experiment {
            run: args,
            conditions,
            repetitions,
        } => {
            let (mut config, out) = args.load()?;
            if let Some(n) = conditions {
                config.experiment.conditions = n;
            }
            if let Some(r) = repetitions {
                config.experiment.repetitions = r;
            }
            let report = run::experiment(&config, &out)?;
            let (sc, mc) = (
                &report.single_condition_total,
                &report.multi_condition_total,
            );
            println!(
                "evaluations over {} repetitions (mean / min / max)",
                report.repetitions.len()
            );
            println!(
                "  single-condition {:.1} / {} / {}",
                sc.mean, sc.min, sc.max
            );
            println!(
                "  multi-condition  {:.1} / {} / {}",
                mc.mean, mc.min, mc.max
            );
            let censored = report
                .repetitions
                .iter()
                .flat_map(|r| {
                    r.single_condition
                        .conditions
                        .iter()
                        .chain(&r.multi_condition.conditions)
                })
                .filter(|c| !c.reached)
                .count();
            if censored > 0 {
                println!("  {censored} condition runs hit the budget before their target");
            }
            println!("written to {}", out.display());
        }
        Command::AirfoilGeom {
            mu_x,
            mu_y,
            beta,
            points,
            out,
        } => {
            let params = KtParams {
                mu_x,
                mu_y,
                beta,
                alpha: 0.0,
            };
            let g = run::write_airfoil_geometry(&params, points, &out)?;
            println!("{} points written to {}", g.len(), out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_validation() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
