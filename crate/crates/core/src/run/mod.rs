//! Run orchestration: configuration, run directories and the commands the
//! `mcmo` binary exposes.
//!
//! An optimize run directory holds
//!
//! * `manifest.toml`: the fully resolved [`RunConfig`]; re-running it
//!   reproduces `records.csv` byte for byte with a reentrant evaluator
//! * `records.csv`, `hv.csv`: see [`io`]
//! * `checkpoints/actor.json`, `checkpoints/critic.json`, plus
//!   `actor_<episode>.json` / `critic_<episode>.json` every
//!   `training.checkpoint_interval` episodes
//! * `summary.json`

mod config;
pub mod io;

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::airfoil::{self, kt_transform, AirfoilGeometry, KtParams};
use crate::drl::Trainer;
use crate::error::{Error, Result};
use crate::kursawe::{self, sc_vs_mc_experiment, ExperimentReport};
use crate::nn::checkpoint;
use crate::pareto::{DecompositionGrid, FrontArchive, HvReport};
use crate::problem::{EvaluationRecord, McmoProblem};

pub use config::{ProblemKind, RunConfig};
pub use io::{read_hv_history, read_records, write_hv_history, write_records, RecordLayout};

pub const MANIFEST_FILE: &str = "manifest.toml";
pub const RECORDS_FILE: &str = "records.csv";
pub const HV_FILE: &str = "hv.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const CHECKPOINT_DIR: &str = "checkpoints";
pub const FRONTS_FILE: &str = "fronts.csv";
pub const HV_REPORT_FILE: &str = "hv_report.json";
pub const HV_CELLS_FILE: &str = "hv_cells.csv";
pub const EXPERIMENT_JSON: &str = "experiment.json";
pub const EXPERIMENT_CSV: &str = "experiment.csv";

fn create_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).map_err(|e| Error::io(format!("creating {}", path.display()), e))
}

/// Same spaces and objective count as the configured problem, without
/// touching any external solver. Used to read run files.
fn layout_problem(kind: ProblemKind) -> McmoProblem {
    match kind {
        ProblemKind::Kursawe => kursawe::kursawe_problem(),
        ProblemKind::AirfoilMock | ProblemKind::AirfoilExternal => airfoil::mock_airfoil_problem(),
    }
}

fn layout_of(problem: &McmoProblem) -> RecordLayout {
    RecordLayout {
        conditions: problem.condition_dim(),
        decisions: problem.decision_dim(),
        objectives: problem.objective_count(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub problem: String,
    pub seed: u64,
    pub episodes: u64,
    pub failed_evaluations: usize,
    pub reference: [f64; 2],
    pub final_hv_avg: Option<f64>,
}

/// Trains with `config` and writes the run directory `out`.
pub fn optimize(config: &RunConfig, out: &Path) -> Result<RunSummary> {
    config.validate()?;
    let config = config.clone().resolved();
    let checkpoints = out.join(CHECKPOINT_DIR);
    create_dir(&checkpoints)?;
    io::write_text(&out.join(MANIFEST_FILE), &config.to_toml()?)?;

    let problem = config.build_problem()?;
    let reference = config.reference_point();
    let mut trainer = Trainer::new(&problem, config.training.clone(), Some(reference))?;
    let interval = config.training.checkpoint_interval;
    while !trainer.is_done() {
        trainer.step()?;
        let episode = trainer.engine().episode();
        if interval > 0 && episode % interval == 0 {
            let engine = trainer.engine();
            checkpoint::save(
                engine.actor(),
                &checkpoints.join(format!("actor_{episode}.json")),
            )?;
            checkpoint::save(
                engine.critic(),
                &checkpoints.join(format!("critic_{episode}.json")),
            )?;
        }
    }

    checkpoint::save(trainer.engine().actor(), &checkpoints.join("actor.json"))?;
    checkpoint::save(trainer.engine().critic(), &checkpoints.join("critic.json"))?;
    write_records(
        &out.join(RECORDS_FILE),
        layout_of(&problem),
        trainer.records(),
    )?;
    write_hv_history(&out.join(HV_FILE), trainer.hv_history())?;
    let summary = RunSummary {
        problem: problem.name().to_string(),
        seed: config.training.seed,
        episodes: trainer.engine().episode(),
        failed_evaluations: trainer.records().iter().filter(|r| r.failed).count(),
        reference,
        final_hv_avg: trainer.hv_report().map(|r| r.average),
    };
    io::write_json(&out.join(SUMMARY_FILE), &summary)?;
    Ok(summary)
}

pub fn load_manifest(run_dir: &Path) -> Result<RunConfig> {
    RunConfig::load(&run_dir.join(MANIFEST_FILE))
}

/// Records of a finished run, checked against its manifest's problem shape.
pub fn load_records(run_dir: &Path) -> Result<(RunConfig, Vec<EvaluationRecord>)> {
    let config = load_manifest(run_dir)?;
    let layout = layout_of(&layout_problem(config.problem));
    let records = read_records(&run_dir.join(RECORDS_FILE), layout)?;
    Ok((config, records))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Analysis {
    pub cells: usize,
    pub records: usize,
    pub front_points: usize,
    pub hv: HvReport,
    pub output: PathBuf,
}

/// Re-decomposes the records of `run_dir` into `cells` condition cells
/// (default: the run's analysis grid) and writes per-cell fronts and
/// hypervolumes to `out` (default: `<run_dir>/analysis-n<cells>`). Nothing
/// else in the run directory is touched.
pub fn analyze(
    run_dir: &Path,
    cells: Option<usize>,
    reference: Option<[f64; 2]>,
    out: Option<&Path>,
) -> Result<Analysis> {
    let (config, records) = load_records(run_dir)?;
    let cells = cells.unwrap_or(config.training.analysis_cells);
    let reference = reference.unwrap_or_else(|| config.reference_point());
    if reference.iter().any(|v| !v.is_finite()) {
        return Err(Error::Config("reference must be finite".into()));
    }
    let problem = layout_problem(config.problem);
    if problem.objective_count() != 2 {
        return Err(Error::Config(
            "analysis needs a bi-objective problem".into(),
        ));
    }
    let grid = DecompositionGrid::new(problem.condition_space().clone(), cells)?;
    let out = out.map_or_else(
        || run_dir.join(format!("analysis-n{cells}")),
        Path::to_path_buf,
    );

    let mut archive = FrontArchive::new(grid.cells());
    for (i, r) in records.iter().enumerate().filter(|(_, r)| r.is_ok()) {
        let cell = grid.cell_index(&r.condition).map_err(|e| Error::Parse {
            path: run_dir.join(RECORDS_FILE),
            line: i as u64 + 2,
            detail: format!("condition outside the problem's condition space: {e}"),
        })?;
        archive.insert(cell, &r.objectives, i);
    }
    let hv = HvReport::from_archive(&archive, reference);

    let c_dim = problem.condition_dim();
    let mut front_header = vec!["cell".to_string()];
    front_header.extend(io::numbered("c_lo", c_dim));
    front_header.extend(io::numbered("c_hi", c_dim));
    front_header.extend(io::numbered("x", problem.decision_dim()));
    front_header.extend(io::numbered("f", 2));
    front_header.push("episode".into());
    let mut cell_header = vec!["cell".to_string()];
    cell_header.extend(io::numbered("c_lo", c_dim));
    cell_header.extend(io::numbered("c_hi", c_dim));
    cell_header.extend(["points".into(), "hv".into()]);

    let mut front_rows = Vec::new();
    let mut cell_rows = Vec::new();
    for cell in 0..grid.cells() {
        let (lo, hi) = grid.cell_bounds(cell);
        let bounds: Vec<String> = lo.iter().chain(&hi).map(f64::to_string).collect();
        let mut members: Vec<usize> = archive.cell(cell).iter().map(|(_, i)| *i).collect();
        members.sort_by(|&a, &b| records[a].objectives[0].total_cmp(&records[b].objectives[0]));
        for i in &members {
            let r = &records[*i];
            let mut row = vec![cell.to_string()];
            row.extend(bounds.iter().cloned());
            row.extend(r.decision.iter().chain(&r.objectives).map(f64::to_string));
            row.push(r.episode.to_string());
            front_rows.push(row);
        }
        let mut row = vec![cell.to_string()];
        row.extend(bounds);
        row.extend([members.len().to_string(), hv.per_cell[cell].to_string()]);
        cell_rows.push(row);
    }

    create_dir(&out)?;
    io::write_rows(&out.join(FRONTS_FILE), &front_header, &front_rows)?;
    io::write_rows(&out.join(HV_CELLS_FILE), &cell_header, &cell_rows)?;
    let analysis = Analysis {
        cells,
        records: records.len(),
        front_points: archive.len(),
        hv,
        output: out,
    };
    io::write_json(&analysis.output.join(HV_REPORT_FILE), &analysis)?;
    Ok(analysis)
}

/// Runs the single- vs multi-condition comparison (Kursawe only) and writes
/// `experiment.json`, `experiment.csv` and the manifest to `out`.
pub fn experiment(config: &RunConfig, out: &Path) -> Result<ExperimentReport> {
    if config.problem != ProblemKind::Kursawe {
        return Err(Error::Config(
            "the experiment command supports only the kursawe problem".into(),
        ));
    }
    config.validate()?;
    let config = config.clone().resolved();
    create_dir(out)?;
    io::write_text(&out.join(MANIFEST_FILE), &config.to_toml()?)?;
    let report = sc_vs_mc_experiment(
        &config.experiment,
        &config.training,
        config.reference_point(),
    )?;

    let header: Vec<String> = [
        "repetition",
        "case",
        "condition",
        "theta",
        "hv_ref",
        "evaluations",
        "final_hv",
        "reached",
        "censored",
    ]
    .map(String::from)
    .to_vec();
    let mut rows = Vec::new();
    for rep in &report.repetitions {
        for (case, outcome) in [("sc", &rep.single_condition), ("mc", &rep.multi_condition)] {
            for (i, c) in outcome.conditions.iter().enumerate() {
                rows.push(vec![
                    rep.index.to_string(),
                    case.to_string(),
                    i.to_string(),
                    c.theta.to_string(),
                    c.hv_ref.map_or_else(String::new, |v| v.to_string()),
                    c.evaluations.to_string(),
                    c.final_hv.to_string(),
                    u8::from(c.reached).to_string(),
                    u8::from(!c.reached).to_string(),
                ]);
            }
        }
    }
    io::write_rows(&out.join(EXPERIMENT_CSV), &header, &rows)?;
    io::write_json(&out.join(EXPERIMENT_JSON), &report)?;
    Ok(report)
}

/// Generates a Kármán–Trefftz section and writes its coordinate file.
pub fn write_airfoil_geometry(
    params: &KtParams,
    n_points: usize,
    out: &Path,
) -> Result<AirfoilGeometry> {
    params.validate()?;
    let geometry = kt_transform(params, n_points)?;
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        create_dir(parent)?;
    }
    geometry.write_coordinates(out)?;
    Ok(geometry)
}
