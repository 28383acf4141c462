use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::drl::{Engine, TrainingConfig};
use crate::error::{Error, Result};
use crate::pareto::{hypervolume_2d, FrontArchive};
use crate::problem::McmoProblem;

use super::{kursawe_problem, OracleSamples, THETA_MAX};

/// `n` equally spaced angles over [0, π/4], endpoints included.
pub fn prescribed_conditions(n: usize) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::Config(format!(
            "experiment needs at least 2 conditions, got {n}"
        )));
    }
    Ok((0..n)
        .map(|i| i as f64 / (n - 1) as f64 * THETA_MAX)
        .collect())
}

/// Seed for repetition `rep`, case/condition stream `stream`.
fn sub_seed(base: u64, rep: usize, stream: u64) -> u64 {
    base.wrapping_add((rep as u64) << 32).wrapping_add(stream)
}

/// How each prescribed condition's target hypervolume is set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum HvRefSpec {
    /// A fraction of the sampled true front's HV.
    OracleFraction { fraction: f64, samples: usize },
    /// Mean final HV of repeated single-condition runs.
    ScProtocol { repetitions: usize, episodes: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    /// Number of prescribed conditions N_c.
    pub conditions: usize,
    pub repetitions: usize,
    /// Single-condition runs stop here if the target is not met; the
    /// multi-condition run gets `conditions` times this in total.
    pub budget_per_condition: u64,
    pub hv_ref: HvRefSpec,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            conditions: 5,
            repetitions: 10,
            budget_per_condition: 20_000,
            hv_ref: HvRefSpec::ScProtocol {
                repetitions: 10,
                episodes: 10_000,
            },
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        prescribed_conditions(self.conditions)?;
        if self.repetitions == 0 || self.budget_per_condition == 0 {
            return Err(Error::Config(
                "experiment.repetitions and experiment.budget_per_condition must be positive"
                    .into(),
            ));
        }
        match self.hv_ref {
            HvRefSpec::OracleFraction { fraction, samples } => {
                if !(fraction > 0.0 && fraction <= 1.0) || samples == 0 {
                    return Err(Error::Config(
                        "hv_ref.fraction must be in (0, 1] and hv_ref.samples positive".into(),
                    ));
                }
            }
            HvRefSpec::ScProtocol {
                repetitions,
                episodes,
            } => {
                if repetitions == 0 || episodes == 0 {
                    return Err(Error::Config(
                        "hv_ref.repetitions and hv_ref.episodes must be positive".into(),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// One condition's result within a case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionOutcome {
    pub theta: f64,
    pub hv_ref: Option<f64>,
    /// Function evaluations spent at this condition.
    pub evaluations: u64,
    /// False when the budget ran out first (censored).
    pub reached: bool,
    pub final_hv: f64,
    /// `(evaluations at this condition, HV)` at every improvement.
    pub trajectory: Vec<(u64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseOutcome {
    pub conditions: Vec<ConditionOutcome>,
    pub total_evaluations: u64,
}

impl CaseOutcome {
    fn new(conditions: Vec<ConditionOutcome>) -> Self {
        let total_evaluations = conditions.iter().map(|c| c.evaluations).sum();
        Self {
            conditions,
            total_evaluations,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunStats {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

impl RunStats {
    fn of(values: impl IntoIterator<Item = f64>) -> Self {
        let values: Vec<f64> = values.into_iter().collect();
        let n = values.len().max(1) as f64;
        Self {
            mean: values.iter().sum::<f64>() / n,
            min: values.iter().copied().fold(f64::INFINITY, f64::min),
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Repetition {
    pub index: usize,
    pub single_condition: CaseOutcome,
    pub multi_condition: CaseOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub conditions: usize,
    pub thetas: Vec<f64>,
    pub hv_ref: Vec<f64>,
    pub budget_per_condition: u64,
    pub repetitions: Vec<Repetition>,
    pub single_condition_total: RunStats,
    pub multi_condition_total: RunStats,
    pub single_condition_per_condition: Vec<RunStats>,
    pub multi_condition_per_condition: Vec<RunStats>,
}

struct ConditionTracker {
    theta: f64,
    hv_ref: Option<f64>,
    archive: FrontArchive,
    evaluations: u64,
    hv: f64,
    trajectory: Vec<(u64, f64)>,
}

impl ConditionTracker {
    fn new(theta: f64, hv_ref: Option<f64>) -> Self {
        Self {
            theta,
            hv_ref,
            archive: FrontArchive::new(1),
            evaluations: 0,
            hv: 0.0,
            trajectory: Vec::new(),
        }
    }

    fn absorb(&mut self, objectives: Option<&[f64]>, reference: [f64; 2]) {
        self.evaluations += 1;
        if let Some(f) = objectives {
            if self.archive.insert(0, f, self.evaluations as usize) {
                let points: Vec<&[f64]> = self
                    .archive
                    .cell(0)
                    .iter()
                    .map(|(f, _)| f.as_slice())
                    .collect();
                let hv = hypervolume_2d(&points, reference);
                if hv > self.hv {
                    self.hv = hv;
                    self.trajectory.push((self.evaluations, hv));
                }
            }
        }
    }

    fn reached(&self) -> bool {
        self.hv_ref.is_some_and(|r| self.hv >= r)
    }

    fn finish(self) -> ConditionOutcome {
        ConditionOutcome {
            theta: self.theta,
            hv_ref: self.hv_ref,
            evaluations: self.evaluations,
            reached: self.reached(),
            final_hv: self.hv,
            trajectory: self.trajectory,
        }
    }
}

/// Trains with the condition fixed at `theta` until the HV at `reference`
/// reaches `hv_ref` or `budget` evaluations are spent.
pub fn single_condition_run(
    problem: &McmoProblem,
    theta: f64,
    training: &TrainingConfig,
    hv_ref: Option<f64>,
    budget: u64,
    reference: [f64; 2],
) -> Result<ConditionOutcome> {
    let mut engine = Engine::new(problem, training.clone())?;
    let mut tracker = ConditionTracker::new(theta, hv_ref);
    while tracker.evaluations < budget && !tracker.reached() {
        let out = engine.run_episode_at(&[theta])?;
        tracker.absorb(
            out.record.is_ok().then_some(&out.record.objectives[..]),
            reference,
        );
    }
    Ok(tracker.finish())
}

/// One training run over the prescribed angles only: each episode picks an
/// angle uniformly among those whose target is not yet met.
pub fn multi_condition_run(
    problem: &McmoProblem,
    thetas: &[f64],
    training: &TrainingConfig,
    hv_ref: &[f64],
    budget: u64,
    reference: [f64; 2],
) -> Result<CaseOutcome> {
    crate::error::check_len(thetas.len(), hv_ref.len())?;
    let mut engine = Engine::new(problem, training.clone())?;
    let mut picker = ChaCha8Rng::seed_from_u64(training.seed ^ 0x5eed_c0de);
    let mut trackers: Vec<ConditionTracker> = thetas
        .iter()
        .zip(hv_ref)
        .map(|(&t, &r)| ConditionTracker::new(t, Some(r)))
        .collect();
    let mut active: Vec<usize> = (0..thetas.len()).collect();
    let mut spent = 0;
    while !active.is_empty() && spent < budget {
        let slot = picker.gen_range(0..active.len());
        let i = active[slot];
        let out = engine.run_episode_at(&[thetas[i]])?;
        spent += 1;
        trackers[i].absorb(
            out.record.is_ok().then_some(&out.record.objectives[..]),
            reference,
        );
        if trackers[i].reached() {
            active.remove(slot);
        }
    }
    Ok(CaseOutcome::new(
        trackers.into_iter().map(ConditionTracker::finish).collect(),
    ))
}

/// Mean final HV of `repetitions` single-condition runs of `episodes`
/// evaluations each; run `r` uses seed `training.seed + r`.
pub fn hv_ref_protocol(
    theta: f64,
    repetitions: usize,
    episodes: u64,
    training: &TrainingConfig,
    reference: [f64; 2],
) -> Result<f64> {
    if repetitions == 0 {
        return Err(Error::Config("hv_ref repetitions must be positive".into()));
    }
    let mut sum = 0.0;
    for r in 0..repetitions {
        let problem = kursawe_problem();
        let config = TrainingConfig {
            seed: training.seed.wrapping_add(r as u64),
            ..training.clone()
        };
        let out = single_condition_run(&problem, theta, &config, None, episodes, reference)
            .map_err(|e| Error::in_run(format!("hv_ref run {r} at theta {theta}"), e))?;
        sum += out.final_hv;
    }
    Ok(sum / repetitions as f64)
}

fn targets(
    config: &ExperimentConfig,
    training: &TrainingConfig,
    reference: [f64; 2],
    thetas: &[f64],
) -> Result<Vec<f64>> {
    match config.hv_ref {
        HvRefSpec::OracleFraction { fraction, samples } => {
            let mut rng = ChaCha8Rng::seed_from_u64(training.seed);
            let oracle = OracleSamples::generate(samples, &mut rng);
            Ok(thetas
                .iter()
                .map(|&t| fraction * oracle.front(t).hypervolume(reference))
                .collect())
        }
        HvRefSpec::ScProtocol {
            repetitions,
            episodes,
        } => thetas
            .iter()
            .map(|&t| hv_ref_protocol(t, repetitions, episodes, training, reference))
            .collect(),
    }
}

/// Evaluations needed by independent single-condition runs versus one
/// multi-condition run to reach the same per-condition HV targets.
/// Repetition `r` derives its run seeds from `training.seed` and `r`.
pub fn sc_vs_mc_experiment(
    config: &ExperimentConfig,
    training: &TrainingConfig,
    reference: [f64; 2],
) -> Result<ExperimentReport> {
    config.validate()?;
    training.validate()?;
    let thetas = prescribed_conditions(config.conditions)?;
    let hv_ref = targets(config, training, reference, &thetas)?;
    let base = training.seed;
    let mut repetitions = Vec::with_capacity(config.repetitions);
    for rep in 0..config.repetitions {
        let mut sc = Vec::with_capacity(thetas.len());
        for (i, (&theta, &target)) in thetas.iter().zip(&hv_ref).enumerate() {
            let problem = kursawe_problem();
            let training = TrainingConfig {
                seed: sub_seed(base, rep, 1 + i as u64),
                ..training.clone()
            };
            sc.push(
                single_condition_run(
                    &problem,
                    theta,
                    &training,
                    Some(target),
                    config.budget_per_condition,
                    reference,
                )
                .map_err(|e| {
                    Error::in_run(
                        format!("repetition {rep} single-condition theta {theta}"),
                        e,
                    )
                })?,
            );
        }
        let problem = kursawe_problem();
        let training = TrainingConfig {
            seed: sub_seed(base, rep, 0),
            ..training.clone()
        };
        let mc = multi_condition_run(
            &problem,
            &thetas,
            &training,
            &hv_ref,
            config.budget_per_condition * thetas.len() as u64,
            reference,
        )
        .map_err(|e| Error::in_run(format!("repetition {rep} multi-condition"), e))?;
        repetitions.push(Repetition {
            index: rep,
            single_condition: CaseOutcome::new(sc),
            multi_condition: mc,
        });
    }

    let totals = |pick: fn(&Repetition) -> &CaseOutcome| {
        RunStats::of(repetitions.iter().map(|r| pick(r).total_evaluations as f64))
    };
    let per_condition = |pick: fn(&Repetition) -> &CaseOutcome| {
        (0..thetas.len())
            .map(|i| {
                RunStats::of(
                    repetitions
                        .iter()
                        .map(|r| pick(r).conditions[i].evaluations as f64),
                )
            })
            .collect::<Vec<_>>()
    };
    Ok(ExperimentReport {
        conditions: config.conditions,
        single_condition_total: totals(|r| &r.single_condition),
        multi_condition_total: totals(|r| &r.multi_condition),
        single_condition_per_condition: per_condition(|r| &r.single_condition),
        multi_condition_per_condition: per_condition(|r| &r.multi_condition),
        thetas,
        hv_ref,
        budget_per_condition: config.budget_per_condition,
        repetitions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kursawe::REFERENCE;

    fn tiny_training(seed: u64) -> TrainingConfig {
        TrainingConfig {
            seed,
            hidden_layers: vec![16, 16],
            learning_iterations: 4,
            reproduction: 10,
            batch_size: 16,
            warmup_episodes: 50,
            ..TrainingConfig::default()
        }
    }

    #[test]
    fn prescribed_angles() {
        assert_eq!(prescribed_conditions(2).unwrap(), vec![0.0, THETA_MAX]);
        let five = prescribed_conditions(5).unwrap();
        assert_eq!(five[0], 0.0);
        assert_eq!(five[4], THETA_MAX);
        assert!((five[2] - THETA_MAX / 2.0).abs() < 1e-15);
        assert!(prescribed_conditions(1).is_err());
    }

    #[test]
    fn single_condition_censoring_and_stop() {
        let problem = kursawe_problem();
        let censored =
            single_condition_run(&problem, 0.0, &tiny_training(1), Some(1e9), 40, REFERENCE)
                .unwrap();
        assert_eq!(censored.evaluations, 40);
        assert!(!censored.reached);
        assert_eq!(problem.evaluation_count(), 40);

        let easy =
            single_condition_run(&problem, 0.0, &tiny_training(1), Some(1e-9), 40, REFERENCE)
                .unwrap();
        assert!(easy.reached);
        assert!(easy.evaluations < 40);
        assert_eq!(easy.trajectory.last().unwrap().0, easy.evaluations);
    }

    #[test]
    fn protocol_single_repetition_is_that_run() {
        let t = tiny_training(9);
        let one = hv_ref_protocol(0.2, 1, 30, &t, REFERENCE).unwrap();
        let problem = kursawe_problem();
        let run = single_condition_run(&problem, 0.2, &t, None, 30, REFERENCE).unwrap();
        assert_eq!(one, run.final_hv);
        assert_eq!(one, hv_ref_protocol(0.2, 1, 30, &t, REFERENCE).unwrap());
    }

    #[test]
    fn smoke_experiment_bookkeeping() {
        let config = ExperimentConfig {
            conditions: 3,
            repetitions: 2,
            budget_per_condition: 60,
            hv_ref: HvRefSpec::OracleFraction {
                fraction: 0.3,
                samples: 20_000,
            },
        };
        let report = sc_vs_mc_experiment(&config, &tiny_training(4), REFERENCE).unwrap();
        assert_eq!(report.repetitions.len(), 2);
        for rep in &report.repetitions {
            for case in [&rep.single_condition, &rep.multi_condition] {
                let sum: u64 = case.conditions.iter().map(|c| c.evaluations).sum();
                assert_eq!(case.total_evaluations, sum);
                assert!(case.total_evaluations > 0);
                for c in &case.conditions {
                    assert!(c
                        .trajectory
                        .windows(2)
                        .all(|w| w[0].1 <= w[1].1 && w[0].0 < w[1].0));
                    assert!(c.evaluations <= 60 * 3);
                }
            }
            assert!(rep
                .single_condition
                .conditions
                .iter()
                .all(|c| c.evaluations <= 60));
            assert!(rep.multi_condition.total_evaluations <= 180);
        }
        assert_eq!(
            report,
            sc_vs_mc_experiment(&config, &tiny_training(4), REFERENCE).unwrap()
        );
    }
}
