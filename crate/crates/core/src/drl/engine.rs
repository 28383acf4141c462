use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::nn::{Adam, AdamParams, DenseNetwork, OutputActivation};
use crate::pareto::{converged, DecompositionGrid, FrontArchive, HvReport};
use crate::problem::{EvaluationRecord, McmoProblem};
use crate::scalarization::{reproduce, sample_weight, UtopiaTracker, WeightVector};

use super::buffer::ReplayBuffer;
use super::config::{exploration_sigma, TrainingConfig};
use super::sample::{SampleOrigin, StateVector};
use super::update::{actor_update, critic_update, select_action};

/// Diagnostics of one episode.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeOutcome {
    pub record: EvaluationRecord,
    pub sigma: f64,
    pub critic_updates: usize,
    pub actor_updates: usize,
    /// Mean pre-step critic loss over the episode's learning iterations.
    pub critic_loss: Option<f64>,
}

/// Single-step actor-critic optimizer. Owns both networks, their optimizers,
/// the replay buffer and the utopia tracker; each episode performs exactly
/// one objective evaluation.
#[derive(Clone)]
pub struct Engine<'p> {
    problem: &'p McmoProblem,
    config: TrainingConfig,
    actor: DenseNetwork,
    critic: DenseNetwork,
    actor_opt: Adam,
    critic_opt: Adam,
    buffer: ReplayBuffer,
    tracker: UtopiaTracker,
    rng: ChaCha8Rng,
    episode: u64,
}

impl<'p> Engine<'p> {
    pub fn new(problem: &'p McmoProblem, config: TrainingConfig) -> Result<Self> {
        config.validate()?;
        let p = problem.condition_dim();
        let d = problem.decision_dim();
        let m = problem.objective_count();
        let state_width = StateVector::width(p, m);
        let tau = config.tau_for(m);
        if tau.len() != m {
            return Err(Error::Config(format!(
                "training.tau has {} entries for {m} objectives",
                tau.len()
            )));
        }

        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut widths = vec![state_width];
        widths.extend(&config.hidden_layers);
        widths.push(d);
        let actor = DenseNetwork::new(
            &widths,
            OutputActivation::Tanh,
            config.leaky_slope,
            &mut rng,
        )?;
        widths[0] = state_width + d;
        *widths.last_mut().expect("non-empty") = 1;
        let critic = DenseNetwork::new(
            &widths,
            OutputActivation::Identity,
            config.leaky_slope,
            &mut rng,
        )?;

        let actor_opt = Adam::new(
            &actor,
            AdamParams::with_learning_rate(config.actor_learning_rate),
        );
        let critic_opt = Adam::new(
            &critic,
            AdamParams::with_learning_rate(config.critic_learning_rate),
        );
        let grid = DecompositionGrid::new(problem.condition_space().clone(), config.utopia_cells)?;
        let tracker = UtopiaTracker::new(grid, tau)?;
        Ok(Self {
            problem,
            config,
            actor,
            critic,
            actor_opt,
            critic_opt,
            buffer: ReplayBuffer::new(),
            tracker,
            rng,
            episode: 0,
        })
    }

    pub fn problem(&self) -> &McmoProblem {
        self.problem
    }

    pub fn config(&self) -> &TrainingConfig {
        &self.config
    }

    pub fn episode(&self) -> u64 {
        self.episode
    }

    pub fn actor(&self) -> &DenseNetwork {
        &self.actor
    }

    pub fn critic(&self) -> &DenseNetwork {
        &self.critic
    }

    pub fn buffer(&self) -> &ReplayBuffer {
        &self.buffer
    }

    pub fn tracker(&self) -> &UtopiaTracker {
        &self.tracker
    }

    /// Deterministic policy output for a raw condition and weight, using
    /// the tracked utopia of the condition's cell.
    pub fn policy(&self, c_raw: &[f64], weight: &WeightVector) -> Result<Vec<f64>> {
        let utopia = self.tracker.utopia_or_nearest(c_raw)?;
        let state = StateVector::build(self.problem, c_raw, weight, &utopia)?;
        let action = self.actor.forward(state.as_slice())?;
        self.problem.decision_space().denormalize(&action)
    }

    /// One episode at a condition drawn uniformly over the normalized
    /// condition space.
    pub fn run_episode(&mut self) -> Result<EpisodeOutcome> {
        let p = self.problem.condition_dim();
        let c_norm: Vec<f64> = (0..p).map(|_| self.rng.gen_range(-1.0..=1.0)).collect();
        let c_raw = self.problem.condition_space().denormalize(&c_norm)?;
        self.episode_at(c_raw)
    }

    /// One episode at a prescribed raw condition.
    pub fn run_episode_at(&mut self, c_raw: &[f64]) -> Result<EpisodeOutcome> {
        self.problem.condition_space().check(c_raw)?;
        self.episode_at(c_raw.to_vec())
    }

    fn episode_at(&mut self, c_raw: Vec<f64>) -> Result<EpisodeOutcome> {
        self.episode += 1;
        let episode = self.episode;
        let m = self.problem.objective_count();
        let weight = sample_weight(m, &mut self.rng);

        // The state's utopia must be finite before the first evaluation in a
        // cell; borrow the nearest observed cell until then.
        let utopia = self.tracker.utopia_or_nearest(&c_raw)?;
        let state = StateVector::build(self.problem, &c_raw, &weight, &utopia)?;
        let sigma = exploration_sigma(episode, &self.config);
        let action = select_action(&self.actor, &state, sigma, &mut self.rng)?;
        let x_raw = self
            .problem
            .decision_space()
            .denormalize(action.as_slice())?;

        let mut record = EvaluationRecord {
            episode,
            condition: c_raw.clone(),
            decision: x_raw.clone(),
            objectives: vec![f64::NAN; m],
            weight: weight.as_slice().to_vec(),
            failed: true,
        };
        if let Ok(f) = self.problem.evaluate(&x_raw, &c_raw) {
            record.objectives = f;
            record.failed = false;
            self.tracker.update(&c_raw, &record.objectives)?;
            let utopia = self
                .tracker
                .utopia(&c_raw)?
                .expect("cell observed by the update above")
                .to_vec();
            let origin = SampleOrigin {
                condition: state.condition().to_vec(),
                action: action.as_slice().to_vec(),
                objectives: record.objectives.clone(),
                state_utopia: self.problem.scaled_utopia(&utopia),
                utopia,
            };
            let samples = reproduce(&origin, &weight, self.config.reproduction, &mut self.rng)?;
            self.buffer.push(origin, &samples)?;
        }

        let (critic_updates, actor_updates, critic_loss) =
            self.learn().map_err(|e| Error::Numeric {
                episode,
                detail: e.to_string(),
            })?;
        Ok(EpisodeOutcome {
            record,
            sigma,
            critic_updates,
            actor_updates,
            critic_loss,
        })
    }

    fn learn(&mut self) -> Result<(usize, usize, Option<f64>)> {
        if self.buffer.is_empty() {
            return Ok((0, 0, None));
        }
        let mut critic_updates = 0;
        let mut actor_updates = 0;
        let mut loss_sum = 0.0;
        for l in 1..=self.config.learning_iterations {
            let indices = self
                .buffer
                .sample_indices(self.config.batch_size, &mut self.rng);
            let batch = self.buffer.batch(&indices);
            loss_sum += critic_update(&mut self.critic, &mut self.critic_opt, &batch)?;
            critic_updates += 1;
            if l % self.config.actor_delay == 0 {
                actor_update(
                    &mut self.actor,
                    &mut self.actor_opt,
                    &self.critic,
                    batch.states(),
                )?;
                actor_updates += 1;
            }
        }
        Ok((
            critic_updates,
            actor_updates,
            Some(loss_sum / critic_updates as f64),
        ))
    }
}

/// Training loop around an [`Engine`]: keeps every record, maintains
/// per-cell fronts on the analysis grid and logs HV_avg.
pub struct Trainer<'p> {
    engine: Engine<'p>,
    grid: DecompositionGrid,
    archive: FrontArchive,
    reference: Option<[f64; 2]>,
    records: Vec<EvaluationRecord>,
    hv_history: Vec<(u64, f64)>,
}

impl<'p> Trainer<'p> {
    /// `reference` is used when the config does not set one; HV is only
    /// logged for bi-objective problems with a reference point.
    pub fn new(
        problem: &'p McmoProblem,
        config: TrainingConfig,
        default_reference: Option<[f64; 2]>,
    ) -> Result<Self> {
        let reference = config.hv_reference.or(default_reference);
        let grid =
            DecompositionGrid::new(problem.condition_space().clone(), config.analysis_cells)?;
        let archive = FrontArchive::new(grid.cells());
        let engine = Engine::new(problem, config)?;
        let reference = if problem.objective_count() == 2 {
            reference
        } else {
            None
        };
        Ok(Self {
            engine,
            grid,
            archive,
            reference,
            records: Vec::new(),
            hv_history: Vec::new(),
        })
    }

    pub fn engine(&self) -> &Engine<'p> {
        &self.engine
    }

    pub fn records(&self) -> &[EvaluationRecord] {
        &self.records
    }

    pub fn hv_history(&self) -> &[(u64, f64)] {
        &self.hv_history
    }

    pub fn archive(&self) -> &FrontArchive {
        &self.archive
    }

    pub fn grid(&self) -> &DecompositionGrid {
        &self.grid
    }

    pub fn reference(&self) -> Option<[f64; 2]> {
        self.reference
    }

    pub fn into_records(self) -> Vec<EvaluationRecord> {
        self.records
    }

    pub fn hv_report(&self) -> Option<HvReport> {
        self.reference
            .map(|r| HvReport::from_archive(&self.archive, r))
    }

    pub fn is_done(&self) -> bool {
        let config = self.engine.config();
        if self.engine.episode() >= config.episodes {
            return true;
        }
        match (&config.plateau, self.hv_history.is_empty()) {
            (Some(rule), false) => {
                let values: Vec<f64> = self.hv_history.iter().map(|(_, v)| *v).collect();
                converged(&values, rule.window, rule.rel_tol)
            }
            _ => false,
        }
    }

    /// Runs one episode at a uniformly drawn condition and logs HV_avg
    /// when due.
    pub fn step(&mut self) -> Result<EpisodeOutcome> {
        let outcome = self.engine.run_episode()?;
        self.absorb(outcome)
    }

    /// Runs one episode at a prescribed raw condition.
    pub fn step_at(&mut self, c_raw: &[f64]) -> Result<EpisodeOutcome> {
        let outcome = self.engine.run_episode_at(c_raw)?;
        self.absorb(outcome)
    }

    /// Steps until the budget or the plateau rule stops training.
    pub fn run(&mut self) -> Result<()> {
        while !self.is_done() {
            self.step()?;
        }
        Ok(())
    }

    fn absorb(&mut self, outcome: EpisodeOutcome) -> Result<EpisodeOutcome> {
        let index = self.records.len();
        if outcome.record.is_ok() {
            let cell = self.grid.cell_index(&outcome.record.condition)?;
            self.archive.insert(cell, &outcome.record.objectives, index);
        }
        self.records.push(outcome.record.clone());
        let episode = self.engine.episode();
        let config = self.engine.config();
        if episode % config.hv_log_interval == 0 || episode == config.episodes {
            if let Some(report) = self.hv_report() {
                self.hv_history.push((episode, report.average));
            }
        }
        Ok(outcome)
    }
}

/// Result of [`train`].
#[derive(Debug, Clone)]
pub struct TrainingRun {
    pub records: Vec<EvaluationRecord>,
    pub hv_history: Vec<(u64, f64)>,
    pub final_hv: Option<HvReport>,
    pub actor: DenseNetwork,
    pub critic: DenseNetwork,
    pub evaluations: u64,
}

/// Trains on `problem` until the episode budget (or plateau rule) is hit.
pub fn train(
    problem: &McmoProblem,
    config: TrainingConfig,
    default_reference: Option<[f64; 2]>,
) -> Result<TrainingRun> {
    let start = problem.evaluation_count();
    let mut trainer = Trainer::new(problem, config, default_reference)?;
    trainer.run()?;
    Ok(TrainingRun {
        final_hv: trainer.hv_report(),
        hv_history: trainer.hv_history.clone(),
        actor: trainer.engine.actor.clone(),
        critic: trainer.engine.critic.clone(),
        evaluations: problem.evaluation_count() - start,
        records: trainer.records,
    })
}
