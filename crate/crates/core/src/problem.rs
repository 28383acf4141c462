//! Multi-condition multi-objective problems: `min_x f(x, c)` over a decision
//! space and a condition space, plus condition-indexed Pareto dominance.

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::{check_len, Error, Result};
use crate::space::BoxSpace;

/// Why a single objective evaluation did not produce usable values.
#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
pub enum EvalFailure {
    #[error("input outside the problem domain: {0}")]
    Domain(String),
    #[error("evaluator returned {actual} objectives, expected {expected}")]
    WrongArity { expected: usize, actual: usize },
    #[error("evaluator returned a non-finite objective")]
    NonFinite,
    #[error("solver did not converge")]
    NonConvergence,
    #[error("solver timed out")]
    Timeout,
    #[error("could not parse solver output: {0}")]
    Parse(String),
    #[error("solver exited with status {0}")]
    ExitStatus(i32),
    #[error("solver i/o: {0}")]
    Io(String),
}

/// Maps a raw decision `x` and raw condition `c` to objective values, all in
/// the minimization sense.
pub trait Evaluator: Send + Sync {
    fn evaluate(&self, x: &[f64], c: &[f64]) -> Result<Vec<f64>, EvalFailure>;

    /// Whether concurrent calls are safe and produce the same values as
    /// sequential ones.
    fn is_reentrant(&self) -> bool {
        false
    }
}

impl<F> Evaluator for F
where
    F: Fn(&[f64], &[f64]) -> Vec<f64> + Send + Sync,
{
    fn evaluate(&self, x: &[f64], c: &[f64]) -> Result<Vec<f64>, EvalFailure> {
        Ok(self(x, c))
    }

    fn is_reentrant(&self) -> bool {
        true
    }
}

pub struct McmoProblem {
    name: String,
    decision_space: BoxSpace,
    condition_space: BoxSpace,
    objective_count: usize,
    objective_scale: Vec<f64>,
    evaluator: Box<dyn Evaluator>,
    evaluations: AtomicU64,
}

impl fmt::Debug for McmoProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("McmoProblem")
            .field("name", &self.name)
            .field("decision_space", &self.decision_space)
            .field("condition_space", &self.condition_space)
            .field("objective_count", &self.objective_count)
            .field("evaluations", &self.evaluation_count())
            .finish_non_exhaustive()
    }
}

impl McmoProblem {
    pub fn new(
        name: impl Into<String>,
        decision_space: BoxSpace,
        condition_space: BoxSpace,
        objective_count: usize,
        evaluator: Box<dyn Evaluator>,
    ) -> Result<Self> {
        if objective_count < 2 {
            return Err(Error::Config(format!(
                "a multi-objective problem needs at least 2 objectives, got {objective_count}"
            )));
        }
        Ok(Self {
            name: name.into(),
            decision_space,
            condition_space,
            objective_count,
            objective_scale: vec![1.0; objective_count],
            evaluator,
            evaluations: AtomicU64::new(0),
        })
    }

    /// Typical objective magnitudes. The utopia entries of the network state
    /// are divided by these so they sit around unit size; rewards and stored
    /// objectives stay in raw units.
    pub fn with_objective_scale(mut self, scale: Vec<f64>) -> Result<Self> {
        check_len(self.objective_count, scale.len())?;
        if scale.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(Error::Config(
                "objective scale entries must be positive".into(),
            ));
        }
        self.objective_scale = scale;
        Ok(self)
    }

    pub fn objective_scale(&self) -> &[f64] {
        &self.objective_scale
    }

    /// A raw utopia point divided by the objective scale.
    pub fn scaled_utopia(&self, utopia: &[f64]) -> Vec<f64> {
        utopia
            .iter()
            .zip(&self.objective_scale)
            .map(|(u, s)| u / s)
            .collect()
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn decision_space(&self) -> &BoxSpace {
        &self.decision_space
    }

    pub fn condition_space(&self) -> &BoxSpace {
        &self.condition_space
    }

    pub fn decision_dim(&self) -> usize {
        self.decision_space.dim()
    }

    pub fn condition_dim(&self) -> usize {
        self.condition_space.dim()
    }

    pub fn objective_count(&self) -> usize {
        self.objective_count
    }

    pub fn is_reentrant(&self) -> bool {
        self.evaluator.is_reentrant()
    }

    /// Number of `evaluate` calls so far, failed ones included.
    pub fn evaluation_count(&self) -> u64 {
        self.evaluations.load(Ordering::Relaxed)
    }

    /// Evaluates the objectives at raw `(x, c)`. Every call counts as one
    /// function evaluation, whatever its outcome.
    pub fn evaluate(&self, x: &[f64], c: &[f64]) -> Result<Vec<f64>, EvalFailure> {
        self.evaluations.fetch_add(1, Ordering::Relaxed);
        self.decision_space
            .check(x)
            .map_err(|e| EvalFailure::Domain(format!("decision: {e}")))?;
        self.condition_space
            .check(c)
            .map_err(|e| EvalFailure::Domain(format!("condition: {e}")))?;
        let f = self.evaluator.evaluate(x, c)?;
        if f.len() != self.objective_count {
            return Err(EvalFailure::WrongArity {
                expected: self.objective_count,
                actual: f.len(),
            });
        }
        if f.iter().any(|v| !v.is_finite()) {
            return Err(EvalFailure::NonFinite);
        }
        Ok(f)
    }
}

/// One function evaluation. Failed records carry NaN objectives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationRecord {
    pub episode: u64,
    pub condition: Vec<f64>,
    pub decision: Vec<f64>,
    pub objectives: Vec<f64>,
    /// Weight vector sampled for the episode that produced this record.
    pub weight: Vec<f64>,
    pub failed: bool,
}

impl EvaluationRecord {
    pub fn is_ok(&self) -> bool {
        !self.failed
    }
}

/// `a` Pareto-dominates `b` (minimization): no worse anywhere, strictly
/// better somewhere.
pub fn dominates(a: &[f64], b: &[f64]) -> Result<bool> {
    check_len(a.len(), b.len())?;
    Ok(dominates_unchecked(a, b))
}

pub(crate) fn dominates_unchecked(a: &[f64], b: &[f64]) -> bool {
    let mut strictly = false;
    for (x, y) in a.iter().zip(b) {
        if x > y {
            return false;
        }
        if x < y {
            strictly = true;
        }
    }
    strictly
}
