use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::problem::{EvaluationRecord, McmoProblem};
use crate::scalarization::WeightVector;

/// Network input `[c_norm | w | f*/scale]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    values: Vec<f64>,
    conditions: usize,
    objectives: usize,
}

impl StateVector {
    /// Builds a state from an already normalized condition and scaled
    /// utopia. Rejects a utopia that still holds the unvisited-cell sentinel.
    pub fn new(condition: &[f64], weight: &WeightVector, utopia: &[f64]) -> Result<Self> {
        check_len(weight.len(), utopia.len())?;
        if utopia.iter().any(|u| !u.is_finite()) {
            return Err(Error::UnvisitedCell);
        }
        let mut values = Vec::with_capacity(condition.len() + 2 * utopia.len());
        values.extend_from_slice(condition);
        values.extend_from_slice(weight.as_slice());
        values.extend_from_slice(utopia);
        Ok(Self {
            values,
            conditions: condition.len(),
            objectives: utopia.len(),
        })
    }

    /// Builds a state from a raw condition and raw utopia, normalizing both
    /// with the problem's condition space and objective scale.
    pub fn build(
        problem: &McmoProblem,
        c_raw: &[f64],
        weight: &WeightVector,
        utopia: &[f64],
    ) -> Result<Self> {
        let c = problem.condition_space().normalize(c_raw)?;
        check_len(problem.objective_count(), utopia.len())?;
        Self::new(&c, weight, &problem.scaled_utopia(utopia))
    }

    pub fn width(conditions: usize, objectives: usize) -> usize {
        conditions + 2 * objectives
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn condition(&self) -> &[f64] {
        &self.values[..self.conditions]
    }

    pub fn weight(&self) -> &[f64] {
        &self.values[self.conditions..self.conditions + self.objectives]
    }

    /// The scaled utopia entries.
    pub fn utopia(&self) -> &[f64] {
        &self.values[self.conditions + self.objectives..]
    }
}

/// Normalized decision in `[-1, 1]^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionVector(Vec<f64>);

impl ActionVector {
    /// Clips every component into `[-1, 1]`.
    pub fn clipped(values: Vec<f64>) -> Self {
        Self(values.into_iter().map(|v| v.clamp(-1.0, 1.0)).collect())
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingSample {
    pub state: StateVector,
    pub action: ActionVector,
    pub reward: f64,
}

/// Everything about one successful evaluation that the reproduced samples
/// share: normalized condition, action, objectives and the utopia in force
/// when they were stored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleOrigin {
    pub condition: Vec<f64>,
    pub action: Vec<f64>,
    pub objectives: Vec<f64>,
    /// Raw utopia, used for rewards.
    pub utopia: Vec<f64>,
    /// Scaled utopia, used in the state.
    pub state_utopia: Vec<f64>,
}

impl SampleOrigin {
    pub fn from_record(
        record: &EvaluationRecord,
        problem: &McmoProblem,
        utopia: &[f64],
    ) -> Result<Self> {
        if record.failed {
            return Err(Error::FailedRecord(record.episode));
        }
        check_len(record.objectives.len(), utopia.len())?;
        if utopia.iter().any(|u| !u.is_finite()) {
            return Err(Error::UnvisitedCell);
        }
        Ok(Self {
            condition: problem.condition_space().normalize(&record.condition)?,
            action: problem.decision_space().normalize(&record.decision)?,
            objectives: record.objectives.clone(),
            utopia: utopia.to_vec(),
            state_utopia: problem.scaled_utopia(utopia),
        })
    }

    pub fn sample(&self, weight: &WeightVector, reward: f64) -> Result<TrainingSample> {
        Ok(TrainingSample {
            state: StateVector::new(&self.condition, weight, &self.state_utopia)?,
            action: ActionVector::clipped(self.action.clone()),
            reward,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn state_layout() {
        let w = WeightVector::pair(0.3).unwrap();
        let s = StateVector::new(&[0.5], &w, &[-1.0, -2.0]).unwrap();
        assert_eq!(s.as_slice(), &[0.5, 0.3, 0.7, -1.0, -2.0]);
        assert_eq!(s.condition(), &[0.5]);
        assert_eq!(s.weight(), w.as_slice());
        assert_eq!(s.utopia(), &[-1.0, -2.0]);

        let s = StateVector::new(&[-1.0], &WeightVector::pair(1.0).unwrap(), &[0.0, 0.0]).unwrap();
        assert_eq!(s.as_slice(), &[-1.0, 1.0, 0.0, 0.0, 0.0]);
        assert_eq!(StateVector::width(1, 2), 5);
    }

    #[test]
    fn build_normalizes_condition_and_scales_utopia() {
        use crate::space::BoxSpace;
        let problem = McmoProblem::new(
            "p",
            BoxSpace::linear(&[(0.0, 1.0)]).unwrap(),
            BoxSpace::linear(&[(0.0, 4.0)]).unwrap(),
            2,
            Box::new(|x: &[f64], _: &[f64]| vec![x[0], -x[0]]),
        )
        .unwrap()
        .with_objective_scale(vec![10.0, 4.0])
        .unwrap();
        let w = WeightVector::pair(0.5).unwrap();
        let s = StateVector::build(&problem, &[3.0], &w, &[-20.0, 2.0]).unwrap();
        assert_eq!(s.as_slice(), &[0.5, 0.5, 0.5, -2.0, 0.5]);
        assert!(StateVector::build(&problem, &[3.0], &w, &[1.0]).is_err());
    }

    #[test]
    fn sentinel_utopia_is_rejected() {
        let w = WeightVector::pair(0.5).unwrap();
        assert!(matches!(
            StateVector::new(&[0.0], &w, &[f64::INFINITY, 0.0]),
            Err(Error::UnvisitedCell)
        ));
    }

    #[test]
    fn clipping() {
        assert_eq!(
            ActionVector::clipped(vec![1.7, -3.0, 0.2]).as_slice(),
            &[1.0, -1.0, 0.2]
        );
    }
}
