use ndarray::{Array1, Array2};
use rand::Rng;

use crate::error::{check_len, Result};
use crate::scalarization::WeightVector;

use super::sample::{SampleOrigin, TrainingSample};

/// Unbounded replay memory. Reproduced samples share their origin, so each
/// entry stores only its weight, its reward and an index into the origins.
#[derive(Debug, Clone, Default)]
pub struct ReplayBuffer {
    origins: Vec<SampleOrigin>,
    origin_of: Vec<u32>,
    weights: Vec<f64>,
    rewards: Vec<f64>,
    objectives: usize,
}

/// Column-stacked mini-batch: `inputs` is `[state | action]` per row.
#[derive(Debug, Clone)]
pub struct Batch {
    pub inputs: Array2<f64>,
    pub rewards: Array1<f64>,
    pub state_width: usize,
}

impl Batch {
    pub fn states(&self) -> ndarray::ArrayView2<'_, f64> {
        self.inputs.slice(ndarray::s![.., ..self.state_width])
    }
}

impl ReplayBuffer {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.rewards.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rewards.is_empty()
    }

    pub fn origin_count(&self) -> usize {
        self.origins.len()
    }

    /// Stores the reproduced samples of one evaluation.
    pub fn push(&mut self, origin: SampleOrigin, samples: &[(WeightVector, f64)]) -> Result<()> {
        let m = origin.objectives.len();
        if self.origins.is_empty() {
            self.objectives = m;
        }
        check_len(self.objectives, m)?;
        for (w, _) in samples {
            check_len(m, w.len())?;
        }
        let index = u32::try_from(self.origins.len()).expect("fewer than 2^32 evaluations");
        self.origins.push(origin);
        for (w, r) in samples {
            self.origin_of.push(index);
            self.weights.extend_from_slice(w.as_slice());
            self.rewards.push(*r);
        }
        Ok(())
    }

    pub fn get(&self, i: usize) -> TrainingSample {
        let origin = &self.origins[self.origin_of[i] as usize];
        let w = &self.weights[i * self.objectives..(i + 1) * self.objectives];
        origin
            .sample(
                &WeightVector::new(w.to_vec()).expect("stored weights are valid"),
                self.rewards[i],
            )
            .expect("stored origins are valid")
    }

    /// The stored fields of entry `i` without materializing a sample.
    pub fn parts(&self, i: usize) -> (&SampleOrigin, &[f64], f64) {
        let origin = &self.origins[self.origin_of[i] as usize];
        let w = &self.weights[i * self.objectives..(i + 1) * self.objectives];
        (origin, w, self.rewards[i])
    }

    /// `n` uniform draws with replacement.
    pub fn sample_indices<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<usize> {
        assert!(!self.is_empty(), "cannot sample an empty buffer");
        (0..n).map(|_| rng.gen_range(0..self.len())).collect()
    }

    pub fn batch(&self, indices: &[usize]) -> Batch {
        let first = &self.origins[0];
        let p = first.condition.len();
        let m = self.objectives;
        let d = first.action.len();
        let state_width = p + 2 * m;
        let mut inputs = Array2::zeros((indices.len(), state_width + d));
        let mut rewards = Array1::zeros(indices.len());
        for (row, &i) in indices.iter().enumerate() {
            let (origin, w, r) = self.parts(i);
            let mut out = inputs.row_mut(row);
            let dst = out.as_slice_mut().expect("standard layout");
            dst[..p].copy_from_slice(&origin.condition);
            dst[p..p + m].copy_from_slice(w);
            dst[p + m..state_width].copy_from_slice(&origin.state_utopia);
            dst[state_width..].copy_from_slice(&origin.action);
            rewards[row] = r;
        }
        Batch {
            inputs,
            rewards,
            state_width,
        }
    }
}
