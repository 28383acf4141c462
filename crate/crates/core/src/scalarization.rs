//! Weighted Chebyshev scalarization, rewards, weight sampling, per-cell
//! utopia tracking and reward reproduction over resampled weights.

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::drl::{SampleOrigin, TrainingSample};
use crate::error::{check_len, Error, Result};
use crate::pareto::DecompositionGrid;

/// Non-negative weights summing to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    const SUM_TOLERANCE: f64 = 1e-9;

    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.len() < 2 {
            return Err(Error::InvalidWeight(format!(
                "need at least two components, got {}",
                weights.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(Error::InvalidWeight(format!(
                "component {w} is not a non-negative real"
            )));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > Self::SUM_TOLERANCE {
            return Err(Error::InvalidWeight(format!(
                "components sum to {sum}, not 1"
            )));
        }
        Ok(Self(weights))
    }

    /// `(u, 1 - u)`.
    pub fn pair(u: f64) -> Result<Self> {
        Self::new(vec![u, 1.0 - u])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// `max_i w_i |f_i - f*_i|`.
pub fn chebyshev(f: &[f64], w: &WeightVector, f_star: &[f64]) -> Result<f64> {
    check_len(w.len(), f.len())?;
    check_len(w.len(), f_star.len())?;
    if f.iter().chain(f_star).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("chebyshev input"));
    }
    Ok(chebyshev_unchecked(f, w.as_slice(), f_star))
}

pub(crate) fn chebyshev_unchecked(f: &[f64], w: &[f64], f_star: &[f64]) -> f64 {
    f.iter()
        .zip(w)
        .zip(f_star)
        .map(|((fi, wi), si)| wi * (fi - si).abs())
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Reward of an evaluation: the negated Chebyshev value.
pub fn reward(f: &[f64], w: &WeightVector, f_star: &[f64]) -> Result<f64> {
    chebyshev(f, w, f_star).map(|v| -v)
}

/// Uniform draw from the probability simplex. For two objectives this is
/// `(u, 1 - u)` with `u ~ U(0, 1)`.
pub fn sample_weight<R: Rng + ?Sized>(m: usize, rng: &mut R) -> WeightVector {
    assert!(m >= 2, "weights need at least two objectives");
    if m == 2 {
        let u: f64 = rng.gen();
        return WeightVector(vec![u, 1.0 - u]);
    }
    let mut w: Vec<f64> = (0..m).map(|_| Exp1.sample(rng)).collect();
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= total);
    WeightVector(w)
}

/// Per-cell utopia points, kept a margin `tau` below the best value seen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtopiaTracker {
    grid: DecompositionGrid,
    tau: Vec<f64>,
    /// `+inf` until the cell's first observation.
    utopia: Vec<Vec<f64>>,
}

impl UtopiaTracker {
    pub fn new(grid: DecompositionGrid, tau: Vec<f64>) -> Result<Self> {
        if tau.len() < 2 || tau.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
            return Err(Error::Config(format!(
                "utopia margins must be positive, one per objective: {tau:?}"
            )));
        }
        let utopia = vec![vec![f64::INFINITY; tau.len()]; grid.cells()];
        Ok(Self { grid, tau, utopia })
    }

    pub fn grid(&self) -> &DecompositionGrid {
        &self.grid
    }

    pub fn tau(&self) -> &[f64] {
        &self.tau
    }

    /// Lowers every component with `f_i < utopia_i + tau_i` to `f_i - tau_i`
    /// in the cell containing `c_raw`; returns which components changed.
    pub fn update(&mut self, c_raw: &[f64], f: &[f64]) -> Result<Vec<bool>> {
        check_len(self.tau.len(), f.len())?;
        if f.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("objective values"));
        }
        let cell = self.grid.cell_index(c_raw)?;
        let utopia = &mut self.utopia[cell];
        Ok(f.iter()
            .zip(&self.tau)
            .zip(utopia.iter_mut())
            .map(|((&fi, &ti), ui)| {
                if fi < *ui + ti {
                    *ui = fi - ti;
                    true
                } else {
                    false
                }
            })
            .collect())
    }

    /// Utopia of the cell containing `c_raw`, or `None` before its first
    /// observation.
    pub fn utopia(&self, c_raw: &[f64]) -> Result<Option<&[f64]>> {
        let cell = self.grid.cell_index(c_raw)?;
        Ok(self.cell_utopia(cell))
    }

    pub fn cell_utopia(&self, cell: usize) -> Option<&[f64]> {
        let u = &self.utopia[cell];
        u.iter().all(|v| v.is_finite()).then_some(u.as_slice())
    }

    /// Utopia to put in a state before anything was observed in the cell:
    /// the nearest observed cell's value, or zeros when nothing has been
    /// observed anywhere.
    pub fn utopia_or_nearest(&self, c_raw: &[f64]) -> Result<Vec<f64>> {
        let cell = self.grid.cell_index(c_raw)?;
        if let Some(u) = self.cell_utopia(cell) {
            return Ok(u.to_vec());
        }
        let here = self
            .grid
            .space()
            .normalize(&self.grid.cell_midpoint(cell))?;
        let mut best: Option<(f64, usize)> = None;
        for other in 0..self.grid.cells() {
            if self.cell_utopia(other).is_none() {
                continue;
            }
            let there = self
                .grid
                .space()
                .normalize(&self.grid.cell_midpoint(other))?;
            let d: f64 = here.iter().zip(&there).map(|(a, b)| (a - b).powi(2)).sum();
            if best.map_or(true, |(bd, _)| d < bd) {
                best = Some((d, other));
            }
        }
        Ok(match best {
            Some((_, other)) => self.utopia[other].clone(),
            None => vec![0.0; self.tau.len()],
        })
    }
}

/// Reward triples derived from one evaluation: the episode's own weight
/// first, then `k - 1` freshly sampled weights, each with its recomputed
/// reward.
pub fn reproduce<R: Rng + ?Sized>(
    origin: &SampleOrigin,
    original: &WeightVector,
    k: usize,
    rng: &mut R,
) -> Result<Vec<(WeightVector, f64)>> {
    if k == 0 {
        return Err(Error::Config(
            "reproduction count must be at least 1".into(),
        ));
    }
    let m = origin.objectives.len();
    check_len(m, original.len())?;
    let mut out = Vec::with_capacity(k);
    let first = reward(&origin.objectives, original, &origin.utopia)?;
    out.push((original.clone(), first));
    for _ in 1..k {
        let w = sample_weight(m, rng);
        let r = reward(&origin.objectives, &w, &origin.utopia)?;
        out.push((w, r));
    }
    Ok(out)
}

/// [`reproduce`], materialized as full training samples.
pub fn reproduce_data<R: Rng + ?Sized>(
    origin: &SampleOrigin,
    original: &WeightVector,
    k: usize,
    rng: &mut R,
) -> Result<Vec<TrainingSample>> {
    reproduce(origin, original, k, rng)?
        .into_iter()
        .map(|(w, r)| origin.sample(&w, r))
        .collect()
}
