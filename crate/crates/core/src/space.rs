//! Box-bounded decision and condition spaces, and the mapping between raw
//! coordinates and the `[-1, 1]` coordinates seen by the networks.

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};

/// How a dimension is mapped onto `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    Linear,
    /// Affine in `log10(value)`; only valid for strictly positive bounds.
    Log10,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxSpace {
    lower: Vec<f64>,
    upper: Vec<f64>,
    scale: Vec<Scale>,
}

impl BoxSpace {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>, scale: Vec<Scale>) -> Result<Self> {
        if lower.is_empty() {
            return Err(Error::InvalidSpace(
                "space must have at least one dimension".into(),
            ));
        }
        check_len(lower.len(), upper.len())?;
        check_len(lower.len(), scale.len())?;
        for (i, ((&lo, &hi), &s)) in lower.iter().zip(&upper).zip(&scale).enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::InvalidSpace(format!(
                    "dimension {i}: lower {lo} must be finite and below upper {hi}"
                )));
            }
            if s == Scale::Log10 && lo <= 0.0 {
                return Err(Error::InvalidSpace(format!(
                    "dimension {i}: log10 scale requires a positive lower bound, got {lo}"
                )));
            }
        }
        Ok(Self {
            lower,
            upper,
            scale,
        })
    }

    /// All-linear space from `(lower, upper)` pairs.
    pub fn linear(bounds: &[(f64, f64)]) -> Result<Self> {
        Self::new(
            bounds.iter().map(|b| b.0).collect(),
            bounds.iter().map(|b| b.1).collect(),
            vec![Scale::Linear; bounds.len()],
        )
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn scale(&self) -> &[Scale] {
        &self.scale
    }

    /// Returns the first dimension whose value lies outside its bounds.
    pub fn check(&self, raw: &[f64]) -> Result<()> {
        check_len(self.dim(), raw.len())?;
        for (dim, (&value, (&lower, &upper))) in raw
            .iter()
            .zip(self.lower.iter().zip(&self.upper))
            .enumerate()
        {
            if !(value >= lower && value <= upper) {
                return Err(Error::OutOfBounds {
                    dim,
                    value,
                    lower,
                    upper,
                });
            }
        }
        Ok(())
    }

    pub fn contains(&self, raw: &[f64]) -> bool {
        self.check(raw).is_ok()
    }

    pub fn normalize(&self, raw: &[f64]) -> Result<Vec<f64>> {
        self.check(raw)?;
        Ok((0..self.dim())
            .map(|i| {
                let (lo, hi, v) = self.mapped(i, raw[i]);
                (2.0 * (v - lo) / (hi - lo) - 1.0).clamp(-1.0, 1.0)
            })
            .collect())
    }

    /// Inverse of [`normalize`](Self::normalize). Results are clamped to the
    /// raw bounds so rounding can never produce an out-of-bounds point.
    pub fn denormalize(&self, normalized: &[f64]) -> Result<Vec<f64>> {
        check_len(self.dim(), normalized.len())?;
        for (dim, &value) in normalized.iter().enumerate() {
            if !(-1.0..=1.0).contains(&value) {
                return Err(Error::OutOfBounds {
                    dim,
                    value,
                    lower: -1.0,
                    upper: 1.0,
                });
            }
        }
        Ok((0..self.dim())
            .map(|i| {
                let (lo, hi, _) = self.mapped(i, self.lower[i]);
                let t = lo + 0.5 * (normalized[i] + 1.0) * (hi - lo);
                let raw = match self.scale[i] {
                    Scale::Linear => t,
                    Scale::Log10 => 10f64.powf(t),
                };
                raw.clamp(self.lower[i], self.upper[i])
            })
            .collect())
    }

    // (lower, upper, value) in the coordinate where the map is affine.
    fn mapped(&self, i: usize, value: f64) -> (f64, f64, f64) {
        match self.scale[i] {
            Scale::Linear => (self.lower[i], self.upper[i], value),
            Scale::Log10 => (self.lower[i].log10(), self.upper[i].log10(), value.log10()),
        }
    }
}
