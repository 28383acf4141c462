use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::BoxSpace;

/// Partition of the condition space into `cells` disjoint boxes of equal
/// width in normalized coordinates. A `p`-dimensional space is split into
/// `k` slabs per dimension with `k^p = cells`; indices are row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionGrid {
    space: BoxSpace,
    cells: usize,
    per_dim: usize,
}

impl DecompositionGrid {
    pub fn new(space: BoxSpace, cells: usize) -> Result<Self> {
        if cells == 0 {
            return Err(Error::Config(
                "decomposition needs at least one cell".into(),
            ));
        }
        let p = space.dim() as u32;
        let per_dim = (cells as f64).powf(1.0 / p as f64).round() as usize;
        if per_dim.checked_pow(p) != Some(cells) {
            return Err(Error::Config(format!(
                "{cells} cells cannot be split evenly over {p} condition dimensions"
            )));
        }
        Ok(Self {
            space,
            cells,
            per_dim,
        })
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn space(&self) -> &BoxSpace {
        &self.space
    }

    /// Cell containing `c_raw`. The upper face of the last cell is inclusive.
    pub fn cell_index(&self, c_raw: &[f64]) -> Result<usize> {
        let normalized = self.space.normalize(c_raw)?;
        Ok(self.cell_of_normalized(&normalized))
    }

    pub(crate) fn cell_of_normalized(&self, normalized: &[f64]) -> usize {
        let k = self.per_dim;
        normalized.iter().fold(0, |index, &v| {
            let t = 0.5 * (v + 1.0);
            let slab = ((t * k as f64).floor() as usize).min(k - 1);
            index * k + slab
        })
    }

    /// Raw `(lower, upper)` corners of a cell.
    pub fn cell_bounds(&self, cell: usize) -> (Vec<f64>, Vec<f64>) {
        let slabs = self.slabs(cell);
        let k = self.per_dim as f64;
        let lo: Vec<f64> = slabs.iter().map(|&s| -1.0 + 2.0 * s as f64 / k).collect();
        let hi: Vec<f64> = slabs
            .iter()
            .map(|&s| -1.0 + 2.0 * (s + 1) as f64 / k)
            .collect();
        let lo = self
            .space
            .denormalize(&lo)
            .expect("cell corner inside [-1, 1]");
        let hi = self
            .space
            .denormalize(&hi)
            .expect("cell corner inside [-1, 1]");
        (lo, hi)
    }

    /// Raw condition at the normalized centre of a cell.
    pub fn cell_midpoint(&self, cell: usize) -> Vec<f64> {
        let k = self.per_dim as f64;
        let mid: Vec<f64> = self
            .slabs(cell)
            .iter()
            .map(|&s| -1.0 + (2.0 * s as f64 + 1.0) / k)
            .collect();
        self.space
            .denormalize(&mid)
            .expect("cell centre inside [-1, 1]")
    }

    fn slabs(&self, cell: usize) -> Vec<usize> {
        assert!(cell < self.cells, "cell {cell} out of range");
        let mut slabs = vec![0; self.space.dim()];
        let mut rest = cell;
        for slot in slabs.iter_mut().rev() {
            *slot = rest % self.per_dim;
            rest /= self.per_dim;
        }
        slabs
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    fn theta_grid(n: usize) -> DecompositionGrid {
        DecompositionGrid::new(BoxSpace::linear(&[(0.0, FRAC_PI_4)]).unwrap(), n).unwrap()
    }

    #[test]
    fn index_examples() {
        let g = theta_grid(100);
        assert_eq!(g.cell_index(&[0.0]).unwrap(), 0);
        assert_eq!(g.cell_index(&[FRAC_PI_4]).unwrap(), 99);
        assert_eq!(g.cell_index(&[FRAC_PI_4 / 2.0]).unwrap(), 50);
        assert!(g.cell_index(&[-0.1]).is_err());
    }

    #[test]
    fn bounds_tile_the_space() {
        let g = theta_grid(7);
        let mut previous_hi = 0.0;
        for cell in 0..7 {
            let (lo, hi) = g.cell_bounds(cell);
            assert!((lo[0] - previous_hi).abs() < 1e-15);
            assert!(hi[0] > lo[0]);
            let mid = g.cell_midpoint(cell);
            assert_eq!(g.cell_index(&mid).unwrap(), cell);
            previous_hi = hi[0];
        }
        assert!((previous_hi - FRAC_PI_4).abs() < 1e-15);
    }

    #[test]
    fn every_point_maps_to_one_cell() {
        let g = theta_grid(13);
        for i in 0..=10_000 {
            let c = FRAC_PI_4 * i as f64 / 10_000.0;
            let cell = g.cell_index(&[c]).unwrap();
            assert!(cell < 13);
        }
    }

    #[test]
    fn multi_dimensional_grid() {
        let space = BoxSpace::linear(&[(0.0, 1.0), (0.0, 1.0)]).unwrap();
        assert!(DecompositionGrid::new(space.clone(), 10).is_err());
        let g = DecompositionGrid::new(space, 9).unwrap();
        assert_eq!(g.cell_index(&[0.0, 0.0]).unwrap(), 0);
        assert_eq!(g.cell_index(&[0.0, 1.0]).unwrap(), 2);
        assert_eq!(g.cell_index(&[1.0, 0.5]).unwrap(), 7);
        assert_eq!(g.cell_index(&g.cell_midpoint(5)).unwrap(), 5);
    }
}
