use serde::{Deserialize, Serialize};

use crate::problem::EvaluationRecord;

use super::front::FrontArchive;
use super::grid::DecompositionGrid;

/// Exact area dominated by `points` and bounded by `reference`
/// (bi-objective, minimization). Points not strictly better than the
/// reference in both objectives contribute nothing.
pub fn hypervolume_2d<P: AsRef<[f64]>>(points: &[P], reference: [f64; 2]) -> f64 {
    let mut inside: Vec<[f64; 2]> = points
        .iter()
        .map(|p| {
            let p = p.as_ref();
            [p[0], p[1]]
        })
        .filter(|p| p[0] < reference[0] && p[1] < reference[1])
        .collect();
    inside.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));

    let mut area = 0.0;
    let mut ceiling = reference[1];
    for [x, y] in inside {
        if y < ceiling {
            area += (reference[0] - x) * (ceiling - y);
            ceiling = y;
        }
    }
    area
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HvReport {
    pub reference: [f64; 2],
    pub per_cell: Vec<f64>,
    /// Mean over every cell; empty cells count as zero.
    pub average: f64,
}

impl HvReport {
    pub(crate) fn from_cells(per_cell: Vec<f64>, reference: [f64; 2]) -> Self {
        let average = if per_cell.is_empty() {
            0.0
        } else {
            per_cell.iter().sum::<f64>() / per_cell.len() as f64
        };
        Self {
            reference,
            per_cell,
            average,
        }
    }

    pub fn from_archive(archive: &FrontArchive, reference: [f64; 2]) -> Self {
        let per_cell = (0..archive.cell_count())
            .map(|cell| {
                let points: Vec<&[f64]> = archive
                    .cell(cell)
                    .iter()
                    .map(|(f, _)| f.as_slice())
                    .collect();
                hypervolume_2d(&points, reference)
            })
            .collect();
        Self::from_cells(per_cell, reference)
    }
}

/// Per-cell hypervolume of the recorded fronts and their average.
pub fn hv_avg(
    records: &[EvaluationRecord],
    grid: &DecompositionGrid,
    reference: [f64; 2],
) -> HvReport {
    let mut by_cell: Vec<Vec<&[f64]>> = vec![Vec::new(); grid.cells()];
    for r in records.iter().filter(|r| r.is_ok()) {
        if let Ok(cell) = grid.cell_index(&r.condition) {
            by_cell[cell].push(&r.objectives);
        }
    }
    let per_cell = by_cell
        .iter()
        .map(|points| {
            let front: Vec<&[f64]> = super::non_dominated_indices(points)
                .into_iter()
                .map(|i| points[i])
                .collect();
            hypervolume_2d(&front, reference)
        })
        .collect();
    HvReport::from_cells(per_cell, reference)
}

/// Plateau test over the trailing `window` values:
/// `max - min <= rel_tol * |max|`.
pub fn converged(history: &[f64], window: usize, rel_tol: f64) -> bool {
    if window < 2 || history.len() < window {
        return false;
    }
    let tail = &history[history.len() - window..];
    let max = tail.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = tail.iter().copied().fold(f64::INFINITY, f64::min);
    max - min <= rel_tol * max.abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::BoxSpace;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn analytic_cases() {
        assert_eq!(hypervolume_2d(&[[0.0, 1.0], [1.0, 0.0]], [2.0, 2.0]), 3.0);
        assert_eq!(hypervolume_2d::<[f64; 2]>(&[], [2.0, 2.0]), 0.0);
        assert_eq!(hypervolume_2d(&[[2.0, 0.0], [0.0, 2.5]], [2.0, 2.0]), 0.0);
        assert_eq!(hypervolume_2d(&[[0.0, 0.0], [1.0, 1.0]], [2.0, 2.0]), 4.0);
    }

    /// Monte-Carlo estimate of the dominated area inside the bounding box of
    /// the points and the reference; returns (estimate, standard error).
    fn monte_carlo(points: &[[f64; 2]], reference: [f64; 2], n: usize, seed: u64) -> (f64, f64) {
        let lo = [
            points.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min),
            points.iter().map(|p| p[1]).fold(f64::INFINITY, f64::min),
        ];
        let box_area = (reference[0] - lo[0]) * (reference[1] - lo[1]);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let hits = (0..n)
            .filter(|_| {
                let s = [
                    rng.gen_range(lo[0]..reference[0]),
                    rng.gen_range(lo[1]..reference[1]),
                ];
                points.iter().any(|p| p[0] <= s[0] && p[1] <= s[1])
            })
            .count();
        let frac = hits as f64 / n as f64;
        (
            box_area * frac,
            box_area * (frac * (1.0 - frac) / n as f64).sqrt(),
        )
    }

    #[test]
    fn agrees_with_monte_carlo() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for trial in 0..5 {
            let points: Vec<[f64; 2]> = (0..50)
                .map(|_| [rng.gen_range(0.0..1.9), rng.gen_range(0.0..1.9)])
                .collect();
            let exact = hypervolume_2d(&points, [2.0, 2.0]);
            let (est, se) = monte_carlo(&points, [2.0, 2.0], 200_000, trial);
            assert!((exact - est).abs() <= 3.0 * se, "{exact} vs {est} ± {se}");
        }
    }

    #[test]
    fn hv_avg_counts_empty_cells() {
        let grid = DecompositionGrid::new(BoxSpace::linear(&[(0.0, 1.0)]).unwrap(), 2).unwrap();
        let rec = |c: f64, f: [f64; 2]| EvaluationRecord {
            episode: 0,
            condition: vec![c],
            decision: vec![0.0],
            objectives: f.to_vec(),
            weight: vec![0.5, 0.5],
            failed: false,
        };
        // Cell 0: HV 2; cell 1: HV 4.
        let records = vec![rec(0.2, [1.0, 0.0]), rec(0.8, [0.0, 0.0])];
        let report = hv_avg(&records, &grid, [2.0, 2.0]);
        assert_eq!(report.per_cell, vec![2.0, 4.0]);
        assert_eq!(report.average, 3.0);
        assert_eq!(hv_avg(&[], &grid, [2.0, 2.0]).average, 0.0);
        assert_eq!(hv_avg(&records[..1], &grid, [2.0, 2.0]).average, 1.0);
    }

    #[test]
    fn convergence_examples() {
        assert!(converged(&[1.0, 1.0, 1.0], 3, 0.01));
        assert!(!converged(&[1.0, 2.0], 2, 0.01));
        assert!(!converged(&[1.0], 2, 0.01));

        // Rising curve with a flat tail: the test fires exactly once the
        // whole window sits inside the tolerance band.
        let history: Vec<f64> = (0..40)
            .map(|i| if i < 20 { i as f64 } else { 20.0 })
            .collect();
        let first = (2..=history.len())
            .find(|&n| converged(&history[..n], 5, 0.01))
            .unwrap();
        assert_eq!(first, 25);
    }

    proptest! {
        #[test]
        fn monotone_and_permutation_invariant(
            points in proptest::collection::vec((0.0f64..2.5, 0.0f64..2.5), 0..30),
            extra in (0.0f64..2.5, 0.0f64..2.5),
            rotate in 0usize..30,
        ) {
            let pts: Vec<[f64; 2]> = points.iter().map(|&(a, b)| [a, b]).collect();
            let base = hypervolume_2d(&pts, [2.0, 2.0]);
            prop_assert!(base >= 0.0);
            let mut more = pts.clone();
            more.push([extra.0, extra.1]);
            prop_assert!(hypervolume_2d(&more, [2.0, 2.0]) >= base);
            let mut shuffled = pts.clone();
            if !shuffled.is_empty() {
                let k = rotate % shuffled.len();
                shuffled.rotate_left(k);
                shuffled.reverse();
            }
            prop_assert_eq!(hypervolume_2d(&shuffled, [2.0, 2.0]), base);
        }
    }
}
