use std::cmp::Ordering;

use crate::problem::{dominates_unchecked, EvaluationRecord};

use super::grid::DecompositionGrid;

/// Non-dominated records of one condition cell.
#[derive(Debug, Clone, PartialEq)]
pub struct ParetoFront {
    pub cell: usize,
    pub members: Vec<EvaluationRecord>,
}

impl ParetoFront {
    pub fn objectives(&self) -> Vec<&[f64]> {
        self.members
            .iter()
            .map(|r| r.objectives.as_slice())
            .collect()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }
}

fn lexicographic(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

/// Indices of the maximal non-dominated subset of `points`, in input order.
/// Among identical vectors only the first occurrence is kept.
pub fn non_dominated_indices<P: AsRef<[f64]>>(points: &[P]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    // Stable sort: equal vectors keep input order, so the first one wins.
    order.sort_by(|&a, &b| lexicographic(points[a].as_ref(), points[b].as_ref()));

    // A dominator is lexicographically smaller, so it is always seen first.
    let mut kept: Vec<usize> = Vec::new();
    if points.first().map(|p| p.as_ref().len()) == Some(2) {
        let mut best_second = f64::INFINITY;
        for i in order {
            let p = points[i].as_ref();
            if p[1] < best_second {
                best_second = p[1];
                kept.push(i);
            }
        }
    } else {
        for i in order {
            let p = points[i].as_ref();
            let covered = kept.iter().any(|&k| {
                let q = points[k].as_ref();
                q == p || dominates_unchecked(q, p)
            });
            if !covered {
                kept.push(i);
            }
        }
    }
    kept.sort_unstable();
    kept
}

/// Pareto front of the successful records whose condition falls in `cell`.
pub fn select_front(
    records: &[EvaluationRecord],
    grid: &DecompositionGrid,
    cell: usize,
) -> ParetoFront {
    let in_cell: Vec<&EvaluationRecord> = records
        .iter()
        .filter(|r| r.is_ok() && grid.cell_index(&r.condition).ok() == Some(cell))
        .collect();
    let objectives: Vec<&[f64]> = in_cell.iter().map(|r| r.objectives.as_slice()).collect();
    let members = non_dominated_indices(&objectives)
        .into_iter()
        .map(|i| in_cell[i].clone())
        .collect();
    ParetoFront { cell, members }
}

/// Member minimizing objective `target` among those with
/// `objectives[constraint] <= bound`; `None` when no member is feasible.
pub fn constrained_extract(
    front: &ParetoFront,
    constraint: usize,
    bound: f64,
    target: usize,
) -> Option<&EvaluationRecord> {
    front
        .members
        .iter()
        .filter(|r| r.objectives[constraint] <= bound)
        .min_by(|a, b| a.objectives[target].total_cmp(&b.objectives[target]))
}

/// Incrementally maintained per-cell fronts. Holds objective vectors and the
/// index of the record that produced each one.
#[derive(Debug, Clone)]
pub struct FrontArchive {
    cells: Vec<Vec<(Vec<f64>, usize)>>,
}

impl FrontArchive {
    pub fn new(cells: usize) -> Self {
        Self {
            cells: vec![Vec::new(); cells],
        }
    }

    /// Offers a point to a cell; returns whether the front changed. A point
    /// equal to an existing member is rejected (earliest wins).
    pub fn insert(&mut self, cell: usize, objectives: &[f64], record: usize) -> bool {
        let front = &mut self.cells[cell];
        if front
            .iter()
            .any(|(q, _)| q.as_slice() == objectives || dominates_unchecked(q, objectives))
        {
            return false;
        }
        front.retain(|(q, _)| !dominates_unchecked(objectives, q));
        front.push((objectives.to_vec(), record));
        true
    }

    pub fn cell(&self, cell: usize) -> &[(Vec<f64>, usize)] {
        &self.cells[cell]
    }

    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }

    pub fn len(&self) -> usize {
        self.cells.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
