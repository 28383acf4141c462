use std::path::Path;

use rand::Rng;

use crate::error::{Error, Result};
use crate::pareto::{hypervolume_2d, non_dominated_indices, DecompositionGrid, HvReport};

use super::{kursawe_g, rotate};

/// Radical-inverse (Halton) point `index` for the given prime bases.
pub fn halton(index: u64, bases: &[u64]) -> Vec<f64> {
    bases
        .iter()
        .map(|&b| {
            let mut i = index;
            let mut f = 1.0;
            let mut r = 0.0;
            while i > 0 {
                f /= b as f64;
                r += f * (i % b) as f64;
                i /= b;
            }
            r
        })
        .collect()
}

/// Unrotated objective samples that can be Pareto optimal for some angle
/// in [0, π/4].
///
/// A point `q` dominates `p` at every such angle exactly when
/// `q2 <= p2` and `q1 - q2 <= p1 - p2` (one strictly), so filtering on
/// `(g1 - g2, g2)` discards only points that are dominated everywhere.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleSamples {
    candidates: Vec<[f64; 2]>,
    drawn: usize,
}

impl OracleSamples {
    /// Evaluates `budget` points of Ω: half uniform random, half a Halton
    /// sequence shifted by 1/2 so that its first point is the centre of Ω.
    pub fn generate<R: Rng + ?Sized>(budget: usize, rng: &mut R) -> Self {
        let halton_count = budget / 2;
        let mut g = Vec::with_capacity(budget);
        for _ in 0..budget - halton_count {
            let x = [
                rng.gen_range(-5.0..=5.0),
                rng.gen_range(-5.0..=5.0),
                rng.gen_range(-5.0..=5.0),
            ];
            let (g1, g2) = kursawe_g(&x);
            g.push([g1, g2]);
        }
        for i in 0..halton_count as u64 {
            let x: Vec<f64> = halton(i, &[2, 3, 5])
                .iter()
                .map(|u| 10.0 * ((u + 0.5) % 1.0) - 5.0)
                .collect();
            let (g1, g2) = kursawe_g(&x);
            g.push([g1, g2]);
        }
        Self::from_points(g, budget)
    }

    fn from_points(g: Vec<[f64; 2]>, drawn: usize) -> Self {
        let sheared: Vec<[f64; 2]> = g.iter().map(|p| [p[0] - p[1], p[1]]).collect();
        let candidates = non_dominated_indices(&sheared)
            .into_iter()
            .map(|i| g[i])
            .collect();
        Self { candidates, drawn }
    }

    pub fn candidates(&self) -> &[[f64; 2]] {
        &self.candidates
    }

    /// Number of evaluated points behind the candidates.
    pub fn drawn(&self) -> usize {
        self.drawn
    }

    /// True front approximation at `theta`.
    pub fn front(&self, theta: f64) -> OracleFront {
        let rotated: Vec<[f64; 2]> = self
            .candidates
            .iter()
            .map(|g| {
                let (f1, f2) = rotate((g[0], g[1]), theta);
                [f1, f2]
            })
            .collect();
        let mut points: Vec<[f64; 2]> = non_dominated_indices(&rotated)
            .into_iter()
            .map(|i| rotated[i])
            .collect();
        points.sort_by(|a, b| a[0].total_cmp(&b[0]));
        OracleFront { theta, points }
    }

    /// Writes the candidates as `g1,g2` CSV.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let io = |e: csv::Error| Error::Config(format!("{}: {e}", path.display()));
        w.write_record(["g1", "g2", "drawn"]).map_err(io)?;
        for (i, p) in self.candidates.iter().enumerate() {
            let drawn = if i == 0 {
                self.drawn.to_string()
            } else {
                String::new()
            };
            w.write_record([p[0].to_string(), p[1].to_string(), drawn])
                .map_err(io)?;
        }
        w.flush()
            .map_err(|e| Error::io(path.display().to_string(), e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut r = csv::Reader::from_path(path).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: 0,
            detail: e.to_string(),
        })?;
        let mut g = Vec::new();
        let mut drawn = 0;
        for row in r.records() {
            let parse_err = |line: u64, detail: String| Error::Parse {
                path: path.to_path_buf(),
                line,
                detail,
            };
            let row =
                row.map_err(|e| parse_err(e.position().map_or(0, |p| p.line()), e.to_string()))?;
            let line = row.position().map_or(0, |p| p.line());
            let field = |k: usize| -> Result<f64> {
                row.get(k)
                    .ok_or_else(|| parse_err(line, format!("missing column {k}")))?
                    .parse()
                    .map_err(|e| parse_err(line, format!("column {k}: {e}")))
            };
            g.push([field(0)?, field(1)?]);
            if let Some(d) = row.get(2).filter(|d| !d.is_empty()) {
                drawn = d
                    .parse()
                    .map_err(|e| parse_err(line, format!("drawn: {e}")))?;
            }
        }
        Ok(Self::from_points(g, drawn))
    }
}

/// Sampled Pareto front at one rotation angle, sorted by `f1`.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleFront {
    pub theta: f64,
    pub points: Vec<[f64; 2]>,
}

impl OracleFront {
    pub fn hypervolume(&self, reference: [f64; 2]) -> f64 {
        hypervolume_2d(&self.points, reference)
    }

    /// Euclidean distance from `f` to the nearest front point.
    pub fn distance(&self, f: &[f64]) -> f64 {
        self.points
            .iter()
            .map(|p| (p[0] - f[0]).hypot(p[1] - f[1]))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Samples Ω and returns the front at `theta`.
pub fn real_front_oracle<R: Rng + ?Sized>(theta: f64, budget: usize, rng: &mut R) -> OracleFront {
    OracleSamples::generate(budget, rng).front(theta)
}

/// Oracle HV per condition cell, evaluated at each cell's midpoint angle.
pub fn oracle_hv_avg(
    samples: &OracleSamples,
    grid: &DecompositionGrid,
    reference: [f64; 2],
) -> HvReport {
    let per_cell = (0..grid.cells())
        .map(|cell| {
            samples
                .front(grid.cell_midpoint(cell)[0])
                .hypervolume(reference)
        })
        .collect();
    HvReport::from_cells(per_cell, reference)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kursawe::{kursawe_modified, REFERENCE, THETA_MAX};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn halton_prefix() {
        let first: Vec<f64> = (1..=4).map(|i| halton(i, &[2])[0]).collect();
        assert_eq!(first, vec![0.5, 0.25, 0.75, 0.125]);
        assert_eq!(halton(1, &[3])[0], 1.0 / 3.0);
    }

    #[test]
    fn shear_filter_keeps_every_angle_front() {
        // Brute force on a small sample: the filtered set yields the same
        // fronts as the unfiltered one at several angles.
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let xs: Vec<[f64; 3]> = (0..3000)
            .map(|_| {
                [
                    rng.gen_range(-5.0..5.0),
                    rng.gen_range(-5.0..5.0),
                    rng.gen_range(-5.0..5.0),
                ]
            })
            .collect();
        let g: Vec<[f64; 2]> = xs
            .iter()
            .map(|x| {
                let (a, b) = kursawe_g(x);
                [a, b]
            })
            .collect();
        let samples = OracleSamples::from_points(g, xs.len());
        assert!(samples.candidates().len() < xs.len() / 5);
        for k in 0..=8 {
            let theta = THETA_MAX * k as f64 / 8.0;
            let all: Vec<[f64; 2]> = xs
                .iter()
                .map(|x| {
                    let (a, b) = kursawe_modified(x, theta);
                    [a, b]
                })
                .collect();
            let mut brute: Vec<[f64; 2]> = all
                .iter()
                .filter(|p| {
                    !all.iter()
                        .any(|q| q[0] <= p[0] && q[1] <= p[1] && (q[0] < p[0] || q[1] < p[1]))
                })
                .copied()
                .collect();
            brute.sort_by(|a, b| a[0].total_cmp(&b[0]));
            brute.dedup();
            let front = samples.front(theta);
            assert_eq!(front.points.len(), brute.len(), "theta {theta}");
            for (a, b) in front.points.iter().zip(&brute) {
                assert!((a[0] - b[0]).abs() < 1e-12 && (a[1] - b[1]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn theta_zero_front_reaches_the_f1_minimum() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let front = real_front_oracle(0.0, 200_000, &mut rng);
        assert!(front.distance(&[-20.0, 0.0]) < 1e-3);
        for (i, p) in front.points.iter().enumerate() {
            for q in &front.points[i + 1..] {
                assert!(!(q[0] <= p[0] && q[1] <= p[1]));
                assert!(!(p[0] <= q[0] && p[1] <= q[1]));
            }
        }
        assert!(front.hypervolume(REFERENCE) > 0.0);
    }

    #[test]
    fn save_and_load() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let samples = OracleSamples::generate(20_000, &mut rng);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("oracle.csv");
        samples.save(&path).unwrap();
        assert_eq!(OracleSamples::load(&path).unwrap(), samples);
        std::fs::write(&path, "g1,g2,drawn\n1.0,x,\n").unwrap();
        match OracleSamples::load(&path) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }
}
