use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Airfoil design variables in decision-vector order `[μx, μy, β, α]`;
/// angles in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KtParams {
    pub mu_x: f64,
    pub mu_y: f64,
    pub beta: f64,
    pub alpha: f64,
}

impl KtParams {
    pub const BOUNDS: [(f64, f64); 4] = [(-0.4, -0.05), (0.0, 0.4), (1.0, 30.0), (0.0, 30.0)];

    pub fn from_slice(x: &[f64]) -> Result<Self> {
        crate::error::check_len(4, x.len())?;
        let p = Self {
            mu_x: x[0],
            mu_y: x[1],
            beta: x[2],
            alpha: x[3],
        };
        p.validate()?;
        Ok(p)
    }

    pub fn to_vec(self) -> Vec<f64> {
        vec![self.mu_x, self.mu_y, self.beta, self.alpha]
    }

    pub fn validate(&self) -> Result<()> {
        for (dim, (&value, (lower, upper))) in self.to_vec().iter().zip(Self::BOUNDS).enumerate() {
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
}

/// Closed airfoil contour with unit chord: leading edge at the origin,
/// trailing edge at `(1, 0)`. Points run from the trailing edge over the
/// upper surface to the leading edge and back along the lower surface; the
/// first and last points are the trailing edge.
#[derive(Debug, Clone, PartialEq)]
pub struct AirfoilGeometry {
    points: Vec<[f64; 2]>,
}

impl AirfoilGeometry {
    pub fn points(&self) -> &[[f64; 2]] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Shoelace area; positive for counter-clockwise traversal.
    pub fn signed_area(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| w[0][0] * w[1][1] - w[1][0] * w[0][1])
            .sum::<f64>()
            / 2.0
    }

    /// Largest distance between the upper and lower surfaces measured
    /// perpendicular to the chord, as a fraction of chord.
    pub fn max_thickness(&self) -> f64 {
        let le = self.leading_edge_index();
        let upper = &self.points[..=le];
        let lower = &self.points[le..];
        let y_at = |surface: &[[f64; 2]], x: f64| -> Option<f64> {
            surface.windows(2).find_map(|w| {
                let (a, b) = (w[0], w[1]);
                let (lo, hi) = if a[0] <= b[0] { (a, b) } else { (b, a) };
                (x >= lo[0] && x <= hi[0] && hi[0] > lo[0])
                    .then(|| lo[1] + (x - lo[0]) / (hi[0] - lo[0]) * (hi[1] - lo[1]))
            })
        };
        (1..200)
            .filter_map(|k| {
                let x = k as f64 / 200.0;
                Some(y_at(upper, x)? - y_at(lower, x)?)
            })
            .fold(0.0, f64::max)
    }

    fn leading_edge_index(&self) -> usize {
        self.points
            .iter()
            .enumerate()
            .min_by(|a, b| a.1[0].total_cmp(&b.1[0]))
            .map(|(i, _)| i)
            .unwrap_or(0)
    }

    /// Whether any two non-adjacent segments intersect.
    pub fn self_intersects(&self) -> bool {
        let n = self.points.len() - 1;
        let seg = |i: usize| (self.points[i], self.points[i + 1]);
        let mut order: Vec<usize> = (0..n).collect();
        let min_x = |i: usize| seg(i).0[0].min(seg(i).1[0]);
        let max_x = |i: usize| seg(i).0[0].max(seg(i).1[0]);
        order.sort_by(|&a, &b| min_x(a).total_cmp(&min_x(b)));
        for (k, &i) in order.iter().enumerate() {
            for &j in &order[k + 1..] {
                if min_x(j) > max_x(i) {
                    break;
                }
                let adjacent = i.abs_diff(j) == 1 || i.abs_diff(j) == n - 1;
                if !adjacent && segments_intersect(seg(i), seg(j)) {
                    return true;
                }
            }
        }
        false
    }

    /// Plain `x y` lines, one point per line.
    pub fn to_coordinate_text(&self) -> String {
        let mut out = String::with_capacity(self.points.len() * 24);
        for p in &self.points {
            let _ = writeln!(out, "{:.12} {:.12}", p[0], p[1]);
        }
        out
    }

    pub fn write_coordinates(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_coordinate_text())
            .map_err(|e| Error::io(format!("writing {}", path.display()), e))
    }

    /// Parses `x y` lines; a leading name line is skipped.
    pub fn parse_coordinates(text: &str) -> Result<Self> {
        let mut points = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let parsed: Option<Vec<f64>> = fields.iter().map(|f| f.parse().ok()).collect();
            match parsed {
                Some(v) if v.len() == 2 => points.push([v[0], v[1]]),
                _ if i == 0 && points.is_empty() => continue,
                _ => {
                    return Err(Error::Geometry(format!(
                        "line {}: expected two numbers, got {line:?}",
                        i + 1
                    )))
                }
            }
        }
        if points.len() < 3 {
            return Err(Error::Geometry("fewer than 3 coordinate points".into()));
        }
        Ok(Self { points })
    }
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn segments_intersect(s: ([f64; 2], [f64; 2]), t: ([f64; 2], [f64; 2])) -> bool {
    let d1 = cross(t.0, t.1, s.0);
    let d2 = cross(t.0, t.1, s.1);
    let d3 = cross(s.0, s.1, t.0);
    let d4 = cross(s.0, s.1, t.1);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    let on = |p: [f64; 2], a: [f64; 2], b: [f64; 2], d: f64| {
        d == 0.0
            && p[0] >= a[0].min(b[0])
            && p[0] <= a[0].max(b[0])
            && p[1] >= a[1].min(b[1])
            && p[1] <= a[1].max(b[1])
    };
    on(s.0, t.0, t.1, d1) || on(s.1, t.0, t.1, d2) || on(t.0, s.0, s.1, d3) || on(t.1, s.0, s.1, d4)
}

/// Kármán–Trefftz image of `ζ` with exponent `n`, written with
/// `w = (ζ−1)/(ζ+1)` as `n (1 + wⁿ) / (1 − wⁿ)` so the power's branch cut
/// stays off the mapped circle.
pub fn kt_map(zeta: Complex64, n: f64) -> Option<Complex64> {
    let w = (zeta - 1.0) / (zeta + 1.0);
    if w == Complex64::new(0.0, 0.0) {
        return Some(Complex64::new(n, 0.0));
    }
    let wn = w.powf(n);
    let denom = Complex64::new(1.0, 0.0) - wn;
    if denom.norm() < 1e-12 {
        return None;
    }
    Some(n * (Complex64::new(1.0, 0.0) + wn) / denom)
}

/// Contour for circle centre `(mu_x, mu_y)` and exponent `n`, without range
/// checks on the parameters.
pub(crate) fn kt_curve(mu_x: f64, mu_y: f64, n: f64, n_points: usize) -> Result<AirfoilGeometry> {
    if n_points < 40 {
        return Err(Error::Geometry(format!(
            "need at least 40 points, got {n_points}"
        )));
    }
    let centre = Complex64::new(mu_x, mu_y);
    let radius = ((1.0 - mu_x).powi(2) + mu_y * mu_y).sqrt();
    let te_angle = (-mu_y).atan2(1.0 - mu_x);
    let te = Complex64::new(n, 0.0);

    let zeta_at = |s: f64| centre + radius * Complex64::from_polar(1.0, te_angle + s);
    let map_at = |s: f64| -> Result<Complex64> {
        let z = kt_map(zeta_at(s), n)
            .ok_or_else(|| Error::Geometry(format!("map singular at circle angle {s}")))?;
        if !(z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::Geometry("non-finite mapped point".into()));
        }
        Ok(z)
    };

    // Angles measured from the trailing edge, clustered at both ends.
    let angles: Vec<f64> = (0..n_points)
        .map(|k| PI * (1.0 - (PI * k as f64 / (n_points - 1) as f64).cos()))
        .collect();
    let mut raw = Vec::with_capacity(n_points);
    raw.push(te);
    for &s in &angles[1..n_points - 1] {
        raw.push(map_at(s)?);
    }
    raw.push(te);

    // The leading edge is the point of the continuous contour farthest from
    // the trailing edge: bracket it with the farthest sample, then bisect on
    // the sign of d|z - te|²/ds.
    let k = (1..n_points - 1)
        .max_by(|&a, &b| (raw[a] - te).norm().total_cmp(&(raw[b] - te).norm()))
        .expect("at least one interior point");
    let slope = |s: f64| -> Result<f64> {
        let zeta = zeta_at(s);
        let w = (zeta - 1.0) / (zeta + 1.0);
        let wn = w.powf(n);
        let dz_dw = 2.0 * n * n * w.powf(n - 1.0) / ((1.0 - wn) * (1.0 - wn));
        let dw_dzeta = 2.0 / ((zeta + 1.0) * (zeta + 1.0));
        let dzeta_ds = Complex64::i() * (zeta - centre);
        Ok(((map_at(s)? - te).conj() * dz_dw * dw_dzeta * dzeta_ds).re)
    };
    let (mut lo, mut hi) = (angles[k - 1], angles[k + 1]);
    let le = if slope(lo)? >= 0.0 && slope(hi)? <= 0.0 {
        while hi - lo > f64::EPSILON * hi {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if slope(mid)? > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        map_at(0.5 * (lo + hi))?
    } else {
        raw[k]
    };
    let chord = te - le;
    if chord.norm() < 1e-12 {
        return Err(Error::Geometry("degenerate chord".into()));
    }
    // Maps le -> 0 and te -> 1.
    let to_unit = |z: Complex64| (z - le) / chord;
    let mut points: Vec<[f64; 2]> = raw
        .iter()
        .map(|&z| {
            let u = to_unit(z);
            [u.re, u.im]
        })
        .collect();
    let last = points.len() - 1;
    points[0] = [1.0, 0.0];
    points[last] = [1.0, 0.0];

    let geometry = AirfoilGeometry { points };
    if geometry.signed_area() <= 0.0 {
        return Err(Error::Geometry("contour is not counter-clockwise".into()));
    }
    Ok(geometry)
}

/// Kármán–Trefftz airfoil for `params` (α is ignored) with `n_points`
/// contour points.
pub fn kt_transform(params: &KtParams, n_points: usize) -> Result<AirfoilGeometry> {
    params.validate()?;
    kt_curve(
        params.mu_x,
        params.mu_y,
        2.0 - params.beta / 180.0,
        n_points,
    )
}

/// Interior angle at the trailing edge, in degrees, between the first
/// segment of each surface.
pub fn trailing_edge_angle(geometry: &AirfoilGeometry) -> Result<f64> {
    let p = geometry.points();
    if p.len() < 4 {
        return Err(Error::Geometry("too few points".into()));
    }
    let te = p[0];
    let upper = [p[1][0] - te[0], p[1][1] - te[1]];
    let lower = [p[p.len() - 2][0] - te[0], p[p.len() - 2][1] - te[1]];
    let nu = upper[0].hypot(upper[1]);
    let nl = lower[0].hypot(lower[1]);
    if nu == 0.0 || nl == 0.0 {
        return Err(Error::Geometry("repeated trailing-edge point".into()));
    }
    let cos = ((upper[0] * lower[0] + upper[1] * lower[1]) / (nu * nl)).clamp(-1.0, 1.0);
    Ok(cos.acos().to_degrees())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn params(mu_x: f64, mu_y: f64, beta: f64) -> KtParams {
        KtParams {
            mu_x,
            mu_y,
            beta,
            alpha: 0.0,
        }
    }

    #[test]
    fn trailing_edge_maps_to_n() {
        let n = 2.0 - 10.0 / 180.0;
        assert_eq!(
            kt_map(Complex64::new(1.0, 0.0), n),
            Some(Complex64::new(n, 0.0))
        );
        // Direct form of the map agrees away from the branch cut.
        let zeta = Complex64::new(-0.2, 1.1);
        let direct = n * ((zeta + 1.0).powf(n) + (zeta - 1.0).powf(n))
            / ((zeta + 1.0).powf(n) - (zeta - 1.0).powf(n));
        assert!((kt_map(zeta, n).unwrap() - direct).norm() < 1e-12);
    }

    #[test]
    fn chord_and_closure() {
        let g = kt_transform(&params(-0.1, 0.1, 10.0), 200).unwrap();
        assert_eq!(g.len(), 200);
        assert_eq!(g.points()[0], [1.0, 0.0]);
        assert_eq!(g.points()[199], [1.0, 0.0]);
        // No point is farther from the trailing edge than the leading edge.
        assert!(g
            .points()
            .iter()
            .all(|p| (p[0] - 1.0).hypot(p[1]) <= 1.0 + 1e-12));
        let min_x = g
            .points()
            .iter()
            .map(|p| p[0])
            .fold(f64::INFINITY, f64::min);
        assert!((0.0..1e-3).contains(&min_x), "{min_x}");
        assert!(g.points().iter().all(|p| p[0] <= 1.0 + 1e-9));
        // With an odd count and no camber the middle sample is the leading edge.
        let sym = kt_transform(&params(-0.1, 0.0, 10.0), 201).unwrap();
        let mid = sym.points()[100];
        assert!(mid[0].abs() < 1e-12 && mid[1].abs() < 1e-12, "{mid:?}");
        assert!(g.signed_area() > 0.0);
        // Upper surface comes first.
        assert!(g.points()[50][1] > 0.0);
        assert!(g.points()[150][1] < 0.0);
        assert!(!g.self_intersects());
    }

    #[test]
    fn symmetric_without_camber() {
        for (beta, n_points) in [(1.0, 201), (12.0, 200), (30.0, 400), (20.0, 77)] {
            let g = kt_transform(&params(-0.2, 0.0, beta), n_points).unwrap();
            let p = g.points();
            for k in 0..p.len() {
                let q = p[p.len() - 1 - k];
                assert!((p[k][0] - q[0]).abs() < 1e-9 && (p[k][1] + q[1]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn trailing_edge_angle_tracks_beta() {
        let g = kt_transform(&params(-0.1, 0.05, 20.0), 400).unwrap();
        assert!((trailing_edge_angle(&g).unwrap() - 20.0).abs() <= 1.0);
        let g = kt_transform(&params(-0.1, 0.05, 1.0), 800).unwrap();
        assert!((trailing_edge_angle(&g).unwrap() - 1.0).abs() <= 0.5);
        let mut last = f64::INFINITY;
        for beta in [30.0, 25.0, 20.0, 15.0, 10.0, 5.0, 1.0] {
            let a =
                trailing_edge_angle(&kt_transform(&params(-0.2, 0.2, beta), 400).unwrap()).unwrap();
            assert!(a < last, "beta {beta}: {a} vs {last}");
            last = a;
        }
    }

    #[test]
    fn joukowski_limit_is_a_cusp() {
        let angles: Vec<f64> = [100, 400, 1600]
            .iter()
            .map(|&n| trailing_edge_angle(&kt_curve(-0.1, 0.1, 2.0, n).unwrap()).unwrap())
            .collect();
        assert!(angles[0] > angles[1] && angles[1] > angles[2]);
        assert!(angles[2] < 0.05, "{angles:?}");
    }

    #[test]
    fn random_draws_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..300 {
            let p = KtParams {
                mu_x: rng.gen_range(-0.4..=-0.05),
                mu_y: rng.gen_range(0.0..=0.4),
                beta: rng.gen_range(1.0..=30.0),
                alpha: 0.0,
            };
            let g = kt_transform(&p, 400).unwrap();
            assert!(g
                .points()
                .iter()
                .all(|q| q[0].is_finite() && q[1].is_finite()));
            assert!(!g.self_intersects(), "{p:?}");
            assert!(
                (trailing_edge_angle(&g).unwrap() - p.beta).abs() <= 1.0,
                "{p:?}"
            );
        }
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(kt_transform(&params(0.1, 0.1, 10.0), 100).is_err());
        assert!(kt_transform(&params(-0.1, 0.1, 40.0), 100).is_err());
        assert!(kt_transform(&params(-0.1, 0.1, 10.0), 20).is_err());
    }

    #[test]
    fn self_intersection_detection() {
        let bowtie = AirfoilGeometry {
            points: vec![[0.0, 0.0], [1.0, 1.0], [1.0, 0.0], [0.0, 1.0], [0.0, 0.0]],
        };
        assert!(bowtie.self_intersects());
        let square = AirfoilGeometry {
            points: vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [0.0, 0.0]],
        };
        assert!(!square.self_intersects());
    }

    #[test]
    fn coordinate_text_round_trip() {
        let g = kt_transform(&params(-0.15, 0.2, 8.0), 120).unwrap();
        let text = g.to_coordinate_text();
        assert_eq!(text.lines().count(), 120);
        let back = AirfoilGeometry::parse_coordinates(&text).unwrap();
        assert_eq!(back.len(), 120);
        for (a, b) in back.points().iter().zip(g.points()) {
            assert!((a[0] - b[0]).abs() < 1e-12 && (a[1] - b[1]).abs() < 1e-12);
        }
        let named = format!("KT airfoil\n{text}");
        assert_eq!(
            AirfoilGeometry::parse_coordinates(&named).unwrap().len(),
            120
        );
        assert!(AirfoilGeometry::parse_coordinates("1 0\n0.5 x\n0 0\n").is_err());
    }
}
