//! The rotated Kursawe benchmark: objectives, problem definition, a
//! sampled true-front oracle and the single- vs multi-condition experiment.

mod experiment;
mod oracle;

use std::f64::consts::FRAC_PI_4;

use crate::problem::McmoProblem;
use crate::space::BoxSpace;

pub use experiment::{
    hv_ref_protocol, multi_condition_run, prescribed_conditions, sc_vs_mc_experiment,
    single_condition_run, CaseOutcome, ConditionOutcome, ExperimentConfig, ExperimentReport,
    HvRefSpec, Repetition, RunStats,
};
pub use oracle::{halton, oracle_hv_avg, real_front_oracle, OracleFront, OracleSamples};

/// Upper end of the rotation-angle condition space.
pub const THETA_MAX: f64 = FRAC_PI_4;

/// Hypervolume reference point used for every Kursawe HV figure.
pub const REFERENCE: [f64; 2] = [-2.0, 13.0];

/// The original Kursawe objectives for three variables.
pub fn kursawe_g(x: &[f64]) -> (f64, f64) {
    debug_assert_eq!(x.len(), 3);
    let g1 = (0..2)
        .map(|i| -10.0 * (-0.2 * (x[i] * x[i] + x[i + 1] * x[i + 1]).sqrt()).exp())
        .sum();
    let g2 = x
        .iter()
        .map(|&v| v.abs().powf(0.8) + 5.0 * (v * v * v).sin())
        .sum();
    (g1, g2)
}

/// `(g1, g2)` rotated by `theta`.
pub fn rotate(g: (f64, f64), theta: f64) -> (f64, f64) {
    if theta == 0.0 {
        return g;
    }
    let (s, c) = theta.sin_cos();
    (g.0 * c - g.1 * s, g.0 * s + g.1 * c)
}

/// Modified Kursawe objectives at rotation angle `theta`.
pub fn kursawe_modified(x: &[f64], theta: f64) -> (f64, f64) {
    rotate(kursawe_g(x), theta)
}

/// Objective magnitude used to scale the utopia in the network state.
pub const OBJECTIVE_SCALE: f64 = 10.0;

/// Ω = [−5, 5]³, Φ = [0, π/4], two objectives.
pub fn kursawe_problem() -> McmoProblem {
    McmoProblem::new(
        "kursawe",
        BoxSpace::linear(&[(-5.0, 5.0); 3]).expect("valid box"),
        BoxSpace::linear(&[(0.0, THETA_MAX)]).expect("valid box"),
        2,
        Box::new(|x: &[f64], c: &[f64]| {
            let (f1, f2) = kursawe_modified(x, c[0]);
            vec![f1, f2]
        }),
    )
    .and_then(|p| p.with_objective_scale(vec![OBJECTIVE_SCALE; 2]))
    .expect("two objectives")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn g_examples() {
        assert_eq!(kursawe_g(&[0.0, 0.0, 0.0]), (-20.0, 0.0));
        // mpmath at 40 digits: -15.07276632887529..., 15.62206477211844...
        let (g1, g2) = kursawe_g(&[1.0, 1.0, 1.0]);
        assert!((g1 + 15.072766328875296).abs() < 1e-12);
        assert!((g2 - 15.622064772118448).abs() < 1e-12);
    }

    #[test]
    fn rotation_examples() {
        let x = [0.3, -1.2, 2.2];
        assert_eq!(kursawe_modified(&x, 0.0), kursawe_g(&x));
        let (f1, f2) = kursawe_modified(&[0.0; 3], FRAC_PI_4);
        let expected = -20.0 * FRAC_PI_4.cos();
        assert!((f1 - expected).abs() < 1e-12 && (f2 - expected).abs() < 1e-12);
        assert!((f1 + 14.1421).abs() < 1e-4);
    }

    #[test]
    fn problem_evaluates() {
        let p = kursawe_problem();
        assert_eq!(p.evaluate(&[0.0; 3], &[0.0]).unwrap(), vec![-20.0, 0.0]);
        assert!(p.evaluate(&[6.0, 0.0, 0.0], &[0.0]).is_err());
        assert!(p.evaluate(&[0.0; 3], &[1.0]).is_err());
        assert!(p.is_reentrant());
    }

    proptest! {
        #[test]
        fn g1_range(x in prop::array::uniform3(-5.0f64..=5.0)) {
            let (g1, _) = kursawe_g(&x);
            prop_assert!((-20.0..0.0).contains(&g1));
        }

        #[test]
        fn rotation_preserves_norm(
            x in prop::array::uniform3(-5.0f64..=5.0),
            theta in 0.0f64..=FRAC_PI_4,
        ) {
            let (g1, g2) = kursawe_g(&x);
            let (f1, f2) = kursawe_modified(&x, theta);
            let (a, b) = (f1 * f1 + f2 * f2, g1 * g1 + g2 * g2);
            prop_assert!((a - b).abs() <= 1e-12 * b.max(1.0));
        }
    }
}
