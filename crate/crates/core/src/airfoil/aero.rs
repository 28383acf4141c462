use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::problem::{EvalFailure, Evaluator};

use super::geometry::KtParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AeroCoefficients {
    pub cl: f64,
    pub cd: f64,
}

/// `(−(C_L/C_D)/100, −C_L)`; rejects non-positive or non-finite drag.
pub fn airfoil_objectives(c: AeroCoefficients) -> Result<[f64; 2], EvalFailure> {
    if !(c.cd.is_finite() && c.cd > 0.0) || !c.cl.is_finite() {
        return Err(EvalFailure::NonFinite);
    }
    Ok([-(c.cl / c.cd) / 100.0, -c.cl])
}

/// Lift and drag for an airfoil design at a chord Reynolds number.
pub trait AeroModel: Send + Sync {
    fn coefficients(
        &self,
        params: &KtParams,
        reynolds: f64,
    ) -> Result<AeroCoefficients, EvalFailure>;

    /// Whether results are a pure function of the inputs and concurrent
    /// calls are safe.
    fn is_reentrant(&self) -> bool {
        false
    }
}

impl<M: AeroModel + ?Sized> AeroModel for Box<M> {
    fn coefficients(
        &self,
        params: &KtParams,
        reynolds: f64,
    ) -> Result<AeroCoefficients, EvalFailure> {
        (**self).coefficients(params, reynolds)
    }

    fn is_reentrant(&self) -> bool {
        (**self).is_reentrant()
    }
}

/// Closed-form stand-in for a panel solver. Lift grows with incidence and
/// camber and rolls off past a camber-dependent stall angle; drag grows
/// with thickness, incidence and low Reynolds number.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MockAero;

impl MockAero {
    /// Incidence after the stall roll-off, degrees.
    pub fn effective_alpha(alpha: f64, mu_y: f64) -> f64 {
        let stall = 15.0 + 10.0 * mu_y;
        if alpha <= stall {
            alpha
        } else {
            alpha - (alpha - stall).powi(2) / 10.0
        }
    }
}

impl AeroModel for MockAero {
    fn coefficients(&self, p: &KtParams, reynolds: f64) -> Result<AeroCoefficients, EvalFailure> {
        p.validate()
            .map_err(|e| EvalFailure::Domain(e.to_string()))?;
        if !(1e5..=1e7).contains(&reynolds) {
            return Err(EvalFailure::Domain(format!(
                "Reynolds number {reynolds} outside [1e5, 1e7]"
            )));
        }
        let alpha_eff = Self::effective_alpha(p.alpha, p.mu_y);
        let cl = 2.0 * PI * PI / 180.0 * alpha_eff * (1.0 + 0.8 * p.mu_y / 0.4);
        let cd = 0.01 * (1.0 + p.mu_x.abs() / 0.4) * (1e6 / reynolds).powf(0.2)
            + 0.05 * (p.alpha / 30.0).powi(2);
        Ok(AeroCoefficients { cl, cd })
    }

    fn is_reentrant(&self) -> bool {
        true
    }
}

/// Adapts an [`AeroModel`] to the problem evaluator interface:
/// `x = [μx, μy, β, α]`, `c = [Re_c]`.
pub struct AirfoilEvaluator<M> {
    model: M,
}

impl<M: AeroModel> AirfoilEvaluator<M> {
    pub fn new(model: M) -> Self {
        Self { model }
    }

    pub fn model(&self) -> &M {
        &self.model
    }
}

impl<M: AeroModel> Evaluator for AirfoilEvaluator<M> {
    fn evaluate(&self, x: &[f64], c: &[f64]) -> Result<Vec<f64>, EvalFailure> {
        let params = KtParams::from_slice(x).map_err(|e| EvalFailure::Domain(e.to_string()))?;
        let reynolds = *c
            .first()
            .ok_or_else(|| EvalFailure::Domain("missing Reynolds number".into()))?;
        let coefficients = self.model.coefficients(&params, reynolds)?;
        Ok(airfoil_objectives(coefficients)?.to_vec())
    }

    fn is_reentrant(&self) -> bool {
        self.model.is_reentrant()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kt(mu_x: f64, mu_y: f64, beta: f64, alpha: f64) -> KtParams {
        KtParams {
            mu_x,
            mu_y,
            beta,
            alpha,
        }
    }

    #[test]
    fn objective_examples() {
        let f = airfoil_objectives(AeroCoefficients { cl: 1.2, cd: 0.02 }).unwrap();
        assert!((f[0] + 0.6).abs() < 1e-15 && f[1] == -1.2);
        assert_eq!(
            airfoil_objectives(AeroCoefficients { cl: 0.0, cd: 0.02 }).unwrap(),
            [-0.0, -0.0]
        );
        assert!(airfoil_objectives(AeroCoefficients { cl: 1.0, cd: 0.0 }).is_err());
        let better = airfoil_objectives(AeroCoefficients { cl: 1.0, cd: 0.01 }).unwrap();
        let worse = airfoil_objectives(AeroCoefficients { cl: 1.0, cd: 0.02 }).unwrap();
        assert!(better[0] < worse[0]);
    }

    #[test]
    fn mock_examples() {
        let c = MockAero
            .coefficients(&kt(-0.1, 0.0, 10.0, 0.0), 1e6)
            .unwrap();
        assert_eq!(c.cl, 0.0);
        // Independent evaluation of the closed form at one point.
        let c = MockAero
            .coefficients(&kt(-0.2, 0.1, 10.0, 5.0), 1e6)
            .unwrap();
        let cl = 2.0 * std::f64::consts::PI.powi(2) / 180.0 * 5.0 * 1.2;
        let cd = 0.01 * 1.5 + 0.05 / 36.0;
        assert!((c.cl - cl).abs() < 1e-14 && (c.cd - cd).abs() < 1e-15);

        let mut last = f64::INFINITY;
        for re in [1e5, 3e5, 1e6, 3e6, 1e7] {
            let c = MockAero.coefficients(&kt(-0.3, 0.2, 5.0, 8.0), re).unwrap();
            assert!(c.cd < last);
            last = c.cd;
        }
        assert!(MockAero
            .coefficients(&kt(-0.3, 0.2, 5.0, 8.0), 5e4)
            .is_err());
        assert!(MockAero
            .coefficients(&kt(-0.5, 0.2, 5.0, 8.0), 1e6)
            .is_err());
    }

    #[test]
    fn stall_rolloff_is_continuous() {
        for mu_y in [0.0, 0.2, 0.4] {
            let stall = 15.0 + 10.0 * mu_y;
            let below = MockAero::effective_alpha(stall - 1e-9, mu_y);
            let above = MockAero::effective_alpha(stall + 1e-9, mu_y);
            assert!((below - above).abs() < 1e-8);
            assert!(MockAero::effective_alpha(30.0, mu_y) < 30.0);
            assert!(MockAero::effective_alpha(30.0, mu_y) > 0.0);
        }
    }

    #[test]
    fn evaluator_adapter() {
        let e = AirfoilEvaluator::new(MockAero);
        let f = e.evaluate(&[-0.2, 0.1, 10.0, 5.0], &[1e6]).unwrap();
        let c = MockAero
            .coefficients(&kt(-0.2, 0.1, 10.0, 5.0), 1e6)
            .unwrap();
        assert_eq!(f, vec![-(c.cl / c.cd) / 100.0, -c.cl]);
        assert!(e.is_reentrant());
        assert!(e.evaluate(&[-0.2, 0.1, 10.0], &[1e6]).is_err());
    }
}
