//! Kármán–Trefftz airfoil design under a chord Reynolds number condition.

mod aero;
mod cache;
mod geometry;
pub mod xfoil;

pub use aero::{airfoil_objectives, AeroCoefficients, AeroModel, AirfoilEvaluator, MockAero};
pub use cache::{cache_key, AeroCache, CacheKey, CachedAero};
pub use geometry::{kt_map, kt_transform, trailing_edge_angle, AirfoilGeometry, KtParams};
pub use xfoil::{XfoilClient, XfoilConfig};

use crate::problem::McmoProblem;
use crate::space::{BoxSpace, Scale};

/// HV reference point: zero lift, zero lift-to-drag ratio.
pub const REFERENCE: [f64; 2] = [0.0, 0.0];

/// Ω over `[μx, μy, β, α]`.
pub fn decision_space() -> BoxSpace {
    BoxSpace::linear(&KtParams::BOUNDS).expect("valid box")
}

/// Φ over Re_c, normalized in log10.
pub fn condition_space() -> BoxSpace {
    BoxSpace::new(vec![1e5], vec![1e7], vec![Scale::Log10]).expect("valid box")
}

/// The airfoil problem with objectives `(−(C_L/C_D)/100, −C_L)` from `model`.
pub fn airfoil_problem<M: AeroModel + 'static>(name: &str, model: M) -> McmoProblem {
    McmoProblem::new(
        name,
        decision_space(),
        condition_space(),
        2,
        Box::new(AirfoilEvaluator::new(model)),
    )
    .expect("two objectives")
}

/// The airfoil problem with the closed-form mock model.
pub fn mock_airfoil_problem() -> McmoProblem {
    airfoil_problem("airfoil-mock", MockAero)
}
