//! Multi-condition multi-objective optimization with a single-step
//! actor-critic learner.
//!
//! A policy maps a state `(condition, weight vector, utopia point)` to a
//! decision vector. Every episode spends exactly one objective evaluation,
//! and the evaluation is reused for many weight vectors through Chebyshev
//! scalarization. After training, the evaluation records are decomposed over
//! the condition space into per-cell Pareto fronts.

pub mod airfoil;
pub mod drl;
pub mod error;
pub mod kursawe;
pub mod nn;
pub mod pareto;
pub mod problem;
pub mod run;
pub mod scalarization;
pub mod space;

pub use drl::{train, Engine, Trainer, TrainingConfig, TrainingRun};
pub use error::{Error, Result};
pub use nn::{DenseNetwork, OutputActivation};
pub use pareto::{hv_avg, hypervolume_2d, DecompositionGrid, FrontArchive, HvReport, ParetoFront};
pub use problem::{EvalFailure, EvaluationRecord, Evaluator, McmoProblem};
pub use run::{ProblemKind, RunConfig};
pub use scalarization::{chebyshev, UtopiaTracker, WeightVector};
pub use space::{BoxSpace, Scale};
