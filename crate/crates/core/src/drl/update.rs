//! One-step critic regression and deterministic policy-gradient updates.

use ndarray::{concatenate, s, Array1, Array2, ArrayView2, Axis};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::nn::{Adam, DenseNetwork};

use super::buffer::Batch;
use super::sample::{ActionVector, StateVector};

/// A differentiable action-value function `Q(s, a)`.
pub trait ActionValue {
    /// Values for each row and their gradients with respect to the action
    /// columns.
    fn value_and_action_grad(
        &self,
        states: ArrayView2<'_, f64>,
        actions: ArrayView2<'_, f64>,
    ) -> (Array1<f64>, Array2<f64>);
}

impl ActionValue for DenseNetwork {
    fn value_and_action_grad(
        &self,
        states: ArrayView2<f64>,
        actions: ArrayView2<f64>,
    ) -> (Array1<f64>, Array2<f64>) {
        let inputs =
            concatenate(Axis(1), &[states.view(), actions.view()]).expect("matching batch rows");
        let trace = self.forward_trace(inputs);
        let q = trace.output().column(0).to_owned();
        let ones = Array2::ones((states.nrows(), 1));
        let (_, dx) = self.backward(&trace, &ones, false);
        let grad = dx.slice(s![.., states.ncols()..]).to_owned();
        (q, grad)
    }
}

/// `clip(actor(s) + ε, -1, 1)` with `ε ~ N(0, σ²)` per component.
pub fn select_action<R: Rng + ?Sized>(
    actor: &DenseNetwork,
    state: &StateVector,
    sigma: f64,
    rng: &mut R,
) -> Result<ActionVector> {
    let mean = actor.forward(state.as_slice())?;
    let noisy = mean
        .into_iter()
        .map(|a| {
            let z: f64 = StandardNormal.sample(rng);
            a + sigma * z
        })
        .collect();
    Ok(ActionVector::clipped(noisy))
}

/// One Adam step on `mean((r - Q(s, a))²)`; returns the loss before the step.
pub fn critic_update(
    critic: &mut DenseNetwork,
    optimizer: &mut Adam,
    batch: &Batch,
) -> Result<f64> {
    let n = batch.rewards.len() as f64;
    let trace = critic.forward_trace(batch.inputs.clone());
    let q = trace.output().column(0);
    let residual = &q - &batch.rewards;
    let loss = residual.mapv(|e| e * e).sum() / n;
    if !loss.is_finite() {
        return Err(Error::NonFinite("critic loss"));
    }
    let upstream = residual.mapv(|e| 2.0 * e / n).insert_axis(Axis(1));
    let (grads, _) = critic.backward(&trace, &upstream, true);
    optimizer.step(critic, &grads.expect("parameter gradients requested"))?;
    Ok(loss)
}

/// One Adam ascent step of the actor on `mean Q(s, π(s))`, leaving the
/// critic untouched; returns the objective before the step.
pub fn actor_update<C: ActionValue + ?Sized>(
    actor: &mut DenseNetwork,
    optimizer: &mut Adam,
    critic: &C,
    states: ArrayView2<f64>,
) -> Result<f64> {
    let n = states.nrows() as f64;
    let trace = actor.forward_trace(states.to_owned());
    let (q, dq_da) = critic.value_and_action_grad(states, trace.output().view());
    let objective = q.sum() / n;
    if !objective.is_finite() {
        return Err(Error::NonFinite("actor objective"));
    }
    // Descent on -mean(Q).
    let upstream = dq_da.mapv(|g| -g / n);
    let (grads, _) = actor.backward(&trace, &upstream, true);
    optimizer.step(actor, &grads.expect("parameter gradients requested"))?;
    Ok(objective)
}
