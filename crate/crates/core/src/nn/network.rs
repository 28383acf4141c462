use ndarray::{Array1, Array2, ArrayView2, Axis, Zip};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputActivation {
    Tanh,
    Identity,
}

/// Fully connected layer computing `x · W + b`, with `W` stored as
/// `(fan_in, fan_out)` so rows of a batch multiply on the left.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
}

impl DenseLayer {
    pub fn zeros(fan_in: usize, fan_out: usize) -> Self {
        Self {
            weights: Array2::zeros((fan_in, fan_out)),
            bias: Array1::zeros(fan_out),
        }
    }

    pub fn param_count(&self) -> usize {
        self.weights.len() + self.bias.len()
    }
}

/// Parameter gradients, laid out like [`DenseNetwork::layers`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<DenseLayer>,
}

impl Gradients {
    pub fn is_finite(&self) -> bool {
        self.layers.iter().all(|l| {
            l.weights.iter().all(|v| v.is_finite()) && l.bias.iter().all(|v| v.is_finite())
        })
    }
}

/// Cached activations of a batched forward pass, consumed by
/// [`DenseNetwork::backward`].
#[derive(Debug, Clone)]
pub struct ForwardTrace {
    /// Input to each layer; `inputs[0]` is the batch itself.
    inputs: Vec<Array2<f64>>,
    output: Array2<f64>,
}

impl ForwardTrace {
    pub fn output(&self) -> &Array2<f64> {
        &self.output
    }
}

/// Multilayer perceptron with Leaky-ReLU hidden units.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseNetwork {
    widths: Vec<usize>,
    layers: Vec<DenseLayer>,
    leaky_slope: f64,
    output: OutputActivation,
}

impl DenseNetwork {
    /// Fan-in scaled uniform weights `U(-1/sqrt(fan_in), 1/sqrt(fan_in))`,
    /// zero biases.
    pub fn new<R: Rng + ?Sized>(
        widths: &[usize],
        output: OutputActivation,
        leaky_slope: f64,
        rng: &mut R,
    ) -> Result<Self> {
        let mut net = Self::zeros(widths, output, leaky_slope)?;
        for layer in &mut net.layers {
            let bound = 1.0 / (layer.weights.nrows() as f64).sqrt();
            layer
                .weights
                .mapv_inplace(|_| rng.gen_range(-bound..=bound));
        }
        Ok(net)
    }

    pub fn zeros(widths: &[usize], output: OutputActivation, leaky_slope: f64) -> Result<Self> {
        if widths.len() < 2 || widths.contains(&0) {
            return Err(Error::Config(format!(
                "network widths must list at least input and output, all positive: {widths:?}"
            )));
        }
        if !(leaky_slope.is_finite() && leaky_slope >= 0.0) {
            return Err(Error::Config(format!(
                "leaky slope must be finite and non-negative, got {leaky_slope}"
            )));
        }
        let layers = widths
            .windows(2)
            .map(|w| DenseLayer::zeros(w[0], w[1]))
            .collect();
        Ok(Self {
            widths: widths.to_vec(),
            layers,
            leaky_slope,
            output,
        })
    }

    pub(crate) fn from_parts(
        widths: Vec<usize>,
        layers: Vec<DenseLayer>,
        leaky_slope: f64,
        output: OutputActivation,
    ) -> Result<Self> {
        let expected = Self::zeros(&widths, output, leaky_slope)?;
        check_len(expected.layers.len(), layers.len())?;
        for (e, l) in expected.layers.iter().zip(&layers) {
            if e.weights.dim() != l.weights.dim() || e.bias.len() != l.bias.len() {
                return Err(Error::Config("layer shapes do not match widths".into()));
            }
        }
        Ok(Self {
            widths,
            layers,
            leaky_slope,
            output,
        })
    }

    pub fn widths(&self) -> &[usize] {
        &self.widths
    }

    pub fn input_width(&self) -> usize {
        self.widths[0]
    }

    pub fn output_width(&self) -> usize {
        *self.widths.last().expect("at least two widths")
    }

    pub fn leaky_slope(&self) -> f64 {
        self.leaky_slope
    }

    pub fn output_activation(&self) -> OutputActivation {
        self.output
    }

    pub fn layers(&self) -> &[DenseLayer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [DenseLayer] {
        &mut self.layers
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(DenseLayer::param_count).sum()
    }

    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>> {
        check_len(self.input_width(), input.len())?;
        let batch = ArrayView2::from_shape((1, input.len()), input).expect("row vector");
        Ok(self.forward_batch(batch).into_raw_vec_and_offset().0)
    }

    /// Forward pass over the rows of `batch` without keeping activations.
    pub fn forward_batch(&self, batch: ArrayView2<f64>) -> Array2<f64> {
        assert_eq!(batch.ncols(), self.input_width(), "batch width");
        let last = self.layers.len() - 1;
        let mut x = batch.to_owned();
        for (i, layer) in self.layers.iter().enumerate() {
            let mut z = x.dot(&layer.weights);
            z += &layer.bias;
            if i < last {
                leaky_inplace(&mut z, self.leaky_slope);
            } else if self.output == OutputActivation::Tanh {
                z.mapv_inplace(f64::tanh);
            }
            x = z;
        }
        x
    }

    /// Forward pass keeping what [`backward`](Self::backward) needs.
    pub fn forward_trace(&self, batch: Array2<f64>) -> ForwardTrace {
        assert_eq!(batch.ncols(), self.input_width(), "batch width");
        let last = self.layers.len() - 1;
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut x = batch;
        for layer in &self.layers[..last] {
            let mut z = x.dot(&layer.weights);
            z += &layer.bias;
            inputs.push(x);
            leaky_inplace(&mut z, self.leaky_slope);
            x = z;
        }
        let mut output = x.dot(&self.layers[last].weights);
        output += &self.layers[last].bias;
        inputs.push(x);
        if self.output == OutputActivation::Tanh {
            output.mapv_inplace(f64::tanh);
        }
        ForwardTrace { inputs, output }
    }

    /// Reverse-mode pass for the scalar `sum(output ⊙ upstream)`.
    ///
    /// Returns parameter gradients (skipped when `with_params` is false) and
    /// the gradient with respect to the batch input.
    pub fn backward(
        &self,
        trace: &ForwardTrace,
        upstream: &Array2<f64>,
        with_params: bool,
    ) -> (Option<Gradients>, Array2<f64>) {
        assert_eq!(upstream.dim(), trace.output.dim(), "upstream shape");
        let mut delta = match self.output {
            OutputActivation::Tanh => {
                let mut d = upstream.clone();
                Zip::from(&mut d)
                    .and(&trace.output)
                    .for_each(|d, &y| *d *= 1.0 - y * y);
                d
            }
            OutputActivation::Identity => upstream.clone(),
        };

        let mut grads = with_params.then(|| Vec::with_capacity(self.layers.len()));
        for (i, layer) in self.layers.iter().enumerate().rev() {
            let x = &trace.inputs[i];
            if let Some(g) = grads.as_mut() {
                g.push(DenseLayer {
                    weights: x.t().dot(&delta),
                    bias: delta.sum_axis(Axis(0)),
                });
            }
            let mut dx = delta.dot(&layer.weights.t());
            if i > 0 {
                // `x` is the post-activation of the previous hidden layer; its
                // sign matches the pre-activation because the slope is positive.
                let slope = self.leaky_slope;
                Zip::from(&mut dx).and(x).for_each(|d, &a| {
                    if a <= 0.0 {
                        *d *= slope;
                    }
                });
            }
            delta = dx;
        }
        let grads = grads.map(|mut layers| {
            layers.reverse();
            Gradients { layers }
        });
        (grads, delta)
    }

    /// Gradients of `output · upstream` for a single input.
    pub fn gradients(&self, input: &[f64], upstream: &[f64]) -> Result<(Gradients, Vec<f64>)> {
        check_len(self.input_width(), input.len())?;
        check_len(self.output_width(), upstream.len())?;
        let batch = Array2::from_shape_vec((1, input.len()), input.to_vec()).expect("row");
        let up = Array2::from_shape_vec((1, upstream.len()), upstream.to_vec()).expect("row");
        let trace = self.forward_trace(batch);
        let (grads, dx) = self.backward(&trace, &up, true);
        Ok((
            grads.expect("requested parameter gradients"),
            dx.into_raw_vec_and_offset().0,
        ))
    }
}

fn leaky_inplace(z: &mut Array2<f64>, slope: f64) {
    z.mapv_inplace(|v| if v > 0.0 { v } else { slope * v });
}
