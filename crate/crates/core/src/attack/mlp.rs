//! Feed-forward response predictor: ReLU hidden layers, logistic outputs,
//! mean per-bit binary cross-entropy.
//!
//! Parameters live in one flat vector. Layer `l` occupies
//! `[weights (out x in, row-major) | biases (out)]` starting at
//! `offsets[l]`.

use rand::Rng;

use crate::error::{domain, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct LayerShape {
    inputs: usize,
    outputs: usize,
    offset: usize,
}

impl LayerShape {
    fn weights(&self) -> std::ops::Range<usize> {
        self.offset..self.offset + self.inputs * self.outputs
    }

    fn biases(&self) -> std::ops::Range<usize> {
        let start = self.offset + self.inputs * self.outputs;
        start..start + self.outputs
    }
}

/// Multi-layer perceptron with a flat parameter vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    sizes: Vec<usize>,
    layers: Vec<LayerShape>,
    params: Vec<f64>,
}

/// Per-layer activations for one batch, reused across steps.
#[derive(Debug, Default)]
pub(crate) struct Workspace {
    acts: Vec<Vec<f64>>,
    delta: Vec<f64>,
    delta_prev: Vec<f64>,
}

impl Mlp {
    /// All-zero parameters.
    pub fn zeros(sizes: &[usize]) -> Result<Self> {
        if sizes.len() < 2 || sizes.contains(&0) {
            return Err(domain(format!("invalid layer sizes {sizes:?}")));
        }
        let mut offset = 0;
        let layers = sizes
            .windows(2)
            .map(|w| {
                let shape = LayerShape {
                    inputs: w[0],
                    outputs: w[1],
                    offset,
                };
                offset += w[0] * w[1] + w[1];
                shape
            })
            .collect();
        Ok(Self {
            sizes: sizes.to_vec(),
            layers,
            params: vec![0.0; offset],
        })
    }

    /// Glorot-uniform weights in `±√(6 / (fan_in + fan_out))`, zero biases.
    pub fn glorot<R: Rng + ?Sized>(sizes: &[usize], rng: &mut R) -> Result<Self> {
        let mut mlp = Self::zeros(sizes)?;
        for layer in mlp.layers.clone() {
            let limit = (6.0 / (layer.inputs + layer.outputs) as f64).sqrt();
            for w in &mut mlp.params[layer.weights()] {
                *w = rng.random_range(-limit..limit);
            }
        }
        Ok(mlp)
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn input_dim(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.sizes.last().expect("at least two layers")
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    /// Weights of layer `l`, row-major `(outputs, inputs)`.
    pub fn weights(&self, l: usize) -> &[f64] {
        &self.params[self.layers[l].weights()]
    }

    pub fn biases(&self, l: usize) -> &[f64] {
        &self.params[self.layers[l].biases()]
    }

    pub fn biases_mut(&mut self, l: usize) -> &mut [f64] {
        let r = self.layers[l].biases();
        &mut self.params[r]
    }

    pub fn weights_mut(&mut self, l: usize) -> &mut [f64] {
        let r = self.layers[l].weights();
        &mut self.params[r]
    }

    pub fn n_layers(&self) -> usize {
        self.layers.len()
    }

    /// Forward pass over `batch` rows of `inputs`; fills `ws.acts` with the
    /// input copy, hidden ReLU outputs, and the output logits.
    fn forward_batch(&self, inputs: &[f64], batch: usize, ws: &mut Workspace) {
        ws.acts.resize_with(self.sizes.len(), Vec::new);
        ws.acts[0].clear();
        ws.acts[0].extend_from_slice(&inputs[..batch * self.input_dim()]);
        let last = self.layers.len() - 1;
        for (l, layer) in self.layers.iter().enumerate() {
            let (prev, rest) = ws.acts.split_at_mut(l + 1);
            let a_in = &prev[l];
            let a_out = &mut rest[0];
            a_out.clear();
            a_out.resize(batch * layer.outputs, 0.0);
            let w = &self.params[layer.weights()];
            let b = &self.params[layer.biases()];
            for s in 0..batch {
                let x = &a_in[s * layer.inputs..(s + 1) * layer.inputs];
                let out = &mut a_out[s * layer.outputs..(s + 1) * layer.outputs];
                for (o, z) in out.iter_mut().enumerate() {
                    let row = &w[o * layer.inputs..(o + 1) * layer.inputs];
                    let v = b[o] + row.iter().zip(x).map(|(p, q)| p * q).sum::<f64>();
                    *z = if l < last { v.max(0.0) } else { v };
                }
            }
        }
    }

    /// Output logits for one input.
    pub fn logits(&self, input: &[f64]) -> Vec<f64> {
        let mut ws = Workspace::default();
        self.forward_batch(input, 1, &mut ws);
        ws.acts.pop().expect("output layer")
    }

    /// Per-bit probabilities for one input.
    pub fn predict(&self, input: &[f64]) -> Vec<f64> {
        self.logits(input).into_iter().map(sigmoid).collect()
    }

    /// Smallest `|pre-activation|` of any hidden unit over a batch.
    ///
    /// ReLU is not differentiable at zero, so finite differences are only
    /// meaningful when this exceeds the step size.
    pub fn kink_margin(&self, inputs: &[f64], batch: usize) -> f64 {
        let mut margin = f64::INFINITY;
        let hidden = &self.layers[..self.layers.len() - 1];
        for s in 0..batch {
            let mut a = inputs[s * self.input_dim()..(s + 1) * self.input_dim()].to_vec();
            for layer in hidden {
                let w = &self.params[layer.weights()];
                let b = &self.params[layer.biases()];
                a = (0..layer.outputs)
                    .map(|o| {
                        let row = &w[o * layer.inputs..(o + 1) * layer.inputs];
                        let v = b[o] + row.iter().zip(&a).map(|(p, q)| p * q).sum::<f64>();
                        margin = margin.min(v.abs());
                        v.max(0.0)
                    })
                    .collect();
            }
        }
        margin
    }

    /// Mean binary cross-entropy over `batch · output_dim` targets.
    pub fn loss(&self, inputs: &[f64], targets: &[f64], batch: usize) -> f64 {
        let mut ws = Workspace::default();
        self.forward_batch(inputs, batch, &mut ws);
        mean_bce(ws.acts.last().expect("output layer"), targets)
    }

    /// Loss and its gradient with respect to every parameter.
    ///
    /// `grad` is overwritten; it must have `params().len()` entries.
    pub(crate) fn loss_and_gradient(
        &self,
        inputs: &[f64],
        targets: &[f64],
        batch: usize,
        grad: &mut [f64],
        ws: &mut Workspace,
    ) -> f64 {
        self.forward_batch(inputs, batch, ws);
        let out_dim = self.output_dim();
        let logits = ws.acts.last().expect("output layer");
        let loss = mean_bce(logits, targets);
        let scale = 1.0 / (batch * out_dim) as f64;

        grad.fill(0.0);
        ws.delta.clear();
        ws.delta.extend(
            logits
                .iter()
                .zip(&targets[..batch * out_dim])
                .map(|(&z, &y)| (sigmoid(z) - y) * scale),
        );

        for l in (0..self.layers.len()).rev() {
            let layer = self.layers[l];
            let a_in = &ws.acts[l];
            let w = &self.params[layer.weights()];
            let (gw, gb) = grad[layer.offset..layer.biases().end].split_at_mut(layer.inputs * layer.outputs);
            for s in 0..batch {
                let d = &ws.delta[s * layer.outputs..(s + 1) * layer.outputs];
                let x = &a_in[s * layer.inputs..(s + 1) * layer.inputs];
                for (o, &dv) in d.iter().enumerate() {
                    gb[o] += dv;
                    if dv != 0.0 {
                        let row = &mut gw[o * layer.inputs..(o + 1) * layer.inputs];
                        for (g, &xv) in row.iter_mut().zip(x) {
                            *g += dv * xv;
                        }
                    }
                }
            }
            if l == 0 {
                break;
            }
            // Back through the weights and the ReLU of the layer below.
            ws.delta_prev.clear();
            ws.delta_prev.resize(batch * layer.inputs, 0.0);
            for s in 0..batch {
                let d = &ws.delta[s * layer.outputs..(s + 1) * layer.outputs];
                let dp = &mut ws.delta_prev[s * layer.inputs..(s + 1) * layer.inputs];
                for (o, &dv) in d.iter().enumerate() {
                    if dv != 0.0 {
                        let row = &w[o * layer.inputs..(o + 1) * layer.inputs];
                        for (p, &wv) in dp.iter_mut().zip(row) {
                            *p += dv * wv;
                        }
                    }
                }
                let x = &a_in[s * layer.inputs..(s + 1) * layer.inputs];
                for (p, &xv) in dp.iter_mut().zip(x) {
                    if xv <= 0.0 {
                        *p = 0.0;
                    }
                }
            }
            std::mem::swap(&mut ws.delta, &mut ws.delta_prev);
        }
        loss
    }
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Numerically stable `BCE(sigmoid(z), y)`.
fn bce_with_logit(z: f64, y: f64) -> f64 {
    z.max(0.0) - z * y + (-z.abs()).exp().ln_1p()
}

fn mean_bce(logits: &[f64], targets: &[f64]) -> f64 {
    let n = logits.len();
    logits
        .iter()
        .zip(&targets[..n])
        .map(|(&z, &y)| bce_with_logit(z, y))
        .sum::<f64>()
        / n as f64
}

/// Adam optimizer state over a flat parameter vector.
#[derive(Debug, Clone)]
pub(crate) struct Adam {
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    t: i32,
    m: Vec<f64>,
    v: Vec<f64>,
}

impl Adam {
    pub(crate) fn new(n: usize, lr: f64) -> Self {
        Self {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            t: 0,
            m: vec![0.0; n],
            v: vec![0.0; n],
        }
    }

    pub(crate) fn step(&mut self, params: &mut [f64], grad: &[f64]) {
        self.t += 1;
        let c1 = 1.0 - self.beta1.powi(self.t);
        let c2 = 1.0 - self.beta2.powi(self.t);
        for (((p, &g), m), v) in params.iter_mut().zip(grad).zip(&mut self.m).zip(&mut self.v) {
            *m = self.beta1 * *m + (1.0 - self.beta1) * g;
            *v = self.beta2 * *v + (1.0 - self.beta2) * g * g;
            *p -= self.lr * (*m / c1) / ((*v / c2).sqrt() + self.eps);
        }
    }
}
