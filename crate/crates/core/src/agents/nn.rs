//! Small dense feed-forward networks with manual backpropagation.
//!
//! Parameters live in one flat vector so the optimizer and checkpoints can
//! treat a network as a plain array. Per layer the layout is the row-major
//! weight matrix (`outputs x inputs`) followed by the bias vector. Hidden
//! layers use ReLU, the output layer is linear.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use super::normal::sample_normal;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Mlp {
    sizes: Vec<usize>,
    params: Vec<f64>,
}

/// Activations recorded by a forward pass, reused across calls.
#[derive(Debug, Clone, Default)]
pub struct Tape {
    acts: Vec<Vec<f64>>,
    delta: Vec<f64>,
    next_delta: Vec<f64>,
}

fn param_count(sizes: &[usize]) -> usize {
    sizes.windows(2).map(|w| w[1] * w[0] + w[1]).sum()
}

impl Mlp {
    /// All-zero network. `sizes` lists input width, hidden widths, output width.
    pub fn zeros(sizes: &[usize]) -> Self {
        assert!(sizes.len() >= 2, "a network needs an input and an output layer");
        assert!(sizes.iter().all(|&s| s > 0), "layer widths must be positive");
        Mlp {
            sizes: sizes.to_vec(),
            params: vec![0.0; param_count(sizes)],
        }
    }

    /// He-normal weights (std `sqrt(2 / fan_in)`), zero biases.
    pub fn he<R: Rng + ?Sized>(sizes: &[usize], rng: &mut R) -> Self {
        let mut net = Self::zeros(sizes);
        let mut offset = 0;
        for w in sizes.windows(2) {
            let (fan_in, fan_out) = (w[0], w[1]);
            let std = libm::sqrt(2.0 / fan_in as f64);
            for p in &mut net.params[offset..offset + fan_in * fan_out] {
                *p = sample_normal(rng, 0.0, std);
            }
            offset += fan_in * fan_out + fan_out;
        }
        net
    }

    pub fn from_parts(sizes: Vec<usize>, params: Vec<f64>) -> Result<Self> {
        if sizes.len() < 2 || sizes.contains(&0) {
            return Err(Error::Shape(alloc::format!("invalid layer sizes {sizes:?}")));
        }
        if params.len() != param_count(&sizes) {
            return Err(Error::Shape(alloc::format!(
                "{} parameters for layer sizes {sizes:?} (expected {})",
                params.len(),
                param_count(&sizes)
            )));
        }
        Ok(Mlp { sizes, params })
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn inputs(&self) -> usize {
        self.sizes[0]
    }

    pub fn outputs(&self) -> usize {
        *self.sizes.last().unwrap()
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn is_finite(&self) -> bool {
        self.params.iter().all(|p| p.is_finite())
    }

    /// Weight matrix and bias of the output layer.
    pub fn output_layer_mut(&mut self) -> (&mut [f64], &mut [f64]) {
        let n = self.sizes.len();
        let (fan_in, fan_out) = (self.sizes[n - 2], self.sizes[n - 1]);
        let start = self.params.len() - (fan_in * fan_out + fan_out);
        let (w, b) = self.params[start..].split_at_mut(fan_in * fan_out);
        (w, b)
    }

    /// Runs the network, leaving the activations on `tape` for `backward`.
    pub fn forward<'t>(&self, input: &[f64], tape: &'t mut Tape) -> &'t [f64] {
        debug_assert_eq!(input.len(), self.inputs());
        let layers = self.sizes.len() - 1;
        tape.acts.resize_with(layers + 1, Vec::new);
        tape.acts[0].clear();
        tape.acts[0].extend_from_slice(input);
        let mut offset = 0;
        for l in 0..layers {
            let (fan_in, fan_out) = (self.sizes[l], self.sizes[l + 1]);
            let weights = &self.params[offset..offset + fan_in * fan_out];
            let bias = &self.params[offset + fan_in * fan_out..offset + fan_in * fan_out + fan_out];
            offset += fan_in * fan_out + fan_out;
            let (prev, rest) = tape.acts.split_at_mut(l + 1);
            let x = &prev[l];
            let out = &mut rest[0];
            out.clear();
            let hidden = l + 1 < layers;
            for o in 0..fan_out {
                let row = &weights[o * fan_in..(o + 1) * fan_in];
                let mut z = bias[o];
                for (w, xi) in row.iter().zip(x.iter()) {
                    z += w * xi;
                }
                out.push(if hidden && z < 0.0 { 0.0 } else { z });
            }
        }
        &tape.acts[layers]
    }

    /// Convenience forward pass with a throwaway tape.
    pub fn eval(&self, input: &[f64]) -> Vec<f64> {
        let mut tape = Tape::default();
        self.forward(input, &mut tape).to_vec()
    }

    /// Accumulates `d loss / d params` into `grad`, given `d loss / d output`
    /// and the tape of the matching forward pass.
    pub fn backward(&self, tape: &mut Tape, grad_output: &[f64], grad: &mut [f64]) {
        debug_assert_eq!(grad.len(), self.params.len());
        let layers = self.sizes.len() - 1;
        let Tape {
            acts,
            delta,
            next_delta,
        } = tape;
        delta.clear();
        delta.extend_from_slice(grad_output);
        let mut end = self.params.len();
        for l in (0..layers).rev() {
            let (fan_in, fan_out) = (self.sizes[l], self.sizes[l + 1]);
            let start = end - (fan_in * fan_out + fan_out);
            let x = &acts[l];
            {
                let (gw, gb) = grad[start..end].split_at_mut(fan_in * fan_out);
                for o in 0..fan_out {
                    let d = delta[o];
                    if d == 0.0 {
                        continue;
                    }
                    gb[o] += d;
                    for (g, xi) in gw[o * fan_in..(o + 1) * fan_in].iter_mut().zip(x.iter()) {
                        *g += d * xi;
                    }
                }
            }
            if l > 0 {
                let weights = &self.params[start..start + fan_in * fan_out];
                next_delta.clear();
                next_delta.resize(fan_in, 0.0);
                for o in 0..fan_out {
                    let d = delta[o];
                    if d == 0.0 {
                        continue;
                    }
                    for (nd, w) in next_delta.iter_mut().zip(&weights[o * fan_in..(o + 1) * fan_in]) {
                        *nd += d * w;
                    }
                }
                // ReLU derivative: the recorded activation is zero iff inactive.
                for (nd, a) in next_delta.iter_mut().zip(x.iter()) {
                    if *a <= 0.0 {
                        *nd = 0.0;
                    }
                }
                core::mem::swap(delta, next_delta);
            }
            end = start;
        }
    }
}
