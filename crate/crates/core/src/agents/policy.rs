//! Gaussian pricing policies (actor networks) and Q-value critics.

use alloc::format;
use alloc::vec::Vec;

use rand::Rng;
#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use super::adam::Adam;
use super::features::{FeatureVector, ACTOR_FEATURES, CRITIC_FEATURES};
use super::loss::{critic_loss, critic_loss_grad, gaussian_actor_loss, gaussian_actor_loss_grad};
use super::nn::{Mlp, Tape};
use super::normal::sample_normal;
use crate::{Error, Result};

/// Lower bound on the policy's standard deviation.
pub const SIGMA_FLOOR: f64 = 1e-3;

fn softplus(z: f64) -> f64 {
    if z > 30.0 {
        z
    } else {
        libm::log1p(libm::exp(z))
    }
}

fn softplus_inverse(s: f64) -> f64 {
    s + libm::log(-libm::expm1(-s))
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + libm::exp(-z))
}

fn layer_sizes(inputs: usize, hidden: &[usize], outputs: usize) -> Vec<usize> {
    let mut sizes = Vec::with_capacity(hidden.len() + 2);
    sizes.push(inputs);
    sizes.extend_from_slice(hidden);
    sizes.push(outputs);
    sizes
}

/// Output of the actor's two heads for one feature vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Head {
    pub mu: f64,
    pub sigma: f64,
    /// True when the softplus output fell below the floor.
    pub clamped: bool,
    raw_sigma: f64,
}

/// A sampled price together with the distribution it came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Action {
    pub price: f64,
    pub mu: f64,
    pub sigma: f64,
}

/// Actor network mapping features to a Gaussian over prices:
/// output 0 is the mean, output 1 goes through softplus to give sigma.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct PolicyModel {
    pub net: Mlp,
    pub optimizer: Adam,
    pub sigma_floor: f64,
}

impl PolicyModel {
    /// He-initialized hidden layers; the output layer has zero weights and
    /// biases chosen so every input initially maps to `(bias_init, sigma_init)`.
    pub fn init<R: Rng + ?Sized>(hidden: &[usize], bias_init: f64, sigma_init: f64, rng: &mut R) -> Result<Self> {
        if !(sigma_init > 0.0 && sigma_init.is_finite()) {
            return Err(Error::InvalidConfig(format!("initial sigma must be positive, got {sigma_init}")));
        }
        if !bias_init.is_finite() {
            return Err(Error::InvalidConfig(format!("initial bias must be finite, got {bias_init}")));
        }
        let mut net = Mlp::he(&layer_sizes(ACTOR_FEATURES, hidden, 2), rng);
        let (w, b) = net.output_layer_mut();
        w.fill(0.0);
        b[0] = bias_init;
        b[1] = softplus_inverse(sigma_init);
        let optimizer = Adam::new(net.params().len());
        Ok(PolicyModel {
            net,
            optimizer,
            sigma_floor: SIGMA_FLOOR,
        })
    }

    pub fn from_network(net: Mlp) -> Result<Self> {
        if net.inputs() != ACTOR_FEATURES || net.outputs() != 2 {
            return Err(Error::Shape(format!(
                "actor needs {ACTOR_FEATURES} inputs and 2 outputs, got {:?}",
                net.sizes()
            )));
        }
        let optimizer = Adam::new(net.params().len());
        Ok(PolicyModel {
            net,
            optimizer,
            sigma_floor: SIGMA_FLOOR,
        })
    }

    fn head_from_outputs(&self, out: &[f64]) -> Head {
        let s = softplus(out[1]);
        let clamped = s.is_nan() || s < self.sigma_floor;
        Head {
            mu: out[0],
            sigma: if clamped { self.sigma_floor } else { s },
            clamped,
            raw_sigma: out[1],
        }
    }

    pub fn head(&self, features: &FeatureVector, tape: &mut Tape) -> Head {
        let out = self.net.forward(features.as_slice(), tape);
        self.head_from_outputs(out)
    }

    pub fn mean_sigma(&self, features: &FeatureVector) -> (f64, f64) {
        let h = self.head(features, &mut Tape::default());
        (h.mu, h.sigma)
    }

    /// Draws a price from the policy by inverse-CDF sampling.
    pub fn sample<R: Rng + ?Sized>(&self, features: &FeatureVector, rng: &mut R, tape: &mut Tape) -> Result<Action> {
        let head = self.head(features, tape);
        let price = sample_normal(rng, head.mu, head.sigma);
        if !(head.mu.is_finite() && head.sigma.is_finite() && price.is_finite()) {
            return Err(Error::Diverged(format!(
                "policy produced mu={} sigma={} price={}",
                head.mu, head.sigma, price
            )));
        }
        Ok(Action {
            price,
            mu: head.mu,
            sigma: head.sigma,
        })
    }

    /// Adds the gradient of the weighted Gaussian loss at `price` to `grad`
    /// and returns the loss.
    pub fn accumulate_gradient(
        &self,
        features: &FeatureVector,
        price: f64,
        signal: f64,
        tape: &mut Tape,
        grad: &mut [f64],
    ) -> f64 {
        let head = self.head(features, tape);
        if signal == 0.0 {
            return 0.0;
        }
        let (d_mu, d_sigma) = gaussian_actor_loss_grad(price, head.mu, head.sigma, signal);
        let d_raw = if head.clamped { 0.0 } else { d_sigma * sigmoid(head.raw_sigma) };
        self.net.backward(tape, &[d_mu, d_raw], grad);
        gaussian_actor_loss(price, head.mu, head.sigma, signal)
    }

    /// Loss as a function of the current parameters (used by gradient checks).
    pub fn loss(&self, features: &FeatureVector, price: f64, signal: f64) -> f64 {
        let (mu, sigma) = self.mean_sigma(features);
        gaussian_actor_loss(price, mu, sigma, signal)
    }
}

/// Critic estimating the cumulative reward of a price in a state.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct CriticModel {
    pub net: Mlp,
    pub optimizer: Adam,
}

impl CriticModel {
    /// He-initialized hidden layers with an all-zero output layer, so the
    /// initial estimate is 0 everywhere.
    pub fn init<R: Rng + ?Sized>(hidden: &[usize], rng: &mut R) -> Self {
        let mut net = Mlp::he(&layer_sizes(CRITIC_FEATURES, hidden, 1), rng);
        let (w, b) = net.output_layer_mut();
        w.fill(0.0);
        b.fill(0.0);
        let optimizer = Adam::new(net.params().len());
        CriticModel { net, optimizer }
    }

    pub fn from_network(net: Mlp) -> Result<Self> {
        if net.inputs() != CRITIC_FEATURES || net.outputs() != 1 {
            return Err(Error::Shape(format!(
                "critic needs {CRITIC_FEATURES} inputs and 1 output, got {:?}",
                net.sizes()
            )));
        }
        let optimizer = Adam::new(net.params().len());
        Ok(CriticModel { net, optimizer })
    }

    pub fn q(&self, features: &FeatureVector, tape: &mut Tape) -> f64 {
        self.net.forward(features.as_slice(), tape)[0]
    }

    pub fn value(&self, features: &FeatureVector) -> f64 {
        self.q(features, &mut Tape::default())
    }

    pub fn accumulate_gradient(&self, features: &FeatureVector, observed: f64, tape: &mut Tape, grad: &mut [f64]) -> f64 {
        let q = self.q(features, tape);
        self.net.backward(tape, &[critic_loss_grad(q, observed)], grad);
        critic_loss(q, observed)
    }

    pub fn loss(&self, features: &FeatureVector, observed: f64) -> f64 {
        critic_loss(self.value(features), observed)
    }
}
