use alloc::vec;
use alloc::vec::Vec;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

/// ADAM optimizer state for one flat parameter vector.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Adam {
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub steps: u64,
    first: Vec<f64>,
    second: Vec<f64>,
}

impl Adam {
    pub fn new(params: usize) -> Self {
        Adam {
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            steps: 0,
            first: vec![0.0; params],
            second: vec![0.0; params],
        }
    }

    pub fn len(&self) -> usize {
        self.first.len()
    }

    pub fn is_empty(&self) -> bool {
        self.first.is_empty()
    }

    /// One descent step on `params` along `grads`.
    pub fn step(&mut self, params: &mut [f64], grads: &[f64], learning_rate: f64) {
        assert_eq!(params.len(), self.first.len());
        assert_eq!(grads.len(), self.first.len());
        self.steps += 1;
        let t = self.steps as i32;
        let c1 = 1.0 - libm::pow(self.beta1, t as f64);
        let c2 = 1.0 - libm::pow(self.beta2, t as f64);
        for i in 0..params.len() {
            let g = grads[i];
            self.first[i] = self.beta1 * self.first[i] + (1.0 - self.beta1) * g;
            self.second[i] = self.beta2 * self.second[i] + (1.0 - self.beta2) * g * g;
            let m_hat = self.first[i] / c1;
            let v_hat = self.second[i] / c2;
            params[i] -= learning_rate * m_hat / (libm::sqrt(v_hat) + self.epsilon);
        }
    }
}
