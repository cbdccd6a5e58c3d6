//! Actor and critic losses with their closed-form derivatives.

use super::normal::log_pdf;

/// Negative Gaussian log-likelihood of `price`, weighted by `signal`.
pub fn gaussian_actor_loss(price: f64, mu: f64, sigma: f64, signal: f64) -> f64 {
    if signal == 0.0 {
        return 0.0;
    }
    -log_pdf(price, mu, sigma) * signal
}

/// `(d loss / d mu, d loss / d sigma)` of [`gaussian_actor_loss`].
pub fn gaussian_actor_loss_grad(price: f64, mu: f64, sigma: f64, signal: f64) -> (f64, f64) {
    let dev = price - mu;
    let s2 = sigma * sigma;
    let d_mu = -dev / s2 * signal;
    let d_sigma = (1.0 / sigma - dev * dev / (s2 * sigma)) * signal;
    (d_mu, d_sigma)
}

/// Squared error between a Q-value and the observed cumulative reward.
pub fn critic_loss(q: f64, observed: f64) -> f64 {
    let e = observed - q;
    e * e
}

/// `d loss / d q` of [`critic_loss`].
pub fn critic_loss_grad(q: f64, observed: f64) -> f64 {
    2.0 * (q - observed)
}
