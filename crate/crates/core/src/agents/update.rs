//! Per-episode strategy updates.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use super::features::{FeatureScale, FeatureVector};
use super::nn::Tape;
use super::policy::{Action, CriticModel, PolicyModel};
use super::profile::RiskProfile;
use super::signal::{compute_signal, Algorithm};
use crate::log::{AgentView, EpisodeLog};
use crate::{Error, Result};

/// How per-observation gradients are combined before the optimizer step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum UpdateMode {
    #[default]
    Sum,
    Mean,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct UpdateStats {
    pub observations: usize,
    pub actor_loss: f64,
    pub critic_loss: f64,
}

/// A learning trader: actor, optional critic and its hyperparameters.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Learner {
    pub actor: PolicyModel,
    pub critic: Option<CriticModel>,
    pub algorithm: Algorithm,
    pub profile: RiskProfile,
    pub scale: FeatureScale,
    pub update_mode: UpdateMode,
}

impl Learner {
    /// Builds the networks; a critic is only created when the algorithm needs one.
    pub fn new<R: Rng + ?Sized>(
        profile: RiskProfile,
        algorithm: Algorithm,
        actor_hidden: &[usize],
        critic_hidden: &[usize],
        scale: FeatureScale,
        rng: &mut R,
    ) -> Result<Self> {
        if !(profile.learning_rate > 0.0 && profile.learning_rate.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "learning rate must be positive, got {}",
                profile.learning_rate
            )));
        }
        if !(profile.penalty_slope >= 0.0 && profile.penalty_slope.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "penalty slope must be non-negative, got {}",
                profile.penalty_slope
            )));
        }
        let actor = PolicyModel::init(actor_hidden, profile.bias_init, profile.sigma_init, rng)?;
        let critic = algorithm.uses_critic().then(|| CriticModel::init(critic_hidden, rng));
        Ok(Learner {
            actor,
            critic,
            algorithm,
            profile,
            scale,
            update_mode: UpdateMode::default(),
        })
    }

    pub fn act<R: Rng + ?Sized>(&self, features: &FeatureVector, rng: &mut R, tape: &mut Tape) -> Result<Action> {
        self.actor.sample(features, rng, tape)
    }

    fn critic_input(&self, features: &FeatureVector, price: f64) -> FeatureVector {
        features.with_action(self.scale.action(price))
    }

    /// Summed (or averaged) gradients over the view's observations followed by
    /// one ADAM step per network.
    pub fn update(&mut self, view: &AgentView<'_>) -> Result<UpdateStats> {
        let baselines = if self.algorithm == Algorithm::Baseline {
            view.baselines()
        } else {
            Vec::new()
        };
        let mut tape = Tape::default();
        let mut actor_grad = vec![0.0; self.actor.net.params().len()];
        let mut critic_grad = vec![0.0; self.critic.as_ref().map_or(0, |c| c.net.params().len())];
        let mut stats = UpdateStats::default();
        for obs in view.observations() {
            stats.observations += 1;
            let (q_sampled, q_mean) = match &self.critic {
                Some(critic) => {
                    let sampled = self.critic_input(&obs.features, obs.price);
                    let q = critic.q(&sampled, &mut tape);
                    let q_mean = if self.algorithm == Algorithm::Advantage {
                        critic.q(&self.critic_input(&obs.features, obs.mu), &mut tape)
                    } else {
                        0.0
                    };
                    stats.critic_loss += critic.accumulate_gradient(&sampled, obs.vhat, &mut tape, &mut critic_grad);
                    (q, q_mean)
                }
                None => (0.0, 0.0),
            };
            let baseline = baselines.get(obs.due as usize).copied().unwrap_or(0.0);
            let signal = compute_signal(self.algorithm, obs.vhat, baseline, q_sampled, q_mean);
            stats.actor_loss += self
                .actor
                .accumulate_gradient(&obs.features, obs.price, signal, &mut tape, &mut actor_grad);
        }
        if self.update_mode == UpdateMode::Mean && stats.observations > 0 {
            let n = stats.observations as f64;
            actor_grad.iter_mut().chain(critic_grad.iter_mut()).for_each(|g| *g /= n);
        }
        if !actor_grad.iter().chain(&critic_grad).all(|g| g.is_finite()) {
            return Err(Error::Diverged(format!(
                "non-finite gradient after {} observations",
                stats.observations
            )));
        }
        let lr = self.profile.learning_rate;
        let actor = &mut self.actor;
        actor.optimizer.step(actor.net.params_mut(), &actor_grad, lr);
        if let Some(critic) = &mut self.critic {
            critic.optimizer.step(critic.net.params_mut(), &critic_grad, lr);
        }
        if !self.actor.net.is_finite() || self.critic.as_ref().is_some_and(|c| !c.net.is_finite()) {
            return Err(Error::Diverged("non-finite weights after update".into()));
        }
        Ok(stats)
    }
}

/// Updates both traders from their own projections of the episode.
pub fn update_policies(
    shipper: &mut Learner,
    carrier: &mut Learner,
    log: &EpisodeLog,
) -> Result<(UpdateStats, UpdateStats)> {
    use super::profile::Side;
    let s = shipper.update(&log.view(Side::Shipper))?;
    let c = carrier.update(&log.view(Side::Carrier))?;
    Ok((s, c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::features::extract_features;
    use crate::agents::profile::Side;
    use crate::log::{Completion, Observation};
    use crate::market::{CaseConfig, Job, JobEconomics, MarketState};
    use crate::rng::{stream, Stream};

    fn learner(algorithm: Algorithm) -> Learner {
        let profile = RiskProfile::tuned(Side::Shipper);
        let scale = FeatureScale::for_case(&CaseConfig::case1());
        Learner::new(profile, algorithm, &[20], &[20], scale, &mut stream(3, Stream::ShipperInit)).unwrap()
    }

    fn one_job_log(price: f64, reward: f64) -> EpisodeLog {
        let job = Job::new(0, 0, 1, 1);
        let state = MarketState::new(0, vec![job]);
        let features = extract_features(&job, &state, None, &FeatureScale::RAW).unwrap();
        let mut log = EpisodeLog::new(0);
        let obs = Observation {
            epoch: 0,
            due: 0,
            features,
            price,
            mu: 2.0,
            sigma: 0.1,
            reward,
            vhat: 0.0,
        };
        log.observe(&job, JobEconomics::new(2.0, 1.0), Side::Shipper, obs);
        log.observe(&job, JobEconomics::new(2.0, 1.0), Side::Carrier, obs);
        log.complete(0, Completion::Shipped);
        log
    }

    #[test]
    fn zero_signal_leaves_weights() {
        let mut l = learner(Algorithm::PolicyGradient);
        let before = l.actor.net.clone();
        let stats = l.update(&one_job_log(1.9, 0.0).view(Side::Shipper)).unwrap();
        assert_eq!(stats.observations, 1);
        assert_eq!(l.actor.net, before);
        assert_eq!(l.actor.optimizer.steps, 1);
    }

    #[test]
    fn positive_reward_pulls_mean_towards_price() {
        let mut l = learner(Algorithm::PolicyGradient);
        let f = one_job_log(1.0, 1.0).completed[0].shipper[0].features;
        let (mu0, _) = l.actor.mean_sigma(&f);
        for _ in 0..20 {
            l.update(&one_job_log(1.5, 1.0).view(Side::Shipper)).unwrap();
        }
        let (mu1, _) = l.actor.mean_sigma(&f);
        assert!(mu1 < mu0, "{mu1} should drop below {mu0}");
    }

    #[test]
    fn baseline_cancels_single_observation() {
        let mut l = learner(Algorithm::Baseline);
        let before = l.actor.net.clone();
        l.update(&one_job_log(1.5, 0.7).view(Side::Shipper)).unwrap();
        assert_eq!(l.actor.net, before);
    }

    #[test]
    fn critic_moves_towards_observed_value() {
        let mut l = learner(Algorithm::Td1);
        let log = one_job_log(1.5, 0.7);
        let obs = log.completed[0].shipper[0];
        let input = obs.features.with_action(l.scale.action(obs.price));
        let start = l.critic.as_ref().unwrap().value(&input);
        for _ in 0..50 {
            l.update(&log.view(Side::Shipper)).unwrap();
        }
        let end = l.critic.as_ref().unwrap().value(&input);
        assert!((end - 0.7).abs() < (start - 0.7).abs());
    }

    #[test]
    fn only_critic_variants_build_critics() {
        for a in Algorithm::ALL {
            assert_eq!(learner(a).critic.is_some(), a.uses_critic());
        }
    }
}
