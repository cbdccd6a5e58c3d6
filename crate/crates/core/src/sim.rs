//! Episode loop and replication driver.

use alloc::boxed::Box;
use alloc::vec::Vec;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::agents::features::{features_with_summary, FeatureScale, StateSummary};
use crate::agents::nn::Tape;
use crate::agents::{Action, Learner, Side};
use crate::broker::{allocate, max_volume, Quote, QuoteSheet};
use crate::log::{Completion, EpisodeLog, Observation};
use crate::market::{
    carrier_reward, generate_arrivals, shipper_reward, transition, CaseConfig, JobEconomics, JobId,
    MarketState,
};
use crate::metrics::{warmup_episodes, EpisodeMetrics};
use crate::rng::{stream, SimRng, Stream};
use crate::{Error, Result};

/// A price rule that never learns.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "rule", content = "value", rename_all = "kebab-case"))]
pub enum ScriptedPrice {
    Fixed(f64),
    /// Willingness to pay plus an offset.
    PayOffset(f64),
    /// Transport cost plus an offset.
    CostOffset(f64),
}

impl ScriptedPrice {
    pub fn price(&self, econ: &JobEconomics) -> f64 {
        match *self {
            ScriptedPrice::Fixed(p) => p,
            ScriptedPrice::PayOffset(d) => econ.max_pay + d,
            ScriptedPrice::CostOffset(d) => econ.trn_cost + d,
        }
    }

    pub fn value(&self) -> f64 {
        match *self {
            ScriptedPrice::Fixed(v) | ScriptedPrice::PayOffset(v) | ScriptedPrice::CostOffset(v) => v,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Trader {
    Learning(Box<Learner>),
    Scripted(ScriptedPrice),
}

impl Trader {
    pub fn penalty_slope(&self) -> f64 {
        match self {
            Trader::Learning(l) => l.profile.penalty_slope,
            Trader::Scripted(_) => 0.0,
        }
    }

    pub fn learner(&self) -> Option<&Learner> {
        match self {
            Trader::Learning(l) => Some(l),
            Trader::Scripted(_) => None,
        }
    }

    pub fn learner_mut(&mut self) -> Option<&mut Learner> {
        match self {
            Trader::Learning(l) => Some(l),
            Trader::Scripted(_) => None,
        }
    }

    fn quote(
        &self,
        features: &crate::agents::FeatureVector,
        econ: &JobEconomics,
        rng: &mut SimRng,
        tape: &mut Tape,
    ) -> Result<Action> {
        match self {
            Trader::Learning(l) => l.act(features, rng, tape),
            Trader::Scripted(rule) => {
                let price = rule.price(econ);
                Ok(Action { price, mu: price, sigma: 0.0 })
            }
        }
    }
}

/// Market environment of one replication with its random streams.
#[derive(Debug, Clone)]
pub struct Market {
    pub config: CaseConfig,
    scale: FeatureScale,
    arrivals: SimRng,
    shipper_rng: SimRng,
    carrier_rng: SimRng,
    next_id: JobId,
    tape: Tape,
    /// Keep per-epoch state and quote snapshots in the logs.
    pub snapshots: bool,
}

impl Market {
    pub fn new(config: CaseConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        Ok(Market {
            scale: FeatureScale::for_case(&config),
            config,
            arrivals: stream(seed, Stream::Arrivals),
            shipper_rng: stream(seed, Stream::ShipperPolicy),
            carrier_rng: stream(seed, Stream::CarrierPolicy),
            next_id: 0,
            tape: Tape::default(),
            snapshots: true,
        })
    }

    pub fn scale(&self) -> &FeatureScale {
        &self.scale
    }

    /// Plays `horizon_days` days from a fresh state, without updating anyone.
    pub fn run_episode(&mut self, shipper: &Trader, carrier: &Trader) -> Result<EpisodeLog> {
        let cfg = &self.config;
        let mut log = EpisodeLog::new(cfg.due_range.max);
        if !self.snapshots {
            log = log.without_snapshots();
        }
        let max_open = cfg.max_open_jobs as usize;
        let first = generate_arrivals(cfg, &mut self.arrivals, &mut self.next_id);
        let mut state = MarketState::new(0, first);
        let mut quoted = Vec::new();
        for _ in 0..cfg.horizon_days {
            quoted.clear();
            let mut sheet = QuoteSheet {
                epoch: state.epoch,
                quotes: Vec::with_capacity(state.len()),
            };
            if !state.is_empty() {
                let summary = StateSummary::of(&state)?;
                for job in &state.jobs {
                    let features = features_with_summary(job, &summary, &self.scale);
                    let econ = cfg.economics(job);
                    let bid = shipper.quote(&features, &econ, &mut self.shipper_rng, &mut self.tape)?;
                    let ask = carrier.quote(&features, &econ, &mut self.carrier_rng, &mut self.tape)?;
                    sheet.quotes.push(Quote {
                        job: job.id,
                        bid: bid.price,
                        ask: ask.price,
                    });
                    quoted.push((features, econ, bid, ask));
                }
            }
            let allocation = allocate(&state, &sheet, cfg.capacity)?;
            let idle = cfg.capacity - allocation.used_volume;
            for (i, job) in state.jobs.iter().enumerate() {
                let (features, econ, bid, ask) = quoted[i];
                let shipped = allocation.flags[i];
                let observation = |action: Action, reward: f64| Observation {
                    epoch: state.epoch,
                    due: job.due,
                    features,
                    price: action.price,
                    mu: action.mu,
                    sigma: action.sigma,
                    reward,
                    vhat: 0.0,
                };
                let rs = shipper_reward(shipped, bid.price, &econ, shipper.penalty_slope());
                let rc = carrier_reward(shipped, ask.price, &econ, carrier.penalty_slope(), idle);
                if !(rs.is_finite() && rc.is_finite()) {
                    return Err(Error::Diverged(alloc::format!("non-finite reward for job {}", job.id)));
                }
                log.observe(job, econ, Side::Shipper, observation(bid, rs));
                log.observe(job, econ, Side::Carrier, observation(ask, rc));
                if shipped {
                    log.complete(job.id, Completion::Shipped);
                } else if job.due == 0 {
                    log.complete(job.id, Completion::Failed);
                }
            }
            let best = max_volume(&state, cfg.capacity);
            let arrivals = generate_arrivals(cfg, &mut self.arrivals, &mut self.next_id);
            let next = transition(&state, arrivals, &allocation, max_open)?;
            log.record_epoch(&state, sheet, allocation, best);
            state = next.next;
        }
        Ok(log)
    }
}

/// Outcome of one replication.
#[derive(Debug, Clone)]
pub struct Replication {
    pub rows: Vec<EpisodeMetrics>,
    /// Set when training diverged; the replication then counts as N/A.
    pub error: Option<Error>,
    pub shipper: Trader,
    pub carrier: Trader,
}

impl Replication {
    pub fn is_stable(&self) -> bool {
        self.error.is_none()
    }
}

/// Runs `config.episodes` episodes with a strategy update after each one.
/// `on_episode` sees every metrics row as it is produced.
pub fn run_replication(
    config: &CaseConfig,
    seed: u64,
    mut shipper: Trader,
    mut carrier: Trader,
    warmup_percent: u32,
    on_episode: &mut dyn FnMut(&EpisodeMetrics),
) -> Result<Replication> {
    let mut market = Market::new(config.clone(), seed)?;
    market.snapshots = false;
    let warmup = warmup_episodes(config.episodes, warmup_percent);
    let mut rows = Vec::with_capacity(config.episodes as usize);
    let mut error = None;
    for episode in 0..config.episodes {
        let log = match market.run_episode(&shipper, &carrier) {
            Ok(log) => log,
            Err(e) => {
                error = Some(e);
                break;
            }
        };
        let row = EpisodeMetrics::from_log(episode, episode < warmup, &log);
        on_episode(&row);
        rows.push(row);
        let updated = [(&mut shipper, Side::Shipper), (&mut carrier, Side::Carrier)]
            .into_iter()
            .try_for_each(|(trader, side)| match trader.learner_mut() {
                Some(l) => l.update(&log.view(side)).map(|_| ()),
                None => Ok(()),
            });
        if let Err(e) = updated {
            error = Some(e);
            break;
        }
    }
    Ok(Replication {
        rows,
        error,
        shipper,
        carrier,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::{Algorithm, RiskProfile};

    fn short_case1(days: u32) -> CaseConfig {
        let mut cfg = CaseConfig::case1();
        cfg.horizon_days = days;
        cfg.episodes = 1;
        cfg
    }

    #[test]
    fn scripted_feasible_quotes_ship_every_day() {
        let mut market = Market::new(short_case1(10), 0).unwrap();
        let log = market
            .run_episode(
                &Trader::Scripted(ScriptedPrice::Fixed(1.6)),
                &Trader::Scripted(ScriptedPrice::Fixed(1.4)),
            )
            .unwrap();
        let m = EpisodeMetrics::from_log(0, false, &log);
        assert_eq!(m.shipped, 10);
        assert!((m.broker_reward - 2.0).abs() < 1e-12);
        assert_eq!(log.epochs.len(), 10);
    }

    #[test]
    fn crossed_quotes_never_ship() {
        let mut market = Market::new(short_case1(10), 0).unwrap();
        let log = market
            .run_episode(
                &Trader::Scripted(ScriptedPrice::Fixed(1.0)),
                &Trader::Scripted(ScriptedPrice::Fixed(1.5)),
            )
            .unwrap();
        let m = EpisodeMetrics::from_log(0, false, &log);
        assert_eq!((m.shipped, m.failed), (0, 10));
        assert_eq!(m.utilization, 0.0);
    }

    #[test]
    fn replications_are_deterministic() {
        let mut cfg = CaseConfig::case2(40);
        cfg.horizon_days = 30;
        cfg.episodes = 3;
        let scale = FeatureScale::for_case(&cfg);
        let make = |side, seed| {
            let profile = RiskProfile::tuned(side).with_bias(13.5);
            let rng = &mut stream(seed, Stream::ShipperInit);
            Trader::Learning(Box::new(
                Learner::new(profile, Algorithm::PolicyGradient, &[20], &[20], scale, rng).unwrap(),
            ))
        };
        let run = || {
            run_replication(&cfg, 9, make(Side::Shipper, 1), make(Side::Carrier, 2), 10, &mut |_| {})
                .unwrap()
                .rows
        };
        let a = run();
        assert_eq!(a.len(), 3);
        assert_eq!(a, run());
    }
}
