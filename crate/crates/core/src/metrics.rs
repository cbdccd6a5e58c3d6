//! Market quality metrics.
//!
//! Per-job metrics are averaged over the completed jobs of an episode, each
//! job weighted once. Utilization is the ratio of shipped volume to the best
//! achievable volume, summed over the epochs of the episode. Reports average
//! the episodes after the warm-up window and separately the final stretch of
//! the horizon.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::agents::Side;
use crate::broker::{max_volume, Allocation};
use crate::log::EpisodeLog;
use crate::market::{JobEconomics, MarketState};

/// Final quotes of a completed job.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JobOutcome {
    pub econ: JobEconomics,
    pub bid: f64,
    pub ask: f64,
    pub shipped: bool,
}

impl JobOutcome {
    fn carrier_surplus(&self) -> f64 {
        self.ask - self.econ.trn_cost
    }

    fn shipper_surplus(&self) -> f64 {
        self.econ.max_pay - self.bid
    }
}

pub fn nash_adherence(outcome: &JobOutcome) -> f64 {
    if !outcome.shipped {
        return 0.0;
    }
    ((outcome.carrier_surplus() + outcome.shipper_surplus()) / outcome.econ.gap()).max(0.0)
}

/// `None` for unshipped jobs and when the surpluses cancel out.
pub fn fairness(outcome: &JobOutcome) -> Option<f64> {
    if !outcome.shipped {
        return None;
    }
    let (c, s) = (outcome.carrier_surplus(), outcome.shipper_surplus());
    let total = c + s;
    if total == 0.0 {
        return None;
    }
    Some((1.0 - ((c - s) / total).abs()).max(0.0))
}

pub fn relative_utilization(state: &MarketState, allocation: &Allocation, capacity: u32) -> f64 {
    utilization_ratio(allocation.used_volume as u64, max_volume(state, capacity) as u64)
}

fn utilization_ratio(used: u64, best: u64) -> f64 {
    if best == 0 {
        1.0
    } else {
        used as f64 / best as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Shares {
    pub shipper: f64,
    pub carrier: f64,
    pub broker: f64,
}

/// Split of the surplus of shipped jobs. `None` when nothing shipped.
pub fn reward_shares(outcomes: &[JobOutcome]) -> Option<Shares> {
    let (mut s, mut c, mut b, mut gap) = (0.0, 0.0, 0.0, 0.0);
    for o in outcomes.iter().filter(|o| o.shipped) {
        s += o.shipper_surplus();
        c += o.carrier_surplus();
        b += o.bid - o.ask;
        gap += o.econ.gap();
    }
    (gap > 0.0).then(|| Shares {
        shipper: s / gap,
        carrier: c / gap,
        broker: b / gap,
    })
}

/// Realized rewards relative to the surplus of all completed jobs,
/// failed ones included.
pub fn net_rewards(outcomes: &[JobOutcome]) -> Option<Shares> {
    let gap: f64 = outcomes.iter().map(|o| o.econ.gap()).sum();
    let (s, c, b) = outcomes
        .iter()
        .filter(|o| o.shipped)
        .fold((0.0, 0.0, 0.0), |acc, o| {
            (acc.0 + o.shipper_surplus(), acc.1 + o.carrier_surplus(), acc.2 + o.bid - o.ask)
        });
    (gap > 0.0).then(|| Shares {
        shipper: s / gap,
        carrier: c / gap,
        broker: b / gap,
    })
}

/// One row of the per-episode output.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct EpisodeMetrics {
    pub episode: u32,
    pub warmup: bool,
    pub utilization: f64,
    pub adherence: Option<f64>,
    pub fairness: Option<f64>,
    pub shares: Option<Shares>,
    pub net: Option<Shares>,
    pub shipped: u32,
    pub failed: u32,
    /// Realized (penalty-free) totals.
    pub shipper_reward: f64,
    pub carrier_reward: f64,
    pub broker_reward: f64,
    pub shipper_mu: Option<f64>,
    pub shipper_sigma: Option<f64>,
    pub carrier_mu: Option<f64>,
    pub carrier_sigma: Option<f64>,
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

pub fn outcomes(log: &EpisodeLog) -> Vec<JobOutcome> {
    log.completed
        .iter()
        .filter_map(|t| {
            let (bid, ask) = t.final_prices()?;
            Some(JobOutcome {
                econ: t.econ,
                bid,
                ask,
                shipped: t.is_shipped(),
            })
        })
        .collect()
}

impl EpisodeMetrics {
    pub fn from_log(episode: u32, warmup: bool, log: &EpisodeLog) -> Self {
        let outcomes = outcomes(log);
        let (used, best) = log.epochs.iter().fold((0u64, 0u64), |(u, b), e| {
            (u + e.allocation.used_volume as u64, b + e.max_volume as u64)
        });
        let shipped: Vec<&JobOutcome> = outcomes.iter().filter(|o| o.shipped).collect();
        let head_means = |side: Side| {
            let obs = || log.completed.iter().flat_map(move |t| t.observations(side).iter());
            (mean(obs().map(|o| o.mu)), mean(obs().map(|o| o.sigma)))
        };
        let (shipper_mu, shipper_sigma) = head_means(Side::Shipper);
        let (carrier_mu, carrier_sigma) = head_means(Side::Carrier);
        EpisodeMetrics {
            episode,
            warmup,
            utilization: utilization_ratio(used, best),
            adherence: mean(outcomes.iter().map(nash_adherence)),
            fairness: mean(outcomes.iter().filter_map(fairness)),
            shares: reward_shares(&outcomes),
            net: net_rewards(&outcomes),
            shipped: shipped.len() as u32,
            failed: (outcomes.len() - shipped.len()) as u32,
            shipper_reward: shipped.iter().map(|o| o.shipper_surplus()).sum(),
            carrier_reward: shipped.iter().map(|o| o.carrier_surplus()).sum(),
            broker_reward: shipped.iter().map(|o| o.bid - o.ask).sum(),
            shipper_mu,
            shipper_sigma,
            carrier_mu,
            carrier_sigma,
        }
    }
}

/// Episodes excluded from averages: the floor of `percent` of `episodes`.
pub fn warmup_episodes(episodes: u32, percent: u32) -> u32 {
    (episodes as u64 * percent as u64 / 100) as u32
}

/// Episodes in the end-of-horizon window: the ceiling of `percent`, at least one.
pub fn horizon_episodes(episodes: u32, percent: u32) -> u32 {
    ((episodes as u64 * percent as u64).div_ceil(100) as u32).clamp(1, episodes.max(1))
}

/// Scalar summary of a window of episodes.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct MetricSummary {
    pub utilization: Option<f64>,
    pub adherence: Option<f64>,
    pub fairness: Option<f64>,
    pub share_shipper: Option<f64>,
    pub share_carrier: Option<f64>,
    pub share_broker: Option<f64>,
    pub net_shipper: Option<f64>,
    pub net_carrier: Option<f64>,
    pub net_broker: Option<f64>,
    pub shipper_mu: Option<f64>,
    pub shipper_sigma: Option<f64>,
    pub carrier_mu: Option<f64>,
    pub carrier_sigma: Option<f64>,
}

/// Names of the summary fields, in declaration order.
pub const SUMMARY_FIELDS: [&str; 13] = [
    "utilization",
    "adherence",
    "fairness",
    "share_shipper",
    "share_carrier",
    "share_broker",
    "net_shipper",
    "net_carrier",
    "net_broker",
    "shipper_mu",
    "shipper_sigma",
    "carrier_mu",
    "carrier_sigma",
];

impl MetricSummary {
    /// Means over the rows; episodes where a metric is undefined are skipped.
    pub fn of(rows: &[EpisodeMetrics]) -> Self {
        let avg = |f: &dyn Fn(&EpisodeMetrics) -> Option<f64>| mean(rows.iter().filter_map(f));
        MetricSummary {
            utilization: avg(&|r| Some(r.utilization)),
            adherence: avg(&|r| r.adherence),
            fairness: avg(&|r| r.fairness),
            share_shipper: avg(&|r| r.shares.map(|s| s.shipper)),
            share_carrier: avg(&|r| r.shares.map(|s| s.carrier)),
            share_broker: avg(&|r| r.shares.map(|s| s.broker)),
            net_shipper: avg(&|r| r.net.map(|s| s.shipper)),
            net_carrier: avg(&|r| r.net.map(|s| s.carrier)),
            net_broker: avg(&|r| r.net.map(|s| s.broker)),
            shipper_mu: avg(&|r| r.shipper_mu),
            shipper_sigma: avg(&|r| r.shipper_sigma),
            carrier_mu: avg(&|r| r.carrier_mu),
            carrier_sigma: avg(&|r| r.carrier_sigma),
        }
    }

    pub fn values(&self) -> [Option<f64>; 13] {
        [
            self.utilization,
            self.adherence,
            self.fairness,
            self.share_shipper,
            self.share_carrier,
            self.share_broker,
            self.net_shipper,
            self.net_carrier,
            self.net_broker,
            self.shipper_mu,
            self.shipper_sigma,
            self.carrier_mu,
            self.carrier_sigma,
        ]
    }

    fn from_values(v: [Option<f64>; 13]) -> Self {
        MetricSummary {
            utilization: v[0],
            adherence: v[1],
            fairness: v[2],
            share_shipper: v[3],
            share_carrier: v[4],
            share_broker: v[5],
            net_shipper: v[6],
            net_carrier: v[7],
            net_broker: v[8],
            shipper_mu: v[9],
            shipper_sigma: v[10],
            carrier_mu: v[11],
            carrier_sigma: v[12],
        }
    }
}

/// Warm-up-excluded average and end-of-horizon summary of one replication.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct MetricsReport {
    pub average: MetricSummary,
    pub end_of_horizon: MetricSummary,
    pub measured_episodes: u32,
    pub horizon_episodes: u32,
}

impl MetricsReport {
    pub fn from_rows(rows: &[EpisodeMetrics], warmup_percent: u32, horizon_percent: u32) -> Self {
        let m = rows.len() as u32;
        let skip = warmup_episodes(m, warmup_percent) as usize;
        let tail = if m == 0 { 0 } else { horizon_episodes(m, horizon_percent) as usize };
        MetricsReport {
            average: MetricSummary::of(&rows[skip.min(rows.len())..]),
            end_of_horizon: MetricSummary::of(&rows[rows.len() - tail..]),
            measured_episodes: m - skip as u32,
            horizon_episodes: tail as u32,
        }
    }
}

/// Mean and sample standard deviation across replications.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Pooled {
    pub mean: Option<f64>,
    pub stdev: Option<f64>,
    pub n: u32,
}

impl Pooled {
    pub fn of(values: impl IntoIterator<Item = f64>) -> Self {
        let v: Vec<f64> = values.into_iter().collect();
        let n = v.len();
        if n == 0 {
            return Pooled::default();
        }
        let mean = v.iter().sum::<f64>() / n as f64;
        let stdev = if n > 1 {
            libm::sqrt(v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64)
        } else {
            0.0
        };
        Pooled {
            mean: Some(mean),
            stdev: Some(stdev),
            n: n as u32,
        }
    }
}

/// Pooled reports over the stable replications.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct PooledReport {
    pub average: BTreeMap<String, Pooled>,
    pub end_of_horizon: BTreeMap<String, Pooled>,
    pub replications: u32,
    pub unstable: u32,
}

impl PooledReport {
    /// `None` entries are unstable replications.
    pub fn pool(reports: &[Option<MetricsReport>]) -> Self {
        let stable: Vec<&MetricsReport> = reports.iter().flatten().collect();
        let pool_with = |pick: &dyn Fn(&MetricsReport) -> MetricSummary| {
            SUMMARY_FIELDS
                .iter()
                .enumerate()
                .map(|(i, &name)| (name.to_string(), Pooled::of(stable.iter().filter_map(|r| pick(r).values()[i]))))
                .collect()
        };
        PooledReport {
            average: pool_with(&|r| r.average),
            end_of_horizon: pool_with(&|r| r.end_of_horizon),
            replications: reports.len() as u32,
            unstable: (reports.len() - stable.len()) as u32,
        }
    }

    pub fn mean(&self, field: &str) -> Option<f64> {
        self.average.get(field).and_then(|p| p.mean)
    }

    pub fn mean_summary(&self) -> MetricSummary {
        MetricSummary::from_values(SUMMARY_FIELDS.map(|f| self.mean(f)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::Job;
    use alloc::vec;

    fn outcome(ask: f64, bid: f64, shipped: bool) -> JobOutcome {
        JobOutcome {
            econ: JobEconomics::new(2.0, 1.0),
            bid,
            ask,
            shipped,
        }
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn adherence_examples() {
        assert_eq!(nash_adherence(&outcome(1.5, 1.5, true)), 1.0);
        assert!(close(nash_adherence(&outcome(1.2, 1.8, true)), 0.4));
        assert_eq!(nash_adherence(&outcome(1.5, 1.5, false)), 0.0);
        assert_eq!(nash_adherence(&outcome(0.0, 5.0, true)), 0.0);
    }

    #[test]
    fn fairness_examples() {
        assert_eq!(fairness(&outcome(1.5, 1.5, true)), Some(1.0));
        assert_eq!(fairness(&outcome(1.0, 1.0, true)), Some(0.0));
        assert_eq!(fairness(&outcome(1.25, 1.75, true)), Some(1.0));
        assert_eq!(fairness(&outcome(1.25, 1.75, false)), None);
        assert_eq!(fairness(&outcome(1.0, 2.0, true)), None);
    }

    #[test]
    fn utilization_examples() {
        let state = MarketState::new(0, vec![Job::new(0, 1, 1, 4), Job::new(1, 1, 1, 5)]);
        let partial = Allocation {
            flags: vec![true, false],
            total_spread: 0.0,
            used_volume: 4,
        };
        assert!(close(relative_utilization(&state, &partial, 5), 0.8));
        let empty = MarketState::default();
        assert_eq!(relative_utilization(&empty, &Allocation::none(0), 5), 1.0);
        let all = Allocation {
            flags: vec![true, true],
            total_spread: 0.0,
            used_volume: 9,
        };
        assert_eq!(relative_utilization(&state, &all, 20), 1.0);
    }

    #[test]
    fn share_examples() {
        let s = reward_shares(&[outcome(1.5, 1.5, true)]).unwrap();
        assert_eq!((s.shipper, s.carrier, s.broker), (0.5, 0.5, 0.0));
        let s = reward_shares(&[outcome(1.2, 1.8, true)]).unwrap();
        assert!(close(s.shipper, 0.2) && close(s.carrier, 0.2) && close(s.broker, 0.6));
        assert!(reward_shares(&[outcome(1.2, 1.8, false)]).is_none());
    }

    #[test]
    fn net_rewards_count_failed_jobs() {
        let n = net_rewards(&[outcome(1.5, 1.5, true), outcome(1.5, 1.0, false)]).unwrap();
        assert_eq!((n.shipper, n.carrier, n.broker), (0.25, 0.25, 0.0));
    }

    #[test]
    fn window_sizes() {
        assert_eq!(warmup_episodes(1000, 10), 100);
        assert_eq!(warmup_episodes(15, 10), 1);
        assert_eq!(warmup_episodes(5, 10), 0);
        assert_eq!(horizon_episodes(1000, 5), 50);
        assert_eq!(horizon_episodes(10, 5), 1);
        assert_eq!(horizon_episodes(1, 5), 1);
    }

    #[test]
    fn pooled_statistics() {
        let p = Pooled::of([1.0, 2.0, 3.0]);
        assert_eq!((p.mean, p.stdev, p.n), (Some(2.0), Some(1.0), 3));
        assert_eq!(Pooled::of([4.0]).stdev, Some(0.0));
        assert_eq!(Pooled::of([]).mean, None);
    }
}
