//! Jobs, market states, case settings, rewards and the daily transition.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::Rng;
#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::broker::Allocation;
use crate::{Error, Result};

pub type JobId = u64;

/// One transport job (a smart container waiting at the hub).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Job {
    pub id: JobId,
    /// Epochs left until the latest possible shipment day.
    pub due: u32,
    pub distance: u32,
    pub volume: u32,
    /// Due date at arrival; fixes the job's individual horizon.
    pub born_due: u32,
}

impl Job {
    pub fn new(id: JobId, due: u32, distance: u32, volume: u32) -> Self {
        Job {
            id,
            due,
            distance,
            volume,
            born_due: due,
        }
    }

    /// Number of epochs the job has been quoted before the current one.
    pub fn age(&self) -> u32 {
        self.born_due - self.due
    }
}

/// The set of open jobs at one decision epoch.
#[derive(Debug, Clone, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct MarketState {
    pub epoch: u64,
    pub jobs: Vec<Job>,
}

impl MarketState {
    pub fn new(epoch: u64, jobs: Vec<Job>) -> Self {
        MarketState { epoch, jobs }
    }

    pub fn len(&self) -> usize {
        self.jobs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.jobs.is_empty()
    }

    pub fn total_volume(&self) -> u32 {
        self.jobs.iter().map(|j| j.volume).sum()
    }

    pub fn get(&self, id: JobId) -> Option<&Job> {
        self.jobs.iter().find(|j| j.id == id)
    }
}

/// Inclusive integer range used for the random job attributes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct IntRange {
    pub min: u32,
    pub max: u32,
}

impl IntRange {
    pub const fn new(min: u32, max: u32) -> Self {
        IntRange { min, max }
    }

    pub const fn fixed(value: u32) -> Self {
        IntRange {
            min: value,
            max: value,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        rng.gen_range(self.min..=self.max)
    }

    pub fn mean(&self) -> f64 {
        (self.min as f64 + self.max as f64) / 2.0
    }

    pub fn values(&self) -> impl Iterator<Item = u32> {
        self.min..=self.max
    }
}

/// Market settings for one test case.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct CaseConfig {
    pub name: String,
    pub arrivals_per_day: IntRange,
    pub due_range: IntRange,
    pub distance_range: IntRange,
    pub volume_range: IntRange,
    /// Shipper's maximum willingness to pay per volume unit per mile.
    pub willingness_rate: f64,
    /// Carrier's marginal transport cost per volume unit per mile.
    pub transport_rate: f64,
    pub capacity: u32,
    pub max_open_jobs: u32,
    /// Days per episode.
    pub horizon_days: u32,
    pub episodes: u32,
}

pub const CASE_PRESETS: [&str; 3] = ["case1", "case2-cap40", "case2-cap300"];

impl CaseConfig {
    /// Deterministic toy case: one unit job per day that must ship the same day.
    pub fn case1() -> Self {
        CaseConfig {
            name: "case1".to_string(),
            arrivals_per_day: IntRange::fixed(1),
            due_range: IntRange::fixed(0),
            distance_range: IntRange::fixed(1),
            volume_range: IntRange::fixed(1),
            willingness_rate: 2.0,
            transport_rate: 1.0,
            capacity: 1,
            max_open_jobs: 1,
            horizon_days: 1000,
            episodes: 1000,
        }
    }

    /// Stochastic case with 125 job types and the given vehicle capacity.
    pub fn case2(capacity: u32) -> Self {
        CaseConfig {
            name: format!("case2-cap{capacity}"),
            arrivals_per_day: IntRange::new(1, 10),
            due_range: IntRange::new(1, 5),
            distance_range: IntRange::new(1, 5),
            volume_range: IntRange::new(1, 5),
            willingness_rate: 2.0,
            transport_rate: 1.0,
            capacity,
            max_open_jobs: 50,
            horizon_days: 1000,
            episodes: 1000,
        }
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "case1" => Ok(Self::case1()),
            "case2-cap40" => Ok(Self::case2(40)),
            "case2-cap300" => Ok(Self::case2(300)),
            other => Err(Error::UnknownPreset {
                name: other.to_string(),
                available: CASE_PRESETS.join(", "),
            }),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        for (label, r) in [
            ("arrivals_per_day", self.arrivals_per_day),
            ("due_range", self.due_range),
            ("distance_range", self.distance_range),
            ("volume_range", self.volume_range),
        ] {
            if r.min > r.max {
                return bad(format!("{label}: min {} exceeds max {}", r.min, r.max));
            }
        }
        if self.distance_range.min == 0 || self.volume_range.min == 0 {
            return bad("distances and volumes must be at least 1".to_string());
        }
        if !(self.transport_rate.is_finite() && self.willingness_rate.is_finite())
            || self.transport_rate <= 0.0
        {
            return bad("rates must be finite and strictly positive".to_string());
        }
        if self.transport_rate >= self.willingness_rate {
            return bad(format!(
                "transport rate {} must be below willingness rate {} (empty feasibility set)",
                self.transport_rate, self.willingness_rate
            ));
        }
        if self.capacity < self.volume_range.max {
            return bad(format!(
                "capacity {} cannot hold the largest job volume {}",
                self.capacity, self.volume_range.max
            ));
        }
        if self.max_open_jobs == 0 {
            return bad("max_open_jobs must be positive".to_string());
        }
        if self.horizon_days == 0 || self.episodes == 0 {
            return bad("episodes and days per episode must be positive".to_string());
        }
        Ok(())
    }

    pub fn economics(&self, job: &Job) -> JobEconomics {
        job_economics(job, self)
    }
}

/// Per-job money values: the shipper's ceiling and the carrier's floor.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct JobEconomics {
    pub max_pay: f64,
    pub trn_cost: f64,
}

impl JobEconomics {
    pub fn new(max_pay: f64, trn_cost: f64) -> Self {
        JobEconomics { max_pay, trn_cost }
    }

    /// The surplus both traders bargain over.
    pub fn gap(&self) -> f64 {
        self.max_pay - self.trn_cost
    }
}

pub fn job_economics(job: &Job, config: &CaseConfig) -> JobEconomics {
    let size = job.volume as f64 * job.distance as f64;
    JobEconomics {
        max_pay: config.willingness_rate * size,
        trn_cost: config.transport_rate * size,
    }
}

/// Draws one day of arrivals. Ids are taken from `next_id`, which is advanced.
pub fn generate_arrivals<R: Rng + ?Sized>(
    config: &CaseConfig,
    rng: &mut R,
    next_id: &mut JobId,
) -> Vec<Job> {
    let count = config
        .arrivals_per_day
        .sample(rng)
        .min(config.max_open_jobs);
    (0..count)
        .map(|_| {
            let due = config.due_range.sample(rng);
            let distance = config.distance_range.sample(rng);
            let volume = config.volume_range.sample(rng);
            let job = Job::new(*next_id, due, distance, volume);
            *next_id += 1;
            job
        })
        .collect()
}

/// Shipper's per-epoch reward. Unshipped jobs are charged the missed surplus
/// scaled by the penalty slope.
pub fn shipper_reward(shipped: bool, bid: f64, econ: &JobEconomics, penalty_slope: f64) -> f64 {
    if shipped {
        econ.max_pay - bid
    } else {
        let missed = (econ.max_pay - bid).max(0.0);
        if missed == 0.0 || penalty_slope == 0.0 {
            0.0
        } else {
            -penalty_slope * missed
        }
    }
}

/// Carrier's per-epoch reward. A rejected profitable ask is only penalized
/// when the vehicle left with idle capacity.
pub fn carrier_reward(
    shipped: bool,
    ask: f64,
    econ: &JobEconomics,
    penalty_slope: f64,
    idle_capacity: u32,
) -> f64 {
    if shipped {
        ask - econ.trn_cost
    } else if ask > econ.trn_cost && idle_capacity > 0 && penalty_slope != 0.0 {
        -penalty_slope * (ask - econ.trn_cost)
    } else {
        0.0
    }
}

/// Result of one day's transition.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub next: MarketState,
    pub shipped: Vec<Job>,
    pub failed: Vec<Job>,
    /// Arrivals turned away because the open-job cap was reached.
    pub dropped: usize,
}

/// Removes shipped and expired jobs, ages the rest by one day and appends
/// the arrivals (up to `max_open_jobs`).
pub fn transition(
    state: &MarketState,
    arrivals: Vec<Job>,
    allocation: &Allocation,
    max_open_jobs: usize,
) -> Result<Transition> {
    if allocation.flags.len() != state.jobs.len() {
        return Err(Error::AllocationMismatch {
            flags: allocation.flags.len(),
            jobs: state.jobs.len(),
        });
    }
    let mut jobs = Vec::with_capacity(state.jobs.len() + arrivals.len());
    let mut shipped = Vec::new();
    let mut failed = Vec::new();
    for (job, &selected) in state.jobs.iter().zip(&allocation.flags) {
        if selected {
            shipped.push(*job);
        } else if job.due == 0 {
            failed.push(*job);
        } else {
            let mut aged = *job;
            aged.due -= 1;
            jobs.push(aged);
        }
    }
    let room = max_open_jobs.saturating_sub(jobs.len());
    let dropped = arrivals.len().saturating_sub(room);
    jobs.extend(arrivals.into_iter().take(room));
    Ok(Transition {
        next: MarketState::new(state.epoch + 1, jobs),
        shipped,
        failed,
        dropped,
    })
}
