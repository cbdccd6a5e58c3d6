//! Per-episode information vectors.
//!
//! Every quoted epoch of a job produces one [`Observation`] per trader. The
//! cumulative reward `vhat` is the running sum of the job's per-epoch rewards,
//! so a job shipped at its k-th quote carries the sum of k rewards there.
//! Once a job is shipped or expires it moves to the completed set and its
//! observations count towards the completion counts of their due classes.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::agents::{FeatureVector, Side};
use crate::broker::{Allocation, QuoteSheet};
use crate::market::{Job, JobEconomics, JobId, MarketState};

/// One quoted epoch of one job, seen by one trader.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    pub epoch: u64,
    /// Due date at quoting time; the baseline class.
    pub due: u32,
    pub features: FeatureVector,
    pub price: f64,
    pub mu: f64,
    pub sigma: f64,
    /// Per-epoch reward including penalties.
    pub reward: f64,
    pub vhat: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Completion {
    Shipped,
    Failed,
}

/// Lifetime record of a job.
#[derive(Debug, Clone, PartialEq)]
pub struct JobTrace {
    pub job: Job,
    pub econ: JobEconomics,
    pub shipper: Vec<Observation>,
    pub carrier: Vec<Observation>,
    pub completion: Option<Completion>,
}

impl JobTrace {
    pub fn new(job: Job, econ: JobEconomics) -> Self {
        JobTrace {
            job,
            econ,
            shipper: Vec::new(),
            carrier: Vec::new(),
            completion: None,
        }
    }

    pub fn observations(&self, side: Side) -> &[Observation] {
        match side {
            Side::Shipper => &self.shipper,
            Side::Carrier => &self.carrier,
        }
    }

    pub fn is_shipped(&self) -> bool {
        self.completion == Some(Completion::Shipped)
    }

    /// Bid and ask of the final quoted epoch.
    pub fn final_prices(&self) -> Option<(f64, f64)> {
        Some((self.shipper.last()?.price, self.carrier.last()?.price))
    }

    /// Rewards without penalties: the surplus each side keeps on a shipment.
    pub fn realized(&self) -> (f64, f64) {
        match (self.is_shipped(), self.final_prices()) {
            (true, Some((bid, ask))) => (self.econ.max_pay - bid, ask - self.econ.trn_cost),
            _ => (0.0, 0.0),
        }
    }

    fn push(&mut self, side: Side, mut obs: Observation) {
        let list = match side {
            Side::Shipper => &mut self.shipper,
            Side::Carrier => &mut self.carrier,
        };
        obs.vhat = obs.reward + list.last().map_or(0.0, |o| o.vhat);
        list.push(obs);
    }
}

/// What happened on one day.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochRecord {
    pub state: MarketState,
    pub quotes: QuoteSheet,
    pub allocation: Allocation,
    /// Volume of the best volume-only selection for this state.
    pub max_volume: u32,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EpisodeLog {
    pub epochs: Vec<EpochRecord>,
    pub completed: Vec<JobTrace>,
    /// Observations per due class over completed jobs.
    pub counts: Vec<u32>,
    open: BTreeMap<JobId, JobTrace>,
    record_states: bool,
}

impl EpisodeLog {
    /// `max_due` sizes the completion counts.
    pub fn new(max_due: u32) -> Self {
        EpisodeLog {
            counts: vec![0; max_due as usize + 1],
            record_states: true,
            ..Default::default()
        }
    }

    /// Skips the per-epoch state and quote snapshots, keeping only the
    /// allocation summaries needed by the metrics.
    pub fn without_snapshots(mut self) -> Self {
        self.record_states = false;
        self
    }

    pub fn record_epoch(&mut self, state: &MarketState, quotes: QuoteSheet, allocation: Allocation, max_volume: u32) {
        let (state, quotes) = if self.record_states {
            (state.clone(), quotes)
        } else {
            (MarketState::new(state.epoch, Vec::new()), QuoteSheet::default())
        };
        self.epochs.push(EpochRecord {
            state,
            quotes,
            allocation,
            max_volume,
        });
    }

    /// Appends a quote observation; `vhat` is filled in from the job's history.
    pub fn observe(&mut self, job: &Job, econ: JobEconomics, side: Side, obs: Observation) {
        self.open
            .entry(job.id)
            .or_insert_with(|| JobTrace::new(*job, econ))
            .push(side, obs);
    }

    /// Moves a job to the completed set.
    pub fn complete(&mut self, id: JobId, completion: Completion) {
        if let Some(mut trace) = self.open.remove(&id) {
            trace.completion = Some(completion);
            for obs in &trace.shipper {
                let class = obs.due as usize;
                if class >= self.counts.len() {
                    self.counts.resize(class + 1, 0);
                }
                self.counts[class] += 1;
            }
            self.completed.push(trace);
        }
    }

    /// Jobs still open when the episode ended; they never feed an update.
    pub fn open_jobs(&self) -> usize {
        self.open.len()
    }

    pub fn view(&self, side: Side) -> AgentView<'_> {
        AgentView { side, log: self }
    }
}

/// One trader's projection of the log: only its own quotes and rewards.
#[derive(Debug, Clone, Copy)]
pub struct AgentView<'a> {
    side: Side,
    log: &'a EpisodeLog,
}

impl<'a> AgentView<'a> {
    pub fn side(&self) -> Side {
        self.side
    }

    pub fn observations(&self) -> impl Iterator<Item = &'a Observation> + 'a {
        let side = self.side;
        self.log.completed.iter().flat_map(move |t| t.observations(side).iter())
    }

    pub fn len(&self) -> usize {
        self.log.counts.iter().map(|&k| k as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Mean cumulative reward per due class (0 for empty classes).
    pub fn baselines(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.log.counts.len()];
        for obs in self.observations() {
            sums[obs.due as usize] += obs.vhat;
        }
        sums.iter()
            .zip(&self.log.counts)
            .map(|(&s, &k)| if k == 0 { 0.0 } else { s / k as f64 })
            .collect()
    }
}
