//! The neutral broker: exact 0-1 knapsack allocation.
//!
//! Both knapsacks run an integer-capacity table over `0..=capacity` with
//! `O(jobs * capacity)` work. Jobs with a non-positive spread never enter the
//! spread table, so a bid below the ask is never shipped and a zero spread is
//! treated as "not worth it".

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::Add;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::market::{JobId, MarketState};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Quote {
    pub job: JobId,
    pub bid: f64,
    pub ask: f64,
}

impl Quote {
    pub fn spread(&self) -> f64 {
        self.bid - self.ask
    }
}

/// Bids and asks for one epoch, in the order of the state's jobs.
#[derive(Debug, Clone, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct QuoteSheet {
    pub epoch: u64,
    pub quotes: Vec<Quote>,
}

/// Shipping decision per job (aligned with the state's job order).
#[derive(Debug, Clone, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Allocation {
    pub flags: Vec<bool>,
    pub total_spread: f64,
    pub used_volume: u32,
}

impl Allocation {
    pub fn none(jobs: usize) -> Self {
        Allocation {
            flags: vec![false; jobs],
            total_spread: 0.0,
            used_volume: 0,
        }
    }

    pub fn shipped_count(&self) -> usize {
        self.flags.iter().filter(|&&f| f).count()
    }
}

/// Selects the jobs maximizing the total spread subject to the capacity.
pub fn allocate(state: &MarketState, quotes: &QuoteSheet, capacity: u32) -> Result<Allocation> {
    if quotes.quotes.len() != state.jobs.len() {
        return Err(Error::QuoteMismatch(format!(
            "{} quotes for {} jobs",
            quotes.quotes.len(),
            state.jobs.len()
        )));
    }
    let mut items = Vec::with_capacity(state.jobs.len());
    for (idx, (job, quote)) in state.jobs.iter().zip(&quotes.quotes).enumerate() {
        if job.id != quote.job {
            return Err(Error::QuoteMismatch(format!(
                "quote for job {} at position of job {}",
                quote.job, job.id
            )));
        }
        let spread = quote.spread();
        if !spread.is_finite() {
            return Err(Error::QuoteMismatch(format!("non-finite spread for job {}", job.id)));
        }
        if spread > 0.0 && job.volume <= capacity {
            items.push(Item {
                index: idx,
                weight: job.volume,
                value: spread,
            });
        }
    }
    let chosen = solve(&items, capacity, 0.0);
    let mut allocation = Allocation::none(state.jobs.len());
    // Summed in job order so the total matches `broker_reward` bit for bit.
    for idx in chosen {
        allocation.flags[idx] = true;
    }
    for (idx, &flag) in allocation.flags.iter().enumerate() {
        if flag {
            allocation.total_spread += quotes.quotes[idx].spread();
            allocation.used_volume += state.jobs[idx].volume;
        }
    }
    Ok(allocation)
}

/// Broker profit of an allocation: the sum of spreads of shipped jobs.
pub fn broker_reward(allocation: &Allocation, quotes: &QuoteSheet) -> f64 {
    allocation
        .flags
        .iter()
        .zip(&quotes.quotes)
        .filter(|(f, _)| **f)
        .map(|(_, q)| q.spread())
        .sum()
}

/// Price-agnostic selection that fills the vehicle as much as possible.
pub fn max_volume_allocation(state: &MarketState, capacity: u32) -> Allocation {
    let items: Vec<Item<u32>> = state
        .jobs
        .iter()
        .enumerate()
        .filter(|(_, j)| j.volume <= capacity)
        .map(|(index, j)| Item {
            index,
            weight: j.volume,
            value: j.volume,
        })
        .collect();
    let chosen = solve(&items, capacity, 0u32);
    let mut allocation = Allocation::none(state.jobs.len());
    for idx in chosen {
        allocation.flags[idx] = true;
        allocation.used_volume += state.jobs[idx].volume;
    }
    allocation
}

/// Best achievable shipped volume, the utilization denominator.
pub fn max_volume(state: &MarketState, capacity: u32) -> u32 {
    max_volume_allocation(state, capacity).used_volume
}

struct Item<V> {
    index: usize,
    weight: u32,
    value: V,
}

/// 0-1 knapsack over items sorted by the caller's order (ascending job order).
/// An item is taken only if it strictly improves the table cell, so among
/// equal-value selections the earlier jobs are kept.
fn solve<V>(items: &[Item<V>], capacity: u32, zero: V) -> Vec<usize>
where
    V: Copy + PartialOrd + Add<Output = V>,
{
    let total: u64 = items.iter().map(|i| i.weight as u64).sum();
    if total <= capacity as u64 {
        return items.iter().map(|i| i.index).collect();
    }
    let cap = capacity as usize;
    let width = cap + 1;
    let mut best = vec![zero; width];
    let mut take = vec![false; items.len() * width];
    for (k, item) in items.iter().enumerate() {
        let w = item.weight as usize;
        for c in (w..=cap).rev() {
            let candidate = best[c - w] + item.value;
            if candidate > best[c] {
                best[c] = candidate;
                take[k * width + c] = true;
            }
        }
    }
    let mut chosen = Vec::new();
    let mut c = cap;
    for k in (0..items.len()).rev() {
        if take[k * width + c] {
            chosen.push(items[k].index);
            c -= items[k].weight as usize;
        }
    }
    chosen.reverse();
    chosen
}
