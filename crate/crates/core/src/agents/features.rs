//! State features fed to actor and critic networks.
//!
//! Layout: bias, job due date, job distance, job volume, mean due date,
//! mean distance, mean volume, total volume, job count and, for critics
//! only, the price being evaluated. Every non-bias entry is divided by a
//! fixed maximum taken from the case settings.

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::market::{CaseConfig, Job, MarketState};
use crate::{Error, Result};

pub const ACTOR_FEATURES: usize = 9;
pub const CRITIC_FEATURES: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct FeatureVector {
    values: [f64; CRITIC_FEATURES],
    len: usize,
}

impl FeatureVector {
    /// Actor (9) or critic (10) features from raw values.
    pub fn from_slice(values: &[f64]) -> Result<Self> {
        if values.len() != ACTOR_FEATURES && values.len() != CRITIC_FEATURES {
            return Err(Error::Shape(alloc::format!(
                "{} features, expected {ACTOR_FEATURES} or {CRITIC_FEATURES}",
                values.len()
            )));
        }
        let mut out = FeatureVector {
            values: [0.0; CRITIC_FEATURES],
            len: values.len(),
        };
        out.values[..values.len()].copy_from_slice(values);
        Ok(out)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values[..self.len]
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Actor features extended with a (normalized) price for the critic.
    pub fn with_action(&self, action: f64) -> FeatureVector {
        let mut out = *self;
        out.values[ACTOR_FEATURES] = action;
        out.len = CRITIC_FEATURES;
        out
    }

    pub fn is_finite(&self) -> bool {
        self.as_slice().iter().all(|v| v.is_finite())
    }
}

/// Aggregates of the open jobs, computed once per epoch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateSummary {
    pub mean_due: f64,
    pub mean_distance: f64,
    pub mean_volume: f64,
    pub total_volume: f64,
    pub count: f64,
}

impl StateSummary {
    pub fn of(state: &MarketState) -> Result<Self> {
        if state.is_empty() {
            return Err(Error::EmptyState);
        }
        let n = state.len() as f64;
        let (due, dist, vol) = state.jobs.iter().fold((0u64, 0u64, 0u64), |acc, j| {
            (
                acc.0 + j.due as u64,
                acc.1 + j.distance as u64,
                acc.2 + j.volume as u64,
            )
        });
        Ok(StateSummary {
            mean_due: due as f64 / n,
            mean_distance: dist as f64 / n,
            mean_volume: vol as f64 / n,
            total_volume: vol as f64,
            count: n,
        })
    }
}

/// Static divisors for each feature.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct FeatureScale {
    pub due: f64,
    pub distance: f64,
    pub volume: f64,
    pub total_volume: f64,
    pub count: f64,
    pub action: f64,
}

impl FeatureScale {
    /// Identity scaling, i.e. raw feature values.
    pub const RAW: FeatureScale = FeatureScale {
        due: 1.0,
        distance: 1.0,
        volume: 1.0,
        total_volume: 1.0,
        count: 1.0,
        action: 1.0,
    };

    /// Divides by the case maxima; prices are scaled by the mean willingness
    /// to pay. Zero maxima (e.g. a fixed due date of 0) fall back to 1.
    pub fn for_case(config: &CaseConfig) -> Self {
        let nonzero = |v: f64| if v > 0.0 { v } else { 1.0 };
        let avg_pay = super::profile::bias_presets(config).avg_pay;
        FeatureScale {
            due: nonzero(config.due_range.max as f64),
            distance: nonzero(config.distance_range.max as f64),
            volume: nonzero(config.volume_range.max as f64),
            total_volume: nonzero(config.max_open_jobs as f64 * config.volume_range.max as f64),
            count: nonzero(config.max_open_jobs as f64),
            action: nonzero(avg_pay),
        }
    }

    pub fn action(&self, price: f64) -> f64 {
        price / self.action
    }
}

/// Actor features for `job` given precomputed state aggregates.
pub fn features_with_summary(job: &Job, summary: &StateSummary, scale: &FeatureScale) -> FeatureVector {
    let mut values = [0.0; CRITIC_FEATURES];
    values[0] = 1.0;
    values[1] = job.due as f64 / scale.due;
    values[2] = job.distance as f64 / scale.distance;
    values[3] = job.volume as f64 / scale.volume;
    values[4] = summary.mean_due / scale.due;
    values[5] = summary.mean_distance / scale.distance;
    values[6] = summary.mean_volume / scale.volume;
    values[7] = summary.total_volume / scale.total_volume;
    values[8] = summary.count / scale.count;
    FeatureVector {
        values,
        len: ACTOR_FEATURES,
    }
}

/// Feature vector of `job` in `state`; with `action` it is the critic input.
pub fn extract_features(
    job: &Job,
    state: &MarketState,
    action: Option<f64>,
    scale: &FeatureScale,
) -> Result<FeatureVector> {
    let summary = StateSummary::of(state)?;
    let base = features_with_summary(job, &summary, scale);
    Ok(match action {
        Some(price) => base.with_action(scale.action(price)),
        None => base,
    })
}
