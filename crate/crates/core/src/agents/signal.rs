//! Reward signals of the five policy-gradient variants.

use alloc::string::ToString;
use core::fmt;
use core::str::FromStr;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Algorithm {
    /// Plain REINFORCE on the cumulative reward.
    #[default]
    #[cfg_attr(feature = "serde", serde(rename = "pg"))]
    PolicyGradient,
    /// Cumulative reward minus the episode mean of its due-date class.
    #[cfg_attr(feature = "serde", serde(rename = "pg-baseline"))]
    Baseline,
    /// Critic estimate of the sampled price.
    #[cfg_attr(feature = "serde", serde(rename = "q-ac"))]
    QValue,
    /// Cumulative reward minus the critic estimate.
    Td1,
    /// Critic estimate of the sampled price minus that of the mean price.
    Advantage,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::PolicyGradient,
        Algorithm::Baseline,
        Algorithm::QValue,
        Algorithm::Td1,
        Algorithm::Advantage,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::PolicyGradient => "pg",
            Algorithm::Baseline => "pg-baseline",
            Algorithm::QValue => "q-ac",
            Algorithm::Td1 => "td1",
            Algorithm::Advantage => "advantage",
        }
    }

    pub fn uses_critic(&self) -> bool {
        matches!(self, Algorithm::QValue | Algorithm::Td1 | Algorithm::Advantage)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::UnknownAlgorithm(s.to_string()))
    }
}

pub fn compute_signal(variant: Algorithm, vhat: f64, baseline: f64, q_sampled: f64, q_mean: f64) -> f64 {
    match variant {
        Algorithm::PolicyGradient => vhat,
        Algorithm::Baseline => vhat - baseline,
        Algorithm::QValue => q_sampled,
        Algorithm::Td1 => vhat - q_sampled,
        Algorithm::Advantage => q_sampled - q_mean,
    }
}
