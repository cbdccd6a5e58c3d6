//! Risk profiles and opening-bias presets.

use core::fmt;
use core::str::FromStr;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::market::CaseConfig;
use crate::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Side {
    Shipper,
    Carrier,
}

impl Side {
    pub fn name(&self) -> &'static str {
        match self {
            Side::Shipper => "shipper",
            Side::Carrier => "carrier",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub enum RiskAttitude {
    #[cfg_attr(feature = "serde", serde(rename = "risk-seeking"))]
    Seeking,
    #[cfg_attr(feature = "serde", serde(rename = "risk-neutral"))]
    Neutral,
    #[cfg_attr(feature = "serde", serde(rename = "risk-averse"))]
    Averse,
}

impl RiskAttitude {
    pub const ALL: [RiskAttitude; 3] = [RiskAttitude::Seeking, RiskAttitude::Neutral, RiskAttitude::Averse];

    pub fn abbreviation(&self) -> &'static str {
        match self {
            RiskAttitude::Seeking => "RS",
            RiskAttitude::Neutral => "RN",
            RiskAttitude::Averse => "RA",
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            RiskAttitude::Seeking => "risk-seeking",
            RiskAttitude::Neutral => "risk-neutral",
            RiskAttitude::Averse => "risk-averse",
        }
    }
}

impl fmt::Display for RiskAttitude {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RiskAttitude {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        RiskAttitude::ALL
            .into_iter()
            .find(|a| a.abbreviation().eq_ignore_ascii_case(s) || a.name() == s)
            .ok_or_else(|| Error::InvalidConfig(alloc::format!("unknown risk profile `{s}`")))
    }
}

/// Hyperparameter bundle describing a trader's bargaining aggressiveness.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct RiskProfile {
    pub attitude: RiskAttitude,
    /// Opening mean price.
    pub bias_init: f64,
    pub penalty_slope: f64,
    pub learning_rate: f64,
    pub sigma_init: f64,
}

/// Initial standard deviation of the tuned setup.
pub const DEFAULT_SIGMA: f64 = 0.1;

impl RiskProfile {
    /// Profiles of the deterministic case. The opening prices stay at the
    /// carrier's cost (1) and the shipper's ceiling (2) for every attitude;
    /// only penalty slope and learning rate change.
    pub fn case1(side: Side, attitude: RiskAttitude) -> Self {
        let bias_init = match side {
            Side::Carrier => 1.0,
            Side::Shipper => 2.0,
        };
        let (penalty_slope, learning_rate) = match attitude {
            RiskAttitude::Seeking => (2.0, 0.005),
            RiskAttitude::Neutral => (1.0, 0.001),
            RiskAttitude::Averse => (2.0, 0.0001),
        };
        RiskProfile {
            attitude,
            bias_init,
            penalty_slope,
            learning_rate,
            sigma_init: DEFAULT_SIGMA,
        }
    }

    /// The tuned symmetric setup: learning rate 0.001, slope 1, sigma 0.1.
    pub fn tuned(side: Side) -> Self {
        Self::case1(side, RiskAttitude::Neutral)
    }

    pub fn with_bias(mut self, bias: f64) -> Self {
        self.bias_init = bias;
        self
    }
}

/// Average transport cost and willingness to pay over all job types.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct BiasPresets {
    pub avg_cost: f64,
    pub avg_pay: f64,
}

impl BiasPresets {
    pub fn midpoint(&self) -> f64 {
        (self.avg_cost + self.avg_pay) / 2.0
    }

    /// Opening price per attitude: bold openings sit at the opponent's
    /// reservation value, cautious ones at the trader's own.
    pub fn bias(&self, side: Side, attitude: RiskAttitude) -> f64 {
        match (side, attitude) {
            (_, RiskAttitude::Neutral) => self.midpoint(),
            (Side::Carrier, RiskAttitude::Seeking) | (Side::Shipper, RiskAttitude::Averse) => self.avg_pay,
            (Side::Carrier, RiskAttitude::Averse) | (Side::Shipper, RiskAttitude::Seeking) => self.avg_cost,
        }
    }
}

/// Averages under independent uniform distances and volumes. The mean of
/// the distance-volume outer product factorizes into the product of means.
pub fn bias_presets(config: &CaseConfig) -> BiasPresets {
    let size = config.distance_range.mean() * config.volume_range.mean();
    BiasPresets {
        avg_cost: size * config.transport_rate,
        avg_pay: size * config.willingness_rate,
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Side {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "shipper" => Ok(Side::Shipper),
            "carrier" => Ok(Side::Carrier),
            other => Err(Error::InvalidConfig(alloc::format!("unknown side `{}`", other))),
        }
    }
}
