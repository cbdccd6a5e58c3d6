//! Experiment configurations and named presets.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::agents::{bias_presets, Algorithm, FeatureScale, Learner, RiskAttitude, RiskProfile, Side, UpdateMode};
use crate::market::CaseConfig;
use crate::rng::{stream, Stream};
use crate::sim::{ScriptedPrice, Trader};
use crate::{Error, Result};

/// Hyperparameters of a learning trader.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct LearnerSpec {
    #[cfg_attr(feature = "serde", serde(flatten))]
    pub profile: RiskProfile,
    #[cfg_attr(feature = "serde", serde(default))]
    pub algorithm: Algorithm,
    #[cfg_attr(feature = "serde", serde(default = "default_hidden"))]
    pub actor_hidden: Vec<usize>,
    #[cfg_attr(feature = "serde", serde(default = "default_hidden"))]
    pub critic_hidden: Vec<usize>,
    #[cfg_attr(feature = "serde", serde(default))]
    pub update_mode: UpdateMode,
}

fn default_hidden() -> Vec<usize> {
    vec![20]
}

impl LearnerSpec {
    pub fn new(profile: RiskProfile) -> Self {
        LearnerSpec {
            profile,
            algorithm: Algorithm::PolicyGradient,
            actor_hidden: default_hidden(),
            critic_hidden: default_hidden(),
            update_mode: UpdateMode::Sum,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "lowercase"))]
pub enum AgentSpec {
    Learning(LearnerSpec),
    Scripted { price: ScriptedPrice },
}

impl AgentSpec {
    pub fn learning(profile: RiskProfile) -> Self {
        AgentSpec::Learning(LearnerSpec::new(profile))
    }

    pub fn learner(&self) -> Option<&LearnerSpec> {
        match self {
            AgentSpec::Learning(l) => Some(l),
            AgentSpec::Scripted { .. } => None,
        }
    }

    pub fn learner_mut(&mut self) -> Option<&mut LearnerSpec> {
        match self {
            AgentSpec::Learning(l) => Some(l),
            AgentSpec::Scripted { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct ExperimentConfig {
    pub name: String,
    pub case: CaseConfig,
    pub shipper: AgentSpec,
    pub carrier: AgentSpec,
    pub replications: u32,
    pub seed: u64,
    pub warmup_percent: u32,
    pub horizon_percent: u32,
}

pub const DEFAULT_REPLICATIONS: u32 = 5;
pub const DEFAULT_WARMUP_PERCENT: u32 = 10;
pub const DEFAULT_HORIZON_PERCENT: u32 = 5;

impl ExperimentConfig {
    pub fn new(name: &str, case: CaseConfig, shipper: AgentSpec, carrier: AgentSpec) -> Self {
        ExperimentConfig {
            name: name.to_string(),
            case,
            shipper,
            carrier,
            replications: DEFAULT_REPLICATIONS,
            seed: 0,
            warmup_percent: DEFAULT_WARMUP_PERCENT,
            horizon_percent: DEFAULT_HORIZON_PERCENT,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.case.validate()?;
        if self.replications == 0 {
            return Err(Error::InvalidConfig("replications must be at least 1".into()));
        }
        if self.warmup_percent >= 100 || self.horizon_percent == 0 || self.horizon_percent > 100 {
            return Err(Error::InvalidConfig(format!(
                "warm-up must be below 100% and the horizon window within 1..=100% (got {} and {})",
                self.warmup_percent, self.horizon_percent
            )));
        }
        for (side, spec) in [("shipper", &self.shipper), ("carrier", &self.carrier)] {
            match spec {
                AgentSpec::Learning(l) => {
                    let p = &l.profile;
                    let ok = p.learning_rate > 0.0
                        && p.learning_rate.is_finite()
                        && p.penalty_slope >= 0.0
                        && p.penalty_slope.is_finite()
                        && p.sigma_init > 0.0
                        && p.sigma_init.is_finite()
                        && p.bias_init.is_finite();
                    if !ok {
                        return Err(Error::InvalidConfig(format!("{side}: invalid hyperparameters {p:?}")));
                    }
                    if l.actor_hidden.contains(&0) || l.critic_hidden.contains(&0) {
                        return Err(Error::InvalidConfig(format!("{side}: hidden layers must be non-empty")));
                    }
                }
                AgentSpec::Scripted { price } => {
                    if !price.value().is_finite() {
                        return Err(Error::InvalidConfig(format!("{side}: scripted price must be finite")));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn replication_seed(&self, replication: u32) -> u64 {
        self.seed.wrapping_add(replication as u64)
    }

    /// Freshly initialized traders for one replication.
    pub fn traders(&self, replication: u32) -> Result<(Trader, Trader)> {
        let seed = self.replication_seed(replication);
        let scale = FeatureScale::for_case(&self.case);
        let build = |spec: &AgentSpec, init: Stream| -> Result<Trader> {
            Ok(match spec {
                AgentSpec::Scripted { price } => Trader::Scripted(*price),
                AgentSpec::Learning(l) => {
                    let mut learner = Learner::new(
                        l.profile,
                        l.algorithm,
                        &l.actor_hidden,
                        &l.critic_hidden,
                        scale,
                        &mut stream(seed, init),
                    )?;
                    learner.update_mode = l.update_mode;
                    Trader::Learning(Box::new(learner))
                }
            })
        };
        Ok((
            build(&self.shipper, Stream::ShipperInit)?,
            build(&self.carrier, Stream::CarrierInit)?,
        ))
    }
}

fn tuned(side: Side) -> AgentSpec {
    AgentSpec::learning(RiskProfile::tuned(side))
}

fn case1_with(name: &str, shipper: AgentSpec, carrier: AgentSpec) -> ExperimentConfig {
    ExperimentConfig::new(name, CaseConfig::case1(), shipper, carrier)
}

fn with_shipper(name: &str, edit: impl FnOnce(&mut LearnerSpec)) -> ExperimentConfig {
    let mut cfg = case1_with(name, tuned(Side::Shipper), tuned(Side::Carrier));
    edit(cfg.shipper.learner_mut().unwrap());
    cfg
}

fn with_both(name: &str, edit: impl Fn(&mut LearnerSpec)) -> ExperimentConfig {
    let mut cfg = case1_with(name, tuned(Side::Shipper), tuned(Side::Carrier));
    edit(cfg.shipper.learner_mut().unwrap());
    edit(cfg.carrier.learner_mut().unwrap());
    cfg
}

fn arch(name: &str) -> Vec<usize> {
    match name {
        "linear" => vec![],
        "1l20n" => vec![20],
        "2l20n" => vec![20, 20],
        _ => vec![20, 20, 20],
    }
}

const LR_SWEEP: [&str; 5] = ["0.1", "0.01", "0.001", "0.0001", "0.00001"];
const SIGMA_SWEEP: [&str; 6] = ["0.01", "0.1", "0.5", "1.0", "1.5", "2.0"];
const ARCH_SWEEP: [&str; 4] = ["linear", "1l20n", "2l20n", "3l20n"];
const SHIPPER_LR_SWEEP: [&str; 6] = ["0.0001", "0.0005", "0.001", "0.002", "0.005", "0.01"];
const SHIPPER_PENALTY_SWEEP: [&str; 5] = ["0", "0.5", "1.0", "2.0", "5.0"];
const SHIPPER_BIAS_SWEEP: [&str; 5] = ["0.0", "0.5", "1.0", "1.5", "2.0"];
const BUDGET_SPLITS: [(u32, u32); 5] = [(100_000, 10), (10_000, 100), (1000, 1000), (100, 10_000), (10, 100_000)];
const CASE2_CAPACITIES: [u32; 2] = [40, 300];

fn parse_num(s: &str) -> f64 {
    s.parse().expect("sweep values are valid numbers")
}

/// Every preset name, in display order.
pub fn preset_names() -> Vec<String> {
    let mut names: Vec<String> = ["verify-fixed-ask", "verify-fixed-bid", "case1-tuned", "case1-shipper-linear", "case1-shipper-q-ac"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    for c in RiskAttitude::ALL {
        for s in RiskAttitude::ALL {
            names.push(format!("case1-risk-{}-vs-{}", c.abbreviation(), s.abbreviation()));
        }
    }
    for cap in CASE2_CAPACITIES {
        names.push(format!("case2-cap{cap}-ra-rnbias"));
        for a in RiskAttitude::ALL {
            names.push(format!("case2-cap{cap}-risk-{}", a.abbreviation()));
        }
        for c in RiskAttitude::ALL {
            for s in RiskAttitude::ALL {
                names.push(format!("case2-cap{cap}-bias-{}-vs-{}", c.abbreviation(), s.abbreviation()));
            }
        }
    }
    for (episodes, days) in BUDGET_SPLITS {
        names.push(format!("budget-{episodes}x{days}"));
    }
    let sweeps: [(&str, &[&str]); 9] = [
        ("sweep-lr", &LR_SWEEP),
        ("sweep-sigma", &SIGMA_SWEEP),
        ("sweep-arch", &ARCH_SWEEP),
        ("sweep-algo", &["pg", "pg-baseline", "q-ac", "td1", "advantage"]),
        ("sweep-critic", &ARCH_SWEEP),
        ("shipper-lr", &SHIPPER_LR_SWEEP),
        ("shipper-penalty", &SHIPPER_PENALTY_SWEEP),
        ("shipper-bias", &SHIPPER_BIAS_SWEEP),
        ("shipper-sigma", &SIGMA_SWEEP),
    ];
    for (prefix, values) in sweeps {
        for v in values {
            names.push(format!("{prefix}-{v}"));
        }
    }
    names
}

/// Case II profile: risk-averse learning rate and penalty unless `full`, in
/// which case the attitude's own learning rate and penalty are used too.
fn case2_learner(cap: u32, side: Side, bias: RiskAttitude, rates: RiskAttitude) -> AgentSpec {
    let case = CaseConfig::case2(cap);
    let b = bias_presets(&case).bias(side, bias);
    let mut profile = RiskProfile::case1(side, rates).with_bias(b);
    profile.attitude = bias;
    AgentSpec::learning(profile)
}

fn case2_preset(name: &str, cap: u32, rest: &str) -> Option<ExperimentConfig> {
    let case = CaseConfig::case2(cap);
    let build = |c: AgentSpec, s: AgentSpec| ExperimentConfig::new(name, case.clone(), s, c);
    if rest == "ra-rnbias" {
        let n = RiskAttitude::Neutral;
        let a = RiskAttitude::Averse;
        return Some(build(
            case2_learner(cap, Side::Carrier, n, a),
            case2_learner(cap, Side::Shipper, n, a),
        ));
    }
    if let Some(att) = rest.strip_prefix("risk-") {
        let att: RiskAttitude = att.parse().ok()?;
        return Some(build(
            case2_learner(cap, Side::Carrier, att, att),
            case2_learner(cap, Side::Shipper, att, att),
        ));
    }
    let pair = rest.strip_prefix("bias-")?;
    let (c, s) = pair.split_once("-vs-")?;
    let (c, s): (RiskAttitude, RiskAttitude) = (c.parse().ok()?, s.parse().ok()?);
    Some(build(
        case2_learner(cap, Side::Carrier, c, RiskAttitude::Averse),
        case2_learner(cap, Side::Shipper, s, RiskAttitude::Averse),
    ))
}

const SWEEP_PREFIXES: [&str; 9] = [
    "sweep-lr",
    "sweep-sigma",
    "sweep-arch",
    "sweep-algo",
    "sweep-critic",
    "shipper-lr",
    "shipper-penalty",
    "shipper-bias",
    "shipper-sigma",
];

fn build_preset(name: &str) -> Option<ExperimentConfig> {
    match name {
        "verify-fixed-ask" => {
            let mut cfg = case1_with(name, tuned(Side::Shipper), AgentSpec::Scripted {
                price: ScriptedPrice::Fixed(1.0),
            });
            cfg.case.episodes = 500;
            return Some(cfg);
        }
        "verify-fixed-bid" => {
            let mut cfg = case1_with(
                name,
                AgentSpec::Scripted {
                    price: ScriptedPrice::Fixed(2.0),
                },
                tuned(Side::Carrier),
            );
            cfg.case.episodes = 500;
            return Some(cfg);
        }
        "case1-tuned" => return Some(case1_with(name, tuned(Side::Shipper), tuned(Side::Carrier))),
        "case1-shipper-linear" => return Some(with_shipper(name, |l| l.actor_hidden = vec![])),
        "case1-shipper-q-ac" => return Some(with_shipper(name, |l| l.algorithm = Algorithm::QValue)),
        _ => {}
    }
    if let Some(pair) = name.strip_prefix("case1-risk-") {
        let (c, s) = pair.split_once("-vs-")?;
        let (c, s): (RiskAttitude, RiskAttitude) = (c.parse().ok()?, s.parse().ok()?);
        return Some(case1_with(
            name,
            AgentSpec::learning(RiskProfile::case1(Side::Shipper, s)),
            AgentSpec::learning(RiskProfile::case1(Side::Carrier, c)),
        ));
    }
    for cap in CASE2_CAPACITIES {
        if let Some(rest) = name.strip_prefix(&format!("case2-cap{cap}-")) {
            return case2_preset(name, cap, rest);
        }
    }
    if let Some(split) = name.strip_prefix("budget-") {
        let (e, d) = split.split_once('x')?;
        let pair = (e.parse().ok()?, d.parse().ok()?);
        let (episodes, days) = *BUDGET_SPLITS.iter().find(|&&p| p == pair)?;
        let mut cfg = case1_with(name, tuned(Side::Shipper), tuned(Side::Carrier));
        cfg.case.episodes = episodes;
        cfg.case.horizon_days = days;
        return Some(cfg);
    }
    let (prefix, value) = SWEEP_PREFIXES
        .iter()
        .find_map(|p| Some((*p, name.strip_prefix(p)?.strip_prefix('-')?)))?;
    let check = |values: &[&str]| values.contains(&value);
    let cfg = match prefix {
        "sweep-lr" if check(&LR_SWEEP) => with_both(name, |l| l.profile.learning_rate = parse_num(value)),
        "sweep-sigma" if check(&SIGMA_SWEEP) => with_both(name, |l| l.profile.sigma_init = parse_num(value)),
        "sweep-arch" if check(&ARCH_SWEEP) => with_both(name, |l| l.actor_hidden = arch(value)),
        "sweep-algo" => {
            let a: Algorithm = value.parse().ok()?;
            with_both(name, |l| l.algorithm = a)
        }
        "sweep-critic" if check(&ARCH_SWEEP) => with_both(name, |l| {
            l.algorithm = Algorithm::QValue;
            l.critic_hidden = arch(value);
        }),
        "shipper-lr" if check(&SHIPPER_LR_SWEEP) => {
            with_shipper(name, |l| l.profile.learning_rate = parse_num(value))
        }
        "shipper-penalty" if check(&SHIPPER_PENALTY_SWEEP) => {
            with_shipper(name, |l| l.profile.penalty_slope = parse_num(value))
        }
        "shipper-bias" if check(&SHIPPER_BIAS_SWEEP) => with_shipper(name, |l| l.profile.bias_init = parse_num(value)),
        "shipper-sigma" if check(&SIGMA_SWEEP) => {
            let mut cfg = with_shipper(name, |l| l.profile.sigma_init = parse_num(value));
            cfg.carrier.learner_mut().unwrap().profile.sigma_init = 1.0;
            cfg
        }
        _ => return None,
    };
    Some(cfg)
}

/// Full configuration of a named experiment.
pub fn preset(name: &str) -> Result<ExperimentConfig> {
    build_preset(name).ok_or_else(|| Error::UnknownPreset {
        name: name.to_string(),
        available: preset_names().join(", "),
    })
}
