//! Versioned JSON snapshots of trained traders.
//!
//! Each network is stored as its layer sizes plus, per layer, the row-major
//! weight matrix (`outputs x inputs`) and the bias vector. Optimizer moments
//! are not stored; a restored learner starts a fresh ADAM state.

use std::path::Path;

use serde::{Deserialize, Serialize};
use spotmarket_core::agents::{Algorithm, CriticModel, FeatureScale, Learner, Mlp, PolicyModel, RiskProfile, UpdateMode};

use crate::{Error, Result};

pub const FORMAT: &str = "spotmarket-checkpoint";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkRecord {
    pub layer_sizes: Vec<usize>,
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

impl NetworkRecord {
    pub fn from_network(net: &Mlp) -> Self {
        let sizes = net.sizes().to_vec();
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        let mut rest = net.params();
        for w in sizes.windows(2) {
            let (layer, tail) = rest.split_at(w[0] * w[1]);
            let (bias, tail) = tail.split_at(w[1]);
            weights.push(layer.to_vec());
            biases.push(bias.to_vec());
            rest = tail;
        }
        NetworkRecord {
            layer_sizes: sizes,
            weights,
            biases,
        }
    }

    pub fn to_network(&self) -> spotmarket_core::Result<Mlp> {
        let params = self
            .weights
            .iter()
            .zip(&self.biases)
            .flat_map(|(w, b)| w.iter().chain(b))
            .copied()
            .collect();
        let layers = self.layer_sizes.len().saturating_sub(1);
        if self.weights.len() != layers || self.biases.len() != layers {
            return Err(spotmarket_core::Error::Shape(format!(
                "{} weight and {} bias blocks for {layers} layers",
                self.weights.len(),
                self.biases.len()
            )));
        }
        for (i, w) in self.layer_sizes.windows(2).enumerate() {
            if self.weights[i].len() != w[0] * w[1] || self.biases[i].len() != w[1] {
                return Err(spotmarket_core::Error::Shape(format!("layer {i} does not match {:?}", self.layer_sizes)));
            }
        }
        Mlp::from_parts(self.layer_sizes.clone(), params)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnerRecord {
    pub algorithm: Algorithm,
    pub profile: RiskProfile,
    pub scale: FeatureScale,
    pub update_mode: UpdateMode,
    pub sigma_floor: f64,
    pub optimizer_steps: u64,
    pub actor: NetworkRecord,
    pub critic: Option<NetworkRecord>,
}

impl LearnerRecord {
    pub fn from_learner(l: &Learner) -> Self {
        LearnerRecord {
            algorithm: l.algorithm,
            profile: l.profile,
            scale: l.scale,
            update_mode: l.update_mode,
            sigma_floor: l.actor.sigma_floor,
            optimizer_steps: l.actor.optimizer.steps,
            actor: NetworkRecord::from_network(&l.actor.net),
            critic: l.critic.as_ref().map(|c| NetworkRecord::from_network(&c.net)),
        }
    }

    pub fn to_learner(&self) -> spotmarket_core::Result<Learner> {
        let mut actor = PolicyModel::from_network(self.actor.to_network()?)?;
        actor.sigma_floor = self.sigma_floor;
        let critic = self
            .critic
            .as_ref()
            .map(|c| c.to_network().and_then(CriticModel::from_network))
            .transpose()?;
        if critic.is_some() != self.algorithm.uses_critic() {
            return Err(spotmarket_core::Error::Shape(format!(
                "algorithm {} {} a critic",
                self.algorithm,
                if self.algorithm.uses_critic() { "needs" } else { "takes no" }
            )));
        }
        Ok(Learner {
            actor,
            critic,
            algorithm: self.algorithm,
            profile: self.profile,
            scale: self.scale,
            update_mode: self.update_mode,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    pub version: u32,
    pub experiment: String,
    pub episodes: u32,
    pub shipper: Option<LearnerRecord>,
    pub carrier: Option<LearnerRecord>,
}

impl Checkpoint {
    pub fn new(experiment: &str, episodes: u32, shipper: Option<&Learner>, carrier: Option<&Learner>) -> Self {
        Checkpoint {
            format: FORMAT.to_string(),
            version: VERSION,
            experiment: experiment.to_string(),
            episodes,
            shipper: shipper.map(LearnerRecord::from_learner),
            carrier: carrier.map(LearnerRecord::from_learner),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("checkpoints serialize")
    }

    pub fn from_json(text: &str, origin: &Path) -> Result<Self> {
        let cp: Checkpoint = serde_json::from_str(text).map_err(|e| Error::format(origin, e))?;
        if cp.format != FORMAT || cp.version != VERSION {
            return Err(Error::format(
                origin,
                format!("unsupported checkpoint {} v{} (expected {FORMAT} v{VERSION})", cp.format, cp.version),
            ));
        }
        for record in cp.shipper.iter().chain(&cp.carrier) {
            record.to_learner()?;
        }
        Ok(cp)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json() + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text, path)
    }
}
