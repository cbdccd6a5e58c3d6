//! Learning traders: features, networks, Gaussian policies and update rules.

pub mod adam;
pub mod features;
pub mod loss;
pub mod nn;
pub mod normal;
pub mod policy;
pub mod profile;
pub mod signal;
pub mod update;

pub use adam::Adam;
pub use features::{extract_features, FeatureScale, FeatureVector, StateSummary};
pub use loss::{critic_loss, gaussian_actor_loss};
pub use nn::Mlp;
pub use policy::{Action, CriticModel, PolicyModel};
pub use profile::{bias_presets, BiasPresets, RiskAttitude, RiskProfile, Side};
pub use signal::{compute_signal, Algorithm};
pub use update::{update_policies, Learner, UpdateMode, UpdateStats};
