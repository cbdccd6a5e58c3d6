//! Experiment files.
//!
//! A file is either a complete experiment or a partial one naming a preset
//! under `"base"`; the remaining keys are merged into the preset recursively.
//!
//! ```json
//! { "base": "case1-tuned", "case": { "episodes": 200 }, "shipper": { "penalty_slope": 0.0 } }
//! ```

use std::path::Path;

use serde_json::Value;
use spotmarket_core::experiment::{preset, ExperimentConfig};

use crate::{Error, Result};

fn merge(base: &mut Value, patch: Value) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (k, v) in p {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

/// Parses an experiment document; `origin` only labels errors.
pub fn parse(text: &str, origin: &Path) -> Result<ExperimentConfig> {
    let mut doc: Value = serde_json::from_str(text).map_err(|e| Error::format(origin, e))?;
    let value = match doc.as_object_mut().and_then(|o| o.remove("base")) {
        Some(Value::String(name)) => {
            let mut base = serde_json::to_value(preset(&name)?).expect("configs serialize");
            merge(&mut base, doc);
            base
        }
        Some(other) => return Err(Error::format(origin, format!("`base` must be a preset name, got {other}"))),
        None => doc,
    };
    let cfg: ExperimentConfig = serde_json::from_value(value).map_err(|e| Error::format(origin, e))?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse(&text, path)
}

/// A preset name or a path to an experiment file.
pub fn resolve(target: &str) -> Result<ExperimentConfig> {
    let path = Path::new(target);
    if path.is_file() {
        load(path)
    } else {
        Ok(preset(target)?)
    }
}

pub fn to_json(cfg: &ExperimentConfig) -> String {
    serde_json::to_string_pretty(cfg).expect("configs serialize")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_merge_into_preset() {
        let cfg = parse(
            r#"{"base": "case1-tuned", "case": {"episodes": 7}, "shipper": {"penalty_slope": 0.0}}"#,
            Path::new("inline"),
        )
        .unwrap();
        assert_eq!(cfg.case.episodes, 7);
        assert_eq!(cfg.case.horizon_days, 1000);
        let s = cfg.shipper.learner().unwrap();
        assert_eq!((s.profile.penalty_slope, s.profile.learning_rate), (0.0, 0.001));
    }

    #[test]
    fn full_documents_round_trip() {
        let cfg = preset("case2-cap40-ra-rnbias").unwrap();
        assert_eq!(parse(&to_json(&cfg), Path::new("inline")).unwrap(), cfg);
    }

    #[test]
    fn bad_documents_are_rejected() {
        assert!(parse(r#"{"base": "nope"}"#, Path::new("x")).is_err());
        assert!(parse(r#"{"base": 3}"#, Path::new("x")).is_err());
        assert!(parse(r#"{"base": "case1-tuned", "replications": 0}"#, Path::new("x")).is_err());
        assert!(parse("not json", Path::new("x")).is_err());
    }
}
