//! Run configuration: one TOML file of sections plus `key=value` overrides.
//!
//! ```toml
//! seed = 7
//! sequences = 4
//!
//! [scene]
//! duration = 10.0
//!
//! [train]
//! max_epochs = 50
//! ```
//!
//! Overrides use dotted keys (`scene.duration=12`, `model.window=4`). Values
//! are parsed as TOML literals, falling back to plain strings. Precedence is
//! override > file > built-in default.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use toml::Value;

use crate::ego::SolverConfig;
use crate::error::{Error, Result};
use crate::eval::EvalConfig;
use crate::instance::ClusterConfig;
use crate::metrics::SRmseConfig;
use crate::network::{ModelConfig, TrainConfig};
use crate::sim::SceneConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    /// Sequences written by `simulate`.
    pub sequences: usize,
    pub scene: SceneConfig,
    pub model: ModelConfig,
    pub train: TrainConfig,
    pub solver: SolverConfig,
    pub cluster: ClusterConfig,
    pub s_rmse: SRmseConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            sequences: 4,
            scene: SceneConfig::default(),
            model: ModelConfig::default(),
            train: TrainConfig::default(),
            solver: SolverConfig::default(),
            cluster: ClusterConfig::default(),
            s_rmse: SRmseConfig::default(),
        }
    }
}

fn parse_value(raw: &str) -> Value {
    let doc = format!("v = {raw}");
    match doc.parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| Value::String(raw.to_owned())),
        Err(_) => Value::String(raw.to_owned()),
    }
}

fn set_dotted(table: &mut toml::Table, key: &str, value: Value) -> Result<()> {
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(Error::config(key, "malformed key"));
    }
    let mut cur = table;
    for part in &parts[..parts.len() - 1] {
        let entry = cur
            .entry(part.to_string())
            .or_insert_with(|| Value::Table(toml::Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| Error::config(key, format!("`{part}` is not a section")))?;
    }
    cur.insert(parts[parts.len() - 1].to_owned(), value);
    Ok(())
}

/// Splits `key=value`.
pub fn parse_override(s: &str) -> Result<(String, String)> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| Error::config(s, "override must look like key=value"))?;
    Ok((k.trim().to_owned(), v.trim().to_owned()))
}

impl RunConfig {
    /// Builds a configuration from optional TOML text and overrides.
    pub fn from_parts(text: Option<&str>, overrides: &[(String, String)]) -> Result<Self> {
        let mut table: toml::Table = match text {
            Some(t) => t.parse().map_err(|e: toml::de::Error| Error::config("config", e.message().to_owned()))?,
            None => toml::Table::new(),
        };
        for (k, v) in overrides {
            set_dotted(&mut table, k, parse_value(v))?;
        }
        let cfg: RunConfig = Value::Table(table).try_into().map_err(|e: toml::de::Error| {
            let msg = e.message().to_owned();
            let key = msg
                .split('`')
                .nth(1)
                .filter(|_| msg.starts_with("unknown field"))
                .unwrap_or("config")
                .to_owned();
            Error::config(key, msg)
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: Option<&Path>, overrides: &[(String, String)]) -> Result<Self> {
        let text = match path {
            Some(p) => Some(fs::read_to_string(p).map_err(|e| Error::io(p, e))?),
            None => None,
        };
        Self::from_parts(text.as_deref(), overrides)
    }

    pub fn validate(&self) -> Result<()> {
        self.scene.validate().map_err(|e| prefix(e, "scene"))?;
        self.model.validate()?;
        self.train.validate()?;
        let s = &self.solver;
        let checks = [
            ("solver.sigma", s.sigma > 0.0),
            ("solver.c_static", s.c_static >= 0.0),
            ("solver.label_threshold", s.label_threshold >= 0.0),
            ("solver.condition_limit", s.condition_limit > 1.0),
            ("solver.iterations", s.iterations >= 1),
            ("cluster.eps", self.cluster.eps > 0.0),
            ("cluster.min_pts", self.cluster.min_pts >= 1),
            ("cluster.gate", self.cluster.gate > 0.0),
            ("s_rmse.speed_c_err", self.s_rmse.speed_c_err > 0.0),
            ("s_rmse.speed_s", self.s_rmse.speed_s > 0.0),
            ("s_rmse.yaw_rate_c_err", self.s_rmse.yaw_rate_c_err > 0.0),
            ("s_rmse.yaw_rate_s", self.s_rmse.yaw_rate_s > 0.0),
        ];
        for (key, ok) in checks {
            if !ok {
                return Err(Error::config(key, "out of range"));
            }
        }
        Ok(())
    }

    pub fn eval(&self) -> EvalConfig {
        EvalConfig {
            cluster: self.cluster,
            s_rmse: self.s_rmse,
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the canonical TOML form, hex encoded.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_toml().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

fn prefix(e: Error, section: &str) -> Error {
    match e {
        Error::Config { key, reason } => Error::Config {
            key: format!("{section}.{key}"),
            reason,
        },
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(k: &str, v: &str) -> (String, String) {
        (k.to_owned(), v.to_owned())
    }

    #[test]
    fn defaults_carry_paper_values() {
        let c = RunConfig::default();
        assert_eq!(c.solver.sigma, 0.013);
        assert_eq!((c.solver.c_static, c.solver.label_threshold), (0.1, 0.1));
        assert_eq!(c.model.window, 8);
        assert_eq!((c.train.batch_size, c.train.learning_rate), (64, 0.001));
        assert_eq!(c.model.dropout, 0.3);
        assert_eq!(c.scene.min_lifespan, 5);
        assert_eq!((c.s_rmse.speed_c_err, c.s_rmse.yaw_rate_s), (50.0, 2.86));
    }

    #[test]
    fn precedence() {
        let text = "seed = 3\n[scene]\nduration = 9.0\nframe_rate = 10.0\n";
        let c = RunConfig::from_parts(Some(text), &[set("scene.duration", "12.5")]).unwrap();
        assert_eq!(c.seed, 3);
        assert_eq!(c.scene.duration, 12.5);
        assert_eq!(c.scene.frame_rate, 10.0);
        assert_eq!(c.scene.max_range, SceneConfig::default().max_range);
    }

    #[test]
    fn errors_name_the_key() {
        let err = RunConfig::from_parts(None, &[set("scene.duration", "-1")]).unwrap_err();
        assert!(matches!(&err, Error::Config { key, .. } if key == "scene.duration"), "{err}");
        let err = RunConfig::from_parts(Some("[scene]\ndurration = 1.0\n"), &[]).unwrap_err();
        assert!(matches!(&err, Error::Config { key, .. } if key == "durration"), "{err}");
        let err = RunConfig::from_parts(None, &[set("train.batch_size", "0")]).unwrap_err();
        assert!(matches!(&err, Error::Config { key, .. } if key == "train.batch_size"));
        assert!(parse_override("novalue").is_err());
    }

    #[test]
    fn canonical_form_round_trips() {
        let c = RunConfig::from_parts(None, &[set("model.window", "4"), set("scene.lanes", "[1.0, -2.0]")]).unwrap();
        let back = RunConfig::from_parts(Some(&c.to_toml()), &[]).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.hash(), c.hash());
        assert_ne!(RunConfig::default().hash(), c.hash());
    }
}
