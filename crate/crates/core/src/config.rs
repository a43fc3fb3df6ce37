//! Plain-text `key = value` configuration files.
//!
//! Blank lines and lines starting with `#` are ignored. Keys are free-form
//! dotted names (`attitude.roll.kp`); later duplicates override earlier ones.

use std::collections::BTreeMap;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("missing parameter `{0}`")]
    Missing(String),
    #[error("parameter `{key}`: cannot parse `{value}`")]
    Parse { key: String, value: String },
    #[error("parameter `{key}`: {reason}")]
    Invalid { key: String, reason: String },
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct KvConfig {
    entries: BTreeMap<String, String>,
}

impl KvConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut entries = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or(ConfigError::Syntax { line: n + 1 })?;
            let key = key.trim();
            if key.is_empty() {
                return Err(ConfigError::Syntax { line: n + 1 });
            }
            entries.insert(key.to_string(), value.trim().to_string());
        }
        Ok(Self { entries })
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.entries.insert(key.to_string(), value.to_string());
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<T, ConfigError> {
        let value = self
            .raw(key)
            .ok_or_else(|| ConfigError::Missing(key.to_string()))?;
        value.parse().map_err(|_| ConfigError::Parse {
            key: key.to_string(),
            value: value.to_string(),
        })
    }

    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T, ConfigError> {
        if self.contains(key) {
            self.get(key)
        } else {
            Ok(default)
        }
    }

    /// Overlays `other` on top of `self`.
    pub fn merged(mut self, other: &KvConfig) -> Self {
        for (k, v) in &other.entries {
            self.entries.insert(k.clone(), v.clone());
        }
        self
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }
}

/// The shipped default quadrotor configuration: physical parameters,
/// controller gains and hardware declarations.
pub const DEFAULT_QUAD_CONFIG: &str = include_str!("../../../configs/quad.conf");

pub fn default_quad_config() -> KvConfig {
    KvConfig::parse(DEFAULT_QUAD_CONFIG).expect("shipped config parses")
}
