//! Versioned JSON snapshot of every user's engine state.
//!
//! ```json
//! {
//!   "format_version": 1,
//!   "config_hash": "<sha-256 of the canonical config>",
//!   "users": { "<user_id>": { ...UserState... } }
//! }
//! ```
//!
//! Output is pretty-printed with sorted user keys and shortest round-trip
//! floats, so save, load, save is byte-identical.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::EngineConfig;
use crate::types::{UserState, TEXT_CHAR_CAP};

pub const SNAPSHOT_FORMAT: u32 = 1;

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error("snapshot is not valid: {0}")]
    Json(#[from] serde_json::Error),
    #[error("snapshot format {0} unsupported (expected {SNAPSHOT_FORMAT})")]
    Format(u32),
    #[error("snapshot was written under config {found}, current config is {expected}")]
    ConfigMismatch { expected: String, found: String },
    #[error("user {user}: {message}")]
    BadUser { user: String, message: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateSnapshot {
    pub format_version: u32,
    pub config_hash: String,
    pub users: BTreeMap<String, UserState>,
}

impl StateSnapshot {
    pub fn new(config: &EngineConfig) -> Self {
        Self {
            format_version: SNAPSHOT_FORMAT,
            config_hash: config.hash(),
            users: BTreeMap::new(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("snapshot serializes");
        s.push('\n');
        s
    }

    /// Parses without checking the config hash; structural checks still run.
    pub fn from_json_unchecked(text: &str) -> Result<Self, SnapshotError> {
        let snap: Self = serde_json::from_str(text)?;
        if snap.format_version != SNAPSHOT_FORMAT {
            return Err(SnapshotError::Format(snap.format_version));
        }
        for (user, state) in &snap.users {
            check_state(state).map_err(|message| SnapshotError::BadUser {
                user: user.clone(),
                message: message.to_string(),
            })?;
        }
        Ok(snap)
    }

    /// Parses and checks that the snapshot belongs to `config`.
    pub fn from_json(text: &str, config: &EngineConfig) -> Result<Self, SnapshotError> {
        let snap = Self::from_json_unchecked(text)?;
        snap.check_config(config)?;
        Ok(snap)
    }

    pub fn check_config(&self, config: &EngineConfig) -> Result<(), SnapshotError> {
        let expected = config.hash();
        if self.config_hash != expected {
            return Err(SnapshotError::ConfigMismatch {
                expected,
                found: self.config_hash.clone(),
            });
        }
        for (user, state) in &self.users {
            let bad = |message: &str| SnapshotError::BadUser {
                user: user.clone(),
                message: message.to_string(),
            };
            config
                .leverage_multiplier(state.leverage_level)
                .map_err(|_| bad("leverage level outside the configured table"))?;
            if state.complexity_window.len() > config.complexity_window {
                return Err(bad("complexity window longer than configured"));
            }
            if state.history.len() > config.history_capacity {
                return Err(bad("history longer than configured capacity"));
            }
        }
        Ok(())
    }

    pub fn load(path: &Path, config: &EngineConfig) -> Result<Self, SnapshotError> {
        Self::from_json(&read(path)?, config)
    }

    pub fn load_unchecked(path: &Path) -> Result<Self, SnapshotError> {
        Self::from_json_unchecked(&read(path)?)
    }

    /// Writes to a sibling temp file, then renames over `path`.
    pub fn save(&self, path: &Path) -> Result<(), SnapshotError> {
        super::write_atomic(path, self.to_json().as_bytes()).map_err(|source| SnapshotError::Io {
            path: path.display().to_string(),
            source,
        })
    }
}

fn read(path: &Path) -> Result<String, SnapshotError> {
    std::fs::read_to_string(path).map_err(|source| SnapshotError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn check_state(s: &UserState) -> Result<(), &'static str> {
    let nonneg = |x: f64| x.is_finite() && x >= 0.0;
    if !nonneg(s.token_stock) || !nonneg(s.freq_raw) {
        return Err("stocks must be finite and non-negative");
    }
    if s.complexity_window
        .iter()
        .any(|w| !nonneg(w.weighted_tier_sum) || !nonneg(w.novelty_sum))
    {
        return Err("complexity window entries must be finite and non-negative");
    }
    if s.history.iter().any(|t| t.char_len() > TEXT_CHAR_CAP) {
        return Err("history text over the length cap");
    }
    if s.previous_index
        .is_some_and(|x| !(0.0..=1000.0).contains(&x))
        || s.last_delta.is_some_and(|x| !x.is_finite())
    {
        return Err("index out of range");
    }
    if s.previous_index.is_some() != s.last_period_index.is_some() {
        return Err("index and frontier must be set together");
    }
    Ok(())
}
