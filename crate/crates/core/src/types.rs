//! Domain types shared by the engine, the reference evaluator, and I/O.

use std::collections::{BTreeSet, VecDeque};

use chrono::{DateTime, TimeZone, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Characters of normalized text retained per representation. Edit distance
/// only ever sees this prefix; keywords are extracted from the full text.
pub const TEXT_CHAR_CAP: usize = 2_000;

/// Minimum keyword length, in characters.
pub const MIN_KEYWORD_CHARS: usize = 3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EventError {
    #[error("complexity tier {0} outside 1..=4")]
    Tier(u8),
    #[error("active_run_hours must be finite and non-negative, got {0}")]
    RunHours(f64),
    #[error("empty user_id")]
    EmptyUser,
}

/// Comparable form of a prompt or task trace.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskRepresentation {
    pub normalized_text: String,
    pub keywords: BTreeSet<String>,
}

impl TaskRepresentation {
    /// Lowercases and collapses whitespace, then extracts keywords:
    /// alphanumeric runs of at least three characters, deduplicated.
    pub fn from_prompt(prompt: &str) -> Self {
        let normalized = normalize(prompt);
        let keywords = extract_keywords(&normalized);
        let normalized_text = match normalized.char_indices().nth(TEXT_CHAR_CAP) {
            Some((cut, _)) => normalized[..cut].to_string(),
            None => normalized,
        };
        Self {
            normalized_text,
            keywords,
        }
    }

    pub fn char_len(&self) -> usize {
        self.normalized_text.chars().count()
    }
}

pub fn normalize(text: &str) -> String {
    text.split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn extract_keywords(normalized: &str) -> BTreeSet<String> {
    normalized
        .split(|c: char| !c.is_alphanumeric())
        .filter(|w| w.chars().count() >= MIN_KEYWORD_CHARS)
        .map(str::to_string)
        .collect()
}

/// One AI interaction as seen by the engine.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionEvent {
    pub user_id: String,
    pub timestamp: DateTime<Utc>,
    pub task: TaskRepresentation,
    pub token_count: u64,
    pub complexity_tier: u8,
    pub agent_turns: u32,
    pub active_run_hours: f64,
    pub department: Option<String>,
}

impl InteractionEvent {
    /// Minimal event: tier 1, no autonomy telemetry, no department.
    pub fn new(user_id: impl Into<String>, epoch_seconds: i64, prompt: &str, tokens: u64) -> Self {
        Self {
            user_id: user_id.into(),
            timestamp: Utc
                .timestamp_opt(epoch_seconds, 0)
                .single()
                .expect("epoch seconds within chrono range"),
            task: TaskRepresentation::from_prompt(prompt),
            token_count: tokens,
            complexity_tier: 1,
            agent_turns: 0,
            active_run_hours: 0.0,
            department: None,
        }
    }

    pub fn with_tier(mut self, tier: u8) -> Self {
        self.complexity_tier = tier;
        self
    }

    pub fn with_autonomy(mut self, agent_turns: u32, active_run_hours: f64) -> Self {
        self.agent_turns = agent_turns;
        self.active_run_hours = active_run_hours;
        self
    }

    pub fn with_department(mut self, department: impl Into<String>) -> Self {
        self.department = Some(department.into());
        self
    }

    pub fn epoch_seconds(&self) -> i64 {
        self.timestamp.timestamp()
    }

    pub fn validate(&self) -> Result<(), EventError> {
        if self.user_id.is_empty() {
            return Err(EventError::EmptyUser);
        }
        if !(1..=4).contains(&self.complexity_tier) {
            return Err(EventError::Tier(self.complexity_tier));
        }
        if !(self.active_run_hours.is_finite() && self.active_run_hours >= 0.0) {
            return Err(EventError::RunHours(self.active_run_hours));
        }
        Ok(())
    }
}

/// Index of a fixed-length evaluation period counted from the Unix epoch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PeriodIndex(pub i64);

impl PeriodIndex {
    pub fn of(epoch_seconds: i64, period_seconds: i64) -> Self {
        PeriodIndex(epoch_seconds.div_euclid(period_seconds))
    }

    pub fn start_seconds(self, period_seconds: i64) -> i64 {
        self.0 * period_seconds
    }

    pub fn next(self) -> Self {
        PeriodIndex(self.0 + 1)
    }
}

/// Per-period aggregate kept in the rolling complexity window.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowEntry {
    /// Sum of novelty-weighted tier multipliers.
    pub weighted_tier_sum: f64,
    /// Sum of novelty weights.
    pub novelty_sum: f64,
}

/// All recurrent state for one user.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UserState {
    pub token_stock: f64,
    pub freq_raw: f64,
    pub inactive_streak: u64,
    pub complexity_window: VecDeque<WindowEntry>,
    pub history: VecDeque<TaskRepresentation>,
    pub leverage_level: u8,
    pub previous_index: Option<f64>,
    /// ΔIIQ of the most recent period, kept so a snapshot alone can report it.
    pub last_delta: Option<f64>,
    pub last_period_index: Option<PeriodIndex>,
}

impl UserState {
    /// Cold-start state: empty stocks, empty windows, no prior index.
    pub fn fresh(leverage_level: u8) -> Self {
        Self {
            token_stock: 0.0,
            freq_raw: 0.0,
            inactive_streak: 0,
            complexity_window: VecDeque::new(),
            history: VecDeque::new(),
            leverage_level,
            previous_index: None,
            last_delta: None,
            last_period_index: None,
        }
    }
}

/// One user-period evaluation, including the interpretation layer.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodResult {
    pub user_id: String,
    pub period_index: PeriodIndex,
    pub token_stock: f64,
    pub frequency: f64,
    pub recency: f64,
    pub leverage: f64,
    pub complexity: f64,
    pub autonomy: f64,
    pub effective_tokens: f64,
    pub distinct_mass: f64,
    pub autonomy_mass: f64,
    pub iai: f64,
    pub iiq_index: f64,
    pub delta_iiq: Option<f64>,
    pub hours_saved: f64,
    pub usd_impact: f64,
}

impl PeriodResult {
    pub fn factor_product(&self) -> f64 {
        self.token_stock
            * self.frequency
            * self.recency
            * self.leverage
            * self.complexity
            * self.autonomy
    }
}
