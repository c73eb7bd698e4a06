//! Engine configuration, calibration tables, and the flat `key = value` loader.
//!
//! The config document is UTF-8 text with one `key = value` per line. Blank
//! lines and lines starting with `#` are ignored, as is anything after a `#`
//! on a value line. Keys are the [`EngineConfig`] field names as listed in
//! [`KEYS`]; unknown or repeated keys are rejected. Keys left out take the
//! defaults from [`EngineConfig::default`].
//!
//! ```text
//! # six-hour evaluation grid
//! period_hours = 6
//! similarity_method = hybrid
//! leverage = 1.0, 1.5, 2.5, 4.0, 7.0, 14.0, 25.0, 50.0
//! ```

use std::fmt;
use std::str::FromStr;

use sha2::{Digest, Sha256};
use thiserror::Error;

/// Period lengths (hours) that divide a day evenly.
pub const VALID_PERIOD_HOURS: [u32; 8] = [1, 2, 3, 4, 6, 8, 12, 24];

/// Working days in the week used for the weekly hours-saved ceiling.
pub const WORKING_DAYS_PER_WEEK: f64 = 5.0;

/// Every accepted key, in render order.
pub const KEYS: [&str; 18] = [
    "alpha_T_daily",
    "alpha_F_daily",
    "grace_periods",
    "lambda_daily",
    "complexity_window",
    "omega_turns",
    "omega_hours",
    "gamma",
    "leverage",
    "complexity",
    "max_expected",
    "k_hours_per_1k",
    "rho",
    "wage_usd",
    "work_hours_per_day",
    "period_hours",
    "history_capacity",
    "similarity_method",
];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`")]
    Malformed { line: usize },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: duplicate key `{key}`")]
    DuplicateKey { line: usize, key: String },
    #[error("line {line}: invalid value for `{key}`: {value:?}")]
    InvalidValue {
        line: usize,
        key: String,
        value: String,
    },
    #[error("{key} out of range")]
    OutOfRange { key: &'static str },
    #[error("unknown leverage level {0}")]
    UnknownLevel(u8),
    #[error("unknown complexity tier {0}")]
    UnknownTier(u8),
}

/// Role-tier leverage multipliers, indexed by level starting at 1.
#[derive(Debug, Clone, PartialEq)]
pub struct LeverageTable {
    multipliers: Vec<f64>,
}

impl LeverageTable {
    pub const MAX_LEVELS: usize = 8;

    pub fn new(multipliers: Vec<f64>) -> Result<Self, ConfigError> {
        let ok = !multipliers.is_empty()
            && multipliers.len() <= Self::MAX_LEVELS
            && multipliers.iter().all(|m| m.is_finite() && *m > 0.0)
            && multipliers.windows(2).all(|w| w[0] < w[1]);
        if !ok {
            return Err(ConfigError::OutOfRange { key: "leverage" });
        }
        Ok(Self { multipliers })
    }

    pub fn multiplier(&self, level: u8) -> Result<f64, ConfigError> {
        (level as usize)
            .checked_sub(1)
            .and_then(|i| self.multipliers.get(i))
            .copied()
            .ok_or(ConfigError::UnknownLevel(level))
    }

    pub fn levels(&self) -> usize {
        self.multipliers.len()
    }

    pub fn multipliers(&self) -> &[f64] {
        &self.multipliers
    }
}

impl Default for LeverageTable {
    fn default() -> Self {
        Self {
            multipliers: vec![1.0, 1.5, 2.5, 4.0, 7.0, 14.0, 25.0, 50.0],
        }
    }
}

/// Task-complexity multipliers for tiers 1 (routine) through 4 (agentic).
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexityTable {
    multipliers: [f64; 4],
}

impl ComplexityTable {
    pub fn new(multipliers: [f64; 4]) -> Result<Self, ConfigError> {
        if multipliers.iter().all(|m| m.is_finite() && *m > 0.0) {
            Ok(Self { multipliers })
        } else {
            Err(ConfigError::OutOfRange { key: "complexity" })
        }
    }

    pub fn multiplier(&self, tier: u8) -> Result<f64, ConfigError> {
        (tier as usize)
            .checked_sub(1)
            .and_then(|i| self.multipliers.get(i))
            .copied()
            .ok_or(ConfigError::UnknownTier(tier))
    }

    pub fn multipliers(&self) -> &[f64; 4] {
        &self.multipliers
    }

    pub fn min(&self) -> f64 {
        self.multipliers
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.multipliers
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

impl Default for ComplexityTable {
    fn default() -> Self {
        Self {
            multipliers: [1.0, 2.0, 3.5, 5.0],
        }
    }
}

/// Which scorer the novelty layer uses to compare task representations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SimilarityMethod {
    Edit,
    Keyword,
    #[default]
    Hybrid,
}

impl SimilarityMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            SimilarityMethod::Edit => "edit",
            SimilarityMethod::Keyword => "keyword",
            SimilarityMethod::Hybrid => "hybrid",
        }
    }
}

impl FromStr for SimilarityMethod {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "edit" => Ok(SimilarityMethod::Edit),
            "keyword" => Ok(SimilarityMethod::Keyword),
            "hybrid" => Ok(SimilarityMethod::Hybrid),
            _ => Err(()),
        }
    }
}

impl fmt::Display for SimilarityMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Every tunable of the engine and its interpretation layer.
///
/// Rates are stated per day; [`PeriodRates`] holds the per-period values
/// actually fed to the recurrences.
#[derive(Debug, Clone, PartialEq)]
pub struct EngineConfig {
    pub alpha_t_daily: f64,
    pub alpha_f_daily: f64,
    pub grace_periods: u32,
    pub lambda_daily: f64,
    pub complexity_window: usize,
    pub omega_turns: f64,
    pub omega_hours: f64,
    pub gamma: f64,
    pub leverage: LeverageTable,
    pub complexity: ComplexityTable,
    pub max_expected: f64,
    pub k_hours_per_1k: f64,
    pub rho: f64,
    pub wage_usd: f64,
    pub work_hours_per_day: f64,
    pub period_hours: u32,
    pub history_capacity: usize,
    pub similarity_method: SimilarityMethod,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            alpha_t_daily: 0.05,
            alpha_f_daily: 0.05,
            grace_periods: 3,
            lambda_daily: 0.30,
            complexity_window: 14,
            omega_turns: 0.18,
            omega_hours: 1.6,
            gamma: 0.18,
            leverage: LeverageTable::default(),
            complexity: ComplexityTable::default(),
            max_expected: 5.0e7,
            k_hours_per_1k: 0.1,
            rho: 0.75,
            wage_usd: 40.0,
            work_hours_per_day: 8.0,
            period_hours: 24,
            history_capacity: 50,
            similarity_method: SimilarityMethod::Hybrid,
        }
    }
}

/// Per-period decay and penalty rates derived from the daily config values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodRates {
    pub alpha_t: f64,
    pub alpha_f: f64,
    pub lambda: f64,
}

/// Converts a daily decay rate to the rate for a period of `period_hours`,
/// preserving the compounded daily decay: `1 - (1 - a)^(P/24)`.
pub fn convert_decay(alpha_daily: f64, period_hours: f64) -> f64 {
    if period_hours == 24.0 {
        return alpha_daily;
    }
    1.0 - (1.0 - alpha_daily).powf(period_hours / 24.0)
}

/// Scales a daily recency penalty linearly to the period length.
pub fn convert_lambda(lambda_daily: f64, period_hours: f64) -> f64 {
    lambda_daily * (period_hours / 24.0)
}

impl EngineConfig {
    pub fn periods_per_day(&self) -> u32 {
        24 / self.period_hours
    }

    pub fn period_seconds(&self) -> i64 {
        self.period_hours as i64 * 3600
    }

    pub fn rates(&self) -> PeriodRates {
        let p = self.period_hours as f64;
        PeriodRates {
            alpha_t: convert_decay(self.alpha_t_daily, p),
            alpha_f: convert_decay(self.alpha_f_daily, p),
            lambda: convert_lambda(self.lambda_daily, p),
        }
    }

    /// Work hours available in one period, the hours-saved ceiling base.
    pub fn work_hours_per_period(&self) -> f64 {
        self.work_hours_per_day * self.period_hours as f64 / 24.0
    }

    pub fn work_hours_per_week(&self) -> f64 {
        self.work_hours_per_day * WORKING_DAYS_PER_WEEK
    }

    pub fn leverage_multiplier(&self, level: u8) -> Result<f64, ConfigError> {
        self.leverage.multiplier(level)
    }

    pub fn complexity_multiplier(&self, tier: u8) -> Result<f64, ConfigError> {
        self.complexity.multiplier(tier)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        fn check(ok: bool, key: &'static str) -> Result<(), ConfigError> {
            if ok {
                Ok(())
            } else {
                Err(ConfigError::OutOfRange { key })
            }
        }
        let open_unit = |x: f64| x > 0.0 && x < 1.0;
        let nonneg = |x: f64| x.is_finite() && x >= 0.0;
        check(open_unit(self.alpha_t_daily), "alpha_T_daily")?;
        check(open_unit(self.alpha_f_daily), "alpha_F_daily")?;
        check(
            self.lambda_daily.is_finite() && self.lambda_daily > 0.0,
            "lambda_daily",
        )?;
        check(self.complexity_window > 0, "complexity_window")?;
        check(nonneg(self.omega_turns), "omega_turns")?;
        check(nonneg(self.omega_hours), "omega_hours")?;
        check(nonneg(self.gamma), "gamma")?;
        check(
            self.max_expected.is_finite() && self.max_expected > 1.0,
            "max_expected",
        )?;
        check(nonneg(self.k_hours_per_1k), "k_hours_per_1k")?;
        check(self.rho > 0.0 && self.rho <= 1.0, "rho")?;
        check(nonneg(self.wage_usd), "wage_usd")?;
        check(
            nonneg(self.work_hours_per_day) && self.work_hours_per_day <= 24.0,
            "work_hours_per_day",
        )?;
        check(
            VALID_PERIOD_HOURS.contains(&self.period_hours),
            "period_hours",
        )?;
        check(self.history_capacity > 0, "history_capacity")?;
        Ok(())
    }

    /// Parses a config document. Missing keys keep their defaults.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = EngineConfig::default();
        let mut seen: Vec<&str> = Vec::new();

        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or(ConfigError::Malformed { line })?;
            let Some(&known) = KEYS.iter().find(|k| **k == key) else {
                return Err(ConfigError::UnknownKey {
                    line,
                    key: key.to_string(),
                });
            };
            if seen.contains(&known) {
                return Err(ConfigError::DuplicateKey {
                    line,
                    key: key.to_string(),
                });
            }
            seen.push(known);

            let bad = || ConfigError::InvalidValue {
                line,
                key: key.to_string(),
                value: value.to_string(),
            };
            let real = || value.parse::<f64>().map_err(|_| bad());
            let uint = || value.parse::<u64>().map_err(|_| bad());
            let reals = || {
                value
                    .split(',')
                    .map(|s| s.trim().parse::<f64>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|_| bad())
            };

            match known {
                "alpha_T_daily" => cfg.alpha_t_daily = real()?,
                "alpha_F_daily" => cfg.alpha_f_daily = real()?,
                "grace_periods" => cfg.grace_periods = u32::try_from(uint()?).map_err(|_| bad())?,
                "lambda_daily" => cfg.lambda_daily = real()?,
                "complexity_window" => {
                    cfg.complexity_window = usize::try_from(uint()?).map_err(|_| bad())?
                }
                "omega_turns" => cfg.omega_turns = real()?,
                "omega_hours" => cfg.omega_hours = real()?,
                "gamma" => cfg.gamma = real()?,
                "leverage" => cfg.leverage = LeverageTable::new(reals()?)?,
                "complexity" => {
                    let v: [f64; 4] = reals()?.try_into().map_err(|_| bad())?;
                    cfg.complexity = ComplexityTable::new(v)?;
                }
                "max_expected" => cfg.max_expected = real()?,
                "k_hours_per_1k" => cfg.k_hours_per_1k = real()?,
                "rho" => cfg.rho = real()?,
                "wage_usd" => cfg.wage_usd = real()?,
                "work_hours_per_day" => cfg.work_hours_per_day = real()?,
                "period_hours" => {
                    // Accept "6" as well as "6.0".
                    let p = real()?;
                    if p.fract() != 0.0 || !(1.0..=24.0).contains(&p) {
                        return Err(ConfigError::OutOfRange {
                            key: "period_hours",
                        });
                    }
                    cfg.period_hours = p as u32;
                }
                "history_capacity" => {
                    cfg.history_capacity = usize::try_from(uint()?).map_err(|_| bad())?
                }
                "similarity_method" => cfg.similarity_method = value.parse().map_err(|_| bad())?,
                _ => unreachable!("KEYS and match arms out of sync"),
            }
        }

        cfg.validate()?;
        Ok(cfg)
    }

    /// Canonical text form; every key is written, in [`KEYS`] order.
    pub fn render(&self) -> String {
        let join = |xs: &[f64]| {
            xs.iter()
                .map(|x| format!("{x:?}"))
                .collect::<Vec<_>>()
                .join(", ")
        };
        let mut out = String::new();
        for key in KEYS {
            let value = match key {
                "alpha_T_daily" => format!("{:?}", self.alpha_t_daily),
                "alpha_F_daily" => format!("{:?}", self.alpha_f_daily),
                "grace_periods" => self.grace_periods.to_string(),
                "lambda_daily" => format!("{:?}", self.lambda_daily),
                "complexity_window" => self.complexity_window.to_string(),
                "omega_turns" => format!("{:?}", self.omega_turns),
                "omega_hours" => format!("{:?}", self.omega_hours),
                "gamma" => format!("{:?}", self.gamma),
                "leverage" => join(self.leverage.multipliers()),
                "complexity" => join(self.complexity.multipliers()),
                "max_expected" => format!("{:?}", self.max_expected),
                "k_hours_per_1k" => format!("{:?}", self.k_hours_per_1k),
                "rho" => format!("{:?}", self.rho),
                "wage_usd" => format!("{:?}", self.wage_usd),
                "work_hours_per_day" => format!("{:?}", self.work_hours_per_day),
                "period_hours" => self.period_hours.to_string(),
                "history_capacity" => self.history_capacity.to_string(),
                "similarity_method" => self.similarity_method.to_string(),
                _ => unreachable!(),
            };
            out.push_str(key);
            out.push_str(" = ");
            out.push_str(&value);
            out.push('\n');
        }
        out
    }

    /// SHA-256 of the canonical rendering, hex encoded. Snapshots carry it
    /// so decayed state is never resumed under different rates.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.render().as_bytes()))
    }
}
