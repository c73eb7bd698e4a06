//! Profile specs and the versioned scenario file that holds them.
//!
//! The file is `key = value` text like the engine config, split into
//! `[NAME]` sections. A top-level `format = 1` line is required.

use std::collections::BTreeMap;
use std::str::FromStr;

use thiserror::Error;

pub const SCENARIO_FORMAT: u32 = 1;

/// The scenario file shipped with the crate.
pub const BUILTIN_SCENARIOS: &str = include_str!("../../scenarios/profiles.txt");

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProfileError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("profile {profile}: missing key `{key}`")]
    Missing { profile: String, key: &'static str },
    #[error("profile {profile}: invalid `{key}`")]
    Invalid { profile: String, key: &'static str },
    #[error("scenario file format {0:?} unsupported (expected {SCENARIO_FORMAT})")]
    Format(Option<String>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ActivePattern {
    Daily,
    Weekdays,
    Weekly,
    Burst(Vec<u32>),
}

impl ActivePattern {
    /// Whether `day` (0-based from a Monday start) is active.
    pub fn is_active(&self, day: u32) -> bool {
        match self {
            ActivePattern::Daily => true,
            ActivePattern::Weekdays => day % 7 < 5,
            ActivePattern::Weekly => day.is_multiple_of(7),
            ActivePattern::Burst(days) => days.contains(&day),
        }
    }
}

impl FromStr for ActivePattern {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "daily" => Ok(ActivePattern::Daily),
            "weekdays" => Ok(ActivePattern::Weekdays),
            "weekly" => Ok(ActivePattern::Weekly),
            _ => {
                let inner = s
                    .strip_prefix("burst(")
                    .and_then(|r| r.strip_suffix(')'))
                    .ok_or(())?;
                let days = inner
                    .split(',')
                    .map(|d| d.trim().parse::<u32>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|_| ())?;
                Ok(ActivePattern::Burst(days))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProfileSpec {
    pub name: String,
    pub days: u32,
    pub interactions_per_active_day: (u32, u32),
    pub active_day_pattern: ActivePattern,
    /// `(mu, sigma)` of ln(tokens).
    pub token_lognormal: (f64, f64),
    pub duplicate_prob: f64,
    pub partial_sim_prob: f64,
    pub complexity_mix: [f64; 4],
    pub agent_turns_range: (u32, u32),
    pub run_hours_range: (f64, f64),
    pub leverage_level: u8,
    pub seed: u64,
}

impl ProfileSpec {
    pub fn validate(&self) -> Result<(), &'static str> {
        let prob = |p: f64| (0.0..=1.0).contains(&p);
        if self.days == 0 {
            return Err("days");
        }
        let (lo, hi) = self.interactions_per_active_day;
        if lo > hi || hi > 10_000 {
            return Err("interactions");
        }
        let (mu, sigma) = self.token_lognormal;
        if !(mu.is_finite() && sigma.is_finite() && sigma >= 0.0 && mu < 30.0) {
            return Err("token_lognormal");
        }
        if !prob(self.duplicate_prob) {
            return Err("duplicate_prob");
        }
        if !prob(self.partial_sim_prob) || self.duplicate_prob + self.partial_sim_prob > 1.0 {
            return Err("partial_sim_prob");
        }
        let mix_sum: f64 = self.complexity_mix.iter().sum();
        if !self.complexity_mix.iter().all(|p| prob(*p)) || (mix_sum - 1.0).abs() > 1e-9 {
            return Err("complexity_mix");
        }
        if self.agent_turns_range.0 > self.agent_turns_range.1 {
            return Err("agent_turns");
        }
        let (h0, h1) = self.run_hours_range;
        if !(h0.is_finite() && h1.is_finite() && 0.0 <= h0 && h0 <= h1) {
            return Err("run_hours");
        }
        if !(1..=8).contains(&self.leverage_level) {
            return Err("leverage_level");
        }
        Ok(())
    }
}

const PROFILE_KEYS: [&str; 12] = [
    "name",
    "days",
    "interactions",
    "pattern",
    "token_lognormal",
    "duplicate_prob",
    "partial_sim_prob",
    "complexity_mix",
    "agent_turns",
    "run_hours",
    "leverage_level",
    "seed",
];

/// Parses a scenario file into profiles keyed by section name.
pub fn parse_scenarios(text: &str) -> Result<BTreeMap<String, ProfileSpec>, ProfileError> {
    let mut format: Option<String> = None;
    let mut sections: Vec<(String, BTreeMap<&'static str, String>)> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let syntax = |message: &str| ProfileError::Syntax {
            line,
            message: message.to_string(),
        };
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(name) = content.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
            let name = name.trim();
            if name.is_empty() || sections.iter().any(|(n, _)| n == name) {
                return Err(syntax("empty or repeated section name"));
            }
            sections.push((name.to_string(), BTreeMap::new()));
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .map(|(k, v)| (k.trim(), v.trim().to_string()))
            .ok_or_else(|| syntax("expected `key = value`"))?;
        match sections.last_mut() {
            None if key == "format" && format.is_none() => format = Some(value),
            None => return Err(syntax("only `format` may precede the first section")),
            Some((_, fields)) => {
                let &known = PROFILE_KEYS
                    .iter()
                    .find(|k| **k == key)
                    .ok_or_else(|| syntax("unknown key"))?;
                if fields.insert(known, value).is_some() {
                    return Err(syntax("duplicate key"));
                }
            }
        }
    }

    if format.as_deref() != Some("1") {
        return Err(ProfileError::Format(format));
    }
    sections
        .into_iter()
        .map(|(name, fields)| {
            let spec = build_profile(&name, &fields)?;
            Ok((name, spec))
        })
        .collect()
}

fn build_profile(
    profile: &str,
    fields: &BTreeMap<&'static str, String>,
) -> Result<ProfileSpec, ProfileError> {
    let get = |key: &'static str| {
        fields
            .get(key)
            .map(String::as_str)
            .ok_or(ProfileError::Missing {
                profile: profile.to_string(),
                key,
            })
    };
    let invalid = |key: &'static str| ProfileError::Invalid {
        profile: profile.to_string(),
        key,
    };
    fn list<T: FromStr>(s: &str) -> Option<Vec<T>> {
        s.split(',').map(|x| x.trim().parse().ok()).collect()
    }
    fn pair<T: FromStr + Copy>(s: &str) -> Option<(T, T)> {
        match list::<T>(s)?.as_slice() {
            [a, b] => Some((*a, *b)),
            _ => None,
        }
    }
    fn one<T: FromStr>(s: &str) -> Option<T> {
        s.parse().ok()
    }

    let spec = ProfileSpec {
        name: get("name")?.to_string(),
        days: one(get("days")?).ok_or_else(|| invalid("days"))?,
        interactions_per_active_day: pair(get("interactions")?)
            .ok_or_else(|| invalid("interactions"))?,
        active_day_pattern: get("pattern")?.parse().map_err(|_| invalid("pattern"))?,
        token_lognormal: pair(get("token_lognormal")?).ok_or_else(|| invalid("token_lognormal"))?,
        duplicate_prob: one(get("duplicate_prob")?).ok_or_else(|| invalid("duplicate_prob"))?,
        partial_sim_prob: one(get("partial_sim_prob")?)
            .ok_or_else(|| invalid("partial_sim_prob"))?,
        complexity_mix: list::<f64>(get("complexity_mix")?)
            .and_then(|v| v.try_into().ok())
            .ok_or_else(|| invalid("complexity_mix"))?,
        agent_turns_range: pair(get("agent_turns")?).ok_or_else(|| invalid("agent_turns"))?,
        run_hours_range: pair(get("run_hours")?).ok_or_else(|| invalid("run_hours"))?,
        leverage_level: one(get("leverage_level")?).ok_or_else(|| invalid("leverage_level"))?,
        seed: one(get("seed")?).ok_or_else(|| invalid("seed"))?,
    };
    spec.validate().map_err(invalid)?;
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_file_parses() {
        let all = parse_scenarios(BUILTIN_SCENARIOS).unwrap();
        assert_eq!(all.keys().collect::<Vec<_>>(), ["A", "B", "C", "D"]);
        assert_eq!(all["C"].leverage_level, 6);
        assert_eq!(all["A"].active_day_pattern, ActivePattern::Daily);
        assert!(matches!(
            all["D"].active_day_pattern,
            ActivePattern::Burst(_)
        ));
    }

    #[test]
    fn patterns() {
        assert!(ActivePattern::Weekdays.is_active(4));
        assert!(!ActivePattern::Weekdays.is_active(5));
        assert!(ActivePattern::Weekly.is_active(14));
        assert!(!ActivePattern::Weekly.is_active(15));
        let b: ActivePattern = "burst(1, 3)".parse().unwrap();
        assert!(b.is_active(3) && !b.is_active(2));
        assert!("burst(1,x)".parse::<ActivePattern>().is_err());
        assert!("hourly".parse::<ActivePattern>().is_err());
    }

    #[test]
    fn rejects_bad_files() {
        assert_eq!(parse_scenarios("").unwrap_err(), ProfileError::Format(None));
        assert!(matches!(
            parse_scenarios("format = 2"),
            Err(ProfileError::Format(Some(_)))
        ));
        assert!(matches!(
            parse_scenarios("format = 1\n[X]\nname = x"),
            Err(ProfileError::Missing { .. })
        ));
        assert!(matches!(
            parse_scenarios("format = 1\nname = x"),
            Err(ProfileError::Syntax { line: 2, .. })
        ));
        let bad_mix = BUILTIN_SCENARIOS.replace("0.5, 0.5, 0.0, 0.0", "0.5, 0.6, 0.0, 0.0");
        assert!(matches!(
            parse_scenarios(&bad_mix),
            Err(ProfileError::Invalid {
                key: "complexity_mix",
                ..
            })
        ));
    }
}
