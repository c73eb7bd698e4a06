//! Deterministic synthetic traces: the four built-in user profiles and the
//! two figure families (anti-gaming and temporal response).
//!
//! Synthetic prompts are assembled from per-prompt blocks of code points
//! (CJK ideographs for word characters, a private-use character as the word
//! separator). Two prompts from different blocks share no character and no
//! keyword, so a fresh prompt scores exactly 0 against its history under
//! every scorer, and a replayed prompt scores exactly 1. Partial-similarity
//! prompts reuse half the words of an earlier prompt.
//!
//! Blocks are recycled after [`PROMPT_BLOCKS`] fresh prompts, so the zero
//! similarity guarantee holds while `history_capacity` stays below that.

mod profile;
mod rng;

use std::fmt;
use std::str::FromStr;

use chrono::{TimeZone, Utc};
use thiserror::Error;

pub use profile::{
    parse_scenarios, ActivePattern, ProfileError, ProfileSpec, BUILTIN_SCENARIOS, SCENARIO_FORMAT,
};
pub use rng::Lcg64;

use crate::config::EngineConfig;
use crate::engine::{run_trace, EngineError};
use crate::novelty::{novelty_weight, push_history};
use crate::types::{InteractionEvent, PeriodIndex, PeriodResult};

/// 2026-01-05T00:00:00Z, a Monday. Day 0 of every synthetic trace.
pub fn sim_start() -> i64 {
    Utc.with_ymd_and_hms(2026, 1, 5, 0, 0, 0)
        .single()
        .expect("valid date")
        .timestamp()
}

const DAY: i64 = 86_400;
const WORKDAY_START: i64 = 9 * 3600;
const WORKDAY_SPAN: i64 = 8 * 3600;

const CJK_BASE: u32 = 0x4E00;
const CHARS_PER_BLOCK: u32 = 10;
pub const PROMPT_BLOCKS: u32 = 2_099;
const SEPARATOR_BASE: u32 = 0xE000;
const WORDS_PER_PROMPT: usize = 4;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("unknown scenario {0:?}")]
    UnknownScenario(String),
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

/// Emits synthetic prompts and remembers them for replay.
#[derive(Debug, Default)]
struct PromptFactory {
    next_block: u32,
    emitted: Vec<(String, Vec<String>)>,
}

impl PromptFactory {
    fn block(&mut self) -> (Vec<char>, char) {
        let k = self.next_block;
        self.next_block += 1;
        let base = CJK_BASE + (k % PROMPT_BLOCKS) * CHARS_PER_BLOCK;
        let chars = (base..base + CHARS_PER_BLOCK)
            .map(|c| char::from_u32(c).expect("CJK block"))
            .collect();
        let sep = char::from_u32(SEPARATOR_BASE + k % 6_400).expect("private use area");
        (chars, sep)
    }

    fn emit(&mut self, words: Vec<String>, sep: char) -> String {
        let text = words.join(&sep.to_string());
        self.emitted.push((text.clone(), words));
        text
    }

    fn fresh(&mut self) -> String {
        let (chars, sep) = self.block();
        let words = (0..WORDS_PER_PROMPT)
            .map(|w| chars[2 * w..2 * w + 3].iter().collect())
            .collect();
        self.emit(words, sep)
    }

    /// Keeps the first half of `source`'s words and adds fresh ones.
    fn partial(&mut self, source: usize) -> String {
        let kept = self.emitted[source].1[..WORDS_PER_PROMPT / 2].to_vec();
        let (chars, sep) = self.block();
        let words = kept
            .into_iter()
            .chain((0..WORDS_PER_PROMPT / 2).map(|w| chars[2 * w..2 * w + 3].iter().collect()))
            .collect();
        self.emit(words, sep)
    }

    fn replay(&mut self, source: usize) -> String {
        let (text, words) = self.emitted[source].clone();
        self.emitted.push((text.clone(), words));
        text
    }

    fn len(&self) -> usize {
        self.emitted.len()
    }
}

/// Generates a profile's trace. Per active day the generator draws the
/// interaction count, then per interaction, in order: the prompt kind, the
/// replay/partial source (if any), ln(tokens), the tier, agent turns, and
/// run hours. Interactions are spread evenly over 09:00–17:00 UTC.
pub fn generate_trace(spec: &ProfileSpec, user_id: &str) -> Vec<InteractionEvent> {
    let mut rng = Lcg64::new(spec.seed);
    let mut prompts = PromptFactory::default();
    let mut events = Vec::new();
    let start = sim_start();
    let (n_lo, n_hi) = spec.interactions_per_active_day;
    let (mu, sigma) = spec.token_lognormal;

    for day in 0..spec.days {
        if !spec.active_day_pattern.is_active(day) {
            continue;
        }
        let n = rng.range_u64(u64::from(n_lo), u64::from(n_hi)) as i64;
        for j in 0..n {
            let kind = rng.next_f64();
            let prior = prompts.len();
            let prompt = if prior > 0 && kind < spec.duplicate_prob {
                let src = rng.range_u64(0, prior as u64 - 1) as usize;
                prompts.replay(src)
            } else if prior > 0 && kind < spec.duplicate_prob + spec.partial_sim_prob {
                let src = rng.range_u64(0, prior as u64 - 1) as usize;
                prompts.partial(src)
            } else {
                prompts.fresh()
            };
            let tokens = (mu + sigma * rng.normal()).exp().round().max(1.0) as u64;
            let tier = rng.categorical(&spec.complexity_mix) as u8 + 1;
            let turns = rng.range_u64(
                u64::from(spec.agent_turns_range.0),
                u64::from(spec.agent_turns_range.1),
            ) as u32;
            let hours = rng.range_f64(spec.run_hours_range.0, spec.run_hours_range.1);

            let ts = start + i64::from(day) * DAY + WORKDAY_START + j * (WORKDAY_SPAN / n);
            events.push(
                InteractionEvent::new(user_id, ts, &prompt, tokens)
                    .with_tier(tier)
                    .with_autonomy(turns, hours),
            );
        }
    }
    events
}

/// Last period of a `days`-long simulation on the configured grid.
pub fn final_period(days: u32, config: &EngineConfig) -> PeriodIndex {
    PeriodIndex::of(
        sim_start() + i64::from(days) * DAY - 1,
        config.period_seconds(),
    )
}

/// Runs one profile from a fresh state through its last simulated day.
pub fn run_profile(
    spec: &ProfileSpec,
    user_id: &str,
    config: &EngineConfig,
) -> Result<(Vec<InteractionEvent>, Vec<PeriodResult>), SimError> {
    let trace = generate_trace(spec, user_id);
    let first = PeriodIndex::of(sim_start(), config.period_seconds());
    let mut results = Vec::new();
    let mut state = crate::engine::init_state(spec.leverage_level, config)?;
    // Start the grid at day 0 even when the first event comes later.
    if trace
        .first()
        .is_none_or(|e| PeriodIndex::of(e.epoch_seconds(), config.period_seconds()) > first)
    {
        results.push(crate::engine::process_period(
            user_id,
            &mut state,
            first,
            &[],
            config,
        )?);
    }
    results.extend(crate::engine::advance(
        user_id,
        &mut state,
        &trace,
        Some(final_period(spec.days, config)),
        config,
    )?);
    Ok((trace, results))
}

pub fn builtin_profiles() -> std::collections::BTreeMap<String, ProfileSpec> {
    parse_scenarios(BUILTIN_SCENARIOS).expect("built-in scenario file is valid")
}

/// Runs built-in scenario `A`, `B`, `C`, or `D`, optionally reseeded.
pub fn run_scenario(
    name: &str,
    config: &EngineConfig,
    seed: Option<u64>,
) -> Result<(ProfileSpec, Vec<InteractionEvent>, Vec<PeriodResult>), SimError> {
    let mut spec = builtin_profiles()
        .remove(name)
        .ok_or_else(|| SimError::UnknownScenario(name.to_string()))?;
    if let Some(seed) = seed {
        spec.seed = seed;
    }
    let (trace, results) = run_profile(&spec, name, config)?;
    Ok((spec, trace, results))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FigureFamily {
    AntiGaming,
    TemporalResponse,
}

impl FromStr for FigureFamily {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "anti_gaming" => Ok(FigureFamily::AntiGaming),
            "temporal_response" => Ok(FigureFamily::TemporalResponse),
            _ => Err(()),
        }
    }
}

impl fmt::Display for FigureFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FigureFamily::AntiGaming => "anti_gaming",
            FigureFamily::TemporalResponse => "temporal_response",
        })
    }
}

/// Duplicate regimes of the anti-gaming family.
pub const ANTI_GAMING_REGIMES: [&str; 3] = ["high_duplicate", "medium_duplicate", "zero_duplicate"];
pub const ANTI_GAMING_INTERACTIONS: usize = 20;
pub const ANTI_GAMING_TOKENS: u64 = 1_000;

/// One interaction of an anti-gaming trace with running totals.
#[derive(Debug, Clone, PartialEq)]
pub struct AntiGamingPoint {
    pub regime: &'static str,
    pub interaction: usize,
    pub novelty: f64,
    pub raw_tokens_cum: f64,
    pub effective_tokens_cum: f64,
    pub distinct_mass_cum: f64,
    /// Distinct-task mass if every interaction were fully novel.
    pub novel_ceiling: f64,
    /// Engine token stock at the end of the interaction's period.
    pub token_stock: f64,
}

/// A 20-interaction trace per regime with identical raw tokens (1,000 per
/// interaction, two per day at 09:00 and 13:00).
///
/// * `high_duplicate` replays one prompt throughout.
/// * `medium_duplicate` cycles fresh, replay, fresh, half-overlap.
/// * `zero_duplicate` is fresh every time.
pub fn anti_gaming_trace(regime: &str) -> Vec<InteractionEvent> {
    let mut prompts = PromptFactory::default();
    let start = sim_start();
    (0..ANTI_GAMING_INTERACTIONS)
        .map(|i| {
            let prompt = match (regime, i) {
                (_, 0) => prompts.fresh(),
                ("high_duplicate", _) => prompts.replay(0),
                ("medium_duplicate", i) if i % 4 == 1 => prompts.replay(i - 1),
                ("medium_duplicate", i) if i % 4 == 3 => prompts.partial(i - 1),
                _ => prompts.fresh(),
            };
            let ts = start + (i / 2) as i64 * DAY + WORKDAY_START + (i % 2) as i64 * 4 * 3600;
            InteractionEvent::new(regime, ts, &prompt, ANTI_GAMING_TOKENS)
        })
        .collect()
}

pub fn anti_gaming(config: &EngineConfig) -> Result<Vec<AntiGamingPoint>, SimError> {
    let mut out = Vec::new();
    for regime in ANTI_GAMING_REGIMES {
        let trace = anti_gaming_trace(regime);
        let (_, results) = run_trace(regime, 1, &trace, None, config)?;
        let mut history = std::collections::VecDeque::new();
        let (mut raw, mut eff, mut mass) = (0.0, 0.0, 0.0);
        for (i, e) in trace.iter().enumerate() {
            let nu = novelty_weight(&e.task, &history, config.similarity_method);
            push_history(&mut history, e.task.clone(), config.history_capacity);
            raw += e.token_count as f64;
            eff += nu * e.token_count as f64;
            mass += nu;
            let p = PeriodIndex::of(e.epoch_seconds(), config.period_seconds());
            let stock = results
                .iter()
                .find(|r| r.period_index == p)
                .map_or(0.0, |r| r.token_stock);
            out.push(AntiGamingPoint {
                regime,
                interaction: i + 1,
                novelty: nu,
                raw_tokens_cum: raw,
                effective_tokens_cum: eff,
                distinct_mass_cum: mass,
                novel_ceiling: (i + 1) as f64,
                token_stock: stock,
            });
        }
    }
    Ok(out)
}

pub const TEMPORAL_DAYS: u32 = 45;
const TEMPORAL_TOKENS: u64 = 1_500;
const TEMPORAL_PER_DAY: i64 = 3;

/// Usage patterns of the temporal-response family as
/// `(name, active(day))`.
pub type DayPattern = (&'static str, fn(u32) -> bool);

pub const TEMPORAL_PATTERNS: [DayPattern; 4] = [
    ("recurring", |_| true),
    ("short_interruption", |d| !(15..17).contains(&d)),
    ("long_interruption", |d| !(15..25).contains(&d)),
    ("weekly_episodic", |d| d % 7 == 0),
];

/// Name of the no-grace counterfactual of the long interruption.
pub const NO_GRACE_SERIES: &str = "long_interruption_no_grace";

pub fn temporal_trace(user_id: &str, active: impl Fn(u32) -> bool) -> Vec<InteractionEvent> {
    let mut prompts = PromptFactory::default();
    let start = sim_start();
    (0..TEMPORAL_DAYS)
        .filter(|d| active(*d))
        .flat_map(|d| (0..TEMPORAL_PER_DAY).map(move |j| (d, j)))
        .map(|(d, j)| {
            let ts = start + i64::from(d) * DAY + WORKDAY_START + j * 2 * 3600;
            InteractionEvent::new(user_id, ts, &prompts.fresh(), TEMPORAL_TOKENS).with_tier(2)
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct TemporalSeries {
    pub name: String,
    pub results: Vec<PeriodResult>,
}

/// 45-day trajectories for the four usage patterns under `config`, plus the
/// long interruption re-run with a zero grace period.
pub fn temporal_response(config: &EngineConfig) -> Result<Vec<TemporalSeries>, SimError> {
    let through = Some(final_period(TEMPORAL_DAYS, config));
    let mut out = Vec::new();
    for (name, active) in TEMPORAL_PATTERNS {
        let (_, results) = run_trace(name, 1, &temporal_trace(name, active), through, config)?;
        out.push(TemporalSeries {
            name: name.to_string(),
            results,
        });
    }
    let no_grace = EngineConfig {
        grace_periods: 0,
        ..config.clone()
    };
    let (_, long_active) = TEMPORAL_PATTERNS[2];
    let trace = temporal_trace(NO_GRACE_SERIES, long_active);
    let (_, results) = run_trace(NO_GRACE_SERIES, 1, &trace, through, &no_grace)?;
    out.push(TemporalSeries {
        name: NO_GRACE_SERIES.to_string(),
        results,
    });
    Ok(out)
}

/// Series of one figure family.
#[derive(Debug, Clone)]
pub enum FigureTable {
    AntiGaming(Vec<AntiGamingPoint>),
    TemporalResponse(Vec<TemporalSeries>),
}

pub fn figure_traces(family: FigureFamily, config: &EngineConfig) -> Result<FigureTable, SimError> {
    Ok(match family {
        FigureFamily::AntiGaming => FigureTable::AntiGaming(anti_gaming(config)?),
        FigureFamily::TemporalResponse => FigureTable::TemporalResponse(temporal_response(config)?),
    })
}
