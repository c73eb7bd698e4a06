#![allow(dead_code)]

use iiq::config::{EngineConfig, SimilarityMethod, VALID_PERIOD_HOURS};
use iiq::types::{InteractionEvent, PeriodIndex, PeriodResult};
use rand::seq::SliceRandom;
use rand::Rng;

const VOCAB: [&str; 16] = [
    "deploy", "service", "review", "budget", "draft", "report", "query", "index", "refactor",
    "module", "notes", "summary", "roadmap", "cache", "latency", "hiring",
];

/// `|a - b| <= tol * max(1, |a|, |b|)`.
pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * 1f64.max(a.abs()).max(b.abs())
}

/// Field-by-field comparison; returns the first mismatch.
pub fn compare(a: &[PeriodResult], b: &[PeriodResult], tol: f64) -> Result<(), String> {
    if a.len() != b.len() {
        return Err(format!("{} vs {} periods", a.len(), b.len()));
    }
    for (x, y) in a.iter().zip(b) {
        if x.user_id != y.user_id || x.period_index != y.period_index {
            return Err(format!(
                "row identity {:?} vs {:?}",
                x.period_index, y.period_index
            ));
        }
        let fields = [
            ("T", x.token_stock, y.token_stock),
            ("F", x.frequency, y.frequency),
            ("R", x.recency, y.recency),
            ("V", x.leverage, y.leverage),
            ("C", x.complexity, y.complexity),
            ("A", x.autonomy, y.autonomy),
            ("G", x.effective_tokens, y.effective_tokens),
            ("D", x.distinct_mass, y.distinct_mass),
            ("U", x.autonomy_mass, y.autonomy_mass),
            ("iai", x.iai, y.iai),
            ("index", x.iiq_index, y.iiq_index),
            ("hours", x.hours_saved, y.hours_saved),
            ("usd", x.usd_impact, y.usd_impact),
        ];
        for (name, p, q) in fields {
            if !close(p, q, tol) {
                return Err(format!("period {}: {name} {p} vs {q}", x.period_index.0));
            }
        }
        match (x.delta_iiq, y.delta_iiq) {
            (None, None) => {}
            (Some(p), Some(q)) if close(p, q, tol) => {}
            other => return Err(format!("period {}: delta {other:?}", x.period_index.0)),
        }
    }
    Ok(())
}

/// A random but valid config around the defaults.
pub fn random_config(rng: &mut impl Rng) -> EngineConfig {
    EngineConfig {
        alpha_t_daily: rng.gen_range(0.01..0.5),
        alpha_f_daily: rng.gen_range(0.01..0.5),
        grace_periods: rng.gen_range(0..6),
        lambda_daily: rng.gen_range(0.05..1.0),
        complexity_window: rng.gen_range(1..10),
        gamma: rng.gen_range(0.0..0.5),
        history_capacity: rng.gen_range(1..60),
        period_hours: *VALID_PERIOD_HOURS.choose(rng).unwrap(),
        similarity_method: *[
            SimilarityMethod::Edit,
            SimilarityMethod::Keyword,
            SimilarityMethod::Hybrid,
        ]
        .choose(rng)
        .unwrap(),
        ..EngineConfig::default()
    }
}

/// A sorted single-user trace of at most `max_events` events spread over at
/// most `max_periods` periods, with a per-trace duplicate regime, all four
/// tiers, and random autonomy telemetry.
pub fn random_trace(
    rng: &mut impl Rng,
    user: &str,
    config: &EngineConfig,
    max_events: usize,
    max_periods: i64,
) -> Vec<InteractionEvent> {
    let n = rng.gen_range(1..=max_events);
    let span = rng.gen_range(1..=max_periods);
    let base = rng.gen_range(0..40_000);
    let secs = config.period_seconds();
    let dup = *[0.0, 0.3, 0.9].choose(rng).unwrap();

    let mut stamps: Vec<i64> = (0..n)
        .map(|_| (base + rng.gen_range(0..span)) * secs + rng.gen_range(0..secs))
        .collect();
    stamps.sort_unstable();

    let mut prompts: Vec<String> = Vec::new();
    stamps
        .into_iter()
        .map(|ts| {
            let prompt = if !prompts.is_empty() && rng.gen_bool(dup) {
                prompts.choose(rng).unwrap().clone()
            } else {
                let k = rng.gen_range(1..=4);
                (0..k)
                    .map(|_| *VOCAB.choose(rng).unwrap())
                    .collect::<Vec<_>>()
                    .join(" ")
            };
            prompts.push(prompt.clone());
            let turns = if rng.gen_bool(0.5) {
                rng.gen_range(0..40)
            } else {
                0
            };
            let hours = if rng.gen_bool(0.5) {
                rng.gen_range(0.0..6.0)
            } else {
                0.0
            };
            InteractionEvent::new(user, ts, &prompt, rng.gen_range(0..20_000))
                .with_tier(rng.gen_range(1..=4))
                .with_autonomy(turns, hours)
        })
        .collect()
}

/// Last period touched by a trace, optionally extended by `extra` idle periods.
pub fn through(
    trace: &[InteractionEvent],
    config: &EngineConfig,
    extra: i64,
) -> Option<PeriodIndex> {
    trace
        .last()
        .map(|e| PeriodIndex(PeriodIndex::of(e.epoch_seconds(), config.period_seconds()).0 + extra))
}
