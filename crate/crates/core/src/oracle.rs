//! Brute-force reference evaluator.
//!
//! Recomputes every quantity for every period from the full event list:
//! stocks as closed-form geometric sums, the inactivity streak by scanning
//! backwards, complexity as the literal double sum over raw window events,
//! and novelty by rescanning the trace. It shares only the config types and
//! similarity scorers with the streaming engine, so agreement between the two
//! is meaningful. Quadratic in periods and events; meant for tests and the
//! `oracle` debugging subcommand.

use thiserror::Error;

use crate::config::{ConfigError, EngineConfig};
use crate::novelty::Similarity;
use crate::types::{InteractionEvent, PeriodIndex, PeriodResult};

pub const MAX_ORACLE_EVENTS: usize = 10_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("trace has {0} events; the reference evaluator accepts at most {MAX_ORACLE_EVENTS}")]
    TooLarge(usize),
    #[error("trace not sorted by timestamp")]
    Unsorted,
    #[error(transparent)]
    Config(#[from] ConfigError),
}

/// Evaluates a single user's sorted trace from its first event's period
/// through the later of its last event's period and `through`.
pub fn oracle_evaluate(
    user_id: &str,
    trace: &[InteractionEvent],
    config: &EngineConfig,
    leverage_level: u8,
    through: Option<PeriodIndex>,
) -> Result<Vec<PeriodResult>, OracleError> {
    if trace.len() > MAX_ORACLE_EVENTS {
        return Err(OracleError::TooLarge(trace.len()));
    }
    if trace.windows(2).any(|w| w[0].timestamp > w[1].timestamp) {
        return Err(OracleError::Unsorted);
    }
    let Some(first) = trace.first() else {
        return Ok(Vec::new());
    };

    let seconds = i64::from(config.period_hours) * 3600;
    let period = |e: &InteractionEvent| e.timestamp.timestamp().div_euclid(seconds);
    let start = period(first);
    let end = through
        .map_or(i64::MIN, |p| p.0)
        .max(period(&trace[trace.len() - 1]));

    // Novelty: each event against the `history_capacity` events before it.
    let nu: Vec<f64> = (0..trace.len())
        .map(|k| {
            let lo = k.saturating_sub(config.history_capacity);
            let best = trace[lo..k]
                .iter()
                .map(|h| config.similarity_method.similarity(&trace[k].task, &h.task))
                .fold(0.0_f64, f64::max);
            if k == lo {
                1.0
            } else {
                (1.0 - best).max(0.0)
            }
        })
        .collect();

    let frac = f64::from(config.period_hours) / 24.0;
    let keep_t = (1.0 - config.alpha_t_daily).powf(frac);
    let keep_f = (1.0 - config.alpha_f_daily).powf(frac);
    let lambda = config.lambda_daily * frac;
    let leverage = config.leverage_multiplier(leverage_level)?;
    let tier = |e: &InteractionEvent| config.complexity_multiplier(e.complexity_tier);

    let in_period = |p: i64| trace.iter().zip(&nu).filter(move |(e, _)| period(e) == p);

    let mut out: Vec<PeriodResult> = Vec::new();
    for p in start..=end {
        let mut t = 0.0;
        let mut f_raw = 0.0;
        for q in start..=p {
            let g: f64 = in_period(q).map(|(e, v)| v * e.token_count as f64).sum();
            let d: f64 = in_period(q).map(|(_, v)| *v).sum();
            let age = (p - q) as i32;
            t += g * keep_t.powi(age);
            f_raw += d * keep_f.powi(age);
        }
        let frequency = 1.0 + (1.0 + f_raw).ln();

        let mut inactive = 0_i64;
        while p - inactive >= start && in_period(p - inactive).next().is_none() {
            inactive += 1;
        }
        let grace = i64::from(config.grace_periods);
        let recency = if inactive <= grace {
            1.0
        } else {
            (-lambda * (inactive - grace) as f64).exp()
        };

        let window_lo = p - config.complexity_window as i64 + 1;
        let (mut num, mut den) = (0.0, 0.0);
        for (e, v) in trace.iter().zip(&nu) {
            let q = period(e);
            if q >= window_lo && q <= p {
                num += v * tier(e)?;
                den += v;
            }
        }
        let complexity = if den == 0.0 { 1.0 } else { num / den };

        let u: f64 = in_period(p)
            .map(|(e, v)| {
                v * (config.omega_turns * e.agent_turns as f64
                    + config.omega_hours * e.active_run_hours)
            })
            .sum();
        let autonomy = 1.0 + config.gamma * (1.0 + u).ln();

        let iai = t * frequency * recency * leverage * complexity * autonomy;
        let index = ((iai + 1.0).log10() / config.max_expected.log10() * 1000.0).clamp(0.0, 1000.0);

        let g: f64 = in_period(p).map(|(e, v)| v * e.token_count as f64).sum();
        let d: f64 = in_period(p).map(|(_, v)| *v).sum();
        let hours = (g / 1000.0 * config.k_hours_per_1k * complexity * autonomy)
            .min(config.rho * config.work_hours_per_day * frac);

        out.push(PeriodResult {
            user_id: user_id.to_string(),
            period_index: PeriodIndex(p),
            token_stock: t,
            frequency,
            recency,
            leverage,
            complexity,
            autonomy,
            effective_tokens: g,
            distinct_mass: d,
            autonomy_mass: u,
            iai,
            iiq_index: index,
            delta_iiq: out.last().map(|prev| index - prev.iiq_index),
            hours_saved: hours,
            usd_impact: hours * config.wage_usd * leverage,
        });
    }
    Ok(out)
}
