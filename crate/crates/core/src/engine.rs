//! Streaming per-period evaluation.
//!
//! A user's periods are processed strictly in order. Callers hand
//! [`process_period`] one period at a time, including periods without
//! events, so that decay and the inactivity streak advance uniformly;
//! [`advance`] does that materialization for a batch of events.

use thiserror::Error;

use crate::accumulators::{
    autonomy_mass, autonomy_multiplier, period_masses, recency_gate, update_complexity_window,
    update_frequency, update_token_stock,
};
use crate::config::{ConfigError, EngineConfig};
use crate::interpretation::{hours_saved, iiq_index, usd_impact, InterpretationInputs};
use crate::novelty::{novelty_weight, push_history};
use crate::types::{EventError, InteractionEvent, PeriodIndex, PeriodResult, UserState};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngineError {
    #[error("period {got:?} processed out of order (expected {expected:?})")]
    OutOfOrder {
        expected: PeriodIndex,
        got: PeriodIndex,
    },
    #[error("event at {timestamp} falls outside period {period:?}")]
    OutsidePeriod { timestamp: i64, period: PeriodIndex },
    #[error("events not sorted by timestamp")]
    Unsorted,
    #[error("event belongs to user {got:?}, not {expected:?}")]
    WrongUser { expected: String, got: String },
    #[error(transparent)]
    Event(#[from] EventError),
    #[error(transparent)]
    Config(#[from] ConfigError),
}

/// Cold-start state for a user at the given leverage level.
pub fn init_state(leverage_level: u8, config: &EngineConfig) -> Result<UserState, EngineError> {
    config.leverage_multiplier(leverage_level)?;
    Ok(UserState::fresh(leverage_level))
}

/// Evaluates one period for one user and advances `state`.
///
/// `events` must all fall inside `period` and be sorted by timestamp.
/// On error `state` is left untouched.
pub fn process_period(
    user_id: &str,
    state: &mut UserState,
    period: PeriodIndex,
    events: &[InteractionEvent],
    config: &EngineConfig,
) -> Result<PeriodResult, EngineError> {
    if let Some(last) = state.last_period_index {
        if period != last.next() {
            return Err(EngineError::OutOfOrder {
                expected: last.next(),
                got: period,
            });
        }
    }
    let period_seconds = config.period_seconds();
    for event in events {
        event.validate()?;
        if event.user_id != user_id {
            return Err(EngineError::WrongUser {
                expected: user_id.to_string(),
                got: event.user_id.clone(),
            });
        }
        if PeriodIndex::of(event.epoch_seconds(), period_seconds) != period {
            return Err(EngineError::OutsidePeriod {
                timestamp: event.epoch_seconds(),
                period,
            });
        }
    }
    if events.windows(2).any(|w| w[0].timestamp > w[1].timestamp) {
        return Err(EngineError::Unsorted);
    }
    let leverage = config.leverage_multiplier(state.leverage_level)?;
    let rates = config.rates();

    // Same-period events see each other through the shared history.
    let mut weights = Vec::with_capacity(events.len());
    for event in events {
        let nu = novelty_weight(&event.task, &state.history, config.similarity_method);
        push_history(
            &mut state.history,
            event.task.clone(),
            config.history_capacity,
        );
        weights.push(nu);
    }
    let masses = period_masses(events.iter().zip(weights.iter().copied()), config)?;

    state.token_stock =
        update_token_stock(state.token_stock, masses.effective_tokens, rates.alpha_t);
    let (freq_raw, frequency) =
        update_frequency(state.freq_raw, masses.distinct_mass, rates.alpha_f);
    state.freq_raw = freq_raw;
    state.inactive_streak = if events.is_empty() {
        state.inactive_streak + 1
    } else {
        0
    };
    let recency = recency_gate(state.inactive_streak, config.grace_periods, rates.lambda);
    let complexity = update_complexity_window(
        &mut state.complexity_window,
        masses.window_entry(),
        config.complexity_window,
    );
    let autonomy = autonomy_multiplier(masses.autonomy_mass, config.gamma);

    let iai = state.token_stock * frequency * recency * leverage * complexity * autonomy;
    let index = iiq_index(iai, config.max_expected);
    let hours = hours_saved(&InterpretationInputs::for_period(
        config,
        masses.effective_tokens,
        complexity,
        autonomy,
    ));

    let result = PeriodResult {
        user_id: user_id.to_string(),
        period_index: period,
        token_stock: state.token_stock,
        frequency,
        recency,
        leverage,
        complexity,
        autonomy,
        effective_tokens: masses.effective_tokens,
        distinct_mass: masses.distinct_mass,
        autonomy_mass: masses.autonomy_mass,
        iai,
        iiq_index: index,
        delta_iiq: delta_iiq(index, state.previous_index),
        hours_saved: hours,
        usd_impact: usd_impact(hours, config.wage_usd, leverage),
    };
    state.previous_index = Some(index);
    state.last_delta = result.delta_iiq;
    state.last_period_index = Some(period);
    Ok(result)
}

/// Stateless single-interaction approximation `nu * t * V * c * a`.
pub fn micro_iai(
    event: &InteractionEvent,
    nu: f64,
    config: &EngineConfig,
    leverage_level: u8,
) -> Result<f64, EngineError> {
    let v = config.leverage_multiplier(leverage_level)?;
    let c = config.complexity_multiplier(event.complexity_tier)?;
    let u = autonomy_mass(event, config.omega_turns, config.omega_hours);
    Ok(nu * event.token_count as f64 * v * c * autonomy_multiplier(u, config.gamma))
}

pub fn delta_iiq(current: f64, previous: Option<f64>) -> Option<f64> {
    previous.map(|p| current - p)
}

/// Processes `events` (sorted, one user) on top of `state`, materializing
/// every period from the state's frontier (or the first event's period for
/// a fresh state) up to the later of the last event's period and `through`.
///
/// Periods already processed stay applied if a later one fails.
pub fn advance(
    user_id: &str,
    state: &mut UserState,
    events: &[InteractionEvent],
    through: Option<PeriodIndex>,
    config: &EngineConfig,
) -> Result<Vec<PeriodResult>, EngineError> {
    let period_seconds = config.period_seconds();
    let period_of = |e: &InteractionEvent| PeriodIndex::of(e.epoch_seconds(), period_seconds);

    if events.windows(2).any(|w| w[0].timestamp > w[1].timestamp) {
        return Err(EngineError::Unsorted);
    }
    let start = match (state.last_period_index, events.first()) {
        (Some(last), _) => last.next(),
        (None, Some(first)) => period_of(first),
        (None, None) => return Ok(Vec::new()),
    };
    let end = events
        .last()
        .map(period_of)
        .into_iter()
        .chain(through)
        .max();
    let Some(end) = end else {
        return Ok(Vec::new());
    };
    if let Some(first) = events.first() {
        if period_of(first) < start {
            return Err(EngineError::OutOfOrder {
                expected: start,
                got: period_of(first),
            });
        }
    }

    let mut results = Vec::new();
    let mut rest = events;
    let mut period = start;
    while period <= end {
        let n = rest.iter().take_while(|e| period_of(e) == period).count();
        let (now, later) = rest.split_at(n);
        results.push(process_period(user_id, state, period, now, config)?);
        rest = later;
        period = period.next();
    }
    Ok(results)
}

/// Runs a fresh user over a whole trace.
pub fn run_trace(
    user_id: &str,
    leverage_level: u8,
    events: &[InteractionEvent],
    through: Option<PeriodIndex>,
    config: &EngineConfig,
) -> Result<(UserState, Vec<PeriodResult>), EngineError> {
    let mut state = init_state(leverage_level, config)?;
    let results = advance(user_id, &mut state, events, through, config)?;
    Ok((state, results))
}
