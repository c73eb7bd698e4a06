//! Per-period masses and the factor recurrences built on them.

use std::collections::VecDeque;

use crate::config::{ConfigError, EngineConfig};
use crate::types::{InteractionEvent, WindowEntry};

/// Novelty-weighted sums over one period's events.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PeriodMasses {
    /// Effective tokens, `sum(nu * t)`.
    pub effective_tokens: f64,
    /// Distinct-task mass, `sum(nu)`.
    pub distinct_mass: f64,
    /// Autonomy mass, `sum(nu * u)`.
    pub autonomy_mass: f64,
    /// `sum(nu * c)` with `c` the tier multiplier.
    pub weighted_tier_sum: f64,
    pub event_count: usize,
}

impl PeriodMasses {
    pub fn window_entry(&self) -> WindowEntry {
        WindowEntry {
            weighted_tier_sum: self.weighted_tier_sum,
            novelty_sum: self.distinct_mass,
        }
    }
}

/// Sums masses over `(event, nu)` pairs whose weights are already computed.
pub fn period_masses<'a, I>(events: I, config: &EngineConfig) -> Result<PeriodMasses, ConfigError>
where
    I: IntoIterator<Item = (&'a InteractionEvent, f64)>,
{
    let mut m = PeriodMasses::default();
    for (event, nu) in events {
        let c = config.complexity_multiplier(event.complexity_tier)?;
        let u = autonomy_mass(event, config.omega_turns, config.omega_hours);
        m.effective_tokens += nu * event.token_count as f64;
        m.distinct_mass += nu;
        m.autonomy_mass += nu * u;
        m.weighted_tier_sum += nu * c;
        m.event_count += 1;
    }
    Ok(m)
}

/// `T_p = T_{p-1} (1 - alpha) + G_p`
pub fn update_token_stock(prev: f64, effective_tokens: f64, alpha: f64) -> f64 {
    prev * (1.0 - alpha) + effective_tokens
}

/// Returns `(F_raw, F)` with `F_raw = F_raw_prev (1 - alpha) + D` and
/// `F = 1 + ln(1 + F_raw)`.
pub fn update_frequency(prev_raw: f64, distinct_mass: f64, alpha: f64) -> (f64, f64) {
    let raw = prev_raw * (1.0 - alpha) + distinct_mass;
    (raw, frequency_factor(raw))
}

pub fn frequency_factor(raw: f64) -> f64 {
    1.0 + raw.ln_1p()
}

/// Grace-period recency gate: 1 while `inactive <= grace`, then
/// `exp(-lambda (inactive - grace))`.
pub fn recency_gate(inactive_periods: u64, grace: u32, lambda: f64) -> f64 {
    let grace = u64::from(grace);
    if inactive_periods <= grace {
        1.0
    } else {
        (-lambda * (inactive_periods - grace) as f64).exp()
    }
}

/// Pushes `entry` into the rolling window (keeping at most `capacity`
/// periods) and returns the novelty-weighted mean tier multiplier, or 1.0
/// when the window holds no novelty mass.
pub fn update_complexity_window(
    window: &mut VecDeque<WindowEntry>,
    entry: WindowEntry,
    capacity: usize,
) -> f64 {
    window.push_back(entry);
    while window.len() > capacity {
        window.pop_front();
    }
    complexity_factor(window)
}

pub fn complexity_factor(window: &VecDeque<WindowEntry>) -> f64 {
    let (num, den) = window.iter().fold((0.0, 0.0), |(n, d), e| {
        (n + e.weighted_tier_sum, d + e.novelty_sum)
    });
    if den > 0.0 {
        num / den
    } else {
        1.0
    }
}

/// `u = omega_turns * turns + omega_hours * hours`
pub fn autonomy_mass(event: &InteractionEvent, omega_turns: f64, omega_hours: f64) -> f64 {
    omega_turns * f64::from(event.agent_turns) + omega_hours * event.active_run_hours
}

/// `A = 1 + gamma ln(1 + U)`
pub fn autonomy_multiplier(autonomy_mass: f64, gamma: f64) -> f64 {
    1.0 + gamma * autonomy_mass.ln_1p()
}
