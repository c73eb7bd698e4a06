//! Bounded views of the raw index: the 0–1000 IIQ index, estimated hours
//! saved, and the USD opportunity value. Hours and USD are estimates and
//! are labelled as such wherever they are written out.

use crate::config::EngineConfig;

pub const INDEX_CEILING: f64 = 1000.0;

/// `min(1000, max(0, log10(iai + 1) / log10(max_expected) * 1000))`
pub fn iiq_index(iai: f64, max_expected: f64) -> f64 {
    let scaled = (iai + 1.0).log10() / max_expected.log10() * INDEX_CEILING;
    scaled.clamp(0.0, INDEX_CEILING)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterpretationInputs {
    pub effective_tokens: f64,
    pub complexity: f64,
    pub autonomy: f64,
    pub work_hours_available: f64,
    pub k_hours_per_1k: f64,
    pub rho: f64,
}

impl InterpretationInputs {
    /// Inputs for one period of the configured grid.
    pub fn for_period(
        config: &EngineConfig,
        effective_tokens: f64,
        complexity: f64,
        autonomy: f64,
    ) -> Self {
        Self {
            effective_tokens,
            complexity,
            autonomy,
            work_hours_available: config.work_hours_per_period(),
            k_hours_per_1k: config.k_hours_per_1k,
            rho: config.rho,
        }
    }
}

/// `min(rho * work_hours, (G / 1000) * k * C * A)`
pub fn hours_saved(inputs: &InterpretationInputs) -> f64 {
    let cap = inputs.rho * inputs.work_hours_available;
    let raw = inputs.effective_tokens / 1000.0
        * inputs.k_hours_per_1k
        * inputs.complexity
        * inputs.autonomy;
    raw.min(cap)
}

pub fn usd_impact(hours: f64, wage_usd: f64, leverage: f64) -> f64 {
    hours * (wage_usd * leverage)
}
