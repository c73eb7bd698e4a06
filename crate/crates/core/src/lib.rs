//! Streaming AI-adoption metrics: the Intensity-Adjusted AI Index (IAI), its
//! 0–1000 IIQ score, time and dollar estimates, and organization rollups.
//!
//! The [`engine`] consumes one user's events period by period and keeps a
//! constant-size [`UserState`]. [`oracle`] recomputes the same numbers from
//! scratch for testing. [`persist`] handles the event log, state snapshots,
//! and CSV reports used by the `iiq` binary.

pub mod accumulators;
pub mod aggregation;
pub mod config;
pub mod engine;
pub mod interpretation;
pub mod novelty;
pub mod oracle;
pub mod persist;
pub mod simulator;
pub mod types;

pub use config::{ConfigError, EngineConfig, SimilarityMethod};
pub use engine::{advance, init_state, process_period, run_trace, EngineError};
pub use types::{InteractionEvent, PeriodIndex, PeriodResult, TaskRepresentation, UserState};
