//! Drives the engine from an event log on top of an optional snapshot.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use thiserror::Error;

use super::eventlog::{parse_event_log, EventLogError};
use super::report::{write_departments, write_results, ReportError};
use super::snapshot::{SnapshotError, StateSnapshot};
use crate::config::{ConfigError, EngineConfig};
use crate::engine::{advance, init_state, EngineError};
use crate::types::{InteractionEvent, PeriodIndex, PeriodResult};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error(transparent)]
    Parse(#[from] EventLogError),
    #[error("line {line}: user {user}: timestamp earlier than frontier (period {frontier} already processed)")]
    BeforeFrontier {
        line: usize,
        user: String,
        frontier: i64,
    },
    #[error("line {line}: user {user}: timestamp earlier than the user's previous event")]
    Unsorted { line: usize, user: String },
    #[error("line {line}: unknown user {user} without a level")]
    MissingLevel { line: usize, user: String },
    #[error("line {line}: user {user}: level {got} conflicts with level {have}")]
    LevelConflict {
        line: usize,
        user: String,
        have: u8,
        got: u8,
    },
    #[error("line {line}: {source}")]
    Level {
        line: usize,
        #[source]
        source: ConfigError,
    },
    #[error("user {user}: {source}")]
    Engine {
        user: String,
        #[source]
        source: EngineError,
    },
    #[error("config: {0}")]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Snapshot(#[from] SnapshotError),
    #[error(transparent)]
    Report(#[from] ReportError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct IngestOutput {
    pub snapshot: StateSnapshot,
    /// Sorted by period, then user.
    pub results: Vec<PeriodResult>,
    /// Last department seen per user in this log.
    pub departments: BTreeMap<String, String>,
}

struct UserBatch {
    events: Vec<InteractionEvent>,
    level: Option<(u8, usize)>,
}

/// Ingests `log` on top of `snapshot` (or a fresh one). Every user in the
/// snapshot or the log is advanced through the log's last period, so idle
/// users get their empty periods materialized too. An empty log changes
/// nothing. The input snapshot is not modified.
pub fn ingest(
    log: &str,
    snapshot: Option<&StateSnapshot>,
    config: &EngineConfig,
) -> Result<IngestOutput, IngestError> {
    config.validate()?;
    let mut snap = match snapshot {
        Some(s) => {
            s.check_config(config)?;
            s.clone()
        }
        None => StateSnapshot::new(config),
    };
    let period_seconds = config.period_seconds();
    let period_of = |e: &InteractionEvent| PeriodIndex::of(e.epoch_seconds(), period_seconds);

    let mut batches: BTreeMap<String, UserBatch> = BTreeMap::new();
    let mut departments = BTreeMap::new();
    let mut end: Option<PeriodIndex> = None;

    for (line, record) in parse_event_log(log)? {
        let event = record.event;
        let user = event.user_id.clone();
        let existing = snap.users.get(&user);
        let batch = batches.entry(user.clone()).or_insert(UserBatch {
            events: Vec::new(),
            level: existing.map(|s| (s.leverage_level, 0)),
        });

        if let Some(frontier) = existing.and_then(|s| s.last_period_index) {
            if period_of(&event) <= frontier {
                return Err(IngestError::BeforeFrontier {
                    line,
                    user,
                    frontier: frontier.0,
                });
            }
        }
        if batch
            .events
            .last()
            .is_some_and(|prev| prev.timestamp > event.timestamp)
        {
            return Err(IngestError::Unsorted { line, user });
        }
        match (batch.level, record.level) {
            (None, None) => return Err(IngestError::MissingLevel { line, user }),
            (None, Some(got)) => {
                config
                    .leverage_multiplier(got)
                    .map_err(|source| IngestError::Level { line, source })?;
                batch.level = Some((got, line));
            }
            (Some((have, _)), Some(got)) if have != got => {
                return Err(IngestError::LevelConflict {
                    line,
                    user,
                    have,
                    got,
                })
            }
            _ => {}
        }

        end = end.max(Some(period_of(&event)));
        if let Some(d) = &event.department {
            departments.insert(user.clone(), d.clone());
        }
        batch.events.push(event);
    }

    let Some(end) = end else {
        return Ok(IngestOutput {
            snapshot: snap,
            results: Vec::new(),
            departments,
        });
    };

    for (user, batch) in &batches {
        if !snap.users.contains_key(user) {
            let (level, _) = batch.level.expect("level checked while parsing");
            let state = init_state(level, config).map_err(|source| IngestError::Engine {
                user: user.clone(),
                source,
            })?;
            snap.users.insert(user.clone(), state);
        }
    }

    let mut results = Vec::new();
    for (user, state) in snap.users.iter_mut() {
        let events = batches.get(user).map_or(&[][..], |b| &b.events[..]);
        let produced = advance(user, state, events, Some(end), config).map_err(|source| {
            IngestError::Engine {
                user: user.clone(),
                source,
            }
        })?;
        results.extend(produced);
    }
    results.sort_by(|a, b| {
        a.period_index
            .cmp(&b.period_index)
            .then_with(|| a.user_id.cmp(&b.user_id))
    });

    Ok(IngestOutput {
        snapshot: snap,
        results,
        departments,
    })
}

/// Files written by [`ingest_files`].
pub const RESULTS_FILE: &str = "results.csv";
pub const STATE_FILE: &str = "state.json";
pub const DEPARTMENTS_FILE: &str = "departments.csv";

/// File-level ingest: reads the log, config, and optional snapshot, then
/// writes `results.csv`, `state.json`, and (when the log names any)
/// `departments.csv` into `out_dir`. Each file is replaced atomically.
pub fn ingest_files(
    events: &Path,
    config_path: &Path,
    state: Option<&Path>,
    out_dir: &Path,
) -> Result<IngestOutput, IngestError> {
    let read = |p: &Path| {
        std::fs::read_to_string(p).map_err(|source| IngestError::Io {
            path: p.to_path_buf(),
            source,
        })
    };
    let config = EngineConfig::parse(&read(config_path)?)?;
    let log = read(events)?;
    let snapshot = state.map(|p| StateSnapshot::load(p, &config)).transpose()?;
    let out = ingest(&log, snapshot.as_ref(), &config)?;

    let io = |path: PathBuf| move |source| IngestError::Io { path, source };
    std::fs::create_dir_all(out_dir).map_err(io(out_dir.to_path_buf()))?;
    let mut csv = Vec::new();
    write_results(&mut csv, &out.results, config.period_seconds())?;
    let results_path = out_dir.join(RESULTS_FILE);
    super::write_atomic(&results_path, &csv).map_err(io(results_path.clone()))?;
    if !out.departments.is_empty() {
        let mut buf = Vec::new();
        write_departments(&mut buf, &out.departments)?;
        let path = out_dir.join(DEPARTMENTS_FILE);
        super::write_atomic(&path, &buf).map_err(io(path.clone()))?;
    }
    out.snapshot.save(&out_dir.join(STATE_FILE))?;
    Ok(out)
}
