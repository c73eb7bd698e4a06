//! Line-delimited JSON event log, one [`EventRecord`] per line.
//!
//! ```text
//! {"user_id":"ana","ts":"2026-01-05T09:30:00Z","prompt":"summarize the incident","tokens":1200,"tier":2,"level":3}
//! ```
//!
//! `agent_turns` and `run_hours` default to 0, `department` is optional,
//! and `level` (1-8) is required on the first record of a user the snapshot
//! has not seen. Unknown fields are rejected. Blank lines are skipped.

use chrono::{DateTime, SecondsFormat, Utc};
use serde_json::{Map, Value};
use thiserror::Error;

use crate::types::{InteractionEvent, TaskRepresentation};

pub const FIELDS: [&str; 9] = [
    "user_id",
    "ts",
    "prompt",
    "tokens",
    "tier",
    "agent_turns",
    "run_hours",
    "level",
    "department",
];

#[derive(Debug, Error, Clone, PartialEq)]
#[error("line {line}: {}{message}", field.as_ref().map(|f| format!("field `{f}`: ")).unwrap_or_default())]
pub struct EventLogError {
    pub line: usize,
    pub field: Option<String>,
    pub message: String,
}

/// A parsed log line.
#[derive(Debug, Clone, PartialEq)]
pub struct EventRecord {
    pub event: InteractionEvent,
    pub level: Option<u8>,
}

type FieldResult<T> = Result<T, (Option<String>, String)>;

fn field_err<T>(field: &str, message: impl Into<String>) -> FieldResult<T> {
    Err((Some(field.to_string()), message.into()))
}

fn take_str(obj: &Map<String, Value>, field: &str) -> FieldResult<Option<String>> {
    match obj.get(field) {
        None | Some(Value::Null) => Ok(None),
        Some(Value::String(s)) => Ok(Some(s.clone())),
        Some(_) => field_err(field, "expected a string"),
    }
}

fn take_uint(
    obj: &Map<String, Value>,
    field: &str,
    min: u64,
    max: u64,
) -> FieldResult<Option<u64>> {
    match obj.get(field) {
        None | Some(Value::Null) => Ok(None),
        Some(v) => match v.as_u64() {
            Some(n) if (min..=max).contains(&n) => Ok(Some(n)),
            _ => field_err(field, format!("expected an integer in {min}..={max}")),
        },
    }
}

fn required<T>(value: Option<T>, field: &str) -> FieldResult<T> {
    value.map_or_else(|| field_err(field, "missing"), Ok)
}

fn parse_object(line: &str) -> FieldResult<EventRecord> {
    let obj: Map<String, Value> =
        serde_json::from_str(line).map_err(|e| (None, format!("not a JSON object: {e}")))?;
    if let Some(unknown) = obj.keys().find(|k| !FIELDS.contains(&k.as_str())) {
        return field_err(unknown, "unknown field");
    }

    let user_id = required(take_str(&obj, "user_id")?, "user_id")?;
    if user_id.is_empty() {
        return field_err("user_id", "empty");
    }
    let ts = required(take_str(&obj, "ts")?, "ts")?;
    let timestamp = DateTime::parse_from_rfc3339(&ts)
        .map_err(|e| {
            (
                Some("ts".to_string()),
                format!("not an ISO-8601 timestamp: {e}"),
            )
        })?
        .with_timezone(&Utc);
    let prompt = required(take_str(&obj, "prompt")?, "prompt")?;
    let tokens = required(take_uint(&obj, "tokens", 0, u64::MAX)?, "tokens")?;
    let tier = required(take_uint(&obj, "tier", 1, 4)?, "tier")? as u8;
    let agent_turns = take_uint(&obj, "agent_turns", 0, u64::from(u32::MAX))?.unwrap_or(0) as u32;
    let active_run_hours = match obj.get("run_hours") {
        None | Some(Value::Null) => 0.0,
        Some(v) => match v.as_f64() {
            Some(h) if h.is_finite() && h >= 0.0 => h,
            _ => return field_err("run_hours", "expected a non-negative number"),
        },
    };
    let level = take_uint(&obj, "level", 1, 8)?.map(|l| l as u8);
    let department = take_str(&obj, "department")?;

    Ok(EventRecord {
        event: InteractionEvent {
            user_id,
            timestamp,
            task: TaskRepresentation::from_prompt(&prompt),
            token_count: tokens,
            complexity_tier: tier,
            agent_turns,
            active_run_hours,
            department,
        },
        level,
    })
}

/// Parses one non-blank line; `line` is only used for the error.
pub fn parse_event_line(text: &str, line: usize) -> Result<EventRecord, EventLogError> {
    parse_object(text).map_err(|(field, message)| EventLogError {
        line,
        field,
        message,
    })
}

/// Parses a whole log, returning records with their 1-based line numbers.
pub fn parse_event_log(text: &str) -> Result<Vec<(usize, EventRecord)>, EventLogError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| parse_event_line(l, i + 1).map(|r| (i + 1, r)))
        .collect()
}

/// Renders an event as a log line. The prompt written is the normalized
/// text, which re-normalizes to itself.
pub fn render_event_line(event: &InteractionEvent, level: Option<u8>) -> String {
    let mut obj = Map::new();
    obj.insert("user_id".into(), event.user_id.clone().into());
    obj.insert(
        "ts".into(),
        event
            .timestamp
            .to_rfc3339_opts(SecondsFormat::AutoSi, true)
            .into(),
    );
    obj.insert("prompt".into(), event.task.normalized_text.clone().into());
    obj.insert("tokens".into(), event.token_count.into());
    obj.insert("tier".into(), event.complexity_tier.into());
    if event.agent_turns != 0 {
        obj.insert("agent_turns".into(), event.agent_turns.into());
    }
    if event.active_run_hours != 0.0 {
        obj.insert("run_hours".into(), event.active_run_hours.into());
    }
    if let Some(level) = level {
        obj.insert("level".into(), level.into());
    }
    if let Some(d) = &event.department {
        obj.insert("department".into(), d.clone().into());
    }
    Value::Object(obj).to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn err(line: &str) -> EventLogError {
        parse_event_line(line, 7).unwrap_err()
    }

    #[test]
    fn full_record() {
        let r = parse_event_line(
            r#"{"user_id":"ana","ts":"2026-01-05T11:30:00+02:00","prompt":"Fix  the Build","tokens":1200,"tier":3,"agent_turns":4,"run_hours":1.5,"level":2,"department":"eng"}"#,
            1,
        )
        .unwrap();
        assert_eq!(r.level, Some(2));
        assert_eq!(r.event.epoch_seconds(), 1_767_605_400);
        assert_eq!(r.event.task.normalized_text, "fix the build");
        assert_eq!(r.event.complexity_tier, 3);
        assert_eq!(r.event.agent_turns, 4);
        assert_eq!(r.event.active_run_hours, 1.5);
        assert_eq!(r.event.department.as_deref(), Some("eng"));
    }

    #[test]
    fn defaults() {
        let r = parse_event_line(
            r#"{"user_id":"b","ts":"2026-01-05T00:00:00Z","prompt":"","tokens":0,"tier":1}"#,
            1,
        )
        .unwrap();
        assert_eq!(r.level, None);
        assert_eq!(r.event.agent_turns, 0);
        assert_eq!(r.event.active_run_hours, 0.0);
    }

    #[test]
    fn field_errors_name_the_field() {
        let base = r#""user_id":"a","ts":"2026-01-05T00:00:00Z","prompt":"p","tokens":1"#;
        let e = err(&format!("{{{base},\"tier\":5}}"));
        assert_eq!((e.line, e.field.as_deref()), (7, Some("tier")));
        let e = err(&format!("{{{base},\"tier\":1,\"colour\":\"red\"}}"));
        assert_eq!(e.field.as_deref(), Some("colour"));
        assert!(e.to_string().contains("unknown field"));
        let e = err(r#"{"user_id":"a","ts":"yesterday","prompt":"p","tokens":1,"tier":1}"#);
        assert_eq!(e.field.as_deref(), Some("ts"));
        let e = err(r#"{"user_id":"a","ts":"2026-01-05T00:00:00Z","prompt":"p","tier":1}"#);
        assert_eq!(e.field.as_deref(), Some("tokens"));
        let e = err(&format!("{{{base},\"tier\":1,\"run_hours\":-1}}"));
        assert_eq!(e.field.as_deref(), Some("run_hours"));
        let e = err(&format!("{{{base},\"tier\":1,\"level\":9}}"));
        assert_eq!(e.field.as_deref(), Some("level"));
        assert_eq!(err("[1,2]").field, None);
        assert_eq!(err(r#"{"tokens":-3}"#).field.as_deref(), Some("user_id"));
    }

    #[test]
    fn log_skips_blank_lines_and_reports_numbers() {
        let log = "\n{\"user_id\":\"a\",\"ts\":\"2026-01-05T00:00:00Z\",\"prompt\":\"p\",\"tokens\":1,\"tier\":1}\n\n{bad\n";
        let e = parse_event_log(log).unwrap_err();
        assert_eq!(e.line, 4);
        let ok = parse_event_log(&log.replace("{bad", "")).unwrap();
        assert_eq!(ok.len(), 1);
        assert_eq!(ok[0].0, 2);
    }

    #[test]
    fn render_round_trips() {
        let e = InteractionEvent::new("u", 1_767_605_400, "deploy the thing", 10)
            .with_tier(4)
            .with_autonomy(3, 0.25)
            .with_department("ops");
        let line = render_event_line(&e, Some(5));
        let back = parse_event_line(&line, 1).unwrap();
        assert_eq!(back.event, e);
        assert_eq!(back.level, Some(5));
    }
}
