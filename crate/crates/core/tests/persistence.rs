mod common;

use iiq::config::EngineConfig;
use iiq::persist::report::write_results;
use iiq::persist::{ingest, ingest_files, render_event_line, IngestError, StateSnapshot};
use iiq::simulator::{builtin_profiles, generate_trace};
use iiq::types::{InteractionEvent, PeriodIndex};
use proptest::prelude::*;

/// Four simulated users interleaved by timestamp, as one log.
fn org_log() -> (Vec<(InteractionEvent, Option<u8>)>, String) {
    let mut all = Vec::new();
    for (name, spec) in builtin_profiles() {
        let trace = generate_trace(&spec, &format!("user_{name}"));
        for (i, e) in trace.into_iter().enumerate() {
            let e = e.with_department(if name.as_str() < "C" { "eng" } else { "ops" });
            all.push((e, (i == 0).then_some(spec.leverage_level)));
        }
    }
    all.sort_by(|a, b| {
        a.0.timestamp
            .cmp(&b.0.timestamp)
            .then(a.0.user_id.cmp(&b.0.user_id))
    });
    let text = render(&all);
    (all, text)
}

fn render(events: &[(InteractionEvent, Option<u8>)]) -> String {
    events
        .iter()
        .map(|(e, l)| render_event_line(e, *l) + "\n")
        .collect()
}

fn csv(results: &[iiq::PeriodResult], cfg: &EngineConfig) -> Vec<u8> {
    let mut buf = Vec::new();
    write_results(&mut buf, results, cfg.period_seconds()).unwrap();
    buf
}

#[test]
fn ingest_is_deterministic() {
    let cfg = EngineConfig::default();
    let (_, log) = org_log();
    let a = ingest(&log, None, &cfg).unwrap();
    let b = ingest(&log, None, &cfg).unwrap();
    assert_eq!(csv(&a.results, &cfg), csv(&b.results, &cfg));
    assert_eq!(a.snapshot.to_json(), b.snapshot.to_json());
    assert_eq!(a.snapshot.users.len(), 4);
    assert_eq!(a.departments["user_D"], "ops");
}

#[test]
fn split_replay_matches_one_shot_at_every_day() {
    let cfg = EngineConfig::default();
    let (events, log) = org_log();
    let whole = ingest(&log, None, &cfg).unwrap();
    let ps = cfg.period_seconds();
    let first = PeriodIndex::of(events[0].0.epoch_seconds(), ps).0;

    for cut in first + 1..first + 30 {
        let split = events.partition_point(|(e, _)| PeriodIndex::of(e.epoch_seconds(), ps).0 < cut);
        let (head, tail) = events.split_at(split);
        let one = ingest(&render(head), None, &cfg).unwrap();
        let snap = StateSnapshot::from_json(&one.snapshot.to_json(), &cfg).unwrap();
        // Levels given on first records only; a second-half newcomer keeps
        // its level line because it is still that user's first record.
        let two = ingest(&render(tail), Some(&snap), &cfg).unwrap();
        let mut joined = one.results.clone();
        joined.extend(two.results);
        assert_eq!(
            csv(&joined, &cfg),
            csv(&whole.results, &cfg),
            "cut at {cut}"
        );
        assert_eq!(
            two.snapshot.to_json(),
            whole.snapshot.to_json(),
            "cut at {cut}"
        );
    }
}

#[test]
fn snapshot_round_trip_after_real_ingest() {
    let cfg = EngineConfig::default();
    let (_, log) = org_log();
    let out = ingest(&log, None, &cfg).unwrap();
    let text = out.snapshot.to_json();
    let back = StateSnapshot::from_json(&text, &cfg).unwrap();
    assert_eq!(back, out.snapshot);
    assert_eq!(back.to_json(), text);
}

#[test]
fn empty_log_keeps_snapshot() {
    let cfg = EngineConfig::default();
    let (_, log) = org_log();
    let out = ingest(&log, None, &cfg).unwrap();
    let again = ingest("\n\n", Some(&out.snapshot), &cfg).unwrap();
    assert!(again.results.is_empty());
    assert_eq!(again.snapshot, out.snapshot);
}

#[test]
fn snapshot_from_other_config_is_refused() {
    let cfg = EngineConfig::default();
    let (_, log) = org_log();
    let out = ingest(&log, None, &cfg).unwrap();
    let other = EngineConfig {
        grace_periods: 1,
        ..EngineConfig::default()
    };
    assert!(matches!(
        ingest("", Some(&out.snapshot), &other),
        Err(IngestError::Snapshot(_))
    ));
}

#[test]
fn files_on_disk() {
    let dir = tempfile::tempdir().unwrap();
    let (_, log) = org_log();
    let events = dir.path().join("events.jsonl");
    let config = dir.path().join("iiq.conf");
    std::fs::write(&events, &log).unwrap();
    std::fs::write(&config, "# defaults\nperiod_hours = 24\n").unwrap();
    let out_dir = dir.path().join("out");
    let out = ingest_files(&events, &config, None, &out_dir).unwrap();
    let results = std::fs::read_to_string(out_dir.join("results.csv")).unwrap();
    assert_eq!(results.lines().count(), out.results.len() + 1);
    assert!(out_dir.join("departments.csv").exists());
    let state = out_dir.join("state.json");
    let err = ingest_files(&events, &config, Some(&state), &dir.path().join("again")).unwrap_err();
    assert!(err.to_string().contains("timestamp earlier than frontier"));
    let leftovers: Vec<_> = std::fs::read_dir(&out_dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n.ends_with(".tmp"))
        .collect();
    assert!(leftovers.is_empty());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn any_split_of_random_logs_replays_exactly(seed in any::<u64>(), cut_frac in 0.0f64..1.0) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let cfg = common::random_config(&mut rng);
        let mut events = Vec::new();
        for u in ["a", "b", "c"] {
            let level = rng.gen_range(1..=8);
            let trace = common::random_trace(&mut rng, u, &cfg, 40, 15);
            for (i, e) in trace.into_iter().enumerate() {
                events.push((e, (i == 0).then_some(level)));
            }
        }
        // Per-user order is all ingest needs; shuffle users together by time.
        events.sort_by_key(|(e, _)| e.timestamp);
        let ps = cfg.period_seconds();
        let lo = PeriodIndex::of(events[0].0.epoch_seconds(), ps).0;
        let hi = PeriodIndex::of(events[events.len() - 1].0.epoch_seconds(), ps).0;
        let cut = lo + ((hi - lo + 1) as f64 * cut_frac) as i64;
        let split = events.partition_point(|(e, _)| PeriodIndex::of(e.epoch_seconds(), ps).0 < cut);

        let whole = ingest(&render(&events), None, &cfg).unwrap();
        let one = ingest(&render(&events[..split]), None, &cfg).unwrap();
        let two = ingest(&render(&events[split..]), Some(&one.snapshot), &cfg).unwrap();
        let mut joined = one.results;
        joined.extend(two.results);
        prop_assert_eq!(joined, whole.results);
        prop_assert_eq!(two.snapshot, whole.snapshot);
    }
}
