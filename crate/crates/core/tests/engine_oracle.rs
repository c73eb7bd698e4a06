mod common;

use common::{compare, random_config, random_trace, through};
use iiq::config::EngineConfig;
use iiq::engine::{advance, init_state, run_trace};
use iiq::oracle::oracle_evaluate;
use iiq::types::{InteractionEvent, PeriodIndex};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn seeded_random_traces_agree() {
    for seed in 0..200u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cfg = random_config(&mut rng);
        let trace = random_trace(&mut rng, "u", &cfg, 200, 60);
        let level = rng.gen_range(1..=8);
        let to = through(&trace, &cfg, rng.gen_range(0..5));
        let (_, engine) = run_trace("u", level, &trace, to, &cfg).unwrap();
        let oracle = oracle_evaluate("u", &trace, &cfg, level, to).unwrap();
        if let Err(e) = compare(&engine, &oracle, 1e-9) {
            panic!("seed {seed}: {e}");
        }
    }
}

#[test]
fn chunked_advance_matches_one_shot() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..50 {
        let cfg = random_config(&mut rng);
        let trace = random_trace(&mut rng, "u", &cfg, 120, 40);
        let (_, whole) = run_trace("u", 3, &trace, None, &cfg).unwrap();

        let ps = cfg.period_seconds();
        let cut_period = PeriodIndex::of(trace[rng.gen_range(0..trace.len())].epoch_seconds(), ps);
        let split = trace.partition_point(|e| PeriodIndex::of(e.epoch_seconds(), ps) < cut_period);
        let mut state = init_state(3, &cfg).unwrap();
        let mut parts = advance("u", &mut state, &trace[..split], None, &cfg).unwrap();
        parts.extend(advance("u", &mut state, &trace[split..], None, &cfg).unwrap());
        assert_eq!(parts, whole);
    }
}

#[test]
fn six_hour_grid_preserves_daily_decay() {
    let daily = EngineConfig::default();
    let six = EngineConfig {
        period_hours: 6,
        ..EngineConfig::default()
    };
    let trace = [InteractionEvent::new("u", 0, "one big task", 10_000)];
    let (_, d) = run_trace("u", 1, &trace, Some(PeriodIndex(20)), &daily).unwrap();
    let (_, s) = run_trace("u", 1, &trace, Some(PeriodIndex(80)), &six).unwrap();
    for day in 0..=20 {
        let a = d[day].token_stock;
        let b = s[day * 4].token_stock;
        assert!((a - b).abs() <= 1e-9 * a, "day {day}: {a} vs {b}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn engine_matches_oracle(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cfg = random_config(&mut rng);
        let trace = random_trace(&mut rng, "p", &cfg, 60, 20);
        let to = through(&trace, &cfg, 3);
        let (_, engine) = run_trace("p", 2, &trace, to, &cfg).unwrap();
        let oracle = oracle_evaluate("p", &trace, &cfg, 2, to).unwrap();
        prop_assert_eq!(compare(&engine, &oracle, 1e-9), Ok(()));
    }

    #[test]
    fn index_stays_in_range(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cfg = random_config(&mut rng);
        let trace = random_trace(&mut rng, "p", &cfg, 80, 30);
        let (state, rs) = run_trace("p", 8, &trace, through(&trace, &cfg, 10), &cfg).unwrap();
        for r in &rs {
            prop_assert!((0.0..=1000.0).contains(&r.iiq_index));
            prop_assert!(r.recency > 0.0 && r.recency <= 1.0);
            // A weighted mean can land an ulp outside its inputs.
            prop_assert!(r.complexity >= cfg.complexity.min() - 1e-12);
            prop_assert!(r.complexity <= cfg.complexity.max() + 1e-12);
            prop_assert!(r.hours_saved <= cfg.work_hours_per_period() * cfg.rho + 1e-12);
        }
        prop_assert!(state.history.len() <= cfg.history_capacity);
        prop_assert!(state.complexity_window.len() <= cfg.complexity_window);
    }
}
