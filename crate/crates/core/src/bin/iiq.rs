use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use iiq::aggregation::{summarize_periods, weekly_rollup};
use iiq::config::{convert_decay, convert_lambda, EngineConfig, VALID_PERIOD_HOURS};
use iiq::oracle::oracle_evaluate;
use iiq::persist::report::{
    fmt_num, read_departments, read_results, svg_line_chart, write_anti_gaming, write_results,
    write_summaries, write_temporal, write_weekly,
};
use iiq::persist::{ingest_files, parse_event_log, render_event_line, write_atomic, StateSnapshot};
use iiq::simulator::{figure_traces, run_scenario, FigureFamily, FigureTable, ANTI_GAMING_REGIMES};
use iiq::types::{InteractionEvent, PeriodIndex};

#[derive(Parser)]
#[command(
    name = "iiq",
    version,
    about = "AI adoption metrics from interaction logs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Ingest an event log on top of an optional snapshot
    Ingest {
        #[arg(long)]
        events: PathBuf,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        state: Option<PathBuf>,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Print each user's latest index and change as CSV
    Score {
        #[arg(long)]
        state: PathBuf,
    },
    /// Per-period organization summaries from a results file
    Aggregate {
        #[arg(long)]
        results: PathBuf,
        #[arg(long)]
        states: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Config the results were produced with (defaults if omitted)
        #[arg(long)]
        config: Option<PathBuf>,
        /// `user_id,department` CSV, as written by `ingest`
        #[arg(long)]
        departments: Option<PathBuf>,
        /// Also write per-user weekly hours and USD here
        #[arg(long)]
        weekly: Option<PathBuf>,
    },
    /// Run a built-in scenario (A-D) or figure family
    Simulate {
        #[arg(long)]
        scenario: String,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Also write a line chart as SVG
        #[arg(long)]
        svg: bool,
    },
    /// Convert daily rates to a sub-daily period
    Convert {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        period_hours: f64,
        #[arg(long)]
        lambda: Option<f64>,
    },
    /// Recompute a log from scratch with the reference evaluator
    #[command(hide = true)]
    Oracle {
        #[arg(long)]
        events: PathBuf,
        #[arg(long)]
        config: PathBuf,
    },
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn load_config(path: Option<&Path>) -> Result<EngineConfig> {
    match path {
        Some(p) => EngineConfig::parse(&read(p)?).with_context(|| format!("{}", p.display())),
        None => Ok(EngineConfig::default()),
    }
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    write_atomic(path, bytes).with_context(|| format!("cannot write {}", path.display()))
}

fn score(state: &Path) -> Result<()> {
    let snap = StateSnapshot::load_unchecked(state)?;
    let rows: Vec<String> = snap
        .users
        .iter()
        .filter_map(|(user, s)| {
            let (p, index) = (s.last_period_index?, s.previous_index?);
            let delta = s.last_delta.map(fmt_num).unwrap_or_default();
            Some(format!("{user},{},{},{delta}", p.0, fmt_num(index)))
        })
        .collect();
    if !rows.is_empty() {
        println!("user_id,period_index,iiq_index,delta_iiq");
        for r in rows {
            println!("{r}");
        }
    }
    Ok(())
}

fn aggregate(
    results: &Path,
    states: &Path,
    out: &Path,
    config: Option<&Path>,
    departments: Option<&Path>,
    weekly: Option<&Path>,
) -> Result<()> {
    let config = load_config(config)?;
    let snap = StateSnapshot::load(states, &config)?;
    let rows = read_results(read(results)?.as_bytes())
        .with_context(|| format!("{}", results.display()))?;
    let depts = match departments {
        Some(p) => {
            read_departments(read(p)?.as_bytes()).with_context(|| format!("{}", p.display()))?
        }
        None => BTreeMap::new(),
    };
    let summaries = summarize_periods(&rows, &snap.users, &depts, &config)?;
    let mut buf = Vec::new();
    write_summaries(&mut buf, &summaries, config.period_seconds())?;
    write(out, &buf)?;
    if let Some(path) = weekly {
        let mut buf = Vec::new();
        write_weekly(&mut buf, &weekly_rollup(&rows, &config))?;
        write(path, &buf)?;
    }
    Ok(())
}

fn simulate(
    scenario: &str,
    out_dir: &Path,
    seed: Option<u64>,
    config: Option<&Path>,
    svg: bool,
) -> Result<()> {
    let config = load_config(config)?;
    fs::create_dir_all(out_dir).with_context(|| format!("cannot create {}", out_dir.display()))?;
    let ps = config.period_seconds();
    let mut buf = Vec::new();
    let figure = scenario
        .parse::<FigureFamily>()
        .ok()
        .map(|f| figure_traces(f, &config))
        .transpose()?;
    match figure {
        Some(FigureTable::AntiGaming(points)) => {
            write_anti_gaming(&mut buf, &points)?;
            write(&out_dir.join("anti_gaming.csv"), &buf)?;
            if svg {
                let series: Vec<(String, Vec<f64>)> =
                    ANTI_GAMING_REGIMES
                        .iter()
                        .map(|r| {
                            let ys = points
                                .iter()
                                .filter(|p| p.regime == *r)
                                .map(|p| p.distinct_mass_cum)
                                .collect();
                            (format!("{r} D"), ys)
                        })
                        .collect();
                let chart = svg_line_chart("Cumulative distinct-task mass", &series, 20.0);
                write(&out_dir.join("anti_gaming.svg"), chart.as_bytes())?;
            }
        }
        Some(FigureTable::TemporalResponse(series)) => {
            write_temporal(&mut buf, &series, ps)?;
            write(&out_dir.join("temporal_response.csv"), &buf)?;
            if svg {
                let lines: Vec<(String, Vec<f64>)> = series
                    .iter()
                    .map(|s| {
                        (
                            s.name.clone(),
                            s.results.iter().map(|r| r.iiq_index).collect(),
                        )
                    })
                    .collect();
                let chart = svg_line_chart("IIQ index over 45 days", &lines, 1000.0);
                write(&out_dir.join("temporal_response.svg"), chart.as_bytes())?;
            }
        }
        None => {
            let (spec, trace, results) = run_scenario(scenario, &config, seed)?;
            write_results(&mut buf, &results, ps)?;
            write(&out_dir.join(format!("scenario_{scenario}.csv")), &buf)?;
            let mut log = String::new();
            for (i, e) in trace.iter().enumerate() {
                log.push_str(&render_event_line(
                    e,
                    (i == 0).then_some(spec.leverage_level),
                ));
                log.push('\n');
            }
            write(
                &out_dir.join(format!("scenario_{scenario}.jsonl")),
                log.as_bytes(),
            )?;
            if svg {
                let ys = results.iter().map(|r| r.iiq_index).collect();
                let chart = svg_line_chart(
                    &format!("Scenario {scenario} IIQ index"),
                    &[(spec.name, ys)],
                    1000.0,
                );
                write(
                    &out_dir.join(format!("scenario_{scenario}.svg")),
                    chart.as_bytes(),
                )?;
            }
        }
    }
    Ok(())
}

fn convert(alpha: f64, period_hours: f64, lambda: Option<f64>) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        bail!("--alpha must be in (0, 1)");
    }
    if !VALID_PERIOD_HOURS
        .iter()
        .any(|p| f64::from(*p) == period_hours)
    {
        bail!("--period-hours must divide 24 (one of {VALID_PERIOD_HOURS:?})");
    }
    println!("alpha_periodic={}", convert_decay(alpha, period_hours));
    if let Some(l) = lambda {
        if !(l.is_finite() && l > 0.0) {
            bail!("--lambda must be positive");
        }
        println!("lambda_periodic={}", convert_lambda(l, period_hours));
    }
    Ok(())
}

fn oracle(events: &Path, config: &Path) -> Result<()> {
    let config = load_config(Some(config))?;
    let records = parse_event_log(&read(events)?)?;
    let mut users: BTreeMap<String, (Option<u8>, Vec<InteractionEvent>)> = BTreeMap::new();
    let mut end: Option<PeriodIndex> = None;
    for (line, r) in records {
        let entry = users.entry(r.event.user_id.clone()).or_default();
        match (entry.0, r.level) {
            (None, None) => bail!(
                "line {line}: unknown user {} without a level",
                r.event.user_id
            ),
            (None, level) => entry.0 = level,
            _ => {}
        }
        end = end.max(Some(PeriodIndex::of(
            r.event.epoch_seconds(),
            config.period_seconds(),
        )));
        entry.1.push(r.event);
    }
    let mut results = Vec::new();
    for (user, (level, trace)) in &users {
        let level = level.expect("set on first record");
        results.extend(oracle_evaluate(user, trace, &config, level, end)?);
    }
    results.sort_by(|a, b| {
        a.period_index
            .cmp(&b.period_index)
            .then_with(|| a.user_id.cmp(&b.user_id))
    });
    write_results(std::io::stdout().lock(), &results, config.period_seconds())?;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Ingest {
            events,
            config,
            state,
            out_dir,
        } => {
            let out = ingest_files(&events, &config, state.as_deref(), &out_dir)?;
            log::info!(
                "{} result rows for {} users",
                out.results.len(),
                out.snapshot.users.len()
            );
            Ok(())
        }
        Command::Score { state } => score(&state),
        Command::Aggregate {
            results,
            states,
            out,
            config,
            departments,
            weekly,
        } => aggregate(
            &results,
            &states,
            &out,
            config.as_deref(),
            departments.as_deref(),
            weekly.as_deref(),
        ),
        Command::Simulate {
            scenario,
            out_dir,
            seed,
            config,
            svg,
        } => simulate(&scenario, &out_dir, seed, config.as_deref(), svg),
        Command::Convert {
            alpha,
            period_hours,
            lambda,
        } => convert(alpha, period_hours, lambda),
        Command::Oracle { events, config } => oracle(&events, &config),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            let msg = e.to_string();
            let head: Vec<&str> = msg
                .lines()
                .map(str::trim)
                .take_while(|l| !l.is_empty() && !l.starts_with("Usage:"))
                .collect();
            eprintln!("{}", head.join(" "));
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let chain: Vec<String> = e.chain().map(ToString::to_string).collect();
            eprintln!("error: {}", chain.join(": "));
            ExitCode::FAILURE
        }
    }
}
