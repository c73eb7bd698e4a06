//! Organization-level views over one period's per-user results.
//!
//! A single mean hides concentration: one power user can make a whole team
//! look mature. [`OrgSummary`] therefore always reports mean and median
//! side by side with breadth (active-user share) and concentration
//! (top-decile share, Gini).

use std::collections::BTreeMap;

use thiserror::Error;

use crate::config::EngineConfig;
use crate::interpretation::usd_impact;
use crate::types::{PeriodIndex, PeriodResult, UserState};

const WEEK_SECONDS: i64 = 7 * 86_400;
/// 1970-01-01 was a Thursday; shifting by three days aligns weeks to Monday.
const MONDAY_OFFSET: i64 = 3 * 86_400;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AggregationError {
    #[error("gini of an empty list")]
    Empty,
    #[error("negative or non-finite value {0}")]
    BadValue(f64),
    #[error("results span periods {0:?} and {1:?}")]
    MixedPeriods(PeriodIndex, PeriodIndex),
}

/// One user's contribution to a period summary.
#[derive(Debug, Clone, Copy)]
pub struct Member<'a> {
    pub result: &'a PeriodResult,
    /// Inside the recency grace window (streak <= g).
    pub active: bool,
    pub department: Option<&'a str>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DepartmentSummary {
    pub mean_index: f64,
    pub median_index: f64,
    pub user_count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrgSummary {
    pub period_index: PeriodIndex,
    pub user_count: usize,
    pub mean_index: f64,
    pub median_index: f64,
    pub active_user_share: f64,
    pub top_decile_share: f64,
    pub gini: f64,
    pub per_department: BTreeMap<String, DepartmentSummary>,
    pub total_hours_saved: f64,
    pub total_usd: f64,
}

impl OrgSummary {
    /// Summary of a period with no users; every statistic is zero.
    pub fn empty(period_index: PeriodIndex) -> Self {
        Self {
            period_index,
            user_count: 0,
            mean_index: 0.0,
            median_index: 0.0,
            active_user_share: 0.0,
            top_decile_share: 0.0,
            gini: 0.0,
            per_department: BTreeMap::new(),
            total_hours_saved: 0.0,
            total_usd: 0.0,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.user_count == 0
    }
}

pub fn is_active(inactive_streak: u64, config: &EngineConfig) -> bool {
    inactive_streak <= u64::from(config.grace_periods)
}

/// Gini coefficient `sum_i sum_j |x_i - x_j| / (2 n^2 mean)`, computed on
/// the sorted values in O(n log n). All-equal and all-zero inputs give 0.
pub fn gini(values: &[f64]) -> Result<f64, AggregationError> {
    if values.is_empty() {
        return Err(AggregationError::Empty);
    }
    if let Some(&bad) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
        return Err(AggregationError::BadValue(bad));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let total: f64 = sorted.iter().sum();
    if total == 0.0 || sorted.first() == sorted.last() {
        return Ok(0.0);
    }
    let weighted: f64 = sorted
        .iter()
        .enumerate()
        .map(|(i, x)| (2.0 * (i as f64 + 1.0) - n - 1.0) * x)
        .sum();
    Ok((weighted / (n * total)).clamp(0.0, 1.0))
}

pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    Some(if v.len().is_multiple_of(2) {
        (v[mid - 1] + v[mid]) / 2.0
    } else {
        v[mid]
    })
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Share of the index total held by the top `ceil(n / 10)` users, ranked by
/// index descending with ties broken by user id.
pub fn top_decile_share(results: &[&PeriodResult]) -> f64 {
    let total: f64 = results.iter().map(|r| r.iiq_index).sum();
    if results.is_empty() || total <= 0.0 {
        return 0.0;
    }
    let mut ranked: Vec<&PeriodResult> = results.to_vec();
    ranked.sort_by(|a, b| {
        b.iiq_index
            .total_cmp(&a.iiq_index)
            .then_with(|| a.user_id.cmp(&b.user_id))
    });
    let k = results.len().div_ceil(10);
    ranked[..k].iter().map(|r| r.iiq_index).sum::<f64>() / total
}

/// Summarizes one period. Hours saved are re-capped per user at the weekly
/// ceiling `rho * work_hours_per_week` before summing.
pub fn summarize(
    period_index: PeriodIndex,
    members: &[Member<'_>],
    config: &EngineConfig,
) -> Result<OrgSummary, AggregationError> {
    if members.is_empty() {
        return Ok(OrgSummary::empty(period_index));
    }
    if let Some(m) = members
        .iter()
        .find(|m| m.result.period_index != period_index)
    {
        return Err(AggregationError::MixedPeriods(
            period_index,
            m.result.period_index,
        ));
    }

    let indices: Vec<f64> = members.iter().map(|m| m.result.iiq_index).collect();
    let results: Vec<&PeriodResult> = members.iter().map(|m| m.result).collect();
    let active = members.iter().filter(|m| m.active).count();

    let mut by_dept: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for m in members {
        if let Some(d) = m.department {
            by_dept.entry(d).or_default().push(m.result.iiq_index);
        }
    }
    let per_department = by_dept
        .into_iter()
        .map(|(d, xs)| {
            let summary = DepartmentSummary {
                mean_index: mean(&xs),
                median_index: median(&xs).unwrap_or(0.0),
                user_count: xs.len(),
            };
            (d.to_string(), summary)
        })
        .collect();

    let weekly_cap = config.rho * config.work_hours_per_week();
    let (hours, usd) = members.iter().fold((0.0, 0.0), |(h, u), m| {
        let capped = m.result.hours_saved.min(weekly_cap);
        (
            h + capped,
            u + usd_impact(capped, config.wage_usd, m.result.leverage),
        )
    });

    Ok(OrgSummary {
        period_index,
        user_count: members.len(),
        mean_index: mean(&indices),
        median_index: median(&indices).unwrap_or(0.0),
        active_user_share: active as f64 / members.len() as f64,
        top_decile_share: top_decile_share(&results),
        gini: gini(&indices)?,
        per_department,
        total_hours_saved: hours,
        total_usd: usd,
    })
}

/// Convenience wrapper when the user states are the ones reached at the end
/// of `results`' period.
pub fn summarize_with_states(
    period_index: PeriodIndex,
    results: &[PeriodResult],
    states: &BTreeMap<String, UserState>,
    departments: &BTreeMap<String, String>,
    config: &EngineConfig,
) -> Result<OrgSummary, AggregationError> {
    let members: Vec<Member<'_>> = results
        .iter()
        .map(|r| Member {
            result: r,
            active: states
                .get(&r.user_id)
                .is_some_and(|s| is_active(s.inactive_streak, config)),
            department: departments.get(&r.user_id).map(String::as_str),
        })
        .collect();
    summarize(period_index, &members, config)
}

/// Whether a user counts as active in a stored result row. The streak is
/// only known exactly at the state's frontier; earlier rows fall back to
/// `R == 1`, which is equivalent to `streak <= g` whenever the recency
/// penalty is positive. With a zero penalty every earlier row counts as
/// active.
pub fn row_is_active(
    result: &PeriodResult,
    state: Option<&UserState>,
    config: &EngineConfig,
) -> bool {
    match state {
        Some(s) if s.last_period_index == Some(result.period_index) => {
            is_active(s.inactive_streak, config)
        }
        _ => result.recency >= 1.0,
    }
}

/// Summaries for every period present in `results`, in period order.
pub fn summarize_periods(
    results: &[PeriodResult],
    states: &BTreeMap<String, UserState>,
    departments: &BTreeMap<String, String>,
    config: &EngineConfig,
) -> Result<Vec<OrgSummary>, AggregationError> {
    let mut by_period: BTreeMap<PeriodIndex, Vec<Member<'_>>> = BTreeMap::new();
    for r in results {
        by_period.entry(r.period_index).or_default().push(Member {
            result: r,
            active: row_is_active(r, states.get(&r.user_id), config),
            department: departments.get(&r.user_id).map(String::as_str),
        });
    }
    by_period
        .into_iter()
        .map(|(p, members)| summarize(p, &members, config))
        .collect()
}

/// Hours saved and USD for one user over one Monday-aligned week.
#[derive(Debug, Clone, PartialEq)]
pub struct WeeklyRollup {
    pub user_id: String,
    /// Unix seconds of the Monday 00:00 UTC that opens the week.
    pub week_start: i64,
    pub periods: usize,
    pub hours_saved: f64,
    pub usd_impact: f64,
}

/// Sums per-period hours into user-weeks and applies the weekly ceiling
/// `rho * work_hours_per_day * 5`, so no week credits more than that
/// regardless of volume.
pub fn weekly_rollup(results: &[PeriodResult], config: &EngineConfig) -> Vec<WeeklyRollup> {
    let cap = config.rho * config.work_hours_per_week();
    let period_seconds = config.period_seconds();
    let mut acc: BTreeMap<(String, i64), (usize, f64, f64)> = BTreeMap::new();
    for r in results {
        let start = r.period_index.start_seconds(period_seconds);
        let week = (start + MONDAY_OFFSET).div_euclid(WEEK_SECONDS) * WEEK_SECONDS - MONDAY_OFFSET;
        let e = acc
            .entry((r.user_id.clone(), week))
            .or_insert((0, 0.0, r.leverage));
        e.0 += 1;
        e.1 += r.hours_saved;
    }
    acc.into_iter()
        .map(|((user_id, week_start), (periods, hours, leverage))| {
            let hours = hours.min(cap);
            WeeklyRollup {
                user_id,
                week_start,
                periods,
                hours_saved: hours,
                usd_impact: usd_impact(hours, config.wage_usd, leverage),
            }
        })
        .collect()
}
