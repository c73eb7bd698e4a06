//! CSV reports. All numbers are written with 9 significant digits, `.` as
//! the decimal separator, and LF line endings.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use chrono::{TimeZone, Utc};
use thiserror::Error;

use crate::aggregation::{OrgSummary, WeeklyRollup};
use crate::simulator::{AntiGamingPoint, TemporalSeries};
use crate::types::{PeriodIndex, PeriodResult};

pub const RESULTS_HEADER: [&str; 17] = [
    "user_id",
    "period_index",
    "period_start_utc",
    "T",
    "F",
    "R",
    "V",
    "C",
    "A",
    "G",
    "D",
    "U",
    "iai",
    "iiq_index",
    "delta_iiq",
    "est_hours_saved",
    "est_usd",
];

/// Accepted in results input and ignored.
pub const WORKFLOW_WEIGHT_COLUMN: &str = "workflow_weight";

#[derive(Debug, Error)]
pub enum ReportError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("missing column `{0}`")]
    MissingColumn(&'static str),
    #[error("row {row}, column `{column}`: cannot parse {value:?}")]
    BadValue {
        row: usize,
        column: &'static str,
        value: String,
    },
}

/// `%.9g`-style formatting: 9 significant digits, trailing zeros removed,
/// exponent form outside `1e-4 <= |x| < 1e9`.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..9).contains(&exp) {
        trim_zeros(format!("{:.*}", (8 - exp) as usize, x))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

pub fn fmt_utc(epoch_seconds: i64) -> String {
    Utc.timestamp_opt(epoch_seconds, 0)
        .single()
        .map(|t| t.format("%Y-%m-%dT%H:%M:%SZ").to_string())
        .unwrap_or_default()
}

fn writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w)
}

pub fn write_results<W: Write>(
    w: W,
    results: &[PeriodResult],
    period_seconds: i64,
) -> Result<(), ReportError> {
    let mut out = writer(w);
    out.write_record(RESULTS_HEADER)?;
    for r in results {
        out.write_record([
            r.user_id.clone(),
            r.period_index.0.to_string(),
            fmt_utc(r.period_index.start_seconds(period_seconds)),
            fmt_num(r.token_stock),
            fmt_num(r.frequency),
            fmt_num(r.recency),
            fmt_num(r.leverage),
            fmt_num(r.complexity),
            fmt_num(r.autonomy),
            fmt_num(r.effective_tokens),
            fmt_num(r.distinct_mass),
            fmt_num(r.autonomy_mass),
            fmt_num(r.iai),
            fmt_num(r.iiq_index),
            r.delta_iiq.map(fmt_num).unwrap_or_default(),
            fmt_num(r.hours_saved),
            fmt_num(r.usd_impact),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Reads a results CSV written by [`write_results`]. Values are parsed back
/// at the written precision. Unknown extra columns are ignored; a
/// `workflow_weight` column additionally logs a warning.
pub fn read_results<R: Read>(r: R) -> Result<Vec<PeriodResult>, ReportError> {
    let mut rdr = csv::ReaderBuilder::new().from_reader(r);
    let headers = rdr.headers()?.clone();
    if headers.iter().any(|h| h == WORKFLOW_WEIGHT_COLUMN) {
        log::warn!("`{WORKFLOW_WEIGHT_COLUMN}` column is not used and will be ignored");
    }
    let mut col = BTreeMap::new();
    for name in RESULTS_HEADER {
        if name == "period_start_utc" {
            continue;
        }
        let i = headers
            .iter()
            .position(|h| h == name)
            .ok_or(ReportError::MissingColumn(name))?;
        col.insert(name, i);
    }

    let mut out = Vec::new();
    for (n, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let row = n + 2;
        let raw = |name: &'static str| rec.get(col[name]).unwrap_or("");
        let num = |name: &'static str| -> Result<f64, ReportError> {
            raw(name).parse::<f64>().map_err(|_| ReportError::BadValue {
                row,
                column: name,
                value: raw(name).to_string(),
            })
        };
        let period = raw("period_index")
            .parse::<i64>()
            .map_err(|_| ReportError::BadValue {
                row,
                column: "period_index",
                value: raw("period_index").to_string(),
            })?;
        out.push(PeriodResult {
            user_id: raw("user_id").to_string(),
            period_index: PeriodIndex(period),
            token_stock: num("T")?,
            frequency: num("F")?,
            recency: num("R")?,
            leverage: num("V")?,
            complexity: num("C")?,
            autonomy: num("A")?,
            effective_tokens: num("G")?,
            distinct_mass: num("D")?,
            autonomy_mass: num("U")?,
            iai: num("iai")?,
            iiq_index: num("iiq_index")?,
            delta_iiq: match raw("delta_iiq") {
                "" => None,
                _ => Some(num("delta_iiq")?),
            },
            hours_saved: num("est_hours_saved")?,
            usd_impact: num("est_usd")?,
        });
    }
    Ok(out)
}

pub const SUMMARY_HEADER: [&str; 11] = [
    "period_index",
    "period_start_utc",
    "scope",
    "user_count",
    "mean_index",
    "median_index",
    "active_user_share",
    "top_decile_share",
    "gini",
    "total_hours_saved",
    "total_usd",
];

/// One `all` row per period followed by a `department:<name>` row per
/// department. Department rows leave the org-only columns empty.
pub fn write_summaries<W: Write>(
    w: W,
    summaries: &[OrgSummary],
    period_seconds: i64,
) -> Result<(), ReportError> {
    let mut out = writer(w);
    out.write_record(SUMMARY_HEADER)?;
    for s in summaries {
        let period = s.period_index.0.to_string();
        let start = fmt_utc(s.period_index.start_seconds(period_seconds));
        out.write_record([
            period.clone(),
            start.clone(),
            "all".to_string(),
            s.user_count.to_string(),
            fmt_num(s.mean_index),
            fmt_num(s.median_index),
            fmt_num(s.active_user_share),
            fmt_num(s.top_decile_share),
            fmt_num(s.gini),
            fmt_num(s.total_hours_saved),
            fmt_num(s.total_usd),
        ])?;
        for (dept, d) in &s.per_department {
            out.write_record([
                period.clone(),
                start.clone(),
                format!("department:{dept}"),
                d.user_count.to_string(),
                fmt_num(d.mean_index),
                fmt_num(d.median_index),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
            ])?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn write_weekly<W: Write>(w: W, rows: &[WeeklyRollup]) -> Result<(), ReportError> {
    let mut out = writer(w);
    out.write_record([
        "user_id",
        "week_start_utc",
        "periods",
        "est_hours_saved",
        "est_usd",
    ])?;
    for r in rows {
        out.write_record([
            r.user_id.clone(),
            fmt_utc(r.week_start),
            r.periods.to_string(),
            fmt_num(r.hours_saved),
            fmt_num(r.usd_impact),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_departments<W: Write>(
    w: W,
    departments: &BTreeMap<String, String>,
) -> Result<(), ReportError> {
    let mut out = writer(w);
    out.write_record(["user_id", "department"])?;
    for (user, dept) in departments {
        out.write_record([user, dept])?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_departments<R: Read>(r: R) -> Result<BTreeMap<String, String>, ReportError> {
    let mut rdr = csv::Reader::from_reader(r);
    let headers = rdr.headers()?.clone();
    let find = |name: &'static str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or(ReportError::MissingColumn(name))
    };
    let (u, d) = (find("user_id")?, find("department")?);
    let mut out = BTreeMap::new();
    for rec in rdr.records() {
        let rec = rec?;
        out.insert(
            rec.get(u).unwrap_or("").to_string(),
            rec.get(d).unwrap_or("").to_string(),
        );
    }
    Ok(out)
}

pub fn write_anti_gaming<W: Write>(w: W, points: &[AntiGamingPoint]) -> Result<(), ReportError> {
    let mut out = writer(w);
    out.write_record([
        "regime",
        "interaction",
        "nu",
        "raw_tokens_cum",
        "effective_tokens_cum",
        "distinct_mass_cum",
        "novel_ceiling",
        "token_stock",
    ])?;
    for p in points {
        out.write_record([
            p.regime.to_string(),
            p.interaction.to_string(),
            fmt_num(p.novelty),
            fmt_num(p.raw_tokens_cum),
            fmt_num(p.effective_tokens_cum),
            fmt_num(p.distinct_mass_cum),
            fmt_num(p.novel_ceiling),
            fmt_num(p.token_stock),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Wide table: one row per period, one IIQ-index column per series. All
/// series must cover the same periods.
pub fn write_temporal<W: Write>(
    w: W,
    series: &[TemporalSeries],
    period_seconds: i64,
) -> Result<(), ReportError> {
    let mut out = writer(w);
    let mut header = vec!["period_index".to_string(), "period_start_utc".to_string()];
    header.extend(series.iter().map(|s| s.name.clone()));
    out.write_record(&header)?;
    let Some(first) = series.first() else {
        out.flush()?;
        return Ok(());
    };
    for (i, r) in first.results.iter().enumerate() {
        let mut row = vec![
            r.period_index.0.to_string(),
            fmt_utc(r.period_index.start_seconds(period_seconds)),
        ];
        row.extend(series.iter().map(|s| fmt_num(s.results[i].iiq_index)));
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

/// Minimal SVG line chart; x is the sample position, y is scaled to
/// `[0, y_max]`.
pub fn svg_line_chart(title: &str, series: &[(String, Vec<f64>)], y_max: f64) -> String {
    const W: f64 = 640.0;
    const H: f64 = 360.0;
    const PAD: f64 = 40.0;
    const COLORS: [&str; 6] = [
        "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#7f7f7f",
    ];
    let n = series.iter().map(|(_, v)| v.len()).max().unwrap_or(0);
    let sx = |i: usize| PAD + (W - 2.0 * PAD) * i as f64 / (n.max(2) - 1) as f64;
    let sy = |y: f64| H - PAD - (H - 2.0 * PAD) * (y / y_max).clamp(0.0, 1.0);

    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
         <text x=\"{PAD}\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\">{}</text>\n\
         <line x1=\"{PAD}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\" stroke=\"black\"/>\n\
         <line x1=\"{PAD}\" y1=\"{PAD}\" x2=\"{PAD}\" y2=\"{b}\" stroke=\"black\"/>\n",
        escape(title),
        b = H - PAD,
        r = W - PAD,
    );
    for (k, (name, ys)) in series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let points: Vec<String> = ys
            .iter()
            .enumerate()
            .map(|(i, y)| format!("{:.1},{:.1}", sx(i), sy(*y)))
            .collect();
        svg.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>\n\
             <text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" fill=\"{color}\">{}</text>\n",
            points.join(" "),
            W - PAD - 170.0,
            PAD + 14.0 * k as f64,
            escape(name),
        ));
    }
    svg.push_str("</svg>\n");
    svg
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::EngineConfig;
    use crate::engine::run_trace;
    use crate::types::InteractionEvent;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(fmt_num(0.0), "0");
        assert_eq!(fmt_num(-0.0), "0");
        assert_eq!(fmt_num(1.0), "1");
        assert_eq!(fmt_num(1693.147180559945), "1693.14718");
        assert_eq!(fmt_num(0.012741455098566), "0.0127414551");
        assert_eq!(fmt_num(-2.5), "-2.5");
        assert_eq!(fmt_num(123456789.4), "123456789");
        assert_eq!(fmt_num(999999999.7), "1e9");
        assert_eq!(fmt_num(5e7), "50000000");
        assert_eq!(fmt_num(0.00001234), "1.234e-5");
        assert_eq!(fmt_num(0.0001234), "0.0001234");
        assert_eq!(fmt_num(1.0 / 3.0), "0.333333333");
    }

    #[test]
    fn results_round_trip_at_written_precision() {
        let cfg = EngineConfig::default();
        let trace = [
            InteractionEvent::new("a", 0, "first task here", 1000).with_autonomy(2, 0.5),
            InteractionEvent::new("a", 3 * 86_400, "another task", 700).with_tier(3),
        ];
        let (_, results) = run_trace("a", 2, &trace, None, &cfg).unwrap();
        let mut buf = Vec::new();
        write_results(&mut buf, &results, cfg.period_seconds()).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("user_id,period_index,period_start_utc,T,F,R,V,C,A,G,D,U,"));
        assert!(!text.contains('\r'));
        assert_eq!(text.lines().count(), 1 + results.len());
        assert!(text
            .lines()
            .nth(1)
            .unwrap()
            .contains("1970-01-01T00:00:00Z"));

        let back = read_results(buf.as_slice()).unwrap();
        assert_eq!(back.len(), results.len());
        for (a, b) in back.iter().zip(&results) {
            assert_eq!(a.period_index, b.period_index);
            assert!((a.iai - b.iai).abs() <= 1e-8 * b.iai.abs().max(1.0));
            assert_eq!(a.delta_iiq.is_some(), b.delta_iiq.is_some());
        }
        let mut again = Vec::new();
        write_results(&mut again, &back, cfg.period_seconds()).unwrap();
        assert_eq!(again, buf);
    }

    #[test]
    fn results_reader_errors() {
        assert!(matches!(
            read_results("user_id,period_index\nu,1\n".as_bytes()),
            Err(ReportError::MissingColumn("T"))
        ));
        let header = RESULTS_HEADER.join(",");
        let row = "u,x,,1,1,1,1,1,1,0,0,0,0,0,,0,0";
        assert!(matches!(
            read_results(format!("{header}\n{row}\n").as_bytes()),
            Err(ReportError::BadValue {
                row: 2,
                column: "period_index",
                ..
            })
        ));
        let weighted = format!(
            "{header},{WORKFLOW_WEIGHT_COLUMN}\n{},0.5\n",
            row.replace(",x,", ",3,")
        );
        assert_eq!(read_results(weighted.as_bytes()).unwrap().len(), 1);
    }

    #[test]
    fn departments_round_trip() {
        let mut m = BTreeMap::new();
        m.insert("a".to_string(), "eng, platform".to_string());
        m.insert("b".to_string(), "sales".to_string());
        let mut buf = Vec::new();
        write_departments(&mut buf, &m).unwrap();
        assert_eq!(read_departments(buf.as_slice()).unwrap(), m);
    }

    #[test]
    fn svg_has_one_polyline_per_series() {
        let svg = svg_line_chart(
            "a < b",
            &[
                ("x".into(), vec![0.0, 500.0, 1000.0]),
                ("y".into(), vec![1.0]),
            ],
            1000.0,
        );
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("a &lt; b"));
    }
}
