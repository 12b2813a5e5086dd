use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::{ReachOutcome, ReachReport, ReportRow, StudyReport};
use crate::relay::NO_TRIP;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Csv,
    Json,
    Markdown,
}

impl std::str::FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            other => Err(format!("unknown report format `{other}`")),
        }
    }
}

/// `0.3` → `30%`, `0.005` → `0.5%`.
pub fn format_location(fraction: f64) -> String {
    let pct = format!("{:.3}", fraction * 100.0);
    let pct = pct.trim_end_matches('0').trim_end_matches('.');
    format!("{pct}%")
}

/// The no-trip sentinel prints as `9999`; other times keep at least one
/// decimal and two significant digits.
pub fn format_time(t: f64) -> String {
    if t == NO_TRIP {
        return "9999".into();
    }
    let decimals = if t > 0.0 {
        (1 - t.log10().floor() as i32).max(1) as usize
    } else {
        1
    };
    format!("{t:.decimals$}")
}

fn cell(t: Option<f64>) -> String {
    t.map_or_else(|| "error".into(), format_time)
}

fn header(r: &StudyReport) -> Vec<String> {
    let mut h = Vec::new();
    if r.has_sections() {
        h.push("Section".to_string());
    }
    h.push("Location".into());
    for g in &r.groups {
        h.push(format!("{g} Without MC Trip Time (s)"));
        h.push(format!("{g} With MC Trip Time (s)"));
    }
    h
}

fn cells(r: &StudyReport, row: &ReportRow) -> Vec<String> {
    let mut c = Vec::new();
    if r.has_sections() {
        c.push(row.section.clone().unwrap_or_default());
    }
    c.push(row.location.clone());
    c.extend(row.times().iter().map(|t| cell(*t)));
    c
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn table(head: &[String], body: &[Vec<String>], format: ReportFormat) -> String {
    let mut out = String::new();
    match format {
        ReportFormat::Csv => {
            for line in std::iter::once(head).chain(body.iter().map(Vec::as_slice)) {
                let fields: Vec<String> = line.iter().map(|s| csv_field(s)).collect();
                out.push_str(&fields.join(","));
                out.push('\n');
            }
        }
        ReportFormat::Markdown => {
            let _ = writeln!(out, "| {} |", head.join(" | "));
            let _ = writeln!(out, "|{}", "---|".repeat(head.len()));
            for line in body {
                let _ = writeln!(out, "| {} |", line.join(" | "));
            }
        }
        ReportFormat::Json => unreachable!("json handled by serde"),
    }
    out
}

/// Deterministic text rendering. CSV and markdown carry the same cells; a
/// failed row shows `error` in its time cells.
pub fn render_report(r: &StudyReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(r).expect("report serializes");
            s.push('\n');
            s
        }
        _ => {
            let body: Vec<Vec<String>> = r.rows.iter().map(|row| cells(r, row)).collect();
            table(&header(r), &body, format)
        }
    }
}

fn reach_cell(r: Option<ReachOutcome>) -> String {
    match r {
        Some(ReachOutcome::Fraction(f)) => format_location(f),
        Some(ReachOutcome::AtLeastFull) => ">=100%".into(),
        Some(ReachOutcome::AtMostZero) => "<=0%".into(),
        None => "error".into(),
    }
}

pub fn render_reach(r: &ReachReport, format: ReportFormat) -> String {
    if format == ReportFormat::Json {
        let mut s = serde_json::to_string_pretty(r).expect("report serializes");
        s.push('\n');
        return s;
    }
    let head: Vec<String> = ["Relay", "Coupled Line Status", "Mutual Coupling", "Zone 1 Reach"]
        .map(String::from)
        .to_vec();
    let body: Vec<Vec<String>> = r
        .rows
        .iter()
        .map(|row| {
            let status = serde_json::to_value(row.partner_status)
                .ok()
                .and_then(|v| v.as_str().map(String::from))
                .unwrap_or_default();
            vec![
                r.relay.clone(),
                status,
                if row.mutual_coupling { "with" } else { "without" }.into(),
                reach_cell(row.reach),
            ]
        })
        .collect();
    table(&head, &body, format)
}
