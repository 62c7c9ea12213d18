use std::fmt::Write as _;

use anyhow::Result;
use dp2s::bench::{PowerResult, TableRow};
use dp2s::two_sample::{TestReport, ThresholdSource};
use serde::Serialize;

use crate::SCHEMA_VERSION;

/// Four decimals with trailing zeros removed: `0.69`, `0.1994`.
pub fn format_value(v: f64) -> String {
    let s = format!("{v:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s.is_empty() || s == "-" {
        "0".into()
    } else {
        s.into()
    }
}

/// A JSON document: the schema version, the command name, then `body`.
#[derive(Serialize)]
pub struct Envelope<'a, T: Serialize> {
    pub schema_version: u32,
    pub command: &'a str,
    #[serde(flatten)]
    pub body: T,
}

pub fn json<T: Serialize>(command: &str, body: T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(&Envelope { schema_version: SCHEMA_VERSION, command, body })?;
    s.push('\n');
    Ok(s)
}

pub fn csv_rows<T: Serialize>(rows: impl IntoIterator<Item = T>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

pub fn threshold_line(u: f64, source: ThresholdSource) -> String {
    format!("U = {} (source: {source})", format_value(u))
}

pub fn report_text(r: &TestReport) -> String {
    let q = &r.d_quantiles;
    let mut s = String::new();
    writeln!(s, "m1 = {}, m2 = {}", r.m1, r.m2).unwrap();
    writeln!(
        s,
        "mean d = {} (sd {}; 2.5% {}, 50% {}, 97.5% {})",
        format_value(r.mean_d),
        format_value(r.sd_d),
        format_value(q.q025),
        format_value(q.q50),
        format_value(q.q975)
    )
    .unwrap();
    writeln!(s, "{}", threshold_line(r.threshold, r.threshold_source)).unwrap();
    writeln!(s, "{}", r.decision()).unwrap();
    s
}

#[derive(Serialize)]
pub struct ReportCsvRow {
    pub m1: usize,
    pub m2: usize,
    pub mean_d: f64,
    pub sd_d: f64,
    pub q025: f64,
    pub q50: f64,
    pub q975: f64,
    #[serde(rename = "U")]
    pub threshold: f64,
    pub threshold_source: ThresholdSource,
    pub reject: bool,
}

impl From<&TestReport> for ReportCsvRow {
    fn from(r: &TestReport) -> Self {
        Self {
            m1: r.m1,
            m2: r.m2,
            mean_d: r.mean_d,
            sd_d: r.sd_d,
            q025: r.d_quantiles.q025,
            q50: r.d_quantiles.q50,
            q975: r.d_quantiles.q975,
            threshold: r.threshold,
            threshold_source: r.threshold_source,
            reject: r.reject,
        }
    }
}

pub fn power_text(p: &PowerResult) -> String {
    let se = &p.standard_error;
    let mut s = String::new();
    writeln!(s, "scenario: {} (m1 = {}, m2 = {})", p.scenario.name, p.scenario.m1, p.scenario.m2).unwrap();
    writeln!(s, "replications: {}", p.replications).unwrap();
    writeln!(s, "{}", threshold_line(p.threshold, p.threshold_source)).unwrap();
    writeln!(s, "power bayes    = {:.3} (se {:.3})", p.power_bayes, se.bayes).unwrap();
    writeln!(s, "power ks       = {:.3} (se {:.3})", p.power_ks, se.ks).unwrap();
    writeln!(s, "power wilcoxon = {:.3} (se {:.3})", p.power_wilcoxon, se.wilcoxon).unwrap();
    s
}

#[derive(Serialize)]
pub struct PowerCsvRow<'a> {
    pub scenario: &'a str,
    pub m1: usize,
    pub m2: usize,
    pub replications: usize,
    pub power_bayes: f64,
    pub se_bayes: f64,
    pub power_ks: f64,
    pub se_ks: f64,
    pub power_wilcoxon: f64,
    pub se_wilcoxon: f64,
}

impl<'a> From<&'a PowerResult> for PowerCsvRow<'a> {
    fn from(p: &'a PowerResult) -> Self {
        Self {
            scenario: &p.scenario.name,
            m1: p.scenario.m1,
            m2: p.scenario.m2,
            replications: p.replications,
            power_bayes: p.power_bayes,
            se_bayes: p.standard_error.bayes,
            power_ks: p.power_ks,
            se_ks: p.standard_error.ks,
            power_wilcoxon: p.power_wilcoxon,
            se_wilcoxon: p.standard_error.wilcoxon,
        }
    }
}

pub fn table_csv(rows: &[TableRow]) -> Result<String> {
    csv_rows(rows)
}
