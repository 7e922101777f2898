//! CSV and JSON emitters. Numbers are written in shortest round-trip form so
//! that identical runs produce identical bytes.

use std::fmt::Write as _;

use serde::Serialize;

use crate::observables::OutcomeReport;
use crate::sweep::{ConvergenceStudy, SweepResult};

pub const SWEEP_HEADER: &str = "Lk0,n,p_plus,p_minus,p_total,defect,cond_estimate,status";
pub const SOLVE_HEADER: &str = "Lk0,n,k_n,E_n,p_plus,p_minus,p_total,defect,cond_estimate,status";
pub const CONVERGE_HEADER: &str = "T,diff";

pub fn num(v: f64) -> String {
    format!("{v:?}")
}

/// One emitted outcome, or a failed grid point with `n = None`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutcomeRow {
    #[serde(rename = "Lk0")]
    pub lk0: f64,
    pub n: Option<usize>,
    pub k_n: Option<f64>,
    #[serde(rename = "E_n")]
    pub e_n: Option<f64>,
    #[serde(rename = "E_0")]
    pub e_0: Option<f64>,
    pub p_plus: Option<f64>,
    pub p_minus: Option<f64>,
    pub p_total: Option<f64>,
    pub defect: Option<f64>,
    pub cond_estimate: Option<f64>,
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

pub fn report_rows(lk0: f64, report: &OutcomeReport, cond: f64, status: &str) -> Vec<OutcomeRow> {
    report
        .outcomes
        .iter()
        .map(|o| OutcomeRow {
            lk0,
            n: Some(o.n),
            k_n: Some(o.k),
            e_n: Some(o.energy),
            e_0: Some(report.incident_energy),
            p_plus: Some(o.p_plus),
            p_minus: Some(o.p_minus),
            p_total: Some(o.p_total),
            defect: Some(report.unitarity_defect),
            cond_estimate: Some(cond),
            status: status.to_string(),
            error: None,
        })
        .collect()
}

pub fn sweep_rows(result: &SweepResult) -> Vec<OutcomeRow> {
    result
        .points
        .iter()
        .flat_map(|p| match &p.outcome {
            Ok(sol) => report_rows(p.lk0, &sol.report, sol.diagnostics.condition_estimate, p.status.as_str()),
            Err(message) => vec![OutcomeRow {
                lk0: p.lk0,
                n: None,
                k_n: None,
                e_n: None,
                e_0: None,
                p_plus: None,
                p_minus: None,
                p_total: None,
                defect: None,
                cond_estimate: None,
                status: p.status.as_str().to_string(),
                error: Some(message.clone()),
            }],
        })
        .collect()
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

pub fn sweep_csv(rows: &[OutcomeRow]) -> String {
    let mut out = format!("{SWEEP_HEADER}\n");
    for r in rows {
        let n = r.n.map(|n| n.to_string()).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{n},{},{},{},{},{},{}",
            num(r.lk0),
            opt(r.p_plus),
            opt(r.p_minus),
            opt(r.p_total),
            opt(r.defect),
            opt(r.cond_estimate),
            r.status
        );
    }
    out
}

pub fn solve_csv(rows: &[OutcomeRow]) -> String {
    let mut out = format!("{SOLVE_HEADER}\n");
    for r in rows {
        let n = r.n.map(|n| n.to_string()).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{n},{},{},{},{},{},{},{},{}",
            num(r.lk0),
            opt(r.k_n),
            opt(r.e_n),
            opt(r.p_plus),
            opt(r.p_minus),
            opt(r.p_total),
            opt(r.defect),
            opt(r.cond_estimate),
            r.status
        );
    }
    out
}

pub fn converge_csv(study: &ConvergenceStudy) -> String {
    let mut out = format!("{CONVERGE_HEADER}\n");
    for &(t, d) in &study.pairs {
        let _ = writeln!(out, "{t},{}", num(d));
    }
    out
}

#[derive(Serialize)]
pub struct Provenance<'a, C: Serialize> {
    pub artifact: &'static str,
    pub version: &'static str,
    pub command: &'a str,
    pub config: &'a C,
}

#[derive(Serialize)]
pub struct Document<'a, C: Serialize, R: Serialize> {
    pub provenance: Provenance<'a, C>,
    #[serde(flatten)]
    pub body: R,
}

pub fn json_document<C: Serialize, R: Serialize>(command: &str, config: &C, body: R) -> String {
    let doc = Document {
        provenance: Provenance {
            artifact: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command,
            config,
        },
        body,
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("serializable document");
    text.push('\n');
    text
}
