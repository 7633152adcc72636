//! Trace CSV and run summary.
//!
//! The CSV starts with a `# schema_version=1` comment line followed by the
//! header in [`COLUMNS`]; one row per tick.

use std::io::Write;

use comsupport_core::controller::TraceRecord;
use comsupport_core::qp::QpStatus;
use serde::Serialize;

use crate::config::SCHEMA_VERSION;
use crate::Failure;

pub const COLUMNS: [&str; 12] = [
    "t",
    "com_x",
    "com_y",
    "com_des_x",
    "com_des_y",
    "f_hand_meas",
    "f_hand_des",
    "fz_lf",
    "fz_rf",
    "status",
    "ne_residual",
    "slide_residual",
];

pub fn status_name(s: QpStatus) -> &'static str {
    match s {
        QpStatus::Optimal => "optimal",
        QpStatus::Infeasible => "infeasible",
        QpStatus::MaxIter => "max_iter",
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRow {
    pub t: f64,
    pub com_x: f64,
    pub com_y: f64,
    pub com_des_x: f64,
    pub com_des_y: f64,
    pub f_hand_meas: f64,
    pub f_hand_des: f64,
    pub fz_lf: f64,
    pub fz_rf: f64,
    pub status: &'static str,
    pub ne_residual: f64,
    pub slide_residual: f64,
}

impl From<&TraceRecord> for TraceRow {
    fn from(r: &TraceRecord) -> Self {
        Self {
            t: r.t,
            com_x: r.com.x,
            com_y: r.com.y,
            com_des_x: r.com_des.x,
            com_des_y: r.com_des.y,
            f_hand_meas: r.f_hand_meas,
            f_hand_des: r.f_hand_des,
            fz_lf: r.fz_lf,
            fz_rf: r.fz_rf,
            status: status_name(r.status),
            ne_residual: r.ne_residual,
            slide_residual: r.slide_residual,
        }
    }
}

pub fn write_csv<W: Write>(mut out: W, records: &[TraceRecord]) -> Result<(), Failure> {
    writeln!(out, "# schema_version={SCHEMA_VERSION}")?;
    let mut w = csv::Writer::from_writer(out);
    // header comes from the serde field names, which mirror COLUMNS
    for r in records {
        w.serialize(TraceRow::from(r)).map_err(|e| Failure::Io(e.to_string()))?;
    }
    if records.is_empty() {
        w.write_record(COLUMNS).map_err(|e| Failure::Io(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub schema_version: u32,
    pub description: String,
    pub ticks: usize,
    pub t_final: f64,
    /// `completed` or `balance_infeasible`.
    pub run_status: &'static str,
    pub infeasible_at: Option<f64>,
    /// Pressing-force target at the infeasible tick.
    pub infeasible_force: Option<f64>,
    pub max_ne_residual: f64,
    pub max_slide_residual: f64,
    pub com_always_in_csa: bool,
    pub final_force_error: f64,
    pub final_com_error: f64,
}

impl Summary {
    pub fn from_records(description: &str, records: &[TraceRecord]) -> Self {
        let solved = || records.iter().filter(|r| r.status == QpStatus::Optimal);
        let failed = records.iter().find(|r| r.status != QpStatus::Optimal);
        let last = records.iter().rev().find(|r| r.status == QpStatus::Optimal);
        Self {
            schema_version: SCHEMA_VERSION,
            description: description.to_string(),
            ticks: records.len(),
            t_final: records.last().map_or(0.0, |r| r.t),
            run_status: if failed.is_some() { "balance_infeasible" } else { "completed" },
            infeasible_at: failed.map(|r| r.t),
            infeasible_force: failed.map(|r| r.f_hand_des),
            max_ne_residual: solved().map(|r| r.ne_residual).fold(0.0, f64::max),
            max_slide_residual: solved().map(|r| r.slide_residual).fold(0.0, f64::max),
            com_always_in_csa: solved().all(|r| r.com_in_csa),
            final_force_error: last.map_or(0.0, |r| (r.f_hand_meas - r.f_hand_des).abs()),
            final_com_error: last.map_or(0.0, |r| (r.com.xy() - r.com_des).norm()),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StructuredTrace<'a> {
    pub summary: &'a Summary,
    pub records: Vec<TraceRow>,
}

pub fn write_structured<W: Write>(out: W, summary: &Summary, records: &[TraceRecord]) -> Result<(), Failure> {
    let doc = StructuredTrace { summary, records: records.iter().map(TraceRow::from).collect() };
    serde_json::to_writer_pretty(out, &doc).map_err(|e| Failure::Io(e.to_string()))
}

pub fn write_summary<W: Write>(mut out: W, summary: &Summary) -> Result<(), Failure> {
    serde_json::to_writer_pretty(&mut out, summary).map_err(|e| Failure::Io(e.to_string()))?;
    writeln!(out)?;
    Ok(())
}
