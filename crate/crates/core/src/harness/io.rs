//! On-disk layout of one run:
//!
//! ```text
//! <dir>/trace.csv         t,x_x,x_y,p_norm,w,w_a,w_b,delta_perim,delta_area,violation,loss,active
//! <dir>/certificate.json  CertificateReport
//! <dir>/regret.json       RegretReport
//! <dir>/summary.json      RunSummary
//! ```

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{ExperimentConfig, HarnessError};
use crate::algorithms::{SetMeasures, Trace, TraceHeader};
use crate::constraint::StepDiagnostics;
use crate::geometry::{ConvexPolygon, Point2};
use crate::tolerance::Tolerances;

pub const TRACE_FILE: &str = "trace.csv";
pub const CERTIFICATE_FILE: &str = "certificate.json";
pub const REGRET_FILE: &str = "regret.json";
pub const SUMMARY_FILE: &str = "summary.json";
pub const FAILURES_FILE: &str = "failures.json";

pub const TRACE_COLUMNS: [&str; 12] = [
    "t",
    "x_x",
    "x_y",
    "p_norm",
    "w",
    "w_a",
    "w_b",
    "delta_perim",
    "delta_area",
    "violation",
    "loss",
    "active",
];

#[derive(Serialize, Deserialize)]
struct TraceRow {
    t: usize,
    x_x: f64,
    x_y: f64,
    p_norm: f64,
    w: f64,
    w_a: f64,
    w_b: f64,
    delta_perim: f64,
    delta_area: f64,
    violation: f64,
    loss: f64,
    active: bool,
}

/// Everything needed to re-check a run without re-simulating it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub header: TraceHeader,
    pub measures: SetMeasures,
    pub final_set: ConvexPolygon,
    pub tolerances: Tolerances,
    /// `Instance::to_json(false)`.
    pub instance: Value,
    pub config: ExperimentConfig,
}

pub fn write_trace_csv(path: &Path, steps: &[StepDiagnostics]) -> Result<(), HarnessError> {
    let file = File::create(path).map_err(|e| HarnessError::io(path, e))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    for s in steps {
        w.serialize(TraceRow {
            t: s.t,
            x_x: s.x.x,
            x_y: s.x.y,
            p_norm: s.p_norm,
            w: s.w,
            w_a: s.w_a,
            w_b: s.w_b,
            delta_perim: s.delta_perim,
            delta_area: s.delta_area,
            violation: s.violation,
            loss: s.loss,
            active: s.active,
        })
        .map_err(|e| HarnessError::csv(path, e))?;
    }
    if steps.is_empty() {
        w.write_record(TRACE_COLUMNS).map_err(|e| HarnessError::csv(path, e))?;
    }
    w.flush().map_err(|e| HarnessError::io(path, e))
}

/// Reads a trace back. Rounds carry no geometry.
pub fn read_trace_csv(path: &Path) -> Result<Vec<StepDiagnostics>, HarnessError> {
    let file = File::open(path).map_err(|e| HarnessError::io(path, e))?;
    let mut r = csv::Reader::from_reader(std::io::BufReader::new(file));
    let headers = r.headers().map_err(|e| HarnessError::csv(path, e))?;
    if headers.iter().ne(TRACE_COLUMNS) {
        return Err(HarnessError::Format(format!(
            "{}: unexpected columns {:?}",
            path.display(),
            headers.iter().collect::<Vec<_>>()
        )));
    }
    let mut steps = Vec::new();
    for row in r.deserialize::<TraceRow>() {
        let row = row.map_err(|e| HarnessError::csv(path, e))?;
        if row.t != steps.len() + 1 {
            return Err(HarnessError::Format(format!(
                "{}: expected round {}, found {}",
                path.display(),
                steps.len() + 1,
                row.t
            )));
        }
        steps.push(StepDiagnostics {
            t: row.t,
            x: Point2::new(row.x_x, row.x_y),
            p_norm: row.p_norm,
            w: row.w,
            w_a: row.w_a,
            w_b: row.w_b,
            delta_perim: row.delta_perim,
            delta_area: row.delta_area,
            violation: row.violation,
            loss: row.loss,
            active: row.active,
            geometry: None,
        });
    }
    Ok(steps)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), HarnessError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| HarnessError::Format(e.to_string()))?;
    text.push('\n');
    let mut file = File::create(path).map_err(|e| HarnessError::io(path, e))?;
    file.write_all(text.as_bytes()).map_err(|e| HarnessError::io(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, HarnessError> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| HarnessError::Format(format!("{}: {e}", path.display())))
}

/// Rebuilds a trace from `trace.csv` and `summary.json`.
pub fn load_trace(dir: &Path) -> Result<(Trace, RunSummary), HarnessError> {
    let summary: RunSummary = read_json(&dir.join(SUMMARY_FILE))?;
    let steps = read_trace_csv(&dir.join(TRACE_FILE))?;
    if steps.len() != summary.header.horizon {
        return Err(HarnessError::Format(format!(
            "{}: {} rounds recorded, header says {}",
            dir.display(),
            steps.len(),
            summary.header.horizon
        )));
    }
    let trace = Trace {
        header: summary.header.clone(),
        steps,
        measures: summary.measures,
        final_set: summary.final_set.clone(),
    };
    Ok((trace, summary))
}
