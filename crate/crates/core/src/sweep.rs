//! Accuracy sweeps of the fixed-point sigmoid against the double-precision
//! reference.

use std::io::{self, Write};

use serde::Serialize;
use thiserror::Error;

use crate::fixedpoint::Fx;
use crate::oracle::sigmoid_ref;
use crate::pipeline::{sigmoid_eval, PipelineConfig, PipelineError};

/// MAE reported for the 16-bit hardware design.
pub const TARGET_MAE: f64 = 4.23e-4;
/// Acceptance band for the MAE over `[-1, 1]`.
pub const MAE_BOUND: f64 = 8e-4;

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("sweep range must satisfy -1 <= start < end <= 1, got [{start}, {end}]")]
    BadRange { start: f64, end: f64 },
    #[error("sweep needs at least 2 samples, got {0}")]
    TooFewSamples(usize),
    #[error(transparent)]
    Eval(#[from] PipelineError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SampleRow {
    pub x: f64,
    pub fx_out: f64,
    pub ref_out: f64,
    pub abs_err: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub n_samples: usize,
    pub mae: f64,
    pub max_abs_err: f64,
    pub argmax_input: f64,
    pub format: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_sample: Option<Vec<SampleRow>>,
}

/// Neumaier-compensated running sum.
#[derive(Debug, Default, Clone, Copy)]
struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.carry += (self.sum - t) + v;
        } else {
            self.carry += (v - t) + self.sum;
        }
        self.sum = t;
    }

    fn total(&self) -> f64 {
        self.sum + self.carry
    }
}

/// `count` points from `start` to `end` inclusive.
pub fn uniform_grid(start: f64, end: f64, count: usize) -> Result<Vec<f64>, SweepError> {
    if !(start >= -1.0 && end <= 1.0 && start < end) {
        return Err(SweepError::BadRange { start, end });
    }
    if count < 2 {
        return Err(SweepError::TooFewSamples(count));
    }
    let step = (end - start) / (count - 1) as f64;
    Ok((0..count)
        .map(|i| if i == count - 1 { end } else { start + step * i as f64 })
        .collect())
}

pub fn run_sweep(
    start: f64,
    end: f64,
    count: usize,
    cfg: &PipelineConfig,
    keep_rows: bool,
) -> Result<SweepReport, SweepError> {
    let grid = uniform_grid(start, end, count)?;
    let mut rows = Vec::with_capacity(grid.len());
    for &x in &grid {
        let out = sigmoid_eval(Fx::from_real(x, cfg.format()), cfg)?.to_real();
        let reference = sigmoid_ref(x);
        rows.push(SampleRow { x, fx_out: out, ref_out: reference, abs_err: (out - reference).abs() });
    }
    Ok(summarize(rows, cfg, keep_rows))
}

fn summarize(rows: Vec<SampleRow>, cfg: &PipelineConfig, keep_rows: bool) -> SweepReport {
    let mut sum = CompensatedSum::default();
    let (mut max_abs_err, mut argmax_input) = (0.0f64, rows[0].x);
    for r in &rows {
        sum.add(r.abs_err);
        if r.abs_err > max_abs_err {
            (max_abs_err, argmax_input) = (r.abs_err, r.x);
        }
    }
    SweepReport {
        n_samples: rows.len(),
        mae: sum.total() / rows.len() as f64,
        max_abs_err,
        argmax_input,
        format: cfg.format().to_string(),
        per_sample: keep_rows.then_some(rows),
    }
}

/// Ten significant digits.
fn sig10(v: f64) -> String {
    format!("{v:.9e}")
}

impl SweepReport {
    /// `x,fx_out,ref_out,abs_err` with a header row. Requires per-sample rows.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "x,fx_out,ref_out,abs_err")?;
        for r in self.per_sample.as_deref().unwrap_or_default() {
            writeln!(
                out,
                "{},{},{},{}",
                sig10(r.x),
                sig10(r.fx_out),
                sig10(r.ref_out),
                sig10(r.abs_err)
            )?;
        }
        Ok(())
    }

    /// JSON summary without the per-sample rows.
    pub fn summary_json(&self) -> String {
        let summary = SweepReport { per_sample: None, ..self.clone() };
        serde_json::to_string_pretty(&summary).expect("report serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_endpoints() {
        assert_eq!(uniform_grid(-1.0, 1.0, 2).unwrap(), vec![-1.0, 1.0]);
        let g = uniform_grid(-1.0, 1.0, 4001).unwrap();
        assert_eq!(g.len(), 4001);
        assert_eq!(g[2000], 0.0);
        assert_eq!(*g.last().unwrap(), 1.0);
    }

    #[test]
    fn grid_rejects_bad_ranges() {
        assert!(matches!(uniform_grid(0.0, 0.0, 10), Err(SweepError::BadRange { .. })));
        assert!(matches!(uniform_grid(0.5, -0.5, 10), Err(SweepError::BadRange { .. })));
        assert!(matches!(uniform_grid(-2.0, 1.0, 10), Err(SweepError::BadRange { .. })));
        assert!(matches!(uniform_grid(-1.0, 1.0, 1), Err(SweepError::TooFewSamples(1))));
        assert!(uniform_grid(f64::NAN, 1.0, 10).is_err());
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut s = CompensatedSum::default();
        s.add(1.0);
        for _ in 0..1000 {
            s.add(1e-17);
        }
        s.add(-1.0);
        assert!((s.total() - 1e-14).abs() < 1e-20);
    }

    #[test]
    fn report_invariants() {
        let cfg = PipelineConfig::default();
        let r = run_sweep(-1.0, 1.0, 4001, &cfg, true).unwrap();
        assert_eq!(r.n_samples, 4001);
        assert!(r.mae <= r.max_abs_err);
        assert!(r.mae <= MAE_BOUND);
        assert_eq!(r.format, "Q2.14");
        let rows = r.per_sample.as_ref().unwrap();
        let worst = rows.iter().find(|row| row.x == r.argmax_input).unwrap();
        assert_eq!(worst.abs_err, r.max_abs_err);
    }

    #[test]
    fn csv_and_json_shapes() {
        let cfg = PipelineConfig::default();
        let r = run_sweep(-1.0, 1.0, 5, &cfg, true).unwrap();
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "x,fx_out,ref_out,abs_err");
        assert_eq!(lines.len(), 6);
        assert!(lines[1].starts_with("-1.000000000e0,"));
        let json: serde_json::Value = serde_json::from_str(&r.summary_json()).unwrap();
        assert_eq!(json["n_samples"], 5);
        assert!(json.get("per_sample").is_none());
    }
}
