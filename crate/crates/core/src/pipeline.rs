//! End-to-end sigmoid datapath: halve the input, rotate to `(cosh, sinh)`,
//! divide to `tanh`, then `tanh / 2 + 1/2`.

use serde::Serialize;
use thiserror::Error;

use crate::fixedpoint::{Fx, FxError, QFormat, MAX_TOTAL_BITS};
use crate::lvc::{default_stages, LvcDivider, LvcError};
use crate::mrhrc::{
    mrhrc_run, AngleTables, HrcError, DEFAULT_GUARD_BITS, R2_STAGES, R4_STAGES,
    SCALED_RESIDUAL_EXTRA_BITS,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PipelineError {
    #[error("input {0} outside the normalized range [-1, 1]")]
    OutOfRange(f64),
    #[error("input {value} at index {index} outside the normalized range [-1, 1]")]
    BatchOutOfRange { index: usize, value: f64 },
    #[error("input is in {got}, pipeline configured for {expected}")]
    FormatMismatch { expected: QFormat, got: QFormat },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Format(#[from] FxError),
    #[error(transparent)]
    Hrc(#[from] HrcError),
    #[error(transparent)]
    Lvc(#[from] LvcError),
}

/// Immutable once built; share it freely between evaluators.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    format: QFormat,
    guard_bits: u32,
    clamp: bool,
    tables: AngleTables,
    divider: LvcDivider,
}

impl PipelineConfig {
    pub fn new(format: QFormat, guard_bits: u32, lvc_stages: u32) -> Result<Self, PipelineError> {
        if format.int_bits() < 2 {
            return Err(PipelineError::Config(format!(
                "{format} cannot hold +/-1 and 1/K_h; need at least 2 integer bits"
            )));
        }
        let widest = format.total_bits() + guard_bits + SCALED_RESIDUAL_EXTRA_BITS;
        if widest > MAX_TOTAL_BITS {
            return Err(PipelineError::Config(format!(
                "scaled residual register would need {widest} bits (limit {MAX_TOTAL_BITS})"
            )));
        }
        Ok(PipelineConfig {
            format,
            guard_bits,
            clamp: false,
            tables: AngleTables::new(format, guard_bits)?,
            divider: LvcDivider::new(format, guard_bits, lvc_stages)?,
        })
    }

    /// Clamp out-of-range inputs to +/-1 instead of rejecting them.
    pub fn with_clamp(mut self, clamp: bool) -> Self {
        self.clamp = clamp;
        self
    }

    pub fn format(&self) -> QFormat {
        self.format
    }

    pub fn guard_bits(&self) -> u32 {
        self.guard_bits
    }

    pub fn lvc_stages(&self) -> u32 {
        self.divider.stages()
    }

    pub fn clamp(&self) -> bool {
        self.clamp
    }

    pub fn tables(&self) -> &AngleTables {
        &self.tables
    }

    pub fn divider(&self) -> &LvcDivider {
        &self.divider
    }
}

impl Default for PipelineConfig {
    fn default() -> Self {
        let fmt = QFormat::Q2_14;
        PipelineConfig::new(fmt, DEFAULT_GUARD_BITS, default_stages(fmt))
            .expect("default configuration is valid")
    }
}

pub fn sigmoid_eval(x: Fx, cfg: &PipelineConfig) -> Result<Fx, PipelineError> {
    if x.format() != cfg.format {
        return Err(PipelineError::FormatMismatch { expected: cfg.format, got: x.format() });
    }
    let one = Fx::from_real(1.0, cfg.format);
    let x = if cfg.clamp {
        x.clamp(-one, one)
    } else if x.mantissa().abs() > one.mantissa() {
        return Err(PipelineError::OutOfRange(x.to_real()));
    } else {
        x
    };
    let (cosh, sinh) = mrhrc_run(x >> 1, &cfg.tables)?;
    let tanh = cfg.divider.divide(cosh, sinh)?;
    Ok((tanh >> 1) + cfg.tables.half())
}

/// Element-wise [`sigmoid_eval`], order preserved. The first out-of-range
/// element is reported with its index.
pub fn sigmoid_eval_batch(xs: &[Fx], cfg: &PipelineConfig) -> Result<Vec<Fx>, PipelineError> {
    xs.iter()
        .enumerate()
        .map(|(index, &x)| {
            sigmoid_eval(x, cfg).map_err(|e| match e {
                PipelineError::OutOfRange(value) => PipelineError::BatchOutOfRange { index, value },
                other => other,
            })
        })
        .collect()
}

/// Register-stage counts of the fully pipelined datapath.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LatencyReport {
    pub normalization_stages: u32,
    pub r2_stages: u32,
    pub r4_stages: u32,
    pub lvc_stages: u32,
    pub scale_offset_stages: u32,
    pub total_cycles: u32,
}

pub fn latency_report(cfg: &PipelineConfig) -> LatencyReport {
    latency_for_stages(cfg.lvc_stages())
}

fn latency_for_stages(lvc_stages: u32) -> LatencyReport {
    let r2 = R2_STAGES.count() as u32;
    let r4 = R4_STAGES.count() as u32;
    LatencyReport {
        normalization_stages: 1,
        r2_stages: r2,
        r4_stages: r4,
        lvc_stages,
        scale_offset_stages: 1,
        total_cycles: 1 + r2 + r4 + lvc_stages + 1,
    }
}
