//! Radix-2 linear vectoring CORDIC: drives `y` to zero against a fixed `x`
//! and accumulates `y0 / x0` in `z`. Used as the shift-add divider that
//! turns `(cosh, sinh)` into `tanh`.

use thiserror::Error;

use crate::fixedpoint::{Fx, FxError, QFormat};
use crate::mrhrc::DEFAULT_GUARD_BITS;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LvcError {
    #[error("divisor {0} is not positive")]
    NonPositiveDivisor(f64),
    #[error("operands in {got}, divider configured for {expected}")]
    FormatMismatch { expected: QFormat, got: QFormat },
    #[error("{stages} stages exceed the {frac_bits} fraction bits of the working format")]
    TooManyStages { stages: u32, frac_bits: u32 },
    #[error(transparent)]
    Format(#[from] FxError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LvcState {
    pub x: Fx,
    pub y: Fx,
    pub z: Fx,
    pub stage: u32,
}

/// `x' = x`, `y' = y - d x 2^-j`, `z' = z + d 2^-j` with `d = +1` when
/// `y >= 0`.
pub fn r2_lvc_step(s: LvcState, j: u32) -> LvcState {
    assert!(j >= 1, "linear vectoring stages start at j = 1");
    let fmt = s.z.format();
    let step = Fx::from_real(1.0, fmt) >> j;
    let dy = s.x >> j;
    let (y, z) = if s.y.is_negative() { (s.y + dy, s.z - step) } else { (s.y - dy, s.z + step) };
    LvcState { x: s.x, y, z, stage: s.stage + 1 }
}

/// Divider running stages `j = 1..=stages` in a guard-bit working format.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LvcDivider {
    io: QFormat,
    working: QFormat,
    stages: u32,
}

impl LvcDivider {
    pub fn new(io: QFormat, guard_bits: u32, stages: u32) -> Result<Self, LvcError> {
        let working = io.widened(0, guard_bits)?;
        if stages > working.frac_bits() {
            return Err(LvcError::TooManyStages { stages, frac_bits: working.frac_bits() });
        }
        Ok(LvcDivider { io, working, stages })
    }

    /// Default guard bits and `frac_bits + 1` stages.
    pub fn for_format(io: QFormat) -> Result<Self, LvcError> {
        LvcDivider::new(io, DEFAULT_GUARD_BITS, default_stages(io))
    }

    pub fn stages(&self) -> u32 {
        self.stages
    }

    pub fn working_format(&self) -> QFormat {
        self.working
    }

    /// Final state in the working format.
    pub fn run(&self, divisor: Fx, dividend: Fx) -> Result<LvcState, LvcError> {
        for op in [divisor, dividend] {
            if op.format() != self.io {
                return Err(LvcError::FormatMismatch { expected: self.io, got: op.format() });
            }
        }
        if divisor.mantissa() <= 0 {
            return Err(LvcError::NonPositiveDivisor(divisor.to_real()));
        }
        let mut s = LvcState {
            x: divisor.rescale(self.working),
            y: dividend.rescale(self.working),
            z: Fx::zero(self.working),
            stage: 0,
        };
        for j in 1..=self.stages {
            s = r2_lvc_step(s, j);
        }
        Ok(s)
    }

    /// `dividend / divisor` rounded into the I/O format. Converges for
    /// `|dividend / divisor| < 1`.
    pub fn divide(&self, divisor: Fx, dividend: Fx) -> Result<Fx, LvcError> {
        Ok(self.run(divisor, dividend)?.z.rescale(self.io))
    }
}

pub fn default_stages(io: QFormat) -> u32 {
    io.frac_bits() + 1
}

/// `sinh_in / cosh_in` with the default divider for their format.
pub fn lvc_divide(cosh_in: Fx, sinh_in: Fx) -> Result<Fx, LvcError> {
    LvcDivider::for_format(cosh_in.format())?.divide(cosh_in, sinh_in)
}
