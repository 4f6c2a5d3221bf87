//! Double-precision reference functions and the convergence bookkeeping the
//! fixed-point datapath relies on: radix-R convergence ranges, the radix-2
//! scale factor, and the SRT selection intervals behind the radix-4 digit
//! comparator.

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("atanh argument {0} outside (-1, 1)")]
    Domain(f64),
    #[error("invalid convergence spec: {0}")]
    InvalidSpec(String),
    #[error("invalid SRT query: {0}")]
    InvalidDigit(String),
}

pub fn sigmoid_ref(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Sigmoid through its tanh form, `(1 + tanh(x/2)) / 2`.
pub fn tanh_identity_check(x: f64) -> f64 {
    0.5 * (1.0 + (0.5 * x).tanh())
}

/// `atanh(d * radix^-j)`, the micro-rotation angle of stage `j`.
pub fn elementary_angle(radix: u32, j: u32, d: i32) -> Result<f64, OracleError> {
    let t = d as f64 * (radix as f64).powi(-(j as i32));
    if t.abs() >= 1.0 {
        return Err(OracleError::Domain(t));
    }
    Ok(t.atanh())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConvergenceSpec {
    pub radix: u32,
    pub j_start: u32,
    pub j_end: u32,
    pub d_max: i32,
}

impl ConvergenceSpec {
    pub fn new(radix: u32, j_start: u32, j_end: u32, d_max: i32) -> Result<Self, OracleError> {
        if radix != 2 && radix != 4 {
            return Err(OracleError::InvalidSpec(format!("radix {radix} not in {{2, 4}}")));
        }
        if !(1..=2).contains(&d_max) {
            return Err(OracleError::InvalidSpec(format!("d_max {d_max} not in {{1, 2}}")));
        }
        if j_start > j_end {
            return Err(OracleError::InvalidSpec(format!("j_start {j_start} > j_end {j_end}")));
        }
        Ok(ConvergenceSpec { radix, j_start, j_end, d_max })
    }

    /// The radix-2 stages of the MR-HRC core (j = 2..9, |d| = 1).
    pub fn radix2_schedule() -> Self {
        ConvergenceSpec { radix: 2, j_start: 2, j_end: 9, d_max: 1 }
    }

    /// The radix-4 stages of the MR-HRC core (j = 4..7, |d| <= 2).
    pub fn radix4_schedule() -> Self {
        ConvergenceSpec { radix: 4, j_start: 4, j_end: 7, d_max: 2 }
    }
}

/// Largest `|z0|` the schedule can rotate to zero: the sum of its largest
/// elementary angles.
pub fn convergence_range(spec: &ConvergenceSpec) -> f64 {
    (spec.j_start..=spec.j_end)
        .map(|j| {
            elementary_angle(spec.radix, j, spec.d_max)
                .expect("validated spec has |d * R^-j| < 1")
        })
        .sum()
}

/// `K_h = prod cosh(atanh(2^-j)) = prod 1 / sqrt(1 - 2^-2j)` over
/// `j_start..=j_end`. Each radix-2 shift-add rotation scales the vector by
/// `sqrt(1 - 2^-2j)`, so seeding `x0` with this product cancels the
/// accumulated shrink. An empty range gives 1.
pub fn scale_factor_kh(j_start: u32, j_end: u32) -> f64 {
    assert!(j_start >= 1, "radix-2 hyperbolic stages start at j = 1");
    (j_start..=j_end)
        .map(|j| 1.0 / (1.0 - (-2.0 * j as f64).exp2()).sqrt())
        .product()
}

/// Upper bound on the uncompensated radix-4 gain over `j_start..=j_end`
/// when every stage takes digit `sigma`: `prod 1 / sqrt(1 - sigma^2 4^-2j)`.
pub fn radix4_gain_bound(j_start: u32, j_end: u32, sigma: i32) -> f64 {
    (j_start..=j_end)
        .map(|j| {
            let t = sigma as f64 * 4f64.powi(-(j as i32));
            1.0 / (1.0 - t * t).sqrt()
        })
        .product()
}

/// Selection interval for digit `sigma` at radix-4 stage `j`, on the scaled
/// residual `4^j z`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SrtBounds {
    pub j: u32,
    pub sigma: i32,
    pub lower: f64,
    pub upper: f64,
}

fn scaled_angle(j: u32, sigma: i32) -> Result<f64, OracleError> {
    Ok(4f64.powi(j as i32) * elementary_angle(4, j, sigma)?)
}

/// `P = 4^j atanh(sigma 4^-j)`, `[L, U] = P -/+ (2/3) P[1]`.
pub fn srt_interval(j: u32, sigma: i32) -> Result<SrtBounds, OracleError> {
    if j == 0 {
        return Err(OracleError::InvalidDigit("stage index must be >= 1".into()));
    }
    if sigma.abs() > 2 {
        return Err(OracleError::InvalidDigit(format!("digit {sigma} outside -2..=2")));
    }
    let p = scaled_angle(j, sigma)?;
    let half_width = 2.0 / 3.0 * scaled_angle(j, 1)?;
    Ok(SrtBounds { j, sigma, lower: p - half_width, upper: p + half_width })
}

/// One comparator threshold checked against the overlap of the intervals
/// of two adjacent digits.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdCheck {
    pub check: String,
    pub j: u32,
    pub lower: f64,
    pub upper: f64,
    pub threshold: f64,
    pub pass: bool,
}

/// Comparator thresholds between digits `sigma` and `sigma + 1`.
pub const DIGIT_THRESHOLDS: [(i32, f64); 4] = [(-2, -1.5), (-1, -0.5), (0, 0.5), (1, 1.5)];

/// Open-interval membership; a threshold on an endpoint does not count.
pub fn strictly_contains(lower: f64, upper: f64, t: f64) -> bool {
    lower < t && t < upper
}

/// For every stage in range, checks that each threshold lies strictly
/// inside `(L[sigma + 1], U[sigma])`, the region where either digit is a
/// valid choice.
pub fn verify_digit_thresholds(j_start: u32, j_end: u32) -> Vec<ThresholdCheck> {
    let mut out = Vec::new();
    for j in j_start..=j_end {
        for &(sigma, threshold) in &DIGIT_THRESHOLDS {
            let (Ok(below), Ok(above)) = (srt_interval(j, sigma), srt_interval(j, sigma + 1)) else {
                continue;
            };
            let (lower, upper) = (above.lower, below.upper);
            out.push(ThresholdCheck {
                check: format!("srt_overlap_{}_{}", sigma, sigma + 1),
                j,
                lower,
                upper,
                threshold,
                pass: strictly_contains(lower, upper, threshold),
            });
        }
    }
    out
}
