//! Two's-complement fixed-point words with explicit rounding and overflow.
//!
//! Every signal in the datapath is an [`Fx`]: a signed integer mantissa
//! tagged with the [`QFormat`] it lives in. Arithmetic is limited to what a
//! multiplier-free datapath has available: add, subtract, negate and
//! arithmetic shifts. Mantissas are held in an `i64`, so sums of two 32-bit
//! words never overflow before the format's overflow policy is applied.

use std::fmt;
use std::ops::{Add, Neg, Shl, Shr, Sub};
use std::str::FromStr;

use thiserror::Error;

/// Widest word the model supports.
pub const MAX_TOTAL_BITS: u32 = 32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FxError {
    #[error("invalid Q-format: {0}")]
    InvalidFormat(String),
    #[error("format mismatch: {lhs} vs {rhs}")]
    FormatMismatch { lhs: QFormat, rhs: QFormat },
    #[error("shift count {shift} out of range for a {total_bits}-bit word")]
    ShiftOutOfRange { shift: u32, total_bits: u32 },
    #[error("mantissa {mantissa} not representable in {format}")]
    Unrepresentable { mantissa: i64, format: QFormat },
}

/// How a value with more precision than the format is brought onto the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Rounding {
    /// Drop the low bits (round toward negative infinity).
    Truncate,
    /// Round to nearest, ties to even.
    #[default]
    NearestEven,
}

/// Behaviour when a result does not fit in `total_bits`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Overflow {
    #[default]
    Saturate,
    Wrap,
}

/// Word layout: `total_bits` two's-complement bits of which `frac_bits` are
/// fractional. Rendered as `Qm.n` with `m = total_bits - frac_bits` counting
/// the sign bit, so the 16-bit default is `Q2.14`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct QFormat {
    total_bits: u32,
    frac_bits: u32,
    rounding: Rounding,
    overflow: Overflow,
}

impl QFormat {
    /// The 16-bit I/O format of the sigmoid datapath.
    pub const Q2_14: QFormat = QFormat {
        total_bits: 16,
        frac_bits: 14,
        rounding: Rounding::NearestEven,
        overflow: Overflow::Saturate,
    };

    pub fn new(total_bits: u32, frac_bits: u32) -> Result<Self, FxError> {
        if total_bits > MAX_TOTAL_BITS {
            return Err(FxError::InvalidFormat(format!(
                "total_bits {total_bits} exceeds the {MAX_TOTAL_BITS}-bit model limit"
            )));
        }
        if frac_bits == 0 || frac_bits >= total_bits {
            return Err(FxError::InvalidFormat(format!(
                "need 0 < frac_bits < total_bits, got frac_bits={frac_bits} total_bits={total_bits}"
            )));
        }
        Ok(QFormat {
            total_bits,
            frac_bits,
            rounding: Rounding::default(),
            overflow: Overflow::default(),
        })
    }

    pub fn with_rounding(mut self, rounding: Rounding) -> Self {
        self.rounding = rounding;
        self
    }

    pub fn with_overflow(mut self, overflow: Overflow) -> Self {
        self.overflow = overflow;
        self
    }

    /// Same rounding and overflow policy with extra integer and fraction bits.
    pub fn widened(self, extra_int_bits: u32, extra_frac_bits: u32) -> Result<Self, FxError> {
        let fmt = QFormat::new(
            self.total_bits + extra_int_bits + extra_frac_bits,
            self.frac_bits + extra_frac_bits,
        )?;
        Ok(fmt.with_rounding(self.rounding).with_overflow(self.overflow))
    }

    pub fn total_bits(&self) -> u32 {
        self.total_bits
    }

    pub fn frac_bits(&self) -> u32 {
        self.frac_bits
    }

    /// Integer bits including the sign bit.
    pub fn int_bits(&self) -> u32 {
        self.total_bits - self.frac_bits
    }

    pub fn rounding(&self) -> Rounding {
        self.rounding
    }

    pub fn overflow(&self) -> Overflow {
        self.overflow
    }

    /// Weight of one least-significant bit.
    pub fn lsb(&self) -> f64 {
        (-(self.frac_bits as f64)).exp2()
    }

    pub fn max_mantissa(&self) -> i64 {
        (1i64 << (self.total_bits - 1)) - 1
    }

    pub fn min_mantissa(&self) -> i64 {
        -(1i64 << (self.total_bits - 1))
    }

    pub fn max_value(&self) -> f64 {
        self.max_mantissa() as f64 * self.lsb()
    }

    pub fn min_value(&self) -> f64 {
        self.min_mantissa() as f64 * self.lsb()
    }

    fn contains(&self, mantissa: i64) -> bool {
        (self.min_mantissa()..=self.max_mantissa()).contains(&mantissa)
    }

    /// Brings an exact integer result back into range.
    fn fit(&self, mantissa: i64) -> i64 {
        match self.overflow {
            Overflow::Saturate => mantissa.clamp(self.min_mantissa(), self.max_mantissa()),
            Overflow::Wrap => {
                let shift = 64 - self.total_bits;
                (mantissa << shift) >> shift
            }
        }
    }

    /// Divides by `2^shift` under this format's rounding mode.
    fn round_shift(&self, mantissa: i64, shift: u32) -> i64 {
        if shift == 0 {
            return mantissa;
        }
        let floor = mantissa >> shift;
        match self.rounding {
            Rounding::Truncate => floor,
            Rounding::NearestEven => {
                let rem = mantissa - (floor << shift);
                let half = 1i64 << (shift - 1);
                if rem > half || (rem == half && floor & 1 == 1) {
                    floor + 1
                } else {
                    floor
                }
            }
        }
    }

    /// Width of the hex rendering of a mantissa.
    pub fn hex_width(&self) -> usize {
        self.total_bits.div_ceil(4) as usize
    }
}

impl Default for QFormat {
    fn default() -> Self {
        QFormat::Q2_14
    }
}

impl fmt::Display for QFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Q{}.{}", self.int_bits(), self.frac_bits)
    }
}

impl FromStr for QFormat {
    type Err = FxError;

    /// Parses `Qm.n`; rounding and overflow take their defaults.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || FxError::InvalidFormat(format!("cannot parse {s:?} as Qm.n"));
        let body = s.strip_prefix('Q').or_else(|| s.strip_prefix('q')).ok_or_else(bad)?;
        let (m, n) = body.split_once('.').ok_or_else(bad)?;
        let m: u32 = m.parse().map_err(|_| bad())?;
        let n: u32 = n.parse().map_err(|_| bad())?;
        QFormat::new(m + n, n)
    }
}

/// A fixed-point sample: real value `mantissa * 2^-frac_bits`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Fx {
    mantissa: i64,
    format: QFormat,
}

impl Fx {
    /// Nearest representable value under the format's rounding mode, with
    /// out-of-range values resolved by the overflow policy. NaN maps to zero.
    pub fn from_real(v: f64, format: QFormat) -> Fx {
        if v.is_nan() {
            return Fx::zero(format);
        }
        let scaled = v * (format.frac_bits as f64).exp2();
        let rounded = match format.rounding {
            Rounding::Truncate => scaled.floor(),
            Rounding::NearestEven => scaled.round_ties_even(),
        };
        let mantissa = match format.overflow {
            Overflow::Saturate => {
                rounded.clamp(format.min_mantissa() as f64, format.max_mantissa() as f64) as i64
            }
            Overflow::Wrap => {
                let modulus = (format.total_bits as f64).exp2();
                if !rounded.is_finite() {
                    0
                } else {
                    format.fit(rounded.rem_euclid(modulus) as i64)
                }
            }
        };
        Fx { mantissa, format }
    }

    pub fn from_mantissa(mantissa: i64, format: QFormat) -> Result<Fx, FxError> {
        if format.contains(mantissa) {
            Ok(Fx { mantissa, format })
        } else {
            Err(FxError::Unrepresentable { mantissa, format })
        }
    }

    pub fn zero(format: QFormat) -> Fx {
        Fx { mantissa: 0, format }
    }

    pub fn max(format: QFormat) -> Fx {
        Fx { mantissa: format.max_mantissa(), format }
    }

    pub fn min(format: QFormat) -> Fx {
        Fx { mantissa: format.min_mantissa(), format }
    }

    pub fn mantissa(&self) -> i64 {
        self.mantissa
    }

    pub fn format(&self) -> QFormat {
        self.format
    }

    pub fn to_real(&self) -> f64 {
        self.mantissa as f64 * self.format.lsb()
    }

    pub fn is_negative(&self) -> bool {
        self.mantissa < 0
    }

    /// Two's-complement bit pattern, zero-padded to the word width.
    pub fn to_hex(&self) -> String {
        let mask = (1u64 << self.format.total_bits) - 1;
        format!(
            "{:0width$x}",
            (self.mantissa as u64) & mask,
            width = self.format.hex_width()
        )
    }

    fn same_format(&self, rhs: &Fx) -> Result<(), FxError> {
        if self.format == rhs.format {
            Ok(())
        } else {
            Err(FxError::FormatMismatch { lhs: self.format, rhs: rhs.format })
        }
    }

    pub fn checked_add(self, rhs: Fx) -> Result<Fx, FxError> {
        self.same_format(&rhs)?;
        Ok(self.with_mantissa(self.mantissa + rhs.mantissa))
    }

    pub fn checked_sub(self, rhs: Fx) -> Result<Fx, FxError> {
        self.same_format(&rhs)?;
        Ok(self.with_mantissa(self.mantissa - rhs.mantissa))
    }

    /// Arithmetic right shift. Shifted-out bits are discarded regardless of
    /// the rounding mode, as in a wired barrel shifter.
    pub fn checked_shr(self, shift: u32) -> Result<Fx, FxError> {
        self.check_shift(shift)?;
        Ok(Fx { mantissa: self.mantissa >> shift, format: self.format })
    }

    /// Left shift with the overflow policy applied to the result.
    pub fn checked_shl(self, shift: u32) -> Result<Fx, FxError> {
        self.check_shift(shift)?;
        Ok(self.with_mantissa(self.mantissa << shift))
    }

    fn check_shift(&self, shift: u32) -> Result<(), FxError> {
        if shift < self.format.total_bits {
            Ok(())
        } else {
            Err(FxError::ShiftOutOfRange { shift, total_bits: self.format.total_bits })
        }
    }

    /// Moves the value into another format. Gaining fraction bits is exact;
    /// losing them rounds per the target format's rounding mode.
    pub fn rescale(self, target: QFormat) -> Fx {
        let from = self.format.frac_bits;
        let to = target.frac_bits;
        let mantissa = if to >= from {
            self.mantissa << (to - from)
        } else {
            target.round_shift(self.mantissa, from - to)
        };
        Fx { mantissa: target.fit(mantissa), format: target }
    }

    /// Clamps into `[lo, hi]`; all three must share a format.
    pub fn clamp(self, lo: Fx, hi: Fx) -> Fx {
        debug_assert!(self.format == lo.format && self.format == hi.format);
        Fx { mantissa: self.mantissa.clamp(lo.mantissa, hi.mantissa), format: self.format }
    }

    fn with_mantissa(&self, mantissa: i64) -> Fx {
        Fx { mantissa: self.format.fit(mantissa), format: self.format }
    }
}

impl fmt::Display for Fx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({} 0x{})", self.to_real(), self.mantissa, self.to_hex())
    }
}

// The operator forms are for datapath code where formats agree by
// construction; a mismatch there is a wiring bug, so they panic.

impl Add for Fx {
    type Output = Fx;

    fn add(self, rhs: Fx) -> Fx {
        self.checked_add(rhs).expect("fixed-point add")
    }
}

impl Sub for Fx {
    type Output = Fx;

    fn sub(self, rhs: Fx) -> Fx {
        self.checked_sub(rhs).expect("fixed-point sub")
    }
}

impl Neg for Fx {
    type Output = Fx;

    /// Negating the most-negative word saturates (or wraps back to itself).
    fn neg(self) -> Fx {
        self.with_mantissa(-self.mantissa)
    }
}

impl Shr<u32> for Fx {
    type Output = Fx;

    fn shr(self, shift: u32) -> Fx {
        self.checked_shr(shift).expect("fixed-point shr")
    }
}

impl Shl<u32> for Fx {
    type Output = Fx;

    fn shl(self, shift: u32) -> Fx {
        self.checked_shl(shift).expect("fixed-point shl")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const Q: QFormat = QFormat::Q2_14;

    fn fx(v: f64) -> Fx {
        Fx::from_real(v, Q)
    }

    fn lsb(m: i64) -> Fx {
        Fx::from_mantissa(m, Q).unwrap()
    }

    #[test]
    fn format_validation() {
        assert!(QFormat::new(16, 14).is_ok());
        assert!(QFormat::new(16, 0).is_err());
        assert!(QFormat::new(16, 16).is_err());
        assert!(QFormat::new(33, 14).is_err());
        assert_eq!(QFormat::Q2_14.to_string(), "Q2.14");
        assert_eq!("Q2.14".parse::<QFormat>().unwrap(), QFormat::Q2_14);
        assert_eq!("Q4.16".parse::<QFormat>().unwrap().total_bits(), 20);
        assert!("2.14".parse::<QFormat>().is_err());
    }

    #[test]
    fn from_real_examples() {
        assert_eq!(fx(0.0).mantissa(), 0);
        assert_eq!(fx(0.5).mantissa(), 8192);
        // round(0.958151 * 2^14) = round(15698.346)
        assert_eq!(fx(0.958151).mantissa(), 15698);
    }

    #[test]
    fn from_real_saturates_and_wraps() {
        assert_eq!(fx(5.0), Fx::max(Q));
        assert_eq!(fx(-5.0), Fx::min(Q));
        assert_eq!(fx(f64::INFINITY), Fx::max(Q));
        let wrap = Q.with_overflow(Overflow::Wrap);
        // 2.0 is one past the top of Q2.14 and wraps to -2.0.
        assert_eq!(Fx::from_real(2.0, wrap).mantissa(), -32768);
        assert_eq!(Fx::from_real(f64::NAN, Q).mantissa(), 0);
    }

    #[test]
    fn truncating_conversion_floors() {
        let trunc = Q.with_rounding(Rounding::Truncate);
        assert_eq!(Fx::from_real(0.9999 * Q.lsb(), trunc).mantissa(), 0);
        assert_eq!(Fx::from_real(-0.0001 * Q.lsb(), trunc).mantissa(), -1);
    }

    #[test]
    fn add_examples() {
        assert_eq!(fx(0.25) + fx(0.25), fx(0.5));
        assert_eq!(Fx::max(Q) + lsb(1), Fx::max(Q));
        assert_eq!((fx(0.462117) + fx(-0.462117)).mantissa(), 0);
        let wrap = Q.with_overflow(Overflow::Wrap);
        assert_eq!(Fx::max(wrap) + Fx::from_mantissa(1, wrap).unwrap(), Fx::min(wrap));
    }

    #[test]
    fn mismatched_formats_are_rejected() {
        let other = Fx::from_real(0.5, QFormat::new(18, 16).unwrap());
        assert!(matches!(
            fx(0.5).checked_add(other),
            Err(FxError::FormatMismatch { .. })
        ));
        assert!(fx(0.5).checked_sub(other).is_err());
    }

    #[test]
    fn sub_examples() {
        assert_eq!((fx(0.5) - fx(0.5)).mantissa(), 0);
        assert_eq!(fx(0.0) - lsb(1), lsb(-1));
        assert_eq!(fx(1.0) - fx(0.25), fx(0.75));
    }

    #[test]
    fn shr_examples() {
        assert_eq!(fx(0.5) >> 1, fx(0.25));
        assert_eq!(lsb(-1) >> 1, lsb(-1));
        assert_eq!(fx(0.75) >> 2, fx(0.1875));
        assert!(matches!(
            fx(0.5).checked_shr(16),
            Err(FxError::ShiftOutOfRange { shift: 16, total_bits: 16 })
        ));
        assert!(fx(0.5).checked_shr(15).is_ok());
    }

    #[test]
    fn shl_saturates() {
        assert_eq!(fx(0.25) << 2, fx(1.0));
        assert_eq!(fx(1.0) << 1, Fx::max(Q));
        assert!(fx(0.25).checked_shl(16).is_err());
    }

    #[test]
    fn neg_examples() {
        assert_eq!(-fx(0.0), fx(0.0));
        assert_eq!(-fx(0.5), fx(-0.5));
        assert_eq!(-Fx::min(Q), Fx::max(Q));
    }

    #[test]
    fn rescale_rounds_per_target() {
        let wide = Q.widened(0, 2).unwrap();
        assert_eq!(wide.to_string(), "Q2.16");
        assert_eq!(fx(0.5).rescale(wide).mantissa(), 32768);
        // 0b...10 | 10 -> tie, floor is odd -> round up; 0b...00 | 10 -> stays.
        assert_eq!(Fx::from_mantissa(6, wide).unwrap().rescale(Q).mantissa(), 2);
        assert_eq!(Fx::from_mantissa(2, wide).unwrap().rescale(Q).mantissa(), 0);
        assert_eq!(Fx::from_mantissa(3, wide).unwrap().rescale(Q).mantissa(), 1);
        assert_eq!(Fx::from_mantissa(-3, wide).unwrap().rescale(Q).mantissa(), -1);
        let trunc = Q.with_rounding(Rounding::Truncate);
        assert_eq!(Fx::from_mantissa(-1, wide).unwrap().rescale(trunc).mantissa(), -1);
    }

    #[test]
    fn hex_rendering() {
        assert_eq!(fx(0.5).to_hex(), "2000");
        assert_eq!(lsb(-1).to_hex(), "ffff");
        let q18 = QFormat::new(18, 16).unwrap();
        assert_eq!(Fx::from_mantissa(-1, q18).unwrap().to_hex(), "3ffff");
    }

    fn any_fx() -> impl Strategy<Value = Fx> {
        (Q.min_mantissa()..=Q.max_mantissa()).prop_map(lsb)
    }

    proptest! {
        #[test]
        fn round_trip_within_half_lsb(v in -2.0f64..(2.0 - 1.0 / 16384.0)) {
            let back = fx(v).to_real();
            prop_assert!((back - v).abs() <= Q.lsb() / 2.0);
        }

        #[test]
        fn add_sub_exact_when_representable(a in any_fx(), b in any_fx()) {
            let sum = a.mantissa() + b.mantissa();
            if Q.contains(sum) {
                prop_assert_eq!((a + b).mantissa(), sum);
            }
            let diff = a.mantissa() - b.mantissa();
            if Q.contains(diff) {
                prop_assert_eq!((a - b).mantissa(), diff);
            }
        }

        #[test]
        fn shifts_compose(a in any_fx(), j in 0u32..8, k in 0u32..8) {
            prop_assert_eq!(a >> (j + k), (a >> j) >> k);
        }

        #[test]
        fn double_negation(a in any_fx()) {
            if a != Fx::min(Q) {
                prop_assert_eq!(-(-a), a);
            }
        }
    }
}
