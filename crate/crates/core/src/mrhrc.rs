//! Mixed-radix hyperbolic rotation CORDIC.
//!
//! Eight radix-2 rotations (j = 2..9) take the angle residual from
//! `|z| <= 0.5` down to the small region the radix-4 stages accept; four
//! radix-4 rotations (j = 4..7) then finish it. The radix-2 gain is
//! cancelled by seeding `x0 = 1/K_h`. The radix-4 gain is below one LSB of
//! the I/O word and is left uncompensated.
//!
//! Iterations run in a working format carrying `guard_bits` extra fraction
//! bits. The radix-4 stages steer on the scaled residual `w = 4^j z`, held
//! in a register four bits wider than the working word, so the digit
//! comparator sees fixed thresholds at every stage.

use std::fmt::Write as _;
use std::ops::RangeInclusive;

use thiserror::Error;

use crate::fixedpoint::{Fx, FxError, QFormat};
use crate::oracle::{elementary_angle, scale_factor_kh};

pub const R2_STAGES: RangeInclusive<u32> = 2..=9;
pub const R4_STAGES: RangeInclusive<u32> = 4..=7;
pub const DEFAULT_GUARD_BITS: u32 = 2;
/// Extra integer bits of the scaled-residual register.
pub const SCALED_RESIDUAL_EXTRA_BITS: u32 = 4;
/// Largest `|z_in|` the schedule is designed for.
pub const MAX_INPUT_ANGLE: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HrcError {
    #[error("input angle {0} outside [-0.5, 0.5]")]
    OutOfRange(f64),
    #[error("input is in {got}, tables were built for {expected}")]
    FormatMismatch { expected: QFormat, got: QFormat },
    #[error(transparent)]
    Format(#[from] FxError),
}

/// ROM contents of the core, quantized from the double-precision oracle.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleTables {
    io: QFormat,
    working: QFormat,
    scaled: QFormat,
    r2_angles: Vec<Fx>,
    r4_angles: Vec<[Fx; 2]>,
    r4_scaled: Vec<[Fx; 2]>,
    inv_kh: Fx,
    thresholds: [Fx; 4],
    half: Fx,
}

/// One named ROM word, as exported for RTL use.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableEntry {
    pub name: &'static str,
    pub index: i32,
    pub value: Fx,
}

/// Tables for `io` with the default guard bits.
pub fn build_angle_tables(io: QFormat) -> Result<AngleTables, HrcError> {
    AngleTables::new(io, DEFAULT_GUARD_BITS)
}

impl AngleTables {
    pub fn new(io: QFormat, guard_bits: u32) -> Result<Self, HrcError> {
        let working = io.widened(0, guard_bits)?;
        let scaled = working.widened(SCALED_RESIDUAL_EXTRA_BITS, 0)?;
        let angle = |radix, j, d| elementary_angle(radix, j, d).expect("schedule angles are finite");

        let r2_angles = R2_STAGES.map(|j| Fx::from_real(angle(2, j, 1), working)).collect();
        let r4_angles = R4_STAGES
            .map(|j| [1, 2].map(|s| Fx::from_real(angle(4, j, s), working)))
            .collect();
        let r4_scaled = R4_STAGES
            .map(|j| [1, 2].map(|s| Fx::from_real(4f64.powi(j as i32) * angle(4, j, s), scaled)))
            .collect();
        let kh = scale_factor_kh(*R2_STAGES.start(), *R2_STAGES.end());

        Ok(AngleTables {
            io,
            working,
            scaled,
            r2_angles,
            r4_angles,
            r4_scaled,
            inv_kh: Fx::from_real(kh, working),
            thresholds: [-1.5, -0.5, 0.5, 1.5].map(|t| Fx::from_real(t, scaled)),
            half: Fx::from_real(0.5, io),
        })
    }

    pub fn io_format(&self) -> QFormat {
        self.io
    }

    pub fn working_format(&self) -> QFormat {
        self.working
    }

    /// Format of the scaled residual register `w`.
    pub fn scaled_format(&self) -> QFormat {
        self.scaled
    }

    pub fn guard_bits(&self) -> u32 {
        self.working.frac_bits() - self.io.frac_bits()
    }

    /// `atanh(2^-j)` in the working format.
    pub fn r2_angle(&self, j: u32) -> Fx {
        self.r2_angles[(j - R2_STAGES.start()) as usize]
    }

    /// `atanh(sigma 4^-j)` in the working format, `sigma` in {1, 2}.
    pub fn r4_angle(&self, j: u32, sigma: i32) -> Fx {
        self.r4_angles[(j - R4_STAGES.start()) as usize][(sigma - 1) as usize]
    }

    /// `4^j atanh(sigma 4^-j)` in the scaled-residual format, `sigma` in {1, 2}.
    pub fn r4_scaled_angle(&self, j: u32, sigma: i32) -> Fx {
        self.r4_scaled[(j - R4_STAGES.start()) as usize][(sigma - 1) as usize]
    }

    /// Seed for `x0`: the reciprocal of the radix-2 rotation gain,
    /// `scale_factor_kh(2, 9)` ~ 1.043678.
    pub fn inv_kh(&self) -> Fx {
        self.inv_kh
    }

    /// Digit comparator thresholds `-1.5, -0.5, 0.5, 1.5`.
    pub fn thresholds(&self) -> [Fx; 4] {
        self.thresholds
    }

    /// The 0.5 offset of the final scale-and-offset stage, in the I/O format.
    pub fn half(&self) -> Fx {
        self.half
    }

    /// All ROM words: radix-2 angles by ascending j, radix-4 pre-scaled
    /// angles by ascending j then sigma, `1/K_h`, then the thresholds.
    pub fn entries(&self) -> Vec<TableEntry> {
        let mut out = Vec::with_capacity(21);
        for j in R2_STAGES {
            out.push(TableEntry { name: "r2_angle", index: j as i32, value: self.r2_angle(j) });
        }
        for j in R4_STAGES {
            for (sigma, name) in [(1, "r4_scaled_angle_s1"), (2, "r4_scaled_angle_s2")] {
                out.push(TableEntry { name, index: j as i32, value: self.r4_scaled_angle(j, sigma) });
            }
        }
        out.push(TableEntry { name: "inv_kh", index: 0, value: self.inv_kh });
        for (i, &value) in self.thresholds.iter().enumerate() {
            out.push(TableEntry { name: "threshold", index: i as i32, value });
        }
        out
    }

    /// Text export, one `name index hex decimal` line per entry.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for e in self.entries() {
            writeln!(out, "{} {} {} {}", e.name, e.index, e.value.to_hex(), e.value.to_real())
                .expect("writing to a String");
        }
        out
    }
}

/// Register contents between two stages. `w` is present only once the
/// radix-4 stages have begun; `stage` counts completed iterations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HrcState {
    pub x: Fx,
    pub y: Fx,
    pub z: Fx,
    pub w: Option<Fx>,
    pub stage: u32,
}

impl HrcState {
    /// `(x0, y0, z0) = (1/K_h, 0, z_in)`, with `z_in` already in the working format.
    pub fn initial(z_in: Fx, t: &AngleTables) -> Self {
        HrcState { x: t.inv_kh, y: Fx::zero(t.working), z: z_in, w: None, stage: 0 }
    }

    /// Loads `w = 4^j z` ahead of radix-4 stage `j`.
    pub fn with_scaled_residual(mut self, j: u32, t: &AngleTables) -> Self {
        self.w = Some(self.z.rescale(t.scaled) << (2 * j));
        self
    }

    /// Angle still to be rotated, taken from `w` when it is live. `j` is the
    /// stage `w` is scaled for.
    pub fn residual(&self, j: u32) -> f64 {
        match self.w {
            Some(w) => w.to_real() * 4f64.powi(-(j as i32)),
            None => self.z.to_real(),
        }
    }
}

/// One radix-2 rotation: `d = sign(z)` with `d = +1` at zero.
pub fn r2_hrc_step(s: HrcState, j: u32, t: &AngleTables) -> HrcState {
    assert!(R2_STAGES.contains(&j), "radix-2 stage {j} outside 2..=9");
    let (dx, dy) = (s.y >> j, s.x >> j);
    let angle = t.r2_angle(j);
    let (x, y, z) = if s.z.is_negative() {
        (s.x - dx, s.y - dy, s.z + angle)
    } else {
        (s.x + dx, s.y + dy, s.z - angle)
    };
    HrcState { x, y, z, w: s.w, stage: s.stage + 1 }
}

/// Five-valued digit from the scaled residual. Only the bits down to the
/// first fraction bit take part: they give `floor(2w)`, and every threshold
/// is a multiple of one half.
pub fn r4_digit_select(w: Fx) -> i32 {
    let top = w.mantissa() >> (w.format().frac_bits() - 1);
    match top {
        3.. => 2,
        1..=2 => 1,
        -1..=0 => 0,
        -3..=-2 => -1,
        _ => -2,
    }
}

/// One radix-4 rotation. `sigma 4^-j` is a single shift: `2j` for
/// `|sigma| = 1`, `2j - 1` for `|sigma| = 2`. The residual update is
/// `w' = 4 (w - 4^j atanh(sigma 4^-j))`.
pub fn r4_hrc_step(s: HrcState, j: u32, t: &AngleTables) -> HrcState {
    assert!(R4_STAGES.contains(&j), "radix-4 stage {j} outside 4..=7");
    let w = s.w.expect("scaled residual must be loaded before radix-4 stages");
    let sigma = r4_digit_select(w);
    let (mut x, mut y, mut z, mut w) = (s.x, s.y, s.z, w);
    if sigma != 0 {
        let shift = if sigma.abs() == 2 { 2 * j - 1 } else { 2 * j };
        let (dx, dy) = (s.y >> shift, s.x >> shift);
        let (angle, scaled) = (t.r4_angle(j, sigma.abs()), t.r4_scaled_angle(j, sigma.abs()));
        if sigma > 0 {
            (x, y, z, w) = (x + dx, y + dy, z - angle, w - scaled);
        } else {
            (x, y, z, w) = (x - dx, y - dy, z + angle, w + scaled);
        }
    }
    HrcState { x, y, z, w: Some(w << 2), stage: s.stage + 1 }
}

/// Full record of one evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct HrcTrace {
    pub cosh: Fx,
    pub sinh: Fx,
    pub r2_digits: Vec<i32>,
    pub r4_digits: Vec<i32>,
    /// State after the last radix-2 stage.
    pub handoff: HrcState,
    /// State after the last radix-4 stage, still in the working format.
    pub last: HrcState,
}

/// `(cosh z_in, sinh z_in)` in the I/O format.
pub fn mrhrc_run(z_in: Fx, t: &AngleTables) -> Result<(Fx, Fx), HrcError> {
    mrhrc_trace(z_in, t).map(|tr| (tr.cosh, tr.sinh))
}

pub fn mrhrc_trace(z_in: Fx, t: &AngleTables) -> Result<HrcTrace, HrcError> {
    if z_in.format() != t.io {
        return Err(HrcError::FormatMismatch { expected: t.io, got: z_in.format() });
    }
    if z_in.mantissa().abs() > t.half.mantissa() {
        return Err(HrcError::OutOfRange(z_in.to_real()));
    }

    let mut s = HrcState::initial(z_in.rescale(t.working), t);
    let mut r2_digits = Vec::with_capacity(8);
    for j in R2_STAGES {
        r2_digits.push(if s.z.is_negative() { -1 } else { 1 });
        s = r2_hrc_step(s, j, t);
    }
    let handoff = s;

    s = s.with_scaled_residual(*R4_STAGES.start(), t);
    let mut r4_digits = Vec::with_capacity(4);
    for j in R4_STAGES {
        r4_digits.push(r4_digit_select(s.w.expect("loaded above")));
        s = r4_hrc_step(s, j, t);
    }

    Ok(HrcTrace {
        cosh: s.x.rescale(t.io),
        sinh: s.y.rescale(t.io),
        r2_digits,
        r4_digits,
        handoff,
        last: s,
    })
}

/// Largest `|z|` left after the radix-2 stages over `count` uniformly spaced
/// inputs covering `[-0.5, 0.5]`, and the input where it occurs.
pub fn max_handoff_residual(t: &AngleTables, count: usize) -> (f64, f64) {
    assert!(count >= 2);
    let mut worst = (0.0f64, 0.0f64);
    for i in 0..count {
        let v = -MAX_INPUT_ANGLE + 2.0 * MAX_INPUT_ANGLE * i as f64 / (count - 1) as f64;
        let z_in = Fx::from_real(v, t.io);
        let trace = mrhrc_trace(z_in, t).expect("grid stays inside [-0.5, 0.5]");
        let r = trace.handoff.z.to_real().abs();
        if r > worst.0 {
            worst = (r, z_in.to_real());
        }
    }
    worst
}
