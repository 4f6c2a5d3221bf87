//! Convergence and digit-selection checks behind the iteration schedule.

use serde::Serialize;

use crate::oracle::{
    convergence_range, radix4_gain_bound, verify_digit_thresholds, ConvergenceSpec,
    ThresholdCheck,
};
use crate::mrhrc::{max_handoff_residual, MAX_INPUT_ANGLE, R4_STAGES};
use crate::pipeline::PipelineConfig;

/// Published radix-2 range estimate for a j = 2 start.
pub const PUBLISHED_R2_RANGE: f64 = 0.5688;
/// Published radix-4 range for the j = 4..7 stages.
pub const PUBLISHED_R4_RANGE: f64 = 0.0104;
/// Published residual after the radix-2 stages.
pub const PUBLISHED_HANDOFF_RESIDUAL: f64 = 0.0061;
/// Published value quoted for `tanh(0.5)`.
pub const PUBLISHED_TANH_HALF: f64 = 0.52;
/// Convergence bound of linear vectoring on `|y0 / x0|`.
pub const LVC_RATIO_BOUND: f64 = 2.0;
/// Operating bound the divider schedule is designed for.
pub const LVC_DESIGN_RATIO: f64 = 1.0;
/// Grid size for the measured handoff residual.
pub const HANDOFF_GRID: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckLine {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    pub pass: bool,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<CheckLine>,
    pub overlap: Vec<ThresholdCheck>,
    pub max_handoff_residual: f64,
    pub argmax_handoff_input: f64,
}

impl VerifyReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass) && self.overlap.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> Vec<String> {
        let mut out: Vec<String> =
            self.checks.iter().filter(|c| !c.pass).map(|c| c.name.clone()).collect();
        out.extend(
            self.overlap.iter().filter(|c| !c.pass).map(|c| format!("{} j={}", c.check, c.j)),
        );
        out
    }

    pub fn render(&self) -> String {
        let verdict = |p: bool| if p { "PASS" } else { "FAIL" };
        let mut out = String::new();
        for c in &self.checks {
            out.push_str(&format!(
                "{:<22} {:.6} (bound {:.6}) {}",
                c.name,
                c.value,
                c.bound,
                verdict(c.pass)
            ));
            if !c.note.is_empty() {
                out.push_str(&format!("  [{}]", c.note));
            }
            out.push('\n');
        }
        for c in &self.overlap {
            out.push_str(&format!(
                "{:<22} j={} {} in ({:.5}, {:.5}) {}\n",
                c.check,
                c.j,
                c.threshold,
                c.lower,
                c.upper,
                verdict(c.pass)
            ));
        }
        out
    }
}

pub fn run_verification(cfg: &PipelineConfig) -> VerifyReport {
    let r2 = convergence_range(&ConvergenceSpec::radix2_schedule());
    let r4 = convergence_range(&ConvergenceSpec::radix4_schedule());
    let (residual, arg) = max_handoff_residual(cfg.tables(), HANDOFF_GRID);
    let gain = radix4_gain_bound(*R4_STAGES.start(), *R4_STAGES.end(), 2);
    let lsb = cfg.format().lsb();
    let tanh_half = MAX_INPUT_ANGLE.tanh();

    let published_residual_note = if residual <= PUBLISHED_HANDOFF_RESIDUAL {
        format!("within published {PUBLISHED_HANDOFF_RESIDUAL}")
    } else {
        format!("exceeds published {PUBLISHED_HANDOFF_RESIDUAL}, worst input {arg:.6}")
    };

    let checks = vec![
        CheckLine {
            name: "r2_range".into(),
            value: r2,
            bound: MAX_INPUT_ANGLE,
            pass: r2 >= MAX_INPUT_ANGLE,
            note: format!("published estimate {PUBLISHED_R2_RANGE}"),
        },
        CheckLine {
            name: "r4_range".into(),
            value: r4,
            bound: residual,
            pass: r4 >= residual && (r4 - PUBLISHED_R4_RANGE).abs() <= 1e-4,
            note: format!("published {PUBLISHED_R4_RANGE}"),
        },
        CheckLine {
            name: "handoff_residual".into(),
            value: residual,
            bound: r4,
            pass: residual <= r4,
            note: published_residual_note,
        },
        CheckLine {
            name: "r4_gain".into(),
            value: gain,
            bound: 1.0 + lsb,
            pass: gain < 1.0 + lsb,
            note: "worst case sigma = 2 at every stage".into(),
        },
        CheckLine {
            name: "lvc_ratio".into(),
            value: tanh_half,
            bound: LVC_DESIGN_RATIO,
            pass: tanh_half <= LVC_DESIGN_RATIO,
            note: format!("convergence bound {LVC_RATIO_BOUND}, published {PUBLISHED_TANH_HALF}"),
        },
    ];

    VerifyReport {
        checks,
        overlap: verify_digit_thresholds(*R4_STAGES.start(), *R4_STAGES.end()),
        max_handoff_residual: residual,
        argmax_handoff_input: arg,
    }
}
