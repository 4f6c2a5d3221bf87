//! Bit-accurate software model of a sigmoid datapath built from a
//! mixed-radix hyperbolic rotation CORDIC and a linear vectoring divider.
//!
//! `sigmoid(x) = (1 + tanh(x / 2)) / 2` for `|x| <= 1`:
//!
//! 1. [`mrhrc`] rotates `z = x / 2` to `(cosh z, sinh z)` with radix-2
//!    stages j = 2..9 followed by radix-4 stages j = 4..7;
//! 2. [`lvc`] divides them to `tanh z` with shift-add vectoring;
//! 3. [`pipeline`] applies the final halving and 0.5 offset.
//!
//! [`oracle`] holds the double-precision references, and [`verify`] and
//! [`sweep`] drive the checks and accuracy reports used by the CLI.

pub mod cli;
pub mod fixedpoint;
pub mod lvc;
pub mod mrhrc;
pub mod oracle;
pub mod pipeline;
pub mod sweep;
pub mod verify;

pub use fixedpoint::{Fx, FxError, Overflow, QFormat, Rounding};
pub use lvc::{lvc_divide, LvcDivider};
pub use mrhrc::{build_angle_tables, mrhrc_run, AngleTables};
pub use pipeline::{latency_report, sigmoid_eval, sigmoid_eval_batch, PipelineConfig};
pub use sweep::{run_sweep, SweepReport};
