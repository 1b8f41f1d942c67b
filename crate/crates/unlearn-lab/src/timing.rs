//! Run-time accounting.
//!
//! Serialized reports must be byte-identical across re-runs and `--jobs`
//! settings, so every time value that lands in a CSV/JSON artifact comes from
//! an exact work counter (one unit = one example forward pass) converted at a
//! fixed nominal rate. Real elapsed time is still measured and shown in
//! console summaries; it never enters data files.

use std::ops::AddAssign;

/// Nominal conversion rate: reported seconds per work unit.
pub const SECONDS_PER_WORK_UNIT: f64 = 1e-6;

/// Work units for one example in a backward pass (forward + backprop).
pub(crate) const BACKWARD_UNITS: u64 = 3;

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Timing {
    /// Real monotonic elapsed seconds. Console display only.
    pub elapsed_s: f64,
    /// Deterministic work counter; one unit = one example forward pass.
    pub work_units: u64,
}

impl Timing {
    pub fn new(elapsed_s: f64, work_units: u64) -> Self {
        Timing { elapsed_s, work_units }
    }

    /// Deterministic seconds used in serialized reports.
    pub fn report_seconds(&self) -> f64 {
        self.work_units as f64 * SECONDS_PER_WORK_UNIT
    }
}

impl AddAssign for Timing {
    fn add_assign(&mut self, rhs: Timing) {
        self.elapsed_s += rhs.elapsed_s;
        self.work_units += rhs.work_units;
    }
}

