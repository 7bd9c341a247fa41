use serde::{Deserialize, Serialize};

use crate::lod::LogBase;

/// Threshold (natural-log units) below which an observed lod is treated as
/// too small to divide by.
pub const DEFAULT_EPS_LOD: f64 = 1e-9;

/// Knobs shared by the information, design and reporting layers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Settings {
    /// Base used for reported lod values. Ratios never depend on it.
    pub log_base: LogBase,
    /// Instability threshold for observed lods, in natural-log units.
    pub eps_lod: f64,
    /// Clamp a boundary MLE to `[1/(2 n0), 1 - 1/(2 n0)]` instead of failing.
    pub continuity_correction: bool,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            log_base: LogBase::Natural,
            eps_lod: DEFAULT_EPS_LOD,
            continuity_correction: false,
        }
    }
}

impl Settings {
    pub fn with_log_base(mut self, base: LogBase) -> Self {
        self.log_base = base;
        self
    }

    pub fn with_eps_lod(mut self, eps: f64) -> Self {
        self.eps_lod = eps;
        self
    }

    pub fn with_continuity_correction(mut self, on: bool) -> Self {
        self.continuity_correction = on;
        self
    }
}
