//! Fraction of missing information for binomial likelihood-ratio tests.
//!
//! The crate answers three related questions about a study where only `n0`
//! of `n` values were observed:
//!
//! * how much larger the lod score is expected to get if the missing values
//!   were resolved, and how variable that gain is ([`rel_info`]);
//! * how to spread a follow-up budget over many such variables
//!   ([`design`]);
//! * whether the closed forms agree with simulation and exact enumeration
//!   ([`montecarlo`]).
//!
//! Lod scores live in [`lod`]; [`cli`] holds the study-table format and the
//! command implementations behind the `relinfo` binary.
//!
//! ```
//! use relinfo::{plugin_summary, Settings, StudyConfig};
//!
//! let cfg = StudyConfig::new(1000, 800, 440, 0.5).unwrap();
//! let s = plugin_summary(&cfg, cfg.missing(), &Settings::default()).unwrap();
//! assert!((s.plugin_ri1 - 0.8).abs() < 1e-12);
//! ```

pub mod cli;
pub mod design;
pub mod error;
pub mod lod;
pub mod montecarlo;
pub mod rel_info;
pub mod settings;

pub use design::{
    brute_force_allocation, combine_overall_inverse_ri, compare_markers_vs_individuals,
    optimize_allocation, DesignProblem, DesignSolution, Mode, VariableRecord,
};
pub use error::{Error, Result};
pub use lod::{binomial_loglik, lod_fixed, lod_mle_vs_null, mle, BinomialData, LodScore, LogBase};
pub use montecarlo::{
    conditional_simulate, contour_grid, empirical_ratio_stats, exact_conditional_moments,
    sd_curve, simulate_joint_lod, DensityGrid, JointSample, SdCurve, SimConfig,
};
pub use rel_info::{
    complete_lod_variance, equivalent_additional_individuals, expected_inverse_ri,
    plugin_summary, variance_inverse_ri, RelInfoSummary, RiForm, StudyConfig,
};
pub use settings::Settings;
