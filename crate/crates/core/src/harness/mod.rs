//! Configuration loading, parameter sweeps and the validation suite behind
//! the `risnoma` command line.

mod config;
mod sweep;
mod validate;

pub use config::{load_config, parse_config, Config, ValidateSettings, PAPER_DEFAULTS};
pub use sweep::{
    analytic_metric, preset, run_sweep, Axis, SeriesSpec, SweepOutput, SweepRow, SweepSpec, CSV_HEADER,
    MIN_SIMULATED_TRIALS, PRESETS,
};
pub use validate::{
    validate, Check, CheckStatus, Profile, ValidationReport, SLOPE_GRID_M, TREND_L_GRID_M, TREND_R_C_M,
    TREND_SPACINGS_M, VALIDATION_SNR_DBM,
};
