//! Monte Carlo studies over the solver pipeline, their configuration, and
//! flat-file outputs.

pub mod config;
pub mod output;
pub mod studies;

pub use config::{ExperimentConfig, DEFAULT_SEED};
pub use output::{
    emit_deviation, emit_gap, emit_lipapprox, emit_spacings, emit_sweep, write_manifest,
};
pub use studies::{
    convergence_sweep, deviation_study, lip_approx_study, scheme_gap_study, spacing_study,
    DeviationOutcome, GapOutcome, LipOutcome, SpacingOutcome, SweepOutcome,
};
