//! Random instance generation and p_cor experiments.

mod experiment;
mod generator;

pub use experiment::{
    mean_p_cor, run_trial, run_trials, sweep, write_csv, Panel, SweepAxes, SweepCell, TrialConfig,
    TrialOptions, TrialRecord, COMPLETE_SIGMA_D, CSV_HEADER, CSV_SCHEMA_VERSION, FULL_SIZES,
    GRID_SIGMA_D,
};
pub use generator::{generate, trial_seed, GeneratorConfig, Topology};
