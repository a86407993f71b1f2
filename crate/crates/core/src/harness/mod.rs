//! Configuration, experiment sweeps, verification suites and output.

pub mod config;
pub mod experiment;
pub mod output;
pub mod verify;

pub use config::{parse_sequence_arg, ExperimentConfig, Schedule};
pub use experiment::{
    run_coefficients, run_energy_sweep, run_paircorr_experiment, run_variance_experiment, CoeffRow,
    EnergyRow, ExperimentRow, PairCorrRow, SummaryRow, VarianceRun,
};
pub use verify::{run_verification_suite, Suite, VerificationReport, VerifyOptions};
