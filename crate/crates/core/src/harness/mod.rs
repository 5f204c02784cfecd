//! End-to-end experiments: configuration, circuits, runs and result files.

mod config;
mod emit;
mod experiments;
mod scenario;

pub use config::{noise_for_register, DdSettings, ExperimentConfig, ExperimentKind, ReferenceSettings, ScanCandidate};
pub use emit::{emit_results, params_csv, plot_svg, ranking_csv, results_csv, VERSION};
pub use experiments::{
    learn_ldd, run_deep_circuit_experiment, run_experiment, run_mcm_experiment, run_noisy_mcm_scan,
    run_robustness_study, ExperimentResult, LddTrace, LearnedParams, ResultRow, ScanRow,
};
pub use scenario::{ladder_circuit, mcm_circuit, replicated_fidelity, Scenario, Summary};

#[cfg(test)]
mod tests;
