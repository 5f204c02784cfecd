//! SPSA minimisation of noisy objectives and the perturbation-robustness sweep.

mod robustness;
mod spsa;

pub use robustness::{
    perturb_params, quartiles, robustness_sweep, sample_perturbation, PerturbationSample, RobustnessRow,
    DEFAULT_SAMPLES_PER_EPSILON,
};
pub use spsa::{calibrate_learning_rate, spsa_minimize, SpsaConfig, SpsaRecord, SpsaTrace};
