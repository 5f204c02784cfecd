use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::sequences::EulerAngles;

pub const DEFAULT_SAMPLES_PER_EPSILON: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerturbationSample {
    pub epsilon: f64,
    pub delta: [f64; 3],
}

/// Uniform draw from `[-2pi, 2pi]^3`, rescaled to norm `epsilon`.
pub fn sample_perturbation(epsilon: f64, rng: &mut RngStream) -> Result<PerturbationSample> {
    if !(epsilon >= 0.0 && epsilon.is_finite()) {
        return Err(Error::Config(format!(
            "perturbation norm {epsilon} must be non-negative"
        )));
    }
    loop {
        let raw: [f64; 3] = std::array::from_fn(|_| rng.random_range(-2.0 * PI..=2.0 * PI));
        let norm = raw.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            return Ok(PerturbationSample {
                epsilon,
                delta: raw.map(|v| v * epsilon / norm),
            });
        }
    }
}

pub fn perturb_params(x: &EulerAngles, epsilon: f64, rng: &mut RngStream) -> Result<EulerAngles> {
    let d = sample_perturbation(epsilon, rng)?.delta;
    Ok(EulerAngles::new(x.theta + d[0], x.phi + d[1], x.lambda + d[2]))
}

/// `(lower quartile, median, upper quartile)` with linear interpolation between order statistics.
pub fn quartiles(values: &[f64]) -> Option<(f64, f64, f64)> {
    if values.is_empty() || values.iter().any(|v| v.is_nan()) {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let at = |q: f64| {
        let pos = q * (v.len() - 1) as f64;
        let lo = pos.floor() as usize;
        let hi = pos.ceil() as usize;
        v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
    };
    Some((at(0.25), at(0.5), at(0.75)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RobustnessRow {
    pub epsilon: f64,
    pub lower: f64,
    pub median: f64,
    pub upper: f64,
    pub samples: Vec<f64>,
}

/// Fidelity at `samples_per_eps` random perturbations of `x_star` per norm.
///
/// Every evaluation receives the same random stream, so shot noise is common to
/// all points and the zero-norm row reproduces the unperturbed value exactly.
/// Returns the unperturbed fidelity and one row per norm.
pub fn robustness_sweep<F>(
    mut fidelity: F,
    x_star: &EulerAngles,
    epsilons: &[f64],
    samples_per_eps: usize,
    rng: &mut RngStream,
) -> Result<(f64, Vec<RobustnessRow>)>
where
    F: FnMut(&EulerAngles, &mut RngStream) -> Result<f64>,
{
    if samples_per_eps == 0 {
        return Err(Error::Config("need at least one sample per norm".into()));
    }
    if epsilons.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Config("perturbation norms must be sorted".into()));
    }
    let eval_stream = rng.fork();
    let draws = rng.fork();
    let reference = fidelity(x_star, &mut eval_stream.clone())?;
    let mut rows = Vec::with_capacity(epsilons.len());
    for (e, &eps) in epsilons.iter().enumerate() {
        let mut samples = Vec::with_capacity(samples_per_eps);
        for s in 0..samples_per_eps {
            let mut draw = draws.derive_path(&[e as u64, s as u64]);
            let x = perturb_params(x_star, eps, &mut draw)?;
            samples.push(fidelity(&x, &mut eval_stream.clone())?);
        }
        let (lower, median, upper) =
            quartiles(&samples).ok_or_else(|| Error::InvalidState("non-finite fidelity in sweep".into()))?;
        rows.push(RobustnessRow {
            epsilon: eps,
            lower,
            median,
            upper,
            samples,
        });
    }
    Ok((reference, rows))
}
