use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cost::CostEstimate;
use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::sequences::EulerAngles;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SpsaConfig {
    pub max_iterations: usize,
    pub perturbation_c: f64,
    pub alpha: f64,
    pub gamma: f64,
    pub stability_a: f64,
    pub calibration_samples: usize,
    /// Desired size of the first update along each coordinate, rad.
    pub target_first_step: f64,
    /// Skips calibration when set.
    pub learning_rate: Option<f64>,
}

impl Default for SpsaConfig {
    fn default() -> Self {
        Self {
            max_iterations: 100,
            perturbation_c: 0.2,
            alpha: 0.602,
            gamma: 0.101,
            stability_a: 0.0,
            calibration_samples: 25,
            target_first_step: std::f64::consts::TAU / 10.0,
            learning_rate: None,
        }
    }
}

impl SpsaConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0 < self.gamma && self.gamma < self.alpha && self.alpha <= 1.0) {
            return Err(Error::Config(format!(
                "need 0 < gamma < alpha <= 1, got gamma {} alpha {}",
                self.gamma, self.alpha
            )));
        }
        if !(self.perturbation_c > 0.0) || !(self.target_first_step > 0.0) || !(self.stability_a >= 0.0) {
            return Err(Error::Config("SPSA gains must be positive".into()));
        }
        match self.learning_rate {
            Some(a) if !(a > 0.0 && a.is_finite()) => Err(Error::Config(format!("learning rate {a} must be positive"))),
            None if self.calibration_samples == 0 => Err(Error::Config("calibration needs at least one sample".into())),
            _ => Ok(()),
        }
    }

    pub fn c_k(&self, k: usize) -> f64 {
        self.perturbation_c / ((k + 1) as f64).powf(self.gamma)
    }

    pub fn a_k(&self, a: f64, k: usize) -> f64 {
        a / ((k + 1) as f64 + self.stability_a).powf(self.alpha)
    }

    /// Objective calls made by one run.
    pub fn evaluation_budget(&self) -> usize {
        let cal = if self.learning_rate.is_some() {
            0
        } else {
            self.calibration_samples
        };
        2 * self.max_iterations + 2 * cal
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpsaRecord {
    pub k: usize,
    /// Iterate at which the two evaluations were made.
    pub params: Vec<f64>,
    pub cost_plus: f64,
    pub cost_minus: f64,
    pub step_norm: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpsaTrace {
    pub records: Vec<SpsaRecord>,
    pub final_params: Vec<f64>,
    /// Mean of the last iteration's two evaluations.
    pub final_cost: CostEstimate,
    pub learning_rate: f64,
    pub evaluations: usize,
}

impl SpsaTrace {
    pub fn final_angles(&self) -> Option<EulerAngles> {
        EulerAngles::from_slice(&self.final_params)
    }
}

fn rademacher(n: usize, rng: &mut RngStream) -> Vec<f64> {
    (0..n).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect()
}

fn shifted(x: &[f64], delta: &[f64], scale: f64) -> Vec<f64> {
    x.iter().zip(delta).map(|(xi, di)| xi + scale * di).collect()
}

struct Evaluator<'f, F> {
    objective: &'f mut F,
    streams: RngStream,
    calls: usize,
}

impl<F> Evaluator<'_, F>
where
    F: FnMut(&[f64], &mut RngStream) -> Result<CostEstimate>,
{
    fn pair(
        &mut self,
        x: &[f64],
        delta: &[f64],
        c: f64,
        stage: &'static str,
        iteration: usize,
        records: &[SpsaRecord],
    ) -> Result<(CostEstimate, CostEstimate)> {
        let eval = |sign: f64, this: &mut Self| -> Result<CostEstimate> {
            let mut stream = this.streams.derive(this.calls as u64);
            this.calls += 1;
            let v = (this.objective)(&shifted(x, delta, sign * c), &mut stream)?;
            if !v.value.is_finite() {
                return Err(Error::NonFiniteObjective {
                    stage,
                    iteration,
                    records: records.to_vec(),
                });
            }
            Ok(v)
        };
        let plus = eval(1.0, self)?;
        let minus = eval(-1.0, self)?;
        Ok((plus, minus))
    }
}

fn calibrate<F>(ev: &mut Evaluator<'_, F>, x0: &[f64], cfg: &SpsaConfig, rng: &mut RngStream) -> Result<f64>
where
    F: FnMut(&[f64], &mut RngStream) -> Result<CostEstimate>,
{
    let c0 = cfg.c_k(0);
    let mut total = 0.0;
    for s in 0..cfg.calibration_samples {
        let delta = rademacher(x0.len(), rng);
        let (p, m) = ev.pair(x0, &delta, c0, "calibration", s, &[])?;
        // every component of the estimate has this magnitude since |delta_i| = 1
        total += ((p.value - m.value) / (2.0 * c0)).abs();
    }
    let mean = total / cfg.calibration_samples as f64;
    let scale = (1.0 + cfg.stability_a).powf(cfg.alpha);
    Ok(if mean < 1e-12 {
        cfg.target_first_step
    } else {
        cfg.target_first_step * scale / mean
    })
}

/// Learning rate `a` such that the expected first step is `target_first_step` per coordinate.
pub fn calibrate_learning_rate<F>(mut objective: F, x0: &[f64], cfg: &SpsaConfig, rng: &mut RngStream) -> Result<f64>
where
    F: FnMut(&[f64], &mut RngStream) -> Result<CostEstimate>,
{
    cfg.validate()?;
    let streams = rng.fork();
    let mut ev = Evaluator {
        objective: &mut objective,
        streams,
        calls: 0,
    };
    calibrate(&mut ev, x0, cfg, rng)
}

/// Minimises `objective` from `x0`. Each objective call gets its own random stream.
pub fn spsa_minimize<F>(mut objective: F, x0: &[f64], cfg: &SpsaConfig, rng: &mut RngStream) -> Result<SpsaTrace>
where
    F: FnMut(&[f64], &mut RngStream) -> Result<CostEstimate>,
{
    cfg.validate()?;
    if x0.is_empty() || x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::Config("starting point must be non-empty and finite".into()));
    }
    let streams = rng.fork();
    let mut ev = Evaluator {
        objective: &mut objective,
        streams,
        calls: 0,
    };
    let a = match cfg.learning_rate {
        Some(a) => a,
        None => calibrate(&mut ev, x0, cfg, rng)?,
    };

    let mut x = x0.to_vec();
    let mut records = Vec::with_capacity(cfg.max_iterations);
    let mut last: Option<(CostEstimate, CostEstimate)> = None;
    for k in 0..cfg.max_iterations {
        let ck = cfg.c_k(k);
        let ak = cfg.a_k(a, k);
        let delta = rademacher(x.len(), rng);
        let (p, m) = ev.pair(&x, &delta, ck, "iteration", k, &records)?;
        let diff = (p.value - m.value) / (2.0 * ck);
        let step: Vec<f64> = delta.iter().map(|d| ak * diff / d).collect();
        let step_norm = step.iter().map(|s| s * s).sum::<f64>().sqrt();
        records.push(SpsaRecord {
            k,
            params: x.clone(),
            cost_plus: p.value,
            cost_minus: m.value,
            step_norm,
        });
        for (xi, si) in x.iter_mut().zip(&step) {
            *xi -= si;
        }
        last = Some((p, m));
    }

    let final_cost = match last {
        Some((p, m)) => CostEstimate {
            value: 0.5 * (p.value + m.value),
            shots_per_correlator: p.shots_per_correlator,
            std_error: 0.5 * (p.std_error.powi(2) + m.std_error.powi(2)).sqrt(),
        },
        None => {
            let mut stream = ev.streams.derive(ev.calls as u64);
            ev.calls += 1;
            (ev.objective)(&x, &mut stream)?
        }
    };
    Ok(SpsaTrace {
        records,
        final_params: x,
        final_cost,
        learning_rate: a,
        evaluations: ev.calls,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::cell::Cell;

    fn quadratic(target: [f64; 3]) -> impl FnMut(&[f64], &mut RngStream) -> Result<CostEstimate> {
        move |x: &[f64], _: &mut RngStream| {
            Ok(CostEstimate::exact(
                x.iter().zip(target).map(|(a, b)| (a - b).powi(2)).sum(),
            ))
        }
    }

    fn distance(x: &[f64], y: &[f64]) -> f64 {
        x.iter().zip(y).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt()
    }

    #[test]
    fn converges_on_quadratic() {
        let target = [0.5, -0.3, 0.8];
        for seed in 0..5 {
            let trace = spsa_minimize(
                quadratic(target),
                &[0.0; 3],
                &SpsaConfig::default(),
                &mut RngStream::new(seed),
            )
            .unwrap();
            let d = distance(&trace.final_params, &target);
            assert!(d < 0.05, "seed {seed}: distance {d}");
        }
        // a 0.1 rad first step cannot cover unit distance in 100 iterations
        let timid = SpsaConfig {
            target_first_step: 0.1,
            ..SpsaConfig::default()
        };
        let trace = spsa_minimize(quadratic(target), &[0.0; 3], &timid, &mut RngStream::new(0)).unwrap();
        assert!(distance(&trace.final_params, &target) > 0.05);
    }

    #[test]
    fn constant_objective_never_moves() {
        let trace = spsa_minimize(
            |_: &[f64], _: &mut RngStream| Ok(CostEstimate::exact(0.3)),
            &[0.1, 0.2, 0.3],
            &SpsaConfig::default(),
            &mut RngStream::new(3),
        )
        .unwrap();
        assert_eq!(trace.final_params, vec![0.1, 0.2, 0.3]);
        assert!(trace.records.iter().all(|r| r.step_norm == 0.0));
        assert_eq!(trace.learning_rate, SpsaConfig::default().target_first_step);
    }

    #[test]
    fn gain_schedule_at_zero() {
        let cfg = SpsaConfig::default();
        assert_eq!(cfg.c_k(0), 0.2);
        assert_eq!(cfg.a_k(0.7, 0), 0.7);
    }

    #[test]
    fn calibration_closed_form() {
        // J = g (x0 + x1 + x2): |J+ - J-| / 2c = g |sum delta| which is g or 3g;
        // use a single coordinate so the magnitude is always g
        let g = 2.5;
        let cfg = SpsaConfig {
            stability_a: 3.0,
            ..SpsaConfig::default()
        };
        let a = calibrate_learning_rate(
            |x: &[f64], _: &mut RngStream| Ok(CostEstimate::exact(g * x[0])),
            &[0.0],
            &cfg,
            &mut RngStream::new(0),
        )
        .unwrap();
        let expected = cfg.target_first_step * 4f64.powf(0.602) / g;
        assert!((a - expected).abs() < 1e-12);
    }

    #[test]
    fn budget_is_exact() {
        let calls = Cell::new(0usize);
        let cfg = SpsaConfig::default();
        let trace = spsa_minimize(
            |x: &[f64], _: &mut RngStream| {
                calls.set(calls.get() + 1);
                Ok(CostEstimate::exact(x.iter().map(|v| v.sin().powi(2)).sum()))
            },
            &[0.4; 3],
            &cfg,
            &mut RngStream::new(9),
        )
        .unwrap();
        assert_eq!(calls.get(), 250);
        assert_eq!(trace.evaluations, 250);
        assert_eq!(cfg.evaluation_budget(), 250);
        assert_eq!(trace.records.len(), 100);
    }

    #[test]
    fn identical_seeds_identical_traces() {
        let noisy = |x: &[f64], rng: &mut RngStream| {
            let n: f64 = rng.random::<f64>() - 0.5;
            Ok(CostEstimate::exact(x.iter().map(|v| v * v).sum::<f64>() + 0.01 * n))
        };
        let run = |seed| {
            spsa_minimize(
                noisy,
                &[1.0, -1.0, 0.5],
                &SpsaConfig::default(),
                &mut RngStream::new(seed),
            )
            .unwrap()
        };
        let a = serde_json::to_string(&run(4)).unwrap();
        let b = serde_json::to_string(&run(4)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, serde_json::to_string(&run(5)).unwrap());
    }

    #[test]
    fn non_finite_objective_aborts_with_trace() {
        let mut n = 0;
        let err = spsa_minimize(
            |_: &[f64], _: &mut RngStream| {
                n += 1;
                Ok(CostEstimate::exact(if n > 60 { f64::NAN } else { 0.5 }))
            },
            &[0.0; 3],
            &SpsaConfig::default(),
            &mut RngStream::new(1),
        )
        .unwrap_err();
        match err {
            Error::NonFiniteObjective {
                stage,
                iteration,
                records,
            } => {
                assert_eq!(stage, "iteration");
                assert_eq!(iteration, 5);
                assert_eq!(records.len(), 5);
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn rejects_bad_exponents() {
        let cfg = SpsaConfig {
            gamma: 0.7,
            ..SpsaConfig::default()
        };
        assert!(cfg.validate().is_err());
    }
}
