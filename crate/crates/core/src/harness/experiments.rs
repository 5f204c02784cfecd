use serde::{Deserialize, Serialize};

use super::config::{noise_for_register, ExperimentConfig, ExperimentKind};
use super::scenario::{replicated_fidelity, Scenario, Summary};
use crate::error::{Error, Result};
use crate::noise::{reference_decay, NoiseModel};
use crate::optimizer::{robustness_sweep, spsa_minimize, SpsaTrace};
use crate::rng::RngStream;
use crate::sequences::{DDKind, EulerAngles};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub sequence: String,
    pub sweep_value: f64,
    pub lower: f64,
    pub median: f64,
    pub upper: f64,
    /// Learned LDD angles, when the row is an LDD row.
    pub params: Option<Vec<f64>>,
}

impl ResultRow {
    fn new(sequence: &str, sweep_value: f64, s: &Summary, params: Option<Vec<f64>>) -> Self {
        Self {
            sequence: sequence.to_string(),
            sweep_value,
            lower: s.lower,
            median: s.median,
            upper: s.upper,
            params,
        }
    }

    fn flat(sequence: &str, sweep_value: f64, value: f64) -> Self {
        Self {
            sequence: sequence.to_string(),
            sweep_value,
            lower: value,
            median: value,
            upper: value,
            params: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LearnedParams {
    pub sweep_value: f64,
    /// `None` when all decoupled qubits share the angles.
    pub qubit: Option<usize>,
    pub angles: EulerAngles,
    pub final_cost: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LddTrace {
    pub sweep_value: f64,
    pub trace: SpsaTrace,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub rank: usize,
    pub label: String,
    pub fidelity_mcm: f64,
    pub fidelity_delay: f64,
    pub gap: f64,
    pub flagged: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub experiment: ExperimentKind,
    /// Meaning of `sweep_value`.
    pub sweep_label: String,
    pub rows: Vec<ResultRow>,
    pub learned: Vec<LearnedParams>,
    pub traces: Vec<LddTrace>,
    pub ranking: Vec<ScanRow>,
    /// Idle windows too short for their sequence, left as delays.
    pub skipped_windows: usize,
}

impl ExperimentResult {
    fn empty(experiment: ExperimentKind, sweep_label: &str) -> Self {
        Self {
            experiment,
            sweep_label: sweep_label.to_string(),
            rows: Vec::new(),
            learned: Vec::new(),
            traces: Vec::new(),
            ranking: Vec::new(),
            skipped_windows: 0,
        }
    }

    pub fn row(&self, sequence: &str, sweep_value: f64) -> Option<&ResultRow> {
        self.rows
            .iter()
            .find(|r| r.sequence == sequence && r.sweep_value == sweep_value)
    }
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    match cfg.experiment {
        ExperimentKind::Mcm => run_mcm_experiment(cfg),
        ExperimentKind::Deep => run_deep_circuit_experiment(cfg),
        ExperimentKind::Scan => run_noisy_mcm_scan(cfg),
        ExperimentKind::Robustness => run_robustness_study(cfg),
    }
}

const LEARN: u64 = 1;
const EVALUATE: u64 = 2;

/// SPSA from the origin on the scenario's LDD angles.
pub fn learn_ldd(
    scenario: &Scenario,
    noise: &NoiseModel,
    cfg: &ExperimentConfig,
    rng: &mut RngStream,
) -> Result<SpsaTrace> {
    let x0 = vec![0.0; scenario.ldd_dimension(&cfg.dd)];
    let shots = cfg.shots();
    spsa_minimize(
        |x: &[f64], stream: &mut RngStream| {
            let (schedule, _) = scenario.filled(DDKind::Ldd, x, &cfg.dd, &cfg.durations)?;
            scenario.cost(&schedule, noise, shots, stream)
        },
        &x0,
        &cfg.spsa,
        rng,
    )
}

fn record_learned(out: &mut ExperimentResult, sweep_value: f64, trace: SpsaTrace, per_qubit: Option<Vec<usize>>) {
    let triples: Vec<EulerAngles> = trace
        .final_params
        .chunks(3)
        .filter_map(EulerAngles::from_slice)
        .collect();
    let qubits: Vec<Option<usize>> = match per_qubit {
        Some(q) if q.len() == triples.len() => q.into_iter().map(Some).collect(),
        _ => vec![None; triples.len()],
    };
    for (angles, qubit) in triples.into_iter().zip(qubits) {
        out.learned.push(LearnedParams {
            sweep_value,
            qubit,
            angles,
            final_cost: trace.final_cost.value,
        });
    }
    out.traces.push(LddTrace { sweep_value, trace });
}

/// Every configured sequence on one scenario. `delay_variant` stands in for the
/// `Delay` kind; without one that kind is skipped.
fn sweep_point(
    cfg: &ExperimentConfig,
    scenario: &Scenario,
    delay_variant: Option<&Scenario>,
    noise: &NoiseModel,
    sweep_value: f64,
    rng: &RngStream,
    out: &mut ExperimentResult,
) -> Result<()> {
    let shots = cfg.shots();
    for kind in &cfg.sequences {
        let tag = DDKind::ALL.iter().position(|k| k == kind).expect("known kind") as u64;
        let eval_rng = rng.derive_path(&[tag, EVALUATE]);
        let (summary, params) = match kind {
            DDKind::Delay => match delay_variant {
                Some(d) => (
                    replicated_fidelity(d, &d.schedule, noise, shots, cfg.replicas, &eval_rng)?,
                    None,
                ),
                None => continue,
            },
            DDKind::None => (
                replicated_fidelity(scenario, &scenario.schedule, noise, shots, cfg.replicas, &eval_rng)?,
                None,
            ),
            DDKind::Ldd => {
                let trace = learn_ldd(scenario, noise, cfg, &mut rng.derive_path(&[tag, LEARN]))?;
                let x = trace.final_params.clone();
                let (schedule, skipped) = scenario.filled(DDKind::Ldd, &x, &cfg.dd, &cfg.durations)?;
                out.skipped_windows += skipped;
                let s = replicated_fidelity(scenario, &schedule, noise, shots, cfg.replicas, &eval_rng)?;
                let qubits = cfg.dd.per_qubit_ldd.then(|| scenario.decoupled_qubits());
                record_learned(out, sweep_value, trace, qubits);
                (s, Some(x))
            }
            _ => {
                let (schedule, skipped) = scenario.filled(*kind, &[], &cfg.dd, &cfg.durations)?;
                out.skipped_windows += skipped;
                (
                    replicated_fidelity(scenario, &schedule, noise, shots, cfg.replicas, &eval_rng)?,
                    None,
                )
            }
        };
        out.rows
            .push(ResultRow::new(kind.name(), sweep_value, &summary, params));
    }
    Ok(())
}

/// Bell pair on `(q0, q2)` while `q1` is measured `r` times.
pub fn run_mcm_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let noise = noise_for_register(&cfg.noise, 3)?;
    let root = RngStream::new(cfg.seed);
    let mcm_dt = noise.mcm.duration_dt;
    let mut out = ExperimentResult::empty(ExperimentKind::Mcm, "r");
    let pair_mean = |f: fn(&crate::noise::QubitNoiseParams) -> f64| 0.5 * (f(&noise.qubits[0]) + f(&noise.qubits[2]));
    let t1 = pair_mean(|p| p.t1);
    let t2 = pair_mean(|p| p.t2);
    for (idx, &r) in cfg.r_values.iter().enumerate() {
        let sweep = r as f64;
        let scenario = Scenario::mcm(r, mcm_dt, true, &cfg.durations)?;
        let delay = Scenario::mcm(r, mcm_dt, false, &cfg.durations)?;
        sweep_point(
            cfg,
            &scenario,
            Some(&delay),
            &noise,
            sweep,
            &root.derive(idx as u64),
            &mut out,
        )?;

        let t_ns = (r as u64 * mcm_dt) as f64 * cfg.dt_ns;
        let spam = cfg.reference.spam;
        out.rows.push(ResultRow::flat(
            "t1_reference",
            sweep,
            reference_decay(t_ns, t1, f64::INFINITY, spam),
        ));
        out.rows.push(ResultRow::flat(
            "t2_reference",
            sweep,
            reference_decay(t_ns, f64::INFINITY, t2, spam),
        ));
        out.rows.push(ResultRow::flat("spam_reference", sweep, spam));
    }
    Ok(out)
}

/// Bell pair between the ends of a chain with `i` intermediate qubits.
pub fn run_deep_circuit_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let root = RngStream::new(cfg.seed);
    let mut out = ExperimentResult::empty(ExperimentKind::Deep, "intermediate_qubits");
    for (idx, &i) in cfg.chain_lengths.iter().enumerate() {
        let scenario = Scenario::ladder(i, &cfg.durations)?;
        let noise = noise_for_register(&cfg.noise, scenario.n_qubits())?;
        sweep_point(
            cfg,
            &scenario,
            None,
            &noise,
            i as f64,
            &root.derive(idx as u64),
            &mut out,
        )?;
    }
    Ok(out)
}

/// One MCM against an equal delay for every candidate triple, ranked by the fidelity gap.
pub fn run_noisy_mcm_scan(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let root = RngStream::new(cfg.seed);
    let shots = cfg.shots();
    let mut out = ExperimentResult::empty(ExperimentKind::Scan, "candidate");
    let mut gaps = Vec::with_capacity(cfg.scan_candidates.len());
    for (idx, cand) in cfg.scan_candidates.iter().enumerate() {
        let noise = noise_for_register(&cand.noise, 3)?;
        let mcm_dt = noise.mcm.duration_dt;
        let rng = root.derive(idx as u64);
        let with_mcm = Scenario::mcm(1, mcm_dt, true, &cfg.durations)?;
        let with_delay = Scenario::mcm(1, mcm_dt, false, &cfg.durations)?;
        let m = replicated_fidelity(
            &with_mcm,
            &with_mcm.schedule,
            &noise,
            shots,
            cfg.replicas,
            &rng.derive(0),
        )?;
        let d = replicated_fidelity(
            &with_delay,
            &with_delay.schedule,
            &noise,
            shots,
            cfg.replicas,
            &rng.derive(1),
        )?;
        out.rows.push(ResultRow::new("mcm", idx as f64, &m, None));
        out.rows.push(ResultRow::new("delay", idx as f64, &d, None));
        gaps.push((idx, m.median, d.median));
    }
    gaps.sort_by(|a, b| (b.2 - b.1).total_cmp(&(a.2 - a.1)).then(a.0.cmp(&b.0)));
    out.ranking = gaps
        .into_iter()
        .enumerate()
        .map(|(rank, (idx, fm, fd))| ScanRow {
            rank: rank + 1,
            label: cfg.scan_candidates[idx].label.clone(),
            fidelity_mcm: fm,
            fidelity_delay: fd,
            gap: fd - fm,
            flagged: rank == 0,
        })
        .collect();
    Ok(out)
}

/// Learn LDD at a fixed MCM count, then perturb the optimum with growing norm.
pub fn run_robustness_study(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    if cfg.dd.per_qubit_ldd {
        return Err(Error::Config(
            "the robustness study perturbs one shared angle triple".into(),
        ));
    }
    let noise = noise_for_register(&cfg.noise, 3)?;
    let root = RngStream::new(cfg.seed);
    let scenario = Scenario::mcm(cfg.robustness_r, noise.mcm.duration_dt, true, &cfg.durations)?;
    let mut out = ExperimentResult::empty(ExperimentKind::Robustness, "epsilon");
    let trace = learn_ldd(&scenario, &noise, cfg, &mut root.derive(LEARN))?;
    let x_star = trace.final_angles().expect("three angles");
    let shots = cfg.shots();
    let (reference, rows) = robustness_sweep(
        |x: &EulerAngles, stream: &mut RngStream| {
            let (schedule, _) = scenario.filled(DDKind::Ldd, &x.to_array(), &cfg.dd, &cfg.durations)?;
            Ok(1.0 - scenario.cost(&schedule, &noise, shots, stream)?.value)
        },
        &x_star,
        &cfg.epsilons,
        cfg.samples_per_epsilon,
        &mut root.derive(EVALUATE),
    )?;
    for row in rows {
        let s = Summary {
            lower: row.lower,
            median: row.median,
            upper: row.upper,
        };
        out.rows
            .push(ResultRow::new("ldd", row.epsilon, &s, Some(x_star.to_array().to_vec())));
        out.rows.push(ResultRow::flat("ldd_optimum", row.epsilon, reference));
    }
    record_learned(&mut out, cfg.robustness_r as f64, trace, None);
    Ok(out)
}
