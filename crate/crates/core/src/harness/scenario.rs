use serde::{Deserialize, Serialize};

use super::config::DdSettings;
use crate::cost::{bell_cost, CostEstimate};
use crate::error::{Error, Result};
use crate::execute::simulate;
use crate::noise::NoiseModel;
use crate::optimizer::quartiles;
use crate::rng::RngStream;
use crate::sequences::{
    alap_schedule, insert_dd, Circuit, DDKind, EulerAngles, GateDurations, IdleWindow, TimedSchedule,
};

/// Bell preparation on `(q0, q2)` followed by `r` measurements of `q1`, or
/// equally long delays when `measure` is false.
pub fn mcm_circuit(r: usize, mcm_dt: u64, measure: bool) -> Circuit {
    let mut c = Circuit::new(3);
    c.h(0).cx(0, 2).barrier();
    for _ in 0..r {
        if measure {
            c.measure(1, mcm_dt);
        } else {
            c.delay(1, mcm_dt);
        }
    }
    c.barrier();
    c
}

/// Bell pair on `(q0, q1)` moved down a chain with `intermediate` extra qubits,
/// two CNOTs per hop since the qubit ahead is still in `|0>`.
pub fn ladder_circuit(intermediate: usize) -> Circuit {
    let mut c = Circuit::new(intermediate + 2);
    c.h(0).cx(0, 1);
    for k in 1..=intermediate {
        c.cx(k, k + 1).cx(k + 1, k);
    }
    c
}

/// A scheduled circuit, the idle windows open to decoupling, and the Bell pair.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub schedule: TimedSchedule,
    pub windows: Vec<IdleWindow>,
    pub pair: (usize, usize),
}

impl Scenario {
    pub fn new(circuit: &Circuit, dur: &GateDurations, pair: (usize, usize)) -> Result<Self> {
        let (schedule, windows) = alap_schedule(circuit, dur)?;
        Ok(Self {
            schedule,
            windows: windows.into_iter().filter(|w| !w.leading).collect(),
            pair,
        })
    }

    pub fn mcm(r: usize, mcm_dt: u64, measure: bool, dur: &GateDurations) -> Result<Self> {
        Self::new(&mcm_circuit(r, mcm_dt, measure), dur, (0, 2))
    }

    pub fn ladder(intermediate: usize, dur: &GateDurations) -> Result<Self> {
        Self::new(&ladder_circuit(intermediate), dur, (0, intermediate + 1))
    }

    pub fn n_qubits(&self) -> usize {
        self.schedule.n_qubits()
    }

    /// Qubits owning at least one window, ascending.
    pub fn decoupled_qubits(&self) -> Vec<usize> {
        let mut q: Vec<usize> = self.windows.iter().map(|w| w.qubit).collect();
        q.sort_unstable();
        q.dedup();
        q
    }

    /// Length of the LDD parameter vector.
    pub fn ldd_dimension(&self, dd: &DdSettings) -> usize {
        if dd.per_qubit_ldd {
            3 * self.decoupled_qubits().len().max(1)
        } else {
            3
        }
    }

    /// Schedule with every window filled by `kind`. LDD angles come from `params`,
    /// either one triple or one per decoupled qubit.
    pub fn filled(
        &self,
        kind: DDKind,
        params: &[f64],
        dd: &DdSettings,
        dur: &GateDurations,
    ) -> Result<(TimedSchedule, usize)> {
        if kind != DDKind::Ldd {
            let out = insert_dd(&self.schedule, &self.windows, &dd.spec(kind, None), dur)?;
            return Ok((out.schedule, out.skipped.len()));
        }
        let qubits = self.decoupled_qubits();
        let triples: Vec<EulerAngles> = params.chunks(3).filter_map(EulerAngles::from_slice).collect();
        if triples.is_empty() || (triples.len() != 1 && triples.len() != qubits.len()) {
            return Err(Error::Config(format!(
                "{} LDD parameters for {} decoupled qubits",
                params.len(),
                qubits.len()
            )));
        }
        if triples.len() == 1 {
            let out = insert_dd(&self.schedule, &self.windows, &dd.spec(kind, Some(triples[0])), dur)?;
            return Ok((out.schedule, out.skipped.len()));
        }
        let mut schedule = self.schedule.clone();
        let mut skipped = 0;
        for (q, angles) in qubits.iter().zip(&triples) {
            let mine: Vec<IdleWindow> = self.windows.iter().filter(|w| w.qubit == *q).copied().collect();
            let out = insert_dd(&schedule, &mine, &dd.spec(kind, Some(*angles)), dur)?;
            schedule = out.schedule;
            skipped += out.skipped.len();
        }
        Ok((schedule, skipped))
    }

    pub fn cost(
        &self,
        schedule: &TimedSchedule,
        noise: &NoiseModel,
        shots: Option<u32>,
        rng: &mut RngStream,
    ) -> Result<CostEstimate> {
        let rho = simulate(schedule, noise, &[self.pair.0, self.pair.1])?;
        bell_cost(&rho, 0, 1, shots, rng)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub lower: f64,
    pub median: f64,
    pub upper: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Result<Self> {
        let (lower, median, upper) =
            quartiles(values).ok_or_else(|| Error::InvalidState("no finite values to summarise".into()))?;
        Ok(Self { lower, median, upper })
    }
}

/// Bell fidelity `1 - J` over `replicas` independent estimates.
pub fn replicated_fidelity(
    scenario: &Scenario,
    schedule: &TimedSchedule,
    noise: &NoiseModel,
    shots: Option<u32>,
    replicas: usize,
    rng: &RngStream,
) -> Result<Summary> {
    let rho = simulate(schedule, noise, &[scenario.pair.0, scenario.pair.1])?;
    let values: Vec<f64> = (0..replicas)
        .map(|k| {
            let mut stream = rng.derive(k as u64);
            bell_cost(&rho, 0, 1, shots, &mut stream).map(|c| 1.0 - c.value)
        })
        .collect::<Result<_>>()?;
    Summary::of(&values)
}
