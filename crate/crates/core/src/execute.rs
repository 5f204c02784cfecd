//! Runs a timed schedule through the noise model.
//!
//! Qubits are held as a product of clusters that merge when a multi-qubit
//! gate joins them. A qubit that is not observed is traced out right after
//! its last multi-qubit gate: nothing later done to it can reach the other
//! qubits, so the reduced state of the observed qubits stays exact while the
//! live register stays small.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::noise::{noisy_gate, segment_superop, superop_to_channel, ExtraRates, NoiseModel};
use crate::sequences::{Instruction, NativeGate, ScheduledOp, TimedSchedule};
use crate::simcore::gates::{self, CMatrix};
use crate::simcore::{Complex64, DensityMatrix, KrausChannel};

/// Extra rates on one qubit over `[start, end)`, times in dt.
#[derive(Clone, Copy, Debug)]
struct Overlay {
    start: f64,
    end: f64,
    rates: ExtraRates,
}

type PieceKey = Vec<[u64; 3]>;

struct Cluster {
    qubits: Vec<usize>,
    state: DensityMatrix,
}

struct Register {
    clusters: Vec<Cluster>,
}

impl Register {
    fn locate(&self, q: usize) -> Option<(usize, usize)> {
        self.clusters
            .iter()
            .enumerate()
            .find_map(|(c, cl)| cl.qubits.iter().position(|&x| x == q).map(|l| (c, l)))
    }

    /// Puts all of `qs` in one cluster and returns it with their local indices.
    fn join(&mut self, qs: &[usize]) -> Result<(usize, Vec<usize>)> {
        let mut ids: Vec<usize> = Vec::new();
        for &q in qs {
            let (c, _) = self
                .locate(q)
                .ok_or_else(|| Error::Schedule(format!("qubit {q} is not live")))?;
            if !ids.contains(&c) {
                ids.push(c);
            }
        }
        ids.sort_unstable();
        let first = ids[0];
        for &c in ids[1..].iter().rev() {
            let other = self.clusters.remove(c);
            let host = &mut self.clusters[first];
            host.state = host.state.tensor(&other.state)?;
            host.qubits.extend(other.qubits);
        }
        let host = &self.clusters[first];
        let local = qs
            .iter()
            .map(|q| host.qubits.iter().position(|x| x == q).expect("joined"))
            .collect();
        Ok((first, local))
    }

    fn trace_out(&mut self, q: usize) -> Result<()> {
        let (c, l) = self.locate(q).expect("live qubit");
        if self.clusters[c].qubits.len() == 1 {
            self.clusters.remove(c);
        } else {
            let cl = &mut self.clusters[c];
            cl.state = cl.state.partial_trace(l)?;
            cl.qubits.remove(l);
        }
        Ok(())
    }
}

/// Schedule executor with a per-run channel cache.
pub struct Executor<'a> {
    noise: &'a NoiseModel,
    overlays: Vec<Vec<Overlay>>,
    cache: HashMap<(usize, PieceKey), Option<KrausChannel>>,
}

impl<'a> Executor<'a> {
    pub fn new(schedule: &TimedSchedule, noise: &'a NoiseModel) -> Result<Self> {
        noise.validate()?;
        let n = schedule.n_qubits();
        if noise.qubits.len() < n {
            return Err(Error::Config(format!(
                "noise model covers {} qubits, schedule has {n}",
                noise.qubits.len()
            )));
        }
        let mut overlays = vec![Vec::new(); n];
        if !noise.mcm.is_quiet() {
            for op in schedule.ops() {
                if op.instruction != Instruction::Measure || op.duration_dt == 0 {
                    continue;
                }
                let mut spec = noise.mcm;
                spec.duration_dt = op.duration_dt;
                let rates = spec.drive_rates(noise.dt_ns);
                let m = op.qubits[0];
                let start = op.start_dt as f64;
                let end = start + spec.drive_dt();
                for nb in [m.wrapping_sub(1), m + 1] {
                    if nb < n && !op.qubits.contains(&nb) {
                        overlays[nb].push(Overlay { start, end, rates });
                    }
                }
            }
        }
        Ok(Self {
            noise,
            overlays,
            cache: HashMap::new(),
        })
    }

    /// Free-evolution channel for qubit `q` over `[a, b)` in dt, `None` if trivial.
    fn interval(&mut self, q: usize, a: f64, b: f64) -> Result<Option<KrausChannel>> {
        if b <= a {
            return Ok(None);
        }
        let mut cuts = vec![a, b];
        for o in &self.overlays[q] {
            for t in [o.start, o.end] {
                if t > a && t < b {
                    cuts.push(t);
                }
            }
        }
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let pieces: Vec<(f64, ExtraRates)> = cuts
            .windows(2)
            .map(|w| {
                let mid = 0.5 * (w[0] + w[1]);
                let rates = self.overlays[q].iter().filter(|o| o.start <= mid && mid < o.end).fold(
                    ExtraRates::default(),
                    |acc, o| ExtraRates {
                        z_rate: acc.z_rate + o.rates.z_rate,
                        dephasing_rate: acc.dephasing_rate + o.rates.dephasing_rate,
                    },
                );
                (w[1] - w[0], rates)
            })
            .collect();
        let key: PieceKey = pieces
            .iter()
            .map(|(len, r)| [len.to_bits(), r.z_rate.to_bits(), r.dephasing_rate.to_bits()])
            .collect();
        if let Some(ch) = self.cache.get(&(q, key.clone())) {
            return Ok(ch.clone());
        }
        let params = self.noise.qubit(q)?;
        let trivial = params.t1.is_infinite()
            && params.t2.is_infinite()
            && params.static_z_rate == 0.0
            && params.static_x_rate == 0.0
            && pieces.iter().all(|(_, r)| r.z_rate == 0.0 && r.dephasing_rate == 0.0);
        let ch = if trivial {
            None
        } else {
            let dt_ns = self.noise.dt_ns;
            let s = pieces.iter().fold(CMatrix::identity(4, 4), |acc, (len, r)| {
                segment_superop(params, len * dt_ns, *r, self.noise.trotter_slices) * acc
            });
            let mut ch = superop_to_channel(&s, (b - a).round() as u64)?;
            ch.targets = vec![0];
            Some(ch)
        };
        self.cache.insert((q, key), ch.clone());
        Ok(ch)
    }

    fn idle(&mut self, reg: &mut Register, q: usize, a: f64, b: f64) -> Result<()> {
        if let Some(ch) = self.interval(q, a, b)? {
            let (c, l) = reg.locate(q).expect("live qubit");
            let mut local = ch;
            local.targets = vec![l];
            reg.clusters[c].state.apply_channel_mut(&local)?;
        }
        Ok(())
    }

    fn unitary(&self, reg: &mut Register, op: &ScheduledOp, gate: NativeGate) -> Result<()> {
        let g = noisy_gate(&gate, &self.noise.pulse);
        let (c, local) = reg.join(&op.qubits)?;
        reg.clusters[c].state.apply_matrix_mut(&g.matrix(), &local)
    }

    /// Reduced state of `observed` (its `k`-th entry becomes qubit `k`) at the end of
    /// the schedule, starting from the all-zero state.
    pub fn run(&mut self, schedule: &TimedSchedule, observed: &[usize]) -> Result<DensityMatrix> {
        let n = schedule.n_qubits();
        if observed.is_empty() {
            return Err(Error::Shape("nothing observed".into()));
        }
        if let Some(q) = observed.iter().find(|&&q| q >= n) {
            return Err(Error::Shape(format!("observed qubit {q} outside {n}")));
        }
        let mut last_multi: Vec<Option<usize>> = vec![None; n];
        for (i, op) in schedule.ops().iter().enumerate() {
            if op.qubits.len() > 1 {
                for &q in &op.qubits {
                    last_multi[q] = Some(i);
                }
            }
        }
        let live_at_start: Vec<bool> = (0..n)
            .map(|q| observed.contains(&q) || last_multi[q].is_some())
            .collect();
        let mut reg = Register {
            clusters: (0..n)
                .filter(|&q| live_at_start[q])
                .map(|q| {
                    Ok(Cluster {
                        qubits: vec![q],
                        state: DensityMatrix::ground_state(1)?,
                    })
                })
                .collect::<Result<_>>()?,
        };
        let mut live = live_at_start;
        self.walk(schedule, &mut reg, &mut live, |q, i| {
            !observed.contains(&q) && last_multi[q] == Some(i)
        })?;
        collect(reg, observed)
    }

    /// Full-register evolution of `initial`; no qubit is dropped.
    pub fn run_from(&mut self, schedule: &TimedSchedule, initial: &DensityMatrix) -> Result<DensityMatrix> {
        let n = schedule.n_qubits();
        if initial.n_qubits() != n {
            return Err(Error::Shape(format!(
                "{}-qubit state for a {n}-qubit schedule",
                initial.n_qubits()
            )));
        }
        let mut reg = Register {
            clusters: vec![Cluster {
                qubits: (0..n).collect(),
                state: initial.clone(),
            }],
        };
        let mut live = vec![true; n];
        self.walk(schedule, &mut reg, &mut live, |_, _| false)?;
        Ok(reg.clusters.pop().expect("one cluster").state)
    }

    fn walk(
        &mut self,
        schedule: &TimedSchedule,
        reg: &mut Register,
        live: &mut [bool],
        drop_after: impl Fn(usize, usize) -> bool,
    ) -> Result<()> {
        let mut cursor = vec![0.0f64; schedule.n_qubits()];
        for (i, op) in schedule.ops().iter().enumerate() {
            if op.qubits.iter().all(|&q| !live[q]) {
                continue;
            }
            let start = op.start_dt as f64;
            let end = (op.start_dt + op.duration_dt) as f64;
            for &q in &op.qubits {
                self.idle(reg, q, cursor[q], start)?;
                cursor[q] = end;
            }
            match op.instruction {
                Instruction::Gate(g) if g.is_virtual() => self.unitary(reg, op, g)?,
                Instruction::Gate(g) => {
                    let mid = 0.5 * (start + end);
                    for &q in &op.qubits {
                        self.idle(reg, q, start, mid)?;
                    }
                    self.unitary(reg, op, g)?;
                    for &q in &op.qubits {
                        self.idle(reg, q, mid, end)?;
                    }
                }
                Instruction::Delay => {
                    for &q in &op.qubits {
                        self.idle(reg, q, start, end)?;
                    }
                }
                Instruction::Measure => {
                    for &q in &op.qubits {
                        self.idle(reg, q, start, end)?;
                        let (c, l) = reg.locate(q).expect("live qubit");
                        reg.clusters[c].state.apply_channel_mut(&full_dephasing(l))?;
                    }
                }
            }
            for &q in &op.qubits {
                if drop_after(q, i) {
                    reg.trace_out(q)?;
                    live[q] = false;
                }
            }
        }
        let total = schedule.total_dt() as f64;
        for q in 0..schedule.n_qubits() {
            if live[q] {
                self.idle(reg, q, cursor[q], total)?;
            }
        }
        Ok(())
    }
}

fn full_dephasing(target: usize) -> KrausChannel {
    let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    KrausChannel {
        targets: vec![target],
        operators: vec![gates::identity(1) * h, gates::pauli_z() * h],
        duration_dt: 0,
    }
}

fn collect(mut reg: Register, observed: &[usize]) -> Result<DensityMatrix> {
    let mut state: Option<DensityMatrix> = None;
    let mut labels: Vec<usize> = Vec::new();
    for cl in reg.clusters.drain(..) {
        state = Some(match state {
            None => cl.state,
            Some(s) => s.tensor(&cl.state)?,
        });
        labels.extend(cl.qubits);
    }
    let state = state.expect("observed qubits are live");
    let keep: Vec<usize> = observed
        .iter()
        .map(|q| labels.iter().position(|l| l == q).expect("observed qubit is live"))
        .collect();
    if keep.len() == labels.len() {
        state.permuted(&keep)
    } else {
        state.reduced(&keep)
    }
}

/// Reduced final state of `observed` after running `schedule` from `|0...0>`.
pub fn simulate(schedule: &TimedSchedule, noise: &NoiseModel, observed: &[usize]) -> Result<DensityMatrix> {
    Executor::new(schedule, noise)?.run(schedule, observed)
}

/// Final full-register state after running `schedule` from `initial`.
pub fn simulate_from(schedule: &TimedSchedule, noise: &NoiseModel, initial: &DensityMatrix) -> Result<DensityMatrix> {
    Executor::new(schedule, noise)?.run_from(schedule, initial)
}

#[cfg(test)]
mod tests;
