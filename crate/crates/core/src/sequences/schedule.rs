use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::builders::{build_sequence, DDSequenceSpec, LayoutItem};
use super::{GateDurations, NativeGate};
use crate::error::{Error, Result};

/// Timed instruction. `Delay` is an explicit circuit delay, distinct from implicit idling.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Instruction {
    Gate(NativeGate),
    Measure,
    Delay,
}

impl Instruction {
    pub fn label(&self) -> String {
        match self {
            Instruction::Gate(g) => g.to_string(),
            Instruction::Measure => "measure".into(),
            Instruction::Delay => "delay".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScheduledOp {
    pub instruction: Instruction,
    pub qubits: Vec<usize>,
    pub start_dt: u64,
    pub duration_dt: u64,
}

impl ScheduledOp {
    pub fn end_dt(&self) -> u64 {
        self.start_dt + self.duration_dt
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SlotKind {
    Idle,
    Op(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Slot {
    pub start_dt: u64,
    pub duration_dt: u64,
    pub kind: SlotKind,
}

/// An idle stretch on one qubit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdleWindow {
    pub qubit: usize,
    pub start_dt: u64,
    pub length_dt: u64,
    /// Nothing has acted on the qubit yet.
    pub leading: bool,
}

impl IdleWindow {
    pub fn end_dt(&self) -> u64 {
        self.start_dt + self.length_dt
    }
}

/// Immutable per-qubit timeline. Lanes tile `[0, total_dt)` exactly with op and idle slots.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimedSchedule {
    n_qubits: usize,
    total_dt: u64,
    ops: Vec<ScheduledOp>,
    lanes: Vec<Vec<Slot>>,
}

impl TimedSchedule {
    /// Builds lanes from ops, filling gaps with idle slots. Ops are sorted by start time.
    pub fn from_ops(n_qubits: usize, total_dt: u64, mut ops: Vec<ScheduledOp>) -> Result<Self> {
        ops.sort_by_key(|o| (o.start_dt, o.end_dt()));
        let mut lanes: Vec<Vec<Slot>> = vec![Vec::new(); n_qubits];
        let mut cursor = vec![0u64; n_qubits];
        for (idx, op) in ops.iter().enumerate() {
            if op.qubits.is_empty() {
                return Err(Error::Schedule(format!("op {idx} acts on no qubits")));
            }
            if op.end_dt() > total_dt {
                return Err(Error::Schedule(format!(
                    "op {idx} ends at {} past total {total_dt}",
                    op.end_dt()
                )));
            }
            for (k, &q) in op.qubits.iter().enumerate() {
                if q >= n_qubits || op.qubits[..k].contains(&q) {
                    return Err(Error::Schedule(format!("op {idx} has bad qubit {q}")));
                }
                if op.start_dt < cursor[q] {
                    return Err(Error::Schedule(format!(
                        "op {idx} overlaps earlier work on qubit {q} at {}",
                        op.start_dt
                    )));
                }
                if op.start_dt > cursor[q] {
                    lanes[q].push(Slot {
                        start_dt: cursor[q],
                        duration_dt: op.start_dt - cursor[q],
                        kind: SlotKind::Idle,
                    });
                }
                lanes[q].push(Slot {
                    start_dt: op.start_dt,
                    duration_dt: op.duration_dt,
                    kind: SlotKind::Op(idx),
                });
                cursor[q] = op.end_dt();
            }
        }
        for (q, lane) in lanes.iter_mut().enumerate() {
            if cursor[q] < total_dt {
                lane.push(Slot {
                    start_dt: cursor[q],
                    duration_dt: total_dt - cursor[q],
                    kind: SlotKind::Idle,
                });
            }
        }
        Ok(Self {
            n_qubits,
            total_dt,
            ops,
            lanes,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn total_dt(&self) -> u64 {
        self.total_dt
    }

    pub fn ops(&self) -> &[ScheduledOp] {
        &self.ops
    }

    pub fn lane(&self, q: usize) -> &[Slot] {
        &self.lanes[q]
    }

    pub fn lanes(&self) -> &[Vec<Slot>] {
        &self.lanes
    }

    /// Ops touching qubit `q`, in time order.
    pub fn lane_ops(&self, q: usize) -> impl Iterator<Item = &ScheduledOp> {
        self.lanes[q].iter().filter_map(|s| match s.kind {
            SlotKind::Op(i) => Some(&self.ops[i]),
            SlotKind::Idle => None,
        })
    }

    /// Maximal idle stretches, treating explicit delays as busy.
    pub fn idle_windows(&self) -> Vec<IdleWindow> {
        let mut out = Vec::new();
        for (q, lane) in self.lanes.iter().enumerate() {
            let mut seen_op = false;
            for slot in lane {
                match slot.kind {
                    SlotKind::Idle if slot.duration_dt > 0 => out.push(IdleWindow {
                        qubit: q,
                        start_dt: slot.start_dt,
                        length_dt: slot.duration_dt,
                        leading: !seen_op,
                    }),
                    SlotKind::Idle => {}
                    SlotKind::Op(_) => seen_op = true,
                }
            }
        }
        out
    }

    /// Line-oriented dump: `qubit start_dt duration_dt label`, idles written as `delay`.
    pub fn to_timeline(&self) -> String {
        let mut s = String::new();
        for (q, lane) in self.lanes.iter().enumerate() {
            for slot in lane {
                let label = match slot.kind {
                    SlotKind::Idle => "delay".to_string(),
                    SlotKind::Op(i) => self.ops[i].instruction.label(),
                };
                let _ = writeln!(s, "{q} {} {} {label}", slot.start_dt, slot.duration_dt);
            }
        }
        s
    }

    /// Gate counts on one qubit: (physical pulses, virtual gates).
    pub fn gate_counts(&self, q: usize) -> (usize, usize) {
        self.lane_ops(q).fold((0, 0), |(p, v), op| match op.instruction {
            Instruction::Gate(g) if g.is_virtual() => (p, v + 1),
            Instruction::Gate(_) => (p + 1, v),
            _ => (p, v),
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DdInsertion {
    pub schedule: TimedSchedule,
    /// Windows left as plain idling because the sequence did not fit.
    pub skipped: Vec<IdleWindow>,
}

/// Fills idle windows with the sequence layout. Windows must lie inside idle slots.
pub fn insert_dd(
    schedule: &TimedSchedule,
    windows: &[IdleWindow],
    spec: &DDSequenceSpec,
    dur: &GateDurations,
) -> Result<DdInsertion> {
    spec.validate()?;
    let mut sorted: Vec<&IdleWindow> = windows.iter().collect();
    sorted.sort_by_key(|w| (w.qubit, w.start_dt));
    for pair in sorted.windows(2) {
        if pair[0].qubit == pair[1].qubit && pair[0].end_dt() > pair[1].start_dt {
            return Err(Error::Schedule(format!(
                "overlapping windows on qubit {} at {} and {}",
                pair[0].qubit, pair[0].start_dt, pair[1].start_dt
            )));
        }
    }
    for w in &sorted {
        if w.qubit >= schedule.n_qubits {
            return Err(Error::Schedule(format!("window on missing qubit {}", w.qubit)));
        }
        let inside = schedule.lanes[w.qubit]
            .iter()
            .any(|s| s.kind == SlotKind::Idle && s.start_dt <= w.start_dt && w.end_dt() <= s.start_dt + s.duration_dt);
        if !inside {
            return Err(Error::Schedule(format!(
                "window [{}, {}) on qubit {} is not idle",
                w.start_dt,
                w.end_dt(),
                w.qubit
            )));
        }
    }
    if !spec.kind.is_dd() {
        return Ok(DdInsertion {
            schedule: schedule.clone(),
            skipped: Vec::new(),
        });
    }

    let mut ops = schedule.ops.clone();
    let mut skipped = Vec::new();
    for w in sorted {
        let layout = match build_sequence(spec, w.length_dt, dur) {
            Ok(l) => l,
            Err(Error::InsufficientWindow { .. }) => {
                skipped.push(*w);
                continue;
            }
            Err(e) => return Err(e),
        };
        let mut t = w.start_dt;
        for item in layout.items {
            if let LayoutItem::Gate { gate, duration_dt } = item {
                ops.push(ScheduledOp {
                    instruction: Instruction::Gate(gate),
                    qubits: vec![w.qubit],
                    start_dt: t,
                    duration_dt,
                });
            }
            t += item.duration_dt();
        }
        debug_assert_eq!(t, w.end_dt());
    }
    Ok(DdInsertion {
        schedule: TimedSchedule::from_ops(schedule.n_qubits, schedule.total_dt, ops)?,
        skipped,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum CircuitInstruction {
    Gate(NativeGate),
    Measure { duration_dt: u64 },
    Delay { duration_dt: u64 },
    Barrier,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircuitOp {
    pub instruction: CircuitInstruction,
    pub qubits: Vec<usize>,
}

/// Ordered instruction list prior to scheduling.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    pub n_qubits: usize,
    pub ops: Vec<CircuitOp>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            ops: Vec::new(),
        }
    }

    fn push(&mut self, instruction: CircuitInstruction, qubits: Vec<usize>) -> &mut Self {
        self.ops.push(CircuitOp { instruction, qubits });
        self
    }

    pub fn gate(&mut self, gate: NativeGate, qubits: &[usize]) -> &mut Self {
        self.push(CircuitInstruction::Gate(gate), qubits.to_vec())
    }

    pub fn h(&mut self, q: usize) -> &mut Self {
        self.gate(NativeGate::H, &[q])
    }

    pub fn cx(&mut self, control: usize, target: usize) -> &mut Self {
        self.gate(NativeGate::Cx, &[control, target])
    }

    pub fn measure(&mut self, q: usize, duration_dt: u64) -> &mut Self {
        self.push(CircuitInstruction::Measure { duration_dt }, vec![q])
    }

    pub fn delay(&mut self, q: usize, duration_dt: u64) -> &mut Self {
        self.push(CircuitInstruction::Delay { duration_dt }, vec![q])
    }

    pub fn barrier(&mut self) -> &mut Self {
        self.push(CircuitInstruction::Barrier, (0..self.n_qubits).collect())
    }
}

/// As-late-as-possible schedule plus every idle window.
pub fn alap_schedule(circuit: &Circuit, dur: &GateDurations) -> Result<(TimedSchedule, Vec<IdleWindow>)> {
    let n = circuit.n_qubits;
    // distance from the end of the circuit, walking backwards
    let mut rev = vec![0u64; n];
    let mut placed: Vec<(Instruction, Vec<usize>, u64, u64)> = Vec::new();
    for (idx, op) in circuit.ops.iter().enumerate().rev() {
        if let Some(&q) = op.qubits.iter().find(|&&q| q >= n) {
            return Err(Error::Schedule(format!("op {idx} references qubit {q} of {n}")));
        }
        let (instruction, duration) = match &op.instruction {
            CircuitInstruction::Barrier => {
                let m = op.qubits.iter().map(|&q| rev[q]).max().unwrap_or(0);
                for &q in &op.qubits {
                    rev[q] = m;
                }
                continue;
            }
            CircuitInstruction::Gate(g) => {
                if g.arity() != op.qubits.len() {
                    return Err(Error::Schedule(format!(
                        "op {idx}: {g} needs {} qubits, got {}",
                        g.arity(),
                        op.qubits.len()
                    )));
                }
                (Instruction::Gate(*g), g.duration(dur))
            }
            CircuitInstruction::Measure { duration_dt } => (Instruction::Measure, *duration_dt),
            CircuitInstruction::Delay { duration_dt } => (Instruction::Delay, *duration_dt),
        };
        let begin = op.qubits.iter().map(|&q| rev[q]).max().unwrap_or(0);
        let end = begin + duration;
        for &q in &op.qubits {
            rev[q] = end;
        }
        placed.push((instruction, op.qubits.clone(), end, duration));
    }
    let total = rev.iter().copied().max().unwrap_or(0);
    let ops = placed
        .into_iter()
        .map(|(instruction, qubits, end, duration_dt)| ScheduledOp {
            instruction,
            qubits,
            start_dt: total - end,
            duration_dt,
        })
        .collect();
    let schedule = TimedSchedule::from_ops(n, total, ops)?;
    let windows = schedule.idle_windows();
    Ok((schedule, windows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequences::builders::DDKind;
    use crate::sequences::EulerAngles;
    use proptest::prelude::*;

    const MCM: u64 = 5600;

    fn bell_with_mcms(r: usize) -> Circuit {
        let mut c = Circuit::new(3);
        c.h(0).cx(0, 2).barrier();
        for _ in 0..r {
            c.measure(1, MCM);
        }
        c.barrier();
        c
    }

    fn middle_windows(windows: &[IdleWindow]) -> Vec<IdleWindow> {
        windows.iter().filter(|w| !w.leading && w.qubit != 1).copied().collect()
    }

    #[test]
    fn single_gate_is_pushed_late() {
        let mut c = Circuit::new(2);
        c.gate(NativeGate::X, &[0]).cx(0, 1);
        let dur = GateDurations::default();
        let (s, w) = alap_schedule(&c, &dur).unwrap();
        assert_eq!(s.total_dt(), 256 + 2400);
        let lead: Vec<_> = w.iter().filter(|w| w.qubit == 1).collect();
        assert_eq!(lead.len(), 1);
        assert_eq!(lead[0].length_dt, s.total_dt() - 2400);
        assert!(lead[0].leading);
    }

    #[test]
    fn mcm_circuit_windows_scale_with_r() {
        let dur = GateDurations::default();
        for r in [1usize, 3, 5] {
            let (s, w) = alap_schedule(&bell_with_mcms(r), &dur).unwrap();
            let mid = middle_windows(&w);
            assert_eq!(mid.len(), 2);
            for win in mid {
                assert_eq!(win.length_dt, r as u64 * MCM);
                assert_eq!(win.end_dt(), s.total_dt());
            }
        }
    }

    #[test]
    fn cnot_ladder_windows_track_remaining_depth() {
        let dur = GateDurations::default();
        let chain = 4;
        let mut c = Circuit::new(chain + 2);
        c.h(0).cx(0, 1);
        for k in 1..=chain {
            c.cx(k, k + 1).cx(k + 1, k);
        }
        let (_, w) = alap_schedule(&c, &dur).unwrap();
        let q0 = w.iter().find(|w| w.qubit == 0 && !w.leading).unwrap();
        assert_eq!(q0.length_dt, 2 * chain as u64 * dur.cx_dt);
        for k in 1..chain {
            let wk = w.iter().find(|w| w.qubit == k && !w.leading).unwrap();
            assert_eq!(wk.length_dt, 2 * (chain - k) as u64 * dur.cx_dt);
        }
    }

    fn golden(spec: DDSequenceSpec) -> (String, TimedSchedule) {
        let dur = GateDurations::default();
        let base = TimedSchedule::from_ops(1, MCM, Vec::new()).unwrap();
        let win = base.idle_windows();
        let out = insert_dd(&base, &win, &spec, &dur).unwrap();
        assert!(out.skipped.is_empty());
        (out.schedule.to_timeline(), out.schedule)
    }

    #[test]
    fn golden_cpmg_timeline() {
        let (t, _) = golden(DDSequenceSpec::new(DDKind::Cpmg, 1));
        assert_eq!(
            t,
            "0 0 1272 delay\n0 1272 256 x\n0 1528 2544 delay\n0 4072 256 x\n0 4328 1272 delay\n"
        );
    }

    #[test]
    fn golden_xy4_timeline() {
        let (t, _) = golden(DDSequenceSpec::new(DDKind::Xy4, 1));
        assert_eq!(
            t,
            "0 0 256 y\n0 256 1144 delay\n0 1400 256 x\n0 1656 1144 delay\n\
             0 2800 256 y\n0 3056 1144 delay\n0 4200 256 x\n0 4456 1144 delay\n"
        );
    }

    #[test]
    fn golden_ur6_timeline() {
        let (t, s) = golden(DDSequenceSpec::new(DDKind::Ur6, 1));
        // (5600 - 6*256) / 7 = 580 rem 4
        let lines: Vec<&str> = t.lines().collect();
        assert_eq!(lines[0], "0 0 580 delay");
        assert_eq!(lines[1], "0 580 256 x");
        assert_eq!(lines[3], "0 1416 0 rz(2.094395)");
        assert_eq!(lines[4], "0 1416 256 x");
        assert_eq!(lines[5], "0 1672 0 rz(-2.094395)");
        assert_eq!(*lines.last().unwrap(), "0 5016 584 delay");
        assert_eq!(s.gate_counts(0), (6, 4));
    }

    #[test]
    fn golden_ldd_counts_and_sum() {
        let (_, s) = golden(DDSequenceSpec::ldd(EulerAngles::new(0.4, 1.2, -0.7), 1, 4));
        assert_eq!(s.gate_counts(0), (8, 12));
        let sum: u64 = s.lane(0).iter().map(|x| x.duration_dt).sum();
        assert_eq!(sum, MCM);
    }

    #[test]
    fn delay_kind_leaves_schedule_alone() {
        let dur = GateDurations::default();
        let (s, w) = alap_schedule(&bell_with_mcms(2), &dur).unwrap();
        for kind in [DDKind::Delay, DDKind::None] {
            let out = insert_dd(&s, &w, &DDSequenceSpec::new(kind, 1), &dur).unwrap();
            assert_eq!(out.schedule, s);
        }
    }

    #[test]
    fn overlapping_windows_rejected() {
        let dur = GateDurations::default();
        let base = TimedSchedule::from_ops(1, 10000, Vec::new()).unwrap();
        let a = IdleWindow {
            qubit: 0,
            start_dt: 0,
            length_dt: 6000,
            leading: false,
        };
        let b = IdleWindow {
            qubit: 0,
            start_dt: 5000,
            length_dt: 3000,
            leading: false,
        };
        let e = insert_dd(&base, &[a, b], &DDSequenceSpec::new(DDKind::Cpmg, 1), &dur);
        assert!(matches!(e, Err(Error::Schedule(_))));
    }

    #[test]
    fn short_window_is_skipped() {
        let dur = GateDurations::default();
        let base = TimedSchedule::from_ops(1, 300, Vec::new()).unwrap();
        let w = base.idle_windows();
        let out = insert_dd(&base, &w, &DDSequenceSpec::new(DDKind::Xy4, 1), &dur).unwrap();
        assert_eq!(out.skipped, w);
        assert_eq!(out.schedule, base);
    }

    #[test]
    fn from_ops_rejects_overlap() {
        let op = |s| ScheduledOp {
            instruction: Instruction::Gate(NativeGate::X),
            qubits: vec![0],
            start_dt: s,
            duration_dt: 256,
        };
        assert!(TimedSchedule::from_ops(1, 1000, vec![op(0), op(100)]).is_err());
        assert!(TimedSchedule::from_ops(1, 1000, vec![op(800)]).is_err());
    }

    proptest! {
        #[test]
        fn insertion_preserves_lanes(
            r in 1usize..5,
            kind_idx in 0usize..6,
            reps in 1usize..4,
        ) {
            let dur = GateDurations::default();
            let (s, w) = alap_schedule(&bell_with_mcms(r), &dur).unwrap();
            let kind = DDKind::ALL[kind_idx];
            let spec = if kind == DDKind::Ldd {
                DDSequenceSpec::ldd(EulerAngles::new(0.1, 0.2, 0.3), reps, 4)
            } else {
                DDSequenceSpec::new(kind, reps)
            };
            let targets: Vec<IdleWindow> = w.iter().filter(|w| !w.leading).copied().collect();
            let out = insert_dd(&s, &targets, &spec, &dur).unwrap();
            prop_assert_eq!(out.schedule.total_dt(), s.total_dt());
            for q in 0..3 {
                let lane = out.schedule.lane(q);
                let mut t = 0;
                for slot in lane {
                    prop_assert_eq!(slot.start_dt, t);
                    t += slot.duration_dt;
                }
                prop_assert_eq!(t, s.total_dt());
            }
        }
    }
}
