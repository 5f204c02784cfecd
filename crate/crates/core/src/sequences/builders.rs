use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::euler::{euler_to_native, EulerAngles};
use super::{GateDurations, NativeGate};
use crate::error::{Error, Result};

pub const DEFAULT_LDD_GATES: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DDKind {
    None,
    Delay,
    Cpmg,
    Xy4,
    Ur6,
    Ldd,
}

impl DDKind {
    pub const ALL: [DDKind; 6] = [
        DDKind::None,
        DDKind::Delay,
        DDKind::Cpmg,
        DDKind::Xy4,
        DDKind::Ur6,
        DDKind::Ldd,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DDKind::None => "none",
            DDKind::Delay => "delay",
            DDKind::Cpmg => "cpmg",
            DDKind::Xy4 => "xy4",
            DDKind::Ur6 => "ur6",
            DDKind::Ldd => "ldd",
        }
    }

    /// Kinds that put pulses into idle windows.
    pub fn is_dd(self) -> bool {
        !matches!(self, DDKind::None | DDKind::Delay)
    }
}

impl fmt::Display for DDKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DDKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        DDKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Config(format!("unknown sequence kind `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DDSequenceSpec {
    pub kind: DDKind,
    #[serde(default = "one")]
    pub repetitions: usize,
    #[serde(default)]
    pub ldd_params: Option<EulerAngles>,
    #[serde(default = "default_ldd_gates")]
    pub n_gates: usize,
}

fn one() -> usize {
    1
}

fn default_ldd_gates() -> usize {
    DEFAULT_LDD_GATES
}

impl DDSequenceSpec {
    pub fn new(kind: DDKind, repetitions: usize) -> Self {
        Self {
            kind,
            repetitions,
            ldd_params: None,
            n_gates: DEFAULT_LDD_GATES,
        }
    }

    pub fn ldd(params: EulerAngles, repetitions: usize, n_gates: usize) -> Self {
        Self {
            kind: DDKind::Ldd,
            repetitions,
            ldd_params: Some(params),
            n_gates,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.repetitions == 0 {
            return Err(Error::Config("repetitions must be at least 1".into()));
        }
        if self.kind == DDKind::Ldd {
            let p = self
                .ldd_params
                .ok_or_else(|| Error::Config("LDD needs rotation parameters".into()))?;
            if !p.is_finite() {
                return Err(Error::Config("LDD parameters must be finite".into()));
            }
            if self.n_gates == 0 || !self.n_gates.is_multiple_of(2) {
                return Err(Error::Config(format!(
                    "LDD gate count must be even and positive, got {}",
                    self.n_gates
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum LayoutItem {
    Delay(u64),
    Gate { gate: NativeGate, duration_dt: u64 },
}

impl LayoutItem {
    pub fn duration_dt(&self) -> u64 {
        match self {
            LayoutItem::Delay(d) => *d,
            LayoutItem::Gate { duration_dt, .. } => *duration_dt,
        }
    }
}

/// Time-ordered content of one idle window.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SequenceLayout {
    pub items: Vec<LayoutItem>,
}

impl SequenceLayout {
    pub fn total_dt(&self) -> u64 {
        self.items.iter().map(LayoutItem::duration_dt).sum()
    }

    pub fn delays(&self) -> Vec<u64> {
        self.items
            .iter()
            .filter_map(|i| match i {
                LayoutItem::Delay(d) => Some(*d),
                _ => None,
            })
            .collect()
    }

    pub fn gates(&self) -> Vec<NativeGate> {
        self.items
            .iter()
            .filter_map(|i| match i {
                LayoutItem::Gate { gate, .. } => Some(*gate),
                _ => None,
            })
            .collect()
    }

    pub fn pulse_count(&self) -> usize {
        self.gates().iter().filter(|g| !g.is_virtual()).count()
    }

    pub fn virtual_count(&self) -> usize {
        self.gates().iter().filter(|g| g.is_virtual()).count()
    }
}

/// A logical DD gate, possibly several native gates sharing one pulse slot.
type Group = Vec<NativeGate>;

fn group_duration(group: &[NativeGate], dur: &GateDurations) -> u64 {
    group.iter().map(|g| g.duration(dur)).sum()
}

fn push_group(items: &mut Vec<LayoutItem>, group: &[NativeGate], dur: &GateDurations) {
    items.extend(group.iter().map(|&gate| LayoutItem::Gate {
        gate,
        duration_dt: gate.duration(dur),
    }));
}

/// Splits the window into `reps` blocks; the last one absorbs the division remainder.
fn repeat_blocks(
    window_dt: u64,
    reps: usize,
    sequence: &str,
    required_per_block: u64,
    mut block: impl FnMut(u64, &mut Vec<LayoutItem>),
) -> Result<SequenceLayout> {
    if reps == 0 {
        return Err(Error::Config("repetitions must be at least 1".into()));
    }
    let reps = reps as u64;
    let base = window_dt / reps;
    if base < required_per_block {
        return Err(Error::InsufficientWindow {
            sequence: sequence.to_string(),
            window_dt,
            required_dt: required_per_block * reps,
        });
    }
    let mut items = Vec::new();
    for r in 0..reps {
        let len = if r + 1 == reps {
            window_dt - base * (reps - 1)
        } else {
            base
        };
        block(len, &mut items);
    }
    Ok(SequenceLayout { items })
}

/// Gate followed by a delay, repeated for each group; slack split evenly with residue last.
fn gate_then_delay(block_dt: u64, groups: &[Group], dur: &GateDurations, items: &mut Vec<LayoutItem>) {
    let busy: u64 = groups.iter().map(|g| group_duration(g, dur)).sum();
    let slack = block_dt - busy;
    let n = groups.len() as u64;
    let each = slack / n;
    for (k, g) in groups.iter().enumerate() {
        push_group(items, g, dur);
        let d = if k as u64 + 1 == n {
            slack - each * (n - 1)
        } else {
            each
        };
        items.push(LayoutItem::Delay(d));
    }
}

/// `tau/2 X tau X tau/2` per block.
pub fn build_cpmg(window_dt: u64, dur: &GateDurations, reps: usize) -> Result<SequenceLayout> {
    let x = NativeGate::X.duration(dur);
    repeat_blocks(window_dt, reps, "cpmg", 2 * x, |len, items| {
        let slack = len - 2 * x;
        let quarter = slack / 4;
        let half = slack / 2;
        items.push(LayoutItem::Delay(quarter));
        push_group(items, &[NativeGate::X], dur);
        items.push(LayoutItem::Delay(half));
        push_group(items, &[NativeGate::X], dur);
        items.push(LayoutItem::Delay(slack - quarter - half));
    })
}

pub fn build_xy4(window_dt: u64, dur: &GateDurations, reps: usize) -> Result<SequenceLayout> {
    let groups: Vec<Group> = [NativeGate::Y, NativeGate::X, NativeGate::Y, NativeGate::X]
        .into_iter()
        .map(|g| vec![g])
        .collect();
    let required = groups.iter().map(|g| group_duration(g, dur)).sum();
    repeat_blocks(window_dt, reps, "xy4", required, |len, items| {
        gate_then_delay(len, &groups, dur, items)
    })
}

/// Phased X: `Rz(-2pi/3) X Rz(2pi/3)` as an operator product, virtual Z on both sides.
pub fn phased_x() -> Vec<NativeGate> {
    vec![
        NativeGate::Rz(2.0 * PI / 3.0),
        NativeGate::X,
        NativeGate::Rz(-2.0 * PI / 3.0),
    ]
}

pub fn build_ur6(window_dt: u64, dur: &GateDurations) -> Result<SequenceLayout> {
    build_ur6_repeated(window_dt, dur, 1)
}

pub fn build_ur6_repeated(window_dt: u64, dur: &GateDurations, reps: usize) -> Result<SequenceLayout> {
    let x = vec![NativeGate::X];
    let xp = phased_x();
    let groups = [&x, &xp, &x, &x, &xp, &x];
    let busy: u64 = groups.iter().map(|g| group_duration(g, dur)).sum();
    repeat_blocks(window_dt, reps, "ur6", busy, |len, items| {
        let slack = len - busy;
        let each = slack / 7;
        for g in groups {
            items.push(LayoutItem::Delay(each));
            push_group(items, g, dur);
        }
        items.push(LayoutItem::Delay(slack - 6 * each));
    })
}

pub fn build_ldd(
    window_dt: u64,
    dur: &GateDurations,
    params: &EulerAngles,
    reps: usize,
    n_gates: usize,
) -> Result<SequenceLayout> {
    if n_gates == 0 || !n_gates.is_multiple_of(2) {
        return Err(Error::Config(format!(
            "LDD gate count must be even and positive, got {n_gates}"
        )));
    }
    let forward = euler_to_native(params);
    let backward = euler_to_native(&params.inverse());
    let groups: Vec<Group> = std::iter::repeat_n(forward, n_gates / 2)
        .chain(std::iter::repeat_n(backward, n_gates / 2))
        .collect();
    let required = groups.iter().map(|g| group_duration(g, dur)).sum();
    repeat_blocks(window_dt, reps, "ldd", required, |len, items| {
        gate_then_delay(len, &groups, dur, items)
    })
}

/// Layout for any sequence kind. `None` and `Delay` give a single delay.
pub fn build_sequence(spec: &DDSequenceSpec, window_dt: u64, dur: &GateDurations) -> Result<SequenceLayout> {
    spec.validate()?;
    match spec.kind {
        DDKind::None | DDKind::Delay => Ok(SequenceLayout {
            items: vec![LayoutItem::Delay(window_dt)],
        }),
        DDKind::Cpmg => build_cpmg(window_dt, dur, spec.repetitions),
        DDKind::Xy4 => build_xy4(window_dt, dur, spec.repetitions),
        DDKind::Ur6 => build_ur6_repeated(window_dt, dur, spec.repetitions),
        DDKind::Ldd => build_ldd(
            window_dt,
            dur,
            spec.ldd_params.as_ref().expect("validated"),
            spec.repetitions,
            spec.n_gates,
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequences::euler::compose_single_qubit;
    use crate::simcore::gates::{self, phase_insensitive_distance};
    use proptest::prelude::*;

    fn durations(x: u64) -> GateDurations {
        GateDurations {
            x_dt: x,
            sx_dt: x,
            ..GateDurations::default()
        }
    }

    fn is_identity(layout: &SequenceLayout) -> bool {
        let u = compose_single_qubit(&layout.gates());
        phase_insensitive_distance(&u, &gates::identity(1)) < 1e-12
    }

    #[test]
    fn cpmg_delays() {
        let l = build_cpmg(1000, &durations(100), 1).unwrap();
        assert_eq!(l.delays(), vec![200, 400, 200]);
        assert_eq!(l.total_dt(), 1000);
        let ideal = build_cpmg(1000, &durations(0), 1).unwrap();
        assert_eq!(ideal.delays(), vec![250, 500, 250]);
    }

    #[test]
    fn cpmg_repetitions_concatenate_blocks() {
        let one = build_cpmg(1000, &durations(100), 1).unwrap();
        let two = build_cpmg(2000, &durations(100), 2).unwrap();
        let mut expected = one.items.clone();
        expected.extend(one.items);
        assert_eq!(two.items, expected);
    }

    #[test]
    fn xy4_delays_and_order() {
        let l = build_xy4(1000, &durations(100), 1).unwrap();
        assert_eq!(l.delays(), vec![150, 150, 150, 150]);
        assert_eq!(
            l.gates(),
            vec![NativeGate::Y, NativeGate::X, NativeGate::Y, NativeGate::X]
        );
        assert!(is_identity(&l));
        let two = build_xy4(2000, &durations(100), 2).unwrap();
        assert_eq!(two.delays(), vec![150; 8]);
    }

    #[test]
    fn ur6_residue_goes_last() {
        let l = build_ur6(1000, &durations(100)).unwrap();
        assert_eq!(l.delays(), vec![57, 57, 57, 57, 57, 57, 58]);
        assert_eq!(l.total_dt(), 1000);
        assert_eq!(l.pulse_count(), 6);
        assert_eq!(l.virtual_count(), 4);
        assert!(is_identity(&l));
    }

    #[test]
    fn phased_x_has_two_thirds_pi_phase() {
        let u = compose_single_qubit(&phased_x());
        let expected = gates::rz(-2.0 * PI / 3.0) * gates::pauli_x() * gates::rz(2.0 * PI / 3.0);
        assert!(phase_insensitive_distance(&u, &expected) < 1e-12);
        // an equatorial pi rotation whose axis is 2pi/3 away from x
        let axis = gates::equatorial_rotation(PI, -2.0 * PI / 3.0);
        assert!(phase_insensitive_distance(&u, &axis) < 1e-12);
    }

    #[test]
    fn ldd_zero_params_is_pure_delay() {
        let l = build_ldd(4000, &durations(100), &EulerAngles::default(), 1, 4).unwrap();
        assert!(is_identity(&l));
        assert_eq!(l.pulse_count(), 8);
        assert_eq!(l.total_dt(), 4000);
    }

    #[test]
    fn ldd_rejects_odd_gate_count() {
        let e = build_ldd(4000, &durations(100), &EulerAngles::default(), 1, 3);
        assert!(matches!(e, Err(Error::Config(_))));
        assert!(DDSequenceSpec::ldd(EulerAngles::default(), 1, 3).validate().is_err());
        assert!(DDSequenceSpec::new(DDKind::Ldd, 1).validate().is_err());
    }

    #[test]
    fn short_windows_are_reported() {
        let e = build_cpmg(150, &durations(100), 1).unwrap_err();
        assert!(matches!(
            e,
            Error::InsufficientWindow {
                window_dt: 150,
                required_dt: 200,
                ..
            }
        ));
        assert!(build_ur6(599, &durations(100)).is_err());
        assert!(build_ur6(600, &durations(100)).is_ok());
    }

    #[test]
    fn mcm_window_gate_counts() {
        let dur = GateDurations::default();
        let counts = |spec: DDSequenceSpec| {
            let l = build_sequence(&spec, 5600, &dur).unwrap();
            assert_eq!(l.total_dt(), 5600);
            (l.pulse_count(), l.virtual_count())
        };
        assert_eq!(counts(DDSequenceSpec::new(DDKind::Cpmg, 1)), (2, 0));
        assert_eq!(counts(DDSequenceSpec::new(DDKind::Xy4, 1)), (4, 0));
        assert_eq!(counts(DDSequenceSpec::new(DDKind::Ur6, 1)), (6, 4));
        let ldd = DDSequenceSpec::ldd(EulerAngles::new(0.3, 1.1, -0.4), 1, 4);
        assert_eq!(counts(ldd), (8, 12));
    }

    #[test]
    fn kind_names_round_trip() {
        for k in DDKind::ALL {
            assert_eq!(k.name().parse::<DDKind>().unwrap(), k);
            let json = serde_json::to_string(&k).unwrap();
            assert_eq!(json, format!("\"{}\"", k.name()));
        }
        assert!("xy8".parse::<DDKind>().is_err());
    }

    proptest! {
        #[test]
        fn layouts_conserve_window_and_compose_to_identity(
            window in 2400u64..20000,
            x in 0u64..300,
            reps in 1usize..4,
            t in -4.0f64..4.0, p in -4.0f64..4.0, l in -4.0f64..4.0,
        ) {
            let dur = durations(x);
            let specs = [
                DDSequenceSpec::new(DDKind::Cpmg, reps),
                DDSequenceSpec::new(DDKind::Xy4, reps),
                DDSequenceSpec::new(DDKind::Ur6, reps),
                DDSequenceSpec::ldd(EulerAngles::new(t, p, l), reps, 4),
            ];
            for spec in &specs {
                match build_sequence(spec, window, &dur) {
                    Ok(layout) => {
                        prop_assert_eq!(layout.total_dt(), window);
                        prop_assert!(is_identity(&layout));
                    }
                    Err(Error::InsufficientWindow { .. }) => {}
                    Err(e) => return Err(TestCaseError::fail(e.to_string())),
                }
            }
        }
    }
}
