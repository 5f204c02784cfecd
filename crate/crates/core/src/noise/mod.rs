//! Noise channels the optimiser never sees directly: T1/T2 relaxation and
//! coherent static couplings over idle intervals, measurement-induced noise
//! on the neighbours of a mid-circuit measurement (MCM), and pulse errors.
//!
//! The MCM model (a Stark-like Z shift plus extra dephasing on each adjacent
//! qubit while the readout drive is on) is phenomenological; all of its
//! parameters come from configuration.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::sequences::NativeGate;
use crate::simcore::gates::{self, CMatrix};
use crate::simcore::KrausChannel;
use crate::{Error, Result};

mod serde_inf;

pub const DEFAULT_TROTTER_SLICES: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QubitNoiseParams {
    /// Energy relaxation time in ns; `null` in JSON means no relaxation.
    #[serde(with = "serde_inf")]
    pub t1: f64,
    /// Coherence time in ns; `null` in JSON means no decoherence beyond T1.
    #[serde(with = "serde_inf")]
    pub t2: f64,
    /// Coherent detuning, rad/ns.
    #[serde(default)]
    pub static_z_rate: f64,
    /// Coherent transverse coupling, rad/ns.
    #[serde(default)]
    pub static_x_rate: f64,
}

impl Default for QubitNoiseParams {
    fn default() -> Self {
        Self::ideal()
    }
}

impl QubitNoiseParams {
    pub fn ideal() -> Self {
        Self {
            t1: f64::INFINITY,
            t2: f64::INFINITY,
            static_z_rate: 0.0,
            static_x_rate: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t1 > 0.0) || !(self.t2 > 0.0) {
            return Err(Error::Unphysical(format!(
                "T1 = {}, T2 = {} must be positive",
                self.t1, self.t2
            )));
        }
        if self.t2 > 2.0 * self.t1 {
            return Err(Error::Unphysical(format!(
                "T2 = {} exceeds 2 T1 = {}",
                self.t2,
                2.0 * self.t1
            )));
        }
        if !self.static_z_rate.is_finite() || !self.static_x_rate.is_finite() {
            return Err(Error::Unphysical("non-finite coherent rate".into()));
        }
        Ok(())
    }

    /// Pure-dephasing rate `1/T2 - 1/(2 T1)` in 1/ns.
    pub fn pure_dephasing_rate(&self) -> f64 {
        (1.0 / self.t2 - 0.5 / self.t1).max(0.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct McmNoiseSpec {
    pub duration_dt: u64,
    /// Z rotation angle (rad) accumulated by each neighbour per MCM.
    pub neighbor_z_kick: f64,
    /// Extra dephasing probability per MCM on each neighbour, in `[0, 0.5]`.
    pub neighbor_extra_dephasing: f64,
    /// Fraction of the MCM, from its start, during which the readout drive
    /// disturbs the neighbours. 1 spreads the disturbance over the whole MCM.
    pub drive_fraction: f64,
}

impl Default for McmNoiseSpec {
    fn default() -> Self {
        Self {
            duration_dt: 5600,
            neighbor_z_kick: 0.3,
            neighbor_extra_dephasing: 0.02,
            drive_fraction: 1.0,
        }
    }
}

impl McmNoiseSpec {
    pub fn quiet(duration_dt: u64) -> Self {
        Self {
            duration_dt,
            neighbor_z_kick: 0.0,
            neighbor_extra_dephasing: 0.0,
            drive_fraction: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.duration_dt == 0 {
            return Err(Error::Config("MCM duration must be positive".into()));
        }
        if !(0.0..=0.5).contains(&self.neighbor_extra_dephasing) {
            return Err(Error::Config(format!(
                "neighbor_extra_dephasing {} outside [0, 0.5]",
                self.neighbor_extra_dephasing
            )));
        }
        if !(self.drive_fraction > 0.0 && self.drive_fraction <= 1.0) {
            return Err(Error::Config(format!(
                "drive_fraction {} outside (0, 1]",
                self.drive_fraction
            )));
        }
        if !self.neighbor_z_kick.is_finite() {
            return Err(Error::Config("non-finite MCM kick".into()));
        }
        Ok(())
    }

    pub fn is_quiet(&self) -> bool {
        self.neighbor_z_kick == 0.0 && self.neighbor_extra_dephasing == 0.0
    }

    /// Length of the disturbing part of one MCM, in dt (may be fractional).
    pub fn drive_dt(&self) -> f64 {
        self.duration_dt as f64 * self.drive_fraction
    }

    /// Extra rates felt by a neighbour while the drive is on.
    pub fn drive_rates(&self, dt_ns: f64) -> ExtraRates {
        let t = self.drive_dt() * dt_ns;
        let coherence = 1.0 - 2.0 * self.neighbor_extra_dephasing;
        ExtraRates {
            z_rate: self.neighbor_z_kick / t,
            dephasing_rate: if coherence > 0.0 {
                -coherence.ln() / t
            } else {
                f64::INFINITY
            },
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PulseErrorSpec {
    /// Fractional rotation-angle error of every physical pulse.
    pub over_rotation: f64,
    /// Drive-axis phase error, rad.
    pub phase_error: f64,
}

impl PulseErrorSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.over_rotation.abs() < 1.0) {
            return Err(Error::Config(format!(
                "|over_rotation| = {} must be < 1",
                self.over_rotation
            )));
        }
        if !self.phase_error.is_finite() {
            return Err(Error::Config("non-finite phase error".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    /// Per-qubit parameters; qubit `q` uses entry `q`.
    pub qubits: Vec<QubitNoiseParams>,
    #[serde(default)]
    pub mcm: McmNoiseSpec,
    #[serde(default)]
    pub pulse: PulseErrorSpec,
    #[serde(default = "default_slices")]
    pub trotter_slices: usize,
    #[serde(skip, default = "default_dt_ns")]
    pub dt_ns: f64,
}

fn default_slices() -> usize {
    DEFAULT_TROTTER_SLICES
}

fn default_dt_ns() -> f64 {
    crate::sequences::DEFAULT_DT_NS
}

impl NoiseModel {
    pub fn uniform(n: usize, params: QubitNoiseParams) -> Self {
        Self {
            qubits: vec![params; n],
            mcm: McmNoiseSpec::default(),
            pulse: PulseErrorSpec::default(),
            trotter_slices: DEFAULT_TROTTER_SLICES,
            dt_ns: crate::sequences::DEFAULT_DT_NS,
        }
    }

    /// No noise at all, MCMs included.
    pub fn ideal(n: usize) -> Self {
        let mut m = Self::uniform(n, QubitNoiseParams::ideal());
        m.mcm = McmNoiseSpec::quiet(m.mcm.duration_dt);
        m
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt_ns > 0.0) {
            return Err(Error::Config(format!("dt_ns = {} must be positive", self.dt_ns)));
        }
        if self.trotter_slices == 0 {
            return Err(Error::Config("trotter_slices must be positive".into()));
        }
        for q in &self.qubits {
            q.validate()?;
        }
        self.mcm.validate()?;
        self.pulse.validate()
    }

    pub fn qubit(&self, q: usize) -> Result<&QubitNoiseParams> {
        self.qubits
            .get(q)
            .ok_or_else(|| Error::Config(format!("no noise parameters for qubit {q}")))
    }
}

/// Additional time-local rates layered on top of a qubit's own parameters.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ExtraRates {
    /// rad/ns
    pub z_rate: f64,
    /// 1/ns, acting on the coherences only
    pub dephasing_rate: f64,
}

/// Row-major Liouville superoperator `sum K (x) conj(K)`.
fn superop(kraus: &[CMatrix]) -> CMatrix {
    kraus
        .iter()
        .fold(CMatrix::zeros(4, 4), |acc, k| acc + k.kronecker(&k.map(|z| z.conj())))
}

pub(crate) fn superop_to_channel(s: &CMatrix, duration_dt: u64) -> Result<KrausChannel> {
    let d = 2;
    let choi = CMatrix::from_fn(d * d, d * d, |r, c| {
        let (i, k) = (r / d, r % d);
        let (j, l) = (c / d, c % d);
        s[(k * d + l, i * d + j)]
    });
    KrausChannel::from_choi(vec![0], &choi, duration_dt)
}

/// Single-qubit Liouville superoperator for `duration_ns` of free evolution,
/// first-order Trotterised into `slices` steps of damping, dephasing and
/// coherent precession.
pub(crate) fn segment_superop(
    params: &QubitNoiseParams,
    duration_ns: f64,
    extra: ExtraRates,
    slices: usize,
) -> CMatrix {
    if duration_ns <= 0.0 {
        return CMatrix::identity(4, 4);
    }
    let ts = duration_ns / slices as f64;
    let c = |x: f64| Complex64::new(x, 0.0);

    let gamma = 1.0 - (-ts / params.t1).exp();
    let damping = superop(&[
        CMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c((1.0 - gamma).sqrt())]),
        CMatrix::from_row_slice(2, 2, &[c(0.0), c(gamma.sqrt()), c(0.0), c(0.0)]),
    ]);

    let rate = params.pure_dephasing_rate() + extra.dephasing_rate;
    let p = 0.5 * (1.0 - (-rate * ts).exp());
    let dephasing = superop(&[gates::identity(1) * c((1.0 - p).sqrt()), gates::pauli_z() * c(p.sqrt())]);

    let u = gates::zx_precession(params.static_z_rate + extra.z_rate, params.static_x_rate, ts);
    let precession = superop(&[u]);

    let slice = precession * dephasing * damping;
    (1..slices).fold(slice.clone(), |acc, _| &slice * acc)
}

/// Channel of a free-evolution interval with optional extra rates.
pub fn segment_channel(
    params: &QubitNoiseParams,
    duration_dt: u64,
    dt_ns: f64,
    extra: ExtraRates,
    slices: usize,
) -> Result<KrausChannel> {
    params.validate()?;
    if duration_dt == 0 {
        return Ok(KrausChannel::identity(vec![0]));
    }
    let s = segment_superop(params, duration_dt as f64 * dt_ns, extra, slices);
    superop_to_channel(&s, duration_dt)
}

/// Idle evolution of one qubit for `duration_dt` cycles: amplitude damping,
/// pure dephasing, and static Z/X precession.
pub fn idle_channel(params: &QubitNoiseParams, duration_dt: u64, dt_ns: f64) -> Result<KrausChannel> {
    idle_channel_with_slices(params, duration_dt, dt_ns, DEFAULT_TROTTER_SLICES)
}

pub fn idle_channel_with_slices(
    params: &QubitNoiseParams,
    duration_dt: u64,
    dt_ns: f64,
    slices: usize,
) -> Result<KrausChannel> {
    segment_channel(params, duration_dt, dt_ns, ExtraRates::default(), slices)
}

/// What one MCM does to an idle neighbour over the MCM's full duration.
pub fn mcm_channel(spec: &McmNoiseSpec, params: &QubitNoiseParams, dt_ns: f64) -> Result<KrausChannel> {
    spec.validate()?;
    params.validate()?;
    if spec.is_quiet() {
        return idle_channel(params, spec.duration_dt, dt_ns);
    }
    let driven_ns = spec.drive_dt() * dt_ns;
    let rest_ns = (spec.duration_dt as f64 - spec.drive_dt()) * dt_ns;
    let driven = segment_superop(params, driven_ns, spec.drive_rates(dt_ns), DEFAULT_TROTTER_SLICES);
    let rest = segment_superop(params, rest_ns, ExtraRates::default(), DEFAULT_TROTTER_SLICES);
    superop_to_channel(&(rest * driven), spec.duration_dt)
}

/// Apply pulse errors to a physical pulse; virtual and non-pulse gates pass through.
pub fn noisy_gate(gate: &NativeGate, spec: &PulseErrorSpec) -> NativeGate {
    match gate.pulse_rotation() {
        Some((angle, phase)) if spec.over_rotation != 0.0 || spec.phase_error != 0.0 => NativeGate::Rotation {
            angle: angle * (1.0 + spec.over_rotation),
            phase: phase + spec.phase_error,
        },
        _ => *gate,
    }
}

/// `spam * exp(-t/T1) * exp(-t/T2)`; pass `f64::INFINITY` to drop a factor.
pub fn reference_decay(t_ns: f64, t1: f64, t2: f64, spam: f64) -> f64 {
    spam * (-t_ns / t1).exp() * (-t_ns / t2).exp()
}
