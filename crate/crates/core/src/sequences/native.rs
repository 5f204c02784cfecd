use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::simcore::gates::{self, CMatrix};

/// Gate durations in cycle-time units. Virtual Z rotations always take zero time.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GateDurations {
    /// Single X or Y pulse.
    pub x_dt: u64,
    /// Single sqrt(X) pulse.
    pub sx_dt: u64,
    pub cx_dt: u64,
    #[serde(skip)]
    pub dt_ns: f64,
}

pub const DEFAULT_DT_NS: f64 = 0.22;

impl Default for GateDurations {
    fn default() -> Self {
        Self {
            x_dt: 256,
            sx_dt: 256,
            cx_dt: 2400,
            dt_ns: DEFAULT_DT_NS,
        }
    }
}

impl GateDurations {
    /// Zero-length pulses; the ideal-pulse limit of every sequence.
    pub fn instantaneous() -> Self {
        Self {
            x_dt: 0,
            sx_dt: 0,
            cx_dt: 0,
            dt_ns: DEFAULT_DT_NS,
        }
    }
}

/// Hardware-level gates. `Rotation` only appears once pulse errors are applied.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum NativeGate {
    /// Virtual frame change, `exp(-i angle Z / 2)`.
    Rz(f64),
    X,
    Y,
    Sx,
    /// Physical pulse rotating by `angle` about the equatorial axis at azimuth `phase`.
    Rotation {
        angle: f64,
        phase: f64,
    },
    H,
    Sdg,
    /// `[control, target]`
    Cx,
}

impl NativeGate {
    pub fn arity(&self) -> usize {
        match self {
            NativeGate::Cx => 2,
            _ => 1,
        }
    }

    pub fn is_virtual(&self) -> bool {
        matches!(self, NativeGate::Rz(_) | NativeGate::Sdg)
    }

    /// Physical single-qubit drive pulse, subject to pulse errors.
    pub fn is_pulse(&self) -> bool {
        matches!(
            self,
            NativeGate::X | NativeGate::Y | NativeGate::Sx | NativeGate::Rotation { .. }
        )
    }

    /// Equatorial rotation `(angle, phase)` of a pulse gate.
    pub fn pulse_rotation(&self) -> Option<(f64, f64)> {
        match *self {
            NativeGate::X => Some((PI, 0.0)),
            NativeGate::Y => Some((PI, FRAC_PI_2)),
            NativeGate::Sx => Some((FRAC_PI_2, 0.0)),
            NativeGate::Rotation { angle, phase } => Some((angle, phase)),
            _ => None,
        }
    }

    pub fn duration(&self, dur: &GateDurations) -> u64 {
        match self {
            NativeGate::Rz(_) | NativeGate::Sdg => 0,
            NativeGate::X | NativeGate::Y | NativeGate::Rotation { .. } => dur.x_dt,
            NativeGate::Sx | NativeGate::H => dur.sx_dt,
            NativeGate::Cx => dur.cx_dt,
        }
    }

    pub fn matrix(&self) -> CMatrix {
        match *self {
            NativeGate::Rz(a) => gates::rz(a),
            NativeGate::H => gates::hadamard(),
            NativeGate::Sdg => gates::s_dagger(),
            NativeGate::Cx => gates::cnot(),
            _ => {
                let (angle, phase) = self.pulse_rotation().expect("pulse gate");
                gates::equatorial_rotation(angle, phase)
            }
        }
    }
}

impl fmt::Display for NativeGate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NativeGate::Rz(a) => write!(f, "rz({a:.6})"),
            NativeGate::X => f.write_str("x"),
            NativeGate::Y => f.write_str("y"),
            NativeGate::Sx => f.write_str("sx"),
            NativeGate::Rotation { angle, phase } => write!(f, "r({angle:.6},{phase:.6})"),
            NativeGate::H => f.write_str("h"),
            NativeGate::Sdg => f.write_str("sdg"),
            NativeGate::Cx => f.write_str("cx"),
        }
    }
}
