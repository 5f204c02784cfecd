//! Unitary gates and the standard single- and two-qubit matrices.

use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{ONE, ZERO};
use crate::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

const UNITARY_TOL: f64 = 1e-10;

/// A unitary acting on an ordered list of register qubits. `targets[j]` is
/// bit `j` of the matrix index.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryGate {
    pub targets: Vec<usize>,
    pub matrix: CMatrix,
    pub duration_dt: u64,
    pub label: String,
}

impl UnitaryGate {
    pub fn new(targets: Vec<usize>, matrix: CMatrix, duration_dt: u64, label: impl Into<String>) -> Result<Self> {
        let dim = 1usize << targets.len();
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::Shape(format!(
                "{}x{} matrix on {} target(s)",
                matrix.nrows(),
                matrix.ncols(),
                targets.len()
            )));
        }
        let mut seen = targets.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != targets.len() {
            return Err(Error::Shape(format!("repeated target in {targets:?}")));
        }
        let dev = unitarity_deviation(&matrix);
        if dev > UNITARY_TOL {
            return Err(Error::Shape(format!("matrix is not unitary (deviation {dev:.3e})")));
        }
        Ok(Self {
            targets,
            matrix,
            duration_dt,
            label: label.into(),
        })
    }

    /// The inverse gate, same targets and duration.
    pub fn dagger(&self) -> Self {
        Self {
            targets: self.targets.clone(),
            matrix: self.matrix.adjoint(),
            duration_dt: self.duration_dt,
            label: format!("{}_dg", self.label),
        }
    }
}

/// max |(U^dagger U - I)_ij|
pub fn unitarity_deviation(u: &CMatrix) -> f64 {
    let prod = u.adjoint() * u;
    max_abs_diff(&prod, &CMatrix::identity(u.nrows(), u.ncols()))
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Distance between two unitaries modulo global phase: `1 - |Tr(A^dagger B)| / d`.
pub fn phase_insensitive_distance(a: &CMatrix, b: &CMatrix) -> f64 {
    let d = a.nrows() as f64;
    1.0 - (a.adjoint() * b).trace().norm() / d
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn m2(a: Complex64, b: Complex64, cc: Complex64, d: Complex64) -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[a, b, cc, d])
}

pub fn identity(n_qubits: usize) -> CMatrix {
    let d = 1 << n_qubits;
    CMatrix::identity(d, d)
}

pub fn pauli_x() -> CMatrix {
    m2(ZERO, ONE, ONE, ZERO)
}

pub fn pauli_y() -> CMatrix {
    m2(ZERO, c(0.0, -1.0), c(0.0, 1.0), ZERO)
}

pub fn pauli_z() -> CMatrix {
    m2(ONE, ZERO, ZERO, -ONE)
}

pub fn hadamard() -> CMatrix {
    let h = c(FRAC_1_SQRT_2, 0.0);
    m2(h, h, h, -h)
}

pub fn s_dagger() -> CMatrix {
    m2(ONE, ZERO, ZERO, c(0.0, -1.0))
}

/// `exp(-i angle Z / 2)`
pub fn rz(angle: f64) -> CMatrix {
    m2(
        Complex64::from_polar(1.0, -angle / 2.0),
        ZERO,
        ZERO,
        Complex64::from_polar(1.0, angle / 2.0),
    )
}

/// `exp(-i angle Y / 2)`
pub fn ry(angle: f64) -> CMatrix {
    let (s, co) = (angle / 2.0).sin_cos();
    m2(c(co, 0.0), c(-s, 0.0), c(s, 0.0), c(co, 0.0))
}

/// `exp(-i angle (cos(phase) X + sin(phase) Y) / 2)`: a resonant pulse of
/// rotation `angle` about an equatorial axis at azimuth `phase`.
pub fn equatorial_rotation(angle: f64, phase: f64) -> CMatrix {
    let (s, co) = (angle / 2.0).sin_cos();
    let e_minus = Complex64::from_polar(1.0, -phase);
    let e_plus = Complex64::from_polar(1.0, phase);
    let mi = c(0.0, -s);
    m2(c(co, 0.0), mi * e_minus, mi * e_plus, c(co, 0.0))
}

pub fn rx(angle: f64) -> CMatrix {
    equatorial_rotation(angle, 0.0)
}

/// `exp(-i t (wz Z + wx X) / 2)` in closed form.
pub fn zx_precession(wz: f64, wx: f64, t: f64) -> CMatrix {
    let omega = (wz * wz + wx * wx).sqrt();
    if omega * t == 0.0 {
        return identity(1);
    }
    let (s, co) = (omega * t / 2.0).sin_cos();
    let (nz, nx) = (wz / omega, wx / omega);
    m2(c(co, -s * nz), c(0.0, -s * nx), c(0.0, -s * nx), c(co, s * nz))
}

/// CNOT with `targets = [control, target]`.
pub fn cnot() -> CMatrix {
    let mut m = CMatrix::zeros(4, 4);
    m[(0, 0)] = ONE;
    m[(2, 2)] = ONE;
    m[(3, 1)] = ONE;
    m[(1, 3)] = ONE;
    m
}

/// Kronecker product with `high` on the more significant bits.
pub fn kron(high: &CMatrix, low: &CMatrix) -> CMatrix {
    high.kronecker(low)
}
