//! Dense density-matrix simulation of small registers.
//!
//! Qubit `q` of a register maps to bit `q` of the computational-basis index
//! (qubit 0 is the least significant bit).

mod channel;
mod density;
pub mod gates;
mod pauli;

pub use channel::KrausChannel;
pub use density::{ground_state, DensityMatrix};
pub use gates::{CMatrix, UnitaryGate};
pub use pauli::{Pauli, PauliObservable};

pub use num_complex::Complex64;

/// Largest register the dense simulator accepts.
pub const MAX_QUBITS: usize = 12;

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Scatter the bits of `m` (local operator index) onto `targets` of a register index.
#[inline]
pub(crate) fn scatter(m: usize, targets: &[usize]) -> usize {
    targets
        .iter()
        .enumerate()
        .fold(0, |acc, (j, &t)| acc | (((m >> j) & 1) << t))
}

/// `data <- op_full * data` where `op` acts on `targets`.
pub(crate) fn apply_left(data: &mut CMatrix, op: &CMatrix, targets: &[usize]) {
    let dim = data.nrows();
    let k = 1usize << targets.len();
    let mask = targets.iter().fold(0usize, |m, &t| m | (1 << t));
    let offsets: Vec<usize> = (0..k).map(|m| scatter(m, targets)).collect();
    let mut buf = vec![ZERO; k];
    for col in 0..dim {
        for base in (0..dim).filter(|b| b & mask == 0) {
            for (m, off) in offsets.iter().enumerate() {
                buf[m] = data[(base | off, col)];
            }
            for (j, off) in offsets.iter().enumerate() {
                let mut acc = ZERO;
                for (m, v) in buf.iter().enumerate() {
                    acc += op[(j, m)] * v;
                }
                data[(base | off, col)] = acc;
            }
        }
    }
}

/// `data <- data * op_full^dagger` where `op` acts on `targets`.
pub(crate) fn apply_right_dagger(data: &mut CMatrix, op: &CMatrix, targets: &[usize]) {
    let dim = data.nrows();
    let k = 1usize << targets.len();
    let mask = targets.iter().fold(0usize, |m, &t| m | (1 << t));
    let offsets: Vec<usize> = (0..k).map(|m| scatter(m, targets)).collect();
    let mut buf = vec![ZERO; k];
    for row in 0..dim {
        for base in (0..dim).filter(|b| b & mask == 0) {
            for (m, off) in offsets.iter().enumerate() {
                buf[m] = data[(row, base | off)];
            }
            for (j, off) in offsets.iter().enumerate() {
                let mut acc = ZERO;
                for (m, v) in buf.iter().enumerate() {
                    acc += v * op[(j, m)].conj();
                }
                data[(row, base | off)] = acc;
            }
        }
    }
}
