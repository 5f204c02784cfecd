use nalgebra::SymmetricEigen;
use num_complex::Complex64;
use rand::Rng;

use super::gates::{self, CMatrix, UnitaryGate};
use super::{apply_left, apply_right_dagger, KrausChannel, Pauli, PauliObservable, MAX_QUBITS, ONE, ZERO};
use crate::{Error, Result, RngStream};

const TRACE_TOL: f64 = 1e-10;
const HERMITIAN_TOL: f64 = 1e-10;
const PSD_TOL: f64 = 1e-9;
const NORM_TOL: f64 = 1e-9;

/// Density matrix of an `n`-qubit register.
///
/// Operations return new states; the `*_mut` variants exist for inner loops.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    data: CMatrix,
}

/// `|0...0><0...0|` on `n` qubits.
pub fn ground_state(n: usize) -> Result<DensityMatrix> {
    DensityMatrix::ground_state(n)
}

fn check_size(n: usize) -> Result<()> {
    if n == 0 || n > MAX_QUBITS {
        return Err(Error::Size(n));
    }
    Ok(())
}

impl DensityMatrix {
    pub fn ground_state(n: usize) -> Result<Self> {
        check_size(n)?;
        let d = 1 << n;
        let mut data = CMatrix::zeros(d, d);
        data[(0, 0)] = ONE;
        Ok(Self { n_qubits: n, data })
    }

    pub fn maximally_mixed(n: usize) -> Result<Self> {
        check_size(n)?;
        let d = 1 << n;
        let data = CMatrix::identity(d, d) * Complex64::new(1.0 / d as f64, 0.0);
        Ok(Self { n_qubits: n, data })
    }

    /// `|psi><psi|`; `psi` must be normalised.
    pub fn from_pure(psi: &[Complex64]) -> Result<Self> {
        let n = qubits_for_dim(psi.len())?;
        check_normalized(psi)?;
        let v = nalgebra::DVector::from_column_slice(psi);
        Ok(Self {
            n_qubits: n,
            data: &v * v.adjoint(),
        })
    }

    /// Wrap a matrix, checking trace, Hermiticity and positivity.
    pub fn from_matrix(data: CMatrix) -> Result<Self> {
        if data.nrows() != data.ncols() {
            return Err(Error::Shape(format!(
                "{}x{} density matrix",
                data.nrows(),
                data.ncols()
            )));
        }
        let n = qubits_for_dim(data.nrows())?;
        let rho = Self { n_qubits: n, data };
        rho.validate()?;
        Ok(rho)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.data
    }

    pub fn trace(&self) -> Complex64 {
        self.data.trace()
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        gates::max_abs_diff(&self.data, &self.data.adjoint())
    }

    /// Smallest eigenvalue; O(d^3), meant for validation only.
    pub fn min_eigenvalue(&self) -> f64 {
        let herm = (&self.data + self.data.adjoint()) * Complex64::new(0.5, 0.0);
        SymmetricEigen::new(herm)
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn validate(&self) -> Result<()> {
        let tr = self.trace();
        if (tr - ONE).norm() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {tr}")));
        }
        let herm = self.hermiticity_deviation();
        if herm > HERMITIAN_TOL {
            return Err(Error::InvalidState(format!("not Hermitian ({herm:.3e})")));
        }
        let min_eig = self.min_eigenvalue();
        if min_eig < -PSD_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min_eig:.3e}")));
        }
        Ok(())
    }

    fn check_targets(&self, targets: &[usize]) -> Result<()> {
        if let Some(t) = targets.iter().find(|&&t| t >= self.n_qubits) {
            return Err(Error::Shape(format!(
                "target {t} outside a {}-qubit register",
                self.n_qubits
            )));
        }
        Ok(())
    }

    pub fn apply_unitary(&self, g: &UnitaryGate) -> Result<Self> {
        let mut out = self.clone();
        out.apply_unitary_mut(g)?;
        Ok(out)
    }

    pub fn apply_unitary_mut(&mut self, g: &UnitaryGate) -> Result<()> {
        self.check_targets(&g.targets)?;
        self.apply_matrix_mut(&g.matrix, &g.targets)
    }

    /// Conjugate by a raw unitary on `targets`; the matrix is not re-validated.
    pub fn apply_matrix_mut(&mut self, u: &CMatrix, targets: &[usize]) -> Result<()> {
        self.check_targets(targets)?;
        let k = 1 << targets.len();
        if u.nrows() != k || u.ncols() != k {
            return Err(Error::Shape(format!(
                "{}x{} operator on {} target(s)",
                u.nrows(),
                u.ncols(),
                targets.len()
            )));
        }
        apply_left(&mut self.data, u, targets);
        apply_right_dagger(&mut self.data, u, targets);
        Ok(())
    }

    pub fn apply_channel(&self, ch: &KrausChannel) -> Result<Self> {
        ch.validate()?;
        let mut out = self.clone();
        out.apply_channel_mut(ch)?;
        Ok(out)
    }

    /// Apply a channel already known to be CPTP.
    pub fn apply_channel_mut(&mut self, ch: &KrausChannel) -> Result<()> {
        self.check_targets(&ch.targets)?;
        if ch.operators.iter().any(|k| k.nrows() != ch.dim()) {
            return Err(Error::Shape("Kraus operator dimension".into()));
        }
        ch.apply_to(&mut self.data);
        Ok(())
    }

    /// `Tr(P rho)`.
    pub fn expectation(&self, p: &PauliObservable) -> Result<f64> {
        if p.len() != self.n_qubits {
            return Err(Error::Shape(format!(
                "{}-qubit observable on a {}-qubit register",
                p.len(),
                self.n_qubits
            )));
        }
        let flip = p.flip_mask();
        let mut acc = ZERO;
        for j in 0..self.dim() {
            acc += p.column_phase(j) * self.data[(j, j ^ flip)];
        }
        Ok(acc.re)
    }

    /// Finite-shot estimate of `Tr(P rho)`: rotate each non-identity factor
    /// into the Z basis, sample bitstrings from the diagonal, and average the
    /// parity eigenvalues.
    pub fn sample_expectation(&self, p: &PauliObservable, shots: u32, rng: &mut RngStream) -> Result<f64> {
        if shots == 0 {
            return Err(Error::Shape("shots must be positive".into()));
        }
        let probs = self.measurement_distribution(p)?;
        let support = p.support_mask();
        let cumulative: Vec<f64> = probs
            .iter()
            .scan(0.0, |acc, &x| {
                *acc += x;
                Some(*acc)
            })
            .collect();
        let total = *cumulative.last().unwrap_or(&1.0);
        let mut sum: i64 = 0;
        for _ in 0..shots {
            let u: f64 = rng.random::<f64>() * total;
            let idx = cumulative.partition_point(|&c| c <= u).min(cumulative.len() - 1);
            sum += if (idx & support).count_ones().is_multiple_of(2) {
                1
            } else {
                -1
            };
        }
        Ok(sum as f64 / shots as f64)
    }

    /// Computational-basis outcome probabilities after rotating into the eigenbasis of `p`.
    pub fn measurement_distribution(&self, p: &PauliObservable) -> Result<Vec<f64>> {
        if p.len() != self.n_qubits {
            return Err(Error::Shape(format!(
                "{}-qubit observable on a {}-qubit register",
                p.len(),
                self.n_qubits
            )));
        }
        let mut rotated = self.data.clone();
        let h = gates::hadamard();
        let hs = &h * gates::s_dagger();
        for (q, op) in p.ops().iter().enumerate() {
            let u = match op {
                Pauli::X => &h,
                Pauli::Y => &hs,
                Pauli::I | Pauli::Z => continue,
            };
            apply_left(&mut rotated, u, &[q]);
            apply_right_dagger(&mut rotated, u, &[q]);
        }
        Ok((0..self.dim()).map(|i| rotated[(i, i)].re.max(0.0)).collect())
    }

    /// `<psi|rho|psi>`.
    pub fn state_fidelity(&self, psi: &[Complex64]) -> Result<f64> {
        if psi.len() != self.dim() {
            return Err(Error::Shape(format!(
                "state of length {} for a {}-dim register",
                psi.len(),
                self.dim()
            )));
        }
        check_normalized(psi)?;
        let v = nalgebra::DVector::from_column_slice(psi);
        Ok((v.adjoint() * &self.data * &v)[(0, 0)].re)
    }

    /// Register with `self` on the low qubits and `other` above them.
    pub fn tensor(&self, other: &DensityMatrix) -> Result<Self> {
        let n = self.n_qubits + other.n_qubits;
        check_size(n)?;
        Ok(Self {
            n_qubits: n,
            data: gates::kron(&other.data, &self.data),
        })
    }

    /// Trace out one qubit; higher qubits shift down by one.
    pub fn partial_trace(&self, qubit: usize) -> Result<Self> {
        self.check_targets(&[qubit])?;
        if self.n_qubits == 1 {
            return Err(Error::Size(0));
        }
        let d = self.dim() / 2;
        let low = (1usize << qubit) - 1;
        let expand = |i: usize| ((i & !low) << 1) | (i & low);
        let bit = 1usize << qubit;
        let mut data = CMatrix::zeros(d, d);
        for r in 0..d {
            let rr = expand(r);
            for c in 0..d {
                let cc = expand(c);
                data[(r, c)] = self.data[(rr, cc)] + self.data[(rr | bit, cc | bit)];
            }
        }
        Ok(Self {
            n_qubits: self.n_qubits - 1,
            data,
        })
    }

    /// Reduced state on `keep`, with `keep[k]` becoming qubit `k`.
    pub fn reduced(&self, keep: &[usize]) -> Result<Self> {
        self.check_targets(keep)?;
        let mut state = self.clone();
        let mut labels: Vec<usize> = (0..self.n_qubits).collect();
        for q in (0..self.n_qubits).rev() {
            if !keep.contains(&q) {
                state = state.partial_trace(q)?;
                labels.remove(q);
            }
        }
        let order: Vec<usize> = keep
            .iter()
            .map(|k| labels.iter().position(|l| l == k).expect("kept qubit"))
            .collect();
        state.permuted(&order)
    }

    /// New register whose qubit `k` is old qubit `order[k]`.
    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        let n = self.n_qubits;
        let mut sorted = order.to_vec();
        sorted.sort_unstable();
        if sorted != (0..n).collect::<Vec<_>>() {
            return Err(Error::Shape(format!("{order:?} is not a permutation of {n} qubits")));
        }
        let map = |i: usize| {
            order
                .iter()
                .enumerate()
                .fold(0, |acc, (k, &old)| acc | (((i >> k) & 1) << old))
        };
        let d = self.dim();
        let idx: Vec<usize> = (0..d).map(map).collect();
        let data = CMatrix::from_fn(d, d, |r, c| self.data[(idx[r], idx[c])]);
        Ok(Self { n_qubits: n, data })
    }
}

fn qubits_for_dim(d: usize) -> Result<usize> {
    if d < 2 || !d.is_power_of_two() {
        return Err(Error::Shape(format!("dimension {d} is not a power of two >= 2")));
    }
    let n = d.trailing_zeros() as usize;
    check_size(n)?;
    Ok(n)
}

fn check_normalized(psi: &[Complex64]) -> Result<()> {
    let norm: f64 = psi.iter().map(|a| a.norm_sqr()).sum();
    if (norm - 1.0).abs() > NORM_TOL {
        return Err(Error::InvalidState(format!("state vector has squared norm {norm}")));
    }
    Ok(())
}
