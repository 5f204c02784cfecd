use nalgebra::SymmetricEigen;
use num_complex::Complex64;

use super::gates::{max_abs_diff, CMatrix};
use super::{apply_left, apply_right_dagger, ZERO};
use crate::{Error, Result};

const CPTP_TOL: f64 = 1e-9;
/// Choi eigenvalues below this are treated as numerical zero.
const CHOI_CUTOFF: f64 = 1e-14;

/// A CPTP map `rho -> sum_k K_k rho K_k^dagger` on an ordered list of qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct KrausChannel {
    pub targets: Vec<usize>,
    pub operators: Vec<CMatrix>,
    pub duration_dt: u64,
}

impl KrausChannel {
    pub fn new(targets: Vec<usize>, operators: Vec<CMatrix>, duration_dt: u64) -> Result<Self> {
        let ch = Self {
            targets,
            operators,
            duration_dt,
        };
        ch.validate()?;
        Ok(ch)
    }

    pub fn identity(targets: Vec<usize>) -> Self {
        let d = 1 << targets.len();
        Self {
            targets,
            operators: vec![CMatrix::identity(d, d)],
            duration_dt: 0,
        }
    }

    pub fn unitary(targets: Vec<usize>, u: CMatrix, duration_dt: u64) -> Result<Self> {
        Self::new(targets, vec![u], duration_dt)
    }

    pub fn dim(&self) -> usize {
        1 << self.targets.len()
    }

    /// max |(sum K^dagger K - I)_ij|
    pub fn completeness_deviation(&self) -> f64 {
        let d = self.dim();
        let sum = self
            .operators
            .iter()
            .fold(CMatrix::zeros(d, d), |acc, k| acc + k.adjoint() * k);
        max_abs_diff(&sum, &CMatrix::identity(d, d))
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.dim();
        if self.operators.is_empty() {
            return Err(Error::Shape("channel without Kraus operators".into()));
        }
        if let Some(k) = self.operators.iter().find(|k| k.nrows() != d || k.ncols() != d) {
            return Err(Error::Shape(format!(
                "{}x{} Kraus operator on {} target(s)",
                k.nrows(),
                k.ncols(),
                self.targets.len()
            )));
        }
        let deviation = self.completeness_deviation();
        if deviation > CPTP_TOL {
            return Err(Error::NotCptp { deviation });
        }
        Ok(())
    }

    /// Apply the channel to a bare `d x d` matrix over exactly the channel's targets.
    pub fn apply_local(&self, m: &CMatrix) -> CMatrix {
        self.operators
            .iter()
            .fold(CMatrix::zeros(m.nrows(), m.ncols()), |acc, k| acc + k * m * k.adjoint())
    }

    /// Choi matrix `C[(i d + k), (j d + l)] = E(|i><j|)[k, l]`.
    pub fn choi(&self) -> CMatrix {
        choi_of(self.dim(), |m| self.apply_local(m))
    }

    /// Rebuild a minimal Kraus representation from a Choi matrix.
    pub fn from_choi(targets: Vec<usize>, choi: &CMatrix, duration_dt: u64) -> Result<Self> {
        let d = 1usize << targets.len();
        if choi.nrows() != d * d {
            return Err(Error::Shape(format!(
                "Choi matrix of size {} for d = {d}",
                choi.nrows()
            )));
        }
        let herm = (choi + choi.adjoint()) * Complex64::new(0.5, 0.0);
        let eig = SymmetricEigen::new(herm);
        let mut operators = Vec::new();
        for (idx, &lambda) in eig.eigenvalues.iter().enumerate() {
            if lambda <= CHOI_CUTOFF {
                continue;
            }
            let v = eig.eigenvectors.column(idx);
            let scale = lambda.sqrt();
            let mut k = CMatrix::zeros(d, d);
            for i in 0..d {
                for row in 0..d {
                    k[(row, i)] = v[i * d + row] * scale;
                }
            }
            operators.push(k);
        }
        if operators.is_empty() {
            operators.push(CMatrix::zeros(d, d));
        }
        Self::new(targets, operators, duration_dt)
    }

    /// `next` after `self`, as a single channel with at most `d^2` operators.
    pub fn then(&self, next: &KrausChannel) -> Result<Self> {
        if self.targets != next.targets {
            return Err(Error::Shape(format!(
                "cannot compose channels on {:?} and {:?}",
                self.targets, next.targets
            )));
        }
        let choi = choi_of(self.dim(), |m| next.apply_local(&self.apply_local(m)));
        Self::from_choi(self.targets.clone(), &choi, self.duration_dt + next.duration_dt)
    }

    /// Compose a sequence of channels on identical targets, first to last.
    pub fn compose_all<'a>(channels: impl IntoIterator<Item = &'a KrausChannel>) -> Result<Self> {
        let mut iter = channels.into_iter();
        let first = iter
            .next()
            .ok_or_else(|| Error::Shape("nothing to compose".into()))?
            .clone();
        iter.try_fold(first, |acc, ch| acc.then(ch))
    }

    /// In-place application on a register matrix; no validation.
    pub(crate) fn apply_to(&self, data: &mut CMatrix) {
        if self.operators.len() == 1 {
            apply_left(data, &self.operators[0], &self.targets);
            apply_right_dagger(data, &self.operators[0], &self.targets);
            return;
        }
        let mut out = CMatrix::from_element(data.nrows(), data.ncols(), ZERO);
        for k in &self.operators {
            let mut term = data.clone();
            apply_left(&mut term, k, &self.targets);
            apply_right_dagger(&mut term, k, &self.targets);
            out += term;
        }
        *data = out;
    }
}

fn choi_of(d: usize, map: impl Fn(&CMatrix) -> CMatrix) -> CMatrix {
    let mut choi = CMatrix::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            let mut basis = CMatrix::zeros(d, d);
            basis[(i, j)] = Complex64::new(1.0, 0.0);
            let img = map(&basis);
            for k in 0..d {
                for l in 0..d {
                    choi[(i * d + k, j * d + l)] = img[(k, l)];
                }
            }
        }
    }
    choi
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simcore::gates::{pauli_z, rz};

    fn dephasing(p: f64) -> KrausChannel {
        let i = CMatrix::identity(2, 2) * Complex64::new((1.0 - p).sqrt(), 0.0);
        let z = pauli_z() * Complex64::new(p.sqrt(), 0.0);
        KrausChannel::new(vec![0], vec![i, z], 0).unwrap()
    }

    #[test]
    fn rejects_non_trace_preserving() {
        let k = CMatrix::identity(2, 2) * Complex64::new(0.9, 0.0);
        assert!(matches!(
            KrausChannel::new(vec![0], vec![k], 0),
            Err(Error::NotCptp { .. })
        ));
    }

    #[test]
    fn choi_round_trip_preserves_action() {
        let ch = dephasing(0.3)
            .then(&KrausChannel::unitary(vec![0], rz(0.4), 0).unwrap())
            .unwrap();
        let rebuilt = KrausChannel::from_choi(vec![0], &ch.choi(), 0).unwrap();
        assert!(max_abs_diff(&ch.choi(), &rebuilt.choi()) < 1e-12);
        assert!(rebuilt.operators.len() <= 4);
    }

    #[test]
    fn dephasing_composes_multiplicatively() {
        // coherence factors (1 - 2p) multiply
        let a = dephasing(0.1);
        let b = dephasing(0.2);
        let ab = a.then(&b).unwrap();
        let expected_p = (1.0 - (0.8 * 0.6)) / 2.0;
        assert!(max_abs_diff(&ab.choi(), &dephasing(expected_p).choi()) < 1e-12);
    }
}
