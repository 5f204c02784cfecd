//! Bell-state cost from three two-qubit correlators, and the plain fidelity error.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::simcore::{Complex64, DensityMatrix, Pauli, PauliObservable};

pub const DEFAULT_SHOTS: u32 = 400;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostEstimate {
    pub value: f64,
    /// Zero for exact evaluation.
    pub shots_per_correlator: u32,
    pub std_error: f64,
}

impl CostEstimate {
    pub fn exact(value: f64) -> Self {
        Self {
            value,
            shots_per_correlator: 0,
            std_error: 0.0,
        }
    }

    pub fn fidelity(&self) -> f64 {
        1.0 - self.value
    }
}

const CORRELATORS: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];

fn correlator(n: usize, i: usize, j: usize, p: Pauli) -> Result<PauliObservable> {
    if i == j {
        return Err(Error::Shape(format!(
            "Bell cost needs two distinct qubits, got {i} twice"
        )));
    }
    PauliObservable::two_body(n, i, j, p)
}

fn combine(xx: f64, yy: f64, zz: f64) -> f64 {
    1.0 - 0.25 * (1.0 + xx - yy + zz)
}

/// `1 - (1 + <XX> - <YY> + <ZZ>)/4` on qubits `i`, `j`.
pub fn bell_cost_exact(rho: &DensityMatrix, i: usize, j: usize) -> Result<CostEstimate> {
    let n = rho.n_qubits();
    let mut e = [0.0; 3];
    for (slot, p) in e.iter_mut().zip(CORRELATORS) {
        *slot = rho.expectation(&correlator(n, i, j, p)?)?;
    }
    Ok(CostEstimate::exact(combine(e[0], e[1], e[2])))
}

/// Shot-sampled Bell cost; each correlator draws from its own substream.
/// Values are not clipped to `[0, 1]`.
pub fn bell_cost_sampled(
    rho: &DensityMatrix,
    i: usize,
    j: usize,
    shots: u32,
    rng: &mut RngStream,
) -> Result<CostEstimate> {
    let n = rho.n_qubits();
    let mut e = [0.0; 3];
    for (slot, p) in e.iter_mut().zip(CORRELATORS) {
        let mut sub = rng.fork();
        *slot = rho.sample_expectation(&correlator(n, i, j, p)?, shots, &mut sub)?;
    }
    let var: f64 = e.iter().map(|x| (1.0 - x * x).max(0.0)).sum();
    Ok(CostEstimate {
        value: combine(e[0], e[1], e[2]),
        shots_per_correlator: shots,
        std_error: 0.25 * (var / shots as f64).sqrt(),
    })
}

/// Exact evaluation when `shots` is `None`.
pub fn bell_cost(
    rho: &DensityMatrix,
    i: usize,
    j: usize,
    shots: Option<u32>,
    rng: &mut RngStream,
) -> Result<CostEstimate> {
    match shots {
        None => bell_cost_exact(rho, i, j),
        Some(s) => bell_cost_sampled(rho, i, j, s, rng),
    }
}

/// `1 - <psi|rho|psi>`.
pub fn general_fidelity_cost(rho: &DensityMatrix, psi: &[Complex64]) -> Result<CostEstimate> {
    Ok(CostEstimate::exact(1.0 - rho.state_fidelity(psi)?))
}

/// `(|00> + |11>)/sqrt(2)`.
pub fn phi_plus() -> Vec<Complex64> {
    let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    vec![h, Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), h]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simcore::CMatrix;
    use proptest::prelude::*;
    use rand::Rng;

    fn random_state(rng: &mut RngStream) -> DensityMatrix {
        // rho = A A^dagger / Tr, A with Gaussian-ish entries
        let a = CMatrix::from_fn(4, 4, |_, _| {
            Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        let m = &a * a.adjoint();
        let tr = m.trace();
        DensityMatrix::from_matrix(m / tr).unwrap()
    }

    #[test]
    fn bell_cost_examples() {
        let bell = DensityMatrix::from_pure(&phi_plus()).unwrap();
        assert!(bell_cost_exact(&bell, 0, 1).unwrap().value.abs() < 1e-12);
        let ground = DensityMatrix::ground_state(2).unwrap();
        assert!((bell_cost_exact(&ground, 0, 1).unwrap().value - 0.5).abs() < 1e-12);
        let mixed = DensityMatrix::maximally_mixed(2).unwrap();
        assert!((bell_cost_exact(&mixed, 0, 1).unwrap().value - 0.75).abs() < 1e-12);
        assert!(bell_cost_exact(&mixed, 1, 1).is_err());
    }

    #[test]
    fn noiseless_bell_samples_exactly_zero() {
        let bell = DensityMatrix::from_pure(&phi_plus()).unwrap();
        let c = bell_cost_sampled(&bell, 0, 1, DEFAULT_SHOTS, &mut RngStream::new(1)).unwrap();
        assert_eq!(c.value, 0.0);
        assert_eq!(c.std_error, 0.0);
        assert_eq!(c.shots_per_correlator, 400);
    }

    #[test]
    fn fidelity_cost_examples() {
        let bell = DensityMatrix::from_pure(&phi_plus()).unwrap();
        assert!(general_fidelity_cost(&bell, &phi_plus()).unwrap().value.abs() < 1e-12);
        let ground = DensityMatrix::ground_state(2).unwrap();
        assert!((general_fidelity_cost(&ground, &phi_plus()).unwrap().value - 0.5).abs() < 1e-12);
    }

    #[test]
    fn cost_on_larger_register_uses_reduced_pair() {
        let bell = DensityMatrix::from_pure(&phi_plus()).unwrap();
        let three = bell.tensor(&DensityMatrix::ground_state(1).unwrap()).unwrap();
        // pair sits on qubits 0, 1; move it to 0, 2
        let spread = three.permuted(&[0, 2, 1]).unwrap();
        assert!(bell_cost_exact(&spread, 0, 2).unwrap().value.abs() < 1e-12);
        // half a Bell pair next to |0>: every correlator vanishes
        assert!((bell_cost_exact(&spread, 0, 1).unwrap().value - 0.75).abs() < 1e-12);
    }

    #[test]
    fn sampled_mean_is_unbiased() {
        let mut rng = RngStream::new(7);
        let rho = random_state(&mut rng);
        let exact = bell_cost_exact(&rho, 0, 1).unwrap().value;
        let runs = 500;
        let (mut sum, mut se2) = (0.0, 0.0);
        for _ in 0..runs {
            let c = bell_cost_sampled(&rho, 0, 1, 400, &mut rng).unwrap();
            sum += c.value;
            se2 += c.std_error * c.std_error;
        }
        let mean = sum / runs as f64;
        let se = (se2 / runs as f64).sqrt() / (runs as f64).sqrt();
        assert!((mean - exact).abs() < 4.0 * se, "{mean} vs {exact} (se {se})");
    }

    proptest! {
        #[test]
        fn correlator_cost_equals_fidelity_error(seed in any::<u64>()) {
            let rho = random_state(&mut RngStream::new(seed));
            let a = bell_cost_exact(&rho, 0, 1).unwrap().value;
            let b = general_fidelity_cost(&rho, &phi_plus()).unwrap().value;
            prop_assert!((a - b).abs() < 1e-10);
            let swapped = bell_cost_exact(&rho, 1, 0).unwrap().value;
            prop_assert!((a - swapped).abs() < 1e-12);
            prop_assert!((0.0..=1.0).contains(&a));
        }
    }
}
