use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::NativeGate;
use crate::simcore::gates::{self, CMatrix};

/// ZYZ Euler angles of `R = exp(-i theta Z/2) exp(-i phi Y/2) exp(-i lambda Z/2)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EulerAngles {
    pub theta: f64,
    pub phi: f64,
    pub lambda: f64,
}

impl EulerAngles {
    pub const fn new(theta: f64, phi: f64, lambda: f64) -> Self {
        Self { theta, phi, lambda }
    }

    pub fn from_slice(x: &[f64]) -> Option<Self> {
        match *x {
            [theta, phi, lambda] => Some(Self::new(theta, phi, lambda)),
            _ => None,
        }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.theta, self.phi, self.lambda]
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }

    /// The literal product of exponentials.
    pub fn matrix(&self) -> CMatrix {
        gates::rz(self.theta) * gates::ry(self.phi) * gates::rz(self.lambda)
    }

    /// Angles of `R^dagger`.
    pub fn inverse(&self) -> Self {
        Self::new(-self.lambda, -self.phi, -self.theta)
    }
}

/// Time-ordered native gates `[Rz, SX, Rz, SX, Rz]` implementing `R(theta, phi, lambda)`
/// up to global phase. Physical duration is two sqrt(X) pulses.
pub fn euler_to_native(params: &EulerAngles) -> Vec<NativeGate> {
    // SX Rz(a) SX ~ Ry(pi - a) Rz(pi), so R = Rz(theta) . SX Rz(pi - phi) SX . Rz(lambda - pi)
    vec![
        NativeGate::Rz(params.lambda - PI),
        NativeGate::Sx,
        NativeGate::Rz(PI - params.phi),
        NativeGate::Sx,
        NativeGate::Rz(params.theta),
    ]
}

/// Operator product of a time-ordered single-qubit gate list.
pub fn compose_single_qubit(gates_in_time_order: &[NativeGate]) -> CMatrix {
    gates_in_time_order
        .iter()
        .fold(gates::identity(1), |acc, g| g.matrix() * acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simcore::gates::phase_insensitive_distance;
    use proptest::prelude::*;

    // Independent oracle: the rotation from its axis-angle form via exp(-i a n.sigma/2),
    // where ZYZ composition is multiplied out explicitly.
    fn literal(theta: f64, phi: f64, lambda: f64) -> CMatrix {
        let z = |a: f64| gates::zx_precession(1.0, 0.0, a);
        let y = |a: f64| {
            let (s, c) = (a / 2.0).sin_cos();
            CMatrix::from_row_slice(2, 2, &[c.into(), (-s).into(), s.into(), c.into()])
        };
        z(theta) * y(phi) * z(lambda)
    }

    #[test]
    fn zero_angles_compose_to_identity() {
        let u = compose_single_qubit(&euler_to_native(&EulerAngles::default()));
        assert!(phase_insensitive_distance(&u, &gates::identity(1)) < 1e-12);
    }

    #[test]
    fn phi_pi_is_y() {
        let u = compose_single_qubit(&euler_to_native(&EulerAngles::new(0.0, PI, 0.0)));
        assert!(phase_insensitive_distance(&u, &gates::pauli_y()) < 1e-12);
    }

    #[test]
    fn pi_pi_zero_is_x_under_zyz() {
        // Rz(pi) Ry(pi) = (-iZ)(-iY) = -ZY = iX
        let a = EulerAngles::new(PI, PI, 0.0);
        let u = compose_single_qubit(&euler_to_native(&a));
        assert!(phase_insensitive_distance(&u, &literal(PI, PI, 0.0)) < 1e-12);
        assert!(phase_insensitive_distance(&u, &gates::pauli_x()) < 1e-12);
        // (pi, 0, 0) is a Z rotation under this convention, not Y
        let b = compose_single_qubit(&euler_to_native(&EulerAngles::new(PI, 0.0, 0.0)));
        assert!(phase_insensitive_distance(&b, &gates::pauli_z()) < 1e-12);
    }

    #[test]
    fn native_form_uses_two_sx_and_three_rz() {
        let g = euler_to_native(&EulerAngles::new(0.1, 0.2, 0.3));
        assert_eq!(g.iter().filter(|g| **g == NativeGate::Sx).count(), 2);
        assert_eq!(g.iter().filter(|g| matches!(g, NativeGate::Rz(_))).count(), 3);
    }

    proptest! {
        #[test]
        fn native_matches_literal_product(t in -7.0f64..7.0, p in -7.0f64..7.0, l in -7.0f64..7.0) {
            let a = EulerAngles::new(t, p, l);
            let native = compose_single_qubit(&euler_to_native(&a));
            prop_assert!(phase_insensitive_distance(&native, &literal(t, p, l)) < 1e-10);
            prop_assert!(phase_insensitive_distance(&a.matrix(), &literal(t, p, l)) < 1e-12);
            let round = a.inverse().matrix() * a.matrix();
            prop_assert!(phase_insensitive_distance(&round, &gates::identity(1)) < 1e-12);
        }
    }
}
