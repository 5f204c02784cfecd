use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    fn from_char(c: char) -> Option<Self> {
        match c.to_ascii_uppercase() {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// A Pauli string. Character `k` of the textual form acts on qubit `k`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PauliObservable {
    ops: Vec<Pauli>,
}

impl PauliObservable {
    pub fn new(ops: Vec<Pauli>) -> Result<Self> {
        if ops.is_empty() {
            return Err(Error::Shape("empty Pauli string".into()));
        }
        Ok(Self { ops })
    }

    /// `P_i P_j` on an `n`-qubit register, identity elsewhere.
    pub fn two_body(n: usize, i: usize, j: usize, p: Pauli) -> Result<Self> {
        if i >= n || j >= n || i == j {
            return Err(Error::Shape(format!("qubits ({i}, {j}) on a {n}-qubit register")));
        }
        let mut ops = vec![Pauli::I; n];
        ops[i] = p;
        ops[j] = p;
        Self::new(ops)
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn ops(&self) -> &[Pauli] {
        &self.ops
    }

    /// Bit mask of qubits carrying X or Y.
    pub(crate) fn flip_mask(&self) -> usize {
        self.ops
            .iter()
            .enumerate()
            .filter(|(_, p)| matches!(p, Pauli::X | Pauli::Y))
            .fold(0, |m, (q, _)| m | (1 << q))
    }

    /// Bit mask of qubits carrying a non-identity factor.
    pub(crate) fn support_mask(&self) -> usize {
        self.ops
            .iter()
            .enumerate()
            .filter(|(_, p)| **p != Pauli::I)
            .fold(0, |m, (q, _)| m | (1 << q))
    }

    /// Matrix element `<j ^ flip | P | j>`.
    pub(crate) fn column_phase(&self, j: usize) -> Complex64 {
        let mut phase = Complex64::new(1.0, 0.0);
        for (q, p) in self.ops.iter().enumerate() {
            let bit = (j >> q) & 1;
            phase *= match (p, bit) {
                (Pauli::I | Pauli::X, _) => Complex64::new(1.0, 0.0),
                (Pauli::Y, 0) => Complex64::new(0.0, 1.0),
                (Pauli::Y, _) => Complex64::new(0.0, -1.0),
                (Pauli::Z, 0) => Complex64::new(1.0, 0.0),
                (Pauli::Z, _) => Complex64::new(-1.0, 0.0),
            };
        }
        phase
    }
}

impl FromStr for PauliObservable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let ops = s
            .chars()
            .map(|c| Pauli::from_char(c).ok_or_else(|| Error::Shape(format!("bad Pauli letter {c:?}"))))
            .collect::<Result<Vec<_>>>()?;
        Self::new(ops)
    }
}

impl fmt::Display for PauliObservable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.ops.iter().try_for_each(|p| write!(f, "{}", p.as_char()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_display() {
        let p: PauliObservable = "xIz".parse().unwrap();
        assert_eq!(p.to_string(), "XIZ");
        assert_eq!(p.flip_mask(), 0b001);
        assert_eq!(p.support_mask(), 0b101);
        assert!("XQ".parse::<PauliObservable>().is_err());
    }

    #[test]
    fn two_body_rejects_same_qubit() {
        assert!(PauliObservable::two_body(3, 1, 1, Pauli::Z).is_err());
        assert_eq!(PauliObservable::two_body(3, 0, 2, Pauli::Y).unwrap().to_string(), "YIY");
    }
}
