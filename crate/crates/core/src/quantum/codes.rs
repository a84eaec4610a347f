use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;

use super::DensityOperator;
use crate::error::{Error, Result};
use crate::matcore::{c64, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CodeKind {
    BitFlip3,
    Lncy4,
    FiveQubit,
}

impl CodeKind {
    pub fn name(self) -> &'static str {
        match self {
            CodeKind::BitFlip3 => "bitflip3",
            CodeKind::Lncy4 => "lncy4",
            CodeKind::FiveQubit => "fivequbit",
        }
    }

    pub fn n_qubits(self) -> usize {
        match self {
            CodeKind::BitFlip3 => 3,
            CodeKind::Lncy4 => 4,
            CodeKind::FiveQubit => 5,
        }
    }
}

impl fmt::Display for CodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CodeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bitflip3" => Ok(CodeKind::BitFlip3),
            "lncy4" => Ok(CodeKind::Lncy4),
            "fivequbit" => Ok(CodeKind::FiveQubit),
            other => Err(Error::InvalidParameter(format!("unknown code `{other}`"))),
        }
    }
}

fn basis_state(n: usize, amps: &[(&str, f64)]) -> DVector<C64> {
    let mut v = DVector::zeros(1 << n);
    for (bits, a) in amps {
        let idx = usize::from_str_radix(bits, 2).expect("binary literal");
        v[idx] += c64(*a, 0.0);
    }
    v
}

// Five-qubit code: |0_L⟩ has +1/4 on six basis strings and -1/4 on ten.
const FIVE_PLUS: [&str; 6] = ["00000", "10010", "01001", "10100", "01010", "00101"];
const FIVE_MINUS: [&str; 10] = [
    "11011", "00110", "11000", "11101", "00011", "11110", "01111", "10001", "01100", "10111",
];

/// Logical basis vectors `(|0_L⟩, |1_L⟩)`, qubit 0 being the most significant bit.
pub fn logical_basis(kind: CodeKind) -> (DVector<C64>, DVector<C64>) {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    match kind {
        CodeKind::BitFlip3 => (
            basis_state(3, &[("000", 1.0)]),
            basis_state(3, &[("111", 1.0)]),
        ),
        CodeKind::Lncy4 => (
            basis_state(4, &[("0000", h), ("1111", h)]),
            basis_state(4, &[("0011", h), ("1100", h)]),
        ),
        CodeKind::FiveQubit => {
            let amps: Vec<(&str, f64)> = FIVE_PLUS
                .iter()
                .map(|b| (*b, 0.25))
                .chain(FIVE_MINUS.iter().map(|b| (*b, -0.25)))
                .collect();
            let zero = basis_state(5, &amps);
            // X^{⊗5} flips every bit, i.e. reverses the index order
            let one = DVector::from_fn(32, |i, _| zero[31 - i]);
            (zero, one)
        }
    }
}

/// `(|0_L⟩⟨0_L| + |1_L⟩⟨1_L|)/2` on system `A`.
pub fn make_code_source(kind: CodeKind) -> Result<DensityOperator> {
    let (z, o) = logical_basis(kind);
    let m = (&z * z.adjoint() + &o * o.adjoint()) * c64(0.5, 0.0);
    DensityOperator::single("A", m)
}
