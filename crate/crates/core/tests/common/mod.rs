#![allow(dead_code)]

use nalgebra::DVector;
use petzlab::matcore::{c64, CMatrix, C64};
use petzlab::quantum::random::{random_channel, random_state};
use petzlab::quantum::{DensityOperator, KrausChannel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn diag(v: &[f64]) -> CMatrix {
    CMatrix::from_diagonal(&DVector::from_iterator(v.len(), v.iter().map(|&x| c64(x, 0.0))))
}

pub fn ket(d: usize, i: usize) -> DVector<C64> {
    DVector::from_fn(d, |k, _| c64(if k == i { 1.0 } else { 0.0 }, 0.0))
}

pub fn proj(v: &DVector<C64>) -> CMatrix {
    v * v.adjoint()
}

/// Random source on `A` (rank 1..=d_a) and random channel `A → B` with 1..=3 Kraus operators.
pub fn random_instance(rng: &mut impl Rng, d_a: usize, d_b: usize) -> (DensityOperator, KrausChannel) {
    let rank = rng.random_range(1..=d_a);
    let rho = random_state("A", d_a, rank, rng);
    let n_kraus = rng.random_range(d_a.div_ceil(d_b).max(1)..=3.max(d_a.div_ceil(d_b)));
    let ch = random_channel(d_a, d_b, n_kraus, "A", "B", rng);
    (rho, ch)
}

/// Dimensions `(d_a, d_b)` in `2..=4`.
pub fn random_dims(rng: &mut impl Rng) -> (usize, usize) {
    (rng.random_range(2..=4), rng.random_range(2..=4))
}

/// `Σ_ij |i⟩⟨j| ⊗ ... ` basis of `d × d` matrix units.
pub fn matrix_units(d: usize) -> Vec<CMatrix> {
    let mut out = Vec::new();
    for i in 0..d {
        for j in 0..d {
            let mut m = CMatrix::zeros(d, d);
            m[(i, j)] = c64(1.0, 0.0);
            out.push(m);
        }
    }
    out
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}
