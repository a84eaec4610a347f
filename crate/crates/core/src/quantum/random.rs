//! Seeded random states and channels for property tests and audits.

use nalgebra::DVector;
use rand::Rng;
use rand_distr::StandardNormal;

use super::{DensityOperator, KrausChannel};
use crate::matcore::{c64, CMatrix, C64};

fn gaussian(rng: &mut impl Rng) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c64(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn ginibre(rows: usize, cols: usize, rng: &mut impl Rng) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

pub fn random_vector(n: usize, rng: &mut impl Rng) -> DVector<C64> {
    let v = DVector::from_fn(n, |_, _| gaussian(rng));
    let norm = v.norm();
    v / c64(norm, 0.0)
}

pub fn random_hermitian(d: usize, rng: &mut impl Rng) -> CMatrix {
    let g = ginibre(d, d, rng);
    (&g + g.adjoint()) * c64(0.5, 0.0)
}

/// `G G†` for a `d × rank` Ginibre matrix `G`.
pub fn random_psd(d: usize, rank: usize, rng: &mut impl Rng) -> CMatrix {
    let g = ginibre(d, rank, rng);
    &g * g.adjoint()
}

/// Isometry `rows × cols` (rows ≥ cols) from the QR decomposition of a Ginibre matrix.
pub fn random_isometry(rows: usize, cols: usize, rng: &mut impl Rng) -> CMatrix {
    assert!(rows >= cols);
    let qr = ginibre(rows, cols, rng).qr();
    let q = qr.q();
    let r = qr.r();
    // fix column phases so the distribution is Haar
    let mut q = q.columns(0, cols).into_owned();
    for k in 0..cols {
        let d = r[(k, k)];
        if d.norm() > 0.0 {
            let phase = d / c64(d.norm(), 0.0);
            for x in q.column_mut(k).iter_mut() {
                *x *= phase;
            }
        }
    }
    q
}

pub fn random_unitary(d: usize, rng: &mut impl Rng) -> CMatrix {
    random_isometry(d, d, rng)
}

/// Random state on system `label` with the given rank.
pub fn random_state(label: &str, d: usize, rank: usize, rng: &mut impl Rng) -> DensityOperator {
    let p = random_psd(d, rank, rng);
    let t = p.trace();
    DensityOperator::single(label, p / t).expect("normalized PSD matrix is a state")
}

/// Random channel with `n_kraus` Kraus operators, cut from a random isometry.
pub fn random_channel(
    d_in: usize,
    d_out: usize,
    n_kraus: usize,
    input: &str,
    output: &str,
    rng: &mut impl Rng,
) -> KrausChannel {
    let v = random_isometry(d_out * n_kraus, d_in, rng);
    let kraus = (0..n_kraus)
        .map(|l| v.rows(l * d_out, d_out).into_owned())
        .collect();
    KrausChannel::new(kraus, input, output).expect("isometry blocks form a channel")
}
