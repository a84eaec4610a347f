mod common;

use common::{diag, ket, proj, rng};
use nalgebra::Complex;
use petzlab::matcore::{
    c64, fidelity, herm_eig, matrix_power_on_support, partial_trace, psd_power, schatten_norm, svd,
    CMatrix, C64, RANK_CUT,
};
use petzlab::quantum::random::{random_hermitian, random_psd, ginibre};
use petzlab::Error;
use proptest::prelude::*;
use rand::Rng;

/// Characteristic polynomial coefficients `c_0..=c_n` (monic) by Faddeev-LeVerrier.
fn char_poly(h: &CMatrix) -> Vec<C64> {
    let n = h.nrows();
    let mut c = vec![c64(0.0, 0.0); n + 1];
    c[n] = c64(1.0, 0.0);
    let mut m = CMatrix::zeros(n, n);
    for k in 1..=n {
        m = h * &m + CMatrix::identity(n, n) * c[n - k + 1];
        c[n - k] = -(h * &m).trace() / (k as f64);
    }
    c
}

/// All roots of a monic polynomial by Durand-Kerner iteration.
fn poly_roots(c: &[C64]) -> Vec<C64> {
    let n = c.len() - 1;
    let bound = 1.0 + c[..n].iter().map(|x| x.norm()).fold(0.0, f64::max);
    let seed = c64(0.4, 0.9);
    let mut z: Vec<C64> = (0..n).map(|k| seed.powu(k as u32) * bound).collect();
    let eval = |x: C64| c.iter().rev().fold(c64(0.0, 0.0), |acc, &a| acc * x + a);
    for _ in 0..5000 {
        let mut delta: f64 = 0.0;
        for i in 0..n {
            let mut den = c64(1.0, 0.0);
            for j in 0..n {
                if i != j {
                    den *= z[i] - z[j];
                }
            }
            let step = eval(z[i]) / den;
            z[i] -= step;
            delta = delta.max(step.norm());
        }
        if delta < 1e-15 {
            break;
        }
    }
    z
}

#[test]
fn eigenvalues_of_simple_matrices() {
    let e = herm_eig(&CMatrix::identity(3, 3)).unwrap();
    assert_eq!(e.values, vec![1.0, 1.0, 1.0]);
    let e = herm_eig(&diag(&[2.0, 0.0, -1.0])).unwrap();
    assert_eq!(e.values, vec![2.0, 0.0, -1.0]);
}

#[test]
fn eigenvalues_match_characteristic_polynomial_roots() {
    let mut r = rng(11);
    for _ in 0..20 {
        let h = random_hermitian(6, &mut r);
        let mut roots: Vec<f64> = poly_roots(&char_poly(&h)).iter().map(|z| z.re).collect();
        roots.sort_by(|a, b| b.total_cmp(a));
        let e = herm_eig(&h).unwrap();
        for (a, b) in e.values.iter().zip(&roots) {
            assert!((a - b).abs() < 1e-7, "{a} vs {b}");
        }
    }
}

#[test]
fn non_hermitian_input_is_rejected() {
    let mut m = CMatrix::identity(2, 2);
    m[(0, 1)] = c64(1.0, 0.0);
    assert!(matches!(herm_eig(&m), Err(Error::NotHermitian(_))));
    m[(0, 1)] = c64(f64::NAN, 0.0);
    assert!(matches!(herm_eig(&m), Err(Error::NonFinite)));
}

#[test]
fn eigendecomposition_residuals_on_many_matrices() {
    let mut r = rng(12);
    for _ in 0..1000 {
        let d = r.random_range(1..=32);
        let h = random_hermitian(d, &mut r);
        let e = herm_eig(&h).unwrap();
        assert!((e.reconstruct() - &h).norm() <= 1e-10 * h.norm());
        assert!((e.vectors.adjoint() * &e.vectors - CMatrix::identity(d, d)).norm() <= 1e-12 * d as f64);
        assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
    }
}

#[test]
fn svd_residuals_on_rectangular_matrices() {
    let mut r = rng(13);
    for _ in 0..200 {
        let (m, n) = (r.random_range(1..=40), r.random_range(1..=40));
        let rank = r.random_range(1..=m.min(n));
        let a = ginibre(m, rank, &mut r) * ginibre(rank, n, &mut r);
        let s = svd(&a).unwrap();
        let k = m.min(n);
        assert!((s.reconstruct() - &a).norm() <= 1e-10 * a.norm());
        assert!((s.u.adjoint() * &s.u - CMatrix::identity(k, k)).norm() <= 1e-12 * k as f64);
        assert!((s.v.adjoint() * &s.v - CMatrix::identity(k, k)).norm() <= 1e-12 * k as f64);
        assert!(s.singular_values.windows(2).all(|w| w[0] >= w[1]));
        assert!(s.singular_values.iter().all(|&x| x >= 0.0));
    }
}

#[test]
fn powers_on_support() {
    let i2 = CMatrix::identity(2, 2);
    let p = matrix_power_on_support(&i2, c64(-0.5, 0.0), RANK_CUT).unwrap();
    assert!((p - &i2).norm() < 1e-14);
    let p = matrix_power_on_support(&diag(&[4.0, 0.0]), c64(0.5, 0.0), RANK_CUT).unwrap();
    assert!((p - diag(&[2.0, 0.0])).norm() < 1e-14);
    let e = std::f64::consts::E;
    let p = matrix_power_on_support(&diag(&[e, 0.0]), c64(0.0, 1.0), RANK_CUT).unwrap();
    let expected = c64(1.0f64.cos(), 1.0f64.sin());
    assert!((p[(0, 0)] - expected).norm() < 1e-14);
    assert!(p[(1, 1)].norm() < 1e-14);
    assert!(((p.adjoint() * &p)[(0, 0)] - c64(1.0, 0.0)).norm() < 1e-14);
    assert!(matches!(
        matrix_power_on_support(&diag(&[1.0, -0.5]), c64(0.5, 0.0), RANK_CUT),
        Err(Error::NotPsd(_))
    ));
}

#[test]
fn partial_trace_examples() {
    let a = diag(&[0.3, 0.7]);
    let b = diag(&[0.1, 0.2, 0.7]);
    let t = partial_trace(&a.kronecker(&b), &[2, 3], &[0]).unwrap();
    assert!((t - &a).norm() < 1e-15);
    let phi = (ket(4, 0) + ket(4, 3)) / c64(2f64.sqrt(), 0.0);
    let t = partial_trace(&proj(&phi), &[2, 2], &[0]).unwrap();
    assert!((t - CMatrix::identity(2, 2) * c64(0.5, 0.0)).norm() < 1e-15);
    assert!(matches!(
        partial_trace(&CMatrix::identity(5, 5), &[2, 2], &[0]),
        Err(Error::DimensionMismatch(_))
    ));
}

#[test]
fn partial_trace_matches_index_sum() {
    let mut r = rng(14);
    for (da, db) in [(2, 2), (3, 2), (2, 3)] {
        let m = random_psd(da * db, da * db, &mut r);
        let keep_a = partial_trace(&m, &[da, db], &[0]).unwrap();
        let keep_b = partial_trace(&m, &[da, db], &[1]).unwrap();
        for i in 0..da {
            for j in 0..da {
                let mut s = c64(0.0, 0.0);
                for k in 0..db {
                    s += m[(i * db + k, j * db + k)];
                }
                assert!((s - keep_a[(i, j)]).norm() < 1e-14);
            }
        }
        for i in 0..db {
            for j in 0..db {
                let mut s = c64(0.0, 0.0);
                for k in 0..da {
                    s += m[(k * db + i, k * db + j)];
                }
                assert!((s - keep_b[(i, j)]).norm() < 1e-14);
            }
        }
    }
}

#[test]
fn schatten_examples() {
    assert!((schatten_norm(&CMatrix::identity(3, 3), 2.0).unwrap() - 3f64.sqrt()).abs() < 1e-14);
    assert!((schatten_norm(&diag(&[3.0, 4.0]), 1.0).unwrap() - 7.0).abs() < 1e-14);
    assert!(matches!(schatten_norm(&diag(&[1.0]), 0.0), Err(Error::InvalidOrder(_))));
    let mut r = rng(15);
    let m = ginibre(5, 5, &mut r);
    // singular values from the eigenvalues of M†M
    let e = herm_eig(&(m.adjoint() * &m)).unwrap();
    let oracle: f64 = e.values.iter().map(|x| x.max(0.0).sqrt().sqrt()).sum::<f64>().powi(2);
    assert!((schatten_norm(&m, 0.5).unwrap() - oracle).abs() < 1e-10 * oracle);
}

#[test]
fn fidelity_examples() {
    let p0 = proj(&ket(2, 0));
    let p1 = proj(&ket(2, 1));
    let half = CMatrix::identity(2, 2) * c64(0.5, 0.0);
    assert!((fidelity(&p0, &p0).unwrap() - 1.0).abs() < 1e-14);
    assert!(fidelity(&p0, &p1).unwrap().abs() < 1e-14);
    let f = fidelity(&p0, &half).unwrap();
    assert!((f - 0.5f64.sqrt()).abs() < 1e-14);
    // tr √(√ρ σ √ρ) route
    let s = psd_power(&p0, 0.5).unwrap();
    let inner = herm_eig(&(&s * &half * &s)).unwrap();
    let alt: f64 = inner.values.iter().map(|x| x.max(0.0).sqrt()).sum();
    assert!((f - alt).abs() < 1e-14);
}

fn state(d: usize, rank: usize, r: &mut impl Rng) -> CMatrix {
    let p = random_psd(d, rank, r);
    let t = p.trace();
    p / t
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn powers_compose(seed in any::<u64>(), d in 1usize..7, a in -1.0f64..1.0, b in -2.0f64..2.0, c in -1.0f64..1.0, e in -2.0f64..2.0) {
        let mut r = rng(seed);
        let rank = r.random_range(1..=d);
        let p = random_psd(d, rank, &mut r);
        let z1 = Complex::new(a, b);
        let z2 = Complex::new(c, e);
        let lhs = matrix_power_on_support(&p, z1, RANK_CUT).unwrap() * matrix_power_on_support(&p, z2, RANK_CUT).unwrap();
        let rhs = matrix_power_on_support(&p, z1 + z2, RANK_CUT).unwrap();
        prop_assert!((lhs - &rhs).norm() <= 1e-9 * rhs.norm().max(1.0));
    }

    #[test]
    fn schatten_two_is_frobenius(seed in any::<u64>(), m in 1usize..8, n in 1usize..8) {
        let a = ginibre(m, n, &mut rng(seed));
        let s2 = schatten_norm(&a, 2.0).unwrap();
        let fro: f64 = a.iter().map(|x| x.norm_sqr()).sum();
        prop_assert!((s2 * s2 - fro).abs() <= 1e-10 * fro.max(1.0));
    }

    #[test]
    fn fidelity_symmetric_and_multiplicative(seed in any::<u64>(), d1 in 1usize..4, d2 in 1usize..4) {
        let mut r = rng(seed);
        let (r1, s1) = (state(d1, d1, &mut r), state(d1, 1, &mut r));
        let (r2, s2) = (state(d2, 1, &mut r), state(d2, d2, &mut r));
        let f = fidelity(&r1, &s1).unwrap();
        prop_assert!((f - fidelity(&s1, &r1).unwrap()).abs() <= 1e-9);
        let joint = fidelity(&r1.kronecker(&r2), &s1.kronecker(&s2)).unwrap();
        prop_assert!((joint - f * fidelity(&r2, &s2).unwrap()).abs() <= 1e-9);
    }

    #[test]
    fn imaginary_rotation_trace_bound(seed in any::<u64>(), d in 1usize..7, s in -1.0f64..1.0, t in -5.0f64..5.0) {
        let mut r = rng(seed);
        let x = random_psd(d, r.random_range(1..=d), &mut r);
        let y = random_psd(d, r.random_range(1..=d), &mut r);
        let yp = matrix_power_on_support(&y, Complex::new(s, t), RANK_CUT).unwrap();
        let ym = matrix_power_on_support(&y, Complex::new(s, -t), RANK_CUT).unwrap();
        let ys = matrix_power_on_support(&y, Complex::new(s, 0.0), RANK_CUT).unwrap();
        let rotated = (&x * yp * &x * ym).trace();
        let plain = (&x * &ys * &x * &ys).trace().re;
        let scale = plain.abs().max(1.0);
        prop_assert!(rotated.re >= -1e-9 * scale);
        prop_assert!(rotated.re <= plain + 1e-9 * scale);
        prop_assert!(rotated.im.abs() <= 1e-10 * scale);
    }
}
