mod common;

use common::{diag, matrix_units, rng};
use nalgebra::DVector;
use petzlab::matcore::{c64, partial_trace, CMatrix, C64};
use petzlab::quantum::random::{random_channel, random_state, random_unitary};
use petzlab::quantum::{
    adjoint_apply, channel_from_choi, choi_of_channel, complementary_channel,
    entanglement_fidelity_direct, entanglement_fidelity_from_purification, logical_basis,
    make_channel, make_code_source, purify, stinespring_dilation, tensor_power, tensor_product,
    validate_cptp, ChannelKind, CodeKind, DensityOperator, KrausChannel,
};
use rand::Rng;

fn paulis() -> [CMatrix; 4] {
    let o = c64(0.0, 0.0);
    let l = c64(1.0, 0.0);
    let i = c64(0.0, 1.0);
    [
        CMatrix::identity(2, 2),
        CMatrix::from_row_slice(2, 2, &[o, l, l, o]),
        CMatrix::from_row_slice(2, 2, &[o, -i, i, o]),
        CMatrix::from_row_slice(2, 2, &[l, o, o, -l]),
    ]
}

/// Pauli `p` on qubit `q` of `n`, qubit 0 most significant.
fn single_qubit_error(n: usize, q: usize, p: &CMatrix) -> CMatrix {
    (0..n).fold(CMatrix::identity(1, 1), |acc, k| {
        if k == q {
            acc.kronecker(p)
        } else {
            acc.kronecker(&CMatrix::identity(2, 2))
        }
    })
}

fn action_residual(a: &KrausChannel, b: &KrausChannel) -> f64 {
    matrix_units(a.d_in())
        .iter()
        .map(|e| (a.apply_matrix(e).unwrap() - b.apply_matrix(e).unwrap()).norm())
        .fold(0.0, f64::max)
}

#[test]
fn five_qubit_code_satisfies_knill_laflamme() {
    let (z, o) = logical_basis(CodeKind::FiveQubit);
    let mut errors = vec![CMatrix::identity(32, 32)];
    for q in 0..5 {
        for p in &paulis()[1..] {
            errors.push(single_qubit_error(5, q, p));
        }
    }
    assert_eq!(errors.len(), 16);
    let basis = [&z, &o];
    for e in &errors {
        for f in &errors {
            let m = e.adjoint() * f;
            let el = |i: &DVector<C64>, j: &DVector<C64>| (i.adjoint() * &m * j)[(0, 0)];
            let c = el(basis[0], basis[0]);
            assert!((el(basis[1], basis[1]) - c).norm() < 1e-10);
            assert!(el(basis[0], basis[1]).norm() < 1e-10);
            assert!(el(basis[1], basis[0]).norm() < 1e-10);
        }
    }
}

#[test]
fn code_sources() {
    for kind in [CodeKind::BitFlip3, CodeKind::Lncy4, CodeKind::FiveQubit] {
        let rho = make_code_source(kind).unwrap();
        assert!((rho.matrix().trace() - c64(1.0, 0.0)).norm() < 1e-14);
        let src = purify(&rho).unwrap();
        assert_eq!(src.d_r(), 2);
        let back = src.projector().unwrap().reduced(&["A"]).unwrap();
        assert!((back.matrix() - rho.matrix()).norm() < 1e-12);
    }
    let rho = make_code_source(CodeKind::BitFlip3).unwrap();
    let m = rho.matrix();
    for i in 0..8 {
        for j in 0..8 {
            if ![0, 7].contains(&i) || ![0, 7].contains(&j) {
                assert_eq!(m[(i, j)], c64(0.0, 0.0));
            }
        }
    }
}

#[test]
fn bitflip_tensor_power_weights() {
    let p = 0.3;
    let ch = make_channel(ChannelKind::BitFlip, p, 2).unwrap();
    let mut weights: Vec<f64> = ch
        .kraus()
        .iter()
        .map(|k| (k.adjoint() * k).trace().re / 4.0)
        .collect();
    weights.sort_by(f64::total_cmp);
    let mut expected = vec![(1.0 - p) * (1.0 - p), p * (1.0 - p), p * (1.0 - p), p * p];
    expected.sort_by(f64::total_cmp);
    for (w, e) in weights.iter().zip(&expected) {
        assert!((w - e).abs() < 1e-14);
    }
    let ad = make_channel(ChannelKind::AmplitudeDamping, 0.4, 4).unwrap();
    assert_eq!(ad.kraus().len(), 16);
    validate_cptp(&ad).unwrap();
}

#[test]
fn dilation_reproduces_channel_and_complement() {
    let mut r = rng(21);
    for _ in 0..20 {
        let (da, db) = (r.random_range(2..=4), r.random_range(2..=4));
        let n = r.random_range(1..=3);
        let ch = random_channel(da, db, n.max(da.div_ceil(db)), "A", "B", &mut r);
        let iso = stinespring_dilation(&ch).unwrap();
        assert!((iso.v.adjoint() * &iso.v - CMatrix::identity(da, da)).norm() < 1e-12);
        assert_eq!(iso.d_e, da * db);
        let comp = complementary_channel(&ch).unwrap();
        validate_cptp(&comp).unwrap();
        for x in matrix_units(da) {
            let big = iso.dilate(&x, "B", "E").unwrap();
            let on_b = big.partial_trace(&["B"]).unwrap();
            let on_e = big.partial_trace(&["E"]).unwrap();
            assert!((on_b.matrix() - ch.apply_matrix(&x).unwrap()).norm() < 1e-9);
            assert!((on_e.matrix() - comp.apply_matrix(&x).unwrap()).norm() < 1e-9);
        }
    }
}

#[test]
fn amplitude_damping_dilation() {
    let ch = make_channel(ChannelKind::AmplitudeDamping, 0.5, 1).unwrap();
    let iso = stinespring_dilation(&ch).unwrap();
    assert_eq!(iso.d_e, 4);
    let active = (0..4)
        .filter(|&l| (0..2).any(|b| (0..2).any(|a| iso.v[(b * 4 + l, a)].norm() > 0.0)))
        .count();
    assert_eq!(active, 2);
    let comp = complementary_channel(&ch).unwrap();
    let x = diag(&[0.3, 0.7]);
    assert!((comp.apply_matrix(&x).unwrap().trace().re - 1.0).abs() < 1e-14);
}

#[test]
fn tensor_power_matches_pairwise_products() {
    let mut r = rng(22);
    for n in 1..=3 {
        let ch = random_channel(2, 2, 2, "A", "B", &mut r);
        let pairwise = (1..n).fold(ch.clone(), |acc, _| tensor_product(&acc, &ch));
        let power = tensor_power(&ch, n).unwrap();
        assert_eq!(power.d_in(), 1 << n);
        assert!(action_residual(&power, &pairwise) <= 1e-9);
    }
    let id = make_channel(ChannelKind::Identity, 0.0, 3).unwrap();
    assert!(action_residual(&id, &KrausChannel::identity(8, "A", "B")) < 1e-15);
}

#[test]
fn adjoint_is_dual_to_channel() {
    let mut r = rng(23);
    for _ in 0..20 {
        let (da, db) = (r.random_range(2..=4), r.random_range(2..=4));
        let ch = random_channel(da, db, 3.max(da.div_ceil(db)), "A", "B", &mut r);
        let x = random_state("A", da, da, &mut r).matrix().clone();
        let y = random_state("B", db, db, &mut r).matrix().clone();
        let lhs = (ch.apply_matrix(&x).unwrap() * &y).trace();
        let rhs = (&x * adjoint_apply(&ch, &y).unwrap()).trace();
        assert!((lhs - rhs).norm() < 1e-12);
    }
}

#[test]
fn choi_round_trip() {
    let id = KrausChannel::identity(2, "A", "B");
    let c = choi_of_channel(&id);
    assert!((c.trace().re - 2.0).abs() < 1e-15);
    assert!((c.clone() * &c - &c * c64(2.0, 0.0)).norm() < 1e-14);
    let dep = make_channel(ChannelKind::Depolarizing, 1.0, 1).unwrap();
    assert!((choi_of_channel(&dep) - CMatrix::identity(4, 4) * c64(0.5, 0.0)).norm() < 1e-14);

    let bf = make_channel(ChannelKind::BitFlip, 0.2, 1).unwrap();
    let back = channel_from_choi(&choi_of_channel(&bf), 2, 2, "A", "B").unwrap();
    assert!(action_residual(&bf, &back) <= 1e-9);

    let mut r = rng(24);
    for _ in 0..10 {
        let (da, db) = (r.random_range(2..=4), r.random_range(2..=4));
        let ch = random_channel(da, db, 2.max(da.div_ceil(db)), "A", "B", &mut r);
        let back = channel_from_choi(&choi_of_channel(&ch), da, db, "A", "B").unwrap();
        assert!(action_residual(&ch, &back) <= 1e-8);
        // Choi matrix by the index-sum definition
        let c = choi_of_channel(&ch);
        for (idx, e) in matrix_units(da).iter().enumerate() {
            let (i, j) = (idx / da, idx % da);
            let out = ch.apply_matrix(e).unwrap();
            for a in 0..db {
                for b in 0..db {
                    assert!((c[(i * db + a, j * db + b)] - out[(a, b)]).norm() < 1e-12);
                }
            }
        }
        let tr_out = partial_trace(&c, &[da, db], &[0]).unwrap();
        assert!((tr_out - CMatrix::identity(da, da)).norm() < 1e-10);
    }
}

#[test]
fn entanglement_fidelity_examples() {
    let half = DensityOperator::single("A", diag(&[0.5, 0.5])).unwrap();
    let dep = make_channel(ChannelKind::Depolarizing, 1.0, 1).unwrap();
    assert!((entanglement_fidelity_direct(&half, &dep).unwrap() - 0.25).abs() < 1e-14);
    let ad = make_channel(ChannelKind::AmplitudeDamping, 0.36, 1).unwrap();
    let f = entanglement_fidelity_direct(&half, &ad).unwrap();
    let trace_identity: f64 = ad.kraus().iter().map(|k| k.trace().norm_sqr()).sum::<f64>() / 4.0;
    assert!((f - 0.81).abs() < 1e-12);
    assert!((f - trace_identity).abs() < 1e-12);

    let rho = make_code_source(CodeKind::BitFlip3).unwrap();
    let n = make_channel(ChannelKind::BitFlip, 0.0, 3).unwrap();
    assert!((entanglement_fidelity_direct(&rho, &n).unwrap() - 1.0).abs() < 1e-10);
}

#[test]
fn entanglement_fidelity_is_purification_invariant() {
    let mut r = rng(25);
    for _ in 0..20 {
        let d = r.random_range(2..=4);
        let rho = random_state("A", d, r.random_range(1..=d), &mut r);
        let m = random_channel(d, d, r.random_range(1..=3), "A", "A", &mut r);
        let canonical = entanglement_fidelity_direct(&rho, &m).unwrap();
        let src = purify(&rho).unwrap();
        // (U ⊗ 1)|ψ⟩ on an enlarged reference
        let d_r = src.d_r() + 1;
        let u = random_unitary(d_r, &mut r);
        let mut padded = DVector::zeros(d_r * d);
        padded.rows_mut(0, src.d_r() * d).copy_from(&src.purification);
        let rotated = u.kronecker(&CMatrix::identity(d, d)) * padded;
        let other = entanglement_fidelity_from_purification(&rotated, d_r, &m).unwrap();
        assert!((canonical - other).abs() < 1e-10);
    }
}
