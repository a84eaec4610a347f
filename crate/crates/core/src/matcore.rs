//! Dense complex linear algebra used by every other module.
//!
//! Matrices are `nalgebra::DMatrix<Complex<f64>>`. Spectral routines check
//! finiteness and Hermiticity at the boundary and return eigenvalues and
//! singular values in descending order.

use nalgebra::{Complex, DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;

/// Relative cutoff below which eigenvalues count as kernel.
pub const RANK_CUT: f64 = 1e-12;
/// Largest asymmetry `max|H - H†|` (relative to `max(1, ‖H‖_F)`) that is silently symmetrized.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Smallest eigenvalue (relative to `max(1, λ_max)`) still accepted as PSD.
pub const PSD_TOL: f64 = 1e-10;

#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

pub fn check_finite(m: &CMatrix) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

fn check_square(m: &CMatrix, what: &str) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "{what} must be square, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(())
}

/// Largest entry of `H - H†`.
pub fn hermitian_asymmetry(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Returns `(H + H†)/2`, rejecting inputs that are not Hermitian to working precision.
pub fn hermitize(m: &CMatrix) -> Result<CMatrix> {
    check_square(m, "Hermitian matrix")?;
    check_finite(m)?;
    let asym = hermitian_asymmetry(m);
    if asym > HERMITIAN_TOL * m.norm().max(1.0) {
        return Err(Error::NotHermitian(asym));
    }
    Ok((m + m.adjoint()) * c64(0.5, 0.0))
}

#[derive(Debug, Clone)]
pub struct HermEig {
    /// Sorted descending.
    pub values: Vec<f64>,
    /// Eigenvectors as columns, in the order of `values`.
    pub vectors: CMatrix,
}

impl HermEig {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn max_value(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    /// Number of eigenvalues above `cut * λ_max`.
    pub fn rank(&self, cut: f64) -> usize {
        let lmax = self.max_value();
        if lmax <= 0.0 {
            return 0;
        }
        self.values.iter().take_while(|&&v| v > cut * lmax).count()
    }

    /// Eigenvectors spanning the support at relative cutoff `cut`.
    pub fn support(&self, cut: f64) -> CMatrix {
        let r = self.rank(cut);
        self.vectors.columns(0, r).into_owned()
    }

    /// Eigenvectors spanning the orthogonal complement of the support.
    pub fn kernel(&self, cut: f64) -> CMatrix {
        let r = self.rank(cut);
        self.vectors.columns(r, self.dim() - r).into_owned()
    }

    /// `Σ_k f(λ_k) |v_k⟩⟨v_k|` over the listed eigenvalue indices.
    pub fn map_on(&self, count: usize, f: impl Fn(f64) -> C64) -> CMatrix {
        let v = self.vectors.columns(0, count);
        let mut scaled = v.into_owned();
        for k in 0..count {
            let s = f(self.values[k]);
            for x in scaled.column_mut(k).iter_mut() {
                *x *= s;
            }
        }
        scaled * v.adjoint()
    }

    pub fn reconstruct(&self) -> CMatrix {
        self.map_on(self.dim(), |x| c64(x, 0.0))
    }
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues descending.
pub fn herm_eig(h: &CMatrix) -> Result<HermEig> {
    let h = hermitize(h)?;
    let n = h.nrows();
    if n == 0 {
        return Ok(HermEig {
            values: vec![],
            vectors: CMatrix::zeros(0, 0),
        });
    }
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok(HermEig { values, vectors })
}

/// Eigendecomposition that additionally rejects matrices with negative spectrum.
pub fn psd_eig(p: &CMatrix) -> Result<HermEig> {
    let eig = herm_eig(p)?;
    let lmin = eig.values.last().copied().unwrap_or(0.0);
    if lmin < -PSD_TOL * eig.max_value().max(1.0) {
        return Err(Error::NotPsd(lmin));
    }
    Ok(eig)
}

/// Thin singular value decomposition `M = U diag(s) V†`.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: CMatrix,
    /// Sorted descending.
    pub singular_values: Vec<f64>,
    pub v: CMatrix,
}

impl Svd {
    pub fn reconstruct(&self) -> CMatrix {
        let mut us = self.u.clone();
        for (k, &s) in self.singular_values.iter().enumerate() {
            us.column_mut(k).scale_mut(s);
        }
        us * self.v.adjoint()
    }

    pub fn rank(&self, cut: f64) -> usize {
        let smax = self.singular_values.first().copied().unwrap_or(0.0);
        if smax <= 0.0 {
            return 0;
        }
        self.singular_values
            .iter()
            .take_while(|&&s| s > cut * smax)
            .count()
    }
}

/// Thin SVD by Householder QR followed by one-sided Jacobi on the triangular
/// factor. Singular vectors of zero singular values are completed to an
/// orthonormal set.
pub fn svd(m: &CMatrix) -> Result<Svd> {
    check_finite(m)?;
    if m.nrows() < m.ncols() {
        let t = svd(&m.adjoint())?;
        return Ok(Svd {
            u: t.v,
            singular_values: t.singular_values,
            v: t.u,
        });
    }
    let n = m.ncols();
    if n == 0 {
        return Ok(Svd {
            u: CMatrix::zeros(m.nrows(), 0),
            singular_values: vec![],
            v: CMatrix::zeros(0, 0),
        });
    }
    let qr = m.clone().qr();
    let (q, mut a) = (qr.q(), qr.r());
    let mut v = CMatrix::identity(n, n);
    // same scale as the negligible-column test in the sweep
    let null = f64::EPSILON * a.norm();
    jacobi_orthogonalize(&mut a, &mut v);

    let norms: Vec<f64> = (0..n).map(|k| a.column(k).norm()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| norms[y].total_cmp(&norms[x]));
    let mut ur = CMatrix::zeros(n, n);
    let mut vo = CMatrix::zeros(n, n);
    let mut s = Vec::with_capacity(n);
    for (dst, &src) in order.iter().enumerate() {
        let nk = norms[src];
        if nk > null {
            ur.set_column(dst, &(a.column(src) / c64(nk, 0.0)));
        }
        vo.set_column(dst, &v.column(src));
        s.push(nk);
    }
    complete_orthonormal(&mut ur, &s, null);
    Ok(Svd {
        u: q * ur,
        singular_values: s,
        v: vo,
    })
}

/// Rotates pairs of columns of `a` until they are mutually orthogonal,
/// applying the same rotations to `v`.
fn jacobi_orthogonalize(a: &mut CMatrix, v: &mut CMatrix) {
    let n = a.ncols();
    // columns below this squared norm are rounding noise; rotating them only
    // loses unitarity of `v` through inaccurate phases
    let negligible = (f64::EPSILON * a.norm()).powi(2);
    for _sweep in 0..80 {
        let mut rotated = false;
        for i in 0..n {
            for j in i + 1..n {
                let alpha = a.column(i).norm_squared();
                let beta = a.column(j).norm_squared();
                let gamma = a.column(i).dotc(&a.column(j));
                let g = gamma.norm();
                if g <= f64::EPSILON * (alpha * beta).sqrt()
                    || g == 0.0
                    || alpha.min(beta) <= negligible
                {
                    continue;
                }
                rotated = true;
                // rephase column j so that the overlap is real and positive
                let phase = gamma.conj() / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let sn = c * t;
                for mat in [&mut *a, &mut *v] {
                    for r in 0..mat.nrows() {
                        let x = mat[(r, i)];
                        let y = mat[(r, j)] * phase;
                        mat[(r, i)] = x * c - y * sn;
                        mat[(r, j)] = x * sn + y * c;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
}

/// Replaces columns with weight at most `null` by unit vectors orthogonal to
/// the rest, then re-orthonormalizes in order.
fn complete_orthonormal(u: &mut CMatrix, weights: &[f64], null: f64) {
    let n = u.nrows();
    let project_out = |u: &CMatrix, k: usize, col: &mut nalgebra::DVector<C64>| {
        for _ in 0..2 {
            for p in 0..k {
                let proj = u.column(p).dotc(col);
                *col -= u.column(p) * proj;
            }
        }
    };
    for k in 0..u.ncols() {
        let mut col = u.column(k).into_owned();
        if weights[k] <= null {
            col.fill(C64::new(0.0, 0.0));
        }
        project_out(u, k, &mut col);
        if col.norm() < 0.5 {
            // the basis vector with the largest residual; residual norms
            // squared sum to n - k, so the best one is well conditioned
            col = (0..n)
                .map(|r| {
                    let mut e = nalgebra::DVector::from_element(n, C64::new(0.0, 0.0));
                    e[r] = C64::new(1.0, 0.0);
                    project_out(u, k, &mut e);
                    e
                })
                .max_by(|x, y| x.norm().total_cmp(&y.norm()))
                .expect("nonempty basis");
        }
        let nrm = col.norm();
        u.set_column(k, &(col / c64(nrm, 0.0)));
    }
}

/// `Σ_{λ_k > cut·λ_max} λ_k^z |v_k⟩⟨v_k|`.
pub fn matrix_power_on_support(p: &CMatrix, z: C64, rank_cut: f64) -> Result<CMatrix> {
    let eig = psd_eig(p)?;
    Ok(power_from_eig(&eig, z, rank_cut))
}

pub fn power_from_eig(eig: &HermEig, z: C64, rank_cut: f64) -> CMatrix {
    let r = eig.rank(rank_cut);
    eig.map_on(r, |x| (z * x.ln()).exp())
}

/// Real power on the support; convenience wrapper.
pub fn psd_power(p: &CMatrix, x: f64) -> Result<CMatrix> {
    matrix_power_on_support(p, c64(x, 0.0), RANK_CUT)
}

/// Projector onto the support of a PSD matrix.
pub fn support_projector(p: &CMatrix) -> Result<CMatrix> {
    matrix_power_on_support(p, c64(0.0, 0.0), RANK_CUT)
}

/// Partial trace of `m` on the tensor product with factor dimensions `dims`,
/// keeping the factors listed in `keep` (in their original order).
pub fn partial_trace(m: &CMatrix, dims: &[usize], keep: &[usize]) -> Result<CMatrix> {
    let total: usize = dims.iter().product();
    if m.nrows() != total || m.ncols() != total {
        return Err(Error::DimensionMismatch(format!(
            "operator is {}x{} but subsystems multiply to {total}",
            m.nrows(),
            m.ncols()
        )));
    }
    let mut keep_sorted = keep.to_vec();
    keep_sorted.sort_unstable();
    keep_sorted.dedup();
    if keep_sorted.len() != keep.len() || keep_sorted.iter().any(|&k| k >= dims.len()) {
        return Err(Error::DimensionMismatch(format!(
            "invalid subsystem selection {keep:?} for {} factors",
            dims.len()
        )));
    }
    let traced: Vec<usize> = (0..dims.len()).filter(|k| !keep_sorted.contains(k)).collect();
    let kept_dims: Vec<usize> = keep_sorted.iter().map(|&k| dims[k]).collect();
    let traced_dims: Vec<usize> = traced.iter().map(|&k| dims[k]).collect();
    let dk: usize = kept_dims.iter().product();

    let strides = strides(dims);
    // offset of every kept / traced multi-index in the full index space
    let kept_off = offsets(&keep_sorted, &kept_dims, &strides);
    let traced_off = offsets(&traced, &traced_dims, &strides);

    let mut out = CMatrix::zeros(dk, dk);
    for (i, &oi) in kept_off.iter().enumerate() {
        for (j, &oj) in kept_off.iter().enumerate() {
            let mut acc = c64(0.0, 0.0);
            for &ot in &traced_off {
                acc += m[(oi + ot, oj + ot)];
            }
            out[(i, j)] = acc;
        }
    }
    Ok(out)
}

pub(crate) fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * dims[k + 1];
    }
    s
}

fn offsets(factors: &[usize], fdims: &[usize], strides: &[usize]) -> Vec<usize> {
    let n: usize = fdims.iter().product();
    let mut out = Vec::with_capacity(n);
    let mut idx = vec![0usize; factors.len()];
    for _ in 0..n {
        out.push(
            factors
                .iter()
                .zip(&idx)
                .map(|(&f, &i)| i * strides[f])
                .sum(),
        );
        for k in (0..idx.len()).rev() {
            idx[k] += 1;
            if idx[k] < fdims[k] {
                break;
            }
            idx[k] = 0;
        }
    }
    out
}

/// Reorders tensor factors: factor `k` of the result is factor `perm[k]` of `m`.
pub(crate) fn permute_subsystems(m: &CMatrix, dims: &[usize], perm: &[usize]) -> CMatrix {
    let old_strides = strides(dims);
    let new_dims: Vec<usize> = perm.iter().map(|&k| dims[k]).collect();
    let n: usize = dims.iter().product();
    let mut map = Vec::with_capacity(n);
    let mut idx = vec![0usize; dims.len()];
    for _ in 0..n {
        map.push(idx.iter().zip(perm).map(|(&i, &k)| i * old_strides[k]).sum::<usize>());
        for k in (0..idx.len()).rev() {
            idx[k] += 1;
            if idx[k] < new_dims[k] {
                break;
            }
            idx[k] = 0;
        }
    }
    CMatrix::from_fn(n, n, |i, j| m[(map[i], map[j])])
}

/// `(1 ⊗ K ⊗ 1) M` where `K` acts on factor `slot`. Rows of `m` are indexed by
/// `dims`; the result has `dims[slot]` replaced by `K.nrows()`.
pub(crate) fn left_apply_on_slot(k: &CMatrix, m: &CMatrix, dims: &[usize], slot: usize) -> CMatrix {
    let pre: usize = dims[..slot].iter().product();
    let post: usize = dims[slot + 1..].iter().product();
    let din = dims[slot];
    let dout = k.nrows();
    let ncols = m.ncols();
    let mut out = CMatrix::zeros(pre * dout * post, ncols);
    for col in 0..ncols {
        for a in 0..pre {
            for i in 0..dout {
                for c in 0..post {
                    let mut acc = c64(0.0, 0.0);
                    for j in 0..din {
                        acc += k[(i, j)] * m[((a * din + j) * post + c, col)];
                    }
                    out[((a * dout + i) * post + c, col)] = acc;
                }
            }
        }
    }
    out
}

/// `(1 ⊗ K ⊗ 1) M (1 ⊗ K ⊗ 1)†` for square `M` on `dims`.
pub(crate) fn conjugate_on_slot(k: &CMatrix, m: &CMatrix, dims: &[usize], slot: usize) -> CMatrix {
    let half = left_apply_on_slot(k, m, dims, slot).adjoint();
    left_apply_on_slot(k, &half, dims, slot).adjoint()
}

pub(crate) fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Schatten `p`-(quasi-)norm.
pub fn schatten_norm(m: &CMatrix, p: f64) -> Result<f64> {
    if !(p > 0.0) {
        return Err(Error::InvalidOrder(p));
    }
    let s = svd(m)?.singular_values;
    if p.is_infinite() {
        return Ok(s.first().copied().unwrap_or(0.0));
    }
    // rounding-level singular values inflate quasi-norms (p < 1) noticeably
    let cut = RANK_CUT * s.first().copied().unwrap_or(0.0);
    Ok(s.iter()
        .filter(|&&x| x > cut)
        .map(|x| x.powf(p))
        .sum::<f64>()
        .powf(1.0 / p))
}

pub(crate) fn check_state_matrix(rho: &CMatrix) -> Result<HermEig> {
    check_square(rho, "density operator")?;
    let eig = herm_eig(rho).map_err(|e| match e {
        Error::NotHermitian(a) => Error::NotState(format!("not Hermitian (asymmetry {a:e})")),
        other => other,
    })?;
    let tr: f64 = eig.values.iter().sum();
    if (tr - 1.0).abs() > 1e-10 {
        return Err(Error::NotState(format!("trace {tr} differs from 1")));
    }
    let lmin = eig.values.last().copied().unwrap_or(0.0);
    if lmin < -1e-10 {
        return Err(Error::NotState(format!("negative eigenvalue {lmin:e}")));
    }
    Ok(eig)
}

/// Uhlmann fidelity `‖ρ^{1/2} σ^{1/2}‖_1` (not squared).
pub fn fidelity(rho: &CMatrix, sigma: &CMatrix) -> Result<f64> {
    if rho.shape() != sigma.shape() {
        return Err(Error::DimensionMismatch(format!(
            "fidelity of {:?} and {:?} operators",
            rho.shape(),
            sigma.shape()
        )));
    }
    let er = check_state_matrix(rho)?;
    let es = check_state_matrix(sigma)?;
    let half = c64(0.5, 0.0);
    let prod = power_from_eig(&er, half, RANK_CUT) * power_from_eig(&es, half, RANK_CUT);
    let f: f64 = svd(&prod)?.singular_values.iter().sum();
    Ok(f.min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(v: &[f64]) -> CMatrix {
        CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            v.len(),
            v.iter().map(|&x| c64(x, 0.0)),
        ))
    }

    #[test]
    fn eig_of_identity_and_diagonal() {
        let e = herm_eig(&CMatrix::identity(3, 3)).unwrap();
        assert_eq!(e.values, vec![1.0, 1.0, 1.0]);
        let e = herm_eig(&diag(&[0.0, 2.0, -1.0])).unwrap();
        assert!((e.values[0] - 2.0).abs() < 1e-14);
        assert!(e.values[1].abs() < 1e-14);
        assert!((e.values[2] + 1.0).abs() < 1e-14);
    }

    #[test]
    fn eig_rejects_asymmetric_and_nan() {
        let mut m = CMatrix::identity(2, 2);
        m[(0, 1)] = c64(1e-3, 0.0);
        assert!(matches!(herm_eig(&m), Err(Error::NotHermitian(_))));
        m[(0, 1)] = c64(f64::NAN, 0.0);
        assert!(matches!(herm_eig(&m), Err(Error::NonFinite)));
    }

    #[test]
    fn power_examples() {
        let id = CMatrix::identity(2, 2);
        let r = matrix_power_on_support(&id, c64(-0.5, 0.0), RANK_CUT).unwrap();
        assert!((r - &id).norm() < 1e-14);

        let r = matrix_power_on_support(&diag(&[4.0, 0.0]), c64(0.5, 0.0), RANK_CUT).unwrap();
        assert!((r - diag(&[2.0, 0.0])).norm() < 1e-14);

        let e = std::f64::consts::E;
        let r = matrix_power_on_support(&diag(&[e, 0.0]), c64(0.0, 1.0), RANK_CUT).unwrap();
        assert!((r[(0, 0)] - c64(1f64.cos(), 1f64.sin())).norm() < 1e-14);
        assert!(r[(1, 1)].norm() < 1e-14);
        assert!((r[(0, 0)].norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn power_rejects_negative() {
        assert!(matches!(
            matrix_power_on_support(&diag(&[1.0, -0.1]), c64(0.5, 0.0), RANK_CUT),
            Err(Error::NotPsd(_))
        ));
    }

    #[test]
    fn partial_trace_examples() {
        let a = diag(&[0.7, 0.3]);
        let b = diag(&[0.1, 0.5, 0.4]);
        let ab = kron(&a, &b);
        assert!((partial_trace(&ab, &[2, 3], &[0]).unwrap() - &a).norm() < 1e-15);
        assert!((partial_trace(&ab, &[2, 3], &[1]).unwrap() - &b).norm() < 1e-15);

        let mut phi = CMatrix::zeros(4, 4);
        for &i in &[0, 3] {
            for &j in &[0, 3] {
                phi[(i, j)] = c64(0.5, 0.0);
            }
        }
        let r = partial_trace(&phi, &[2, 2], &[0]).unwrap();
        assert!((r - diag(&[0.5, 0.5])).norm() < 1e-15);
        assert!(partial_trace(&phi, &[2, 3], &[0]).is_err());
    }

    #[test]
    fn schatten_examples() {
        let n = schatten_norm(&CMatrix::identity(3, 3), 2.0).unwrap();
        assert!((n - 3f64.sqrt()).abs() < 1e-14);
        let n = schatten_norm(&diag(&[3.0, 4.0]), 1.0).unwrap();
        assert!((n - 7.0).abs() < 1e-14);
        assert!(matches!(
            schatten_norm(&diag(&[1.0]), 0.0),
            Err(Error::InvalidOrder(_))
        ));
    }

    #[test]
    fn fidelity_examples() {
        let rho = diag(&[0.3, 0.7]);
        assert!((fidelity(&rho, &rho).unwrap() - 1.0).abs() < 1e-12);
        let z0 = diag(&[1.0, 0.0]);
        let z1 = diag(&[0.0, 1.0]);
        assert!(fidelity(&z0, &z1).unwrap().abs() < 1e-14);
        let mixed = diag(&[0.5, 0.5]);
        assert!((fidelity(&z0, &mixed).unwrap() - 0.5f64.sqrt()).abs() < 1e-14);
        assert!(matches!(
            fidelity(&diag(&[0.5, 0.6]), &mixed),
            Err(Error::NotState(_))
        ));
    }

    #[test]
    fn slot_application_matches_kron() {
        let k = CMatrix::from_fn(3, 2, |i, j| c64(i as f64 + 0.5, j as f64 - 0.25));
        let m = CMatrix::from_fn(8, 8, |i, j| c64((i * 8 + j) as f64, (i as f64) - (j as f64)));
        let dims = [2, 2, 2];
        let full = kron(&kron(&CMatrix::identity(2, 2), &k), &CMatrix::identity(2, 2));
        let expected = &full * &m * full.adjoint();
        let got = conjugate_on_slot(&k, &m, &dims, 1);
        assert!((got - expected).norm() < 1e-9);
    }
}
