//! Schumacher-Westmoreland decoder.
//!
//! The construction is carried out on thin factors. With `G` the coefficient
//! matrix of `|σ⟩_RBE` (rows `RE`, columns `B`) and `G = U_g Σ_g V_g†`:
//!
//! * `σ_RE^{1/2} = U_g Σ_g U_g†`, and the alignment unitary restricted to
//!   `|0⟩_{R'A'} ⊗ B` is `W J = conj(U_g V_g†)`;
//! * `M = (σ̂^{1/2} σ_RE^{1/2})^T = conj(U_g) L^T` with `L = σ̂^{1/2} U_g Σ_g`;
//!   from `conj(L) = P Σ_M Q†` the polar unitary acts as `U conj(U_g) = P Q†`;
//! * the decoder isometry is `T = U W J = P Q† V_g^T`, and
//!   `K_l = Σ_k |a_k⟩ (⟨k| ⊗ ⟨l|) T`.
//!
//! Purifications use the computational basis of `E'`, which only changes the
//! Kraus operators by a unitary mixing over `l`.

use crate::error::{Error, Result};
use crate::matcore::{c64, herm_eig, svd, CMatrix, RANK_CUT};
use crate::quantum::{purify, stinespring_dilation, DensityOperator, KrausChannel, StinespringIsometry};

use super::{Decoder, DecoderKind};

const ISOMETRY_TOL: f64 = 1e-10;
const ALIGNMENT_TOL: f64 = 1e-8;
const TRACE_GUARD_TOL: f64 = 1e-9;
const KRAUS_TP_TOL: f64 = 1e-9;
/// Kraus operators with squared norm below this are dropped.
const NEGLIGIBLE_KRAUS: f64 = 1e-28;

/// `left · diag(values) · right†`.
#[derive(Debug, Clone)]
pub struct LowRankFactor {
    pub left: CMatrix,
    pub values: Vec<f64>,
    pub right: CMatrix,
}

impl LowRankFactor {
    pub fn to_dense(&self) -> CMatrix {
        let mut l = self.left.clone();
        for (k, &v) in self.values.iter().enumerate() {
            l.column_mut(k).scale_mut(v);
        }
        l * self.right.adjoint()
    }
}

#[derive(Debug, Clone)]
pub struct SwConstruction {
    pub schmidt_coeffs: Vec<f64>,
    /// Columns `|a_k⟩`.
    pub basis_a: CMatrix,
    pub stinespring: StinespringIsometry,
    /// Nonzero eigenvalues `μ_l` of `σ_E`.
    pub env_spectrum: Vec<f64>,
    /// Matching eigenvectors `|e_l⟩`.
    pub env_basis: CMatrix,
    /// `M_{R'E'}` in thin SVD form: `left` spans its range, `right` its co-range.
    pub overlap: LowRankFactor,
    /// `W (|0⟩_{R'A'} ⊗ ·)` as a `d_R d_E × d_B` isometry.
    pub alignment: CMatrix,
    /// `U W (|0⟩_{R'A'} ⊗ ·)`.
    pub rotated_alignment: CMatrix,
    /// Index of the reference vector `|0⟩_{R'A'}` in the computational basis.
    pub reference_index: usize,
    pub kraus: Vec<CMatrix>,
    pub d_r: usize,
    pub d_e: usize,
    pub d_b: usize,
    pub alignment_residual: f64,
    pub trace_guard: f64,
}

impl SwConstruction {
    /// Coefficient matrix of `|σ⟩_RBE` with rows `RE` and columns `B`.
    pub fn sigma_coefficients(&self) -> CMatrix {
        sigma_coefficients(&self.schmidt_coeffs, &self.basis_a, &self.stinespring)
    }

    /// Dense `M_{R'E'}`.
    pub fn overlap_matrix(&self) -> CMatrix {
        self.overlap.to_dense()
    }

    /// Full alignment unitary `W` on `R'E'`, whose first `d_B` columns are
    /// `alignment`; remaining columns are an orthonormal completion.
    pub fn alignment_unitary(&self) -> Result<CMatrix> {
        extend_to_unitary(&self.alignment)
    }

    /// Full unitary `U = Ṽ Û†` from the overlap factors, completed on the orthogonal complements.
    pub fn rotation_unitary(&self) -> Result<CMatrix> {
        let dom = extend_to_unitary(&self.overlap.left)?;
        let cod = extend_to_unitary(&self.overlap.right)?;
        Ok(cod * dom.adjoint())
    }
}

/// Orthonormal columns completed to a square unitary.
pub(crate) fn extend_to_unitary(q: &CMatrix) -> Result<CMatrix> {
    let n = q.nrows();
    let k = q.ncols();
    let comp = CMatrix::identity(n, n) - q * q.adjoint();
    let eig = herm_eig(&comp)?;
    let mut out = CMatrix::zeros(n, n);
    out.columns_mut(0, k).copy_from(q);
    out.columns_mut(k, n - k).copy_from(&eig.vectors.columns(0, n - k));
    Ok(out)
}

fn sigma_coefficients(lam: &[f64], basis_a: &CMatrix, v: &StinespringIsometry) -> CMatrix {
    let (d_r, d_b, d_e) = (lam.len(), v.d_b, v.d_e);
    // V|a_r⟩ has entries indexed (b, l)
    let va = &v.v * basis_a;
    CMatrix::from_fn(d_r * d_e, d_b, |x, b| {
        let (r, l) = (x / d_e, x % d_e);
        va[(b * d_e + l, r)] * lam[r].sqrt()
    })
}

fn isometry_defect(t: &CMatrix) -> f64 {
    (t.adjoint() * t - CMatrix::identity(t.ncols(), t.ncols())).norm()
}

pub fn build_sw(rho: &DensityOperator, channel: &KrausChannel) -> Result<(Decoder, SwConstruction)> {
    let src = purify(rho)?;
    if channel.d_in() != src.d_a() {
        return Err(Error::DimensionMismatch(format!(
            "state of dimension {} into a channel with input {}",
            src.d_a(),
            channel.d_in()
        )));
    }
    let v = stinespring_dilation(channel)?;
    let lam = src.schmidt_coeffs.clone();
    let (d_r, d_b, d_e, d_a) = (lam.len(), v.d_b, v.d_e, v.d_a);
    let d_x = d_r * d_e;

    let g = sigma_coefficients(&lam, &src.basis_a, &v);
    let gs = svd(&g)?;
    let (u_g, s_g, v_g) = (&gs.u, &gs.singular_values, &gs.v);

    // σ_E^{1/2} from the E × (R B) coefficient matrix
    let h = CMatrix::from_fn(d_e, d_r * d_b, |l, y| g[((y / d_b) * d_e + l, y % d_b)]);
    let hs = svd(&h)?;
    let r_e = hs.rank(RANK_CUT);
    let env_basis = hs.u.columns(0, r_e).into_owned();
    let env_sqrt: Vec<f64> = hs.singular_values[..r_e].to_vec();
    let env_spectrum: Vec<f64> = env_sqrt.iter().map(|x| x * x).collect();

    // L = (σ_R^{1/2} ⊗ σ_E^{1/2}) U_g Σ_g, applied column by column on the (r, l) reshaping
    let m = u_g.ncols();
    let mut sqrt_e_t = env_basis.map(|z| z.conj());
    for (k, &s) in env_sqrt.iter().enumerate() {
        sqrt_e_t.column_mut(k).scale_mut(s);
    }
    let sqrt_e_t = sqrt_e_t * env_basis.transpose();
    let mut l_mat = CMatrix::zeros(d_x, m);
    for c in 0..m {
        let xr = CMatrix::from_fn(d_r, d_e, |r, l| u_g[(r * d_e + l, c)] * s_g[c] * lam[r].sqrt());
        let y = xr * &sqrt_e_t;
        for r in 0..d_r {
            for l in 0..d_e {
                l_mat[(r * d_e + l, c)] = y[(r, l)];
            }
        }
    }
    let ls = svd(&l_mat.map(|z| z.conj()))?;
    let (p, q) = (&ls.u, &ls.v);

    let overlap = LowRankFactor {
        left: u_g.map(|z| z.conj()) * q,
        values: ls.singular_values.clone(),
        right: p.clone(),
    };
    let alignment = (u_g * v_g.adjoint()).map(|z| z.conj());
    let rotated_alignment = p * q.adjoint() * v_g.transpose();

    for (name, t) in [("alignment", &alignment), ("rotated alignment", &rotated_alignment)] {
        let defect = isometry_defect(t);
        if defect > ISOMETRY_TOL {
            return Err(Error::NumericalBreakdown(format!("{name} is not an isometry ({defect:e})")));
        }
    }

    // ‖σ_RE^{1/2} - G (WJ)^T‖_F = ‖U_g Σ_g - G V_g‖_F since U_g has orthonormal columns
    let mut us = u_g.clone();
    for (k, &s) in s_g.iter().enumerate() {
        us.column_mut(k).scale_mut(s);
    }
    let alignment_residual = (us - &g * v_g).norm();
    if alignment_residual > ALIGNMENT_TOL {
        return Err(Error::AlignmentFailure(alignment_residual));
    }

    // tr[M U] = tr[L^T P Q†] must equal ‖M‖_1
    let guard = (l_mat.transpose() * p * q.adjoint()).trace();
    let nuclear: f64 = ls.singular_values.iter().sum();
    let trace_guard = (guard - c64(nuclear, 0.0)).norm();
    if trace_guard > TRACE_GUARD_TOL * nuclear.max(1.0) {
        return Err(Error::NumericalBreakdown(format!(
            "tr[MU] = {guard} differs from the nuclear norm {nuclear}"
        )));
    }

    let mut kraus = Vec::new();
    for l in 0..d_e {
        let k = CMatrix::from_fn(d_a, d_b, |a, b| {
            (0..d_r).fold(c64(0.0, 0.0), |acc, r| {
                acc + src.basis_a[(a, r)] * rotated_alignment[(r * d_e + l, b)]
            })
        });
        if k.norm_squared() > NEGLIGIBLE_KRAUS {
            kraus.push(k);
        }
    }
    let tp = crate::quantum::tp_residual(&kraus);
    if tp > KRAUS_TP_TOL {
        return Err(Error::NotTracePreserving(tp));
    }
    let decoder_channel = KrausChannel::new_unchecked(
        kraus.clone(),
        &channel.output().label,
        &channel.input().label,
    )?;

    let construction = SwConstruction {
        schmidt_coeffs: lam,
        basis_a: src.basis_a.clone(),
        stinespring: v,
        env_spectrum,
        env_basis,
        overlap,
        alignment,
        rotated_alignment,
        reference_index: 0,
        kraus,
        d_r,
        d_e,
        d_b,
        alignment_residual,
        trace_guard,
    };
    Ok((
        Decoder {
            channel: decoder_channel,
            kind: DecoderKind::Sw,
        },
        construction,
    ))
}
