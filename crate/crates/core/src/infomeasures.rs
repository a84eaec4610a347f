//! Entropies, Rényi divergences and the mutual-information quantities that
//! bound decoder fidelities. All logarithms are base 2.

use crate::error::{Error, Result};
use crate::matcore::{
    c64, herm_eig, power_from_eig, psd_eig, schatten_norm, CMatrix, HermEig, RANK_CUT,
};
use crate::quantum::DensityOperator;

const SUPPORT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EntropyKind {
    VonNeumann,
    Renyi(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivedEntropy {
    /// `H(A|B) = H(AB) - H(B)`
    Conditional,
    /// `I(A:B) = H(A) + H(B) - H(AB)`
    Mutual,
    /// `I(A⟩B) = -H(A|B)`
    Coherent,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DivergenceValue {
    Finite(f64),
    Infinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SupportCondition {
    /// `ρ ≪ σ`
    Contained,
    /// `ρ` not contained in but not orthogonal to `σ` (finite only for α < 1)
    Overlapping,
    /// `ρ ⊥ σ`
    Orthogonal,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DivergenceResult {
    pub value: DivergenceValue,
    pub support_condition: SupportCondition,
}

impl DivergenceResult {
    fn finite(v: f64, support_condition: SupportCondition) -> Self {
        DivergenceResult {
            value: DivergenceValue::Finite(v),
            support_condition,
        }
    }

    fn infinite(support_condition: SupportCondition) -> Self {
        DivergenceResult {
            value: DivergenceValue::Infinite,
            support_condition,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self.value, DivergenceValue::Finite(_))
    }

    /// The value as `f64`, with `+∞` mapped to `f64::INFINITY`.
    pub fn as_f64(&self) -> f64 {
        match self.value {
            DivergenceValue::Finite(v) => v,
            DivergenceValue::Infinite => f64::INFINITY,
        }
    }

    pub fn finite_value(&self) -> Option<f64> {
        match self.value {
            DivergenceValue::Finite(v) => Some(v),
            DivergenceValue::Infinite => None,
        }
    }
}

fn spectrum_entropy(values: &[f64]) -> f64 {
    values
        .iter()
        .filter(|&&x| x > 0.0)
        .map(|&x| -x * x.log2())
        .sum()
}

pub fn entropy(rho: &DensityOperator, kind: EntropyKind) -> Result<f64> {
    let eig = herm_eig(rho.matrix())?;
    match kind {
        EntropyKind::VonNeumann => Ok(spectrum_entropy(&eig.values)),
        EntropyKind::Renyi(alpha) => {
            if !(alpha > 0.0) || alpha == 1.0 || !alpha.is_finite() {
                return Err(Error::InvalidOrder(alpha));
            }
            let r = eig.rank(RANK_CUT);
            let s: f64 = eig.values[..r].iter().map(|x| x.powf(alpha)).sum();
            Ok(s.log2() / (1.0 - alpha))
        }
    }
}

fn vn(rho: &DensityOperator) -> Result<f64> {
    entropy(rho, EntropyKind::VonNeumann)
}

/// Requires `rho` to live on exactly the two named systems.
fn check_bipartite(rho: &DensityOperator, a: &str, b: &str) -> Result<()> {
    if a == b {
        return Err(Error::DimensionMismatch("both sides of the cut name the same system".into()));
    }
    let labels = rho.labels();
    if labels.len() != 2 || !labels.contains(&a) || !labels.contains(&b) {
        for l in [a, b] {
            if !labels.contains(&l) {
                return Err(Error::UnknownLabel(l.to_string()));
            }
        }
        return Err(Error::DimensionMismatch(format!(
            "expected a bipartite state on ({a}, {b}), got systems {labels:?}"
        )));
    }
    Ok(())
}

/// State reordered as `a ⊗ b`, with the two dimensions.
fn ordered(rho: &DensityOperator, a: &str, b: &str) -> Result<(DensityOperator, usize, usize)> {
    check_bipartite(rho, a, b)?;
    let p = rho.permuted(&[a, b])?;
    let dims = p.dims();
    Ok((p, dims[0], dims[1]))
}

pub fn entropy_derived(rho_ab: &DensityOperator, kind: DerivedEntropy, a: &str, b: &str) -> Result<f64> {
    check_bipartite(rho_ab, a, b)?;
    let h_ab = vn(rho_ab)?;
    let h_b = vn(&rho_ab.reduced(&[b])?)?;
    match kind {
        DerivedEntropy::Conditional => Ok(h_ab - h_b),
        DerivedEntropy::Coherent => Ok(h_b - h_ab),
        DerivedEntropy::Mutual => {
            let h_a = vn(&rho_ab.reduced(&[a])?)?;
            Ok(h_a + h_b - h_ab)
        }
    }
}

fn check_same_dim(rho: &DensityOperator, sigma: &CMatrix) -> Result<()> {
    if sigma.shape() != (rho.dim(), rho.dim()) {
        return Err(Error::DimensionMismatch(format!(
            "state of dimension {} against operator {:?}",
            rho.dim(),
            sigma.shape()
        )));
    }
    Ok(())
}

fn classify_support(er: &HermEig, es: &HermEig) -> SupportCondition {
    let pr = power_from_eig(er, c64(0.0, 0.0), RANK_CUT);
    let ps = power_from_eig(es, c64(0.0, 0.0), RANK_CUT);
    let rank_r = er.rank(RANK_CUT) as f64;
    let overlap = (&pr * &ps).trace().re;
    if overlap <= SUPPORT_TOL {
        SupportCondition::Orthogonal
    } else if rank_r - overlap <= SUPPORT_TOL * rank_r.max(1.0) {
        SupportCondition::Contained
    } else {
        SupportCondition::Overlapping
    }
}

fn log_on_support(eig: &HermEig) -> CMatrix {
    let r = eig.rank(RANK_CUT);
    eig.map_on(r, |x| c64(x.log2(), 0.0))
}

/// `D(ρ‖σ) = tr[ρ(log ρ - log σ)]`; `σ` may be any PSD operator.
pub fn relative_entropy(rho: &DensityOperator, sigma: &CMatrix) -> Result<DivergenceResult> {
    check_same_dim(rho, sigma)?;
    let er = herm_eig(rho.matrix())?;
    let es = psd_eig(sigma)?;
    let cond = classify_support(&er, &es);
    if cond != SupportCondition::Contained {
        return Ok(DivergenceResult::infinite(cond));
    }
    let neg_h = -spectrum_entropy(&er.values);
    let cross = (rho.matrix() * log_on_support(&es)).trace().re;
    Ok(DivergenceResult::finite(neg_h - cross, cond))
}

/// Petz Rényi divergence `(1/(α-1)) log tr[ρ^α σ^{1-α}]`.
pub fn petz_divergence(rho: &DensityOperator, sigma: &CMatrix, alpha: f64) -> Result<DivergenceResult> {
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidOrder(alpha));
    }
    if alpha == 1.0 {
        return relative_entropy(rho, sigma);
    }
    check_same_dim(rho, sigma)?;
    let er = herm_eig(rho.matrix())?;
    let es = psd_eig(sigma)?;
    let cond = classify_support(&er, &es);
    let finite = match cond {
        SupportCondition::Contained => true,
        SupportCondition::Overlapping => alpha < 1.0,
        SupportCondition::Orthogonal => false,
    };
    if !finite {
        return Ok(DivergenceResult::infinite(cond));
    }
    let ra = power_from_eig(&er, c64(alpha, 0.0), RANK_CUT);
    let sb = power_from_eig(&es, c64(1.0 - alpha, 0.0), RANK_CUT);
    let q = (ra * sb).trace().re;
    Ok(DivergenceResult::finite(q.log2() / (alpha - 1.0), cond))
}

/// Sandwiched Rényi divergence `(1/(α-1)) log ‖σ^{(1-α)/2α} ρ σ^{(1-α)/2α}‖_α^α`.
pub fn sandwiched_divergence(
    rho: &DensityOperator,
    sigma: &CMatrix,
    alpha: f64,
) -> Result<DivergenceResult> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidOrder(alpha));
    }
    if alpha == 1.0 {
        return relative_entropy(rho, sigma);
    }
    check_same_dim(rho, sigma)?;
    let er = herm_eig(rho.matrix())?;
    let es = psd_eig(sigma)?;
    let cond = classify_support(&er, &es);
    let finite = match cond {
        SupportCondition::Contained => true,
        SupportCondition::Overlapping => alpha < 1.0,
        SupportCondition::Orthogonal => false,
    };
    if !finite {
        return Ok(DivergenceResult::infinite(cond));
    }
    let s = power_from_eig(&es, c64((1.0 - alpha) / (2.0 * alpha), 0.0), RANK_CUT);
    let inner = &s * rho.matrix() * &s;
    let q = schatten_norm(&inner, alpha)?.powf(alpha);
    Ok(DivergenceResult::finite(q.log2() / (alpha - 1.0), cond))
}

fn check_w(w: &CMatrix, d: usize) -> Result<HermEig> {
    if w.shape() != (d, d) {
        return Err(Error::DimensionMismatch(format!(
            "weight operator {:?} on a system of dimension {d}",
            w.shape()
        )));
    }
    psd_eig(w)
}

/// Fails unless `σ_RB` is supported within `supp(W_R) ⊗ B`.
fn check_w_support(sigma: &CMatrix, w_eig: &HermEig, d_b: usize) -> Result<()> {
    let kernel = w_eig.kernel(RANK_CUT);
    if kernel.ncols() == 0 {
        return Ok(());
    }
    let pk = (&kernel * kernel.adjoint()).kronecker(&CMatrix::identity(d_b, d_b));
    let leak = (&pk * sigma).trace().re;
    if leak > SUPPORT_TOL {
        return Err(Error::SupportViolation(format!(
            "state has weight {leak:e} outside the support of the weight operator"
        )));
    }
    Ok(())
}

/// `I_2^↓(σ_RB‖W_R) = inf_τ D_2(σ_RB‖W_R ⊗ τ_B) = 2 log tr √Y`,
/// `Y = tr_R[(W^{-1/2} ⊗ 1) σ² (W^{-1/2} ⊗ 1)]`.
pub fn min_petz_mi_order2(sigma_rb: &DensityOperator, w_r: &CMatrix, r: &str, b: &str) -> Result<f64> {
    let (s, d_r, d_b) = ordered(sigma_rb, r, b)?;
    let we = check_w(w_r, d_r)?;
    check_w_support(s.matrix(), &we, d_b)?;
    let w_inv_half = power_from_eig(&we, c64(-0.5, 0.0), RANK_CUT).kronecker(&CMatrix::identity(d_b, d_b));
    let sq = s.matrix() * s.matrix();
    let full = &w_inv_half * sq * &w_inv_half;
    let y = crate::matcore::partial_trace(&full, &[d_r, d_b], &[1])?;
    let ye = psd_eig(&y)?;
    let tr_sqrt: f64 = ye.values[..ye.rank(RANK_CUT)].iter().map(|x| x.sqrt()).sum();
    Ok(2.0 * tr_sqrt.log2())
}

/// `I_{1/2}^{↑↓}(R:E) = inf_τ D_{1/2}(σ_RE‖σ_R ⊗ τ_E) = -log tr Z²`,
/// `Z = tr_R[(σ_R^{1/2} ⊗ 1) σ_RE^{1/2}]`.
pub fn singly_min_petz_mi_half(sigma_re: &DensityOperator, r: &str, e: &str) -> Result<f64> {
    let (s, d_r, d_e) = ordered(sigma_re, r, e)?;
    let sr = s.reduced(&[r])?;
    let sr_half = crate::matcore::psd_power(sr.matrix(), 0.5)?.kronecker(&CMatrix::identity(d_e, d_e));
    let s_half = crate::matcore::psd_power(s.matrix(), 0.5)?;
    let z = crate::matcore::partial_trace(&(sr_half * s_half), &[d_r, d_e], &[1])?;
    let z = crate::matcore::hermitize(&z)?;
    let tr_z2 = (&z * &z).trace().re;
    Ok(-tr_z2.log2())
}

/// `Ĩ_2^↑(σ_RB‖W_R) = D̃_2(σ_RB‖W_R ⊗ σ_B)`.
pub fn sandwiched_mi_up(sigma_rb: &DensityOperator, w_r: &CMatrix, r: &str, b: &str) -> Result<f64> {
    let (s, d_r, d_b) = ordered(sigma_rb, r, b)?;
    let we = check_w(w_r, d_r)?;
    check_w_support(s.matrix(), &we, d_b)?;
    let sb = s.reduced(&[b])?;
    let second = w_r.kronecker(sb.matrix());
    let d = sandwiched_divergence(&s, &second, 2.0)?;
    d.finite_value()
        .ok_or_else(|| Error::SupportViolation("state not contained in the support of W ⊗ σ_B".into()))
}

/// `Ĩ_{1/2}^{↑↑}(R:E) = -2 log F(σ_RE, σ_R ⊗ σ_E)`.
pub fn sandwiched_mi_upup_half(sigma_re: &DensityOperator, r: &str, e: &str) -> Result<f64> {
    let (s, _, _) = ordered(sigma_re, r, e)?;
    let sr = s.reduced(&[r])?;
    let se = s.reduced(&[e])?;
    let prod = DensityOperator::new(sr.matrix().kronecker(se.matrix()), s.systems().to_vec())?;
    Ok(-2.0 * s.fidelity(&prod)?.log2())
}

/// `σ_R^{-1}` (inverse on the support) for a bipartite state.
pub fn inverse_marginal(sigma_rb: &DensityOperator, r: &str) -> Result<CMatrix> {
    let sr = sigma_rb.reduced(&[r])?;
    crate::matcore::psd_power(sr.matrix(), -1.0)
}

/// `D(σ_RB‖σ_R^{-1} ⊗ σ_B)`.
pub fn petz_twirled_exponent(sigma_rb: &DensityOperator, r: &str, b: &str) -> Result<f64> {
    let (s, _, _) = ordered(sigma_rb, r, b)?;
    let w = inverse_marginal(&s, r)?;
    let sb = s.reduced(&[b])?;
    relative_entropy(&s, &w.kronecker(sb.matrix()))?
        .finite_value()
        .ok_or_else(|| Error::SupportViolation("state not contained in σ_R^{-1} ⊗ σ_B".into()))
}

/// `ε^SW = -D(σ_RB‖σ_R^{-1} ⊗ σ_B)`.
pub fn epsilon_sw(sigma_rb: &DensityOperator, r: &str, b: &str) -> Result<f64> {
    Ok(-petz_twirled_exponent(sigma_rb, r, b)?)
}

/// `1 - √(ln 2 / 2 · ε)`.
pub fn sw_original_bound(eps: f64) -> Result<f64> {
    if eps < 0.0 || eps.is_nan() {
        return Err(Error::NegativeEpsilon(eps));
    }
    Ok(1.0 - (std::f64::consts::LN_2 / 2.0 * eps).sqrt())
}

/// `2^{I_2^↓(σ_RB‖σ_R^{-1})}`, the lower bound on the SW fidelity.
pub fn sw_lower_bound(sigma_rb: &DensityOperator, r: &str, b: &str) -> Result<f64> {
    let w = inverse_marginal(sigma_rb, r)?;
    Ok(2f64.powf(min_petz_mi_order2(sigma_rb, &w, r, b)?))
}

/// `2^{D(σ_RB‖σ_R^{-1} ⊗ σ_B)}`, the lower bound on the twirled Petz fidelity.
pub fn twirled_lower_bound(sigma_rb: &DensityOperator, r: &str, b: &str) -> Result<f64> {
    Ok(2f64.powf(petz_twirled_exponent(sigma_rb, r, b)?))
}
