//! Petz-type and Schumacher-Westmoreland decoders and their entanglement fidelities.

pub mod quadrature;
mod sw;

pub use quadrature::{beta0, beta0_quadrature, QuadratureResult, QuadratureRule};
pub use sw::{build_sw, LowRankFactor, SwConstruction};

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::matcore::{c64, herm_eig, matrix_power_on_support, CMatrix, C64, RANK_CUT};
use crate::quantum::{
    channel_from_choi, channel_output_state, entanglement_fidelity_composed, purify, DensityOperator,
    KrausChannel,
};

#[derive(Debug, Clone, PartialEq)]
pub enum DecoderKind {
    Petz,
    Rotated(f64),
    Twirled,
    Sw,
    Identity,
    Optimal,
    Custom(String),
}

impl DecoderKind {
    pub fn name(&self) -> String {
        match self {
            DecoderKind::Petz => "petz".into(),
            DecoderKind::Rotated(t) => format!("rotated({t})"),
            DecoderKind::Twirled => "twirled".into(),
            DecoderKind::Sw => "sw".into(),
            DecoderKind::Identity => "identity".into(),
            DecoderKind::Optimal => "optimal".into(),
            DecoderKind::Custom(s) => s.clone(),
        }
    }
}

/// A recovery channel `B → A` with its provenance.
#[derive(Debug, Clone)]
pub struct Decoder {
    pub channel: KrausChannel,
    pub kind: DecoderKind,
}

impl Decoder {
    /// Identity map `B → A`; requires equal dimensions.
    pub fn identity(channel: &KrausChannel) -> Result<Self> {
        if channel.d_in() != channel.d_out() {
            return Err(Error::DimensionMismatch(
                "identity decoder needs equal input and output dimensions".into(),
            ));
        }
        Ok(Decoder {
            channel: KrausChannel::identity(
                channel.d_out(),
                &channel.output().label,
                &channel.input().label,
            ),
            kind: DecoderKind::Identity,
        })
    }
}

/// `F_e(ρ_A, D ∘ N)` by direct simulation.
pub fn fe_of_decoder(rho: &DensityOperator, channel: &KrausChannel, decoder: &Decoder) -> Result<f64> {
    entanglement_fidelity_composed(rho, channel, &decoder.channel)
}

/// `σ_RB = (1 ⊗ N)(|ρ⟩⟨ρ|)` with systems labeled `R` and `B`.
pub fn channel_state(rho: &DensityOperator, channel: &KrausChannel) -> Result<DensityOperator> {
    let src = purify(rho)?;
    let s = channel_output_state(&src, channel, "B")?;
    if src.label_r == "R" {
        Ok(s)
    } else {
        // source system was itself called R
        let m = s.matrix().clone();
        let dims = s.dims();
        DensityOperator::new(
            m,
            vec![
                crate::quantum::Subsystem::new("R", dims[0]),
                crate::quantum::Subsystem::new("B", dims[1]),
            ],
        )
    }
}

/// Largest departure from trace preservation repaired when lifting reduced maps.
const LIFT_TP_TOL: f64 = 1e-6;

/// Spectral data shared by all Petz-type decoders of `(ρ, N)`: supports of
/// `ρ` and `σ_B = N(ρ)`, and the reduced adjoint Kraus operators
/// `U_ρ† K_i† U_σ` between them.
pub(crate) struct PetzSpectral {
    u_rho: CMatrix,
    lam: Vec<f64>,
    u_sig: CMatrix,
    s: Vec<f64>,
    kernel: CMatrix,
    reduced: Vec<CMatrix>,
    in_label: String,
    out_label: String,
}

impl PetzSpectral {
    pub(crate) fn new(rho: &DensityOperator, channel: &KrausChannel) -> Result<Self> {
        if rho.dim() != channel.d_in() {
            return Err(Error::DimensionMismatch(format!(
                "state of dimension {} into a channel with input {}",
                rho.dim(),
                channel.d_in()
            )));
        }
        let er = herm_eig(rho.matrix())?;
        let sigma_b = channel.apply_matrix(rho.matrix())?;
        let es = herm_eig(&sigma_b)?;
        if es.max_value() <= 1e-300 {
            return Err(Error::DegenerateChannelOutput);
        }
        let r_a = er.rank(RANK_CUT);
        let r_b = es.rank(RANK_CUT);
        let u_rho = er.support(RANK_CUT);
        let u_sig = es.support(RANK_CUT);
        let reduced = channel
            .kraus()
            .iter()
            .map(|k| u_rho.adjoint() * k.adjoint() * &u_sig)
            .collect();
        Ok(PetzSpectral {
            u_rho,
            lam: er.values[..r_a].to_vec(),
            u_sig,
            s: es.values[..r_b].to_vec(),
            kernel: es.kernel(RANK_CUT),
            reduced,
            in_label: channel.output().label.clone(),
            out_label: channel.input().label.clone(),
        })
    }

    pub(crate) fn u_rho(&self) -> &CMatrix {
        &self.u_rho
    }

    pub(crate) fn u_sig(&self) -> &CMatrix {
        &self.u_sig
    }

    pub(crate) fn r_a(&self) -> usize {
        self.lam.len()
    }

    pub(crate) fn r_b(&self) -> usize {
        self.s.len()
    }

    /// `diag(λ^{1/2 - iτ}) K̃ diag(s^{-1/2 + iτ})` for every reduced Kraus operator.
    pub(crate) fn rotated_reduced(&self, tau: f64) -> Vec<CMatrix> {
        let left: Vec<C64> = self
            .lam
            .iter()
            .map(|&l| (c64(0.5, -tau) * l.ln()).exp())
            .collect();
        let right: Vec<C64> = self
            .s
            .iter()
            .map(|&s| (c64(-0.5, tau) * s.ln()).exp())
            .collect();
        self.reduced
            .iter()
            .map(|k| CMatrix::from_fn(k.nrows(), k.ncols(), |a, j| left[a] * k[(a, j)] * right[j]))
            .collect()
    }

    /// Embeds reduced Kraus operators and appends the kernel branch, which
    /// outputs the maximally mixed state on the support of `ρ`.
    pub(crate) fn lift(&self, reduced: &[CMatrix]) -> Result<KrausChannel> {
        // Σ K†K = 1 on supp σ_B holds only up to rounding amplified by 1/s_min;
        // restore it exactly with T^{-1/2}
        let r_b = self.r_b();
        let t = reduced
            .iter()
            .fold(CMatrix::zeros(r_b, r_b), |acc, k| acc + k.adjoint() * k);
        let dev = (&t - CMatrix::identity(r_b, r_b)).norm();
        if dev > LIFT_TP_TOL {
            return Err(Error::NotTracePreserving(dev));
        }
        let fix = crate::matcore::psd_power(&t, -0.5)?;
        let mut kraus: Vec<CMatrix> = reduced
            .iter()
            .map(|k| &self.u_rho * k * &fix * self.u_sig.adjoint())
            .collect();
        let w = c64(1.0 / (self.r_a() as f64).sqrt(), 0.0);
        for m in 0..self.kernel.ncols() {
            for j in 0..self.r_a() {
                kraus.push(self.u_rho.column(j) * self.kernel.column(m).adjoint() * w);
            }
        }
        KrausChannel::new(kraus, &self.in_label, &self.out_label)
    }
}

/// The rotated Petz decoder `D^{P,t}` (rotation angle `t/2`).
pub fn build_rotated_petz(rho: &DensityOperator, channel: &KrausChannel, t: f64) -> Result<Decoder> {
    let sp = PetzSpectral::new(rho, channel)?;
    Ok(Decoder {
        channel: sp.lift(&sp.rotated_reduced(t / 2.0))?,
        kind: DecoderKind::Rotated(t),
    })
}

pub fn build_petz(rho: &DensityOperator, channel: &KrausChannel) -> Result<Decoder> {
    let sp = PetzSpectral::new(rho, channel)?;
    Ok(Decoder {
        channel: sp.lift(&sp.rotated_reduced(0.0))?,
        kind: DecoderKind::Petz,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FidelityVariant {
    Petz,
    Rotated(f64),
    Twirled,
}

/// `F(t) = ‖σ^{1/2}(σ_R^{(1+it)/2} ⊗ σ_B^{-(1+it)/2})σ^{1/2}‖_2²` evaluated with dense matrices.
fn rotated_closed_form(sigma_rb: &DensityOperator, t: f64) -> Result<f64> {
    let s = sigma_rb.permuted(&["R", "B"])?;
    let sr = s.reduced(&["R"])?;
    let sb = s.reduced(&["B"])?;
    let half = matrix_power_on_support(s.matrix(), c64(0.5, 0.0), RANK_CUT)?;
    let a = matrix_power_on_support(sr.matrix(), c64(0.5, t / 2.0), RANK_CUT)?;
    let b = matrix_power_on_support(sb.matrix(), c64(-0.5, -t / 2.0), RANK_CUT)?;
    let inner = &half * a.kronecker(&b) * &half;
    Ok(inner.norm_squared())
}

/// Spectral representation `F(t) = Σ c_k cos(ω_k t)` of the rotated Petz fidelity.
#[derive(Debug, Clone)]
pub struct RotationSpectrum {
    pub coeffs: Vec<f64>,
    pub freqs: Vec<f64>,
}

impl RotationSpectrum {
    /// Built in the product eigenbasis of `Y = σ_R^{-1} ⊗ σ_B`:
    /// `F(t) = Σ_jk |X_jk|² (y_j y_k)^{-1/2} cos((t/2)(ln y_j - ln y_k))`.
    pub fn new(sigma_rb: &DensityOperator) -> Result<Self> {
        let s = sigma_rb.permuted(&["R", "B"])?;
        let er = herm_eig(s.reduced(&["R"])?.matrix())?;
        let eb = herm_eig(s.reduced(&["B"])?.matrix())?;
        let (ur, ub) = (er.support(RANK_CUT), eb.support(RANK_CUT));
        let basis = ur.kronecker(&ub);
        let x = basis.adjoint() * s.matrix() * &basis;
        let (nr, nb) = (ur.ncols(), ub.ncols());
        let ln_y: Vec<f64> = (0..nr * nb)
            .map(|j| eb.values[j % nb].ln() - er.values[j / nb].ln())
            .collect();
        let n = nr * nb;
        let mut coeffs = Vec::with_capacity(n * (n + 1) / 2);
        let mut freqs = Vec::with_capacity(n * (n + 1) / 2);
        for j in 0..n {
            for k in j..n {
                let mult = if j == k { 1.0 } else { 2.0 };
                let c = mult * x[(j, k)].norm_sqr() * (-(ln_y[j] + ln_y[k]) / 2.0).exp();
                if c > 0.0 {
                    coeffs.push(c);
                    freqs.push((ln_y[j] - ln_y[k]) / 2.0);
                }
            }
        }
        Ok(RotationSpectrum { coeffs, freqs })
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.coeffs
            .iter()
            .zip(&self.freqs)
            .map(|(&c, &w)| c * (w * t).cos())
            .sum()
    }
}

/// Twirled Petz fidelity `∫ β₀(t) F(t) dt` with the quadrature rule used.
pub fn twirled_closed_form(sigma_rb: &DensityOperator, tol: f64) -> Result<QuadratureResult> {
    let spec = RotationSpectrum::new(sigma_rb)?;
    beta0_quadrature(|t| spec.eval(t), tol)
}

/// Entanglement fidelity of a Petz-type decoder from `σ_RB` alone.
pub fn fe_closed_form(sigma_rb: &DensityOperator, variant: FidelityVariant) -> Result<f64> {
    for l in ["R", "B"] {
        sigma_rb.as_operator().slot(l)?;
    }
    if sigma_rb.systems().len() != 2 {
        return Err(Error::DimensionMismatch("expected a state on R and B".into()));
    }
    match variant {
        FidelityVariant::Petz => rotated_closed_form(sigma_rb, 0.0),
        FidelityVariant::Rotated(t) => rotated_closed_form(sigma_rb, t),
        FidelityVariant::Twirled => Ok(twirled_closed_form(sigma_rb, quadrature::DEFAULT_TOL)?.value),
    }
}

/// Twirled Petz decoder, materialized by integrating Choi matrices of rotated
/// decoders over the quadrature nodes of the scalar fidelity formula.
pub fn build_twirled_petz(rho: &DensityOperator, channel: &KrausChannel, tol: f64) -> Result<Decoder> {
    let sp = PetzSpectral::new(rho, channel)?;
    let sigma_rb = channel_state(rho, channel)?;
    let quad = twirled_closed_form(&sigma_rb, tol)?;
    let (r_a, r_b) = (sp.r_a(), sp.r_b());
    let n = r_a * r_b;

    // Choi of the unrotated reduced map on (r_B ⊗ r_A)
    let base = sp.rotated_reduced(0.0);
    let mut c0 = CMatrix::zeros(n, n);
    for k in &base {
        let v = DVector::from_fn(n, |x, _| k[(x % r_a, x / r_a)]);
        c0 += &v * v.adjoint();
    }
    // rotation by τ multiplies |P⟫[(j,a)] by e^{iτθ}, θ = ln s_j - ln λ_a
    let theta: Vec<f64> = (0..n).map(|x| sp.s[x / r_a].ln() - sp.lam[x % r_a].ln()).collect();
    let mut h = CMatrix::zeros(n, n);
    let mut phase = DVector::<C64>::zeros(n);
    for (&t, &w) in quad.rule.nodes.iter().zip(&quad.rule.weights) {
        let tau = t / 2.0;
        for x in 0..n {
            phase[x] = c64(0.0, tau * theta[x]).exp();
        }
        for y in 0..n {
            let py = phase[y].conj() * w;
            for x in 0..n {
                h[(x, y)] += phase[x] * py;
            }
        }
    }
    let mut choi = c0.component_mul(&h);

    let tr_out = crate::matcore::partial_trace(&choi, &[r_b, r_a], &[0])?;
    let dev = (&tr_out - CMatrix::identity(r_b, r_b)).norm();
    if dev > 10.0 * tol {
        return Err(Error::ToleranceNotMet { estimate: dev, tol });
    }
    let fix = crate::matcore::psd_power(&tr_out, -0.5)?.kronecker(&CMatrix::identity(r_a, r_a));
    choi = &fix * choi * &fix;
    let reduced = channel_from_choi(&choi, r_b, r_a, "b", "a")?;
    Ok(Decoder {
        channel: sp.lift(reduced.kraus())?,
        kind: DecoderKind::Twirled,
    })
}
