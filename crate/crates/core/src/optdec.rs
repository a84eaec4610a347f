//! Optimal decoders by semidefinite programming.
//!
//! The decoder `D: B → A` is represented by its Choi matrix `X` on `B ⊗ A`
//! (input first, as in [`choi_of_channel`]). The entanglement fidelity is the
//! linear functional `tr[X G]`, and CPTP maps are exactly the `X ⪰ 0` with
//! `tr_A X = I_B`.

use nalgebra::{Cholesky, DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::decoders::{build_petz, fe_of_decoder, Decoder, DecoderKind, PetzSpectral};
use crate::error::{Error, Result};
use crate::matcore::{c64, herm_eig, kron, partial_trace, psd_power, svd, CMatrix, C64};
use crate::quantum::random::random_channel;
use crate::quantum::{channel_from_choi, choi_of_channel, channel_output_state, purify, DensityOperator, KrausChannel};

pub const DEFAULT_TOL: f64 = 1e-7;
const MAX_ITER: usize = 100;
const STEP_FRACTION: f64 = 0.98;
/// Random decoders used to check the objective against direct simulation.
const OBJECTIVE_CHECKS: usize = 20;
const OBJECTIVE_TOL: f64 = 1e-9;

/// `maximize tr[X G]` over Choi matrices `X` on `in ⊗ out` with `tr_out X = I_in`.
#[derive(Debug, Clone)]
pub struct SdpProblem {
    pub objective: CMatrix,
    pub d_in: usize,
    pub d_out: usize,
}

impl SdpProblem {
    pub fn new(objective: CMatrix, d_in: usize, d_out: usize) -> Result<Self> {
        let n = d_in * d_out;
        if objective.shape() != (n, n) || n == 0 {
            return Err(Error::DimensionMismatch(format!(
                "objective {:?} for variable dimension {d_in}x{d_out}",
                objective.shape()
            )));
        }
        let objective = crate::matcore::hermitize(&objective)?;
        Ok(SdpProblem {
            objective,
            d_in,
            d_out,
        })
    }

    pub fn dim(&self) -> usize {
        self.d_in * self.d_out
    }

    pub fn value_of(&self, x: &CMatrix) -> f64 {
        (x * &self.objective).trace().re
    }
}

#[derive(Debug, Clone)]
pub struct SdpSolution {
    pub x: CMatrix,
    pub primal_value: f64,
    pub dual_value: f64,
    /// `dual - primal`, non-negative up to rounding.
    pub gap: f64,
    pub iterations: usize,
    /// `‖tr_out X - I‖_F`.
    pub primal_residual: f64,
}

/// `G[(b', a'), (b, a)] = Σ conj(Ψ[r, a]) Ψ[r', a'] σ[(r, b), (r', b')]`.
fn objective_matrix(psi: &CMatrix, sigma: &CMatrix, d_b: usize) -> CMatrix {
    let (d_r, d_a) = psi.shape();
    let n = d_b * d_a;
    // q[(r, b), (b', a')] = Σ_r' σ[(r, b), (r', b')] Ψ[r', a']
    let mut q = CMatrix::zeros(d_r * d_b, n);
    for rb in 0..d_r * d_b {
        for bp in 0..d_b {
            for ap in 0..d_a {
                let mut acc = C64::new(0.0, 0.0);
                for rp in 0..d_r {
                    acc += sigma[(rb, rp * d_b + bp)] * psi[(rp, ap)];
                }
                q[(rb, bp * d_a + ap)] = acc;
            }
        }
    }
    let mut g = CMatrix::zeros(n, n);
    for col in 0..n {
        let (b, a) = (col / d_a, col % d_a);
        for row in 0..n {
            let mut acc = C64::new(0.0, 0.0);
            for r in 0..d_r {
                acc += psi[(r, a)].conj() * q[(r * d_b + b, row)];
            }
            g[(row, col)] = acc;
        }
    }
    g
}

fn check_objective(
    prob: &SdpProblem,
    rho: &DensityOperator,
    channel: &KrausChannel,
    to_decoder: impl Fn(&KrausChannel) -> Result<Decoder>,
) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for _ in 0..OBJECTIVE_CHECKS {
        let n_kraus = prob.d_in.div_ceil(prob.d_out) + 1;
        let d = random_channel(prob.d_in, prob.d_out, n_kraus, "B", "A", &mut rng);
        let predicted = prob.value_of(&choi_of_channel(&d));
        let simulated = fe_of_decoder(rho, channel, &to_decoder(&d)?)?;
        if (predicted - simulated).abs() > OBJECTIVE_TOL {
            return Err(Error::NumericalBreakdown(format!(
                "fidelity objective disagrees with simulation: {predicted} vs {simulated}"
            )));
        }
    }
    Ok(())
}

/// The full-dimensional problem, with the objective checked on random decoders.
pub fn build_fidelity_sdp(rho: &DensityOperator, channel: &KrausChannel) -> Result<SdpProblem> {
    if rho.dim() != channel.d_in() {
        return Err(Error::DimensionMismatch(format!(
            "state of dimension {} into a channel with input {}",
            rho.dim(),
            channel.d_in()
        )));
    }
    let src = purify(rho)?;
    let sigma = channel_output_state(&src, channel, "B")?;
    let g = objective_matrix(&src.coefficients(), sigma.matrix(), channel.d_out());
    let prob = SdpProblem::new(g, channel.d_out(), channel.d_in())?;
    let (b, a) = (channel.output().label.clone(), channel.input().label.clone());
    check_objective(&prob, rho, channel, |d| {
        Ok(Decoder {
            channel: d.clone().with_labels(&b, &a),
            kind: DecoderKind::Custom("random".into()),
        })
    })?;
    Ok(prob)
}

/// Maps reduced solutions on `supp σ_B → supp ρ` back to decoders `B → A`.
pub struct Embedding {
    spectral: PetzSpectral,
}

impl Embedding {
    pub fn reduced_dims(&self) -> (usize, usize) {
        (self.spectral.r_b(), self.spectral.r_a())
    }

    /// Decoder from a reduced Choi matrix; the Kraus operators are renormalized
    /// to be exactly trace preserving and the kernel of `σ_B` is sent to the
    /// maximally mixed state on `supp ρ`.
    pub fn lift(&self, x: &CMatrix) -> Result<Decoder> {
        let (r_b, r_a) = self.reduced_dims();
        let ch = channel_from_choi(x, r_b, r_a, "B", "A")?;
        let t = ch
            .kraus()
            .iter()
            .fold(CMatrix::zeros(r_b, r_b), |acc, k| acc + k.adjoint() * k);
        let fix = psd_power(&t, -0.5)?;
        let reduced: Vec<CMatrix> = ch.kraus().iter().map(|k| k * &fix).collect();
        Ok(Decoder {
            channel: self.spectral.lift(&reduced)?,
            kind: DecoderKind::Optimal,
        })
    }
}

/// The problem restricted to inputs in `supp σ_B` and outputs in `supp ρ`.
pub fn reduce_problem(rho: &DensityOperator, channel: &KrausChannel) -> Result<(SdpProblem, Embedding)> {
    let spectral = PetzSpectral::new(rho, channel)?;
    let src = purify(rho)?;
    let sigma = channel_output_state(&src, channel, "B")?;
    let u_sig = spectral.u_sig();
    let d_r = src.d_r();
    let lift_b = kron(&CMatrix::identity(d_r, d_r), u_sig);
    let sigma_red = lift_b.adjoint() * sigma.matrix() * &lift_b;
    let psi_red = src.coefficients() * spectral.u_rho().conjugate();
    let g = objective_matrix(&psi_red, &sigma_red, spectral.r_b());
    let prob = SdpProblem::new(g, spectral.r_b(), spectral.r_a())?;
    let emb = Embedding { spectral };
    check_objective(&prob, rho, channel, |d| emb.lift(&choi_of_channel(d)))?;
    Ok((prob, emb))
}

/// Orthonormal Hermitian basis of `n × n` matrices as sparse entries `(i, j, value)`.
fn hermitian_basis(n: usize) -> Vec<Vec<(usize, usize, C64)>> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut basis: Vec<Vec<(usize, usize, C64)>> = (0..n).map(|i| vec![(i, i, c64(1.0, 0.0))]).collect();
    for i in 0..n {
        for j in i + 1..n {
            basis.push(vec![(i, j, c64(h, 0.0)), (j, i, c64(h, 0.0))]);
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            basis.push(vec![(i, j, c64(0.0, h)), (j, i, c64(0.0, -h))]);
        }
    }
    basis
}

/// Equality constraints `tr[(E_k ⊗ I) X] = tr E_k` for the basis `E_k`.
struct Constraints {
    n_in: usize,
    n_out: usize,
    basis: Vec<Vec<(usize, usize, C64)>>,
    b: DVector<f64>,
}

impl Constraints {
    fn new(n_in: usize, n_out: usize) -> Self {
        let basis = hermitian_basis(n_in);
        let b = DVector::from_fn(basis.len(), |k, _| if k < n_in { 1.0 } else { 0.0 });
        Constraints {
            n_in,
            n_out,
            basis,
            b,
        }
    }

    fn m(&self) -> usize {
        self.basis.len()
    }

    fn apply(&self, x: &CMatrix) -> DVector<f64> {
        let p = partial_trace(x, &[self.n_in, self.n_out], &[0]).expect("dimensions agree");
        DVector::from_fn(self.m(), |k, _| {
            self.basis[k]
                .iter()
                .map(|&(i, j, e)| (e * p[(j, i)]).re)
                .sum()
        })
    }

    fn adjoint(&self, y: &DVector<f64>) -> CMatrix {
        let mut e = CMatrix::zeros(self.n_in, self.n_in);
        for (k, entries) in self.basis.iter().enumerate() {
            for &(i, j, v) in entries {
                e[(i, j)] += v * y[k];
            }
        }
        kron(&e, &CMatrix::identity(self.n_out, self.n_out))
    }

    /// `M_kl = tr[(E_k ⊗ I) W (E_l ⊗ I) W]`.
    fn schur(&self, w: &CMatrix) -> DMatrix<f64> {
        let (nb, na) = (self.n_in, self.n_out);
        // t[j, p, q, i] = tr(W_jp W_qi) over the output blocks
        let mut t = vec![C64::new(0.0, 0.0); nb * nb * nb * nb];
        for j in 0..nb {
            for p in 0..nb {
                for q in 0..nb {
                    for i in 0..nb {
                        let mut acc = C64::new(0.0, 0.0);
                        for a in 0..na {
                            for c in 0..na {
                                acc += w[(j * na + a, p * na + c)] * w[(q * na + c, i * na + a)];
                            }
                        }
                        t[((j * nb + p) * nb + q) * nb + i] = acc;
                    }
                }
            }
        }
        let m = self.m();
        let mut out = DMatrix::zeros(m, m);
        for k in 0..m {
            for l in k..m {
                let mut acc = C64::new(0.0, 0.0);
                for &(i, j, ek) in &self.basis[k] {
                    for &(p, q, el) in &self.basis[l] {
                        acc += ek * el * t[((j * nb + p) * nb + q) * nb + i];
                    }
                }
                out[(k, l)] = acc.re;
                out[(l, k)] = acc.re;
            }
        }
        out
    }
}

fn herm_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * c64(0.5, 0.0)
}

fn inner(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x.conj() * y).re).sum()
}

fn cholesky_lower(m: &CMatrix, what: &str) -> Result<CMatrix> {
    Cholesky::new(m.clone())
        .map(|c| c.l())
        .ok_or_else(|| Error::NumericalBreakdown(format!("{what} lost positive definiteness")))
}

/// Largest `α ≤ 1` with `LL† + α Δ ⪰ 0`, scaled back by the step fraction.
fn step_length(l: &CMatrix, delta: &CMatrix) -> Result<f64> {
    let m1 = l
        .solve_lower_triangular(delta)
        .ok_or_else(|| Error::NumericalBreakdown("singular Cholesky factor".into()))?;
    let m2 = l
        .solve_lower_triangular(&m1.adjoint())
        .ok_or_else(|| Error::NumericalBreakdown("singular Cholesky factor".into()))?;
    let lmin = herm_eig(&herm_part(&m2))?
        .values
        .last()
        .copied()
        .unwrap_or(0.0);
    Ok(if lmin < 0.0 {
        (STEP_FRACTION * -1.0 / lmin).min(1.0)
    } else {
        1.0
    })
}

/// Nesterov-Todd scaling: `G` with `G⁻¹ X G⁻† = G† Z G = diag(d)`.
struct Scaling {
    g: CMatrix,
    g_inv: CMatrix,
    d: Vec<f64>,
}

impl Scaling {
    fn new(lx: &CMatrix, lz: &CMatrix) -> Result<Self> {
        let s = svd(&(lz.adjoint() * lx))?;
        let d = s.singular_values.clone();
        if d.iter().any(|&x| !(x > 0.0)) {
            return Err(Error::NumericalBreakdown("degenerate scaling".into()));
        }
        let n = d.len();
        let g = lx * &s.v * CMatrix::from_diagonal(&DVector::from_fn(n, |i, _| c64(d[i].powf(-0.5), 0.0)));
        let linv_t = lx
            .solve_lower_triangular(&CMatrix::identity(n, n))
            .ok_or_else(|| Error::NumericalBreakdown("singular Cholesky factor".into()))?;
        let g_inv = CMatrix::from_diagonal(&DVector::from_fn(n, |i, _| c64(d[i].sqrt(), 0.0)))
            * s.v.adjoint()
            * linv_t;
        Ok(Scaling { g, g_inv, d })
    }

    /// `G S G†` with `S_ij = 2 R_ij / (d_i + d_j)`, solving `H(D S) = R`.
    fn unscale_rhs(&self, r: &CMatrix) -> CMatrix {
        let n = self.d.len();
        let s = CMatrix::from_fn(n, n, |i, j| r[(i, j)] * (2.0 / (self.d[i] + self.d[j])));
        &self.g * s * self.g.adjoint()
    }
}

struct Direction {
    dx: CMatrix,
    dz: CMatrix,
    dy: DVector<f64>,
}

fn solve_direction(
    cons: &Constraints,
    chol: &Cholesky<f64, nalgebra::Dyn>,
    w: &CMatrix,
    rp: &DVector<f64>,
    rd: &CMatrix,
    rc: &CMatrix,
) -> Direction {
    let wrdw = w * rd * w;
    let rhs = rp - cons.apply(&(rc - &wrdw));
    let dy = chol.solve(&rhs);
    let dz = herm_part(&(rd - cons.adjoint(&dy)));
    let dx = herm_part(&(rc - w * &dz * w));
    Direction { dx, dz, dy }
}

/// Primal-dual interior-point method with Nesterov-Todd scaling and
/// Mehrotra predictor-corrector steps.
pub fn solve_sdp(prob: &SdpProblem, tol: f64) -> Result<SdpSolution> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("SDP tolerance {tol}")));
    }
    let n = prob.dim();
    let cons = Constraints::new(prob.d_in, prob.d_out);
    // minimize <C, X> with C = -G
    let c = -prob.objective.clone();
    let lmax = herm_eig(&prob.objective)?.max_value();
    let mut x = CMatrix::identity(n, n) * c64(1.0 / prob.d_out as f64, 0.0);
    let mut y = DVector::from_fn(cons.m(), |k, _| if k < prob.d_in { -(lmax + 1.0) } else { 0.0 });
    let mut z = herm_part(&(&c - cons.adjoint(&y)));
    let b_norm = 1.0 + cons.b.norm();
    let c_norm = 1.0 + c.norm();

    for iter in 0..MAX_ITER {
        let rp = &cons.b - cons.apply(&x);
        let rd = herm_part(&(&c - &z - cons.adjoint(&y)));
        let pobj = inner(&c, &x);
        let dobj = cons.b.dot(&y);
        let primal = -pobj;
        let dual = -dobj;
        let mu = inner(&x, &z) / n as f64;
        let converged = (dual - primal).abs() <= tol
            && rp.norm() / b_norm <= tol
            && rd.norm() / c_norm <= tol;
        if converged {
            let p = partial_trace(&x, &[prob.d_in, prob.d_out], &[0])?;
            let residual = (p - CMatrix::identity(prob.d_in, prob.d_in)).norm();
            return Ok(SdpSolution {
                x: herm_part(&x),
                primal_value: primal,
                dual_value: dual,
                gap: dual - primal,
                iterations: iter,
                primal_residual: residual,
            });
        }

        let lx = cholesky_lower(&x, "primal iterate")?;
        let lz = cholesky_lower(&z, "dual slack")?;
        let sc = Scaling::new(&lx, &lz)?;
        let w = herm_part(&(&sc.g * sc.g.adjoint()));
        let m = cons.schur(&w);
        let chol = Cholesky::new(m).ok_or_else(|| Error::NumericalBreakdown("Schur complement is not positive definite".into()))?;
        let d2 = CMatrix::from_diagonal(&DVector::from_fn(n, |i, _| c64(sc.d[i] * sc.d[i], 0.0)));

        // predictor
        let aff = solve_direction(&cons, &chol, &w, &rp, &rd, &sc.unscale_rhs(&-d2.clone()));
        let ap = step_length(&lx, &aff.dx)?;
        let ad = step_length(&lz, &aff.dz)?;
        let mu_aff = inner(&(&x + &aff.dx * c64(ap, 0.0)), &(&z + &aff.dz * c64(ad, 0.0))) / n as f64;
        let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);

        // corrector
        let dx_s = &sc.g_inv * &aff.dx * sc.g_inv.adjoint();
        let dz_s = sc.g.adjoint() * &aff.dz * &sc.g;
        let cross = herm_part(&(dx_s * dz_s));
        let r = CMatrix::identity(n, n) * c64(sigma * mu, 0.0) - d2 - cross;
        let dir = solve_direction(&cons, &chol, &w, &rp, &rd, &sc.unscale_rhs(&r));
        let ap = step_length(&lx, &dir.dx)?;
        let ad = step_length(&lz, &dir.dz)?;
        x = herm_part(&(&x + &dir.dx * c64(ap, 0.0)));
        y += &dir.dy * ad;
        z = herm_part(&(&z + &dir.dz * c64(ad, 0.0)));
    }
    Err(Error::MaxIterations(MAX_ITER))
}

/// Result of solving the reduced problem.
#[derive(Debug, Clone)]
pub struct OptimalDecoder {
    pub value: f64,
    pub solution: SdpSolution,
    pub decoder: Decoder,
    /// Side length of the reduced Choi variable.
    pub reduced_dim: usize,
}

pub fn optimal_decoder(rho: &DensityOperator, channel: &KrausChannel, tol: f64) -> Result<OptimalDecoder> {
    let (prob, emb) = reduce_problem(rho, channel)?;
    let solution = solve_sdp(&prob, tol)?;
    let decoder = emb.lift(&solution.x)?;
    Ok(OptimalDecoder {
        value: solution.primal_value,
        reduced_dim: prob.dim(),
        solution,
        decoder,
    })
}

/// Maximal entanglement fidelity over all decoders.
pub fn optimal_fidelity(rho: &DensityOperator, channel: &KrausChannel, tol: f64) -> Result<f64> {
    Ok(optimal_decoder(rho, channel, tol)?.value)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BracketReport {
    pub f_opt_squared: f64,
    pub f_petz: f64,
    pub f_opt: f64,
}

/// Checks `F_opt² ≤ F_petz ≤ F_opt` up to `tol`.
pub fn bk_bracket_check(rho: &DensityOperator, channel: &KrausChannel, tol: f64) -> Result<BracketReport> {
    let f_opt = optimal_fidelity(rho, channel, DEFAULT_TOL.min(tol))?;
    let f_petz = fe_of_decoder(rho, channel, &build_petz(rho, channel)?)?;
    let report = BracketReport {
        f_opt_squared: f_opt * f_opt,
        f_petz,
        f_opt,
    };
    if report.f_opt_squared - tol > f_petz || f_petz > f_opt + tol {
        return Err(Error::BracketViolated {
            opt: f_opt,
            petz: f_petz,
        });
    }
    Ok(report)
}
