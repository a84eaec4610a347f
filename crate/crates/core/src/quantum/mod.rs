//! States and channels on labeled tensor-product systems.

mod channels;
mod codes;
pub mod random;

pub use channels::{make_channel, ChannelKind};
pub use codes::{logical_basis, make_code_source, CodeKind};

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::matcore::{
    self, c64, check_finite, check_state_matrix, conjugate_on_slot, herm_eig, hermitize,
    permute_subsystems, CMatrix, C64, RANK_CUT,
};

/// Trace-preservation tolerance for Kraus channels.
pub const TP_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subsystem {
    pub label: String,
    pub dim: usize,
}

impl Subsystem {
    pub fn new(label: impl Into<String>, dim: usize) -> Self {
        Subsystem {
            label: label.into(),
            dim,
        }
    }
}

/// A square operator on an ordered list of labeled factors.
#[derive(Debug, Clone)]
pub struct Operator {
    matrix: CMatrix,
    systems: Vec<Subsystem>,
}

impl Operator {
    pub fn new(matrix: CMatrix, systems: Vec<Subsystem>) -> Result<Self> {
        check_finite(&matrix)?;
        let total: usize = systems.iter().map(|s| s.dim).product();
        if matrix.nrows() != total || matrix.ncols() != total {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} operator on systems of total dimension {total}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        for (i, s) in systems.iter().enumerate() {
            if s.dim == 0 {
                return Err(Error::DimensionMismatch(format!("system `{}` has dimension 0", s.label)));
            }
            if systems[..i].iter().any(|o| o.label == s.label) {
                return Err(Error::DimensionMismatch(format!("duplicate label `{}`", s.label)));
            }
        }
        Ok(Operator { matrix, systems })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn systems(&self) -> &[Subsystem] {
        &self.systems
    }

    pub fn dims(&self) -> Vec<usize> {
        self.systems.iter().map(|s| s.dim).collect()
    }

    pub fn slot(&self, label: &str) -> Result<usize> {
        self.systems
            .iter()
            .position(|s| s.label == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn dim_of(&self, label: &str) -> Result<usize> {
        Ok(self.systems[self.slot(label)?].dim)
    }

    /// Traces out every system not named in `keep`; kept systems retain their order.
    pub fn partial_trace(&self, keep: &[&str]) -> Result<Operator> {
        let mut slots = keep
            .iter()
            .map(|l| self.slot(l))
            .collect::<Result<Vec<_>>>()?;
        slots.sort_unstable();
        let m = matcore::partial_trace(&self.matrix, &self.dims(), &slots)?;
        let systems = slots.iter().map(|&k| self.systems[k].clone()).collect();
        Operator::new(m, systems)
    }

    /// Reorders factors to the given label order, which must name every system.
    pub fn permuted(&self, order: &[&str]) -> Result<Operator> {
        if order.len() != self.systems.len() {
            return Err(Error::DimensionMismatch(format!(
                "ordering names {} of {} systems",
                order.len(),
                self.systems.len()
            )));
        }
        let perm = order
            .iter()
            .map(|l| self.slot(l))
            .collect::<Result<Vec<_>>>()?;
        let m = permute_subsystems(&self.matrix, &self.dims(), &perm);
        let systems = perm.iter().map(|&k| self.systems[k].clone()).collect();
        Operator::new(m, systems)
    }
}

/// A validated density operator: Hermitian, unit trace, PSD to 1e-10.
#[derive(Debug, Clone)]
pub struct DensityOperator {
    op: Operator,
}

impl DensityOperator {
    pub fn new(matrix: CMatrix, systems: Vec<Subsystem>) -> Result<Self> {
        let op = Operator::new(matrix, systems)?;
        Self::from_operator(op)
    }

    pub fn single(label: &str, matrix: CMatrix) -> Result<Self> {
        let d = matrix.nrows();
        Self::new(matrix, vec![Subsystem::new(label, d)])
    }

    pub fn from_operator(op: Operator) -> Result<Self> {
        check_state_matrix(&op.matrix)?;
        let matrix = hermitize(&op.matrix)?;
        Ok(DensityOperator {
            op: Operator {
                matrix,
                systems: op.systems,
            },
        })
    }

    /// Pure state `|v⟩⟨v|`; `v` is normalized here.
    pub fn pure(v: &DVector<C64>, systems: Vec<Subsystem>) -> Result<Self> {
        let n = v.norm();
        if n == 0.0 {
            return Err(Error::NotState("zero vector".into()));
        }
        let u = v / c64(n, 0.0);
        Self::new(&u * u.adjoint(), systems)
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.op.matrix
    }

    pub fn as_operator(&self) -> &Operator {
        &self.op
    }

    pub fn systems(&self) -> &[Subsystem] {
        &self.op.systems
    }

    pub fn dims(&self) -> Vec<usize> {
        self.op.dims()
    }

    pub fn dim(&self) -> usize {
        self.op.matrix.nrows()
    }

    pub fn labels(&self) -> Vec<&str> {
        self.op.systems.iter().map(|s| s.label.as_str()).collect()
    }

    pub fn reduced(&self, keep: &[&str]) -> Result<DensityOperator> {
        let op = self.op.partial_trace(keep)?;
        Ok(DensityOperator { op })
    }

    pub fn permuted(&self, order: &[&str]) -> Result<DensityOperator> {
        let op = self.op.permuted(order)?;
        Ok(DensityOperator { op })
    }

    pub fn fidelity(&self, other: &DensityOperator) -> Result<f64> {
        if self.dims() != other.dims() {
            return Err(Error::DimensionMismatch("fidelity of states on different systems".into()));
        }
        matcore::fidelity(self.matrix(), other.matrix())
    }
}

/// A channel given by Kraus operators of shape `d_out × d_in`.
#[derive(Debug, Clone)]
pub struct KrausChannel {
    kraus: Vec<CMatrix>,
    input: Subsystem,
    output: Subsystem,
}

impl KrausChannel {
    pub fn new(kraus: Vec<CMatrix>, input: &str, output: &str) -> Result<Self> {
        let ch = Self::new_unchecked(kraus, input, output)?;
        validate_cptp(&ch)?;
        Ok(ch)
    }

    /// Checks shapes only; trace preservation is left to `validate_cptp`.
    pub fn new_unchecked(kraus: Vec<CMatrix>, input: &str, output: &str) -> Result<Self> {
        let first = kraus
            .first()
            .ok_or_else(|| Error::InvalidParameter("channel needs at least one Kraus operator".into()))?;
        let (dout, din) = first.shape();
        for k in &kraus {
            if k.shape() != (dout, din) {
                return Err(Error::DimensionMismatch(format!(
                    "Kraus operators of shapes {:?} and {:?}",
                    (dout, din),
                    k.shape()
                )));
            }
            check_finite(k)?;
        }
        Ok(KrausChannel {
            kraus,
            input: Subsystem::new(input, din),
            output: Subsystem::new(output, dout),
        })
    }

    pub fn identity(d: usize, input: &str, output: &str) -> Self {
        KrausChannel {
            kraus: vec![CMatrix::identity(d, d)],
            input: Subsystem::new(input, d),
            output: Subsystem::new(output, d),
        }
    }

    pub fn kraus(&self) -> &[CMatrix] {
        &self.kraus
    }

    pub fn input(&self) -> &Subsystem {
        &self.input
    }

    pub fn output(&self) -> &Subsystem {
        &self.output
    }

    pub fn d_in(&self) -> usize {
        self.input.dim
    }

    pub fn d_out(&self) -> usize {
        self.output.dim
    }

    pub fn with_labels(mut self, input: &str, output: &str) -> Self {
        self.input.label = input.to_string();
        self.output.label = output.to_string();
        self
    }

    /// Action on an operator of the input system alone.
    pub fn apply_matrix(&self, x: &CMatrix) -> Result<CMatrix> {
        if x.shape() != (self.d_in(), self.d_in()) {
            return Err(Error::DimensionMismatch(format!(
                "channel input has dimension {}, operator is {:?}",
                self.d_in(),
                x.shape()
            )));
        }
        let mut out = CMatrix::zeros(self.d_out(), self.d_out());
        for k in &self.kraus {
            out += k * x * k.adjoint();
        }
        Ok(out)
    }

    /// Kraus operators scaled by a constant; used for negative controls.
    pub fn scaled_unchecked(&self, factor: f64) -> KrausChannel {
        KrausChannel {
            kraus: self.kraus.iter().map(|k| k * c64(factor, 0.0)).collect(),
            input: self.input.clone(),
            output: self.output.clone(),
        }
    }
}

/// Frobenius norm of `Σ K†K - I`.
pub fn tp_residual(kraus: &[CMatrix]) -> f64 {
    let d = kraus[0].ncols();
    let mut s = -CMatrix::identity(d, d);
    for k in kraus {
        s += k.adjoint() * k;
    }
    s.norm()
}

pub fn validate_cptp(ch: &KrausChannel) -> Result<()> {
    let r = tp_residual(&ch.kraus);
    if r > TP_TOL {
        return Err(Error::NotTracePreserving(r));
    }
    Ok(())
}

/// Applies `ch` to the factor labeled `acting_on`; that factor is replaced by the channel output system.
pub fn apply_channel(ch: &KrausChannel, x: &Operator, acting_on: &str) -> Result<Operator> {
    let slot = x.slot(acting_on)?;
    let dims = x.dims();
    if dims[slot] != ch.d_in() {
        return Err(Error::DimensionMismatch(format!(
            "system `{acting_on}` has dimension {}, channel expects {}",
            dims[slot],
            ch.d_in()
        )));
    }
    let mut out_systems = x.systems().to_vec();
    out_systems[slot] = ch.output.clone();
    if out_systems[..slot]
        .iter()
        .chain(&out_systems[slot + 1..])
        .any(|s| s.label == ch.output.label)
    {
        return Err(Error::DimensionMismatch(format!(
            "output label `{}` already present",
            ch.output.label
        )));
    }
    let n_out: usize = out_systems.iter().map(|s| s.dim).product();
    let mut acc = CMatrix::zeros(n_out, n_out);
    for k in &ch.kraus {
        acc += conjugate_on_slot(k, x.matrix(), &dims, slot);
    }
    Operator::new(acc, out_systems)
}

pub fn apply_to_state(ch: &KrausChannel, rho: &DensityOperator, acting_on: &str) -> Result<DensityOperator> {
    DensityOperator::from_operator(apply_channel(ch, rho.as_operator(), acting_on)?)
}

/// Heisenberg-picture action `Σ K† Y K`.
pub fn adjoint_apply(ch: &KrausChannel, y: &CMatrix) -> Result<CMatrix> {
    if y.shape() != (ch.d_out(), ch.d_out()) {
        return Err(Error::DimensionMismatch(format!(
            "adjoint expects a {}x{} operator, got {:?}",
            ch.d_out(),
            ch.d_out(),
            y.shape()
        )));
    }
    let mut out = CMatrix::zeros(ch.d_in(), ch.d_in());
    for k in &ch.kraus {
        out += k.adjoint() * y * k;
    }
    Ok(out)
}

/// Parallel composition `a ⊗ b`; labels are taken from `a`.
pub fn tensor_product(a: &KrausChannel, b: &KrausChannel) -> KrausChannel {
    let mut kraus = Vec::with_capacity(a.kraus.len() * b.kraus.len());
    for ka in &a.kraus {
        for kb in &b.kraus {
            kraus.push(ka.kronecker(kb));
        }
    }
    KrausChannel {
        kraus,
        input: Subsystem::new(a.input.label.clone(), a.d_in() * b.d_in()),
        output: Subsystem::new(a.output.label.clone(), a.d_out() * b.d_out()),
    }
}

pub fn tensor_power(ch: &KrausChannel, n: usize) -> Result<KrausChannel> {
    if n == 0 {
        return Err(Error::InvalidParameter("tensor power must be at least 1".into()));
    }
    let mut out = ch.clone();
    for _ in 1..n {
        out = tensor_product(&out, ch);
    }
    Ok(out)
}

/// Isometry `V: A → B ⊗ E`, with `B` the leading factor.
#[derive(Debug, Clone)]
pub struct StinespringIsometry {
    pub v: CMatrix,
    pub d_a: usize,
    pub d_b: usize,
    pub d_e: usize,
}

impl StinespringIsometry {
    /// `V X V†` as an operator on `B ⊗ E` with the given labels.
    pub fn dilate(&self, x: &CMatrix, b: &str, e: &str) -> Result<Operator> {
        Operator::new(
            &self.v * x * self.v.adjoint(),
            vec![Subsystem::new(b, self.d_b), Subsystem::new(e, self.d_e)],
        )
    }
}

/// Kraus list with at most `d_in·d_out` elements; longer lists are compressed through the Choi matrix.
fn reduced_kraus(ch: &KrausChannel) -> Result<Vec<CMatrix>> {
    let limit = ch.d_in() * ch.d_out();
    if ch.kraus.len() <= limit {
        return Ok(ch.kraus.clone());
    }
    let reduced = channel_from_choi(&choi_of_channel(ch), ch.d_in(), ch.d_out(), "in", "out")?;
    if reduced.kraus.len() > limit {
        return Err(Error::TooManyKraus {
            count: reduced.kraus.len(),
            limit,
        });
    }
    Ok(reduced.kraus)
}

/// `V = Σ_l K_l ⊗ |l⟩_E`, zero-padded to `d_E = d_A·d_B`.
pub fn stinespring_dilation(ch: &KrausChannel) -> Result<StinespringIsometry> {
    validate_cptp(ch)?;
    let kraus = reduced_kraus(ch)?;
    let (d_a, d_b) = (ch.d_in(), ch.d_out());
    let d_e = d_a * d_b;
    Ok(StinespringIsometry {
        v: stack_kraus(&kraus, d_b, d_e, d_a),
        d_a,
        d_b,
        d_e,
    })
}

fn stack_kraus(kraus: &[CMatrix], d_b: usize, d_e: usize, d_a: usize) -> CMatrix {
    let mut v = CMatrix::zeros(d_b * d_e, d_a);
    for (l, k) in kraus.iter().enumerate() {
        for b in 0..d_b {
            for a in 0..d_a {
                v[(b * d_e + l, a)] = k[(b, a)];
            }
        }
    }
    v
}

fn complementary_from_kraus(kraus: &[CMatrix], d_e: usize, ch: &KrausChannel, env: &str) -> KrausChannel {
    let (d_a, d_b) = (ch.d_in(), ch.d_out());
    let comp: Vec<CMatrix> = (0..d_b)
        .map(|b| {
            CMatrix::from_fn(d_e, d_a, |l, a| {
                if l < kraus.len() {
                    kraus[l][(b, a)]
                } else {
                    c64(0.0, 0.0)
                }
            })
        })
        .collect();
    KrausChannel {
        kraus: comp,
        input: ch.input.clone(),
        output: Subsystem::new(env, d_e),
    }
}

/// `X ↦ tr_B[V X V†]` for the padded dilation; output system labeled `E`.
pub fn complementary_channel(ch: &KrausChannel) -> Result<KrausChannel> {
    validate_cptp(ch)?;
    let kraus = reduced_kraus(ch)?;
    let d_e = ch.d_in() * ch.d_out();
    Ok(complementary_from_kraus(&kraus, d_e, ch, "E"))
}

/// Complementary channel whose environment dimension equals the Kraus count.
pub fn minimal_complementary_channel(ch: &KrausChannel) -> Result<KrausChannel> {
    validate_cptp(ch)?;
    let kraus = reduced_kraus(ch)?;
    let d_e = kraus.len();
    Ok(complementary_from_kraus(&kraus, d_e, ch, "E"))
}

/// Choi matrix `Σ_ij |i⟩⟨j| ⊗ N(|i⟩⟨j|)` on `in ⊗ out`.
pub fn choi_of_channel(ch: &KrausChannel) -> CMatrix {
    let (din, dout) = (ch.d_in(), ch.d_out());
    let mut c = CMatrix::zeros(din * dout, din * dout);
    for k in &ch.kraus {
        // |K⟫ = Σ_i |i⟩ ⊗ K|i⟩
        let v = DVector::from_fn(din * dout, |x, _| k[(x % dout, x / dout)]);
        c += &v * v.adjoint();
    }
    c
}

/// Kraus form of a Choi matrix on `in ⊗ out` via its eigendecomposition.
pub fn channel_from_choi(
    c: &CMatrix,
    d_in: usize,
    d_out: usize,
    input: &str,
    output: &str,
) -> Result<KrausChannel> {
    if c.shape() != (d_in * d_out, d_in * d_out) {
        return Err(Error::DimensionMismatch(format!(
            "Choi matrix {:?} for dimensions {d_in} -> {d_out}",
            c.shape()
        )));
    }
    let eig = herm_eig(c)?;
    let scale = eig.max_value().max(1.0);
    let lmin = eig.values.last().copied().unwrap_or(0.0);
    if lmin < -1e-8 * scale {
        return Err(Error::NotPsd(lmin));
    }
    let tr_out = matcore::partial_trace(c, &[d_in, d_out], &[0])?;
    let res = (tr_out - CMatrix::identity(d_in, d_in)).norm();
    if res > 1e-8 {
        return Err(Error::NotTracePreserving(res));
    }
    let r = eig.rank(RANK_CUT).max(1);
    let kraus = (0..r)
        .map(|m| {
            let s = eig.values[m].max(0.0).sqrt();
            CMatrix::from_fn(d_out, d_in, |a, i| eig.vectors[(i * d_out + a, m)] * s)
        })
        .collect();
    KrausChannel::new_unchecked(kraus, input, output)
}

/// Source state with its canonical purification `Σ_k √λ_k |k⟩_R |a_k⟩_A`.
#[derive(Debug, Clone)]
pub struct PurifiedSource {
    pub rho: DensityOperator,
    /// Unit vector on `R ⊗ A`.
    pub purification: DVector<C64>,
    pub schmidt_coeffs: Vec<f64>,
    /// Columns `|a_k⟩`; the `R` basis is the computational one.
    pub basis_a: CMatrix,
    pub label_r: String,
    pub label_a: String,
}

impl PurifiedSource {
    pub fn d_r(&self) -> usize {
        self.schmidt_coeffs.len()
    }

    pub fn d_a(&self) -> usize {
        self.basis_a.nrows()
    }

    /// Coefficient matrix `Ψ[r, a]` of the purification.
    pub fn coefficients(&self) -> CMatrix {
        CMatrix::from_fn(self.d_r(), self.d_a(), |r, a| {
            self.purification[r * self.d_a() + a]
        })
    }

    pub fn projector(&self) -> Result<DensityOperator> {
        DensityOperator::new(
            &self.purification * self.purification.adjoint(),
            vec![
                Subsystem::new(self.label_r.clone(), self.d_r()),
                Subsystem::new(self.label_a.clone(), self.d_a()),
            ],
        )
    }
}

pub fn purify(rho: &DensityOperator) -> Result<PurifiedSource> {
    if rho.systems().len() != 1 {
        return Err(Error::DimensionMismatch(
            "purify expects a state on a single labeled system".into(),
        ));
    }
    let eig = herm_eig(rho.matrix())?;
    let r = eig.rank(RANK_CUT);
    let lam: Vec<f64> = eig.values[..r].iter().map(|&x| x.max(0.0)).collect();
    let total: f64 = lam.iter().sum();
    let lam: Vec<f64> = lam.iter().map(|x| x / total).collect();
    let basis_a = eig.support(RANK_CUT);
    let d = rho.dim();
    let purification = DVector::from_fn(r * d, |x, _| {
        let (k, a) = (x / d, x % d);
        basis_a[(a, k)] * lam[k].sqrt()
    });
    let label_a = rho.systems()[0].label.clone();
    let label_r = if label_a == "R" { "R0".into() } else { "R".into() };
    Ok(PurifiedSource {
        rho: rho.clone(),
        purification,
        schmidt_coeffs: lam,
        basis_a,
        label_r,
        label_a,
    })
}

/// `⟨ψ| (1 ⊗ M)(|ψ⟩⟨ψ|) |ψ⟩` for an arbitrary purification `ψ ∈ R ⊗ A`.
pub fn entanglement_fidelity_from_purification(
    psi: &DVector<C64>,
    d_r: usize,
    m: &KrausChannel,
) -> Result<f64> {
    if m.d_in() != m.d_out() || psi.len() != d_r * m.d_in() {
        return Err(Error::DimensionMismatch(format!(
            "purification of length {} with reference {d_r} and map {} -> {}",
            psi.len(),
            m.d_in(),
            m.d_out()
        )));
    }
    let proj = Operator::new(
        psi * psi.adjoint(),
        vec![Subsystem::new("R", d_r), Subsystem::new("A", m.d_in())],
    )?;
    let out = apply_channel(&m.clone().with_labels("A", "A"), &proj, "A")?;
    Ok(overlap(psi, out.matrix()))
}

pub(crate) fn overlap(psi: &DVector<C64>, m: &CMatrix) -> f64 {
    (psi.adjoint() * m * psi)[(0, 0)].re
}

pub fn entanglement_fidelity_direct(rho: &DensityOperator, m: &KrausChannel) -> Result<f64> {
    if m.d_in() != rho.dim() || m.d_out() != rho.dim() {
        return Err(Error::DimensionMismatch(format!(
            "map {} -> {} on a state of dimension {}",
            m.d_in(),
            m.d_out(),
            rho.dim()
        )));
    }
    let src = purify(rho)?;
    entanglement_fidelity_from_purification(&src.purification, src.d_r(), m)
}

/// `(1_R ⊗ N)(|ρ⟩⟨ρ|)` with the channel output relabeled `output`.
pub fn channel_output_state(src: &PurifiedSource, ch: &KrausChannel, output: &str) -> Result<DensityOperator> {
    if ch.d_in() != src.d_a() {
        return Err(Error::DimensionMismatch(format!(
            "channel input {} but source dimension {}",
            ch.d_in(),
            src.d_a()
        )));
    }
    let proj = src.projector()?;
    let ch = ch.clone().with_labels(&src.label_a, output);
    apply_to_state(&ch, &proj, &src.label_a)
}

/// Entanglement fidelity of `decoder ∘ channel`, evaluated by applying the two maps in sequence.
pub fn entanglement_fidelity_composed(
    rho: &DensityOperator,
    channel: &KrausChannel,
    decoder: &KrausChannel,
) -> Result<f64> {
    if channel.d_out() != decoder.d_in() || decoder.d_out() != rho.dim() {
        return Err(Error::DimensionMismatch(format!(
            "decoder {} -> {} after channel {} -> {} on dimension {}",
            decoder.d_in(),
            decoder.d_out(),
            channel.d_in(),
            channel.d_out(),
            rho.dim()
        )));
    }
    let src = purify(rho)?;
    let proj = src.projector()?;
    let mid = apply_channel(
        &channel.clone().with_labels(&src.label_a, "__B"),
        proj.as_operator(),
        &src.label_a,
    )?;
    let out = apply_channel(&decoder.clone().with_labels("__B", &src.label_a), &mid, "__B")?;
    Ok(overlap(&src.purification, out.matrix()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::c64;

    fn pauli_x() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[c64(0., 0.), c64(1., 0.), c64(1., 0.), c64(0., 0.)])
    }

    fn ket0() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[c64(1., 0.), c64(0., 0.), c64(0., 0.), c64(0., 0.)])
    }

    #[test]
    fn validate_examples() {
        assert!(validate_cptp(&KrausChannel::identity(2, "A", "B")).is_ok());
        let bf = KrausChannel::new(
            vec![
                CMatrix::identity(2, 2) * c64(0.7f64.sqrt(), 0.),
                pauli_x() * c64(0.3f64.sqrt(), 0.),
            ],
            "A",
            "B",
        );
        assert!(bf.is_ok());
        let bad = KrausChannel::new_unchecked(
            vec![CMatrix::identity(2, 2), CMatrix::identity(2, 2)],
            "A",
            "B",
        )
        .unwrap();
        assert!(matches!(validate_cptp(&bad), Err(Error::NotTracePreserving(_))));
    }

    #[test]
    fn apply_examples() {
        let x = Operator::new(
            CMatrix::from_fn(2, 2, |i, j| c64(i as f64, j as f64)),
            vec![Subsystem::new("A", 2)],
        )
        .unwrap();
        let id = KrausChannel::identity(2, "A", "A");
        assert!((apply_channel(&id, &x, "A").unwrap().matrix() - x.matrix()).norm() < 1e-15);

        let ad = make_channel(ChannelKind::AmplitudeDamping, 1.0, 1).unwrap();
        let rho = DensityOperator::single("A", CMatrix::identity(2, 2) * c64(0.5, 0.)).unwrap();
        let out = apply_to_state(&ad, &rho, "A").unwrap();
        assert!((out.matrix() - ket0()).norm() < 1e-15);
        assert_eq!(out.systems()[0].label, "B");

        let p = 0.3;
        let bf = make_channel(ChannelKind::BitFlip, p, 1).unwrap();
        let out = bf.apply_matrix(&ket0()).unwrap();
        assert!((out[(0, 0)].re - (1. - p)).abs() < 1e-15);
        assert!((out[(1, 1)].re - p).abs() < 1e-15);
        assert!(apply_channel(&bf, &x, "B").is_err());
    }

    #[test]
    fn adjoint_is_unital() {
        let ch = make_channel(ChannelKind::AmplitudeDamping, 0.4, 2).unwrap();
        let y = adjoint_apply(&ch, &CMatrix::identity(4, 4)).unwrap();
        assert!((y - CMatrix::identity(4, 4)).norm() < 1e-14);
    }

    #[test]
    fn tensor_power_examples() {
        let id = tensor_power(&KrausChannel::identity(2, "A", "B"), 3).unwrap();
        assert_eq!(id.d_in(), 8);
        assert!((&id.kraus()[0] - CMatrix::identity(8, 8)).norm() < 1e-15);

        let p = 0.2;
        let bf2 = tensor_power(&make_channel(ChannelKind::BitFlip, p, 1).unwrap(), 2).unwrap();
        let weights: Vec<f64> = bf2.kraus().iter().map(|k| k.norm_squared() / 4.0).collect();
        let expected = [(1. - p) * (1. - p), p * (1. - p), p * (1. - p), p * p];
        for (w, e) in weights.iter().zip(expected) {
            assert!((w - e).abs() < 1e-14);
        }

        let ad4 = make_channel(ChannelKind::AmplitudeDamping, 0.3, 4).unwrap();
        assert_eq!(ad4.kraus().len(), 16);
        assert!(validate_cptp(&ad4).is_ok());
    }

    #[test]
    fn dilation_examples() {
        let v = stinespring_dilation(&KrausChannel::identity(2, "A", "B")).unwrap();
        assert_eq!(v.d_e, 4);
        assert!((v.v.adjoint() * &v.v - CMatrix::identity(2, 2)).norm() < 1e-14);

        let ad = make_channel(ChannelKind::AmplitudeDamping, 0.5, 1).unwrap();
        let v = stinespring_dilation(&ad).unwrap();
        assert_eq!(v.d_e, 4);
        let active = (0..4)
            .filter(|&l| (0..2).any(|b| (0..2).any(|a| v.v[(b * 4 + l, a)].norm() > 0.0)))
            .count();
        assert_eq!(active, 2);

        let bf = make_channel(ChannelKind::BitFlip, 0.3, 1).unwrap();
        let v = stinespring_dilation(&bf).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let mut x = CMatrix::zeros(2, 2);
                x[(i, j)] = c64(1., 0.);
                let via_v = v.dilate(&x, "B", "E").unwrap().partial_trace(&["B"]).unwrap();
                assert!((via_v.matrix() - bf.apply_matrix(&x).unwrap()).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn complementary_of_identity_is_constant() {
        let c = complementary_channel(&KrausChannel::identity(2, "A", "B")).unwrap();
        let a = c.apply_matrix(&ket0()).unwrap();
        let b = c.apply_matrix(&(CMatrix::identity(2, 2) - ket0())).unwrap();
        assert!((&a - &b).norm() < 1e-15);
        let eig = herm_eig(&a).unwrap();
        assert_eq!(eig.rank(1e-12), 1);
    }

    #[test]
    fn choi_examples() {
        let c = choi_of_channel(&KrausChannel::identity(2, "A", "B"));
        assert!((c.trace().re - 2.0).abs() < 1e-15);
        assert_eq!(herm_eig(&c).unwrap().rank(1e-12), 1);
        assert!((c[(0, 3)].re - 1.0).abs() < 1e-15);

        let dep = make_channel(ChannelKind::Depolarizing, 1.0, 1).unwrap();
        let c = choi_of_channel(&dep);
        assert!((c - CMatrix::identity(4, 4) * c64(0.5, 0.)).norm() < 1e-14);

        let bf = make_channel(ChannelKind::BitFlip, 0.2, 1).unwrap();
        let back = channel_from_choi(&choi_of_channel(&bf), 2, 2, "A", "B").unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let mut x = CMatrix::zeros(2, 2);
                x[(i, j)] = c64(1., 0.);
                let d = bf.apply_matrix(&x).unwrap() - back.apply_matrix(&x).unwrap();
                assert!(d.norm() < 1e-9);
            }
        }
    }

    #[test]
    fn purify_examples() {
        let pure = DensityOperator::single("A", ket0()).unwrap();
        let p = purify(&pure).unwrap();
        assert_eq!(p.d_r(), 1);
        assert!((p.purification[0].norm() - 1.0).abs() < 1e-15);

        let mixed = DensityOperator::single("A", CMatrix::identity(2, 2) * c64(0.5, 0.)).unwrap();
        let p = purify(&mixed).unwrap();
        assert_eq!(p.d_r(), 2);
        assert!((p.schmidt_coeffs[0] - 0.5).abs() < 1e-15);
        let back = p.projector().unwrap().reduced(&["A"]).unwrap();
        assert!((back.matrix() - mixed.matrix()).norm() < 1e-12);
    }

    #[test]
    fn fe_examples() {
        let half = DensityOperator::single("A", CMatrix::identity(2, 2) * c64(0.5, 0.)).unwrap();
        let id = KrausChannel::identity(2, "A", "A");
        assert!((entanglement_fidelity_direct(&half, &id).unwrap() - 1.0).abs() < 1e-14);
        let dep = make_channel(ChannelKind::Depolarizing, 1.0, 1).unwrap();
        assert!((entanglement_fidelity_direct(&half, &dep).unwrap() - 0.25).abs() < 1e-14);
        let ad = make_channel(ChannelKind::AmplitudeDamping, 0.36, 1).unwrap();
        let direct = entanglement_fidelity_direct(&half, &ad).unwrap();
        let traces: f64 = ad.kraus().iter().map(|k| k.trace().norm_sqr()).sum::<f64>() / 4.0;
        assert!((direct - 0.81).abs() < 1e-14);
        assert!((traces - 0.81).abs() < 1e-14);
    }
}
