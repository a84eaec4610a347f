//! Integration against `β₀(t) = (π/2)/(cosh(πt) + 1)`.
//!
//! With `u = tanh(πt/2)` the weight becomes `du/2` on `(-1, 1)`, so the
//! integral is computed with composite 64-point Gauss-Legendre on `u`,
//! bisecting the panel with the largest local error estimate.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-9;
const ORDER: usize = 64;
const MAX_PANELS: usize = 4096;
/// Truncation point of the fallback rule.
const T_MAX: f64 = 8.0;

pub fn beta0(t: f64) -> f64 {
    (PI / 2.0) / ((PI * t).cosh() + 1.0)
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 0 { 1.0 } else { p1 };
            dp = n as f64 * (z * p - p0) / (z * z - 1.0);
            let dz = p / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

fn base_rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(ORDER))
}

/// Nodes `t_n` and weights `w_n` with `Σ w_n g(t_n) ≈ ∫ β₀(t) g(t) dt`.
#[derive(Debug, Clone, Default)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn apply(&self, g: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&t, &w)| w * g(t)).sum()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct QuadratureResult {
    pub value: f64,
    pub error_estimate: f64,
    pub rule: QuadratureRule,
    /// True when the `|t| ≤ 8` fallback was used.
    pub truncated: bool,
}

fn t_of_u(u: f64) -> f64 {
    (2.0 / PI) * u.atanh()
}

struct Panel {
    a: f64,
    b: f64,
    coarse: f64,
    fine: f64,
    /// `|g(0)|` when the panel touches `u = ±1`, where the integrand oscillates
    /// without bound and the two rules can agree by accident; zero otherwise.
    end_bound: f64,
}

impl Panel {
    fn error(&self) -> f64 {
        // both the exact panel integral and the rule are bounded by (b - a)|g(0)|/2
        (self.fine - self.coarse)
            .abs()
            .max(self.end_bound * (self.b - self.a))
    }
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error()
            .total_cmp(&other.error())
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

/// `½ ∫_a^b g(t(u)) du` with the base rule.
fn gl(g: &impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let (x, w) = base_rule();
    let (mid, half) = ((a + b) / 2.0, (b - a) / 2.0);
    let s: f64 = x
        .iter()
        .zip(w)
        .map(|(&xi, &wi)| wi * g(t_of_u(mid + half * xi)))
        .sum();
    0.5 * half * s
}

fn panel(g: &impl Fn(f64) -> f64, a: f64, b: f64, coarse: f64, g0: f64) -> Panel {
    let m = (a + b) / 2.0;
    let fine = gl(g, a, m) + gl(g, m, b);
    let end_bound = if a <= -1.0 || b >= 1.0 { g0 } else { 0.0 };
    Panel {
        a,
        b,
        coarse,
        fine,
        end_bound,
    }
}

/// Adaptive integration over `[-lim, lim]` in `u`; `None` if the panel budget runs out.
fn adaptive(g: &impl Fn(f64) -> f64, lim: f64, tol: f64) -> Option<(f64, f64, Vec<(f64, f64)>)> {
    let g0 = g(0.0).abs();
    let mut heap = BinaryHeap::new();
    let whole = gl(g, -lim, lim);
    heap.push(panel(g, -lim, lim, whole, g0));
    let mut total_err: f64 = heap.iter().map(Panel::error).sum();
    while total_err > tol {
        if heap.len() >= MAX_PANELS {
            return None;
        }
        let p = heap.pop().expect("heap is never empty");
        let m = (p.a + p.b) / 2.0;
        let left = panel(g, p.a, m, gl(g, p.a, m), g0);
        let right = panel(g, m, p.b, gl(g, m, p.b), g0);
        heap.push(left);
        heap.push(right);
        // recompute to avoid drift from repeated subtraction
        total_err = heap.iter().map(Panel::error).sum();
    }
    let mut panels: Vec<(f64, f64)> = heap.iter().map(|p| (p.a, p.b)).collect();
    panels.sort_by(|x, y| x.0.total_cmp(&y.0));
    let value = heap.iter().map(|p| p.fine).sum();
    Some((value, total_err, panels))
}

/// The composite rule (two base rules per panel) as explicit `t` nodes.
fn rule_from_panels(panels: &[(f64, f64)]) -> QuadratureRule {
    let (x, w) = base_rule();
    let mut rule = QuadratureRule::default();
    for &(a, b) in panels {
        let m = (a + b) / 2.0;
        for (lo, hi) in [(a, m), (m, b)] {
            let (mid, half) = ((lo + hi) / 2.0, (hi - lo) / 2.0);
            for (&xi, &wi) in x.iter().zip(w) {
                rule.nodes.push(t_of_u(mid + half * xi));
                rule.weights.push(0.5 * half * wi);
            }
        }
    }
    rule
}

/// `∫ β₀(t) g(t) dt` to absolute accuracy `tol`, for `g` bounded by `|g(0)|`.
pub fn beta0_quadrature(g: impl Fn(f64) -> f64, tol: f64) -> Result<QuadratureResult> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("quadrature tolerance {tol}")));
    }
    if let Some((value, err, panels)) = adaptive(&g, 1.0, tol) {
        return Ok(QuadratureResult {
            value,
            error_estimate: err,
            rule: rule_from_panels(&panels),
            truncated: false,
        });
    }
    let lim = (PI * T_MAX / 2.0).tanh();
    let tail = g(0.0).abs() * (1.0 - lim);
    match adaptive(&g, lim, (tol - tail).max(tol / 2.0)) {
        Some((value, err, panels)) if err + tail <= tol => Ok(QuadratureResult {
            value,
            error_estimate: err + tail,
            rule: rule_from_panels(&panels),
            truncated: true,
        }),
        _ => Err(Error::ToleranceNotMet {
            estimate: f64::NAN,
            tol,
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_rule_is_exact_for_polynomials() {
        let (x, w) = gauss_legendre(64);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        let m: f64 = x.iter().zip(&w).map(|(a, b)| b * a.powi(126)).sum();
        assert!((m - 2.0 / 127.0).abs() < 1e-14);
        let (x5, w5) = gauss_legendre(5);
        assert!((x5[2]).abs() < 1e-15);
        assert!((w5[2] - 128.0 / 225.0).abs() < 1e-14);
    }

    #[test]
    fn normalization() {
        let r = beta0_quadrature(|_| 1.0, 1e-12).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
        assert!((r.rule.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let c = beta0_quadrature(|_| 0.37, DEFAULT_TOL).unwrap();
        assert!((c.value - 0.37).abs() < 1e-12);
    }

    #[test]
    fn rule_reproduces_value() {
        let g = |t: f64| (0.7 * t).cos();
        let r = beta0_quadrature(g, DEFAULT_TOL).unwrap();
        assert!((r.rule.apply(g) - r.value).abs() < 1e-14);
        // ∫ β₀(t) cos(ωt) dt = ω / sinh ω
        assert!((r.value - 0.7 / 0.7f64.sinh()).abs() < 1e-9);
    }
}
