use rayon::prelude::*;

use super::sweep::{thread_pool, PointContext, MAX_SDP_DIM};
use super::{Series, SweepConfig};
use crate::decoders::{
    beta0_quadrature, build_petz, build_sw, build_twirled_petz, fe_closed_form, quadrature, Decoder,
    FidelityVariant,
};
use crate::error::Result;
use crate::infomeasures::{epsilon_sw, sw_lower_bound, twirled_lower_bound};
use crate::optdec::{bk_bracket_check, reduce_problem};
use crate::quantum::validate_cptp;

/// Slack for the closed-form and inequality-chain checks.
const CHAIN_SLACK: f64 = 1e-8;
/// Agreement between the materialized and scalar twirled fidelities.
const TWIRLED_SLACK: f64 = 1e-7;
const BRACKET_SLACK: f64 = 1e-6;
const NORMALIZATION_SLACK: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct AuditCheck {
    /// `None` for checks that do not depend on the grid point.
    pub p: Option<f64>,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Default)]
pub struct AuditReport {
    pub setting: String,
    pub checks: Vec<AuditCheck>,
}

impl AuditReport {
    pub fn violations(&self) -> impl Iterator<Item = &AuditCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn passed(&self) -> bool {
        self.violations().next().is_none()
    }

    pub fn lines(&self) -> Vec<String> {
        self.checks
            .iter()
            .map(|c| {
                let at = c.p.map_or_else(|| "-".to_string(), |p| format!("{p:.6}"));
                let verdict = if c.passed { "PASS" } else { "FAIL" };
                format!("{} p={at} {} {verdict} {}", self.setting, c.name, c.detail)
            })
            .collect()
    }
}

/// Rejects decoders that are not CPTP.
pub fn check_decoder(d: &Decoder) -> Result<()> {
    validate_cptp(&d.channel)
}

fn check(p: f64, name: &'static str, result: Result<(bool, String)>) -> AuditCheck {
    let (passed, detail) = result.unwrap_or_else(|e| (false, format!("error: {e}")));
    AuditCheck {
        p: Some(p),
        name,
        passed,
        detail,
    }
}

struct Fidelities {
    petz: f64,
    twirled: f64,
    sw: f64,
}

fn decoders(ctx: &PointContext) -> Result<Fidelities> {
    let petz = build_petz(&ctx.rho, &ctx.channel)?;
    let twirled = build_twirled_petz(&ctx.rho, &ctx.channel, quadrature::DEFAULT_TOL)?;
    let sw = build_sw(&ctx.rho, &ctx.channel)?.0;
    for d in [&petz, &twirled, &sw] {
        check_decoder(d)?;
    }
    Ok(Fidelities {
        petz: ctx.fidelity(&petz)?,
        twirled: ctx.fidelity(&twirled)?,
        sw: ctx.fidelity(&sw)?,
    })
}

fn audit_point(cfg: &SweepConfig, p: f64, with_optimal: bool) -> Vec<AuditCheck> {
    let ctx = match PointContext::new(cfg, p) {
        Ok(c) => c,
        Err(e) => return vec![check(p, "setup", Err(e))],
    };
    let f = match decoders(&ctx) {
        Ok(f) => f,
        Err(e) => return vec![check(p, "decoders_cptp", Err(e))],
    };
    let s = &ctx.sigma_rb;
    let mut out = vec![check(p, "decoders_cptp", Ok((true, String::new())))];

    out.push(check(
        p,
        "closed_form_petz",
        fe_closed_form(s, FidelityVariant::Petz).map(|c| {
            let diff = (c - f.petz).abs();
            (diff <= CHAIN_SLACK, format!("|diff|={diff:.3e}"))
        }),
    ));
    out.push(check(
        p,
        "closed_form_twirled",
        fe_closed_form(s, FidelityVariant::Twirled).map(|c| {
            let diff = (c - f.twirled).abs();
            (diff <= TWIRLED_SLACK, format!("|diff|={diff:.3e}"))
        }),
    ));
    out.push(check(
        p,
        "chain_twirled",
        twirled_lower_bound(s, "R", "B").map(|lb| {
            let ok = f.petz + CHAIN_SLACK >= f.twirled && f.twirled + CHAIN_SLACK >= lb;
            (
                ok,
                format!("petz={:.10} twirled={:.10} bound={lb:.10}", f.petz, f.twirled),
            )
        }),
    ));
    out.push(check(
        p,
        "chain_sw",
        sw_lower_bound(s, "R", "B").and_then(|lb| {
            let weak = 2f64.powf(-epsilon_sw(s, "R", "B")?);
            let ok = f.sw + CHAIN_SLACK >= lb && lb + CHAIN_SLACK >= weak;
            Ok((ok, format!("sw={:.10} bound={lb:.10} weak={weak:.10}", f.sw)))
        }),
    ));
    if with_optimal {
        let result = reduce_problem(&ctx.rho, &ctx.channel).and_then(|(prob, _)| {
            if prob.dim() > MAX_SDP_DIM {
                return Ok((true, format!("skipped: sdp dimension {}", prob.dim())));
            }
            let r = bk_bracket_check(&ctx.rho, &ctx.channel, BRACKET_SLACK)?;
            Ok((
                true,
                format!("{:.10} <= {:.10} <= {:.10}", r.f_opt_squared, r.f_petz, r.f_opt),
            ))
        });
        out.push(check(p, "bk_bracket", result));
    }
    out
}

/// Runs the invariant checks on every grid point of `cfg`. The bracket check
/// runs only when the optimal series is requested.
pub fn audit_invariants(cfg: &SweepConfig) -> Result<AuditReport> {
    cfg.validate()?;
    let with_optimal = cfg.decoders.contains(&Series::Optimal);
    let mut checks = Vec::new();
    let norm = beta0_quadrature(|_| 1.0, 1e-12).map(|q| {
        let diff = (q.value - 1.0).abs();
        (diff <= NORMALIZATION_SLACK, format!("|diff|={diff:.3e}"))
    });
    let (passed, detail) = norm.unwrap_or_else(|e| (false, format!("error: {e}")));
    checks.push(AuditCheck {
        p: None,
        name: "beta0_normalization",
        passed,
        detail,
    });
    let grid = cfg.grid();
    let pool = thread_pool(cfg.workers)?;
    let per_point: Vec<Vec<AuditCheck>> = pool.install(|| {
        grid.par_iter()
            .map(|&p| audit_point(cfg, p, with_optimal))
            .collect()
    });
    checks.extend(per_point.into_iter().flatten());
    Ok(AuditReport {
        setting: cfg.setting.name().to_string(),
        checks,
    })
}
