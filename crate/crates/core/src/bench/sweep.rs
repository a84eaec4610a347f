use std::time::Instant;

use rayon::prelude::*;

use super::{CurvePoint, Series, SweepConfig};
use crate::decoders::{
    build_petz, build_sw, build_twirled_petz, channel_state, fe_of_decoder, quadrature, Decoder,
};
use crate::error::{Error, Result};
use crate::infomeasures::{epsilon_sw, sw_lower_bound, sw_original_bound, twirled_lower_bound};
use crate::optdec::{reduce_problem, solve_sdp};
use crate::quantum::{DensityOperator, KrausChannel};

/// Largest reduced Choi variable for which the optimal series is computed.
pub const MAX_SDP_DIM: usize = 128;

/// Slack below zero within which `ε^SW` is treated as rounding.
const EPS_CLAMP: f64 = 1e-12;

pub(crate) struct PointContext {
    pub rho: DensityOperator,
    pub channel: KrausChannel,
    pub sigma_rb: DensityOperator,
}

impl PointContext {
    pub fn new(cfg: &SweepConfig, p: f64) -> Result<Self> {
        let rho = cfg.setting.source()?;
        let channel = cfg.setting.channel(p)?;
        let sigma_rb = channel_state(&rho, &channel)?;
        Ok(PointContext {
            rho,
            channel,
            sigma_rb,
        })
    }

    pub fn fidelity(&self, d: &Decoder) -> Result<f64> {
        fe_of_decoder(&self.rho, &self.channel, d)
    }
}

/// Value and flags of one series at one point.
fn evaluate(ctx: &PointContext, series: Series, tol: f64) -> Result<(f64, String)> {
    let (rho, ch, s) = (&ctx.rho, &ctx.channel, &ctx.sigma_rb);
    let plain = |v: f64| Ok((v, String::new()));
    match series {
        Series::None => plain(ctx.fidelity(&Decoder::identity(ch)?)?),
        Series::Petz => plain(ctx.fidelity(&build_petz(rho, ch)?)?),
        Series::Twirled => plain(ctx.fidelity(&build_twirled_petz(rho, ch, quadrature::DEFAULT_TOL)?)?),
        Series::Sw => plain(ctx.fidelity(&build_sw(rho, ch)?.0)?),
        Series::Optimal => {
            let (prob, _) = reduce_problem(rho, ch)?;
            if prob.dim() > MAX_SDP_DIM {
                return Ok((f64::NAN, format!("skipped:sdp_dim={}", prob.dim())));
            }
            plain(solve_sdp(&prob, tol)?.primal_value)
        }
        Series::LowerSw => plain(sw_lower_bound(s, "R", "B")?),
        Series::LowerTwirled => plain(twirled_lower_bound(s, "R", "B")?),
        Series::UpperBk => plain(ctx.fidelity(&build_petz(rho, ch)?)?.sqrt()),
        Series::SwOriginal => {
            let eps = epsilon_sw(s, "R", "B")?;
            if (-EPS_CLAMP..0.0).contains(&eps) {
                Ok((sw_original_bound(0.0)?, "eps_clamped".into()))
            } else {
                plain(sw_original_bound(eps)?)
            }
        }
    }
}

fn error_flag(e: &Error) -> String {
    format!("error:{e}").replace([',', ';', '\n'], " ")
}

fn run_point(cfg: &SweepConfig, p: f64, series: &[Series]) -> Vec<CurvePoint> {
    let name = cfg.setting.name().to_string();
    let point = |series: Series, value: f64, seconds: f64, flags: String| CurvePoint {
        setting: name.clone(),
        p,
        series,
        value,
        seconds: if cfg.timings { seconds } else { 0.0 },
        flags,
    };
    let ctx = match PointContext::new(cfg, p) {
        Ok(c) => c,
        Err(e) => {
            return series
                .iter()
                .map(|&s| point(s, f64::NAN, 0.0, error_flag(&e)))
                .collect()
        }
    };
    series
        .iter()
        .map(|&s| {
            let start = Instant::now();
            let (value, flags) = evaluate(&ctx, s, cfg.tol).unwrap_or_else(|e| (f64::NAN, error_flag(&e)));
            point(s, value, start.elapsed().as_secs_f64(), flags)
        })
        .collect()
}

pub(crate) fn thread_pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidParameter(format!("worker pool: {e}")))
}

/// Evaluates every requested series on the grid. Failed points are kept with
/// value NaN and an `error:` flag.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<CurvePoint>> {
    cfg.validate()?;
    let series = cfg.series();
    let grid = cfg.grid();
    let pool = thread_pool(cfg.workers)?;
    let per_point: Vec<Vec<CurvePoint>> =
        pool.install(|| grid.par_iter().map(|&p| run_point(cfg, p, &series)).collect());
    Ok(per_point.into_iter().flatten().collect())
}
