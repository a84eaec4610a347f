use std::path::PathBuf;

use serde::Deserialize;

use super::settings::Setting;
use super::Series;
use crate::error::{Error, Result};

/// Parameters of one sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub setting: Setting,
    pub p_start: f64,
    pub p_stop: f64,
    pub p_count: usize,
    pub decoders: Vec<Series>,
    pub bounds: Vec<Series>,
    /// SDP tolerance.
    pub tol: f64,
    /// Output file; standard output when absent.
    pub out: Option<PathBuf>,
    pub workers: usize,
    /// Record wall time per point; off by default so output is reproducible.
    pub timings: bool,
}

impl SweepConfig {
    pub fn new(setting: Setting) -> Self {
        SweepConfig {
            setting,
            p_start: 0.0,
            p_stop: 1.0,
            p_count: 101,
            decoders: Series::DECODERS.to_vec(),
            bounds: Series::BOUNDS.to_vec(),
            tol: 1e-7,
            out: None,
            workers: 1,
            timings: false,
        }
    }

    pub fn grid(&self) -> Vec<f64> {
        if self.p_count == 1 {
            return vec![self.p_start];
        }
        let span = self.p_stop - self.p_start;
        (0..self.p_count)
            .map(|i| self.p_start + span * i as f64 / (self.p_count - 1) as f64)
            .collect()
    }

    /// Requested series, decoders first.
    pub fn series(&self) -> Vec<Series> {
        self.decoders.iter().chain(&self.bounds).copied().collect()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, message: String| {
            Err(Error::Validation {
                field: field.into(),
                message,
            })
        };
        for (field, v) in [("p_start", self.p_start), ("p_stop", self.p_stop)] {
            if !(0.0..=1.0).contains(&v) {
                return bad(field, format!("{v} is outside [0, 1]"));
            }
        }
        if self.p_stop < self.p_start {
            return bad("p_stop", format!("{} is below p_start = {}", self.p_stop, self.p_start));
        }
        if self.p_count == 0 {
            return bad("p_count", "must be at least 1".into());
        }
        if let Some(s) = self.decoders.iter().find(|s| !s.is_decoder()) {
            return bad("decoders", format!("`{s}` is a bound, not a decoder"));
        }
        if let Some(s) = self.bounds.iter().find(|s| s.is_decoder()) {
            return bad("bounds", format!("`{s}` is a decoder, not a bound"));
        }
        if self.decoders.is_empty() && self.bounds.is_empty() {
            return bad("decoders", "no decoders or bounds requested".into());
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return bad("tol", format!("{} is not a positive tolerance", self.tol));
        }
        if self.workers == 0 {
            return bad("workers", "must be at least 1".into());
        }
        Ok(())
    }
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum NameList {
    Joined(String),
    Items(Vec<String>),
}

impl NameList {
    fn names(self) -> Vec<String> {
        match self {
            NameList::Joined(s) => s
                .split(',')
                .map(|x| x.trim().to_string())
                .filter(|x| !x.is_empty())
                .collect(),
            NameList::Items(v) => v,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    setting: String,
    p_start: Option<f64>,
    p_stop: Option<f64>,
    p_count: Option<i64>,
    decoders: Option<NameList>,
    bounds: Option<NameList>,
    tol: Option<f64>,
    out: Option<String>,
    workers: Option<i64>,
}

fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

fn parse_list(field: &str, list: NameList) -> Result<Vec<Series>> {
    let mut out: Vec<Series> = Vec::new();
    for name in list.names() {
        let s: Series = name.parse().map_err(|_| Error::Validation {
            field: field.into(),
            message: format!("unknown series `{name}`"),
        })?;
        if !out.contains(&s) {
            out.push(s);
        }
    }
    Ok(out)
}

fn count(field: &str, v: i64) -> Result<usize> {
    usize::try_from(v).map_err(|_| Error::Validation {
        field: field.into(),
        message: format!("{v} is negative"),
    })
}

/// Parses a TOML sweep description with flat keys.
pub fn parse_config(text: &str) -> Result<SweepConfig> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| {
        let (line, column) = e.span().map_or((1, 1), |s| line_column(text, s.start));
        Error::Parse {
            line,
            column,
            message: e.message().to_string(),
        }
    })?;
    let mut cfg = SweepConfig::new(raw.setting.parse()?);
    if let Some(v) = raw.p_start {
        cfg.p_start = v;
    }
    if let Some(v) = raw.p_stop {
        cfg.p_stop = v;
    }
    if let Some(v) = raw.p_count {
        cfg.p_count = count("p_count", v)?;
    }
    if let Some(v) = raw.decoders {
        cfg.decoders = parse_list("decoders", v)?;
    }
    if let Some(v) = raw.bounds {
        cfg.bounds = parse_list("bounds", v)?;
    }
    if let Some(v) = raw.tol {
        cfg.tol = v;
    }
    cfg.out = raw.out.map(PathBuf::from);
    if let Some(v) = raw.workers {
        cfg.workers = count("workers", v)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Applies `PETZLAB_WORKERS` if it is set.
pub fn apply_env_overrides(cfg: &mut SweepConfig) -> Result<()> {
    if let Ok(v) = std::env::var("PETZLAB_WORKERS") {
        cfg.workers = v.trim().parse().map_err(|_| Error::Validation {
            field: "PETZLAB_WORKERS".into(),
            message: format!("`{v}` is not a worker count"),
        })?;
        cfg.validate()?;
    }
    Ok(())
}
