//! Parameter sweeps over the experiment settings, invariant audits, and CSV output.

mod audit;
mod config;
mod settings;
mod sweep;

pub use audit::{audit_invariants, check_decoder, AuditCheck, AuditReport};
pub use config::{apply_env_overrides, parse_config, SweepConfig};
pub use settings::{Setting, ALL_SETTINGS};
pub use sweep::{run_sweep, MAX_SDP_DIM};

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

/// One curve of the sweep: a decoder fidelity or a bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Series {
    None,
    Petz,
    Twirled,
    Sw,
    Optimal,
    LowerSw,
    LowerTwirled,
    UpperBk,
    SwOriginal,
}

impl Series {
    pub const DECODERS: [Series; 5] = [
        Series::None,
        Series::Petz,
        Series::Twirled,
        Series::Sw,
        Series::Optimal,
    ];
    pub const BOUNDS: [Series; 4] = [
        Series::LowerSw,
        Series::LowerTwirled,
        Series::UpperBk,
        Series::SwOriginal,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Series::None => "none",
            Series::Petz => "petz",
            Series::Twirled => "twirled",
            Series::Sw => "sw",
            Series::Optimal => "optimal",
            Series::LowerSw => "lower_sw",
            Series::LowerTwirled => "lower_twirled",
            Series::UpperBk => "upper_bk",
            Series::SwOriginal => "sw_original",
        }
    }

    pub fn is_decoder(self) -> bool {
        Series::DECODERS.contains(&self)
    }
}

impl fmt::Display for Series {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Series {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Series::DECODERS
            .iter()
            .chain(&Series::BOUNDS)
            .copied()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown series `{s}`")))
    }
}

/// One value of one series at one `p`.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub setting: String,
    pub p: f64,
    pub series: Series,
    /// NaN when the point failed or was skipped; `flags` says which.
    pub value: f64,
    pub seconds: f64,
    /// Semicolon-separated markers such as `skipped:...` or `error:...`.
    pub flags: String,
}

impl CurvePoint {
    pub fn failed(&self) -> bool {
        self.flags.split(';').any(|f| f.starts_with("error:"))
    }
}

/// C-style `%.{sig}g`.
pub fn format_g(x: f64, sig: usize) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.into();
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0" } else { "0" }.into();
    }
    let sig = sig.max(1);
    let sci = format!("{:.*e}", sig - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= sig as i32 {
        let m = strip_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (sig as i32 - 1 - exp).max(0) as usize;
        strip_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Writes the points as CSV, sorted by `(setting, series, p)`.
pub fn write_csv(points: &[CurvePoint], out: impl Write) -> Result<()> {
    let mut sorted: Vec<&CurvePoint> = points.iter().collect();
    sorted.sort_by(|a, b| {
        a.setting
            .cmp(&b.setting)
            .then_with(|| a.series.name().cmp(b.series.name()))
            .then_with(|| a.p.total_cmp(&b.p))
    });
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    let csv_err = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(["setting", "p", "series", "value", "seconds", "flags"])
        .map_err(csv_err)?;
    for pt in sorted {
        w.write_record([
            pt.setting.as_str(),
            &format_g(pt.p, 12),
            pt.series.name(),
            &format_g(pt.value, 12),
            &format_g(pt.seconds, 12),
            &pt.flags,
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_csv(points: &[CurvePoint], path: &Path) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut buf = std::io::BufWriter::new(file);
    write_csv(points, &mut buf)?;
    buf.flush()?;
    Ok(())
}
