use std::fmt;
use std::str::FromStr;

use super::{tensor_power, KrausChannel};
use crate::error::{Error, Result};
use crate::matcore::{c64, CMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelKind {
    BitFlip,
    AmplitudeDamping,
    Identity,
    Depolarizing,
}

impl ChannelKind {
    pub fn name(self) -> &'static str {
        match self {
            ChannelKind::BitFlip => "bitflip",
            ChannelKind::AmplitudeDamping => "amplitude_damping",
            ChannelKind::Identity => "identity",
            ChannelKind::Depolarizing => "depolarizing",
        }
    }
}

impl fmt::Display for ChannelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ChannelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bitflip" => Ok(ChannelKind::BitFlip),
            "amplitude_damping" => Ok(ChannelKind::AmplitudeDamping),
            "identity" => Ok(ChannelKind::Identity),
            "depolarizing" => Ok(ChannelKind::Depolarizing),
            other => Err(Error::InvalidParameter(format!("unknown channel `{other}`"))),
        }
    }
}

fn qubit(entries: [f64; 4], im: [f64; 4], scale: f64) -> CMatrix {
    CMatrix::from_fn(2, 2, |i, j| c64(entries[2 * i + j], im[2 * i + j]) * scale)
}

/// `n`-fold tensor power of a single-qubit channel, mapping system `A` to `B`.
pub fn make_channel(kind: ChannelKind, p: f64, n: usize) -> Result<KrausChannel> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("p = {p} outside [0, 1]")));
    }
    let z = [0.0; 4];
    let kraus = match kind {
        ChannelKind::Identity => vec![qubit([1., 0., 0., 1.], z, 1.0)],
        ChannelKind::BitFlip => vec![
            qubit([1., 0., 0., 1.], z, (1.0 - p).sqrt()),
            qubit([0., 1., 1., 0.], z, p.sqrt()),
        ],
        ChannelKind::AmplitudeDamping => vec![
            qubit([1., 0., 0., (1.0 - p).sqrt()], z, 1.0),
            qubit([0., p.sqrt(), 0., 0.], z, 1.0),
        ],
        ChannelKind::Depolarizing => {
            let w = (p / 4.0).sqrt();
            vec![
                qubit([1., 0., 0., 1.], z, (1.0 - 0.75 * p).sqrt()),
                qubit([0., 1., 1., 0.], z, w),
                qubit(z, [0., -1., 1., 0.], w),
                qubit([1., 0., 0., -1.], z, w),
            ]
        }
    };
    let single = KrausChannel::new(kraus, "A", "B")?;
    tensor_power(&single, n)
}
