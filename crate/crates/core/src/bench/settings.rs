use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::matcore::{c64, CMatrix};
use crate::quantum::{make_channel, make_code_source, ChannelKind, CodeKind, DensityOperator, KrausChannel};

/// A source state together with a one-parameter channel family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Setting {
    /// Three-qubit repetition code under independent bit flips.
    BitFlip3,
    /// Four-qubit amplitude damping code under amplitude damping.
    Lncy4,
    /// Five-qubit perfect code under amplitude damping.
    FiveQubit,
    /// Repetition code through the noiseless channel; `p` is ignored.
    Identity,
    /// Maximally mixed qubit through the depolarizing channel.
    Depolarizing,
}

pub const ALL_SETTINGS: [Setting; 5] = [
    Setting::BitFlip3,
    Setting::Lncy4,
    Setting::FiveQubit,
    Setting::Identity,
    Setting::Depolarizing,
];

impl Setting {
    pub fn name(self) -> &'static str {
        match self {
            Setting::BitFlip3 => "bitflip3",
            Setting::Lncy4 => "lncy4",
            Setting::FiveQubit => "fivequbit",
            Setting::Identity => "identity",
            Setting::Depolarizing => "depolarizing",
        }
    }

    pub fn source(self) -> Result<DensityOperator> {
        match self {
            Setting::BitFlip3 | Setting::Identity => make_code_source(CodeKind::BitFlip3),
            Setting::Lncy4 => make_code_source(CodeKind::Lncy4),
            Setting::FiveQubit => make_code_source(CodeKind::FiveQubit),
            Setting::Depolarizing => {
                DensityOperator::single("A", CMatrix::identity(2, 2) * c64(0.5, 0.0))
            }
        }
    }

    pub fn channel(self, p: f64) -> Result<KrausChannel> {
        match self {
            Setting::BitFlip3 => make_channel(ChannelKind::BitFlip, p, 3),
            Setting::Lncy4 => make_channel(ChannelKind::AmplitudeDamping, p, 4),
            Setting::FiveQubit => make_channel(ChannelKind::AmplitudeDamping, p, 5),
            Setting::Identity => make_channel(ChannelKind::Identity, p, 3),
            Setting::Depolarizing => make_channel(ChannelKind::Depolarizing, p, 1),
        }
    }
}

impl fmt::Display for Setting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Setting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ALL_SETTINGS
            .iter()
            .copied()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::Validation {
                field: "setting".into(),
                message: format!(
                    "unknown setting `{s}` (expected one of {})",
                    ALL_SETTINGS.map(Setting::name).join(", ")
                ),
            })
    }
}
