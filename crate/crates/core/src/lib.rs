//! Decoders for one-shot entanglement transmission: Petz, rotated and twirled
//! Petz, Schumacher-Westmoreland, and SDP-optimal recovery, together with the
//! information measures that bound their entanglement fidelity.

pub mod error;
pub mod matcore;

pub use error::{Error, Result};
pub mod quantum;
pub mod infomeasures;
pub mod decoders;
pub mod optdec;
pub mod bench;
