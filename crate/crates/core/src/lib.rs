//! Pixel-value-differencing (PVD) steganography for 8-bit grayscale images.
//!
//! Two embedders share one range table and one payload framing:
//!
//! - [`pvd`] is the classic Wu-Tsai scheme. Stego pixels may leave `[0, 255]`
//!   and are reported as violations.
//! - [`apvd`] is the adaptive variant. When a block would overflow it drops
//!   the chunk's most significant bit, and failing that moves only one pixel.
//!   A per-block flag is stored in the parity of the block's first pixel.
//!   Stego pixels always stay inside `[0, 255]` and capacity matches PVD.
//!
//! Payloads are framed with a 32-bit big-endian bit count, see [`codec`].

pub mod apvd;
pub mod cli;
pub mod codec;
pub mod imagery;
pub mod metrics;
pub mod pvd;
pub mod selftest;

mod error;

pub use codec::{BitCursor, Range, RangeTable, TableError};
pub use error::StegoError;
pub use imagery::{GrayImage, PgmError, PgmVariant};

use std::fmt;
use std::str::FromStr;

/// Embedding scheme selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Classic pixel-value differencing; may leave the gray range.
    Pvd,
    /// Adaptive, range-safe variant.
    Apvd,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Pvd => "pvd",
            Method::Apvd => "apvd",
        })
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pvd" => Ok(Method::Pvd),
            "apvd" => Ok(Method::Apvd),
            other => Err(format!("unknown method {other:?}")),
        }
    }
}
