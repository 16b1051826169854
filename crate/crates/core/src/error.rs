use thiserror::Error;

use crate::codec::FrameError;

/// Failures of the image-level embed and extract drivers.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StegoError {
    #[error("payload needs {required} bits but the cover holds only {available}")]
    CapacityExceeded { required: usize, available: usize },
    #[error(transparent)]
    Frame(#[from] FrameError),
}
