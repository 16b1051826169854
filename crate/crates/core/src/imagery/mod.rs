//! Grayscale rasters, the PGM codec and the two-pixel block partition.

mod pgm;
pub mod synthetic;

pub use pgm::{load_pgm, save_pgm, PgmError, PgmVariant};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ImageError {
    #[error("image dimensions must be non-zero, got {width}x{height}")]
    ZeroDimension { width: usize, height: usize },
    #[error("expected {expected} pixels for the given dimensions, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
}

/// Rectangular 8-bit grayscale raster, row-major, top-left first.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self, ImageError> {
        if width == 0 || height == 0 {
            return Err(ImageError::ZeroDimension { width, height });
        }
        let expected = width
            .checked_mul(height)
            .ok_or(ImageError::LengthMismatch { expected: usize::MAX, actual: pixels.len() })?;
        if pixels.len() != expected {
            return Err(ImageError::LengthMismatch { expected, actual: pixels.len() });
        }
        Ok(Self { width, height, pixels })
    }

    /// Image with every pixel set to `value`.
    ///
    /// Panics if either dimension is zero.
    pub fn filled(width: usize, height: usize, value: u8) -> Self {
        Self::new(width, height, vec![value; width * height]).expect("non-zero dimensions")
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<u8> {
        self.pixels
    }

    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    /// Number of complete two-pixel blocks. An odd trailing pixel is not counted.
    pub fn block_count(&self) -> usize {
        self.pixels.len() / 2
    }

    /// Same raster with one block's pixels replaced.
    pub(crate) fn set_block(&mut self, block: BlockIndex, pair: (u8, u8)) {
        self.pixels[block.first()] = pair.0;
        self.pixels[block.second()] = pair.1;
    }

    /// Non-overlapping pixel pairs in flat row-major order.
    ///
    /// Rows are concatenated, so a pair may straddle a row boundary when the
    /// width is odd. If the pixel count is odd the last pixel is skipped.
    pub fn blocks(&self) -> impl ExactSizeIterator<Item = (BlockIndex, (u8, u8))> + '_ {
        block_sequence(&self.pixels)
    }
}

/// Position of a two-pixel block inside a flat raster.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BlockIndex(pub usize);

impl BlockIndex {
    pub fn ordinal(self) -> usize {
        self.0
    }

    pub fn first(self) -> usize {
        2 * self.0
    }

    pub fn second(self) -> usize {
        2 * self.0 + 1
    }
}

/// Pairs up any flat sample slice the same way [`GrayImage::blocks`] does.
pub fn block_sequence<T: Copy>(
    samples: &[T],
) -> impl ExactSizeIterator<Item = (BlockIndex, (T, T))> + '_ {
    samples
        .chunks_exact(2)
        .enumerate()
        .map(|(i, pair)| (BlockIndex(i), (pair[0], pair[1])))
}
