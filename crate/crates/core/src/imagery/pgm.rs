//! Netpbm PGM reader and writer, restricted to maxval 255.
//!
//! Both the plain (`P2`) and raw (`P5`) variants are read. Comments are
//! skipped on load and never written on save.

use std::fmt::Write as _;

use thiserror::Error;

use super::GrayImage;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PgmError {
    #[error("not a PGM file: expected magic P2 or P5")]
    BadMagic,
    #[error("malformed PGM header: {field} is missing or not a number")]
    BadHeader { field: &'static str },
    #[error("unsupported maxval {0}, only 255 is accepted")]
    UnsupportedMaxval(u64),
    #[error("image dimensions must be non-zero, got {width}x{height}")]
    ZeroDimension { width: usize, height: usize },
    #[error("truncated pixel data: expected {expected} samples, found {found}")]
    Truncated { expected: usize, found: usize },
    #[error("invalid sample #{index}: {token:?}")]
    BadSample { index: usize, token: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PgmVariant {
    /// Plain text samples (`P2`).
    Ascii,
    /// One byte per sample (`P5`).
    #[default]
    Binary,
}

struct Tokens<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Tokens<'a> {
    fn skip_separators(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b.is_ascii_whitespace() {
                self.pos += 1;
            } else if b == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    fn next_token(&mut self) -> Option<&'a [u8]> {
        self.skip_separators();
        let start = self.pos;
        while let Some(&b) = self.bytes.get(self.pos) {
            if b.is_ascii_whitespace() || b == b'#' {
                break;
            }
            self.pos += 1;
        }
        (self.pos > start).then(|| &self.bytes[start..self.pos])
    }

    fn next_number(&mut self, field: &'static str) -> Result<u64, PgmError> {
        self.next_token()
            .and_then(parse_decimal)
            .ok_or(PgmError::BadHeader { field })
    }
}

fn parse_decimal(token: &[u8]) -> Option<u64> {
    std::str::from_utf8(token).ok()?.parse().ok()
}

pub fn load_pgm(bytes: &[u8]) -> Result<GrayImage, PgmError> {
    let variant = match bytes.get(..2) {
        Some(b"P2") => PgmVariant::Ascii,
        Some(b"P5") => PgmVariant::Binary,
        _ => return Err(PgmError::BadMagic),
    };
    // The magic must be followed by a separator, otherwise "P55" would pass.
    match bytes.get(2) {
        Some(b) if b.is_ascii_whitespace() || *b == b'#' => {}
        _ => return Err(PgmError::BadMagic),
    }

    let mut tokens = Tokens { bytes, pos: 2 };
    let width = tokens.next_number("width")?;
    let height = tokens.next_number("height")?;
    let maxval = tokens.next_number("maxval")?;
    if maxval != 255 {
        return Err(PgmError::UnsupportedMaxval(maxval));
    }
    let (width, height) = match (usize::try_from(width), usize::try_from(height)) {
        (Ok(w), Ok(h)) => (w, h),
        _ => return Err(PgmError::BadHeader { field: "width" }),
    };
    if width == 0 || height == 0 {
        return Err(PgmError::ZeroDimension { width, height });
    }
    let expected = width
        .checked_mul(height)
        .ok_or(PgmError::BadHeader { field: "width" })?;

    let pixels = match variant {
        PgmVariant::Binary => {
            // Exactly one whitespace byte separates maxval from the raster.
            match bytes.get(tokens.pos) {
                Some(b) if b.is_ascii_whitespace() => {}
                _ => return Err(PgmError::Truncated { expected, found: 0 }),
            }
            let data = &bytes[tokens.pos + 1..];
            if data.len() < expected {
                return Err(PgmError::Truncated { expected, found: data.len() });
            }
            data[..expected].to_vec()
        }
        PgmVariant::Ascii => {
            let mut pixels = Vec::with_capacity(expected.min(1 << 24));
            for index in 0..expected {
                let token = tokens
                    .next_token()
                    .ok_or(PgmError::Truncated { expected, found: index })?;
                let value = parse_decimal(token)
                    .filter(|v| *v <= 255)
                    .ok_or_else(|| PgmError::BadSample {
                        index,
                        token: String::from_utf8_lossy(token).into_owned(),
                    })?;
                pixels.push(value as u8);
            }
            pixels
        }
    };

    Ok(GrayImage::new(width, height, pixels).expect("dimensions checked above"))
}

pub fn save_pgm(img: &GrayImage, variant: PgmVariant) -> Vec<u8> {
    match variant {
        PgmVariant::Binary => {
            let mut out = format!("P5\n{} {}\n255\n", img.width(), img.height()).into_bytes();
            out.extend_from_slice(img.pixels());
            out
        }
        PgmVariant::Ascii => {
            let mut out = format!("P2\n{} {}\n255\n", img.width(), img.height());
            for row in img.pixels().chunks(img.width()) {
                let mut first = true;
                for px in row {
                    if !first {
                        out.push(' ');
                    }
                    first = false;
                    write!(out, "{px}").unwrap();
                }
                out.push('\n');
            }
            out.into_bytes()
        }
    }
}
