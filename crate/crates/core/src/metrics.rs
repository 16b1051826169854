//! Image-quality and payload metrics, and the side-by-side method comparison.

use std::fmt;
use std::io;

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::codec::{unpack_bits, BitCursor, RangeTable, HEADER_BITS};
use crate::imagery::{synthetic, GrayImage};
use crate::pvd::WideImage;
use crate::{apvd, pvd, Method, StegoError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MetricsError {
    #[error("images differ in size: {0:?} vs {1:?}")]
    DimensionMismatch((usize, usize), (usize, usize)),
}

/// Peak signal-to-noise ratio in dB, with identical images marked as infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Psnr {
    Finite(f64),
    Infinite,
}

impl Psnr {
    pub fn finite(self) -> Option<f64> {
        match self {
            Psnr::Finite(db) => Some(db),
            Psnr::Infinite => None,
        }
    }
}

impl fmt::Display for Psnr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Psnr::Finite(db) => write!(f, "{db:.2}"),
            Psnr::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for Psnr {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Psnr::Finite(db) => serializer.serialize_f64(*db),
            Psnr::Infinite => serializer.serialize_str("inf"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QualityReport {
    pub mse: f64,
    pub psnr_db: Psnr,
    pub max_abs_diff: u32,
    pub changed_pixel_count: usize,
}

fn quality(diffs: impl Iterator<Item = i32>, count: usize) -> QualityReport {
    let mut squared: u64 = 0;
    let mut max_abs_diff = 0;
    let mut changed_pixel_count = 0;
    for diff in diffs {
        let abs = diff.unsigned_abs();
        squared += u64::from(abs * abs);
        max_abs_diff = max_abs_diff.max(abs);
        changed_pixel_count += usize::from(abs != 0);
    }
    let mse = squared as f64 / count as f64;
    let psnr_db = if squared == 0 {
        Psnr::Infinite
    } else {
        Psnr::Finite(10.0 * (255.0f64 * 255.0 / mse).log10())
    };
    QualityReport { mse, psnr_db, max_abs_diff, changed_pixel_count }
}

/// MSE and PSNR with a peak of 255.
pub fn psnr(a: &GrayImage, b: &GrayImage) -> Result<QualityReport, MetricsError> {
    check_dims((a.width(), a.height()), (b.width(), b.height()))?;
    let diffs = a.pixels().iter().zip(b.pixels()).map(|(&x, &y)| i32::from(x) - i32::from(y));
    Ok(quality(diffs, a.len()))
}

/// Like [`psnr`], against an unclamped PVD raster.
pub fn psnr_wide(cover: &GrayImage, stego: &WideImage) -> Result<QualityReport, MetricsError> {
    check_dims((cover.width(), cover.height()), (stego.width(), stego.height()))?;
    let diffs = cover
        .pixels()
        .iter()
        .zip(stego.pixels())
        .map(|(&x, &y)| i32::from(x) - i32::from(y));
    Ok(quality(diffs, cover.len()))
}

fn check_dims(a: (usize, usize), b: (usize, usize)) -> Result<(), MetricsError> {
    if a == b {
        Ok(())
    } else {
        Err(MetricsError::DimensionMismatch(a, b))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Capacity {
    /// Sum of the per-block chunk widths.
    pub raw_bits: usize,
    /// Whole message bytes that fit after the length header.
    pub net_bytes: usize,
}

impl Capacity {
    fn from_raw(raw_bits: usize) -> Self {
        Self { raw_bits, net_bytes: raw_bits.saturating_sub(HEADER_BITS) / 8 }
    }
}

/// Hiding capacity of `cover`; depends only on its block differences.
pub fn capacity(cover: &GrayImage, table: &RangeTable) -> Capacity {
    let raw_bits = cover
        .blocks()
        .map(|(_, (p, q))| table.locate(p.abs_diff(q)).bits() as usize)
        .sum();
    Capacity::from_raw(raw_bits)
}

/// Capacity measured by letting `method` embed an endless stream and
/// counting the bits it consumed.
pub fn measured_capacity(method: Method, cover: &GrayImage, table: &RangeTable, seed: u64) -> Capacity {
    let budget = cover.block_count() * table.max_bits() as usize;
    let stream = unpack_bits(&synthetic::random_message(budget.div_ceil(8) + 1, seed));
    let mut cursor = BitCursor::new(&stream);
    let consumed = match method {
        Method::Pvd => pvd::embed_stream(cover, &mut cursor, table).bits_embedded,
        Method::Apvd => apvd::embed_stream(cover, &mut cursor, table).bits_embedded,
    };
    Capacity::from_raw(consumed)
}

/// One method's line in a comparison table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub cover: String,
    pub method: Method,
    pub capacity_bytes: usize,
    pub psnr_db: Psnr,
    /// Stego samples outside `[0, 255]`; always 0 for APVD.
    pub violations: usize,
}

/// Embeds the same message with both methods and reports one row each.
///
/// Panics if the two methods disagree on capacity.
pub fn compare(
    name: &str,
    cover: &GrayImage,
    message: &[u8],
    table: &RangeTable,
) -> Result<[ComparisonRow; 2], StegoError> {
    let pvd_capacity = measured_capacity(Method::Pvd, cover, table, 0);
    let apvd_capacity = measured_capacity(Method::Apvd, cover, table, 0);
    assert_eq!(pvd_capacity, apvd_capacity, "PVD and APVD capacities must agree");

    let baseline = pvd::embed_image(cover, message, table)?;
    let adaptive = apvd::embed_image(cover, message, table)?;
    let pvd_quality = psnr_wide(cover, &baseline.stego).expect("same shape");

    Ok([
        ComparisonRow {
            cover: name.to_owned(),
            method: Method::Pvd,
            capacity_bytes: pvd_capacity.net_bytes,
            psnr_db: pvd_quality.psnr_db,
            violations: baseline.violations,
        },
        ComparisonRow {
            cover: name.to_owned(),
            method: Method::Apvd,
            capacity_bytes: apvd_capacity.net_bytes,
            psnr_db: adaptive.quality.psnr_db,
            violations: 0,
        },
    ])
}

/// Runs [`compare`] once per seed with a random message filling `fill` of
/// the net capacity. PSNR is averaged over finite rounds; violations report
/// the worst round.
pub fn compare_rounds(
    name: &str,
    cover: &GrayImage,
    table: &RangeTable,
    seeds: &[u64],
    fill: f64,
) -> Result<[ComparisonRow; 2], StegoError> {
    assert!(!seeds.is_empty(), "at least one round");
    let net = capacity(cover, table).net_bytes;
    let len = ((net as f64) * fill.clamp(0.0, 1.0)).floor() as usize;
    let rounds = seeds
        .iter()
        .map(|&seed| compare(name, cover, &synthetic::random_message(len, seed), table))
        .collect::<Result<Vec<_>, _>>()?;

    let mut merged = rounds[0].clone();
    for (i, row) in merged.iter_mut().enumerate() {
        let finite: Vec<f64> = rounds.iter().filter_map(|r| r[i].psnr_db.finite()).collect();
        row.psnr_db = if finite.is_empty() {
            Psnr::Infinite
        } else {
            Psnr::Finite(finite.iter().sum::<f64>() / finite.len() as f64)
        };
        row.violations = rounds.iter().map(|r| r[i].violations).max().unwrap_or(0);
    }
    Ok(merged)
}

/// Writes rows as CSV with header `cover,method,capacity_bytes,psnr_db,violations`.
pub fn write_csv<W: io::Write>(rows: &[ComparisonRow], out: W) -> csv::Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(["cover", "method", "capacity_bytes", "psnr_db", "violations"])?;
    for row in rows {
        writer.write_record([
            row.cover.clone(),
            row.method.to_string(),
            row.capacity_bytes.to_string(),
            row.psnr_db.to_string(),
            row.violations.to_string(),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

/// Aligned plain-text rendering of comparison rows.
pub fn format_table(rows: &[ComparisonRow]) -> String {
    let name_width = rows.iter().map(|r| r.cover.len()).max().unwrap_or(0).max(5);
    let mut out = format!(
        "{:<name_width$}  {:<6}  {:>14}  {:>8}  {:>10}\n",
        "cover", "method", "capacity_bytes", "psnr_db", "violations"
    );
    for row in rows {
        out.push_str(&format!(
            "{:<name_width$}  {:<6}  {:>14}  {:>8}  {:>10}\n",
            row.cover,
            row.method.to_string(),
            row.capacity_bytes,
            row.psnr_db.to_string(),
            row.violations
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imagery::synthetic::Pattern;

    #[test]
    fn identical_images_are_infinite() {
        let img = Pattern::Noise.render(8, 8, 1);
        let report = psnr(&img, &img).unwrap();
        assert_eq!(report.mse, 0.0);
        assert_eq!(report.psnr_db, Psnr::Infinite);
        assert_eq!((report.max_abs_diff, report.changed_pixel_count), (0, 0));
    }

    #[test]
    fn full_swing_single_pixel_is_zero_db() {
        let a = GrayImage::filled(1, 1, 0);
        let b = GrayImage::filled(1, 1, 255);
        let report = psnr(&a, &b).unwrap();
        assert_eq!(report.mse, 65025.0);
        assert_eq!(report.psnr_db, Psnr::Finite(0.0));
    }

    #[test]
    fn small_change() {
        let a = GrayImage::new(2, 1, vec![100, 100]).unwrap();
        let b = GrayImage::new(2, 1, vec![100, 105]).unwrap();
        let report = psnr(&a, &b).unwrap();
        assert_eq!(report.mse, 12.5);
        // 10 * log10(65025 / 12.5) = 37.1616...
        assert!((report.psnr_db.finite().unwrap() - 37.1616).abs() < 1e-3);
        assert_eq!((report.max_abs_diff, report.changed_pixel_count), (5, 1));
    }

    #[test]
    fn symmetric_and_dimension_checked() {
        let a = Pattern::Noise.render(9, 7, 1);
        let b = Pattern::Noise.render(9, 7, 2);
        assert_eq!(psnr(&a, &b).unwrap(), psnr(&b, &a).unwrap());
        let c = Pattern::Noise.render(7, 9, 1);
        assert_eq!(
            psnr(&a, &c),
            Err(MetricsError::DimensionMismatch((9, 7), (7, 9)))
        );
    }

    #[test]
    fn infinity_serializes_as_string() {
        assert_eq!(serde_json::to_string(&Psnr::Infinite).unwrap(), "\"inf\"");
        assert_eq!(serde_json::to_string(&Psnr::Finite(1.5)).unwrap(), "1.5");
    }

    #[test]
    fn capacity_examples() {
        let table = RangeTable::default();
        let flat = GrayImage::filled(512, 512, 77);
        assert_eq!(capacity(&flat, &table).raw_bits, 393_216);
        assert_eq!(capacity(&flat, &table).net_bytes, (393_216 - 32) / 8);
        let edges = GrayImage::new(2, 2, vec![0, 255, 0, 255]).unwrap();
        assert_eq!(capacity(&edges, &table).raw_bits, 14);
        assert_eq!(capacity(&GrayImage::filled(1, 1, 0), &table).net_bytes, 0);
    }

    #[test]
    fn measured_capacity_matches_formula() {
        let table = RangeTable::default();
        for p in Pattern::ALL {
            let cover = p.render(40, 30, 9);
            let expected = capacity(&cover, &table);
            assert_eq!(measured_capacity(Method::Pvd, &cover, &table, 1), expected);
            assert_eq!(measured_capacity(Method::Apvd, &cover, &table, 2), expected);
        }
    }

    #[test]
    fn comparison_rows_share_capacity() {
        let table = RangeTable::default();
        let cover = Pattern::Texture.render(64, 64, 4);
        let rows = compare_rounds("texture", &cover, &table, &[1, 2], 1.0).unwrap();
        assert_eq!(rows[0].capacity_bytes, rows[1].capacity_bytes);
        assert_eq!(rows[1].violations, 0);
        let mut csv_out = Vec::new();
        write_csv(&rows, &mut csv_out).unwrap();
        let text = String::from_utf8(csv_out).unwrap();
        assert!(text.starts_with("cover,method,capacity_bytes,psnr_db,violations\n"));
        assert_eq!(text.lines().count(), 3);
        assert!(format_table(&rows).contains("apvd"));
    }
}
