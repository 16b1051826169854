//! Baseline Wu-Tsai pixel-value differencing.
//!
//! Each block's difference selects a range `[l, u]` hiding `t` bits; the
//! chunk value `b` sets the new difference `l + b`, and the change is split
//! across both pixels. Nothing stops a pixel from leaving `[0, 255]`: the
//! stego raster is kept wide and out-of-range samples are counted as
//! violations.

use crate::codec::{self, BitCursor, Chunk, FrameCollector, RangeTable};
use crate::imagery::{block_sequence, GrayImage};
use crate::metrics;
use crate::StegoError;

/// A pixel pair that may hold values outside `[0, 255]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct WidePair(pub i32, pub i32);

impl WidePair {
    pub fn in_gray_range(self) -> bool {
        (0..=255).contains(&self.0) && (0..=255).contains(&self.1)
    }

    pub fn difference(self) -> i32 {
        (self.1 - self.0).abs()
    }
}

impl From<(u8, u8)> for WidePair {
    fn from((p, q): (u8, u8)) -> Self {
        WidePair(i32::from(p), i32::from(q))
    }
}

/// Moves `(p, q)` so that `|q' - p'| = target`, keeping their order.
///
/// The change `m = |target - d|` is split in halves. The first pixel takes
/// the rounded-up half when `p >= q`, the second pixel otherwise.
pub fn realize_difference(p: i32, q: i32, target: i32) -> WidePair {
    let d = (q - p).abs();
    let m = (target - d).abs();
    let (lo, hi) = (m / 2, m - m / 2);
    match (p >= q, target > d) {
        (true, true) => WidePair(p + hi, q - lo),
        (false, true) => WidePair(p - lo, q + hi),
        (true, false) => WidePair(p - hi, q + lo),
        (false, false) => WidePair(p + lo, q - hi),
    }
}

/// Embeds one chunk into a cover block. The chunk must be exactly as wide as
/// the block's range allows.
pub fn embed_chunk(p: u8, q: u8, chunk: u32, table: &RangeTable) -> WidePair {
    let d = p.abs_diff(q);
    let range = table.locate(d);
    debug_assert!(chunk >> range.bits() == 0);
    let target = i32::from(range.lower()) + chunk as i32;
    realize_difference(i32::from(p), i32::from(q), target)
}

/// Reads the block's chunk from `cursor` and embeds it. `None` once the
/// cursor is exhausted; the block is then left as it was.
pub fn embed_block(p: u8, q: u8, cursor: &mut BitCursor<'_>, table: &RangeTable) -> Option<WidePair> {
    let t = table.locate(p.abs_diff(q)).bits();
    let chunk = cursor.read_chunk(t)?;
    Some(embed_chunk(p, q, chunk, table))
}

/// Recovers the chunk hidden in a stego block.
///
/// Panics if the pair's difference exceeds 255, which no embedding produces.
pub fn extract_block(pair: WidePair, table: &RangeTable) -> Chunk {
    let d = u8::try_from(pair.difference()).expect("block difference above 255");
    let range = table.locate(d);
    Chunk::new(u32::from(d - range.lower()), range.bits())
}

/// Raster of possibly out-of-range samples.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WideImage {
    width: usize,
    height: usize,
    pixels: Vec<i16>,
}

impl WideImage {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[i16] {
        &self.pixels
    }

    /// Number of samples outside `[0, 255]`.
    pub fn violations(&self) -> usize {
        self.pixels.iter().filter(|&&v| !(0..=255).contains(&v)).count()
    }

    /// Saturates every sample into `[0, 255]`. Extraction from a clamped
    /// raster is unreliable wherever a violation was clamped.
    pub fn clamp_to_gray(&self) -> GrayImage {
        let pixels = self.pixels.iter().map(|&v| v.clamp(0, 255) as u8).collect();
        GrayImage::new(self.width, self.height, pixels).expect("same shape as a valid image")
    }
}

impl From<&GrayImage> for WideImage {
    fn from(img: &GrayImage) -> Self {
        Self {
            width: img.width(),
            height: img.height(),
            pixels: img.pixels().iter().map(|&v| i16::from(v)).collect(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct PvdResult {
    pub stego: WideImage,
    /// Samples of `stego` outside `[0, 255]`.
    pub violations: usize,
    /// Stream bits consumed, not counting tail padding.
    pub bits_embedded: usize,
    pub blocks_used: usize,
}

/// Embeds the raw bit-stream behind `cursor` until it runs out or the cover
/// has no blocks left.
pub fn embed_stream(cover: &GrayImage, cursor: &mut BitCursor<'_>, table: &RangeTable) -> PvdResult {
    let mut stego = WideImage::from(cover);
    let start = cursor.position();
    let mut blocks_used = 0;
    for (idx, (p, q)) in cover.blocks() {
        let Some(pair) = embed_block(p, q, cursor, table) else { break };
        stego.pixels[idx.first()] = pair.0 as i16;
        stego.pixels[idx.second()] = pair.1 as i16;
        blocks_used += 1;
    }
    let violations = stego.violations();
    PvdResult { stego, violations, bits_embedded: cursor.position() - start, blocks_used }
}

/// Frames `message` and embeds it into `cover`.
pub fn embed_image(cover: &GrayImage, message: &[u8], table: &RangeTable) -> Result<PvdResult, StegoError> {
    let required = codec::framed_len(message.len());
    let available = metrics::capacity(cover, table).raw_bits;
    if required > available {
        return Err(StegoError::CapacityExceeded { required, available });
    }
    let framed = codec::frame_payload(message);
    Ok(embed_stream(cover, &mut BitCursor::new(&framed), table))
}

/// Concatenated chunks of the first blocks, stopping once `bit_budget` bits
/// have been read (the last chunk may overshoot it).
pub fn extract_stream(stego: &WideImage, table: &RangeTable, bit_budget: usize) -> Vec<bool> {
    let mut bits = Vec::new();
    for (_, (p, q)) in block_sequence(&stego.pixels) {
        if bits.len() >= bit_budget {
            break;
        }
        let chunk = extract_block(WidePair(p.into(), q.into()), table);
        codec::push_bits(&mut bits, chunk.value, chunk.bits);
    }
    bits
}

/// Reads the framed message back out of a PVD stego raster.
pub fn extract_image(stego: &WideImage, table: &RangeTable) -> Result<Vec<u8>, StegoError> {
    let max_bits = stego.pixels.len() / 2 * table.max_bits() as usize;
    let mut collector = FrameCollector::new(max_bits);
    for (_, (p, q)) in block_sequence(&stego.pixels) {
        let chunk = extract_block(WidePair(p.into(), q.into()), table);
        if collector.push(chunk.value, chunk.bits)? {
            break;
        }
    }
    Ok(collector.finish()?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::unpack_bits;

    fn bits(s: &str) -> Vec<bool> {
        s.chars().map(|c| c == '1').collect()
    }

    fn embed_str(p: u8, q: u8, chunk: &str) -> WidePair {
        let stream = bits(chunk);
        let mut cursor = BitCursor::new(&stream);
        let out = embed_block(p, q, &mut cursor, &RangeTable::default()).unwrap();
        assert!(cursor.is_exhausted(), "chunk width must match the block");
        out
    }

    #[test]
    fn near_white_block_overflows() {
        assert_eq!(embed_str(254, 255, "111"), WidePair(251, 258));
    }

    #[test]
    fn zero_chunk_on_flat_block_is_identity() {
        assert_eq!(embed_str(100, 100, "000"), WidePair(100, 100));
    }

    #[test]
    fn widening_ascending_block() {
        assert_eq!(embed_str(64, 80, "0110"), WidePair(61, 83));
    }

    #[test]
    fn extraction_examples() {
        let table = RangeTable::default();
        assert_eq!(extract_block(WidePair(251, 258), &table).to_string(), "111");
        assert_eq!(extract_block(WidePair(100, 100), &table).to_string(), "000");
        assert_eq!(extract_block(WidePair(61, 83), &table).to_string(), "0110");
    }

    #[test]
    fn all_four_orientation_cases() {
        // p >= q, widening: first pixel takes the ceiling.
        assert_eq!(realize_difference(10, 10, 5), WidePair(13, 8));
        // p < q, widening: second pixel takes the ceiling.
        assert_eq!(realize_difference(10, 11, 6), WidePair(8, 14));
        // p >= q, narrowing.
        assert_eq!(realize_difference(20, 10, 5), WidePair(17, 12));
        // p < q, narrowing.
        assert_eq!(realize_difference(10, 20, 5), WidePair(12, 17));
    }

    #[test]
    fn empty_stream_leaves_cover_untouched() {
        let cover = GrayImage::new(2, 2, vec![1, 2, 3, 4]).unwrap();
        let out = embed_stream(&cover, &mut BitCursor::new(&[]), &RangeTable::default());
        assert_eq!(out.stego, WideImage::from(&cover));
        assert_eq!((out.blocks_used, out.bits_embedded, out.violations), (0, 0, 0));
    }

    #[test]
    fn empty_message_touches_only_header_blocks() {
        let cover = GrayImage::filled(16, 4, 128);
        let table = RangeTable::default();
        let result = embed_image(&cover, &[], &table).unwrap();
        // 32 header bits over 3-bit blocks.
        assert_eq!(result.blocks_used, 11);
        assert_eq!(&result.stego.pixels()[22..], &WideImage::from(&cover).pixels()[22..]);
        assert_eq!(extract_image(&result.stego, &table).unwrap(), Vec::<u8>::new());
    }

    #[test]
    fn flat_cover_never_violates() {
        use rand::{Rng, SeedableRng};
        let cover = GrayImage::filled(64, 64, 128);
        let table = RangeTable::default();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let capacity = metrics::capacity(&cover, &table).net_bytes;
        let message: Vec<u8> = (0..capacity).map(|_| rng.gen()).collect();
        let result = embed_image(&cover, &message, &table).unwrap();
        assert_eq!(result.violations, 0);
        assert!(result.stego.pixels().iter().all(|v| (121..=135).contains(v)));
        assert_eq!(extract_image(&result.stego, &table).unwrap(), message);
    }

    #[test]
    fn near_white_block_in_an_image_is_a_violation() {
        let mut pixels = vec![254, 255];
        pixels.extend(std::iter::repeat_n(128, 62));
        let cover = GrayImage::new(8, 8, pixels).unwrap();
        let stream = bits("111");
        let result = embed_stream(&cover, &mut BitCursor::new(&stream), &RangeTable::default());
        assert_eq!(result.violations, 1);
        assert_eq!(&result.stego.pixels()[..2], &[251, 258]);
        let clamped = result.stego.clamp_to_gray();
        assert_eq!(&clamped.pixels()[..2], &[251, 255]);
    }

    #[test]
    fn oversized_message_is_refused() {
        let cover = GrayImage::filled(4, 4, 0);
        let err = embed_image(&cover, &[0; 4], &RangeTable::default()).unwrap_err();
        assert_eq!(err, StegoError::CapacityExceeded { required: 64, available: 24 });
    }

    #[test]
    fn stream_extraction_honours_budget() {
        let cover = GrayImage::filled(8, 1, 50);
        let table = RangeTable::default();
        let stream = unpack_bits(&[0b1010_1100, 0b0111_0000]);
        let result = embed_stream(&cover, &mut BitCursor::new(&stream), &table);
        let got = extract_stream(&result.stego, &table, 10);
        assert_eq!(got.len(), 12);
        assert_eq!(&got[..10], &stream[..10]);
    }
}
