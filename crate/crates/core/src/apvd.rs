//! Adaptive PVD: pixel-value differencing whose stego pixels never leave
//! `[0, 255]`.
//!
//! Every block first tries the plain PVD adjustment. If a pixel would leave
//! the gray range:
//!
//! 1. a chunk whose most significant bit is 1 is embedded without that bit
//!    (the block's *flag* records the drop), and
//! 2. if the pair still overflows, the pixel that crossed the boundary keeps
//!    its cover value and the other pixel absorbs the whole change.
//!
//! The flag is then stored as the parity of the block's first pixel by one of
//! the small adjustments in [`mark_flag`]. Each adjustment shifts both pixels
//! so that the extractor, after undoing the parity step with
//! [`read_flag_and_adjust`], sees the same difference the embedder realized.
//!
//! One block configuration loses information: flag 0 on the exact pair
//! `(0, 255)` has no admissible marking, so it is left as is and decodes with
//! a difference of 254. Such blocks are counted in
//! [`ApvdReport::lossy_corner_count`].

use serde::Serialize;

use crate::codec::{self, BitCursor, Chunk, FrameCollector, RangeTable};
use crate::imagery::{BlockIndex, GrayImage};
use crate::metrics::{self, QualityReport};
use crate::pvd::{realize_difference, WidePair};
use crate::StegoError;

/// Which overflow handling a block went through.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// The PVD adjustment stayed in range.
    Plain,
    /// Dropping the chunk's top bit brought the pair back in range.
    DiscardResolved,
    /// Top bit was 0, so only one pixel was moved.
    OneSided,
    /// Top bit dropped and one pixel moved.
    DiscardThenOneSided,
}

impl Branch {
    pub const ALL: [Branch; 4] =
        [Branch::Plain, Branch::DiscardResolved, Branch::OneSided, Branch::DiscardThenOneSided];

    pub fn discards(self) -> bool {
        matches!(self, Branch::DiscardResolved | Branch::DiscardThenOneSided)
    }
}

/// The marking rule applied to a block, named after the flag value and the
/// parities of the pre-mark pixels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MarkCase {
    /// Flag 0, (even, even): second pixel +1.
    ClearEvenEven,
    /// Flag 0, (even, odd), second below 255: second pixel +1.
    ClearEvenOdd,
    /// Flag 0, (even, odd), second at 255 and first above 0: first -2, second -1.
    ClearEvenOddAtCeiling,
    /// Flag 0 on exactly `(0, 255)`: unchanged, and not recoverable.
    ClearCorner,
    /// Flag 0, (odd, even): first pixel -1.
    ClearOddEven,
    /// Flag 0, (odd, odd): first pixel -1.
    ClearOddOdd,
    /// Flag 1, (even, even): first pixel +1.
    SetEvenEven,
    /// Flag 1, (even, odd): first pixel +1.
    SetEvenOdd,
    /// Flag 1, (odd, even), second above 0: second pixel -1.
    SetOddEven,
    /// Flag 1, (odd, even), second at 0 and first below 255: first +2, second +1.
    SetOddEvenAtFloor,
    /// Flag 1, (odd, odd): second pixel -1.
    SetOddOdd,
    /// Flag 1 on exactly `(255, 0)`: no rule applies. A dropped top bit caps
    /// the difference below 255, so the embedder never reaches this.
    SetCorner,
}

impl MarkCase {
    pub const ALL: [MarkCase; 12] = [
        MarkCase::ClearEvenEven,
        MarkCase::ClearEvenOdd,
        MarkCase::ClearEvenOddAtCeiling,
        MarkCase::ClearCorner,
        MarkCase::ClearOddEven,
        MarkCase::ClearOddOdd,
        MarkCase::SetEvenEven,
        MarkCase::SetEvenOdd,
        MarkCase::SetOddEven,
        MarkCase::SetOddEvenAtFloor,
        MarkCase::SetOddOdd,
        MarkCase::SetCorner,
    ];

    /// Whether extraction misreads the block's difference after this rule.
    pub fn is_lossy(self) -> bool {
        matches!(self, MarkCase::ClearCorner | MarkCase::SetCorner)
    }
}

/// Stores `flag` in the parity of the first pixel.
///
/// Rules for flag 0 (first pixel ends even):
///
/// | parities   | condition                   | adjustment       |
/// |------------|-----------------------------|------------------|
/// | even, even |                             | second + 1       |
/// | even, odd  | second < 255                | second + 1       |
/// | even, odd  | first > 0 and second = 255  | first - 2, second - 1 |
/// | even, odd  | first = 0 and second = 255  | none (lossy)     |
/// | odd, even  |                             | first - 1        |
/// | odd, odd   |                             | first - 1        |
///
/// Rules for flag 1 (first pixel ends odd):
///
/// | parities   | condition                   | adjustment       |
/// |------------|-----------------------------|------------------|
/// | even, even |                             | first + 1        |
/// | even, odd  |                             | first + 1        |
/// | odd, even  | second > 0                  | second - 1       |
/// | odd, even  | first < 255 and second = 0  | first + 2, second + 1 |
/// | odd, odd   |                             | second - 1       |
pub fn mark_flag((x, y): (u8, u8), flag: bool) -> ((u8, u8), MarkCase) {
    use MarkCase::*;
    match (flag, x & 1 == 1, y & 1 == 1) {
        (false, false, false) => ((x, y + 1), ClearEvenEven),
        (false, false, true) if y < 255 => ((x, y + 1), ClearEvenOdd),
        (false, false, true) if x > 0 => ((x - 2, y - 1), ClearEvenOddAtCeiling),
        (false, false, true) => ((x, y), ClearCorner),
        (false, true, false) => ((x - 1, y), ClearOddEven),
        (false, true, true) => ((x - 1, y), ClearOddOdd),
        (true, false, false) => ((x + 1, y), SetEvenEven),
        (true, false, true) => ((x + 1, y), SetEvenOdd),
        (true, true, false) if y > 0 => ((x, y - 1), SetOddEven),
        (true, true, false) if x < 255 => ((x + 2, y + 1), SetOddEvenAtFloor),
        (true, true, false) => ((x, y), SetCorner),
        (true, true, true) => ((x, y - 1), SetOddOdd),
    }
}

/// Reads the flag from the first pixel's parity and undoes the marking step:
/// an even first pixel is raised by one, an odd one lowered by one.
pub fn read_flag_and_adjust((x, _): (u8, u8)) -> (bool, u8) {
    if x & 1 == 1 {
        (true, x - 1)
    } else {
        (false, x + 1)
    }
}

/// Full trace of one block's embedding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockOutcome {
    pub cover: (u8, u8),
    pub chunk: Chunk,
    /// First PVD attempt with the full chunk; may be out of range.
    pub trial: WidePair,
    /// Difference realized by `adjusted`.
    pub realized: u8,
    /// Pixels after overflow handling, before marking.
    pub adjusted: (u8, u8),
    /// Whether the chunk's top bit was dropped.
    pub flag: bool,
    pub branch: Branch,
    pub mark_case: MarkCase,
    /// Final stego pixels.
    pub stego: (u8, u8),
}

impl BlockOutcome {
    /// Absolute change of each pixel after overflow handling, before marking.
    pub fn distortion(&self) -> (u8, u8) {
        (self.adjusted.0.abs_diff(self.cover.0), self.adjusted.1.abs_diff(self.cover.1))
    }
}

/// Keeps the pixel that crossed a boundary at its cover value and moves the
/// other one by the whole change `m`.
fn one_sided(p: i32, q: i32, attempt: WidePair, m: i32) -> WidePair {
    if attempt.1 > 255 {
        WidePair(p - m, q)
    } else if attempt.0 > 255 {
        WidePair(p, q - m)
    } else if attempt.0 < 0 {
        WidePair(p, q + m)
    } else {
        debug_assert!(attempt.1 < 0);
        WidePair(p + m, q)
    }
}

/// Overflow handling produced a pixel outside `[0, 255]`. Only reachable
/// through a defect; [`embed_chunk`] treats it as a bug.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OutOfRange(pub WidePair);

/// Embeds a chunk of exactly the block's width and marks the block.
///
/// Panics if overflow handling leaves the gray range, which the exhaustive
/// sweep in [`crate::selftest`] rules out for every valid range table.
pub fn embed_chunk(p: u8, q: u8, value: u32, table: &RangeTable) -> BlockOutcome {
    try_embed_chunk(p, q, value, table).expect("overflow handling keeps pixels in [0, 255]")
}

/// [`embed_chunk`] that reports an out-of-range result instead of panicking.
pub fn try_embed_chunk(p: u8, q: u8, value: u32, table: &RangeTable) -> Result<BlockOutcome, OutOfRange> {
    let d = i32::from(p.abs_diff(q));
    let range = table.locate(p.abs_diff(q));
    let chunk = Chunk::new(value, range.bits());
    let lower = i32::from(range.lower());
    let (pi, qi) = (i32::from(p), i32::from(q));

    let mut target = lower + value as i32;
    let trial = realize_difference(pi, qi, target);
    let (flag, branch, adjusted) = if trial.in_gray_range() {
        (false, Branch::Plain, trial)
    } else {
        let flag = chunk.msb();
        let attempt = if flag {
            target -= 1 << (chunk.bits - 1);
            realize_difference(pi, qi, target)
        } else {
            trial
        };
        if attempt.in_gray_range() {
            (flag, Branch::DiscardResolved, attempt)
        } else {
            let moved = one_sided(pi, qi, attempt, (target - d).abs());
            let branch = if flag { Branch::DiscardThenOneSided } else { Branch::OneSided };
            (flag, branch, moved)
        }
    };

    let (Ok(x), Ok(y)) = (u8::try_from(adjusted.0), u8::try_from(adjusted.1)) else {
        return Err(OutOfRange(adjusted));
    };
    let (stego, mark_case) = mark_flag((x, y), flag);
    Ok(BlockOutcome {
        cover: (p, q),
        chunk,
        trial,
        realized: target as u8,
        adjusted: (x, y),
        flag,
        branch,
        mark_case,
        stego,
    })
}

/// Reads the block's chunk from `cursor` and embeds it. `None` once the
/// cursor is exhausted. The full chunk is always consumed, even when its top
/// bit ends up carried by the flag.
pub fn embed_block(p: u8, q: u8, cursor: &mut BitCursor<'_>, table: &RangeTable) -> Option<BlockOutcome> {
    let t = table.locate(p.abs_diff(q)).bits();
    let value = cursor.read_chunk(t)?;
    Some(embed_chunk(p, q, value, table))
}

/// Recovers the chunk hidden in a marked stego block.
pub fn extract_block(pair: (u8, u8), table: &RangeTable) -> Chunk {
    let (flag, first) = read_flag_and_adjust(pair);
    let d = first.abs_diff(pair.1);
    let range = table.locate(d);
    let mut value = u32::from(d - range.lower());
    if flag {
        value |= 1 << (range.bits() - 1);
    }
    Chunk::new(value, range.bits())
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct BranchCounts {
    pub plain: usize,
    pub discard_resolved: usize,
    pub one_sided: usize,
    pub discard_then_one_sided: usize,
}

impl BranchCounts {
    pub fn record(&mut self, branch: Branch) {
        *self.get_mut(branch) += 1;
    }

    pub fn get(&self, branch: Branch) -> usize {
        match branch {
            Branch::Plain => self.plain,
            Branch::DiscardResolved => self.discard_resolved,
            Branch::OneSided => self.one_sided,
            Branch::DiscardThenOneSided => self.discard_then_one_sided,
        }
    }

    fn get_mut(&mut self, branch: Branch) -> &mut usize {
        match branch {
            Branch::Plain => &mut self.plain,
            Branch::DiscardResolved => &mut self.discard_resolved,
            Branch::OneSided => &mut self.one_sided,
            Branch::DiscardThenOneSided => &mut self.discard_then_one_sided,
        }
    }

    pub fn total(&self) -> usize {
        Branch::ALL.iter().map(|&b| self.get(b)).sum()
    }

    pub fn merge(&mut self, other: &BranchCounts) {
        for b in Branch::ALL {
            *self.get_mut(b) += other.get(b);
        }
    }
}

#[derive(Debug, Clone)]
pub struct ApvdReport {
    pub stego: GrayImage,
    /// Stream bits consumed, not counting tail padding.
    pub bits_embedded: usize,
    pub blocks_used: usize,
    pub branch_counts: BranchCounts,
    pub lossy_corner_count: usize,
    /// Blocks whose marking cannot be decoded exactly.
    pub lossy_blocks: Vec<BlockIndex>,
    pub quality: QualityReport,
}

/// Embeds the raw bit-stream behind `cursor` until it runs out or the cover
/// has no blocks left.
pub fn embed_stream(cover: &GrayImage, cursor: &mut BitCursor<'_>, table: &RangeTable) -> ApvdReport {
    let mut stego = cover.clone();
    let start = cursor.position();
    let mut blocks_used = 0;
    let mut branch_counts = BranchCounts::default();
    let mut lossy_blocks = Vec::new();
    for (idx, (p, q)) in cover.blocks() {
        let Some(outcome) = embed_block(p, q, cursor, table) else { break };
        stego.set_block(idx, outcome.stego);
        branch_counts.record(outcome.branch);
        if outcome.mark_case.is_lossy() {
            lossy_blocks.push(idx);
        }
        blocks_used += 1;
    }
    let quality = metrics::psnr(cover, &stego).expect("stego has the cover's shape");
    ApvdReport {
        stego,
        bits_embedded: cursor.position() - start,
        blocks_used,
        branch_counts,
        lossy_corner_count: lossy_blocks.len(),
        lossy_blocks,
        quality,
    }
}

/// Frames `message` and embeds it into `cover`.
pub fn embed_image(cover: &GrayImage, message: &[u8], table: &RangeTable) -> Result<ApvdReport, StegoError> {
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
pub fn extract_stream(stego: &GrayImage, table: &RangeTable, bit_budget: usize) -> Vec<bool> {
    let mut bits = Vec::new();
    for (_, pair) in stego.blocks() {
        if bits.len() >= bit_budget {
            break;
        }
        let chunk = extract_block(pair, table);
        codec::push_bits(&mut bits, chunk.value, chunk.bits);
    }
    bits
}

/// Reads the framed message back out of an APVD stego image.
pub fn extract_image(stego: &GrayImage, table: &RangeTable) -> Result<Vec<u8>, StegoError> {
    let max_bits = stego.block_count() * table.max_bits() as usize;
    let mut collector = FrameCollector::new(max_bits);
    for (_, pair) in stego.blocks() {
        let chunk = extract_block(pair, table);
        if collector.push(chunk.value, chunk.bits)? {
            break;
        }
    }
    Ok(collector.finish()?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> RangeTable {
        RangeTable::default()
    }

    #[test]
    fn near_white_block_is_adjusted_and_marked() {
        let out = embed_chunk(254, 255, 0b111, &table());
        assert_eq!(out.trial, WidePair(251, 258));
        assert_eq!(out.adjusted, (252, 255));
        assert_eq!(out.distortion(), (2, 0));
        assert!(out.flag);
        assert_eq!(out.branch, Branch::DiscardThenOneSided);
        assert_eq!(out.mark_case, MarkCase::SetEvenOdd);
        assert_eq!(out.stego, (253, 255));
        assert_eq!(extract_block(out.stego, &table()).to_string(), "111");
    }

    #[test]
    fn flat_zero_chunk() {
        let out = embed_chunk(100, 100, 0, &table());
        assert_eq!(out.adjusted, (100, 100));
        assert!(!out.flag);
        assert_eq!(out.branch, Branch::Plain);
        assert_eq!(out.stego, (100, 101));
        assert_eq!(extract_block(out.stego, &table()).to_string(), "000");
    }

    #[test]
    fn underflow_resolved_by_discard() {
        let out = embed_chunk(10, 250, 0b111_1111, &table());
        assert_eq!(out.trial, WidePair(3, 258));
        assert_eq!(out.adjusted, (34, 225));
        assert_eq!(out.realized, 191);
        assert!(out.flag);
        assert_eq!(out.branch, Branch::DiscardResolved);
        assert_eq!(extract_block(out.stego, &table()).value, 0b111_1111);
    }

    #[test]
    fn one_sided_without_discard() {
        // d = 0 at the ceiling, chunk 011: target 3 pushes the first pixel to 257.
        let out = embed_chunk(255, 255, 0b011, &table());
        assert_eq!(out.trial, WidePair(257, 254));
        assert!(!out.flag);
        assert_eq!(out.branch, Branch::OneSided);
        assert_eq!(out.adjusted, (255, 252));
        assert_eq!(extract_block(out.stego, &table()).value, 0b011);
    }

    #[test]
    fn one_sided_at_the_floor() {
        // (0, 0) with chunk 010: second pixel would drop to -1.
        let out = embed_chunk(0, 0, 0b010, &table());
        assert_eq!(out.trial, WidePair(1, -1));
        assert_eq!(out.adjusted, (2, 0));
        // (1, 0) with 110 would reach (4, -2); without the top bit it fits.
        let out = embed_chunk(1, 0, 0b110, &table());
        assert_eq!(out.branch, Branch::DiscardResolved);
        assert_eq!(out.adjusted, (2, 0));
    }

    #[test]
    fn marking_examples() {
        assert_eq!(mark_flag((252, 255), true), ((253, 255), MarkCase::SetEvenOdd));
        assert_eq!(mark_flag((100, 100), false), ((100, 101), MarkCase::ClearEvenEven));
        assert_eq!(mark_flag((1, 1), false), ((0, 1), MarkCase::ClearOddOdd));
        assert_eq!(mark_flag((0, 255), false), ((0, 255), MarkCase::ClearCorner));
        assert_eq!(mark_flag((4, 255), false), ((2, 254), MarkCase::ClearEvenOddAtCeiling));
        assert_eq!(mark_flag((7, 0), true), ((9, 1), MarkCase::SetOddEvenAtFloor));
        assert_eq!(mark_flag((255, 0), true), ((255, 0), MarkCase::SetCorner));
    }

    #[test]
    fn flag_reading_examples() {
        assert_eq!(read_flag_and_adjust((253, 255)), (true, 252));
        assert_eq!(read_flag_and_adjust((100, 101)), (false, 101));
        assert_eq!(read_flag_and_adjust((0, 1)), (false, 1));
    }

    #[test]
    fn extraction_examples() {
        assert_eq!(extract_block((253, 255), &table()).to_string(), "111");
        assert_eq!(extract_block((100, 101), &table()).to_string(), "000");
        assert_eq!(extract_block((0, 1), &table()).to_string(), "000");
    }

    #[test]
    fn lossy_corner_is_reachable() {
        let out = embed_chunk(63, 191, 0b111_1111, &table());
        assert_eq!(out.branch, Branch::Plain);
        assert_eq!(out.stego, (0, 255));
        assert_eq!(out.mark_case, MarkCase::ClearCorner);
        assert_eq!(extract_block(out.stego, &table()).value, 0b111_1110);
    }

    #[test]
    fn first_block_of_an_image() {
        let mut pixels = vec![254, 255];
        pixels.extend(std::iter::repeat_n(90, 30));
        let cover = GrayImage::new(8, 4, pixels).unwrap();
        let stream = [true; 3];
        let report = embed_stream(&cover, &mut BitCursor::new(&stream), &table());
        assert_eq!(&report.stego.pixels()[..2], &[253, 255]);
        assert_eq!(&report.stego.pixels()[2..], &cover.pixels()[2..]);
        assert_eq!(report.branch_counts.discard_then_one_sided, 1);
        assert_eq!(report.bits_embedded, 3);
    }

    #[test]
    fn empty_message_round_trip() {
        let cover = GrayImage::filled(16, 4, 200);
        let report = embed_image(&cover, &[], &table()).unwrap();
        assert_eq!(report.blocks_used, 11);
        assert_eq!(&report.stego.pixels()[22..], &cover.pixels()[22..]);
        assert_eq!(extract_image(&report.stego, &table()).unwrap(), Vec::<u8>::new());
    }

    #[test]
    fn capacity_refusal_reports_both_counts() {
        let cover = GrayImage::filled(4, 4, 0);
        assert_eq!(
            embed_image(&cover, &[0; 4], &table()).unwrap_err(),
            StegoError::CapacityExceeded { required: 64, available: 24 }
        );
    }

    #[test]
    fn extracting_unmarked_zero_image_does_not_panic() {
        let blank = GrayImage::filled(64, 64, 0);
        // Every block reads flag 0 and difference 1: chunk 001, a huge header.
        assert!(extract_image(&blank, &table()).is_err());
    }
}
