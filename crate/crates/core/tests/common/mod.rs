//! Reference routines written independently of the library's code paths.
//! They search for answers instead of evaluating closed-form formulas.
#![allow(dead_code)]

/// Width-list partition, recomputed by linear scan.
pub fn range_of(widths: &[u32], d: i32) -> (i32, i32, u32) {
    let mut lower = 0i32;
    for &w in widths {
        let upper = lower + w as i32 - 1;
        if d <= upper {
            return (lower, upper, w.ilog2());
        }
        lower = upper + 1;
    }
    panic!("difference {d} outside the table");
}

pub const DEFAULT: [u32; 6] = [8, 8, 16, 32, 64, 128];

/// Search key: (largest move, total move, odd split went the wrong way).
type Rank = (i32, i32, bool);

/// Pair realizing `|y - x| = target` that keeps the cover order, moves the
/// pixels as little as possible (smallest largest move, then smallest total),
/// and on an odd split gives the larger move to the larger cover pixel (the
/// first one on ties).
pub fn pvd_by_search(p: i32, q: i32, target: i32) -> (i32, i32) {
    let first_is_larger = p >= q;
    let mut best: Option<(Rank, (i32, i32))> = None;
    for x in -400..=700 {
        for y in [x - target, x + target] {
            if (y - x).abs() != target {
                continue;
            }
            if target > 0 && (x >= y) != first_is_larger {
                continue;
            }
            let (dx, dy) = ((x - p).abs(), (y - q).abs());
            let larger_moves_more = if first_is_larger { dx >= dy } else { dy >= dx };
            let key = (dx.max(dy), dx + dy, !larger_moves_more);
            if best.is_none_or(|(k, _)| key < k) {
                best = Some((key, (x, y)));
            }
        }
    }
    best.unwrap().1
}

fn in_range(v: i32) -> bool {
    (0..=255).contains(&v)
}

/// Overflow-managed embedding as described procedurally: full chunk, then
/// the chunk without its top bit (only when that bit is 1), then keeping the
/// crossing pixel fixed. Returns the pre-mark pair and the flag.
pub fn apvd_by_search(widths: &[u32], p: i32, q: i32, value: u32) -> ((i32, i32), bool) {
    let d = (p - q).abs();
    let (lower, _, t) = range_of(widths, d);
    let first = pvd_by_search(p, q, lower + value as i32);
    if in_range(first.0) && in_range(first.1) {
        return (first, false);
    }
    let top = (value >> (t - 1)) & 1 == 1;
    let target = if top { lower + value as i32 - (1 << (t - 1)) } else { lower + value as i32 };
    let second = pvd_by_search(p, q, target);
    if in_range(second.0) && in_range(second.1) {
        return (second, top);
    }
    // Keep whichever pixel crossed at its cover value; search the other.
    let keep_first = !in_range(second.0);
    for v in 0..=255 {
        let pair = if keep_first { (p, v) } else { (v, q) };
        let order_kept = (pair.0 >= pair.1) == (p >= q) || pair.0 == pair.1;
        if (pair.1 - pair.0).abs() == target && order_kept {
            return (pair, top);
        }
    }
    panic!("no one-sided solution for ({p}, {q}) value {value}");
}

/// One row of a flag-marking table.
struct Row {
    flag: bool,
    lsb: (i32, i32),
    when: fn(i32, i32) -> bool,
    delta: (i32, i32),
}

const ROWS: &[Row] = &[
    Row { flag: false, lsb: (0, 0), when: |_, _| true, delta: (0, 1) },
    Row { flag: false, lsb: (0, 1), when: |x, y| y < 255 && x >= 0, delta: (0, 1) },
    Row { flag: false, lsb: (0, 1), when: |x, y| x > 0 && y == 255, delta: (-2, -1) },
    Row { flag: false, lsb: (0, 1), when: |x, y| x == 0 && y == 255, delta: (0, 0) },
    Row { flag: false, lsb: (1, 0), when: |_, _| true, delta: (-1, 0) },
    Row { flag: false, lsb: (1, 1), when: |_, _| true, delta: (-1, 0) },
    Row { flag: true, lsb: (0, 0), when: |_, _| true, delta: (1, 0) },
    Row { flag: true, lsb: (0, 1), when: |_, _| true, delta: (1, 0) },
    Row { flag: true, lsb: (1, 0), when: |x, y| y > 0 && x <= 255, delta: (0, -1) },
    Row { flag: true, lsb: (1, 0), when: |x, y| x < 255 && y == 0, delta: (2, 1) },
    Row { flag: true, lsb: (1, 1), when: |_, _| true, delta: (0, -1) },
];

/// Applies the first matching marking row; `None` when no row matches.
pub fn mark_by_table(x: i32, y: i32, flag: bool) -> Option<(i32, i32)> {
    ROWS.iter()
        .find(|r| r.flag == flag && r.lsb == (x & 1, y & 1) && (r.when)(x, y))
        .map(|r| (x + r.delta.0, y + r.delta.1))
}

/// Extraction as a sequence of plain steps.
pub fn extract_by_steps(widths: &[u32], x: i32, y: i32) -> u32 {
    let flag = x % 2 == 1;
    let adjusted = if flag { x - 1 } else { x + 1 };
    let d = (adjusted - y).abs();
    let (lower, _, t) = range_of(widths, d);
    let mut value = (d - lower) as u32;
    if flag {
        value |= 1 << (t - 1);
    }
    value
}

pub fn bits(s: &str) -> Vec<bool> {
    s.chars().map(|c| c == '1').collect()
}
