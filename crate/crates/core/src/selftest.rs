//! Exhaustive block sweep: every cover pair `(p, q)` in `[0, 255]^2` with
//! every chunk value its range admits, run through both embedders and both
//! extractors.
//!
//! Checked per case:
//!
//! - PVD realizes the target difference, which stays inside the block's
//!   range; narrowing never leaves `[0, 255]`; at most one pixel leaves it;
//!   in-range outputs extract back to the chunk.
//! - APVD overflow handling stays in range; marking moves pixels by at most
//!   two levels and leaves the flag in the first pixel's parity; the
//!   extractor recovers the realized difference and the chunk, except on
//!   lossy marking corners, which are counted instead.
//! - One-sided adjustment only happens when the difference widens; a set
//!   flag means the chunk's top bit was 1 and was removed from the target.

use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::apvd::{self, Branch, BranchCounts, MarkCase};
use crate::codec::RangeTable;
use crate::pvd::{self, WidePair};

/// First failing case of a sweep.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    pub cover: (u8, u8),
    pub chunk: String,
    pub check: &'static str,
    pub detail: String,
}

impl fmt::Display for Counterexample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "cover ({}, {}) chunk '{}': {} ({})",
            self.cover.0, self.cover.1, self.chunk, self.check, self.detail
        )
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct SweepReport {
    pub cases: u64,
    /// Cases where plain PVD leaves `[0, 255]`.
    pub pvd_violations: u64,
    pub branch_counts: BranchCounts,
    pub mark_counts: Vec<(MarkCase, u64)>,
    /// Cases whose marking is not decodable, excluded from round-trip checks.
    pub lossy_corners: u64,
    /// A few lossy cases as `(p, q, chunk)` for reporting.
    pub lossy_examples: Vec<(u8, u8, String)>,
    pub failures: u64,
    pub first_failure: Option<Counterexample>,
}

impl SweepReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }

    fn merge(mut self, other: SweepReport) -> SweepReport {
        self.cases += other.cases;
        self.pvd_violations += other.pvd_violations;
        self.branch_counts.merge(&other.branch_counts);
        for (case, n) in other.mark_counts {
            match self.mark_counts.iter_mut().find(|(c, _)| *c == case) {
                Some((_, total)) => *total += n,
                None => self.mark_counts.push((case, n)),
            }
        }
        self.mark_counts.sort();
        self.lossy_corners += other.lossy_corners;
        self.lossy_examples.extend(other.lossy_examples);
        self.lossy_examples.sort();
        self.lossy_examples.truncate(MAX_EXAMPLES);
        self.failures += other.failures;
        self.first_failure = match (self.first_failure, other.first_failure) {
            (Some(a), Some(b)) => Some(if a.cover <= b.cover { a } else { b }),
            (a, b) => a.or(b),
        };
        self
    }

    fn fail(&mut self, cover: (u8, u8), chunk: String, check: &'static str, detail: String) {
        self.failures += 1;
        if self.first_failure.is_none() {
            self.first_failure = Some(Counterexample { cover, chunk, check, detail });
        }
    }

    fn count_mark(&mut self, case: MarkCase) {
        match self.mark_counts.iter_mut().find(|(c, _)| *c == case) {
            Some((_, n)) => *n += 1,
            None => self.mark_counts.push((case, 1)),
        }
    }
}

const MAX_EXAMPLES: usize = 8;

/// Sweeps all cover pairs with a first pixel in `rows`.
fn sweep_rows(table: &RangeTable, rows: impl Iterator<Item = u8>) -> SweepReport {
    let mut report = SweepReport::default();
    for p in rows {
        for q in 0..=255u8 {
            check_cell(table, p, q, &mut report);
        }
    }
    report.mark_counts.sort();
    report
}

fn check_cell(table: &RangeTable, p: u8, q: u8, report: &mut SweepReport) {
    let d = i32::from(p.abs_diff(q));
    let range = table.locate(p.abs_diff(q));
    let t = range.bits();
    let (lower, upper) = (i32::from(range.lower()), i32::from(range.upper()));

    for value in 0..(1u32 << t) {
        report.cases += 1;
        let label = || format!("{:0width$b}", value, width = t as usize);
        let target = lower + value as i32;

        // Baseline.
        let trial = pvd::embed_chunk(p, q, value, table);
        if trial.difference() != target {
            report.fail((p, q), label(), "pvd realizes target", format!("{trial:?} vs {target}"));
        }
        if !(lower..=upper).contains(&target) {
            report.fail((p, q), label(), "target inside range", format!("{target}"));
        }
        let out_first = !(0..=255).contains(&trial.0);
        let out_second = !(0..=255).contains(&trial.1);
        if out_first && out_second {
            report.fail((p, q), label(), "at most one pixel overflows", format!("{trial:?}"));
        }
        if out_first || out_second {
            report.pvd_violations += 1;
            if target <= d {
                report.fail((p, q), label(), "narrowing stays in range", format!("{trial:?}"));
            }
        } else if pvd::extract_block(trial, table).value != value {
            report.fail((p, q), label(), "pvd round trip", format!("{trial:?}"));
        }

        // Adaptive.
        let outcome = match apvd::try_embed_chunk(p, q, value, table) {
            Ok(o) => o,
            Err(apvd::OutOfRange(pair)) => {
                report.fail((p, q), label(), "apvd output in range", format!("{pair:?}"));
                continue;
            }
        };
        report.branch_counts.record(outcome.branch);
        report.count_mark(outcome.mark_case);

        let (x, y) = outcome.adjusted;
        let realized = i32::from(outcome.realized);
        if WidePair(x.into(), y.into()).difference() != realized {
            report.fail((p, q), label(), "adjusted pair realizes target", format!("{:?}", outcome.adjusted));
        }
        if !(lower..=upper).contains(&realized) {
            report.fail((p, q), label(), "realized inside range", format!("{realized}"));
        }
        let (sx, sy) = outcome.stego;
        if sx.abs_diff(x) > 2 || sy.abs_diff(y) > 2 {
            report.fail((p, q), label(), "marking moves at most 2", format!("{:?}", outcome.stego));
        }
        if (sx & 1 == 1) != outcome.flag {
            report.fail((p, q), label(), "flag in first pixel parity", format!("{:?}", outcome.stego));
        }
        if outcome.branch == Branch::Plain && outcome.trial != WidePair(x.into(), y.into()) {
            report.fail((p, q), label(), "plain keeps pvd output", format!("{:?}", outcome.adjusted));
        }
        if matches!(outcome.branch, Branch::OneSided | Branch::DiscardThenOneSided) && realized <= d {
            report.fail((p, q), label(), "one-sided implies widening", format!("d={d} d'={realized}"));
        }
        if outcome.flag != outcome.branch.discards() {
            report.fail((p, q), label(), "flag matches branch", format!("{:?}", outcome.branch));
        }
        if outcome.flag {
            let expected = lower + value as i32 - (1 << (t - 1));
            if !outcome.chunk.msb() || realized != expected {
                report.fail((p, q), label(), "discard semantics", format!("d'={realized}"));
            }
        } else if realized != target {
            report.fail((p, q), label(), "no discard keeps target", format!("d'={realized}"));
        }

        if outcome.mark_case.is_lossy() {
            report.lossy_corners += 1;
            if report.lossy_examples.len() < MAX_EXAMPLES {
                report.lossy_examples.push((p, q, label()));
            }
            continue;
        }
        let (flag, first) = apvd::read_flag_and_adjust(outcome.stego);
        if flag != outcome.flag || i32::from(first.abs_diff(sy)) != realized {
            report.fail((p, q), label(), "difference recovery", format!("{:?}", outcome.stego));
        }
        if apvd::extract_block(outcome.stego, table).value != value {
            report.fail((p, q), label(), "apvd round trip", format!("{:?}", outcome.stego));
        }
    }
}

/// Runs the sweep, fanning out over first-pixel rows when `parallel`.
pub fn sweep(table: &RangeTable, parallel: bool) -> SweepReport {
    if parallel {
        (0..=255u8)
            .into_par_iter()
            .map(|p| sweep_rows(table, std::iter::once(p)))
            .reduce(SweepReport::default, SweepReport::merge)
    } else {
        sweep_rows(table, 0..=255u8)
    }
}

/// Total cases a sweep visits for `table`.
pub fn case_count(table: &RangeTable) -> u64 {
    (0..=255u8)
        .flat_map(|p| (0..=255u8).map(move |q| p.abs_diff(q)))
        .map(|d| 1u64 << table.locate(d).bits())
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_row_is_clean() {
        let table = RangeTable::default();
        let report = sweep_rows(&table, [0u8, 128, 255].into_iter());
        assert!(report.passed(), "{:?}", report.first_failure);
        assert!(report.cases > 0);
    }

    #[test]
    fn merge_keeps_earliest_failure() {
        let mut a = SweepReport::default();
        a.fail((5, 5), "0".into(), "x", String::new());
        let mut b = SweepReport::default();
        b.fail((1, 9), "1".into(), "y", String::new());
        let merged = a.merge(b);
        assert_eq!(merged.failures, 2);
        assert_eq!(merged.first_failure.unwrap().cover, (1, 9));
    }
}
