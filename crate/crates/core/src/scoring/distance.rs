//! Time-constrained Levenshtein alignment between timed word sequences.

use crate::scoring::types::{ErrorCounts, TimedWord};

const INF: u32 = u32::MAX / 4;

/// A hypothesis word may match or substitute a reference word only when the
/// hypothesis interval widened by the collar intersects the reference
/// interval.
fn admissible(h: &TimedWord, r: &TimedWord, collar_s: f64) -> bool {
    h.start_s - collar_s <= r.end_s && r.start_s <= h.end_s + collar_s
}

/// Minimal-cost alignment (match 0, substitution/insertion/deletion 1) where
/// temporally distant pairs are inadmissible and forced into one deletion
/// plus one insertion. Inputs must be sorted by start time.
///
/// Ties between co-optimal alignments resolve deterministically: diagonal
/// first, then deletion, then insertion, walking the table backward.
pub fn tc_word_distance(hyp: &[TimedWord], reference: &[TimedWord], collar_s: f64) -> ErrorCounts {
    debug_assert!(hyp.windows(2).all(|w| w[0].start_s <= w[1].start_s));
    debug_assert!(reference.windows(2).all(|w| w[0].start_s <= w[1].start_s));

    let n = hyp.len();
    let m = reference.len();
    let width = m + 1;
    let mut dp = vec![INF; (n + 1) * width];
    dp[0] = 0;
    for j in 1..=m {
        dp[j] = j as u32; // leading deletions
    }
    for i in 1..=n {
        dp[i * width] = i as u32; // leading insertions
    }
    for i in 1..=n {
        for j in 1..=m {
            let h = &hyp[i - 1];
            let r = &reference[j - 1];
            let diag = if admissible(h, r, collar_s) {
                dp[(i - 1) * width + (j - 1)] + u32::from(h.text != r.text)
            } else {
                INF
            };
            let del = dp[i * width + (j - 1)] + 1;
            let ins = dp[(i - 1) * width + j] + 1;
            dp[i * width + j] = diag.min(del).min(ins);
        }
    }

    // Backward walk to recover counts.
    let mut counts = ErrorCounts::default();
    let (mut i, mut j) = (n, m);
    while i > 0 || j > 0 {
        let cur = dp[i * width + j];
        if i > 0 && j > 0 {
            let h = &hyp[i - 1];
            let r = &reference[j - 1];
            if admissible(h, r, collar_s) {
                let step = u32::from(h.text != r.text);
                if dp[(i - 1) * width + (j - 1)] + step == cur {
                    if step == 1 {
                        counts.substitutions += 1;
                    }
                    i -= 1;
                    j -= 1;
                    continue;
                }
            }
        }
        if j > 0 && dp[i * width + (j - 1)] + 1 == cur {
            counts.deletions += 1;
            j -= 1;
        } else {
            debug_assert!(i > 0 && dp[(i - 1) * width + j] + 1 == cur);
            counts.insertions += 1;
            i -= 1;
        }
    }
    counts
}
