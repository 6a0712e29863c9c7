//! Order in which lost samples are reconstructed.
//!
//! Samples with the most valid neighbourhood go first. Within a run of lost
//! samples the two ends always see the most support, and once an end is
//! reconstructed its neighbour inherits that position, so each run is
//! consumed from both ends inward, alternating, left end first. Runs are
//! taken shortest first, leftmost on equal length.

use crate::signal::{Run, SampleMask};

/// Positions of a run from the outside in: `start, end-1, start+1, ...`.
pub fn outside_in(run: Run) -> impl Iterator<Item = usize> {
    let (mut lo, mut hi) = (run.start, run.end());
    let mut left = true;
    std::iter::from_fn(move || {
        if lo >= hi {
            return None;
        }
        let i = if left {
            lo += 1;
            lo - 1
        } else {
            hi -= 1;
            hi
        };
        left = !left;
        Some(i)
    })
}

/// Runs in processing order.
pub fn ordered_runs(mut runs: Vec<Run>) -> Vec<Run> {
    runs.sort_by_key(|r| (r.len, r.start));
    runs
}

/// Every lost index of `mask`, in processing order.
pub fn processing_order(mask: &SampleMask) -> Vec<usize> {
    ordered_runs(mask.lost_runs())
        .into_iter()
        .flat_map(outside_in)
        .collect()
}

/// Partitions the runs into groups whose windows never reach each other's
/// samples: consecutive runs separated by at least `2 * support + 1` valid
/// samples start a new group. Groups are in position order.
pub fn run_groups(mask: &SampleMask, support: usize) -> Vec<Vec<Run>> {
    let mut groups: Vec<Vec<Run>> = Vec::new();
    let mut last_end: Option<usize> = None;
    for run in mask.lost_runs() {
        match last_end {
            Some(end) if run.start - end < 2 * support + 1 => {
                groups.last_mut().expect("a group exists").push(run);
            }
            _ => groups.push(vec![run]),
        }
        last_end = Some(run.end());
    }
    groups
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::Label;

    fn mask_with_runs(len: usize, runs: &[(usize, usize)]) -> SampleMask {
        let mut labels = vec![Label::Support; len];
        for &(start, n) in runs {
            for l in &mut labels[start..start + n] {
                *l = Label::Lost;
            }
        }
        SampleMask::new(labels)
    }

    #[test]
    fn single_run_outside_in() {
        let mask = mask_with_runs(5000, &[(2000, 3)]);
        assert_eq!(processing_order(&mask), vec![2000, 2002, 2001]);
        let mask = mask_with_runs(5000, &[(2000, 5)]);
        assert_eq!(processing_order(&mask), vec![2000, 2004, 2001, 2003, 2002]);
    }

    #[test]
    fn isolated_sample() {
        let mask = mask_with_runs(100, &[(42, 1)]);
        assert_eq!(processing_order(&mask), vec![42]);
    }

    #[test]
    fn shorter_runs_first() {
        let mask = mask_with_runs(200, &[(10, 5), (100, 2), (150, 2)]);
        assert_eq!(
            processing_order(&mask),
            vec![100, 101, 150, 151, 10, 14, 11, 13, 12]
        );
    }

    #[test]
    fn grouping_by_window_reach() {
        // support 10: a gap of 21 valid samples separates groups
        let mask = mask_with_runs(200, &[(10, 2), (32, 1), (54, 3), (77, 1)]);
        let groups = run_groups(&mask, 10);
        let starts: Vec<Vec<usize>> = groups
            .iter()
            .map(|g| g.iter().map(|r| r.start).collect())
            .collect();
        // 32 - 12 = 20 < 21 joins; 54 - 33 = 21 splits; 77 - 57 = 20 joins
        assert_eq!(starts, vec![vec![10, 32], vec![54, 77]]);
        assert!(run_groups(&SampleMask::all_support(50), 10).is_empty());
    }

    #[test]
    fn order_covers_every_lost_index_once() {
        let mask: SampleMask = "ABBBABRBBABBBBBBA".parse().unwrap();
        let mut order = processing_order(&mask);
        order.sort_unstable();
        assert_eq!(order, mask.lost_indices());
    }
}
