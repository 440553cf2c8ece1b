//! Distance of a node from the optimal node, measured on branch histories:
//! `D = |h_opt| + diff(h, h_opt) - LCS(h, h_opt)`.

use std::collections::HashMap;

use crate::bnb::{BranchHistory, Decision, Direction};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LcsMode {
    /// Longest contiguous run of identical decisions.
    #[default]
    Substring,
    /// Longest common subsequence, for sensitivity checks.
    Subsequence,
}

pub fn distance_to_opt(h: &BranchHistory, h_opt: &BranchHistory) -> usize {
    distance_with(h, h_opt, LcsMode::Substring)
}

pub fn distance_with(h: &BranchHistory, h_opt: &BranchHistory, mode: LcsMode) -> usize {
    let lcs = match mode {
        LcsMode::Substring => longest_common_run(h.decisions(), h_opt.decisions()),
        LcsMode::Subsequence => longest_common_subsequence(h.decisions(), h_opt.decisions()),
    };
    h_opt.len() + conflicts(h.decisions(), h_opt.decisions()) - lcs
}

/// Variables branched in both histories whose last directions disagree.
fn conflicts(a: &[Decision], b: &[Decision]) -> usize {
    let last = |h: &[Decision]| -> HashMap<usize, Direction> {
        h.iter().map(|d| (d.var, d.dir)).collect()
    };
    let (la, lb) = (last(a), last(b));
    la.iter()
        .filter(|(var, dir)| lb.get(var).is_some_and(|d| d != *dir))
        .count()
}

pub fn longest_common_run(a: &[Decision], b: &[Decision]) -> usize {
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    let mut best = 0;
    for x in a {
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = if x == y { prev[j] + 1 } else { 0 };
            best = best.max(cur[j + 1]);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    best
}

fn longest_common_subsequence(a: &[Decision], b: &[Decision]) -> usize {
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = if x == y {
                prev[j] + 1
            } else {
                prev[j + 1].max(cur[j])
            };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h(items: &[(usize, bool)]) -> BranchHistory {
        BranchHistory(
            items
                .iter()
                .map(|&(var, up)| Decision {
                    var,
                    dir: if up { Direction::Up } else { Direction::Down },
                    bound: if up { 1.0 } else { 0.0 },
                })
                .collect(),
        )
    }

    #[test]
    fn identical_histories_are_at_zero() {
        let a = h(&[(1, true), (4, false), (2, true)]);
        assert_eq!(distance_to_opt(&a, &a), 0);
    }

    #[test]
    fn ancestors_are_at_remaining_depth() {
        let opt = h(&[(1, true), (4, false), (2, true), (7, false), (3, true)]);
        for k in 0..=opt.len() {
            let anc = BranchHistory(opt.decisions()[..k].to_vec());
            assert_eq!(distance_to_opt(&anc, &opt), opt.len() - k);
        }
    }

    #[test]
    fn hand_built_divergent_pair() {
        // shared prefix of 2, then var 5 in opposite directions
        let opt = h(&[(1, true), (2, false), (5, true), (6, true)]);
        let node = h(&[(1, true), (2, false), (5, false)]);
        assert_eq!(longest_common_run(node.decisions(), opt.decisions()), 2);
        assert_eq!(distance_to_opt(&node, &opt), 3);
    }

    #[test]
    fn subsequence_mode_can_only_shrink_distance() {
        let opt = h(&[(1, true), (2, false), (3, true), (4, true)]);
        let node = h(&[(1, true), (9, false), (3, true), (4, true)]);
        let sub = distance_with(&node, &opt, LcsMode::Subsequence);
        let run = distance_to_opt(&node, &opt);
        assert_eq!(run, 4 - 2);
        assert_eq!(sub, 4 - 3);
    }
}
