//! Optimal and ε-optimal plays of the `n`-stage problem.
//!
//! A play of length `n` from `s` is ε-optimal when its total payoff is at
//! least `n * (v_n(s) - ε)`. The enumerator walks successor choices in list
//! order and cuts a branch as soon as `prefix + W_{n-m}(next)` falls below
//! that threshold; since `W` is the exact best completion, the cut loses no
//! ε-optimal play and every leaf it reaches is ε-optimal.

use serde::Serialize;

use crate::dp::{best_successor, ValueTable};
use crate::model::{DpModel, Play};

/// Absolute slack on totals absorbing summation-order rounding when
/// payoffs are not dyadic. Zero effect on dyadic payoffs.
pub const TOTAL_SLACK: f64 = 1e-9;

/// Minimum total for an ε-optimal play of length `n` from `s`.
pub fn eps_threshold(table: &ValueTable, s: usize, n: usize, eps: f64) -> f64 {
    table.total(n, s) - n as f64 * eps
}

/// Whether a play of length `n` from `s` with this total is ε-optimal.
pub fn is_eps_optimal(table: &ValueTable, s: usize, n: usize, eps: f64, total: f64) -> bool {
    total >= eps_threshold(table, s, n, eps) - TOTAL_SLACK
}

/// Greedy play against the value table; attains `W_n(s)`.
pub fn optimal_play(model: &DpModel, table: &ValueTable, s: usize, n: usize) -> Play {
    assert!(n >= 1 && n <= table.horizon(), "horizon outside the table");
    let mut seq = Vec::with_capacity(n);
    seq.push(s);
    let mut cur = s;
    for m in 1..n {
        cur = best_successor(model, table.totals(n - m), cur);
        seq.push(cur);
    }
    Play::new(model, seq).expect("greedy play follows successor lists")
}

/// Lazy depth-first stream of ε-optimal plays in lexicographic order of
/// successor choices.
pub struct EpsOptimalPlays<'a> {
    model: &'a DpModel,
    table: &'a ValueTable,
    n: usize,
    threshold: f64,
    path: Vec<usize>,
    /// `prefix[k]` is the total of the first `k` states of `path`.
    prefix: Vec<f64>,
    /// Next successor position to try below each path entry.
    cursor: Vec<usize>,
    started: bool,
}

impl<'a> EpsOptimalPlays<'a> {
    pub fn new(model: &'a DpModel, table: &'a ValueTable, s: usize, n: usize, eps: f64) -> Self {
        assert!(n >= 1 && n <= table.horizon(), "horizon outside the table");
        assert!(eps >= 0.0, "epsilon must be nonnegative");
        Self {
            model,
            table,
            n,
            threshold: eps_threshold(table, s, n, eps) - TOTAL_SLACK,
            path: vec![s],
            prefix: vec![0.0, model.payoff(s)],
            cursor: vec![0],
            started: false,
        }
    }

    fn emit(&self) -> Play {
        Play {
            sequence: self.path.clone(),
            payoffs: self.path.iter().map(|&s| self.model.payoff(s)).collect(),
        }
    }
}

impl Iterator for EpsOptimalPlays<'_> {
    type Item = Play;

    fn next(&mut self) -> Option<Play> {
        if !self.started {
            self.started = true;
            if self.n == 1 {
                // the root is the only leaf; W_1(s) always clears the threshold
                let play = self.emit();
                self.path.clear();
                return Some(play);
            }
        }
        while let Some(&top) = self.path.last() {
            let depth = self.path.len();
            if depth == self.n {
                self.path.pop();
                self.prefix.pop();
                self.cursor.pop();
                continue;
            }
            let remaining = self.n - depth;
            let succ = self.model.successors(top);
            let here = self.prefix[depth];
            let pos = self.cursor[depth - 1];
            let found = succ[pos..]
                .iter()
                .position(|&t| here + self.table.total(remaining, t) >= self.threshold);
            match found {
                Some(off) => {
                    let t = succ[pos + off];
                    self.cursor[depth - 1] = pos + off + 1;
                    self.path.push(t);
                    self.prefix.push(here + self.model.payoff(t));
                    self.cursor.push(0);
                    if self.path.len() == self.n {
                        return Some(self.emit());
                    }
                }
                None => {
                    self.path.pop();
                    self.prefix.pop();
                    self.cursor.pop();
                }
            }
        }
        None
    }
}

/// Collected result of a bounded enumeration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Enumeration {
    pub plays: Vec<Play>,
    /// More ε-optimal plays exist beyond `limit`.
    pub limit_reached: bool,
}

/// At most `limit` ε-optimal plays of `G_n(s)`.
pub fn enumerate_eps_optimal_plays(
    model: &DpModel,
    table: &ValueTable,
    s: usize,
    n: usize,
    eps: f64,
    limit: usize,
) -> Enumeration {
    let mut it = EpsOptimalPlays::new(model, table, s, n, eps);
    let plays: Vec<Play> = it.by_ref().take(limit).collect();
    let limit_reached = plays.len() == limit && it.next().is_some();
    Enumeration {
        plays,
        limit_reached,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dp::finite_values;

    fn two_state() -> DpModel {
        DpModel::from_labels(&[("s0", 0.0, vec!["s0", "s1"]), ("s1", 1.0, vec!["s1"])])
            .unwrap()
    }

    #[test]
    fn two_state_optimal_play() {
        let m = two_state();
        let t = finite_values(&m, 3);
        let p = optimal_play(&m, &t, 0, 3);
        assert_eq!(p.sequence, vec![0, 1, 1]);
        assert_eq!(p.total(), 2.0);
    }

    #[test]
    fn eps_zero_gives_unique_optimum() {
        let m = two_state();
        let t = finite_values(&m, 3);
        let e = enumerate_eps_optimal_plays(&m, &t, 0, 3, 0.0, 100);
        assert_eq!(e.plays.len(), 1);
        assert_eq!(e.plays[0].sequence, vec![0, 1, 1]);
        assert!(!e.limit_reached);
    }

    #[test]
    fn large_eps_gives_every_play() {
        let m = two_state();
        let t = finite_values(&m, 3);
        let e = enumerate_eps_optimal_plays(&m, &t, 0, 3, 1.0, 100);
        let seqs: Vec<_> = e.plays.iter().map(|p| p.sequence.clone()).collect();
        assert_eq!(
            seqs,
            vec![vec![0, 0, 0], vec![0, 0, 1], vec![0, 1, 1]]
        );
    }

    #[test]
    fn limit_flag() {
        let m = two_state();
        let t = finite_values(&m, 3);
        let e = enumerate_eps_optimal_plays(&m, &t, 0, 3, 1.0, 2);
        assert_eq!(e.plays.len(), 2);
        assert!(e.limit_reached);
        let e = enumerate_eps_optimal_plays(&m, &t, 0, 3, 1.0, 3);
        assert!(!e.limit_reached);
    }

    #[test]
    fn horizon_one() {
        let m = two_state();
        let t = finite_values(&m, 1);
        let e = enumerate_eps_optimal_plays(&m, &t, 0, 1, 0.0, 10);
        assert_eq!(e.plays.len(), 1);
        assert_eq!(e.plays[0].sequence, vec![0]);
    }
}
