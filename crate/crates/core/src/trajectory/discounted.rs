//! Discounted evaluation and its time change.
//!
//! Under `lambda`-discounting stage `m` weighs `lambda (1 - lambda)^(m-1)`
//! and the first `p` stages carry total weight `1 - (1 - lambda)^p`. The
//! stage `n(t; lambda)` is the first `p` whose cumulated weight reaches `t`.

use serde::Serialize;

use crate::dp::DiscountedValues;
use crate::model::{DpModel, Play};

/// `n(t; lambda)`: smallest `p` with `1 - (1 - lambda)^p >= t`; `None` at
/// `t >= 1`, where no finite stage suffices.
pub fn discounted_stage(t: f64, lambda: f64) -> Option<usize> {
    assert!(lambda > 0.0 && lambda < 1.0, "lambda must lie in (0, 1)");
    if t <= 0.0 {
        return Some(0);
    }
    if t >= 1.0 {
        return None;
    }
    let weight = |p: usize| 1.0 - (1.0 - lambda).powi(p as i32);
    let mut p = ((1.0 - t).ln() / (1.0 - lambda).ln()).ceil().max(0.0) as usize;
    while weight(p) < t {
        p += 1;
    }
    while p > 0 && weight(p - 1) >= t {
        p -= 1;
    }
    Some(p)
}

/// Cumulated weight `1 - (1 - lambda)^p` of the first `p` stages.
pub fn discounted_weight(p: usize, lambda: f64) -> f64 {
    1.0 - (1.0 - lambda).powi(p as i32)
}

/// Smallest `p` with `(1 - lambda)^p <= cutoff`.
pub fn effective_horizon(lambda: f64, cutoff: f64) -> usize {
    assert!(lambda > 0.0 && lambda < 1.0);
    assert!(cutoff > 0.0 && cutoff < 1.0);
    let mut p = (cutoff.ln() / (1.0 - lambda).ln()).floor().max(0.0) as usize;
    while (1.0 - lambda).powi(p as i32) > cutoff {
        p += 1;
    }
    while p > 0 && (1.0 - lambda).powi(p as i32 - 1) <= cutoff {
        p -= 1;
    }
    p
}

/// `partial[p] = sum_{m <= p} lambda (1 - lambda)^(m-1) f_m`.
pub fn discounted_partial_sums(payoffs: &[f64], lambda: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(payoffs.len() + 1);
    let mut acc = 0.0;
    let mut w = lambda;
    out.push(0.0);
    for &f in payoffs {
        acc += w * f;
        w *= 1.0 - lambda;
        out.push(acc);
    }
    out
}

/// A play prefix of the discounted problem, continued optimally after its
/// last stage when evaluated.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscountedPlay {
    pub prefix: Play,
    /// Discounted total of the prefix plus the optimal continuation value.
    pub value: f64,
}

/// Prefixes of length `depth` that extend to an ε-optimal play of `G_lambda(s)`.
///
/// The branch bound after `p` states is
/// `prefix_{p-1} + (1 - lambda)^(p-1) v_lambda(s_p)`; a prefix survives to
/// depth `depth` iff its optimal continuation is ε-optimal.
pub fn enumerate_discounted_prefixes(
    model: &DpModel,
    values: &DiscountedValues,
    s: usize,
    depth: usize,
    eps: f64,
    limit: usize,
) -> (Vec<DiscountedPlay>, bool) {
    assert!(depth >= 1);
    let lambda = values.lambda;
    let v = &values.values;
    let threshold = v[s] - eps - DISCOUNT_SLACK;
    let mut out = Vec::new();
    let mut truncated = false;

    // path, discounted prefix before each entry, (1-lambda)^(len-1), cursor
    let mut path = vec![s];
    let mut before = vec![0.0];
    let mut cursor = vec![0usize];
    let mut weight = vec![1.0];
    let close = |path: &[usize], before: &[f64], weight: &[f64]| -> DiscountedPlay {
        let last = *path.last().unwrap();
        let w = *weight.last().unwrap();
        let value = before.last().unwrap() + w * v[last];
        DiscountedPlay {
            prefix: Play {
                sequence: path.to_vec(),
                payoffs: path.iter().map(|&x| model.payoff(x)).collect(),
            },
            value,
        }
    };
    if depth == 1 {
        out.push(close(&path, &before, &weight));
        return (out, false);
    }
    while let Some(&top) = path.last() {
        let len = path.len();
        if len == depth {
            if out.len() == limit {
                truncated = true;
                break;
            }
            out.push(close(&path, &before, &weight));
            path.pop();
            before.pop();
            cursor.pop();
            weight.pop();
            continue;
        }
        let here = before[len - 1] + weight[len - 1] * lambda * model.payoff(top);
        let w_next = weight[len - 1] * (1.0 - lambda);
        let succ = model.successors(top);
        let pos = cursor[len - 1];
        let found = succ[pos..]
            .iter()
            .position(|&t| here + w_next * v[t] >= threshold);
        match found {
            Some(off) => {
                cursor[len - 1] = pos + off + 1;
                path.push(succ[pos + off]);
                before.push(here);
                cursor.push(0);
                weight.push(w_next);
            }
            None => {
                path.pop();
                before.pop();
                cursor.pop();
                weight.pop();
            }
        }
    }
    (out, truncated)
}

/// Slack on discounted totals covering the fixed-point tolerance.
pub const DISCOUNT_SLACK: f64 = 1e-9;

/// Extends `play` along greedy choices against `values` to `len` states.
pub fn extend_greedy(model: &DpModel, values: &DiscountedValues, play: &Play, len: usize) -> Play {
    let mut seq = play.sequence.clone();
    while seq.len() < len {
        let cur = *seq.last().unwrap();
        seq.push(crate::dp::best_successor(model, &values.values, cur));
    }
    Play::new(model, seq).expect("greedy extension is feasible")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stage_spot_values() {
        assert_eq!(discounted_stage(0.6, 0.5), Some(2));
        assert_eq!(discounted_stage(0.5, 0.5), Some(1));
        assert_eq!(discounted_stage(0.75, 0.5), Some(2));
        assert_eq!(discounted_stage(0.0, 0.5), Some(0));
        assert_eq!(discounted_stage(1.0, 0.5), None);
    }

    #[test]
    fn stage_is_minimal() {
        for &lambda in &[0.5, 0.1, 0.05, 0.01] {
            for i in 1..1000 {
                let t = i as f64 / 1000.0;
                let p = discounted_stage(t, lambda).unwrap();
                assert!(discounted_weight(p, lambda) >= t);
                assert!(p == 0 || discounted_weight(p - 1, lambda) < t);
            }
        }
    }

    #[test]
    fn effective_horizon_minimal() {
        let h = effective_horizon(0.01, 0.005);
        assert!(0.99f64.powi(h as i32) <= 0.005);
        assert!(0.99f64.powi(h as i32 - 1) > 0.005);
        assert_eq!(effective_horizon(0.5, 0.25), 2);
    }

    #[test]
    fn partial_sums_of_constant_stream() {
        let s = discounted_partial_sums(&[1.0; 4], 0.5);
        assert_eq!(s, vec![0.0, 0.5, 0.75, 0.875, 0.9375]);
    }
}
