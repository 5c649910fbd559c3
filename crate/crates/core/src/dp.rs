//! Finite-horizon and discounted values of a [`DpModel`].
//!
//! Finite-horizon values are computed on unnormalized totals
//! `W_n(s) = f(s) + max_{s' in succ(s)} W_{n-1}(s')`, `W_0 = 0`, and only
//! divided by `n` when read out. With dyadic payoffs every total is exact.

use serde::Serialize;

use crate::cycle::max_mean_cycle_values;
use crate::model::DpModel;

/// Totals and averages of the `n`-stage problem for `n = 0..=horizon`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValueTable {
    horizon: usize,
    /// `totals[n][s] = n * v_n(s)`, with a zero row at `n = 0`.
    totals: Vec<Vec<f64>>,
}

impl ValueTable {
    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn num_states(&self) -> usize {
        self.totals[0].len()
    }

    /// Best total payoff over `n` stages from `s`.
    pub fn total(&self, n: usize, s: usize) -> f64 {
        self.totals[n][s]
    }

    /// `v_n(s)`. Panics for `n = 0`.
    pub fn value(&self, n: usize, s: usize) -> f64 {
        assert!(n >= 1, "v_0 is undefined");
        self.totals[n][s] / n as f64
    }

    pub fn values(&self, n: usize) -> Vec<f64> {
        (0..self.num_states()).map(|s| self.value(n, s)).collect()
    }

    pub fn totals(&self, n: usize) -> &[f64] {
        &self.totals[n]
    }

    /// `sup_s |v_a(s) - v_b(s)|`.
    pub fn gap(&self, a: usize, b: usize) -> f64 {
        (0..self.num_states())
            .map(|s| (self.value(a, s) - self.value(b, s)).abs())
            .fold(0.0, f64::max)
    }
}

/// Exact `n`-stage values for `n <= horizon`.
pub fn finite_values(model: &DpModel, horizon: usize) -> ValueTable {
    assert!(horizon >= 1, "horizon must be positive");
    let k = model.len();
    let mut totals = Vec::with_capacity(horizon + 1);
    totals.push(vec![0.0; k]);
    for n in 1..=horizon {
        let prev = &totals[n - 1];
        let row: Vec<f64> = (0..k)
            .map(|s| {
                let best = model
                    .successors(s)
                    .iter()
                    .map(|&t| prev[t])
                    .fold(f64::NEG_INFINITY, f64::max);
                model.payoff(s) + best
            })
            .collect();
        totals.push(row);
    }
    ValueTable { horizon, totals }
}

/// Lowest-index successor attaining the best continuation total.
pub(crate) fn best_successor(model: &DpModel, continuation: &[f64], s: usize) -> usize {
    let mut best: Option<usize> = None;
    for &t in model.successors(s) {
        best = match best {
            None => Some(t),
            Some(b) if continuation[t] > continuation[b] => Some(t),
            Some(b) if continuation[t] == continuation[b] && t < b => Some(t),
            keep => keep,
        };
    }
    best.expect("successor lists are nonempty")
}

/// Fixed point of the discounted Bellman map together with convergence data.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscountedValues {
    pub lambda: f64,
    pub values: Vec<f64>,
    pub iterations: usize,
    /// Sup-norm distance between `values` and one more application of the map.
    pub residual: f64,
}

/// One application of `v -> lambda f + (1 - lambda) max_{succ} v`.
pub fn bellman_discounted(model: &DpModel, lambda: f64, v: &[f64]) -> Vec<f64> {
    (0..model.len())
        .map(|s| {
            let best = model
                .successors(s)
                .iter()
                .map(|&t| v[t])
                .fold(f64::NEG_INFINITY, f64::max);
            lambda * model.payoff(s) + (1.0 - lambda) * best
        })
        .collect()
}

/// Value of the `lambda`-discounted problem, iterated from the zero vector
/// until the sup-norm residual drops to `tol`.
pub fn discounted_value(model: &DpModel, lambda: f64, tol: f64) -> DiscountedValues {
    assert!(lambda > 0.0 && lambda <= 1.0, "lambda must lie in (0, 1]");
    assert!(tol > 0.0, "tolerance must be positive");
    let mut v = vec![0.0; model.len()];
    let mut iterations = 0;
    loop {
        let next = bellman_discounted(model, lambda, &v);
        let residual = sup_distance(&next, &v);
        if residual <= tol {
            return DiscountedValues {
                lambda,
                values: v,
                iterations,
                residual,
            };
        }
        v = next;
        iterations += 1;
    }
}

/// A priori iteration bound from the contraction factor `1 - lambda`.
pub fn discounted_iteration_bound(lambda: f64, tol: f64) -> usize {
    if lambda >= 1.0 {
        return 1;
    }
    ((tol * lambda).ln() / (1.0 - lambda).ln()).ceil().max(0.0) as usize + 1
}

pub fn sup_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// One `(short, long)` horizon comparison of the Cauchy ladder.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CauchyWindow {
    pub short: usize,
    pub long: usize,
    pub gap: f64,
}

/// Convergence diagnostics returned by [`limit_value_estimate`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegularityReport {
    pub horizon: usize,
    /// Windows `(N / 2^j, N)` for `j = 1, 2, ...` while `N / 2^j >= 1`,
    /// largest short horizon first.
    pub cauchy_gaps: Vec<CauchyWindow>,
    /// `sup_s |v_N(s) - v_lambda(s)|` at `lambda = 1 / N`.
    pub discounted_gap: f64,
    /// Long-run value from the maximum mean cycle reachable from each state.
    pub cycle_oracle: Vec<f64>,
    /// `sup_s |v_N(s) - oracle(s)|`.
    pub oracle_gap: f64,
    pub non_converged: bool,
}

/// Estimates `lim v_n` by `v_N` and reports how settled the sequence looks.
pub fn limit_value_estimate(
    model: &DpModel,
    horizon: usize,
    tol: f64,
) -> (Vec<f64>, RegularityReport) {
    assert!(horizon >= 2, "need at least two horizons");
    let table = finite_values(model, horizon);
    let estimate = table.values(horizon);

    let mut cauchy_gaps = Vec::new();
    let mut short = horizon / 2;
    while short >= 1 {
        cauchy_gaps.push(CauchyWindow {
            short,
            long: horizon,
            gap: table.gap(short, horizon),
        });
        short /= 2;
    }
    let non_converged = cauchy_gaps.first().is_some_and(|w| w.gap > tol);

    let disc = discounted_value(model, 1.0 / horizon as f64, 1e-12);
    let discounted_gap = sup_distance(&estimate, &disc.values);
    let cycle_oracle = max_mean_cycle_values(model);
    let oracle_gap = sup_distance(&estimate, &cycle_oracle);

    let report = RegularityReport {
        horizon,
        cauchy_gaps,
        discounted_gap,
        cycle_oracle,
        oracle_gap,
        non_converged,
    };
    (estimate, report)
}

/// A transition along which the supplied limit increases.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MonotoneViolation {
    pub from: usize,
    pub to: usize,
    pub increase: f64,
}

/// All edges `s -> s'` with `v(s') > v(s) + tol`.
///
/// A genuine limit value can only decrease along feasible transitions, so
/// a nonempty result means `v` is not the limit of this model.
pub fn check_monotone_limit(model: &DpModel, v: &[f64], tol: f64) -> Vec<MonotoneViolation> {
    assert_eq!(v.len(), model.len(), "one value per state");
    let mut out = Vec::new();
    for s in 0..model.len() {
        for &t in model.successors(s) {
            if v[t] > v[s] + tol {
                out.push(MonotoneViolation {
                    from: s,
                    to: t,
                    increase: v[t] - v[s],
                });
            }
        }
    }
    out
}
