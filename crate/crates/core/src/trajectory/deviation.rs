//! Running-average deviation from `t * v(s)`.
//!
//! For a payoff stream of length `n`,
//! `D(t) = (1/n) * sum_{m <= [tn]} f_m - t * v`. `D` jumps only at the
//! breakpoints `t = m/n` and is affine in between, so its extremes over
//! `[0, 1]` are read off the breakpoints plus the one-sided limits just
//! before each of them.

use serde::Serialize;

use crate::model::Play;

/// Guard against `t * n` landing a hair below an integer.
const FLOOR_GUARD: f64 = 1e-9;

/// `[tn]`, clamped to `0..=n`.
pub fn stage_index(t: f64, n: usize) -> usize {
    let raw = (t * n as f64 + FLOOR_GUARD).floor();
    raw.clamp(0.0, n as f64) as usize
}

/// Deviation profile of one payoff stream (or expected payoff stream).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeviationProfile {
    pub horizon: usize,
    pub start: Option<usize>,
    pub reference: f64,
    pub grid: Vec<f64>,
    /// `D(t)` at each grid point.
    pub deviations: Vec<f64>,
    /// `cumulative[k]` is the sum of the first `k` stage payoffs.
    #[serde(skip)]
    cumulative: Vec<f64>,
}

/// Largest and smallest `D(t)` with the `t` attaining them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Extremes {
    pub upper: f64,
    pub upper_t: f64,
    pub lower: f64,
    pub lower_t: f64,
}

impl Extremes {
    pub fn worst_abs(&self) -> f64 {
        self.upper.abs().max(self.lower.abs())
    }

    /// The `(t, D(t))` pair of largest magnitude, upper side on ties.
    pub fn worst(&self) -> (f64, f64) {
        if self.upper.abs() >= self.lower.abs() {
            (self.upper_t, self.upper)
        } else {
            (self.lower_t, self.lower)
        }
    }
}

impl DeviationProfile {
    /// Builds the profile from cumulative sums `c[0..=n]` with `c[0] = 0`.
    pub fn from_cumulative(cumulative: Vec<f64>, reference: f64, grid: &[f64]) -> Self {
        assert!(!cumulative.is_empty(), "cumulative sums start with 0");
        let horizon = cumulative.len() - 1;
        let mut profile = Self {
            horizon,
            start: None,
            reference,
            grid: grid.to_vec(),
            deviations: Vec::new(),
            cumulative,
        };
        profile.deviations = grid.iter().map(|&t| profile.at(t)).collect();
        profile
    }

    pub fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }

    /// `D(t)` for any `t` in `[0, 1]`.
    pub fn at(&self, t: f64) -> f64 {
        assert!((0.0..=1.0).contains(&t), "t must lie in [0, 1]");
        let n = self.horizon as f64;
        if self.horizon == 0 {
            return 0.0;
        }
        self.cumulative[stage_index(t, self.horizon)] / n - t * self.reference
    }

    /// `D` at the breakpoint `t = m / n`.
    pub fn at_breakpoint(&self, m: usize) -> f64 {
        let n = self.horizon as f64;
        self.cumulative[m] / n - (m as f64 / n) * self.reference
    }

    /// `(1/n) * sum_{[t1 n] < m <= [t2 n]} f_m - (t2 - t1) * v`.
    pub fn interval(&self, t1: f64, t2: f64) -> f64 {
        assert!(t1 <= t2, "interval bounds out of order");
        let n = self.horizon as f64;
        if self.horizon == 0 {
            return 0.0;
        }
        let a = stage_index(t1, self.horizon);
        let b = stage_index(t2, self.horizon);
        (self.cumulative[b] - self.cumulative[a]) / n - (t2 - t1) * self.reference
    }

    /// Extremes over the breakpoints `m / n`, `m = 0..=n`. These values are
    /// attained; earliest breakpoint wins ties.
    pub fn breakpoint_extremes(&self) -> Extremes {
        let n = self.horizon;
        let mut ex = Extremes {
            upper: 0.0,
            upper_t: 0.0,
            lower: 0.0,
            lower_t: 0.0,
        };
        for m in 1..=n {
            let d = self.at_breakpoint(m);
            let t = m as f64 / n as f64;
            if d > ex.upper {
                ex.upper = d;
                ex.upper_t = t;
            }
            if d < ex.lower {
                ex.lower = d;
                ex.lower_t = t;
            }
        }
        ex
    }

    /// Exact supremum and infimum of `D` over `[0, 1]`, including the
    /// one-sided limits at `t -> (m + 1)/n` that are approached but not
    /// attained. Differs from [`Self::breakpoint_extremes`] by at most
    /// `|v| / n`.
    pub fn envelope(&self) -> (f64, f64) {
        let n = self.horizon;
        if n == 0 {
            return (0.0, 0.0);
        }
        let mut upper = f64::NEG_INFINITY;
        let mut lower = f64::INFINITY;
        let nf = n as f64;
        for m in 0..=n {
            let at = self.at_breakpoint(m);
            upper = upper.max(at);
            lower = lower.min(at);
            if m < n {
                let left_limit = self.cumulative[m] / nf - ((m + 1) as f64 / nf) * self.reference;
                upper = upper.max(left_limit);
                lower = lower.min(left_limit);
            }
        }
        (upper, lower)
    }

    /// Every breakpoint `m / n` with its deviation.
    pub fn breakpoints(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        (0..=self.horizon).map(move |m| {
            let t = if self.horizon == 0 {
                0.0
            } else {
                m as f64 / self.horizon as f64
            };
            (t, self.at_breakpoint(m))
        })
    }
}

/// Deviation profile of a concrete play against `reference`.
pub fn deviation_profile(play: &Play, reference: f64, grid: &[f64]) -> DeviationProfile {
    let mut p = DeviationProfile::from_cumulative(play.cumulative(), reference, grid);
    p.start = Some(play.start());
    p
}

/// `0, 1/k, ..., 1`.
pub fn uniform_grid(k: usize) -> Vec<f64> {
    assert!(k >= 1);
    (0..=k).map(|i| i as f64 / k as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::DpModel;

    fn two_state() -> DpModel {
        DpModel::from_labels(&[("s0", 0.0, vec!["s0", "s1"]), ("s1", 1.0, vec!["s1"])])
            .unwrap()
    }

    #[test]
    fn stage_index_floors_with_guard() {
        assert_eq!(stage_index(6.0 / 11.0, 11), 6);
        assert_eq!(stage_index(0.5, 7), 3);
        assert_eq!(stage_index(1.0, 7), 7);
        assert_eq!(stage_index(0.0, 7), 0);
        for n in 1..200 {
            for m in 0..=n {
                assert_eq!(stage_index(m as f64 / n as f64, n), m);
            }
        }
    }

    #[test]
    fn two_state_play_at_two_thirds() {
        let m = two_state();
        let play = Play::new(&m, vec![0, 1, 1]).unwrap();
        let p = deviation_profile(&play, 1.0, &[0.0, 2.0 / 3.0, 1.0]);
        assert_eq!(p.deviations[0], 0.0);
        assert!((p.deviations[1] - (1.0 / 3.0 - 2.0 / 3.0)).abs() < 1e-15);
        assert!((p.deviations[2] - (2.0 / 3.0 - 1.0)).abs() < 1e-15);
    }

    #[test]
    fn constant_stream_only_floor_error() {
        let c = 0.7;
        let n = 13;
        let cum: Vec<f64> = (0..=n).map(|k| k as f64 * c).collect();
        let grid = uniform_grid(97);
        let p = DeviationProfile::from_cumulative(cum, c, &grid);
        for (&t, &d) in grid.iter().zip(&p.deviations) {
            let expect = (stage_index(t, n) as f64 / n as f64 - t) * c;
            assert!((d - expect).abs() < 1e-12);
            assert!(d.abs() <= c / n as f64 + 1e-12);
        }
        let (hi, lo) = p.envelope();
        assert!(hi.abs() < 1e-12);
        assert!((lo + c / n as f64).abs() < 1e-12);
    }

    #[test]
    fn zeros_then_ones_hits_minus_quarter_at_half() {
        let k = 6;
        let mut cum = vec![0.0; k + 1];
        for j in 1..=k {
            cum.push(j as f64);
        }
        let p = DeviationProfile::from_cumulative(cum, 0.5, &[0.5]);
        assert_eq!(p.deviations[0], -0.25);
        let ex = p.breakpoint_extremes();
        assert_eq!(ex.lower, -0.25);
        assert_eq!(ex.lower_t, 0.5);
    }
}
