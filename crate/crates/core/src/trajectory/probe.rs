//! Finite-range evidence for the two uniform-value conditions.
//!
//! Condition 1 asks for a single play whose running average stays above
//! `v - ε` at every horizon in `[N, Nmax]`; the probe tries the optimal play
//! of the longest horizon. Condition 2 asks that no play beats `v + ε` on
//! average, which `v_n(s) <= v + ε` certifies horizon by horizon.

use serde::Serialize;

use super::enumerate::optimal_play;
use crate::dp::finite_values;
use crate::model::DpModel;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UniformProbe {
    pub state: usize,
    pub reference: f64,
    pub epsilon: f64,
    pub threshold: usize,
    pub max_horizon: usize,
    /// First `n` in range where the fixed play averages below `v - ε`.
    pub guarantee_failure: Option<usize>,
    /// First `n` in range where `v_n(s) > v + ε`.
    pub cap_failure: Option<usize>,
    /// The probed play (state indices).
    pub play: Vec<usize>,
}

impl UniformProbe {
    pub fn passes(&self) -> bool {
        self.guarantee_failure.is_none() && self.cap_failure.is_none()
    }
}

pub fn uniform_value_probe(
    model: &DpModel,
    s: usize,
    epsilon: f64,
    threshold: usize,
    max_horizon: usize,
    reference: f64,
) -> UniformProbe {
    assert!(threshold >= 1 && threshold <= max_horizon, "need 1 <= N <= Nmax");
    let table = finite_values(model, max_horizon);
    let play = optimal_play(model, &table, s, max_horizon);
    let cumulative = play.cumulative();
    let guarantee_failure = (threshold..=max_horizon)
        .find(|&n| cumulative[n] / (n as f64) < reference - epsilon);
    let cap_failure =
        (threshold..=max_horizon).find(|&n| table.value(n, s) > reference + epsilon);
    UniformProbe {
        state: s,
        reference,
        epsilon,
        threshold,
        max_horizon,
        guarantee_failure,
        cap_failure,
        play: play.sequence,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_state_passes_from_one_over_eps() {
        let m = DpModel::from_labels(&[("s0", 0.0, vec!["s0", "s1"]), ("s1", 1.0, vec!["s1"])])
            .unwrap();
        let eps = 0.1;
        let ok = uniform_value_probe(&m, 0, eps, 10, 200, 1.0);
        assert!(ok.passes());
        // (n-1)/n < 1 - eps for n < 1/eps
        let early = uniform_value_probe(&m, 0, eps, 5, 200, 1.0);
        assert_eq!(early.guarantee_failure, Some(5));
    }

    #[test]
    fn absorbing_passes_everywhere() {
        let m = DpModel::from_labels(&[("z", 0.4, vec!["z"])]).unwrap();
        for n in 1..20 {
            assert!(uniform_value_probe(&m, 0, 0.01, n, 20, 0.4).passes());
        }
    }
}
