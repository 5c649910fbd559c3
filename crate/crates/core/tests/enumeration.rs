mod common;

use common::*;
use trajlens::dp::{discounted_value, finite_values};
use trajlens::trajectory::discounted::{discounted_weight, enumerate_discounted_prefixes};
use trajlens::trajectory::{enumerate_eps_optimal_plays, EpsOptimalPlays};

#[test]
fn enumeration_is_sound_and_complete() {
    let mut r = rng(21);
    for _ in 0..60 {
        let m = random_dyadic_model(&mut r, 6, 3);
        let table = finite_values(&m, 10);
        for s in 0..m.len() {
            for n in 1..=10 {
                let every = all_plays(&m, s, n);
                let best = every.iter().map(|p| play_total(&m, p)).fold(0.0, f64::max);
                for &eps in &[0.0, 0.1, 0.5] {
                    let want: Vec<Vec<usize>> = every
                        .iter()
                        .filter(|p| play_total(&m, p) >= best - n as f64 * eps - 1e-9)
                        .cloned()
                        .collect();
                    let got: Vec<Vec<usize>> = EpsOptimalPlays::new(&m, &table, s, n, eps)
                        .map(|p| p.sequence)
                        .collect();
                    assert_eq!(got, want, "s = {s}, n = {n}, eps = {eps}\n{m}");
                }
            }
        }
    }
}

#[test]
fn limit_truncates_and_flags() {
    let mut r = rng(22);
    for _ in 0..30 {
        let m = random_dyadic_model(&mut r, 6, 3);
        let table = finite_values(&m, 8);
        let all = enumerate_eps_optimal_plays(&m, &table, 0, 8, 1.0, usize::MAX);
        assert!(!all.limit_reached);
        let k = all.plays.len();
        let cut = enumerate_eps_optimal_plays(&m, &table, 0, 8, 1.0, k);
        assert!(!cut.limit_reached);
        if k > 1 {
            let cut = enumerate_eps_optimal_plays(&m, &table, 0, 8, 1.0, k - 1);
            assert!(cut.limit_reached);
            assert_eq!(cut.plays[..], all.plays[..k - 1]);
        }
    }
}

#[test]
fn discounted_prefixes_match_filtered_prefixes() {
    let mut r = rng(23);
    for _ in 0..40 {
        let m = random_dyadic_model(&mut r, 5, 3);
        let lambda = 0.4;
        let values = discounted_value(&m, lambda, 1e-13);
        let depth = 6;
        for s in 0..m.len() {
            for &eps in &[0.0, 0.05, 0.2] {
                // a prefix extends to an ε-optimal play iff its optimal
                // continuation value clears the threshold
                let want: Vec<Vec<usize>> = all_plays(&m, s, depth)
                    .into_iter()
                    .filter(|p| {
                        let head: f64 = p[..depth - 1]
                            .iter()
                            .enumerate()
                            .map(|(k, &x)| lambda * (1.0 - lambda).powi(k as i32) * m.payoff(x))
                            .sum();
                        let w = 1.0 - discounted_weight(depth - 1, lambda);
                        head + w * values.values[p[depth - 1]] >= values.values[s] - eps - 1e-9
                    })
                    .collect();
                let (got, truncated) =
                    enumerate_discounted_prefixes(&m, &values, s, depth, eps, usize::MAX);
                assert!(!truncated);
                let got: Vec<Vec<usize>> = got.into_iter().map(|d| d.prefix.sequence).collect();
                assert_eq!(got, want, "s = {s}, eps = {eps}\n{m}");
            }
        }
    }
}
