mod common;

use common::*;
use trajlens::cycle::max_mean_cycle_values;
use trajlens::dp::{bellman_discounted, check_monotone_limit, discounted_value, finite_values, sup_distance};
use trajlens::trajectory::optimal_play;

#[test]
fn finite_values_match_exhaustive_search() {
    let mut r = rng(11);
    for _ in 0..100 {
        let m = random_dyadic_model(&mut r, 6, 3);
        let table = finite_values(&m, 10);
        for s in 0..m.len() {
            let brute = brute_force_totals(&m, s, 10);
            for n in 1..=10 {
                assert_eq!(table.total(n, s), brute[n], "n = {n}, s = {s}\n{m}");
            }
        }
    }
}

#[test]
fn optimal_play_attains_total() {
    let mut r = rng(12);
    for _ in 0..100 {
        let m = random_dyadic_model(&mut r, 6, 3);
        let table = finite_values(&m, 12);
        for s in 0..m.len() {
            for n in 1..=12 {
                let p = optimal_play(&m, &table, s, n);
                assert_eq!(p.len(), n);
                assert_eq!(p.start(), s);
                assert_eq!(p.total(), table.total(n, s));
            }
        }
    }
}

#[test]
fn discounted_fixed_point_and_truncated_oracle() {
    let mut r = rng(13);
    for _ in 0..50 {
        let m = random_dyadic_model(&mut r, 5, 3);
        for &lambda in &[0.5, 0.4] {
            let d = discounted_value(&m, lambda, 1e-13);
            let again = bellman_discounted(&m, lambda, &d.values);
            assert!(sup_distance(&again, &d.values) <= 1e-12);
            // depth-H exhaustive value brackets v_lambda within (1-lambda)^H
            let h = 11;
            let tail = (1.0 - lambda).powi(h as i32);
            for s in 0..m.len() {
                let best = all_plays(&m, s, h)
                    .iter()
                    .map(|p| {
                        p.iter()
                            .enumerate()
                            .map(|(k, &x)| lambda * (1.0 - lambda).powi(k as i32) * m.payoff(x))
                            .sum::<f64>()
                    })
                    .fold(f64::NEG_INFINITY, f64::max);
                assert!(d.values[s] >= best - 1e-9);
                assert!(d.values[s] <= best + tail + 1e-9);
            }
        }
    }
}

#[test]
fn cycle_oracle_is_the_long_run_value() {
    let mut r = rng(14);
    for _ in 0..100 {
        let m = random_dyadic_model(&mut r, 6, 3);
        let oracle = max_mean_cycle_values(&m);
        let n = 400;
        let table = finite_values(&m, n);
        for s in 0..m.len() {
            // a path into the best cycle costs at most |S| stages
            let gap = (table.value(n, s) - oracle[s]).abs();
            assert!(gap <= 2.0 * m.len() as f64 / n as f64 + 1e-12, "{gap}\n{m}");
        }
        assert!(check_monotone_limit(&m, &oracle, 0.0).is_empty());
    }
}

#[test]
fn values_are_bounded_and_monotone_in_payoffs() {
    let mut r = rng(15);
    for _ in 0..50 {
        let m = random_dyadic_model(&mut r, 6, 3);
        let table = finite_values(&m, 20);
        for n in 1..=20 {
            for v in table.values(n) {
                assert!((0.0..=1.0).contains(&v));
            }
        }
    }
}
