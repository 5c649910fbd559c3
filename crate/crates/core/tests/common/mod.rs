//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use trajlens::model::{DpModel, StateRecord};

pub fn rng(seed: u64) -> ChaCha8Rng {
    rand::SeedableRng::seed_from_u64(seed)
}

/// Random model with payoffs in `{0, 1/8, ..., 1}` so that every total is
/// exact in floating point.
pub fn random_dyadic_model(rng: &mut ChaCha8Rng, max_states: usize, max_branch: usize) -> DpModel {
    let k = rng.gen_range(1..=max_states);
    let states = (0..k)
        .map(|i| {
            let mut all: Vec<usize> = (0..k).collect();
            all.shuffle(rng);
            let b = rng.gen_range(1..=max_branch.min(k));
            let mut succ = all[..b].to_vec();
            succ.sort_unstable();
            StateRecord {
                id: format!("x{i}"),
                payoff: rng.gen_range(0..=8) as f64 / 8.0,
                successors: succ,
            }
        })
        .collect();
    DpModel::new(states).unwrap()
}

/// Every feasible play of exactly `n` states from `s`, in lexicographic
/// order of successor positions.
pub fn all_plays(model: &DpModel, s: usize, n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut path = vec![s];
    fn go(model: &DpModel, n: usize, path: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if path.len() == n {
            out.push(path.clone());
            return;
        }
        let last = *path.last().unwrap();
        for &t in model.successors(last) {
            path.push(t);
            go(model, n, path, out);
            path.pop();
        }
    }
    go(model, n, &mut path, &mut out);
    out
}

pub fn play_total(model: &DpModel, play: &[usize]) -> f64 {
    play.iter().map(|&s| model.payoff(s)).sum()
}

/// `best[n]` = largest total of a feasible `n`-state play from `s`, by
/// exhaustive depth-first search.
pub fn brute_force_totals(model: &DpModel, s: usize, horizon: usize) -> Vec<f64> {
    let mut best = vec![f64::NEG_INFINITY; horizon + 1];
    best[0] = 0.0;
    fn go(model: &DpModel, s: usize, depth: usize, acc: f64, horizon: usize, best: &mut [f64]) {
        let acc = acc + model.payoff(s);
        if acc > best[depth] {
            best[depth] = acc;
        }
        if depth == horizon {
            return;
        }
        for &t in model.successors(s) {
            go(model, t, depth + 1, acc, horizon, best);
        }
    }
    go(model, s, 1, 0.0, horizon, &mut best);
    best
}

pub fn rational(x: f64) -> BigRational {
    <BigRational as num_traits::FromPrimitive>::from_f64(x).unwrap()
}

pub fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Exact solution of a linear system by Gauss-Jordan elimination; `None`
/// when singular.
fn solve_exact(mut a: Vec<Vec<BigRational>>, mut b: Vec<BigRational>) -> Option<Vec<BigRational>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, piv);
        b.swap(col, piv);
        let p = a[col][col].clone();
        for c in col..n {
            a[col][c] = &a[col][c] / &p;
        }
        b[col] = &b[col] / &p;
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for c in col..n {
                    let sub = &f * &a[col][c];
                    a[r][c] = &a[r][c] - sub;
                }
                let sub = &f * &b[col];
                b[r] = &b[r] - sub;
            }
        }
    }
    Some(b)
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    if n < k {
        return Vec::new();
    }
    let mut out = subsets(n - 1, k);
    for mut s in subsets(n - 1, k - 1) {
        s.push(n - 1);
        out.push(s);
    }
    out
}

/// Value of the matrix game `a` (row player maximizes) by exhaustive
/// vertex enumeration of `max v s.t. x A >= v, x >= 0, sum x = 1`, exact.
pub fn exact_matrix_value(a: &[Vec<BigRational>]) -> BigRational {
    let m = a.len();
    let n = a[0].len();
    // unknowns: x_0..x_{m-1}, v ; constraints 0..m are x_i = 0, m..m+n are (xA)_j = v
    let mut best: Option<BigRational> = None;
    for tight in subsets(m + n, m) {
        let mut rows = Vec::with_capacity(m + 1);
        let mut rhs = Vec::with_capacity(m + 1);
        for &c in &tight {
            let mut row = vec![BigRational::zero(); m + 1];
            if c < m {
                row[c] = BigRational::one();
            } else {
                let j = c - m;
                for i in 0..m {
                    row[i] = a[i][j].clone();
                }
                row[m] = -BigRational::one();
            }
            rows.push(row);
            rhs.push(BigRational::zero());
        }
        let mut sum = vec![BigRational::one(); m + 1];
        sum[m] = BigRational::zero();
        rows.push(sum);
        rhs.push(BigRational::one());
        let Some(sol) = solve_exact(rows, rhs) else {
            continue;
        };
        let (x, v) = sol.split_at(m);
        let v = &v[0];
        if x.iter().any(|xi| xi.is_negative()) {
            continue;
        }
        let feasible = (0..n).all(|j| {
            let col: BigRational = (0..m).map(|i| &x[i] * &a[i][j]).sum();
            col >= *v
        });
        if feasible && best.as_ref().map_or(true, |b| v > b) {
            best = Some(v.clone());
        }
    }
    best.expect("a matrix game always has a value")
}

/// Random matrix with entries `k / 1000`, `k` in `-1000..=1000`.
pub fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Vec<Vec<f64>> {
    (0..rows)
        .map(|_| (0..cols).map(|_| rng.gen_range(-1000..=1000) as f64 / 1000.0).collect())
        .collect()
}

/// The exact rational matrix behind [`random_matrix`] output.
pub fn thousandths(a: &[Vec<f64>]) -> Vec<Vec<BigRational>> {
    a.iter()
        .map(|r| r.iter().map(|&x| ratio((x * 1000.0).round() as i64, 1000)).collect())
        .collect()
}

pub fn to_f64(x: &BigRational) -> f64 {
    num_traits::ToPrimitive::to_f64(x).unwrap()
}
