//! Two-player zero-sum matrix games by support enumeration.
//!
//! Every matrix game has a pair of optimal strategies whose supports index a
//! square nonsingular submatrix, so it suffices to try square support pairs
//! `(I, J)`, solve the two equalization systems
//! `sum_{i in I} x_i a_ij = v (j in J)`, `sum x = 1` and
//! `sum_{j in J} a_ij y_j = w (i in I)`, `sum y = 1`, and keep the first pair
//! that is nonnegative and passes the duality certificate on the full matrix.
//! Pairs are tried by increasing size, then lexicographically.

use serde::Serialize;
use thiserror::Error;

/// Largest dimension on either side for which mixed supports are searched.
/// Games of any size with a pure saddle point are solved.
pub const MAX_DIM: usize = 8;

/// Slack of the optimality certificate.
pub const CERT_TOL: f64 = 1e-9;

const NONNEG_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MatrixError {
    #[error("payoff matrix is empty")]
    Empty,
    #[error("payoff matrix rows have unequal lengths")]
    Ragged,
    #[error("payoff entry ({row}, {col}) is not finite")]
    NonFinite { row: usize, col: usize },
    #[error("{rows}x{cols} exceeds the {MAX_DIM}x{MAX_DIM} support-enumeration limit")]
    TooLarge { rows: usize, cols: usize },
    #[error("no support pair yields a certified solution (numerically singular)")]
    NumericallySingular,
}

/// Payoff matrix to the row player, who maximizes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatrixGame {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl MatrixGame {
    pub fn new(entries: Vec<Vec<f64>>) -> Result<Self, MatrixError> {
        let rows = entries.len();
        let cols = entries.first().map_or(0, Vec::len);
        if rows == 0 || cols == 0 {
            return Err(MatrixError::Empty);
        }
        if entries.iter().any(|r| r.len() != cols) {
            return Err(MatrixError::Ragged);
        }
        for (i, r) in entries.iter().enumerate() {
            if let Some(j) = r.iter().position(|a| !a.is_finite()) {
                return Err(MatrixError::NonFinite { row: i, col: j });
            }
        }
        Ok(Self {
            rows,
            cols,
            data: entries.into_iter().flatten().collect(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.cols).map(<[f64]>::to_vec).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                data.push(self.get(i, j));
            }
        }
        Self {
            rows: self.cols,
            cols: self.rows,
            data,
        }
    }

    /// `alpha * A + beta` entrywise.
    pub fn affine(&self, alpha: f64, beta: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| alpha * a + beta).collect(),
        }
    }

    /// `(x^T A)_j` for every column.
    pub fn row_mix(&self, x: &[f64]) -> Vec<f64> {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| x[i] * self.get(i, j)).sum())
            .collect()
    }

    /// `(A y)_i` for every row.
    pub fn col_mix(&self, y: &[f64]) -> Vec<f64> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j) * y[j]).sum())
            .collect()
    }

    fn scale(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, a| m.max(a.abs())).max(1.0)
    }
}

/// Value and optimal mixed strategies.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GameSolution {
    pub value: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl GameSolution {
    /// `min_j (x^T A)_j` and `max_i (A y)_i`.
    pub fn certificate(&self, game: &MatrixGame) -> (f64, f64) {
        let lower = game.row_mix(&self.x).into_iter().fold(f64::INFINITY, f64::min);
        let upper = game
            .col_mix(&self.y)
            .into_iter()
            .fold(f64::NEG_INFINITY, f64::max);
        (lower, upper)
    }

    pub fn is_certified(&self, game: &MatrixGame) -> bool {
        let (lower, upper) = self.certificate(game);
        lower >= self.value - CERT_TOL && upper <= self.value + CERT_TOL
    }
}

/// Guaranteed payoff `min_j (x^T A)_j` of a row strategy.
pub fn best_response_value(game: &MatrixGame, x: &[f64]) -> f64 {
    assert_eq!(x.len(), game.rows(), "strategy length must match rows");
    game.row_mix(x).into_iter().fold(f64::INFINITY, f64::min)
}

pub fn solve_matrix_game(game: &MatrixGame) -> Result<GameSolution, MatrixError> {
    if let Some(sol) = pure_saddle(game) {
        return Ok(sol);
    }
    if game.rows > MAX_DIM || game.cols > MAX_DIM {
        return Err(MatrixError::TooLarge {
            rows: game.rows,
            cols: game.cols,
        });
    }
    for k in 2..=game.rows.min(game.cols) {
        let row_sets = combinations(game.rows, k);
        let col_sets = combinations(game.cols, k);
        for rows in &row_sets {
            for cols in &col_sets {
                if let Some(sol) = try_support(game, rows, cols) {
                    return Ok(sol);
                }
            }
        }
    }
    Err(MatrixError::NumericallySingular)
}

/// Size-one supports: the first saddle point in row-major order.
fn pure_saddle(game: &MatrixGame) -> Option<GameSolution> {
    for i in 0..game.rows {
        for j in 0..game.cols {
            let a = game.get(i, j);
            let row_min = (0..game.cols).map(|c| game.get(i, c)).fold(f64::INFINITY, f64::min);
            let col_max = (0..game.rows)
                .map(|r| game.get(r, j))
                .fold(f64::NEG_INFINITY, f64::max);
            if row_min >= a - CERT_TOL && col_max <= a + CERT_TOL {
                let mut x = vec![0.0; game.rows];
                let mut y = vec![0.0; game.cols];
                x[i] = 1.0;
                y[j] = 1.0;
                return Some(GameSolution { value: a, x, y });
            }
        }
    }
    None
}

fn try_support(game: &MatrixGame, rows: &[usize], cols: &[usize]) -> Option<GameSolution> {
    let k = rows.len();
    let tiny = 1e-12 * game.scale();
    // x-system: unknowns x_rows..., v
    let mut sys = vec![vec![0.0; k + 2]; k + 1];
    for (e, &j) in cols.iter().enumerate() {
        for (u, &i) in rows.iter().enumerate() {
            sys[e][u] = game.get(i, j);
        }
        sys[e][k] = -1.0;
    }
    for u in 0..k {
        sys[k][u] = 1.0;
    }
    sys[k][k + 1] = 1.0;
    let xs = gauss_solve(sys, tiny)?;
    // y-system: unknowns y_cols..., w
    let mut sys = vec![vec![0.0; k + 2]; k + 1];
    for (e, &i) in rows.iter().enumerate() {
        for (u, &j) in cols.iter().enumerate() {
            sys[e][u] = game.get(i, j);
        }
        sys[e][k] = -1.0;
    }
    for u in 0..k {
        sys[k][u] = 1.0;
    }
    sys[k][k + 1] = 1.0;
    let ys = gauss_solve(sys, tiny)?;

    if xs[..k].iter().chain(&ys[..k]).any(|&p| p < -NONNEG_TOL) {
        return None;
    }
    let mut x = vec![0.0; game.rows];
    let mut y = vec![0.0; game.cols];
    for (u, &i) in rows.iter().enumerate() {
        x[i] = xs[u].max(0.0);
    }
    for (u, &j) in cols.iter().enumerate() {
        y[j] = ys[u].max(0.0);
    }
    normalize(&mut x)?;
    normalize(&mut y)?;
    let sol = GameSolution {
        value: xs[k],
        x,
        y,
    };
    sol.is_certified(game).then_some(sol)
}

fn normalize(p: &mut [f64]) -> Option<()> {
    let s: f64 = p.iter().sum();
    if s <= 0.0 {
        return None;
    }
    for q in p.iter_mut() {
        *q /= s;
    }
    Some(())
}

/// Solves an augmented square system by partial pivoting; `None` when a
/// pivot is below `tiny`.
fn gauss_solve(mut a: Vec<Vec<f64>>, tiny: f64) -> Option<Vec<f64>> {
    let n = a.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&r, &s| a[r][col].abs().total_cmp(&a[s][col].abs()))?;
        if a[pivot][col].abs() <= tiny {
            return None;
        }
        a.swap(col, pivot);
        for r in col + 1..n {
            let factor = a[r][col] / a[col][col];
            if factor == 0.0 {
                continue;
            }
            for c in col..=n {
                a[r][c] -= factor * a[col][c];
            }
        }
    }
    let mut out = vec![0.0; n];
    for r in (0..n).rev() {
        let mut acc = a[r][n];
        for c in r + 1..n {
            acc -= a[r][c] * out[c];
        }
        out[r] = acc / a[r][r];
    }
    Some(out)
}

/// All `k`-subsets of `0..n` in lexicographic order.
fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn game(rows: &[&[f64]]) -> MatrixGame {
        MatrixGame::new(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    #[test]
    fn matching_pennies() {
        let g = game(&[&[1.0, -1.0], &[-1.0, 1.0]]);
        let s = solve_matrix_game(&g).unwrap();
        assert!(s.value.abs() < 1e-12);
        assert!((s.x[0] - 0.5).abs() < 1e-12 && (s.y[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn identity_two_by_two() {
        let g = game(&[&[1.0, 0.0], &[0.0, 1.0]]);
        let s = solve_matrix_game(&g).unwrap();
        // (ad - bc) / (a - b - c + d) = 1 / 2
        assert!((s.value - 0.5).abs() < 1e-12);
        assert_eq!(s.x, vec![0.5, 0.5]);
        assert_eq!(s.y, vec![0.5, 0.5]);
    }

    #[test]
    fn dominant_row() {
        let g = game(&[&[1.0, 1.0], &[0.0, 0.0]]);
        let s = solve_matrix_game(&g).unwrap();
        assert_eq!(s.value, 1.0);
        assert_eq!(s.x, vec![1.0, 0.0]);
    }

    #[test]
    fn rock_paper_scissors_variant() {
        let g = game(&[&[0.0, 2.0, -1.0], &[-1.0, 0.0, 1.0], &[1.0, -1.0, 0.0]]);
        let s = solve_matrix_game(&g).unwrap();
        assert!((s.value - 1.0 / 12.0).abs() < 1e-12);
        assert!(s.is_certified(&g));
    }

    #[test]
    fn best_response_examples() {
        let g = game(&[&[1.0, 0.0], &[0.0, 1.0]]);
        assert_eq!(best_response_value(&g, &[0.5, 0.5]), 0.5);
        let g = game(&[&[0.3, 0.3, 0.3]]);
        assert_eq!(best_response_value(&g, &[1.0]), 0.3);
        let g = game(&[&[1.0, -1.0], &[-1.0, 1.0]]);
        assert_eq!(best_response_value(&g, &[1.0, 0.0]), -1.0);
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(MatrixGame::new(vec![]), Err(MatrixError::Empty));
        assert_eq!(
            MatrixGame::new(vec![vec![1.0], vec![1.0, 2.0]]),
            Err(MatrixError::Ragged)
        );
        assert_eq!(
            MatrixGame::new(vec![vec![1.0, f64::NAN]]),
            Err(MatrixError::NonFinite { row: 0, col: 1 })
        );
        let alternating = |p: usize| (0..9).map(|j| ((j + p) % 2) as f64).collect::<Vec<_>>();
        let big = MatrixGame::new(vec![alternating(0), alternating(1)]).unwrap();
        assert!(matches!(
            solve_matrix_game(&MatrixGame::new(vec![vec![0.5]; 12]).unwrap()),
            Ok(GameSolution { value, .. }) if value == 0.5
        ));
        assert!(matches!(
            solve_matrix_game(&big),
            Err(MatrixError::TooLarge { .. })
        ));
    }

    #[test]
    fn degenerate_games_still_certify() {
        let g = game(&[&[1.0, 1.0], &[1.0, 1.0]]);
        let s = solve_matrix_game(&g).unwrap();
        assert_eq!(s.value, 1.0);
        assert_eq!(s.x, vec![1.0, 0.0]);
        let g = game(&[&[2.0, 0.0, 1.0], &[0.0, 2.0, 1.0]]);
        let s = solve_matrix_game(&g).unwrap();
        assert!((s.value - 1.0).abs() < 1e-12);
        assert!(s.is_certified(&g));
    }

    #[test]
    fn combinations_are_lexicographic() {
        assert_eq!(
            combinations(4, 2),
            vec![
                vec![0, 1],
                vec![0, 2],
                vec![0, 3],
                vec![1, 2],
                vec![1, 3],
                vec![2, 3]
            ]
        );
    }
}
