//! Solves a few matrix games and prints the duality certificate.

use trajlens::{solve_matrix_game, MatrixGame};

fn main() {
    let games = [
        vec![vec![1.0, -1.0], vec![-1.0, 1.0]],
        vec![vec![3.0, 1.0, 4.0], vec![1.0, 5.0, 9.0], vec![2.0, 6.0, 5.0]],
        vec![vec![0.0, 2.0], vec![3.0, 1.0], vec![1.0, 1.5]],
    ];
    for a in games {
        let g = MatrixGame::new(a).unwrap();
        let sol = solve_matrix_game(&g).unwrap();
        let (lo, hi) = sol.certificate(&g);
        println!("value {:.4}  x {:.3?}  y {:.3?}  certificate [{lo:.4}, {hi:.4}]", sol.value, sol.x, sol.y);
    }
}
