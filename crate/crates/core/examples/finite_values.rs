//! n-stage values of a small dynamic program, and one optimal play.

use trajlens::trajectory::optimal_play;
use trajlens::{finite_values, DpModel};

fn main() {
    let model = DpModel::from_labels(&[
        ("wait", 0.0, vec!["wait", "work"]),
        ("work", 1.0, vec!["rest"]),
        ("rest", 0.0, vec!["work", "wait"]),
    ])
    .unwrap();
    let table = finite_values(&model, 12);
    for n in [1, 2, 3, 6, 12] {
        println!("v_{n:<2} = {:?}", table.values(n));
    }
    let play = optimal_play(&model, &table, 0, 12);
    println!("optimal 12-stage play from wait: {}", play.labels(&model).join(" "));
}
