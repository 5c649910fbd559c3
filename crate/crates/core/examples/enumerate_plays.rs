//! Lists every ε-optimal play of a short game, best first.

use trajlens::corpus;
use trajlens::finite_values;
use trajlens::trajectory::enumerate_eps_optimal_plays;

fn main() {
    let entry = corpus::ls_nonregular(4).unwrap();
    let model = entry.dp().unwrap();
    let n = 8;
    let table = finite_values(model, n);
    let a1 = model.index_of("a1").unwrap();
    println!("v_{n}(a1) = {}", table.value(n, a1));

    let found = enumerate_eps_optimal_plays(model, &table, a1, n, 0.125, 1000);
    for p in &found.plays {
        println!("{:.3}  {}", p.total() / n as f64, p.labels(model).join(" "));
    }
    if found.limit_reached {
        println!("(truncated)");
    }
}
