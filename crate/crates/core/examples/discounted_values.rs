//! Discounted values for shrinking lambda, next to the long-run averages.

use trajlens::corpus;
use trajlens::discounted_value;

fn main() {
    let entry = corpus::two_cycles().unwrap();
    let model = entry.dp().unwrap();
    println!("limit: {:?}", entry.limit_f64().unwrap());
    for lambda in [0.5, 0.1, 0.01, 0.001] {
        let v = discounted_value(model, lambda, 1e-12);
        println!("lambda {lambda:<6} iterations {:>6}  v = {:.5?}", v.iterations, v.values);
    }
}
