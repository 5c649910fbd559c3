//! Discounted checker with the time change n(t; lambda).

use trajlens::corpus;
use trajlens::trajectory::{check_property_pprime, discounted_stage, effective_horizon, CheckConfig, DiscountedCheck};

fn main() {
    for lambda in [0.5, 0.05, 0.01] {
        let stages: Vec<_> = [0.25, 0.5, 0.6, 0.9]
            .iter()
            .map(|&t| discounted_stage(t, lambda).unwrap())
            .collect();
        println!(
            "lambda {lambda}: n(t) at t = .25 .5 .6 .9 -> {stages:?}, depth for eps/10 = {}",
            effective_horizon(lambda, 0.005)
        );
    }

    let cfg = CheckConfig::new(0.05);
    let dc = DiscountedCheck::new(vec![0.05, 0.02, 0.01]);
    for entry in corpus::simple_regulars().unwrap() {
        let rep = check_property_pprime(entry.dp().unwrap(), &dc, &cfg, &entry.limit_f64().unwrap()).unwrap();
        println!("{:<14} {:?}  worst |D| {:.4}", entry.name, rep.verdict, rep.worst_deviation());
    }
}
