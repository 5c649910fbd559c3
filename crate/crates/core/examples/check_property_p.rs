// Runs the finite-horizon checker on a regular model and on the
// waiting-chain model where it fails.

use trajlens::corpus;
use trajlens::trajectory::{check_property_p, CheckConfig, Verdict};

fn main() {
    let cfg = CheckConfig::new(0.05);

    let good = corpus::two_cycles().unwrap();
    let rep = check_property_p(good.dp().unwrap(), &[50, 100, 200], &cfg, &good.limit_f64().unwrap()).unwrap();
    println!("{}: {:?}, worst |D| = {:.4}", good.name, rep.verdict, rep.worst_deviation());

    let bad = corpus::ls_nonregular(50).unwrap();
    let model = bad.dp().unwrap();
    let mut cfg = cfg.clone();
    cfg.starts = Some(bad.default_starts.clone());
    let rep = check_property_p(model, &[60, 80, 100], &cfg, &bad.limit_f64().unwrap()).unwrap();
    match rep.verdict {
        Verdict::Violated { witness } => {
            println!(
                "{}: VIOLATED at n = {}, D({}) = {}",
                bad.name,
                witness.play.len(),
                witness.t,
                witness.deviation
            );
            println!("  {} ...", witness.play_ids[..12].join(" "));
        }
        other => println!("{}: {other:?}", bad.name),
    }
}
