//! Long-run value estimates: Cauchy windows, the discounted gap, and the
//! max-mean-cycle oracle.

use trajlens::corpus;
use trajlens::cycle::max_mean_cycle_values;
use trajlens::dp::{check_monotone_limit, limit_value_estimate};

fn main() {
    for entry in corpus::simple_regulars().unwrap() {
        let m = entry.dp().unwrap();
        let (est, rep) = limit_value_estimate(m, 512, 1e-2);
        let oracle = max_mean_cycle_values(m);
        println!("{}", entry.name);
        println!("  v_512  {est:.4?}");
        println!("  cycles {oracle:.4?}");
        println!("  discounted gap {:.2e}, flagged {}", rep.discounted_gap, rep.non_converged);
        for w in rep.cauchy_gaps.iter().take(3) {
            println!("  |v_{} - v_{}| = {:.2e}", w.short, w.long, w.gap);
        }
        println!("  monotone violations {}", check_monotone_limit(m, &oracle, 0.0).len());
    }
}
