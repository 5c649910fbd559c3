//! Does the optimal long play guarantee v - ε at every horizon past N?

use trajlens::corpus;
use trajlens::trajectory::uniform_value_probe;

fn main() {
    let regular = corpus::two_state().unwrap();
    let v = regular.limit_f64().unwrap();
    let p = uniform_value_probe(regular.dp().unwrap(), 0, 0.1, 10, 200, v[0]);
    println!("{}: passes {} ({:?}, {:?})", regular.name, p.passes(), p.guarantee_failure, p.cap_failure);

    let chain = corpus::ls_nonregular(40).unwrap();
    let m = chain.dp().unwrap();
    let a1 = m.index_of("a1").unwrap();
    let p = uniform_value_probe(m, a1, 0.1, 20, 60, chain.limit_f64().unwrap()[a1]);
    println!(
        "{}: passes {}, play falls short first at n = {:?}, v_n too high first at n = {:?}",
        chain.name,
        p.passes(),
        p.guarantee_failure,
        p.cap_failure
    );
}
