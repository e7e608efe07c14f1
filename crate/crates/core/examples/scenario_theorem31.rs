//! The four-stage construction at its default gamma. Pass a gamma as the first argument to try another.

use quadcycle::scenarios::{run_theorem31, Theorem31Config};

fn main() {
    let mut cfg = Theorem31Config::default();
    if let Some(g) = std::env::args().nth(1) {
        cfg.gamma = g.parse().expect("gamma");
    }
    let rep = run_theorem31(&cfg).unwrap();
    for st in &rep.stages {
        println!("[{}] {} = {:?}", st.name, st.param.map_or("-".into(), |p| p.to_string()), st.value);
        for a in &st.assertions {
            println!("    {} {}: {}", if a.pass { "ok  " } else { "FAIL" }, a.name, a.detail);
        }
    }
    println!("outcome: {}, final distribution {:?}", rep.outcome, rep.distribution);
}
