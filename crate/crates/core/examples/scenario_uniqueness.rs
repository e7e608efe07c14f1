use quadcycle::scenarios::{run_uniqueness_experiment, UniquenessConfig};

fn main() {
    let cfg = UniquenessConfig { n_gamma: 4, n_lambda: 4, ..Default::default() };
    let rep = run_uniqueness_experiment(&cfg).unwrap();
    for st in &rep.stages {
        println!("[{}]", st.name);
        for a in &st.assertions {
            println!("    {} {}: {}", if a.pass { "ok  " } else { "FAIL" }, a.name, a.detail);
        }
    }
    println!("outcome: {}", rep.outcome);
}
