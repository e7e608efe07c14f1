use quadcycle::scenarios::{run_monotone_family_check, MonotoneConfig};

fn main() {
    let rep = run_monotone_family_check(&MonotoneConfig::default()).unwrap();
    for st in &rep.stages {
        println!("[{}]", st.name);
        for a in &st.assertions {
            println!("    {} {}: {}", if a.pass { "ok  " } else { "FAIL" }, a.name, a.detail);
        }
        for n in &st.notes {
            println!("    note: {n}");
        }
    }
    println!("outcome: {}", rep.outcome);
}
