//! Cycle inventory of a two-to-one configuration found by the sweep.

use quadcycle::cycles::count_distribution_with;
use quadcycle::scenarios::wide_scan;
use quadcycle::systems::Params24;

fn main() {
    let p = Params24::two_focus(-0.5205, -0.00244140625, 0.0, 0.52);
    let d = count_distribution_with(&p.compile(), &wide_scan()).unwrap();
    println!("{p:?}\ndistribution {}", d.label);
    for f in &d.foci {
        println!("around ({}, {}), {:?}, trace {:+.5}", f.focus.x, f.focus.y, f.kind, f.trace);
        for c in &f.scan.cycles {
            println!(
                "  s* = {:<14.8} period {:<10.4} d' = {:+.3e}  {:?}",
                c.s_star, c.period, c.d_prime, c.stability
            );
        }
    }
}
