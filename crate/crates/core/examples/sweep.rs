//! Search a small grid for the two-to-one arrangement and verify the first hit.

use quadcycle::scenarios::{run_sweep, SweepConfig};

fn main() {
    let rep = run_sweep(&SweepConfig::default()).unwrap();
    println!("{} grid points, {} candidates", rep.evaluated, rep.candidates);
    for h in &rep.hits {
        println!("{:?} -> {} (verified: {})", h.params, h.inventory.label, h.pass);
        for c in &h.verified {
            println!(
                "  around ({}, {}): s = {:.8}, {:?}, residual {:.1e}, closure {:.1e}",
                c.encircles.x, c.encircles.y, c.s_star, c.stability, c.residual, c.closure
            );
        }
    }
}
