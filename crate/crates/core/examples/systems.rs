//! Compile the canonical families and classify their equilibria.

use quadcycle::systems::{compile_25, embed_26_into_canonical, equilibria, Params24, Params25, Params26};

fn main() {
    // The two-centre system and a perturbation of it with two foci.
    for p in [Params24::two_centers(), Params24::two_focus(-0.12, 0.0, 0.0, 0.1)] {
        let f = p.compile();
        println!("{p:?}");
        for e in equilibria(&f).expect("finite equilibria") {
            println!("  ({:+.4}, {:+.4}) {:?}, trace {:+.4}, det {:.4}", e.location.x, e.location.y, e.kind, e.trace, e.det);
        }
    }

    let f = compile_25(&Params25 { nu: 0, ..Default::default() }).unwrap();
    println!("nu = 0, zero params: P = {:?}, Q = {:?}", f.p(), f.q());

    let r = Params26 { m: -1.0, n: 0.3, lambda26: 0.2, a: 0.5, b: 0.4, c: -1.0 };
    let e = embed_26_into_canonical(&r).unwrap();
    println!("{r:?}\n  -> {:?}", e.canonical);
}
