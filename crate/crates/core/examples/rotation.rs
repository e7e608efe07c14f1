//! Rotation determinants: closed forms against the exact parameter partials, and the
//! sense in which each parameter turns the field.

use quadcycle::rotation::{delta_closed, delta_numeric, random_inputs, sampled_direction_check, RotationParamId};

fn main() {
    let inputs = random_inputs(10_000, 7);
    for id in RotationParamId::ALL {
        let worst = inputs
            .iter()
            .map(|(p, pt)| {
                let c = delta_closed(id, p, *pt);
                (c - delta_numeric(id, p, *pt)).abs() / (1.0 + c.abs())
            })
            .fold(0.0, f64::max);
        let rep = sampled_direction_check(id, &inputs, 1e-5).unwrap();
        println!(
            "{id:>6}: max scaled difference {worst:.2e}, direction law {}/{} ({:.2}%)",
            rep.passed,
            rep.checked,
            100.0 * rep.pass_rate()
        );
    }
}
