//! One orbit of the two-centre system, a section event and a time reversal.

use quadcycle::integrate::{integrate, IntegratorConfig, SectionEvent};
use quadcycle::systems::{Params24, Point};

fn main() {
    let f = Params24::two_centers().compile();
    let start = Point::new(0.5, 0.0);
    let cfg = IntegratorConfig { t_max: 100.0, ..Default::default() };

    // First return to the positive x-axis, crossing upwards.
    let ev = SectionEvent { origin: Point::ORIGIN, direction: (1.0, 0.0), orientation: 1.0, min_offset: 1e-3 };
    let seg = integrate(&f, start, &cfg, Some(&ev)).unwrap();
    let end = seg.last();
    println!(
        "return after t = {:.12} at ({:.15}, {:.1e}), {:?}, {} steps",
        seg.duration(),
        end.x,
        end.y,
        seg.terminal,
        seg.states.len() - 1
    );

    let fw = integrate(&f, Point::new(0.3, 0.4), &IntegratorConfig { t_max: 5.0, ..cfg }, None).unwrap();
    let bw = integrate(&f.reversed(), fw.last(), &IntegratorConfig { t_max: 5.0, ..cfg }, None).unwrap();
    println!("forward then back: error {:.2e}", bw.last().dist(Point::new(0.3, 0.4)));

    let far = integrate(&Params24::two_focus(-0.2, 0.0, 0.0, 0.1).compile(), Point::new(50.0, 0.0), &cfg, None).unwrap();
    println!("from (50, 0): {:?} at t = {:.4}", far.terminal, far.duration());
}
