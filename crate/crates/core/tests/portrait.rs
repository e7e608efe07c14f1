use quadcycle::cycles::{count_distribution_with, Stability};
use quadcycle::integrate::Terminal;
use quadcycle::portrait::{render, Bounds, Detections, PortraitSpec};
use quadcycle::scenarios::wide_scan;
use quadcycle::systems::{equilibria, GeneralQuadraticField, Params24, Point};

fn detections(f: &GeneralQuadraticField) -> Detections {
    let d = count_distribution_with(f, &wide_scan()).unwrap();
    Detections {
        equilibria: equilibria(f).unwrap(),
        cycles: d.foci.into_iter().flat_map(|c| c.scan.cycles).collect(),
        sections: vec![],
    }
}

#[test]
fn two_centres_portrait_is_mirror_symmetric() {
    let f = Params24::two_centers().compile();
    let spec = PortraitSpec { seed_grid: (6, 6), ..Default::default() };
    let p = render(&f, &Detections::default(), &spec).unwrap();
    assert!(p.skipped.is_empty());
    let mut compared = 0;
    for a in &p.orbits {
        let Some(b) = p.orbits.iter().find(|b| b.seed.x == a.seed.x && (b.seed.y + a.seed.y).abs() < 1e-12) else {
            continue;
        };
        if a.forward_terminal != Terminal::TimeLimit || b.backward_terminal != Terminal::TimeLimit {
            continue;
        }
        let (u, v) = (a.forward.last().unwrap(), b.backward.last().unwrap());
        let err = u.dist(Point::new(v.x, -v.y));
        assert!(err <= 1e-6 * (1.0 + u.norm()), "seed {:?}: reflection error {err:e}", a.seed);
        compared += 1;
    }
    assert!(compared >= 20, "{compared} mirrored pairs");
}

#[test]
fn linear_centre_draws_circles() {
    let f = GeneralQuadraticField { p01: -1.0, q10: 1.0, ..Default::default() };
    let spec = PortraitSpec { bounds: Bounds::new(-2.0, 2.0, -2.0, 2.0), seed_grid: (5, 5), ..Default::default() };
    let p = render(&f, &Detections { equilibria: equilibria(&f).unwrap(), ..Default::default() }, &spec).unwrap();
    for o in &p.orbits {
        let r: Vec<f64> = o.forward.iter().chain(&o.backward).map(|q| q.norm()).collect();
        let mean = r.iter().sum::<f64>() / r.len() as f64;
        let var = r.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / r.len() as f64;
        assert!(var <= 1e-6, "seed {:?}: radius variance {var:e}", o.seed);
    }
    // P = -y: only the axis is a nullcline line, the constant cofactor draws nothing.
    let nc = p.svg.split("<g class=\"nullclines\"").nth(1).unwrap().split("</g>").next().unwrap();
    assert_eq!(nc.matches("<line").count(), 1);
}

#[test]
fn two_to_one_cycles_are_closed_and_styled() {
    let f = Params24::two_focus(-0.5205, -0.00244140625, 0.0, 0.52).compile();
    let det = detections(&f);
    let st: Vec<Stability> = det.cycles.iter().map(|c| c.stability).collect();
    assert_eq!(st, [Stability::Unstable, Stability::Stable, Stability::Unstable]);
    for c in &det.cycles {
        let (a, b) = (c.orbit[0], *c.orbit.last().unwrap());
        assert!(a.dist(b) <= 1e-6, "cycle at s = {} open by {:e}", c.s_star, a.dist(b));
    }
    let spec = PortraitSpec { seed_grid: (3, 3), ..Default::default() };
    let svg = render(&f, &det, &spec).unwrap().svg;
    let cycles = svg.split("<g class=\"cycles\"").nth(1).unwrap().split("</g>").next().unwrap();
    assert_eq!(cycles.matches("<path").count(), 3);
    assert_eq!(cycles.matches("stroke-dasharray=\"7 4\"").count(), 2);
    assert_eq!(cycles.matches("Z\"").count(), 3);
    // Both lines of the factored nullcline.
    let nc = svg.split("<g class=\"nullclines\"").nth(1).unwrap().split("</g>").next().unwrap();
    assert_eq!(nc.matches("<line").count(), 2);
}

#[test]
fn rendering_is_byte_identical() {
    let f = Params24::two_focus(-0.12, 0.0, 0.0, 0.1).compile();
    let det = detections(&f);
    let mut spec = PortraitSpec { seed_grid: (4, 4), ..Default::default() };
    spec.overlays.disc_inset = true;
    spec.overlays.sections = true;
    let a = render(&f, &det, &spec).unwrap();
    let b = render(&f, &det, &spec).unwrap();
    assert_eq!(a.svg, b.svg);
    assert!(a.svg.contains("class=\"disc\""));
}
