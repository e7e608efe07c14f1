//! Write portraits of the two-centre system and of a two-to-one configuration.
//! The output directory is the first argument, the current directory by default.

use std::path::PathBuf;

use quadcycle::cycles::{count_distribution_with, default_sections};
use quadcycle::portrait::{render, Detections, Overlays, PortraitSpec};
use quadcycle::scenarios::wide_scan;
use quadcycle::systems::{equilibria, Params24};

fn main() {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| ".".into()));
    let cases = [
        ("two_centers.svg", Params24::two_centers()),
        ("two_to_one.svg", Params24::two_focus(-0.5205, -0.00244140625, 0.0, 0.52)),
    ];
    for (name, p) in cases {
        let f = p.compile();
        let scan = wide_scan();
        let d = count_distribution_with(&f, &scan).unwrap();
        let det = Detections {
            equilibria: equilibria(&f).unwrap(),
            cycles: d.foci.iter().flat_map(|c| c.scan.cycles.clone()).collect(),
            sections: default_sections(&f, 3.0).unwrap().into_iter().map(|(_, s)| s).collect(),
        };
        let spec = PortraitSpec {
            overlays: Overlays { sections: true, disc_inset: true, ..Default::default() },
            ..Default::default()
        };
        let out = render(&f, &det, &spec).unwrap();
        let path = dir.join(name);
        std::fs::write(&path, &out.svg).unwrap();
        println!("{} ({}, {} orbits, {} skipped)", path.display(), d.label, out.orbits.len(), out.skipped.len());
    }
}
