//! Continue the cycle around (0,0) in lambda and the two-to-one inner pair in alpha.

use quadcycle::cycles::{continue_family, scan_with, ContinuationConfig, ParamFamily, ScanConfig, Section};
use quadcycle::rotation::RotationParamId;
use quadcycle::scenarios::{wide_scan, FOCUS_A};
use quadcycle::systems::{CanonicalParams, Params24};

fn seed(p: &Params24, scan: &ScanConfig) -> quadcycle::cycles::LimitCycle {
    let f = p.compile();
    let sec = Section::new(&f, FOCUS_A, (1.0, 0.0), 1e-3, scan.s_max.min(50.0)).unwrap();
    scan_with(&f, &sec, scan).unwrap().cycles.into_iter().next().expect("a cycle at the seed")
}

fn main() {
    let p = Params24::two_focus(-0.09, 0.0, 0.0, 0.1);
    let fam = ParamFamily::new(CanonicalParams::Canonical24(p), RotationParamId::Lambda).unwrap();
    let cfg = ContinuationConfig::default();
    let s = seed(&p, &cfg.scan);
    for end in [-0.2, 0.0] {
        let f = continue_family(&fam, (-0.09, end), &s, &cfg).unwrap();
        let last = f.last(end > -0.09).unwrap();
        println!(
            "lambda -> {end}: {} samples, {:?} at lambda = {:.8}, s* = {:.3e}, period {:.3}",
            f.samples.len(),
            f.termination,
            last.mu,
            last.s_star,
            last.period
        );
    }

    let p = Params24::two_focus(-0.555, -0.006, 0.0, 0.55);
    let cfg = ContinuationConfig { scan: wide_scan(), dmu_init: 1e-4, dmu_max: 1e-3, ..Default::default() };
    let fam = ParamFamily::new(CanonicalParams::Canonical24(p), RotationParamId::Alpha).unwrap();
    let f = continue_family(&fam, (-0.006, -0.02), &seed(&p, &cfg.scan), &cfg).unwrap();
    for fold in &f.folds {
        println!(
            "fold at alpha = {:.12} (bracket width {:.1e}), s = {:.6}, d' = {:.1e}, branch d' = {:?}",
            fold.mu_fold,
            (fold.mu_bracket.1 - fold.mu_bracket.0).abs(),
            fold.s_fold,
            fold.d_prime,
            fold.branch_d_prime
        );
    }
}
