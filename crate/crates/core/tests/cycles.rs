//! Cycle detection against a first-return oracle that shares no code with the section
//! machinery: plain integration, crossings of the axis found by cubic Hermite
//! interpolation between stored steps.

use quadcycle::cycles::{
    continue_family, count_distribution, count_distribution_with, default_sections, return_map, ContinuationConfig,
    ParamFamily, Stability, Termination,
};
use quadcycle::integrate::{integrate, IntegratorConfig, Terminal};
use quadcycle::rotation::RotationParamId;
use quadcycle::scenarios::wide_scan;
use quadcycle::systems::{CanonicalParams, GeneralQuadraticField, Params24, Point};

/// First return of the orbit through `(fx + sign * s, 0)` to the same half-axis, or `None` on escape.
fn oracle_return(f: &GeneralQuadraticField, fx: f64, sign: f64, s: f64, r_escape: f64) -> Option<f64> {
    let start = Point::new(fx + sign * s, 0.0);
    let cfg = IntegratorConfig { h_max: 0.01 * s.max(1.0), t_max: 200.0, r_escape, ..Default::default() };
    let seg = integrate(f, start, &cfg, None).ok()?;
    let up = f.at(start).1.signum();
    let mut left = false;
    for k in 1..seg.states.len() {
        let (a, b) = (seg.states[k - 1], seg.states[k]);
        if !left {
            left = b.y.signum() == -up;
            continue;
        }
        if a.y.signum() == -up && (b.y == 0.0 || b.y.signum() == up) && (a.x - fx) * sign > 0.0 {
            let h = seg.times[k] - seg.times[k - 1];
            let (fa, fb) = (f.at(a), f.at(b));
            let herm = |u: f64, p0: f64, p1: f64, m0: f64, m1: f64| {
                let (u2, u3) = (u * u, u * u * u);
                (2.0 * u3 - 3.0 * u2 + 1.0) * p0 + (u3 - 2.0 * u2 + u) * h * m0 + (-2.0 * u3 + 3.0 * u2) * p1 + (u3 - u2) * h * m1
            };
            let (mut lo, mut hi) = (0.0, 1.0);
            for _ in 0..80 {
                let m = 0.5 * (lo + hi);
                if herm(m, a.y, b.y, fa.1, fb.1).signum() == a.y.signum() {
                    lo = m;
                } else {
                    hi = m;
                }
            }
            return Some((herm(lo, a.x, b.x, fa.0, fb.0) - fx) * sign);
        }
        if seg.terminal == Terminal::Escape && k + 1 == seg.states.len() {
            return None;
        }
    }
    None
}

/// Approximate cycle offsets and stabilities from sign changes of the oracle displacement on a log grid.
fn oracle_cycles(f: &GeneralQuadraticField, fx: f64, sign: f64, (a, b): (f64, f64), n: usize, r_escape: f64) -> Vec<(f64, Stability)> {
    let mut out = vec![];
    let mut prev: Option<(f64, f64)> = None;
    for k in 0..n {
        let s = a * (b / a).powf(k as f64 / (n - 1) as f64);
        let Some(r) = oracle_return(f, fx, sign, s, r_escape) else { break };
        let d = r - s;
        if d.abs() <= 1e-7 * s {
            continue;
        }
        if let Some((sp, dp)) = prev {
            if dp * d < 0.0 {
                out.push(((sp * s).sqrt(), if dp > 0.0 { Stability::Stable } else { Stability::Unstable }));
            }
        }
        prev = Some((s, d));
    }
    out
}

#[test]
fn two_centres_return_identically() {
    let f = Params24::two_centers().compile();
    let r = oracle_return(&f, 0.0, 1.0, 0.5, 1e3).unwrap();
    assert!((r - 0.5).abs() <= 1e-8, "oracle {r}");
    for (_, sec) in default_sections(&f, 50.0).unwrap() {
        let r = return_map(&f, &sec, 0.5, &IntegratorConfig::default()).unwrap();
        assert!((r.s_next - 0.5).abs() <= 1e-8);
    }
    assert_eq!(count_distribution(&f).unwrap().label, "(0:0)");
}

#[test]
fn linear_centre_returns_exactly() {
    let f = GeneralQuadraticField { p01: -1.0, q10: 1.0, ..Default::default() };
    let sec = quadcycle::cycles::Section::new(&f, Point::ORIGIN, (1.0, 0.0), 1e-3, 10.0).unwrap();
    for s in [1e-3, 0.1, 1.0, 7.0] {
        let r = return_map(&f, &sec, s, &IntegratorConfig::default()).unwrap();
        assert!((r.s_next - s).abs() <= 1e-9 * s);
        assert!((r.period - 2.0 * std::f64::consts::PI).abs() <= 1e-8);
    }
}

#[test]
fn gamma_alone_creates_no_cycles() {
    let f = Params24::two_focus(0.0, 0.0, 0.0, 0.1).compile();
    let d = count_distribution(&f).unwrap();
    assert_eq!(d.label, "(0:0)");
    assert!(oracle_cycles(&f, 0.0, 1.0, (1e-2, 20.0), 60, 1e3).is_empty());
    assert!(oracle_cycles(&f, -2.0, -1.0, (1e-2, 20.0), 60, 1e3).is_empty());
}

#[test]
fn gamma_lambda_system_counts_match_the_oracle() {
    for (g, lam) in [(0.1, -0.12), (0.1, -0.2), (0.1, -0.09), (0.1, -0.06), (0.6, -0.61)] {
        let f = Params24::two_focus(lam, 0.0, 0.0, g).compile();
        let d = count_distribution(&f).unwrap();
        let oa = oracle_cycles(&f, 0.0, 1.0, (1e-2, 40.0), 160, 1e3);
        let ob = oracle_cycles(&f, -2.0, -1.0, (1e-2, 40.0), 160, 1e3);
        let got: Vec<Vec<Stability>> = d.foci.iter().map(|c| c.scan.cycles.iter().map(|c| c.stability).collect()).collect();
        let want: Vec<Vec<Stability>> = [oa.clone(), ob].iter().map(|v| v.iter().map(|c| c.1).collect()).collect();
        assert_eq!(got, want, "gamma {g}, lambda {lam}: {}", d.label);
        for (c, o) in d.foci[0].scan.cycles.iter().zip(&oa) {
            assert!((c.s_star / o.0 - 1.0).abs() < 0.2);
        }
    }
}

#[test]
fn two_to_one_state_matches_the_oracle() {
    let f = Params24::two_focus(-0.5205, -0.00244140625, 0.0, 0.52).compile();
    let d = count_distribution_with(&f, &wide_scan()).unwrap();
    assert_eq!(d.label, "(2:1)");
    let a: Vec<Stability> = d.foci[0].scan.cycles.iter().map(|c| c.stability).collect();
    assert_eq!(a, [Stability::Unstable, Stability::Stable]);
    let oa = oracle_cycles(&f, 0.0, 1.0, (1e-2, 50.0), 200, 1e6);
    assert_eq!(oa.iter().map(|c| c.1).collect::<Vec<_>>(), a);
    for w in d.foci.iter().flat_map(|c| c.scan.cycles.windows(2)) {
        assert_ne!(w[0].stability, w[1].stability, "adjacent cycles alternate");
    }
    // The cycle around B sits just inside the escape boundary, where the return map is steep.
    let b = &d.foci[1].scan.cycles;
    assert_eq!(b.len(), 1);
    // Outside it orbits escape instead of returning, so bracket the sign by hand.
    let s = b[0].s_star;
    let inside = oracle_return(&f, -2.0, -1.0, s * (1.0 - 1e-3), 1e6).unwrap();
    assert!(inside < s * (1.0 - 1e-3));
    assert!(oracle_return(&f, -2.0, -1.0, s * (1.0 + 1e-3), 1e6).map_or(true, |r| r > s * (1.0 + 1e-3)));
    let r = oracle_return(&f, -2.0, -1.0, s, 1e6).unwrap();
    assert!((r - s).abs() <= 1e-5 * s, "oracle return {r} at {s}");
    assert_eq!(b[0].stability, Stability::Unstable);
}

#[test]
fn refined_cycles_have_small_residual_and_close() {
    let cases = [
        (Params24::two_focus(-0.09, 0.0, 0.0, 0.1), Default::default()),
        (Params24::two_focus(-0.5205, -0.00244140625, 0.0, 0.52), wide_scan()),
    ];
    for (p, scan) in cases {
        let f = p.compile();
        for fc in count_distribution_with(&f, &scan).unwrap().foci {
            for c in fc.scan.cycles.iter().filter(|c| c.s_star < 100.0) {
                assert!(c.residual.abs() <= 1e-9, "residual {:e}", c.residual);
                let start = c.orbit[0];
                let cfg = IntegratorConfig { t_max: c.period, ..scan.integrator };
                let seg = integrate(&f, start, &cfg, None).unwrap();
                assert!(seg.last().dist(start) <= 1e-7, "closure {:e} at s = {}", seg.last().dist(start), c.s_star);
            }
        }
    }
}

#[test]
fn lambda_family_shrinks_into_the_focus_at_the_trace_zero() {
    let g = 0.1;
    let p = Params24::two_focus(-0.09, 0.0, 0.0, g);
    let seed = count_distribution(&p.compile()).unwrap().foci[0].scan.cycles[0].clone();
    let fam = ParamFamily::new(CanonicalParams::Canonical24(p), RotationParamId::Lambda).unwrap();
    let out = continue_family(&fam, (-0.09, -0.3), &seed, &ContinuationConfig::default()).unwrap();
    assert_eq!(out.termination, Termination::ShrinksToFocus);
    let end = out.samples[0];
    assert!((end.mu + g).abs() <= 1e-4 && end.s_star < 1e-4);
    assert!(out.samples.windows(2).all(|w| w[1].s_star > w[0].s_star && w[0].d_prime < 0.0));
}
