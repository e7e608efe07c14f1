//! Phase portraits as SVG documents.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cycles::{LimitCycle, Section, Stability};
use crate::integrate::{integrate, IntegrateError, IntegratorConfig, Terminal};
use crate::systems::{Equilibrium, EquilibriumKind, GeneralQuadraticField, Point};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Bounds {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Self {
        Self { x_min, x_max, y_min, y_max }
    }

    pub fn is_valid(&self) -> bool {
        [self.x_min, self.x_max, self.y_min, self.y_max].iter().all(|v| v.is_finite())
            && self.x_max > self.x_min
            && self.y_max > self.y_min
    }

    fn diagonal(&self) -> f64 {
        (self.x_max - self.x_min).hypot(self.y_max - self.y_min)
    }

    /// The part of `c + a x + b y = 0` inside the box.
    fn clip_line(&self, (c, a, b): (f64, f64, f64)) -> Option<(Point, Point)> {
        let mut pts = Vec::new();
        if b != 0.0 {
            for x in [self.x_min, self.x_max] {
                let y = -(c + a * x) / b;
                if y >= self.y_min && y <= self.y_max {
                    pts.push(Point::new(x, y));
                }
            }
        }
        if a != 0.0 {
            for y in [self.y_min, self.y_max] {
                let x = -(c + b * y) / a;
                if x >= self.x_min && x <= self.x_max {
                    pts.push(Point::new(x, y));
                }
            }
        }
        pts.dedup_by(|p, q| p.dist(*q) < 1e-12);
        (pts.len() >= 2).then(|| (pts[0], pts[pts.len() - 1]))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Style {
    pub width_px: f64,
    pub orbit_width: f64,
    pub cycle_width: f64,
    pub marker_radius: f64,
}

impl Default for Style {
    fn default() -> Self {
        Self { width_px: 800.0, orbit_width: 0.8, cycle_width: 2.2, marker_radius: 4.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Overlays {
    pub nullclines: bool,
    pub cycles: bool,
    pub sections: bool,
    pub disc_inset: bool,
}

impl Default for Overlays {
    fn default() -> Self {
        Self { nullclines: true, cycles: true, sections: false, disc_inset: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PortraitSpec {
    pub bounds: Bounds,
    /// Orbits start from an `nx` by `ny` grid over the viewport, plus any extra seeds.
    pub seed_grid: (usize, usize),
    pub extra_seeds: Vec<Point>,
    /// Integration time in each direction from every seed.
    pub orbit_time: f64,
    pub integrator: IntegratorConfig,
    pub style: Style,
    pub overlays: Overlays,
}

impl Default for PortraitSpec {
    fn default() -> Self {
        Self {
            bounds: Bounds::new(-4.0, 2.0, -3.0, 3.0),
            seed_grid: (7, 7),
            extra_seeds: vec![],
            orbit_time: 20.0,
            integrator: IntegratorConfig { h_max: 0.05, t_max: 20.0, ..Default::default() },
            style: Style::default(),
            overlays: Overlays::default(),
        }
    }
}

impl PortraitSpec {
    pub fn seeds(&self) -> Vec<Point> {
        let (nx, ny) = self.seed_grid;
        let b = &self.bounds;
        let at = |k: usize, n: usize, lo: f64, hi: f64| lo + (hi - lo) * (k as f64 + 0.5) / n as f64;
        let mut out: Vec<Point> = (0..ny)
            .flat_map(|j| (0..nx).map(move |i| Point::new(at(i, nx, b.x_min, b.x_max), at(j, ny, b.y_min, b.y_max))))
            .collect();
        out.extend(self.extra_seeds.iter().copied());
        out
    }
}

/// What the cycle and equilibrium code found, drawn on top of the orbits.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Detections {
    pub equilibria: Vec<Equilibrium>,
    pub cycles: Vec<LimitCycle>,
    pub sections: Vec<Section>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrbitTrace {
    pub seed: Point,
    pub forward: Vec<Point>,
    pub backward: Vec<Point>,
    pub forward_terminal: Terminal,
    pub backward_terminal: Terminal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Portrait {
    pub svg: String,
    pub orbits: Vec<OrbitTrace>,
    /// Seeds whose integration failed, with the reason.
    pub skipped: Vec<(Point, String)>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PortraitError {
    #[error("invalid portrait spec: {0}")]
    InvalidSpec(String),
}

fn trace(f: &GeneralQuadraticField, seed: Point, spec: &PortraitSpec) -> Result<OrbitTrace, IntegrateError> {
    let cfg = IntegratorConfig {
        t_max: spec.orbit_time,
        r_escape: spec.integrator.r_escape.min(10.0 * (spec.bounds.diagonal() + seed.norm())),
        ..spec.integrator
    };
    let fw = integrate(f, seed, &cfg, None)?;
    let bw = integrate(&f.reversed(), seed, &cfg, None)?;
    Ok(OrbitTrace {
        seed,
        forward_terminal: fw.terminal,
        backward_terminal: bw.terminal,
        forward: fw.states,
        backward: bw.states,
    })
}

struct Canvas {
    b: Bounds,
    w: f64,
    h: f64,
}

impl Canvas {
    fn px(&self, p: Point) -> (f64, f64) {
        let x = (p.x - self.b.x_min) / (self.b.x_max - self.b.x_min) * self.w;
        let y = (self.b.y_max - p.y) / (self.b.y_max - self.b.y_min) * self.h;
        (x, y)
    }

    fn path(&self, pts: &[Point], closed: bool) -> String {
        polyline(pts.iter().map(|p| self.px(*p)), closed)
    }
}

/// SVG path data with vertices closer than half a pixel to the last kept one dropped.
/// The first and last vertices are always kept.
fn polyline(pts: impl ExactSizeIterator<Item = (f64, f64)>, closed: bool) -> String {
    let n = pts.len();
    let mut d = String::new();
    let mut last: Option<(f64, f64)> = None;
    for (k, (x, y)) in pts.enumerate() {
        if let Some((lx, ly)) = last {
            if k + 1 < n && (x - lx).hypot(y - ly) < 0.5 {
                continue;
            }
        }
        let _ = write!(d, "{}{x:.3},{y:.3}", if last.is_none() { "M" } else { " L" });
        last = Some((x, y));
    }
    if closed {
        d.push_str(" Z");
    }
    d
}

fn stability_style(s: Stability) -> (&'static str, &'static str) {
    match s {
        Stability::Stable => ("#1f6fb4", ""),
        Stability::Unstable => ("#c0392b", " stroke-dasharray=\"7 4\""),
        Stability::SemiStable => ("#8e44ad", " stroke-dasharray=\"2 3\""),
    }
}

fn marker(out: &mut String, c: &Canvas, e: &Equilibrium, r: f64) {
    let (x, y) = c.px(e.location);
    match e.kind {
        EquilibriumKind::Saddle => {
            let _ = writeln!(
                out,
                "<path class=\"saddle\" d=\"M{:.3},{:.3} L{:.3},{:.3} M{:.3},{:.3} L{:.3},{:.3}\" stroke=\"black\" stroke-width=\"1.5\"/>",
                x - r, y - r, x + r, y + r, x - r, y + r, x + r, y - r
            );
        }
        EquilibriumKind::CenterCandidate => {
            let _ = writeln!(
                out,
                "<circle class=\"center\" cx=\"{x:.3}\" cy=\"{y:.3}\" r=\"{r:.3}\" fill=\"white\" stroke=\"black\"/><circle cx=\"{x:.3}\" cy=\"{y:.3}\" r=\"{:.3}\" fill=\"black\"/>",
                r * 0.35
            );
        }
        EquilibriumKind::Degenerate => {
            let _ = writeln!(
                out,
                "<rect class=\"degenerate\" x=\"{:.3}\" y=\"{:.3}\" width=\"{:.3}\" height=\"{:.3}\" fill=\"gray\"/>",
                x - r, y - r, 2.0 * r, 2.0 * r
            );
        }
        _ => {
            let fill = if e.trace < 0.0 { "black" } else { "white" };
            let _ = writeln!(
                out,
                "<circle class=\"anti-saddle\" cx=\"{x:.3}\" cy=\"{y:.3}\" r=\"{r:.3}\" fill=\"{fill}\" stroke=\"black\"/>"
            );
        }
    }
}

/// Map of the plane onto the unit disc, `p / (1 + |p|)`.
pub fn to_disc(p: Point) -> Point {
    let k = 1.0 / (1.0 + p.norm());
    Point::new(p.x * k, p.y * k)
}

/// Renders `f` with orbits from the seed grid and the given detections.
pub fn render(f: &GeneralQuadraticField, det: &Detections, spec: &PortraitSpec) -> Result<Portrait, PortraitError> {
    if !spec.bounds.is_valid() {
        return Err(PortraitError::InvalidSpec(format!("bounds {:?}", spec.bounds)));
    }
    if !(spec.orbit_time > 0.0 && spec.style.width_px > 0.0) {
        return Err(PortraitError::InvalidSpec("orbit_time and width_px must be positive".into()));
    }
    let seeds = spec.seeds();
    let results: Vec<Result<OrbitTrace, IntegrateError>> = seeds.par_iter().map(|s| trace(f, *s, spec)).collect();
    let mut orbits = Vec::new();
    let mut skipped = Vec::new();
    for (s, r) in seeds.iter().zip(results) {
        match r {
            Ok(t) => orbits.push(t),
            Err(e) => skipped.push((*s, e.to_string())),
        }
    }

    let b = spec.bounds;
    let w = spec.style.width_px;
    let h = w * (b.y_max - b.y_min) / (b.x_max - b.x_min);
    let c = Canvas { b, w, h };
    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w:.0}\" height=\"{h:.0}\" viewBox=\"0 0 {w:.3} {h:.3}\">"
    );
    let _ = writeln!(out, "<metadata>{{\"orbits\":{},\"skipped\":{}}}</metadata>", orbits.len(), skipped.len());
    let _ = writeln!(out, "<defs><clipPath id=\"view\"><rect x=\"0\" y=\"0\" width=\"{w:.3}\" height=\"{h:.3}\"/></clipPath></defs>");
    let _ = writeln!(out, "<rect x=\"0\" y=\"0\" width=\"{w:.3}\" height=\"{h:.3}\" fill=\"white\" stroke=\"black\"/>");
    let _ = writeln!(out, "<g clip-path=\"url(#view)\">");

    let _ = writeln!(out, "<g class=\"orbits\" fill=\"none\" stroke=\"#999\" stroke-width=\"{:.3}\">", spec.style.orbit_width);
    for t in &orbits {
        for pts in [&t.backward, &t.forward] {
            if pts.len() > 1 {
                let _ = writeln!(out, "<path d=\"{}\"/>", c.path(pts, false));
            }
        }
    }
    out.push_str("</g>\n");

    if spec.overlays.nullclines {
        if let Some(cof) = f.y_factor_of_p() {
            out.push_str("<g class=\"nullclines\" stroke=\"#2e8b57\" stroke-width=\"1.2\">\n");
            for line in [(0.0, 0.0, 1.0), cof] {
                if let Some((p, q)) = b.clip_line(line) {
                    let ((x1, y1), (x2, y2)) = (c.px(p), c.px(q));
                    let _ = writeln!(out, "<line x1=\"{x1:.3}\" y1=\"{y1:.3}\" x2=\"{x2:.3}\" y2=\"{y2:.3}\"/>");
                }
            }
            out.push_str("</g>\n");
        }
    }

    if spec.overlays.sections {
        out.push_str("<g class=\"sections\" stroke=\"#e67e22\" stroke-width=\"1\">\n");
        for s in &det.sections {
            let ((x1, y1), (x2, y2)) = (c.px(s.point(s.s_min)), c.px(s.point(s.s_max)));
            let _ = writeln!(out, "<line x1=\"{x1:.3}\" y1=\"{y1:.3}\" x2=\"{x2:.3}\" y2=\"{y2:.3}\"/>");
        }
        out.push_str("</g>\n");
    }

    if spec.overlays.cycles {
        let _ = writeln!(out, "<g class=\"cycles\" fill=\"none\" stroke-width=\"{:.3}\">", spec.style.cycle_width);
        for cy in &det.cycles {
            let (color, dash) = stability_style(cy.stability);
            let _ = writeln!(out, "<path stroke=\"{color}\"{dash} d=\"{}\"/>", c.path(&cy.orbit, true));
        }
        out.push_str("</g>\n");
    }

    out.push_str("<g class=\"equilibria\">\n");
    for e in &det.equilibria {
        marker(&mut out, &c, e, spec.style.marker_radius);
    }
    out.push_str("</g>\n</g>\n");

    if spec.overlays.disc_inset {
        let r = 0.18 * w.min(h);
        let (cx, cy) = (w - r - 10.0, r + 10.0);
        let map = |p: Point| {
            let q = to_disc(p);
            Point::new(cx + r * q.x, cy - r * q.y)
        };
        let path = |pts: &[Point], closed: bool| {
            polyline(pts.iter().map(|p| {
                let q = map(*p);
                (q.x, q.y)
            }), closed)
        };
        out.push_str("<g class=\"disc\">\n");
        let _ = writeln!(out, "<circle cx=\"{cx:.3}\" cy=\"{cy:.3}\" r=\"{r:.3}\" fill=\"white\" stroke=\"black\"/>");
        let _ = writeln!(out, "<g fill=\"none\" stroke=\"#999\" stroke-width=\"0.5\">");
        for t in &orbits {
            for pts in [&t.backward, &t.forward] {
                if pts.len() > 1 {
                    let _ = writeln!(out, "<path d=\"{}\"/>", path(pts, false));
                }
            }
        }
        out.push_str("</g>\n");
        for cy in &det.cycles {
            let (color, dash) = stability_style(cy.stability);
            let _ = writeln!(out, "<path fill=\"none\" stroke=\"{color}\"{dash} d=\"{}\"/>", path(&cy.orbit, true));
        }
        for e in &det.equilibria {
            let q = map(e.location);
            let _ = writeln!(out, "<circle cx=\"{:.3}\" cy=\"{:.3}\" r=\"2\" fill=\"black\"/>", q.x, q.y);
        }
        out.push_str("</g>\n");
    }
    out.push_str("</svg>\n");
    Ok(Portrait { svg: out, orbits, skipped })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_clipping() {
        let b = Bounds::new(-4.0, 2.0, -3.0, 3.0);
        let (p, q) = b.clip_line((0.0, 0.0, 1.0)).unwrap();
        assert_eq!((p, q), (Point::new(-4.0, 0.0), Point::new(2.0, 0.0)));
        let (p, q) = b.clip_line((1.0, 1.0, 0.0)).unwrap();
        assert_eq!((p.x, q.x), (-1.0, -1.0));
        assert!(b.clip_line((10.0, 1.0, 0.0)).is_none());
    }

    #[test]
    fn disc_map_stays_inside() {
        for p in [Point::new(1e9, -3e9), Point::new(0.0, 0.0), Point::new(-2.0, 0.5)] {
            assert!(to_disc(p).norm() < 1.0);
        }
    }

    #[test]
    fn invalid_bounds() {
        let spec = PortraitSpec { bounds: Bounds::new(1.0, 1.0, 0.0, 1.0), ..Default::default() };
        assert!(render(&GeneralQuadraticField::default(), &Detections::default(), &spec).is_err());
    }
}
