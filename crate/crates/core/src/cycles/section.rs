use serde::{Deserialize, Serialize};

use super::CycleError;
use crate::integrate::{integrate, IntegratorConfig, OrbitSegment, SectionEvent, Terminal};
use crate::systems::{Equilibrium, GeneralQuadraticField, Point};

pub const DEFAULT_S_MIN: f64 = 1e-3;
pub const DEFAULT_S_MAX: f64 = 50.0;

/// Transversal ray `focus + s * direction`, `s` in `[s_min, s_max]`, crossed by the flow
/// in the sense given by `orientation`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Section {
    pub focus: Point,
    pub direction: (f64, f64),
    pub s_min: f64,
    pub s_max: f64,
    /// Sign of `direction x f` along the ray.
    pub orientation: f64,
    /// First tangency along the ray when it cut `s_max` short.
    pub tangency: Option<f64>,
}

impl Section {
    /// Ray through `focus`, with orientation read off the field and `s_max` cut back to
    /// the first tangency when the field stops being transversal.
    pub fn new(
        f: &GeneralQuadraticField,
        focus: Point,
        direction: (f64, f64),
        s_min: f64,
        s_max: f64,
    ) -> Result<Self, CycleError> {
        let norm = direction.0.hypot(direction.1);
        if !(s_min > 0.0 && s_max > s_min && norm > 0.0) {
            return Err(CycleError::Section(format!("invalid ray: s in [{s_min}, {s_max}], direction {direction:?}")));
        }
        let direction = (direction.0 / norm, direction.1 / norm);
        let trans = |s: f64| {
            let (u, v) = f.at(focus.offset(direction, s));
            direction.0 * v - direction.1 * u
        };
        let t0 = trans(s_min);
        if t0 == 0.0 {
            return Err(CycleError::Section("field tangent to the section at s_min".into()));
        }
        let orientation = t0.signum();
        let n = 256;
        let ratio = (s_max / s_min).powf(1.0 / n as f64);
        let mut prev = s_min;
        let mut tangency = None;
        for k in 1..=n {
            let s = s_min * ratio.powi(k);
            if orientation * trans(s) <= 0.0 {
                // Bisect for the tangency.
                let (mut a, mut b) = (prev, s);
                for _ in 0..100 {
                    let m = 0.5 * (a + b);
                    if orientation * trans(m) > 0.0 {
                        a = m;
                    } else {
                        b = m;
                    }
                }
                tangency = Some(a);
                break;
            }
            prev = s;
        }
        let s_max = match tangency {
            // Stay clear of the tangency itself.
            Some(t) => t * (1.0 - 1e-6),
            None => s_max,
        };
        if s_max <= s_min * 10.0 {
            return Err(CycleError::Section(format!("section not transversal beyond s = {s_max}")));
        }
        Ok(Self { focus, direction, s_min, s_max, orientation, tangency })
    }

    /// Horizontal ray through an anti-saddle, pointing away from the nearest other
    /// equilibrium on the line `y = focus.y`, at most `s_max` long.
    pub fn along_x(
        f: &GeneralQuadraticField,
        eq: &Equilibrium,
        others: &[Equilibrium],
        s_max: f64,
    ) -> Result<Self, CycleError> {
        let focus = eq.location;
        let on_line: Vec<f64> = others
            .iter()
            .filter(|o| o.location.dist(focus) > 1e-9 && (o.location.y - focus.y).abs() <= 1e-9 * (1.0 + focus.norm()))
            .map(|o| o.location.x - focus.x)
            .collect();
        let nearest = |sign: f64| {
            on_line.iter().filter(|dx| **dx * sign > 0.0).map(|dx| dx.abs()).fold(f64::INFINITY, f64::min)
        };
        let (right, left) = (nearest(1.0), nearest(-1.0));
        let (dir, room) = if right >= left { ((1.0, 0.0), right) } else { ((-1.0, 0.0), left) };
        let s_max = s_max.min(room * 0.999);
        Self::new(f, focus, dir, DEFAULT_S_MIN.min(s_max / 100.0), s_max)
    }

    pub fn point(&self, s: f64) -> Point {
        self.focus.offset(self.direction, s)
    }

    pub fn with_range(&self, s_min: f64, s_max: f64) -> Self {
        Self { s_min, s_max, ..*self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoReturn {
    Escape,
    Timeout,
    Trap,
}

/// One evaluation of the first-return map.
#[derive(Debug, Clone, PartialEq)]
pub struct Return {
    pub s: f64,
    pub s_next: f64,
    pub period: f64,
    /// Derivative of the return map at `s`.
    pub slope: f64,
    /// Largest distance from the focus along the orbit.
    pub radius: f64,
    segment: OrbitSegment,
    focus: Point,
}

impl Return {
    pub fn displacement(&self) -> f64 {
        self.s_next - self.s
    }

    /// `(s_next - s) / s`, computed to full relative precision.
    pub fn relative_displacement(&self) -> f64 {
        self.s_next / self.s - 1.0
    }

    pub fn d_prime(&self) -> f64 {
        self.slope - 1.0
    }

    /// The integrated orbit in phase-plane coordinates.
    pub fn orbit(&self) -> Vec<Point> {
        self.segment
            .states
            .iter()
            .map(|u| Point::new(self.focus.x + self.s * u.x, self.focus.y + self.s * u.y))
            .collect()
    }

    pub fn times(&self) -> &[f64] {
        &self.segment.times
    }
}

/// First-return map to a section, evaluated in coordinates centred on the focus and
/// dilated by the starting offset.
#[derive(Debug, Clone, Copy)]
pub struct ReturnMap {
    local: GeneralQuadraticField,
    pub section: Section,
    pub cfg: IntegratorConfig,
}

impl ReturnMap {
    pub fn new(f: &GeneralQuadraticField, section: Section, cfg: IntegratorConfig) -> Self {
        Self { local: f.translated(section.focus), section, cfg }
    }

    pub fn with_config(&self, cfg: IntegratorConfig) -> Self {
        Self { cfg, ..*self }
    }

    pub fn eval(&self, s: f64) -> Result<Return, CycleError> {
        if !(s > 0.0 && s.is_finite()) {
            return Err(CycleError::Section(format!("offset {s} outside the ray")));
        }
        let g = self.local.dilated(s);
        let dir = self.section.direction;
        let ev = SectionEvent {
            origin: Point::ORIGIN,
            direction: dir,
            orientation: self.section.orientation,
            min_offset: 0.0,
        };
        let cfg = IntegratorConfig { r_escape: self.cfg.r_escape / s, h_max: self.cfg.h_max, ..self.cfg };
        let start = Point::new(dir.0, dir.1);
        let seg = integrate(&g, start, &cfg, Some(&ev))?;
        match seg.terminal {
            Terminal::Event => {}
            Terminal::Escape => return Err(CycleError::NoReturn { s, reason: NoReturn::Escape }),
            Terminal::TimeLimit => return Err(CycleError::NoReturn { s, reason: NoReturn::Timeout }),
            Terminal::EquilibriumTrap => return Err(CycleError::NoReturn { s, reason: NoReturn::Trap }),
        }
        let end = seg.last();
        let offset = ev.offset(end);
        let t0 = ev.transversal(&g, start);
        let t1 = ev.transversal(&g, end);
        let slope = seg.log_jacobian.exp() * t0 / t1;
        let radius = s * seg.max_norm();
        Ok(Return {
            s,
            s_next: s * offset,
            period: seg.duration(),
            slope,
            radius,
            segment: seg,
            focus: self.section.focus,
        })
    }
}

/// `P(s)` for the section of `f`.
pub fn return_map(
    f: &GeneralQuadraticField,
    sec: &Section,
    s: f64,
    cfg: &IntegratorConfig,
) -> Result<Return, CycleError> {
    ReturnMap::new(f, *sec, *cfg).eval(s)
}

/// `P(s) - s`.
pub fn displacement(f: &GeneralQuadraticField, sec: &Section, s: f64, cfg: &IntegratorConfig) -> Result<f64, CycleError> {
    return_map(f, sec, s, cfg).map(|r| r.displacement())
}
