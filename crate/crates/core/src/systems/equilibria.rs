use serde::{Deserialize, Serialize};

use super::field::{GeneralQuadraticField, Point};
use super::poly::{quadratic_in_x, resultant_x, swap_xy, Poly};
use super::SystemError;

/// `|trace|` at or below this makes an anti-saddle a centre candidate.
pub const CENTER_TRACE_TOL: f64 = 1e-9;
/// Residual target of the Newton polish.
pub const RESIDUAL_TOL: f64 = 1e-12;
const DET_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EquilibriumKind {
    Saddle,
    Node,
    Focus,
    CenterCandidate,
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium {
    pub location: Point,
    pub trace: f64,
    pub det: f64,
    pub kind: EquilibriumKind,
}

impl Equilibrium {
    pub fn classify(f: &GeneralQuadraticField, location: Point) -> Self {
        let j = f.jacobian(location.x, location.y);
        let trace = j[0][0] + j[1][1];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        let kind = if det.abs() <= DET_TOL {
            EquilibriumKind::Degenerate
        } else if det < 0.0 {
            EquilibriumKind::Saddle
        } else if trace.abs() <= CENTER_TRACE_TOL {
            EquilibriumKind::CenterCandidate
        } else if trace * trace < 4.0 * det {
            EquilibriumKind::Focus
        } else {
            EquilibriumKind::Node
        };
        Self { location, trace, det, kind }
    }

    /// Focus, node or centre: positive Jacobian determinant.
    pub fn is_anti_saddle(&self) -> bool {
        self.det > DET_TOL
    }

    /// Period of the linearised rotation, `2 pi / sqrt(det)`.
    pub fn linear_period(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.det.sqrt()
    }
}

fn residual(f: &GeneralQuadraticField, p: Point) -> f64 {
    let (u, v) = f.at(p);
    u.hypot(v)
}

/// Damped Newton on `P = Q = 0`.
fn polish(f: &GeneralQuadraticField, mut p: Point) -> Point {
    let mut r = residual(f, p);
    for _ in 0..60 {
        if r <= RESIDUAL_TOL * 1e-3 {
            break;
        }
        let (u, v) = f.at(p);
        let j = f.jacobian(p.x, p.y);
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det == 0.0 {
            break;
        }
        let dx = (j[1][1] * u - j[0][1] * v) / det;
        let dy = (-j[1][0] * u + j[0][0] * v) / det;
        let mut step = 1.0;
        let mut improved = false;
        for _ in 0..30 {
            let q = Point::new(p.x - step * dx, p.y - step * dy);
            let rq = residual(f, q);
            if rq < r {
                p = q;
                r = rq;
                improved = true;
                break;
            }
            step *= 0.5;
        }
        if !improved {
            break;
        }
    }
    p
}

fn push_unique(out: &mut Vec<Point>, p: Point) {
    if p.is_finite() && !out.iter().any(|q| q.dist(p) <= 1e-9 * (1.0 + p.norm())) {
        out.push(p);
    }
}

/// Candidate zeros when `P = y (p01 + p11 x + p02 y)`.
fn branch_candidates(f: &GeneralQuadraticField, (l0, lx, ly): (f64, f64, f64)) -> Result<Vec<Point>, SystemError> {
    let mut pts = Vec::new();
    // Branch y = 0.
    let on_axis = Poly::new(vec![f.q00, f.q10, f.q20]);
    if on_axis.is_zero() {
        return Err(SystemError::DegenerateField("Q vanishes on the line y = 0".into()));
    }
    for x in on_axis.real_roots() {
        pts.push(Point::new(x, 0.0));
    }
    // Branch l0 + lx x + ly y = 0.
    let q = f.q();
    if lx != 0.0 {
        // x = u + w y
        let (u, w) = (-l0 / lx, -ly / lx);
        let qy = Poly::new(vec![
            q[0] + q[1] * u + q[3] * u * u,
            q[1] * w + q[2] + 2.0 * q[3] * u * w + q[4] * u,
            q[3] * w * w + q[4] * w + q[5],
        ]);
        if qy.cleaned(1e-14).is_zero() {
            return Err(SystemError::DegenerateField("Q vanishes on the line factor of P".into()));
        }
        for y in qy.real_roots() {
            pts.push(Point::new(u + w * y, y));
        }
    } else if ly != 0.0 {
        let y0 = -l0 / ly;
        let qx = Poly::new(vec![q[0] + q[2] * y0 + q[5] * y0 * y0, q[1] + q[4] * y0, q[3]]);
        if qx.cleaned(1e-14).is_zero() {
            return Err(SystemError::DegenerateField("Q vanishes on the line factor of P".into()));
        }
        for x in qx.real_roots() {
            pts.push(Point::new(x, y0));
        }
    } else if l0 == 0.0 {
        return Err(SystemError::DegenerateField("P vanishes identically".into()));
    }
    Ok(pts)
}

/// Candidate zeros from the resultant of `P` and `Q` with respect to `x`.
fn resultant_candidates(p: &[f64; 6], q: &[f64; 6], swapped: bool) -> Result<Vec<Point>, SystemError> {
    let (fp, fq) = (quadratic_in_x(p), quadratic_in_x(q));
    let indep_x = |v: &Vec<Poly>| v.len() <= 1;
    if indep_x(&fp) && indep_x(&fq) && !swapped {
        return resultant_candidates(&swap_xy(p), &swap_xy(q), true).map(|v| {
            v.into_iter().map(|pt| Point::new(pt.y, pt.x)).collect()
        });
    }
    let res = resultant_x(&fp, &fq)
        .ok_or_else(|| SystemError::DegenerateField("a component vanishes identically".into()))?;
    let scale = p.iter().chain(q.iter()).fold(0.0_f64, |m, c| m.max(c.abs())).max(1.0);
    let res = res.cleaned(1e-13);
    if res.is_zero() {
        return Err(SystemError::DegenerateField("P and Q share a common factor".into()));
    }
    let mut pts = Vec::new();
    for y in res.real_roots() {
        let px = Poly::new(vec![p[0] + p[2] * y + p[5] * y * y, p[1] + p[4] * y, p[3]]).cleaned(1e-14);
        let qx = Poly::new(vec![q[0] + q[2] * y + q[5] * y * y, q[1] + q[4] * y, q[3]]).cleaned(1e-14);
        if px.is_zero() && qx.is_zero() {
            return Err(SystemError::DegenerateField(format!("line y = {y} of equilibria")));
        }
        let mut xs = px.real_roots();
        xs.extend(qx.real_roots());
        for x in xs {
            let (u, v) = (px.eval(x), qx.eval(x));
            if u.abs().max(v.abs()) <= 1e-6 * scale * (1.0 + x.abs() + y.abs()).powi(2) {
                pts.push(Point::new(x, y));
            }
        }
    }
    Ok(pts)
}

/// All finite real equilibria of `f`, polished and classified.
pub fn equilibria(f: &GeneralQuadraticField) -> Result<Vec<Equilibrium>, SystemError> {
    if f.is_zero() {
        return Err(SystemError::DegenerateField("field is identically zero".into()));
    }
    if !f.is_finite() {
        return Err(SystemError::InvalidParameter("non-finite coefficient".into()));
    }
    let candidates = match f.y_factor_of_p() {
        Some(cofactor) => branch_candidates(f, cofactor)?,
        None => resultant_candidates(&f.p(), &f.q(), false)?,
    };
    let mut pts = Vec::new();
    for c in candidates {
        let p = polish(f, c);
        // Candidates that Newton cannot bring close to a zero were spurious.
        if residual(f, p) <= 1e-8 * (1.0 + p.norm()).powi(2) * f.max_abs_coefficient().max(1.0) {
            push_unique(&mut pts, p);
        }
    }
    pts.sort_by(|a, b| b.x.partial_cmp(&a.x).unwrap().then(a.y.partial_cmp(&b.y).unwrap()));
    Ok(pts.into_iter().map(|p| Equilibrium::classify(f, p)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::{compile_24, Params24};

    #[test]
    fn two_centres() {
        let eq = equilibria(&compile_24(&Params24::two_centers())).unwrap();
        assert_eq!(eq.len(), 2);
        assert_eq!(eq[0].location, Point::new(0.0, 0.0));
        assert_eq!(eq[1].location, Point::new(-2.0, 0.0));
        for e in &eq {
            assert_eq!(e.kind, EquilibriumKind::CenterCandidate);
            assert_eq!(e.trace, 0.0);
            assert_eq!(e.det, 1.0);
        }
    }

    #[test]
    fn gamma_turns_centres_into_foci() {
        let eq = equilibria(&compile_24(&Params24::two_focus(0.0, 0.0, 0.0, 0.1))).unwrap();
        assert_eq!(eq.len(), 2);
        assert_eq!(eq[0].kind, EquilibriumKind::Focus);
        assert!((eq[0].trace - 0.1).abs() < 1e-15);
        assert_eq!(eq[1].kind, EquilibriumKind::Focus);
        assert!((eq[1].trace + 0.1).abs() < 1e-15);
    }

    #[test]
    fn linear_centre() {
        let f = GeneralQuadraticField { p01: -1.0, q10: 1.0, ..Default::default() };
        let eq = equilibria(&f).unwrap();
        assert_eq!(eq.len(), 1);
        assert_eq!(eq[0].location, Point::ORIGIN);
        assert_eq!((eq[0].trace, eq[0].det), (0.0, 1.0));
    }

    #[test]
    fn general_field_via_resultant() {
        // x' = x^2 + y^2 - 1, y' = x - y  -> (±1/sqrt2, ±1/sqrt2)
        let f = GeneralQuadraticField { p00: -1.0, p20: 1.0, p02: 1.0, q10: 1.0, q01: -1.0, ..Default::default() };
        let eq = equilibria(&f).unwrap();
        assert_eq!(eq.len(), 2);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!(eq[0].location.dist(Point::new(r, r)) < 1e-12);
        assert!(eq[1].location.dist(Point::new(-r, -r)) < 1e-12);
        for e in &eq {
            let (u, v) = f.at(e.location);
            assert!(u.hypot(v) <= RESIDUAL_TOL);
        }
    }

    #[test]
    fn four_equilibria() {
        // x' = x^2 - 1, y' = y^2 - 4
        let f = GeneralQuadraticField { p00: -1.0, p20: 1.0, q00: -4.0, q02: 1.0, ..Default::default() };
        let eq = equilibria(&f).unwrap();
        assert_eq!(eq.len(), 4);
        let saddles = eq.iter().filter(|e| e.kind == EquilibriumKind::Saddle).count();
        assert_eq!(saddles, 2);
    }

    #[test]
    fn degenerate_fields() {
        assert!(matches!(equilibria(&GeneralQuadraticField::default()), Err(SystemError::DegenerateField(_))));
        // x' = y (x - 1), y' = y: the whole x axis is fixed.
        let f = GeneralQuadraticField { p01: -1.0, p11: 1.0, q01: 1.0, ..Default::default() };
        assert!(matches!(equilibria(&f), Err(SystemError::DegenerateField(_))));
        // Common factor through the resultant path: x' = x (x + y), y' = x.
        let g = GeneralQuadraticField { p20: 1.0, p11: 1.0, q10: 1.0, ..Default::default() };
        assert!(matches!(equilibria(&g), Err(SystemError::DegenerateField(_))));
    }
}
