//! Field-rotation determinants `P dQ/dmu - Q dP/dmu` of the canonical families.
//!
//! Two independent routes are provided. [`delta_closed`] evaluates the factored closed
//! forms. [`delta_numeric`] builds the parameter partial of the compiled field as the
//! coefficient difference `compile(mu = 1) - compile(mu = 0)`, which is exact because
//! every rotation parameter enters the coefficients affinely.
//!
//! For the `nu` family the closed forms follow by the same expansion with
//! `P = -y (1 + nu y)`:
//!
//! ```text
//! D_lambda = -y^2 (1 + nu y)
//! D_beta   = -y^2 (1 + nu y) (1 + x)
//! D_gamma  = -y^2 (1 + nu y) (1 + x + c y)
//! ```

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::systems::{compile_24, compile_25, CanonicalParams, GeneralQuadraticField, Params24, Params25, Point, SystemError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RotationParamId {
    Lambda,
    Alpha,
    Beta,
    Gamma,
}

impl RotationParamId {
    pub const ALL: [RotationParamId; 4] =
        [RotationParamId::Lambda, RotationParamId::Alpha, RotationParamId::Beta, RotationParamId::Gamma];

    pub fn name(self) -> &'static str {
        match self {
            RotationParamId::Lambda => "lambda",
            RotationParamId::Alpha => "alpha",
            RotationParamId::Beta => "beta",
            RotationParamId::Gamma => "gamma",
        }
    }

    pub fn get(self, p: &Params24) -> f64 {
        match self {
            RotationParamId::Lambda => p.lambda,
            RotationParamId::Alpha => p.alpha,
            RotationParamId::Beta => p.beta,
            RotationParamId::Gamma => p.gamma,
        }
    }

    pub fn with(self, p: &Params24, mu: f64) -> Params24 {
        let mut q = *p;
        match self {
            RotationParamId::Lambda => q.lambda = mu,
            RotationParamId::Alpha => q.alpha = mu,
            RotationParamId::Beta => q.beta = mu,
            RotationParamId::Gamma => q.gamma = mu,
        }
        q
    }

    /// The value of this parameter in either canonical family.
    pub fn value(self, p: &CanonicalParams) -> Result<f64, RotationError> {
        match (p, self) {
            (CanonicalParams::Canonical24(q), _) => Ok(self.get(q)),
            (CanonicalParams::Canonical25(_), RotationParamId::Alpha) => Err(RotationError::NotARotationParameter(self)),
            (CanonicalParams::Canonical25(q), RotationParamId::Lambda) => Ok(q.lambda),
            (CanonicalParams::Canonical25(q), RotationParamId::Beta) => Ok(q.beta),
            (CanonicalParams::Canonical25(q), RotationParamId::Gamma) => Ok(q.gamma),
        }
    }

    pub fn set(self, p: &CanonicalParams, mu: f64) -> Result<CanonicalParams, RotationError> {
        match p {
            CanonicalParams::Canonical24(q) => Ok(CanonicalParams::Canonical24(self.with(q, mu))),
            CanonicalParams::Canonical25(q) => self.with25(q, mu).map(CanonicalParams::Canonical25),
        }
    }

    fn with25(self, p: &Params25, mu: f64) -> Result<Params25, RotationError> {
        let mut q = *p;
        match self {
            RotationParamId::Lambda => q.lambda = mu,
            RotationParamId::Beta => q.beta = mu,
            RotationParamId::Gamma => q.gamma = mu,
            RotationParamId::Alpha => return Err(RotationError::NotARotationParameter(self)),
        }
        Ok(q)
    }
}

impl std::fmt::Display for RotationParamId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for RotationParamId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "lambda" => Ok(RotationParamId::Lambda),
            "alpha" => Ok(RotationParamId::Alpha),
            "beta" => Ok(RotationParamId::Beta),
            "gamma" => Ok(RotationParamId::Gamma),
            _ => Err(format!("unknown rotation parameter {s:?}")),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RotationError {
    #[error("every sample point is degenerate (|delta| below the floor or zero field)")]
    Inconclusive,
    #[error("{0} is not a rotation parameter of this family")]
    NotARotationParameter(RotationParamId),
    #[error(transparent)]
    System(#[from] SystemError),
}

/// Closed-form determinant for the four-parameter family.
pub fn delta_closed(id: RotationParamId, p: &Params24, pt: Point) -> f64 {
    let (x, y) = (pt.x, pt.y);
    let y2 = y * y;
    let line = 1.0 + x + p.alpha * y;
    match id {
        RotationParamId::Lambda => -y2 * line,
        RotationParamId::Beta => -y2 * (1.0 + x) * line,
        RotationParamId::Gamma => -y2 * (1.0 + x + p.c * y) * line,
        RotationParamId::Alpha => {
            y2 * ((p.lambda + p.beta + p.gamma) * y
                + (p.a - 1.0) * x * x
                + (p.beta + p.gamma) * x * y
                + p.c * p.gamma * y2)
        }
    }
}

fn cross_with_partial(f: &GeneralQuadraticField, partial: &GeneralQuadraticField, pt: Point) -> f64 {
    let (pp, qq) = f.at(pt);
    let (dp, dq) = partial.at(pt);
    pp * dq - qq * dp
}

/// Exact parameter partial `d f / d mu` of the compiled four-parameter field.
pub fn partial_field(id: RotationParamId, p: &Params24) -> GeneralQuadraticField {
    compile_24(&id.with(p, 1.0)).sub(&compile_24(&id.with(p, 0.0)))
}

/// `P dQ/dmu - Q dP/dmu` from the compiled field and its coefficient partial.
pub fn delta_numeric(id: RotationParamId, p: &Params24, pt: Point) -> f64 {
    cross_with_partial(&compile_24(p), &partial_field(id, p), pt)
}

/// Closed-form determinant for the `nu` family (`lambda`, `beta`, `gamma` only).
pub fn delta_closed_25(id: RotationParamId, p: &Params25, pt: Point) -> Result<f64, RotationError> {
    let (x, y) = (pt.x, pt.y);
    let base = -y * y * (1.0 + p.nu as f64 * y);
    match id {
        RotationParamId::Lambda => Ok(base),
        RotationParamId::Beta => Ok(base * (1.0 + x)),
        RotationParamId::Gamma => Ok(base * (1.0 + x + p.c * y)),
        RotationParamId::Alpha => Err(RotationError::NotARotationParameter(id)),
    }
}

pub fn delta_numeric_25(id: RotationParamId, p: &Params25, pt: Point) -> Result<f64, RotationError> {
    let f = compile_25(p)?;
    let partial = compile_25(&id.with25(p, 1.0)?)?.sub(&compile_25(&id.with25(p, 0.0)?)?);
    Ok(cross_with_partial(&f, &partial, pt))
}

/// `|delta|` at or below this leaves the rotation sense undecided.
pub const DEGENERACY_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirectionSample {
    pub point: Point,
    pub id: RotationParamId,
    pub delta_closed: f64,
    pub delta_numeric: f64,
    /// `P Q+ - Q P+` with `(P+, Q+)` the field at `mu + dmu`.
    pub cross: f64,
    /// `None` for degenerate samples.
    pub pass: Option<bool>,
}

impl DirectionSample {
    pub fn cross_sign(&self) -> i8 {
        if self.cross > 0.0 {
            1
        } else if self.cross < 0.0 {
            -1
        } else {
            0
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionReport {
    pub id: RotationParamId,
    pub dmu: f64,
    pub samples: Vec<DirectionSample>,
    pub checked: usize,
    pub passed: usize,
}

impl DirectionReport {
    pub fn pass_rate(&self) -> f64 {
        if self.checked == 0 {
            0.0
        } else {
            self.passed as f64 / self.checked as f64
        }
    }
}

/// Compare the sense in which the field turns under `mu -> mu + dmu` with the sign of
/// the closed-form determinant.
pub fn rotation_direction_check(
    id: RotationParamId,
    p: &Params24,
    dmu: f64,
    pts: &[Point],
) -> Result<DirectionReport, RotationError> {
    let inputs: Vec<(Params24, Point)> = pts.iter().map(|pt| (*p, *pt)).collect();
    sampled_direction_check(id, &inputs, dmu)
}

fn direction_sample(id: RotationParamId, p: &Params24, dmu: f64, pt: Point) -> DirectionSample {
    let (pp, qq) = compile_24(p).at(pt);
    let (pp2, qq2) = compile_24(&id.with(p, id.get(p) + dmu)).at(pt);
    let cross = pp * qq2 - qq * pp2;
    let dc = delta_closed(id, p, pt);
    let nondegenerate = dc.abs() > DEGENERACY_FLOOR && dmu != 0.0 && pp.hypot(qq) > 0.0;
    let pass = nondegenerate.then(|| cross.signum() == (dc * dmu).signum() && cross != 0.0);
    DirectionSample { point: pt, id, delta_closed: dc, delta_numeric: delta_numeric(id, p, pt), cross, pass }
}

/// `n` parameter tuples with every entry uniform in `[-2, 2]` and points uniform in
/// `[-3, 3]^2`, drawn from a ChaCha stream seeded with `seed`.
pub fn random_inputs(n: usize, seed: u64) -> Vec<(Params24, Point)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let mut v = [0.0; 6];
            for x in &mut v {
                *x = rng.gen_range(-2.0..=2.0);
            }
            let p = Params24 { lambda: v[0], alpha: v[1], beta: v[2], gamma: v[3], a: v[4], c: v[5] };
            (p, Point::new(rng.gen_range(-3.0..=3.0), rng.gen_range(-3.0..=3.0)))
        })
        .collect()
}

/// Direction check of `id` at every sampled `(params, point)` pair.
pub fn sampled_direction_check(
    id: RotationParamId,
    inputs: &[(Params24, Point)],
    dmu: f64,
) -> Result<DirectionReport, RotationError> {
    let samples: Vec<DirectionSample> = inputs.iter().map(|(p, pt)| direction_sample(id, p, dmu, *pt)).collect();
    let checked = samples.iter().filter(|s| s.pass.is_some()).count();
    let passed = samples.iter().filter(|s| s.pass == Some(true)).count();
    if checked == 0 && dmu != 0.0 {
        return Err(RotationError::Inconclusive);
    }
    Ok(DirectionReport { id, dmu, samples, checked, passed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::Params25;

    #[test]
    fn closed_form_examples() {
        let p = Params24::default();
        assert_eq!(delta_closed(RotationParamId::Lambda, &p, Point::new(1.0, 1.0)), -2.0);
        let p31 = Params24::two_centers();
        assert_eq!(delta_closed(RotationParamId::Alpha, &p31, Point::new(1.0, 1.0)), -0.5);
        for id in RotationParamId::ALL {
            assert_eq!(delta_closed(id, &Params24::two_focus(0.3, -0.2, 0.1, 0.4), Point::new(1.7, 0.0)), 0.0);
        }
    }

    #[test]
    fn vanishing_factors() {
        let p = Params24::two_focus(0.2, 0.0, -0.1, 0.3);
        assert_eq!(delta_numeric(RotationParamId::Beta, &p, Point::new(-1.0, 2.0)), 0.0);
        // 1 + x + c y = 0 at (0, 1) with c = -1.
        assert_eq!(delta_numeric(RotationParamId::Gamma, &p, Point::new(0.0, 1.0)), 0.0);
    }

    #[test]
    fn routes_agree_at_fixed_point() {
        let p = Params24 { lambda: 0.37, alpha: -1.2, beta: 0.55, gamma: 1.9, a: -0.3, c: 0.8 };
        let pt = Point::new(0.5, -0.7);
        for id in RotationParamId::ALL {
            let (a, b) = (delta_closed(id, &p, pt), delta_numeric(id, &p, pt));
            assert!((a - b).abs() <= 1e-12, "{id}: {a} vs {b}");
        }
    }

    #[test]
    fn nu_family_routes_agree() {
        let p = Params25 { lambda: 0.2, beta: -0.4, gamma: 0.7, a: 0.5, c: -1.0, nu: 1 };
        let pt = Point::new(0.3, 1.1);
        for id in [RotationParamId::Lambda, RotationParamId::Beta, RotationParamId::Gamma] {
            let a = delta_closed_25(id, &p, pt).unwrap();
            let b = delta_numeric_25(id, &p, pt).unwrap();
            assert!((a - b).abs() <= 1e-12, "{id}: {a} vs {b}");
        }
        assert!(delta_closed_25(RotationParamId::Alpha, &p, pt).is_err());
    }

    #[test]
    fn lambda_turns_clockwise_where_line_is_positive() {
        let p = Params24::default();
        let rep = rotation_direction_check(RotationParamId::Lambda, &p, 1e-4, &[Point::new(0.5, 0.5)]).unwrap();
        let s = rep.samples[0];
        assert!(s.delta_closed < 0.0);
        assert!(s.cross < 0.0);
        assert_eq!(s.pass, Some(true));
    }

    #[test]
    fn beta_turns_counterclockwise_where_product_is_negative() {
        let p = Params24::two_focus(0.0, -2.0, 0.0, 0.1);
        let pt = Point::new(-0.5, 1.0);
        assert!((1.0 + pt.x) * (1.0 + pt.x + p.alpha * pt.y) < 0.0);
        let rep = rotation_direction_check(RotationParamId::Beta, &p, 1e-4, &[pt]).unwrap();
        assert!(rep.samples[0].cross > 0.0);
        assert_eq!(rep.samples[0].pass, Some(true));
    }

    #[test]
    fn zero_increment_gives_zero_cross() {
        let p = Params24::two_focus(0.1, -0.2, 0.3, 0.4);
        let pts = [Point::new(0.2, 0.9), Point::new(-1.3, -0.4)];
        for id in RotationParamId::ALL {
            let rep = rotation_direction_check(id, &p, 0.0, &pts).unwrap();
            assert!(rep.samples.iter().all(|s| s.cross == 0.0));
        }
    }

    #[test]
    fn all_degenerate_is_inconclusive() {
        let p = Params24::two_centers();
        let pts = [Point::new(0.3, 0.0), Point::new(-4.0, 0.0)];
        assert_eq!(
            rotation_direction_check(RotationParamId::Gamma, &p, 1e-5, &pts),
            Err(RotationError::Inconclusive)
        );
    }
}
