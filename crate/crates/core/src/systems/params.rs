//! Parameter tuples of the canonical quadratic families and their compilation to
//! [`GeneralQuadraticField`].

use serde::{Deserialize, Serialize};

use super::field::GeneralQuadraticField;
use super::SystemError;

/// Four-rotation-parameter canonical family:
///
/// ```text
/// x' = -y (1 + x + alpha y)
/// y' = x + (lambda + beta + gamma) y + a x^2 + (alpha + beta + gamma) x y + c gamma y^2
/// ```
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params24 {
    pub lambda: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub a: f64,
    pub c: f64,
}

impl Params24 {
    /// Two anti-saddles at `(0, 0)` and `(-2, 0)`: `a = 1/2`, `c = -1`, rotation
    /// parameters as given.
    pub fn two_focus(lambda: f64, alpha: f64, beta: f64, gamma: f64) -> Self {
        Self { lambda, alpha, beta, gamma, a: 0.5, c: -1.0 }
    }

    /// Base system with two centres (all rotation parameters zero).
    pub fn two_centers() -> Self {
        Self::two_focus(0.0, 0.0, 0.0, 0.0)
    }

    pub fn compile(&self) -> GeneralQuadraticField {
        compile_24(self)
    }
}

/// The companion family with `x' = -y (1 + nu y)`, `nu` in `{0, 1}`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params25 {
    pub lambda: f64,
    pub beta: f64,
    pub gamma: f64,
    pub a: f64,
    pub c: f64,
    pub nu: i64,
}

/// Two-rotation-parameter family `x' = P + alpha Q`, `y' = Q - alpha P` with
/// `P = -y + m x y + (n - gamma) y^2`, `Q = x - x^2 + gamma x y + c y^2`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params21 {
    pub alpha: f64,
    pub gamma: f64,
    pub m: f64,
    pub n: f64,
    pub c: f64,
}

/// Reduced form `x' = -y + m x y + n y^2`, `y' = x + lambda26 y + a x^2 + b x y + c y^2`
/// with `m` in `{-1, 0}`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params26 {
    pub m: f64,
    pub n: f64,
    pub lambda26: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

pub fn compile_24(p: &Params24) -> GeneralQuadraticField {
    let t = p.lambda + p.beta + p.gamma;
    GeneralQuadraticField {
        p01: -1.0,
        p11: -1.0,
        p02: -p.alpha,
        q10: 1.0,
        q01: t,
        q20: p.a,
        q11: p.alpha + p.beta + p.gamma,
        q02: p.c * p.gamma,
        ..Default::default()
    }
}

pub fn compile_25(p: &Params25) -> Result<GeneralQuadraticField, SystemError> {
    if p.nu != 0 && p.nu != 1 {
        return Err(SystemError::InvalidParameter(format!("nu must be 0 or 1, got {}", p.nu)));
    }
    Ok(GeneralQuadraticField {
        p01: -1.0,
        p02: -(p.nu as f64),
        q10: 1.0,
        q01: p.lambda + p.beta + p.gamma,
        q20: p.a,
        q11: p.beta + p.gamma,
        q02: p.c * p.gamma,
        ..Default::default()
    })
}

pub fn compile_21(p: &Params21) -> GeneralQuadraticField {
    // P and Q before mixing by alpha.
    let pp = [0.0, 0.0, -1.0, 0.0, p.m, p.n - p.gamma];
    let qq = [0.0, 1.0, 0.0, -1.0, p.gamma, p.c];
    let mut xdot = [0.0; 6];
    let mut ydot = [0.0; 6];
    for i in 0..6 {
        xdot[i] = pp[i] + p.alpha * qq[i];
        ydot[i] = qq[i] - p.alpha * pp[i];
    }
    GeneralQuadraticField::from_components(xdot, ydot)
}

fn check_m(m: f64) -> Result<(), SystemError> {
    if m == -1.0 || m == 0.0 {
        Ok(())
    } else {
        Err(SystemError::InvalidParameter(format!("m must be -1 or 0, got {m}")))
    }
}

pub fn compile_26(p: &Params26) -> Result<GeneralQuadraticField, SystemError> {
    check_m(p.m)?;
    Ok(GeneralQuadraticField {
        p01: -1.0,
        p11: p.m,
        p02: p.n,
        q10: 1.0,
        q01: p.lambda26,
        q20: p.a,
        q11: p.b,
        q02: p.c,
        ..Default::default()
    })
}

/// Canonical parameters obtained from a [`Params26`] tuple.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum CanonicalParams {
    Canonical24(Params24),
    Canonical25(Params25),
}

impl CanonicalParams {
    pub fn compile(&self) -> Result<GeneralQuadraticField, SystemError> {
        match self {
            CanonicalParams::Canonical24(p) => Ok(compile_24(p)),
            CanonicalParams::Canonical25(p) => compile_25(p),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Embedding {
    pub canonical: CanonicalParams,
    /// Set when `m = 0` and the `y^2` coefficient of `x'` is not one of the two values
    /// `nu` can represent; holds that coefficient so the rescaling stays visible.
    pub nu_rescale: Option<f64>,
}

/// Rewrite a reduced-form tuple in the canonical rotation-parameter coordinates.
///
/// For `m = -1` the correspondence is exact. For `m = 0` the `y^2` coefficient of `x'`
/// is `-nu`, so `n = 0` and `n = -1` are transcribed exactly; other values of `n` map to
/// `nu = 1` and report `n` in [`Embedding::nu_rescale`].
pub fn embed_26_into_canonical(p: &Params26) -> Result<Embedding, SystemError> {
    check_m(p.m)?;
    let gamma = 1.0;
    if p.m == -1.0 {
        let alpha = -p.n;
        let beta = p.b - alpha - gamma;
        let lambda = p.lambda26 - beta - gamma;
        Ok(Embedding {
            canonical: CanonicalParams::Canonical24(Params24 {
                lambda,
                alpha,
                beta,
                gamma,
                a: p.a,
                c: p.c,
            }),
            nu_rescale: None,
        })
    } else {
        let beta = p.b - gamma;
        let lambda = p.lambda26 - beta - gamma;
        let (nu, nu_rescale) = if p.n == 0.0 {
            (0, None)
        } else if p.n == -1.0 {
            (1, None)
        } else {
            (1, Some(p.n))
        };
        Ok(Embedding {
            canonical: CanonicalParams::Canonical25(Params25 {
                lambda,
                beta,
                gamma,
                a: p.a,
                c: p.c,
                nu,
            }),
            nu_rescale,
        })
    }
}
