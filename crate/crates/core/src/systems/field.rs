use serde::{Deserialize, Serialize};

/// A point of the phase plane.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// `self + t * dir`
    pub fn offset(self, dir: (f64, f64), t: f64) -> Point {
        Point::new(self.x + t * dir.0, self.y + t * dir.1)
    }
}

/// Planar vector field `x' = P(x, y), y' = Q(x, y)` with `P`, `Q` of degree at most two.
///
/// Coefficient `pij` multiplies `x^i y^j` in `P`, likewise `qij` in `Q`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeneralQuadraticField {
    pub p00: f64,
    pub p10: f64,
    pub p01: f64,
    pub p20: f64,
    pub p11: f64,
    pub p02: f64,
    pub q00: f64,
    pub q10: f64,
    pub q01: f64,
    pub q20: f64,
    pub q11: f64,
    pub q02: f64,
}

/// Coefficients of one quadratic polynomial in the order `[c00, c10, c01, c20, c11, c02]`.
pub type Quadratic = [f64; 6];

fn eval_quadratic(c: &Quadratic, x: f64, y: f64) -> f64 {
    c[0] + c[1] * x + c[2] * y + c[3] * x * x + c[4] * x * y + c[5] * y * y
}

impl GeneralQuadraticField {
    pub fn from_components(p: Quadratic, q: Quadratic) -> Self {
        Self {
            p00: p[0],
            p10: p[1],
            p01: p[2],
            p20: p[3],
            p11: p[4],
            p02: p[5],
            q00: q[0],
            q10: q[1],
            q01: q[2],
            q20: q[3],
            q11: q[4],
            q02: q[5],
        }
    }

    pub fn p(&self) -> Quadratic {
        [self.p00, self.p10, self.p01, self.p20, self.p11, self.p02]
    }

    pub fn q(&self) -> Quadratic {
        [self.q00, self.q10, self.q01, self.q20, self.q11, self.q02]
    }

    /// All twelve coefficients, `P` first.
    pub fn coefficients(&self) -> [f64; 12] {
        let (p, q) = (self.p(), self.q());
        let mut out = [0.0; 12];
        out[..6].copy_from_slice(&p);
        out[6..].copy_from_slice(&q);
        out
    }

    pub fn from_coefficients(c: [f64; 12]) -> Self {
        let mut p = [0.0; 6];
        let mut q = [0.0; 6];
        p.copy_from_slice(&c[..6]);
        q.copy_from_slice(&c[6..]);
        Self::from_components(p, q)
    }

    #[inline]
    pub fn eval(&self, x: f64, y: f64) -> (f64, f64) {
        (
            self.p00 + self.p10 * x + self.p01 * y + self.p20 * x * x + self.p11 * x * y + self.p02 * y * y,
            self.q00 + self.q10 * x + self.q01 * y + self.q20 * x * x + self.q11 * x * y + self.q02 * y * y,
        )
    }

    pub fn at(&self, pt: Point) -> (f64, f64) {
        self.eval(pt.x, pt.y)
    }

    /// Jacobian `[[P_x, P_y], [Q_x, Q_y]]`.
    #[inline]
    pub fn jacobian(&self, x: f64, y: f64) -> [[f64; 2]; 2] {
        [
            [
                self.p10 + 2.0 * self.p20 * x + self.p11 * y,
                self.p01 + self.p11 * x + 2.0 * self.p02 * y,
            ],
            [
                self.q10 + 2.0 * self.q20 * x + self.q11 * y,
                self.q01 + self.q11 * x + 2.0 * self.q02 * y,
            ],
        ]
    }

    #[inline]
    pub fn divergence(&self, x: f64, y: f64) -> f64 {
        self.p10 + 2.0 * self.p20 * x + self.p11 * y + self.q01 + self.q11 * x + 2.0 * self.q02 * y
    }

    pub fn is_zero(&self) -> bool {
        self.coefficients().iter().all(|&c| c == 0.0)
    }

    pub fn is_finite(&self) -> bool {
        self.coefficients().iter().all(|c| c.is_finite())
    }

    /// The same field written in coordinates centred at `center`.
    pub fn translated(&self, center: Point) -> Self {
        let (a, b) = (center.x, center.y);
        let shift = |c: &Quadratic| -> Quadratic {
            [
                eval_quadratic(c, a, b),
                c[1] + 2.0 * c[3] * a + c[4] * b,
                c[2] + c[4] * a + 2.0 * c[5] * b,
                c[3],
                c[4],
                c[5],
            ]
        };
        Self::from_components(shift(&self.p()), shift(&self.q()))
    }

    /// The field conjugated by the dilation `z = scale * u`, i.e. `u' = f(scale * u) / scale`.
    ///
    /// Constant terms are divided by `scale`, linear terms are unchanged and quadratic
    /// terms are multiplied by `scale`.
    pub fn dilated(&self, scale: f64) -> Self {
        let dil = |c: &Quadratic| -> Quadratic {
            [c[0] / scale, c[1], c[2], c[3] * scale, c[4] * scale, c[5] * scale]
        };
        Self::from_components(dil(&self.p()), dil(&self.q()))
    }

    /// `-f`, whose flow is the time reversal of the flow of `f`.
    pub fn reversed(&self) -> Self {
        Self::from_coefficients(self.coefficients().map(|c| -c))
    }

    pub fn sub(&self, other: &Self) -> Self {
        let (a, b) = (self.coefficients(), other.coefficients());
        let mut c = [0.0; 12];
        for i in 0..12 {
            c[i] = a[i] - b[i];
        }
        Self::from_coefficients(c)
    }

    /// Largest coefficient in absolute value.
    pub fn max_abs_coefficient(&self) -> f64 {
        self.coefficients().iter().fold(0.0_f64, |m, c| m.max(c.abs()))
    }

    /// When `P = y * (p01 + p11 x + p02 y)`, the linear cofactor `(p01, p11, p02)`.
    pub fn y_factor_of_p(&self) -> Option<(f64, f64, f64)> {
        (self.p00 == 0.0 && self.p10 == 0.0 && self.p20 == 0.0).then_some((self.p01, self.p11, self.p02))
    }

    /// Invariant lines `c + a x + b y = 0` among the line factors of `P`, as `(c, a, b)`.
    pub fn invariant_lines(&self) -> Vec<(f64, f64, f64)> {
        let Some((c, a, b)) = self.y_factor_of_p() else { return vec![] };
        [(0.0, 0.0, 1.0), (c, a, b)]
            .into_iter()
            .filter(|&(c, a, b)| {
                let n2 = a * a + b * b;
                if n2 == 0.0 {
                    return false;
                }
                // The normal component a P + b Q is quadratic along the line; test three points.
                let base = (-c * a / n2, -c * b / n2);
                let scale = 1.0 + self.max_abs_coefficient();
                [-1.0, 0.0, 1.0].iter().all(|t| {
                    let (x, y) = (base.0 - b * t, base.1 + a * t);
                    let (u, v) = self.eval(x, y);
                    (a * u + b * v).abs() <= 1e-12 * scale * n2.sqrt()
                })
            })
            .collect()
    }

    /// `P(x, -y) = -P(x, y)` and `Q(x, -y) = Q(x, y)` hold identically.
    pub fn is_reflection_symmetric(&self) -> bool {
        // P must be odd in y, Q even in y.
        self.p00 == 0.0
            && self.p10 == 0.0
            && self.p20 == 0.0
            && self.p02 == 0.0
            && self.q01 == 0.0
            && self.q11 == 0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> GeneralQuadraticField {
        GeneralQuadraticField::from_coefficients([
            0.3, -1.2, 0.7, 0.25, -0.5, 1.5, -0.1, 0.9, -2.0, 0.4, 0.6, -0.8,
        ])
    }

    #[test]
    fn translation_preserves_values() {
        let f = sample();
        let c = Point::new(-0.7, 1.3);
        let g = f.translated(c);
        for &(u, v) in &[(0.0, 0.0), (1.0, -2.0), (0.3, 0.4)] {
            let a = f.eval(c.x + u, c.y + v);
            let b = g.eval(u, v);
            assert!((a.0 - b.0).abs() < 1e-12 && (a.1 - b.1).abs() < 1e-12);
        }
    }

    #[test]
    fn dilation_conjugates_flow() {
        let f = sample();
        let s = 0.37;
        let g = f.dilated(s);
        let (u, v) = (0.8, -1.1);
        let a = f.eval(s * u, s * v);
        let b = g.eval(u, v);
        assert!((a.0 / s - b.0).abs() < 1e-12 && (a.1 / s - b.1).abs() < 1e-12);
    }

    #[test]
    fn invariant_line_of_vertical_factor() {
        // x' = -y (1 + x), y' = x + x^2 / 2 keeps x = -1 invariant, y = 0 is crossed.
        let f = GeneralQuadraticField { p01: -1.0, p11: -1.0, q10: 1.0, q20: 0.5, ..Default::default() };
        assert_eq!(f.invariant_lines(), vec![(-1.0, -1.0, 0.0)]);
        let g = GeneralQuadraticField { p02: -0.1, ..f };
        assert!(g.invariant_lines().is_empty());
    }

    #[test]
    fn divergence_is_jacobian_trace() {
        let f = sample();
        let j = f.jacobian(0.4, -0.9);
        assert!((f.divergence(0.4, -0.9) - (j[0][0] + j[1][1])).abs() < 1e-14);
    }
}
