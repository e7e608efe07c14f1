//! Small dense univariate polynomials, real-root isolation and the Sylvester
//! resultant used for the equilibria of general quadratic fields.

/// Coefficients in increasing degree, `c[k]` multiplies `t^k`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Poly(pub Vec<f64>);

impl Poly {
    pub fn new(mut c: Vec<f64>) -> Self {
        while c.last() == Some(&0.0) {
            c.pop();
        }
        Poly(c)
    }

    pub fn constant(c: f64) -> Self {
        Poly::new(vec![c])
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// Degree, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, &c| acc * t + c)
    }

    pub fn derivative(&self) -> Poly {
        Poly::new(self.0.iter().enumerate().skip(1).map(|(k, &c)| k as f64 * c).collect())
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let n = self.0.len().max(o.0.len());
        Poly::new(
            (0..n)
                .map(|k| self.0.get(k).copied().unwrap_or(0.0) + o.0.get(k).copied().unwrap_or(0.0))
                .collect(),
        )
    }

    pub fn neg(&self) -> Poly {
        Poly::new(self.0.iter().map(|c| -c).collect())
    }

    pub fn sub(&self, o: &Poly) -> Poly {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        if self.is_zero() || o.is_zero() {
            return Poly::default();
        }
        let mut out = vec![0.0; self.0.len() + o.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in o.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }

    fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0_f64, |m, c| m.max(c.abs()))
    }

    /// Drop coefficients that are negligible against the largest one.
    pub fn cleaned(&self, rel: f64) -> Poly {
        let m = self.max_abs();
        Poly::new(self.0.iter().map(|&c| if c.abs() <= rel * m { 0.0 } else { c }).collect())
    }

    /// All real roots, sorted, with multiple roots reported once.
    ///
    /// Roots are isolated between consecutive real critical points (found recursively
    /// from the derivative) and refined by bisection; a critical point where the
    /// polynomial itself vanishes is reported as a multiple root.
    pub fn real_roots(&self) -> Vec<f64> {
        let p = self.cleaned(1e-14);
        match p.degree() {
            None | Some(0) => Vec::new(),
            Some(1) => vec![-p.0[0] / p.0[1]],
            Some(_) => {
                let lead = *p.0.last().unwrap();
                // Cauchy bound on root modulus.
                let bound = 1.0
                    + p.0[..p.0.len() - 1].iter().fold(0.0_f64, |m, c| m.max((c / lead).abs()));
                let crit = p.derivative().real_roots();
                let mut knots = vec![-bound];
                knots.extend(crit.iter().copied().filter(|c| c.abs() < bound));
                knots.push(bound);
                let scale = p.max_abs();
                let mut roots: Vec<f64> = Vec::new();
                for w in knots.windows(2) {
                    let (a, b) = (w[0], w[1]);
                    let (fa, fb) = (p.eval(a), p.eval(b));
                    if fa == 0.0 {
                        roots.push(a);
                    } else if fa.signum() != fb.signum() && fb != 0.0 {
                        roots.push(bisect(&p, a, b));
                    }
                }
                if p.eval(bound) == 0.0 {
                    roots.push(bound);
                }
                // Even-multiplicity roots at critical points.
                for &c in &crit {
                    if p.eval(c).abs() <= 1e-12 * scale.max(1.0) {
                        roots.push(c);
                    }
                }
                roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
                roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * (1.0 + a.abs()));
                roots
            }
        }
    }
}

fn bisect(p: &Poly, mut a: f64, mut b: f64) -> f64 {
    let mut fa = p.eval(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m == a || m == b {
            break;
        }
        let fm = p.eval(m);
        if fm == 0.0 {
            return m;
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Polynomial in `x` whose coefficients are polynomials in `y`.
pub type PolyInX = Vec<Poly>;

/// Split a quadratic `[c00, c10, c01, c20, c11, c02]` into coefficients of `x^0, x^1, x^2`.
pub fn quadratic_in_x(c: &[f64; 6]) -> PolyInX {
    let mut v = vec![
        Poly::new(vec![c[0], c[2], c[5]]),
        Poly::new(vec![c[1], c[4]]),
        Poly::new(vec![c[3]]),
    ];
    while v.last().is_some_and(Poly::is_zero) {
        v.pop();
    }
    v
}

/// Swap the roles of `x` and `y` in a quadratic coefficient array.
pub fn swap_xy(c: &[f64; 6]) -> [f64; 6] {
    [c[0], c[2], c[1], c[5], c[4], c[3]]
}

fn det(m: &[Vec<Poly>]) -> Poly {
    let n = m.len();
    match n {
        0 => Poly::constant(1.0),
        1 => m[0][0].clone(),
        _ => {
            let mut acc = Poly::default();
            for j in 0..n {
                if m[0][j].is_zero() {
                    continue;
                }
                let minor: Vec<Vec<Poly>> = m[1..]
                    .iter()
                    .map(|row| row.iter().enumerate().filter(|(k, _)| *k != j).map(|(_, p)| p.clone()).collect())
                    .collect();
                let term = m[0][j].mul(&det(&minor));
                acc = if j % 2 == 0 { acc.add(&term) } else { acc.sub(&term) };
            }
            acc
        }
    }
}

/// Sylvester resultant with respect to `x` of two polynomials given by their `x`
/// coefficients (trailing zero coefficients already removed).
///
/// Returns `None` when either input is identically zero.
pub fn resultant_x(f: &PolyInX, g: &PolyInX) -> Option<Poly> {
    if f.is_empty() || g.is_empty() {
        return None;
    }
    let (m, n) = (f.len() - 1, g.len() - 1);
    if m == 0 && n == 0 {
        return Some(Poly::constant(1.0));
    }
    let size = m + n;
    let mut rows: Vec<Vec<Poly>> = Vec::with_capacity(size);
    // Coefficients listed from the highest power of x.
    for i in 0..n {
        let mut row = vec![Poly::default(); size];
        for (k, c) in f.iter().rev().enumerate() {
            row[i + k] = c.clone();
        }
        rows.push(row);
    }
    for i in 0..m {
        let mut row = vec![Poly::default(); size];
        for (k, c) in g.iter().rev().enumerate() {
            row[i + k] = c.clone();
        }
        rows.push(row);
    }
    Some(det(&rows))
}
