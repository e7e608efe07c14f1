//! Adaptive explicit integration of planar quadratic fields.
//!
//! The stepper is the Dormand–Prince 8(5,3) pair with a PI (Lund-stabilised) step
//! controller. Alongside the phase point it integrates the divergence of the field,
//! so every segment carries `log det` of its linearised flow map, which the cycle
//! code uses for exact return-map slopes.
//!
//! Section crossings are located by re-taking the last step with a shorter step size
//! and solving for the step that lands on the section, so the located point is as
//! accurate as an ordinary step of the method.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::systems::{GeneralQuadraticField, Point};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegratorConfig {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: f64,
    pub h_max: f64,
    pub t_max: f64,
    /// Phase-space norm beyond which the orbit is declared unbounded.
    pub r_escape: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self { rtol: 1e-10, atol: 1e-12, h_init: 1e-3, h_max: 1.0, t_max: 1e3, r_escape: 1e3 }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<(), IntegrateError> {
        let vals = [self.rtol, self.atol, self.h_init, self.h_max, self.t_max, self.r_escape];
        if vals.iter().all(|v| v.is_finite() && *v > 0.0) {
            Ok(())
        } else {
            Err(IntegrateError::InvalidConfig(format!("{self:?}")))
        }
    }

    /// Both tolerances divided by `factor`.
    pub fn tightened(&self, factor: f64) -> Self {
        Self { rtol: self.rtol / factor, atol: self.atol / factor, ..*self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Terminal {
    TimeLimit,
    Event,
    Escape,
    EquilibriumTrap,
}

/// Oriented crossing of the ray `origin + s * direction`, `s > min_offset`.
///
/// A crossing counts when the signed distance `direction x (z - origin)` passes from
/// the side opposite `orientation` to the side of `orientation` and the transversal
/// component of the field has the sign of `orientation`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectionEvent {
    pub origin: Point,
    pub direction: (f64, f64),
    pub orientation: f64,
    pub min_offset: f64,
}

impl SectionEvent {
    pub fn signed_distance(&self, p: Point) -> f64 {
        self.direction.0 * (p.y - self.origin.y) - self.direction.1 * (p.x - self.origin.x)
    }

    pub fn offset(&self, p: Point) -> f64 {
        self.direction.0 * (p.x - self.origin.x) + self.direction.1 * (p.y - self.origin.y)
    }

    /// Transversal component `direction x f`.
    pub fn transversal(&self, f: &GeneralQuadraticField, p: Point) -> f64 {
        let (u, v) = f.at(p);
        self.direction.0 * v - self.direction.1 * u
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrbitSegment {
    pub times: Vec<f64>,
    pub states: Vec<Point>,
    pub terminal: Terminal,
    /// Integral of the divergence along the segment (log of the flow-map Jacobian).
    pub log_jacobian: f64,
    pub rejected_steps: usize,
}

impl OrbitSegment {
    pub fn last(&self) -> Point {
        *self.states.last().expect("segments hold at least the start point")
    }

    pub fn duration(&self) -> f64 {
        self.times.last().copied().unwrap_or(0.0) - self.times[0]
    }

    pub fn max_norm(&self) -> f64 {
        self.states.iter().fold(0.0_f64, |m, p| m.max(p.norm()))
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IntegrateError {
    #[error("step size underflow (h = {h:e}) at t = {t}: stiff or degenerate orbit")]
    StepUnderflow { t: f64, h: f64 },
    #[error("non-finite state at t = {t}")]
    NumericalFailure { t: f64 },
    #[error("invalid integrator configuration: {0}")]
    InvalidConfig(String),
    #[error("non-finite start point")]
    InvalidStart,
}

const H_MIN: f64 = 1e-15;
const EVENT_T_TOL: f64 = 1e-12;
const TRAP_SPEED: f64 = 1e-14;

type State = [f64; 3];

#[inline]
fn rhs(f: &GeneralQuadraticField, z: &State) -> State {
    let (u, v) = f.eval(z[0], z[1]);
    [u, v, f.divergence(z[0], z[1])]
}

#[inline]
fn axpy(z: &State, h: f64, terms: &[(f64, &State)]) -> State {
    let mut out = *z;
    for (c, k) in terms {
        let hc = h * c;
        out[0] += hc * k[0];
        out[1] += hc * k[1];
        out[2] += hc * k[2];
    }
    out
}

struct Step {
    z: State,
    /// Scaled error norm, accept when `<= 1`.
    err: f64,
}

/// One Dormand–Prince 8(5,3) step from `z` with derivative `k1`.
fn dop853_step(f: &GeneralQuadraticField, z: &State, k1: &State, h: f64, rtol: f64, atol: f64) -> Step {
    use tableau::*;
    let k2 = rhs(f, &axpy(z, h, &[(A21, k1)]));
    let k3 = rhs(f, &axpy(z, h, &[(A31, k1), (A32, &k2)]));
    let k4 = rhs(f, &axpy(z, h, &[(A41, k1), (A43, &k3)]));
    let k5 = rhs(f, &axpy(z, h, &[(A51, k1), (A53, &k3), (A54, &k4)]));
    let k6 = rhs(f, &axpy(z, h, &[(A61, k1), (A64, &k4), (A65, &k5)]));
    let k7 = rhs(f, &axpy(z, h, &[(A71, k1), (A74, &k4), (A75, &k5), (A76, &k6)]));
    let k8 = rhs(f, &axpy(z, h, &[(A81, k1), (A84, &k4), (A85, &k5), (A86, &k6), (A87, &k7)]));
    let k9 = rhs(
        f,
        &axpy(z, h, &[(A91, k1), (A94, &k4), (A95, &k5), (A96, &k6), (A97, &k7), (A98, &k8)]),
    );
    let k10 = rhs(
        f,
        &axpy(z, h, &[(A101, k1), (A104, &k4), (A105, &k5), (A106, &k6), (A107, &k7), (A108, &k8), (A109, &k9)]),
    );
    let k11 = rhs(
        f,
        &axpy(
            z,
            h,
            &[(A111, k1), (A114, &k4), (A115, &k5), (A116, &k6), (A117, &k7), (A118, &k8), (A119, &k9), (A1110, &k10)],
        ),
    );
    let k12 = rhs(
        f,
        &axpy(
            z,
            h,
            &[
                (A121, k1),
                (A124, &k4),
                (A125, &k5),
                (A126, &k6),
                (A127, &k7),
                (A128, &k8),
                (A129, &k9),
                (A1210, &k10),
                (A1211, &k11),
            ],
        ),
    );
    let ks: [(f64, &State); 8] =
        [(B1, k1), (B6, &k6), (B7, &k7), (B8, &k8), (B9, &k9), (B10, &k10), (B11, &k11), (B12, &k12)];
    let z_new = axpy(z, h, &ks);

    // Error on the phase components only.
    let mut err5 = 0.0;
    let mut err3 = 0.0;
    for i in 0..2 {
        let sk = atol + rtol * z[i].abs().max(z_new[i].abs());
        let bsum: f64 = ks.iter().map(|(c, k)| c * k[i]).sum();
        let e3 = bsum - BHH1 * k1[i] - BHH2 * k9[i] - BHH3 * k12[i];
        let e5 = ER1 * k1[i]
            + ER6 * k6[i]
            + ER7 * k7[i]
            + ER8 * k8[i]
            + ER9 * k9[i]
            + ER10 * k10[i]
            + ER11 * k11[i]
            + ER12 * k12[i];
        err3 += (e3 / sk).powi(2);
        err5 += (e5 / sk).powi(2);
    }
    let mut deno = err5 + 0.01 * err3;
    if deno <= 0.0 {
        deno = 1.0;
    }
    let err = h.abs() * err5 * (1.0 / (2.0 * deno)).sqrt();
    Step { z: z_new, err }
}

// PI controller constants (Hairer's DOP853 with Lund stabilisation switched on).
const SAFE: f64 = 0.9;
const BETA: f64 = 0.04;
const EXPO1: f64 = 1.0 / 8.0 - BETA * 0.2;
const FACC1: f64 = 1.0 / 0.333;
const FACC2: f64 = 1.0 / 6.0;

/// Integrate `f` from `start`, optionally stopping at the first oriented crossing of
/// `event`.
pub fn integrate(
    f: &GeneralQuadraticField,
    start: Point,
    cfg: &IntegratorConfig,
    event: Option<&SectionEvent>,
) -> Result<OrbitSegment, IntegrateError> {
    cfg.validate()?;
    if !start.is_finite() {
        return Err(IntegrateError::InvalidStart);
    }
    let mut t = 0.0;
    let mut z: State = [start.x, start.y, 0.0];
    let mut k1 = rhs(f, &z);
    let mut h = cfg.h_init.min(cfg.h_max).min(cfg.t_max);
    let mut facold: f64 = 1e-4;
    let mut last_rejected = false;
    let mut rejected_steps = 0;
    let mut times = vec![0.0];
    let mut states = vec![start];

    let finish = |times: Vec<f64>, states: Vec<Point>, terminal, w: f64, rejected_steps| OrbitSegment {
        times,
        states,
        terminal,
        log_jacobian: w,
        rejected_steps,
    };

    loop {
        if k1[0].hypot(k1[1]) <= TRAP_SPEED {
            return Ok(finish(times, states, Terminal::EquilibriumTrap, z[2], rejected_steps));
        }
        let remaining = cfg.t_max - t;
        if remaining <= 0.0 {
            return Ok(finish(times, states, Terminal::TimeLimit, z[2], rejected_steps));
        }
        let clipped = h >= remaining;
        let h_try = if clipped { remaining } else { h };
        let step = dop853_step(f, &z, &k1, h_try, cfg.rtol, cfg.atol);
        if !step.err.is_finite() || step.z.iter().any(|c| !c.is_finite()) {
            // Blow-up inside a step: shrink and retry.
            h = h_try * 0.1;
            if h < H_MIN {
                return Err(IntegrateError::NumericalFailure { t });
            }
            last_rejected = true;
            rejected_steps += 1;
            continue;
        }
        let fac11 = step.err.powf(EXPO1);
        if step.err <= 1.0 {
            let fac = FACC2.max(FACC1.min(fac11 / facold.powf(BETA) / SAFE));
            let mut h_new = h_try / fac;
            facold = step.err.max(1e-4);
            if last_rejected {
                h_new = h_new.min(h_try);
            }
            last_rejected = false;

            let z_prev = z;
            let k_prev = k1;
            let t_prev = t;
            let p_new = Point::new(step.z[0], step.z[1]);

            if let Some(ev) = event {
                let p_prev = Point::new(z_prev[0], z_prev[1]);
                let g0 = ev.orientation * ev.signed_distance(p_prev);
                let g1 = ev.orientation * ev.signed_distance(p_new);
                if g0 < 0.0 && g1 >= 0.0 {
                    let (hc, zc) = locate_crossing(f, ev, &z_prev, &k_prev, h_try, cfg);
                    let pc = Point::new(zc[0], zc[1]);
                    if ev.offset(pc) > ev.min_offset && ev.orientation * ev.transversal(f, pc) > 0.0 {
                        times.push(t_prev + hc);
                        states.push(pc);
                        return Ok(finish(times, states, Terminal::Event, zc[2], rejected_steps));
                    }
                }
            }

            t = if clipped { cfg.t_max } else { t + h_try };
            z = step.z;
            k1 = rhs(f, &z);
            times.push(t);
            states.push(p_new);
            if p_new.norm() >= cfg.r_escape {
                return Ok(finish(times, states, Terminal::Escape, z[2], rejected_steps));
            }
            h = h_new.min(cfg.h_max);
        } else {
            h = h_try / FACC1.min(fac11 / SAFE);
            last_rejected = true;
            rejected_steps += 1;
            if h < H_MIN {
                return Err(IntegrateError::StepUnderflow { t, h });
            }
        }
    }
}

/// Solve for the step size in `(0, h]` whose end point lies on the section.
fn locate_crossing(
    f: &GeneralQuadraticField,
    ev: &SectionEvent,
    z0: &State,
    k0: &State,
    h: f64,
    cfg: &IntegratorConfig,
) -> (f64, State) {
    let g = |s: &State| ev.orientation * ev.signed_distance(Point::new(s[0], s[1]));
    let eval = |hh: f64| {
        let s = dop853_step(f, z0, k0, hh, cfg.rtol, cfg.atol).z;
        (g(&s), s)
    };
    let (mut a, mut ga) = (0.0, g(z0));
    let (mut b, (mut gb, mut zb)) = (h, eval(h));
    if gb == 0.0 {
        return (b, zb);
    }
    // Illinois false position; falls back to bisection when the secant leaves the bracket.
    let mut side = 0i8;
    for _ in 0..200 {
        if b - a <= EVENT_T_TOL || gb.abs() <= 1e-16 {
            break;
        }
        let mut m = (a * gb - b * ga) / (gb - ga);
        if !(m > a && m < b) {
            m = 0.5 * (a + b);
        }
        let (gm, zm) = eval(m);
        if gm < 0.0 {
            a = m;
            ga = gm;
            if side == -1 {
                gb *= 0.5;
            }
            side = -1;
        } else {
            b = m;
            gb = gm;
            zb = zm;
            if side == 1 {
                ga *= 0.5;
            }
            side = 1;
        }
    }
    (b, zb)
}

#[allow(clippy::excessive_precision, clippy::unreadable_literal)]
mod tableau {
    pub const A21: f64 = 5.26001519587677318785587544488E-2;
    pub const A31: f64 = 1.97250569845378994544595329183E-2;
    pub const A32: f64 = 5.91751709536136983633785987549E-2;
    pub const A41: f64 = 2.95875854768068491816892993775E-2;
    pub const A43: f64 = 8.87627564304205475450678981324E-2;
    pub const A51: f64 = 2.41365134159266685502369798665E-1;
    pub const A53: f64 = -8.84549479328286085344864962717E-1;
    pub const A54: f64 = 9.24834003261792003115737966543E-1;
    pub const A61: f64 = 3.7037037037037037037037037037E-2;
    pub const A64: f64 = 1.70828608729473871279604482173E-1;
    pub const A65: f64 = 1.25467687566822425016691814123E-1;
    pub const A71: f64 = 3.7109375E-2;
    pub const A74: f64 = 1.70252211019544039314978060272E-1;
    pub const A75: f64 = 6.02165389804559606850219397283E-2;
    pub const A76: f64 = -1.7578125E-2;
    pub const A81: f64 = 3.70920001185047927108779319836E-2;
    pub const A84: f64 = 1.70383925712239993810214054705E-1;
    pub const A85: f64 = 1.07262030446373284651809199168E-1;
    pub const A86: f64 = -1.53194377486244017527936158236E-2;
    pub const A87: f64 = 8.27378916381402288758473766002E-3;
    pub const A91: f64 = 6.24110958716075717114429577812E-1;
    pub const A94: f64 = -3.36089262944694129406857109825E0;
    pub const A95: f64 = -8.68219346841726006818189891453E-1;
    pub const A96: f64 = 2.75920996994467083049415600797E1;
    pub const A97: f64 = 2.01540675504778934086186788979E1;
    pub const A98: f64 = -4.34898841810699588477366255144E1;
    pub const A101: f64 = 4.77662536438264365890433908527E-1;
    pub const A104: f64 = -2.48811461997166764192642586468E0;
    pub const A105: f64 = -5.90290826836842996371446475743E-1;
    pub const A106: f64 = 2.12300514481811942347288949897E1;
    pub const A107: f64 = 1.52792336328824235832596922938E1;
    pub const A108: f64 = -3.32882109689848629194453265587E1;
    pub const A109: f64 = -2.03312017085086261358222928593E-2;
    pub const A111: f64 = -9.3714243008598732571704021658E-1;
    pub const A114: f64 = 5.18637242884406370830023853209E0;
    pub const A115: f64 = 1.09143734899672957818500254654E0;
    pub const A116: f64 = -8.14978701074692612513997267357E0;
    pub const A117: f64 = -1.85200656599969598641566180701E1;
    pub const A118: f64 = 2.27394870993505042818970056734E1;
    pub const A119: f64 = 2.49360555267965238987089396762E0;
    pub const A1110: f64 = -3.0467644718982195003823669022E0;
    pub const A121: f64 = 2.27331014751653820792359768449E0;
    pub const A124: f64 = -1.05344954667372501984066689879E1;
    pub const A125: f64 = -2.00087205822486249909675718444E0;
    pub const A126: f64 = -1.79589318631187989172765950534E1;
    pub const A127: f64 = 2.79488845294199600508499808837E1;
    pub const A128: f64 = -2.85899827713502369474065508674E0;
    pub const A129: f64 = -8.87285693353062954433549289258E0;
    pub const A1210: f64 = 1.23605671757943030647266201528E1;
    pub const A1211: f64 = 6.43392746015763530355970484046E-1;

    pub const B1: f64 = 5.42937341165687622380535766363E-2;
    pub const B6: f64 = 4.45031289275240888144113950566E0;
    pub const B7: f64 = 1.89151789931450038304281599044E0;
    pub const B8: f64 = -5.8012039600105847814672114227E0;
    pub const B9: f64 = 3.1116436695781989440891606237E-1;
    pub const B10: f64 = -1.52160949662516078556178806805E-1;
    pub const B11: f64 = 2.01365400804030348374776537501E-1;
    pub const B12: f64 = 4.47106157277725905176885569043E-2;

    pub const BHH1: f64 = 0.244094488188976377952755905512E+00;
    pub const BHH2: f64 = 0.733846688281611857341361741547E+00;
    pub const BHH3: f64 = 0.220588235294117647058823529412E-01;

    pub const ER1: f64 = 0.1312004499419488073250102996E-01;
    pub const ER6: f64 = -0.1225156446376204440720569753E+01;
    pub const ER7: f64 = -0.4957589496572501915214079952E+00;
    pub const ER8: f64 = 0.1664377182454986536961530415E+01;
    pub const ER9: f64 = -0.3503288487499736816886487290E+00;
    pub const ER10: f64 = 0.3341791187130174790297318841E+00;
    pub const ER11: f64 = 0.8192320648511571246570742613E-01;
    pub const ER12: f64 = -0.2235530786388629525884427845E-01;
}
