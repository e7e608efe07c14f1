//! Bracketed scalar root finding on fallible functions.

/// Bracket `[a, b]` with `fa`, `fb` of opposite sign. Bisects in `ln x` until the bracket
/// ratio drops below `1 + 1e-3`, then switches to Illinois false position. Stops when
/// `accept(x, fx, extra)` holds or the bracket can no longer shrink, and returns the iterate with
/// the smallest `|fx|`.
pub(crate) fn bracketed<E, T>(
    mut eval: impl FnMut(f64) -> Result<(f64, T), E>,
    (mut a, mut fa): (f64, f64),
    (mut b, mut fb): (f64, f64),
    accept: impl Fn(f64, f64, &T) -> bool,
    max_iter: usize,
) -> Result<Root<T>, E> {
    debug_assert!(a > 0.0 && b > a && fa * fb <= 0.0);
    let mut best: Option<(f64, f64, T)> = None;
    let mut side = 0i8;
    for _ in 0..max_iter {
        let x = if b / a > 1.001 {
            (a * b).sqrt()
        } else {
            // Illinois: halve the stale endpoint value after two same-side updates.
            let x = (a * fb - b * fa) / (fb - fa);
            if x > a && x < b {
                x
            } else {
                0.5 * (a + b)
            }
        };
        if !(x > a && x < b) {
            break;
        }
        let (fx, extra) = eval(x)?;
        let done = accept(x, fx, &extra);
        if best.as_ref().map_or(true, |(_, fb, _)| fx.abs() < fb.abs()) {
            best = Some((x, fx, extra));
        }
        if done || fx == 0.0 {
            break;
        }
        if (fx > 0.0) == (fa > 0.0) {
            a = x;
            fa = fx;
            if side == -1 && b / a <= 1.001 {
                fb *= 0.5;
            }
            side = -1;
        } else {
            b = x;
            fb = fx;
            if side == 1 && b / a <= 1.001 {
                fa *= 0.5;
            }
            side = 1;
        }
        if (b - a) <= 4.0 * f64::EPSILON * b {
            break;
        }
    }
    Ok(Root { best })
}

pub(crate) struct Root<T> {
    pub best: Option<(f64, f64, T)>,
}
