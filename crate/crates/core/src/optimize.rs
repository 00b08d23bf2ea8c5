//! One-dimensional minimization of convex functions: bracket expansion
//! followed by Brent's method (golden section with parabolic steps).

use serde::Serialize;

const GOLDEN: f64 = 0.381_966_011_250_105_1;
const MAX_EXPANSIONS: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MinimizeOptions {
    /// Absolute tolerance on the minimizer.
    pub xtol: f64,
    /// Stop once two successive accepted points differ by less than this in value
    /// and by less than `sqrt(xtol)` in position.
    pub ftol: f64,
    pub max_iter: usize,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        MinimizeOptions {
            xtol: 1e-10,
            ftol: 1e-12,
            max_iter: 200,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Minimum {
    pub x: f64,
    pub fx: f64,
    pub iterations: usize,
    pub converged: bool,
    /// False when no bracket with a descent direction on both sides was found.
    pub bracketed: bool,
}

/// Slope sign at `x` from a symmetric difference.
fn slope<F: Fn(f64) -> f64>(f: &F, x: f64) -> f64 {
    let h = 1e-6 * x.abs().max(1.0);
    f(x + h) - f(x - h)
}

/// Widens `[lo, hi]` until `f` decreases into the interval from both ends.
pub fn expand_bracket<F: Fn(f64) -> f64>(f: &F, mut lo: f64, mut hi: f64) -> (f64, f64, bool) {
    if lo > hi {
        std::mem::swap(&mut lo, &mut hi);
    }
    for _ in 0..MAX_EXPANSIONS {
        let left_ok = slope(f, lo) < 0.0;
        let right_ok = slope(f, hi) > 0.0;
        if left_ok && right_ok {
            return (lo, hi, true);
        }
        let width = hi - lo;
        if !left_ok {
            lo -= width;
        }
        if !right_ok {
            hi += width;
        }
    }
    (lo, hi, false)
}

/// Brent minimization on `[a, b]`.
pub fn brent<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, opts: &MinimizeOptions) -> Minimum {
    let (mut a, mut b) = if a < b { (a, b) } else { (b, a) };
    let mut x = a + GOLDEN * (b - a);
    let (mut w, mut v) = (x, x);
    let mut fx = f(x);
    let (mut fw, mut fv) = (fx, fx);
    let mut d: f64 = 0.0;
    let mut e: f64 = 0.0;
    let mut small_steps = 0;

    for iter in 1..=opts.max_iter {
        let mid = 0.5 * (a + b);
        let tol1 = opts.xtol * 0.5 + f64::EPSILON * x.abs();
        let tol2 = 2.0 * tol1;
        if (x - mid).abs() <= tol2 - 0.5 * (b - a) || small_steps >= 2 {
            return Minimum {
                x,
                fx,
                iterations: iter - 1,
                converged: true,
                bracketed: true,
            };
        }

        let mut golden = true;
        if e.abs() > tol1 {
            // Parabola through (v, fv), (w, fw), (x, fx).
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            } else {
                q = -q;
            }
            if p.abs() < (0.5 * q * e).abs() && p > q * (a - x) && p < q * (b - x) {
                e = d;
                d = p / q;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = if x < mid { tol1 } else { -tol1 };
                }
                golden = false;
            }
        }
        if golden {
            e = if x < mid { b - x } else { a - x };
            d = GOLDEN * e;
        }

        let u = if d.abs() >= tol1 {
            x + d
        } else {
            x + tol1.copysign(d)
        };
        let fu = f(u);

        if fu <= fx {
            if (fx - fu) < opts.ftol && (u - x).abs() < opts.xtol.sqrt() {
                small_steps += 1;
            } else {
                small_steps = 0;
            }
            if u < x {
                b = x;
            } else {
                a = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }
    Minimum {
        x,
        fx,
        iterations: opts.max_iter,
        converged: false,
        bracketed: true,
    }
}

/// Expands `[lo, hi]` into a valid bracket, then runs Brent.
pub fn minimize_convex<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    opts: &MinimizeOptions,
) -> Minimum {
    let (a, b, bracketed) = expand_bracket(&f, lo, hi);
    let mut m = brent(&f, a, b, opts);
    if !bracketed {
        m.bracketed = false;
        m.converged = false;
    }
    m
}
