//! Scalar numerics shared by the solvers.
//!
//! Overflow-safe hyperbolic helpers and log-space sums sit next to the
//! bracketed root finders and golden-section minimizers.

use crate::error::{Error, Result};

const LN_2: f64 = std::f64::consts::LN_2;

/// `log cosh(u)` without overflow for large `|u|`.
#[inline]
pub fn log_cosh(u: f64) -> f64 {
    let a = u.abs();
    a + (-2.0 * a).exp().ln_1p() - LN_2
}

/// `log(1 + e^u)`.
#[inline]
pub fn softplus(u: f64) -> f64 {
    if u > 0.0 {
        u + (-u).exp().ln_1p()
    } else {
        u.exp().ln_1p()
    }
}

/// `1 / (1 + e^{-u})`.
#[inline]
pub fn logistic(u: f64) -> f64 {
    if u >= 0.0 {
        1.0 / (1.0 + (-u).exp())
    } else {
        let e = u.exp();
        e / (1.0 + e)
    }
}

/// `sech^2(u)`, zero once `tanh` saturates.
#[inline]
pub fn sech2(u: f64) -> f64 {
    let a = u.abs();
    if a > 350.0 {
        return 0.0;
    }
    let e = (-2.0 * a).exp();
    4.0 * e / ((1.0 + e) * (1.0 + e))
}

/// Streaming log-sum-exp accumulator.
#[derive(Debug, Clone, Copy)]
pub struct LogSum {
    max: f64,
    sum: f64,
}

impl Default for LogSum {
    fn default() -> Self {
        Self::new()
    }
}

impl LogSum {
    pub fn new() -> Self {
        Self {
            max: f64::NEG_INFINITY,
            sum: 0.0,
        }
    }

    pub fn add(&mut self, x: f64) {
        if x == f64::NEG_INFINITY {
            return;
        }
        if x <= self.max {
            self.sum += (x - self.max).exp();
        } else {
            self.sum = self.sum * (self.max - x).exp() + 1.0;
            self.max = x;
        }
    }

    pub fn merge(&mut self, other: &LogSum) {
        if other.max == f64::NEG_INFINITY {
            return;
        }
        if other.max <= self.max {
            self.sum += other.sum * (other.max - self.max).exp();
        } else {
            self.sum = self.sum * (self.max - other.max).exp() + other.sum;
            self.max = other.max;
        }
    }

    /// Log of the accumulated sum; `-inf` when empty.
    pub fn value(&self) -> f64 {
        if self.max == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            self.max + self.sum.ln()
        }
    }
}

/// Log-sum-exp of a slice.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let mut acc = LogSum::new();
    for &x in xs {
        acc.add(x);
    }
    acc.value()
}

/// Bisection for a sign change of `f` on `[a, b]` down to width `tol`.
/// Returns the final bracket.
pub fn bisect<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> Result<(f64, f64)> {
    let mut fa = f(a);
    let fb = f(b);
    if fa == 0.0 {
        return Ok((a, a));
    }
    if fb == 0.0 {
        return Ok((b, b));
    }
    if fa.signum() == fb.signum() || fa.is_nan() || fb.is_nan() {
        return Err(Error::Internal(format!(
            "no sign change on [{a}, {b}]: f(a)={fa}, f(b)={fb}"
        )));
    }
    for _ in 0..400 {
        if (b - a).abs() <= tol {
            break;
        }
        let m = 0.5 * (a + b);
        if m <= a.min(b) || m >= a.max(b) {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return Ok((m, m));
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Ok((a.min(b), a.max(b)))
}

/// Root of a nondecreasing `f` with derivative `df`, safeguarded Newton
/// inside a maintained bracket `[lo, hi]` with `f(lo) <= 0 <= f(hi)`.
pub fn newton_bracketed<F>(mut fdf: F, mut lo: f64, mut hi: f64, x0: f64, xtol: f64, ftol: f64) -> f64
where
    F: FnMut(f64) -> (f64, f64),
{
    let mut x = x0.clamp(lo, hi);
    for _ in 0..300 {
        let (fx, dfx) = fdf(x);
        if fx.abs() <= ftol {
            return x;
        }
        if fx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        if hi - lo <= xtol * (1.0 + x.abs()) {
            let mid = 0.5 * (lo + hi);
            return mid;
        }
        let step = if dfx > 0.0 && dfx.is_finite() { x - fx / dfx } else { f64::NAN };
        x = if step.is_finite() && step > lo && step < hi {
            step
        } else {
            0.5 * (lo + hi)
        };
    }
    x
}

/// Extends `[lo, hi]` geometrically around `center` for a nondecreasing `f`
/// until `f(lo) <= 0 <= f(hi)` or `|t|` would exceed `limit`.
pub fn expand_bracket<F: FnMut(f64) -> f64>(mut f: F, center: f64, limit: f64) -> Option<(f64, f64)> {
    let mut width = 1.0_f64;
    let mut lo = (center - width).max(-limit);
    let mut hi = (center + width).min(limit);
    loop {
        let flo = f(lo);
        let fhi = f(hi);
        if flo <= 0.0 && fhi >= 0.0 {
            return Some((lo, hi));
        }
        if (flo > 0.0 && lo <= -limit) || (fhi < 0.0 && hi >= limit) {
            return None;
        }
        width *= 2.0;
        if flo > 0.0 {
            lo = (center - width).max(-limit);
        }
        if fhi < 0.0 {
            hi = (center + width).min(limit);
        }
    }
}

/// Golden-section minimization of a unimodal `f` on `[a, b]`.
/// Returns `(argmin, min)`.
pub fn golden_min<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    if fc <= fd { (c, fc) } else { (d, fd) }
}

/// Global minimization on `[a, b]` by a uniform scan followed by golden
/// refinement around every discrete local minimum.
pub fn scan_min<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, points: usize, tol: f64) -> (f64, f64) {
    let n = points.max(3);
    let xs: Vec<f64> = (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect();
    let ys: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let mut best = (xs[0], ys[0]);
    for i in 0..n {
        if ys[i] < best.1 || best.1.is_nan() {
            best = (xs[i], ys[i]);
        }
    }
    for i in 0..n {
        let left = if i == 0 { f64::INFINITY } else { ys[i - 1] };
        let right = if i + 1 == n { f64::INFINITY } else { ys[i + 1] };
        if ys[i] <= left && ys[i] <= right && ys[i].is_finite() {
            let lo = xs[i.saturating_sub(1)];
            let hi = xs[(i + 1).min(n - 1)];
            let cand = golden_min(&mut f, lo, hi, tol);
            if cand.1 < best.1 {
                best = cand;
            }
        }
    }
    best
}
