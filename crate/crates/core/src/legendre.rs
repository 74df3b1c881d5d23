//! Entropy rate functions obtained as Legendre transforms of
//! `Lambda(t1, t2) = E log cosh(t1 + W t2)`.
//!
//! The gradient of `Lambda` maps the dual plane onto the achievable moment
//! region `{(E s(W), E[W s(W)]) : -1 < s < 1}`. Inverting it is a nested
//! monotone problem: for fixed `t2` the first moment is increasing in `t1`,
//! and along that constraint the second moment is nondecreasing in `t2`
//! (by Cauchy-Schwarz). Both levels are solved with bracketed Newton steps
//! and the pair is finished with a full two-dimensional Newton polish.

use crate::roots::{expand_bracket, log_cosh, newton_bracketed, sech2};
use crate::weights::WeightModel;

/// Largest dual magnitude explored before a point is declared unreachable.
pub const DUAL_LIMIT: f64 = 700.0;

/// A rate-function value together with its optimizer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateEval {
    /// Rate value, `+inf` outside the effective domain.
    pub value: f64,
    /// Dual variables `(t1, t2)` (or `(lambda1, lambda2)` for the
    /// combinatorial route).
    pub duals: (f64, f64),
    /// Optimizer location `(x1, x2)`.
    pub location: (f64, f64),
    pub finite: bool,
    /// False at non-exposed points of a convex-envelope construction.
    pub exposed: bool,
    /// Largest stationarity residual at the returned duals.
    pub residual: f64,
}

impl RateEval {
    pub fn infinite(location: (f64, f64)) -> Self {
        Self {
            value: f64::INFINITY,
            duals: (f64::NAN, f64::NAN),
            location,
            finite: false,
            exposed: true,
            residual: f64::NAN,
        }
    }
}

/// `E log cosh(t1 + W t2)`.
pub fn log_mgf(t1: f64, t2: f64, model: &WeightModel) -> f64 {
    model.expect(|a| log_cosh(t1 + a * t2))
}

/// Gradient `(E tanh(t1 + W t2), E[W tanh(t1 + W t2)])`.
pub fn gradient(t1: f64, t2: f64, model: &WeightModel) -> (f64, f64) {
    let mut g1 = 0.0;
    let mut g2 = 0.0;
    for (a, p) in model.support() {
        let th = (t1 + a * t2).tanh();
        g1 += p * th;
        g2 += p * a * th;
    }
    (g1, g2)
}

/// Hessian entries `(E s, E W s, E W^2 s)` with `s = sech^2(t1 + W t2)`.
fn hessian(t1: f64, t2: f64, model: &WeightModel) -> (f64, f64, f64) {
    let mut h11 = 0.0;
    let mut h12 = 0.0;
    let mut h22 = 0.0;
    for (a, p) in model.support() {
        let s = sech2(t1 + a * t2);
        h11 += p * s;
        h12 += p * a * s;
        h22 += p * a * a * s;
    }
    (h11, h12, h22)
}

/// Solves `E tanh(t1 + W t2) = x1` for `t1`.
pub fn solve_t1(x1: f64, t2: f64, model: &WeightModel) -> f64 {
    solve_t1_shifted(x1, t2, 0.0, model)
}

/// Solves `E tanh(shift + t1 + W t2) = x1` for `t1`.
fn solve_t1_shifted(x1: f64, t2: f64, shift: f64, model: &WeightModel) -> f64 {
    let center = x1.atanh() - shift;
    let (e1, e2) = (model.support_min() * t2, model.support_max() * t2);
    let lo = center - e1.max(e2);
    let hi = center - e1.min(e2);
    if hi <= lo {
        return lo;
    }
    newton_bracketed(
        |t1| {
            let (g1, _) = gradient(shift + t1, t2, model);
            let (h11, _, _) = hessian(shift + t1, t2, model);
            (g1 - x1, h11)
        },
        lo,
        hi,
        center - model.mean() * t2,
        1e-16,
        1e-16,
    )
}

/// Solves the stationarity system `grad Lambda(t) = x`. Returns `None` when
/// `x` is not reachable with `|t2| <= DUAL_LIMIT`.
pub fn solve_duals(x1: f64, x2: f64, model: &WeightModel) -> Option<(f64, f64)> {
    solve_duals_shifted(x1, x2, 0.0, model)
}

/// Stationarity system of the field-tilted transform:
/// `E tanh(B + t1 + W t2) = x1`, `E[W tanh(B + t1 + W t2)] = x2`.
pub fn solve_duals_shifted(x1: f64, x2: f64, shift: f64, model: &WeightModel) -> Option<(f64, f64)> {
    let outer = |t2: f64| {
        let t1 = solve_t1_shifted(x1, t2, shift, model);
        gradient(shift + t1, t2, model).1 - x2
    };
    let (lo, hi) = expand_bracket(outer, 0.0, DUAL_LIMIT)?;
    let t2 = newton_bracketed(
        |t2| {
            let t1 = solve_t1_shifted(x1, t2, shift, model);
            let g2 = gradient(shift + t1, t2, model).1 - x2;
            let (h11, h12, h22) = hessian(shift + t1, t2, model);
            let d = if h11 > 0.0 { h22 - h12 * h12 / h11 } else { 0.0 };
            (g2, d)
        },
        lo,
        hi,
        0.5 * (lo + hi),
        1e-16,
        1e-16,
    );
    let t1 = solve_t1_shifted(x1, t2, shift, model);
    let (u1, t2) = polish_2d(shift + t1, t2, x1, x2, model);
    Some((u1 - shift, t2))
}

fn stationarity_residual(t1: f64, t2: f64, x1: f64, x2: f64, model: &WeightModel) -> f64 {
    let (g1, g2) = gradient(t1, t2, model);
    (g1 - x1).abs().max((g2 - x2).abs())
}

fn polish_2d(mut t1: f64, mut t2: f64, x1: f64, x2: f64, model: &WeightModel) -> (f64, f64) {
    let mut res = stationarity_residual(t1, t2, x1, x2, model);
    for _ in 0..6 {
        if res <= 1e-15 {
            break;
        }
        let (g1, g2) = gradient(t1, t2, model);
        let (h11, h12, h22) = hessian(t1, t2, model);
        let det = h11 * h22 - h12 * h12;
        if !(det > 0.0) {
            break;
        }
        let (r1, r2) = (g1 - x1, g2 - x2);
        let d1 = (h22 * r1 - h12 * r2) / det;
        let d2 = (h11 * r2 - h12 * r1) / det;
        let (n1, n2) = (t1 - d1, t2 - d2);
        let nres = stationarity_residual(n1, n2, x1, x2, model);
        if !(nres < res) {
            break;
        }
        t1 = n1;
        t2 = n2;
        res = nres;
    }
    (t1, t2)
}

/// True when `(x1, x2)` lies strictly inside the achievable moment region.
pub fn in_open_domain(x1: f64, x2: f64, model: &WeightModel) -> bool {
    if !(x1.abs() < 1.0 && x2.abs() < model.mean()) {
        return false;
    }
    if model.support_len() == 1 {
        return true;
    }
    let (lo, hi) = model.weighted_range_given_mean(x1);
    x2 > lo && x2 < hi
}

/// `I(x1, x2) = sup_t (t1 x1 + t2 x2 - E log cosh(t1 + W t2))`.
pub fn entropy_rate(x1: f64, x2: f64, model: &WeightModel) -> RateEval {
    let loc = (x1, x2);
    if !(x1.abs() < 1.0 && x2.abs() < model.mean()) {
        return RateEval::infinite(loc);
    }
    if model.support_len() == 1 {
        let a = model.support_min();
        if (x2 - a * x1).abs() > 1e-12 * a.max(1.0) {
            return RateEval::infinite(loc);
        }
        let u = x1.atanh();
        return RateEval {
            value: x1 * u - log_cosh(u),
            duals: (u, 0.0),
            location: loc,
            finite: true,
            exposed: true,
            residual: (u.tanh() - x1).abs(),
        };
    }
    if !in_open_domain(x1, x2, model) {
        return RateEval::infinite(loc);
    }
    match solve_duals(x1, x2, model) {
        Some((t1, t2)) => RateEval {
            value: t1 * x1 + t2 * x2 - log_mgf(t1, t2, model),
            duals: (t1, t2),
            location: loc,
            finite: true,
            exposed: true,
            residual: stationarity_residual(t1, t2, x1, x2, model),
        },
        None => RateEval::infinite(loc),
    }
}

/// `I^(B)(x1, x2) = sup_t (t.x - E log cosh(B + t1 + W t2)) + log cosh B`,
/// solved through its own field-shifted stationarity system.
pub fn entropy_rate_tilted(x1: f64, x2: f64, b: f64, model: &WeightModel) -> RateEval {
    let loc = (x1, x2);
    if !(x1.abs() < 1.0 && x2.abs() < model.mean()) {
        return RateEval::infinite(loc);
    }
    if model.support_len() == 1 {
        let base = entropy_rate(x1, x2, model);
        if !base.finite {
            return base;
        }
        return RateEval {
            value: base.value - b * x1 + log_cosh(b),
            duals: (base.duals.0 - b, base.duals.1),
            ..base
        };
    }
    if !in_open_domain(x1, x2, model) {
        return RateEval::infinite(loc);
    }
    match solve_duals_shifted(x1, x2, b, model) {
        Some((t1, t2)) => RateEval {
            value: t1 * x1 + t2 * x2 - log_mgf(b + t1, t2, model) + log_cosh(b),
            duals: (t1, t2),
            location: loc,
            finite: true,
            exposed: true,
            residual: stationarity_residual(b + t1, t2, x1, x2, model),
        },
        None => RateEval::infinite(loc),
    }
}

/// One-dimensional rate `sup_t (t x - E log cosh(B + W t)) + log cosh B`.
pub fn weighted_entropy_rate(x: f64, b: f64, model: &WeightModel) -> RateEval {
    let mean = model.mean();
    if !(x.abs() < mean) {
        return RateEval::infinite((f64::NAN, x));
    }
    let f = |t: f64| model.expect(|a| a * (b + a * t).tanh()) - x;
    let Some((lo, hi)) = expand_bracket(f, 0.0, DUAL_LIMIT) else {
        return RateEval::infinite((f64::NAN, x));
    };
    let t = newton_bracketed(
        |t| (f(t), model.expect(|a| a * a * sech2(b + a * t))),
        lo,
        hi,
        0.5 * (lo + hi),
        1e-16,
        1e-16,
    );
    let x1 = model.expect(|a| (b + a * t).tanh());
    RateEval {
        value: t * x - model.expect(|a| log_cosh(b + a * t)) + log_cosh(b),
        duals: (0.0, t),
        location: (x1, x),
        finite: true,
        exposed: true,
        residual: f(t).abs(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::roots::golden_min;

    fn two_type() -> WeightModel {
        WeightModel::new(&[1.0, 3.0], &[0.5, 0.5]).unwrap()
    }

    #[test]
    fn origin_is_zero() {
        let r = entropy_rate(0.0, 0.0, &two_type());
        assert!(r.finite);
        assert!(r.value.abs() < 1e-15);
        assert!(r.duals.0.abs() < 1e-14 && r.duals.1.abs() < 1e-14);
    }

    #[test]
    fn single_type_binary_entropy() {
        let m = WeightModel::single(1.0).unwrap();
        let r = entropy_rate(0.5, 0.5, &m);
        let closed = 0.75 * 1.5f64.ln() + 0.25 * 0.5f64.ln();
        assert!((r.value - closed).abs() < 1e-14);
        assert!((r.value - 0.130_812_035_941_137_6).abs() < 1e-12);
        assert!(!entropy_rate(0.5, 0.4, &m).finite);
    }

    #[test]
    fn outside_domain_is_infinite() {
        let m = two_type();
        assert_eq!(entropy_rate(1.2, 0.0, &m).value, f64::INFINITY);
        assert_eq!(entropy_rate(0.0, 2.0, &m).value, f64::INFINITY);
        // x1 = 0.9 needs x2 in (1.7, 1.9)
        assert!(!entropy_rate(0.9, 1.5, &m).finite);
        assert!(entropy_rate(0.9, 1.8, &m).finite);
        assert!(!weighted_entropy_rate(2.0, 0.1, &m).finite);
    }

    #[test]
    fn tilted_rate_zero_set() {
        let m = WeightModel::single(1.0).unwrap();
        let b: f64 = 0.4;
        let r = entropy_rate_tilted(b.tanh(), b.tanh(), b, &m);
        assert!(r.value.abs() < 1e-14);
        assert!(r.duals.0.abs() < 1e-14 && r.duals.1.abs() < 1e-14);
        let m = two_type();
        let x1 = m.expect(|_| b.tanh());
        let x2 = m.expect(|a| a * b.tanh());
        let r = entropy_rate_tilted(x1, x2, b, &m);
        assert!(r.value.abs() < 1e-12 && r.duals.0.abs() < 1e-9 && r.duals.1.abs() < 1e-9);
    }

    #[test]
    fn tilted_reduces_at_zero_field() {
        let m = two_type();
        for &(x1, x2) in &[(0.1, 0.2), (-0.3, -0.5), (0.5, 1.2), (0.0, 0.7), (-0.8, -1.5)] {
            let a = entropy_rate(x1, x2, &m).value;
            let b = entropy_rate_tilted(x1, x2, 0.0, &m).value;
            assert!((a - b).abs() <= 1e-12);
        }
    }

    /// Concave maximization over a grid, zoomed in three times.
    fn grid_sup<F: Fn(f64, f64) -> f64>(f: F, half: f64) -> f64 {
        let (mut c1, mut c2, mut h) = (0.0, 0.0, half);
        let mut best = f64::NEG_INFINITY;
        for _ in 0..4 {
            let n = 200;
            let step = 2.0 * h / n as f64;
            let mut arg = (c1, c2);
            for i in 0..=n {
                for j in 0..=n {
                    let t = (c1 - h + step * i as f64, c2 - h + step * j as f64);
                    let v = f(t.0, t.1);
                    if v > best {
                        best = v;
                        arg = t;
                    }
                }
            }
            c1 = arg.0;
            c2 = arg.1;
            h = 2.0 * step;
        }
        best
    }

    #[test]
    fn tilted_matches_grid_search() {
        let m = two_type();
        let (b, x1, x2) = (0.3f64, 0.2, 0.5);
        let oracle = grid_sup(
            |t1, t2| t1 * x1 + t2 * x2 - m.expect(|a| log_cosh(b + t1 + a * t2)) + log_cosh(b),
            10.0,
        );
        let r = entropy_rate_tilted(x1, x2, b, &m);
        assert!((r.value - oracle).abs() < 1e-8, "{} vs {}", r.value, oracle);
        assert!((r.value - 0.009_695_224_111_775_161).abs() < 1e-10, "{}", r.value);
    }

    #[test]
    fn weighted_rate_cases() {
        let single = WeightModel::single(1.0).unwrap();
        let b: f64 = 0.25;
        let r = weighted_entropy_rate(b.tanh(), b, &single);
        assert!(r.value.abs() < 1e-14 && r.duals.1.abs() < 1e-12);
        let m = two_type();
        assert!(weighted_entropy_rate(0.0, 0.0, &m).value.abs() < 1e-15);
        let r = weighted_entropy_rate(1.0, 0.0, &m);
        let (lo, hi) = m.mean_range_given_weighted(1.0);
        let (_, inner) = golden_min(|x1| entropy_rate_tilted(x1, 1.0, 0.0, &m).value, lo + 1e-9, hi - 1e-9, 1e-10);
        assert!(r.finite && (r.value - inner).abs() < 1e-8, "{} vs {}", r.value, inner);
    }

    #[test]
    fn legendre_duality_recovers_log_mgf() {
        let m = two_type();
        for &(t1, t2) in &[(0.2, 0.1), (-0.5, 0.3), (0.1, -0.4)] {
            let (g1, g2) = gradient(t1, t2, &m);
            let sup = {
                let mut best = f64::NEG_INFINITY;
                let (mut c1, mut c2, mut h) = (g1, g2, 0.2);
                for _ in 0..4 {
                    let n = 40;
                    let step = 2.0 * h / n as f64;
                    let mut arg = (c1, c2);
                    for i in 0..=n {
                        for j in 0..=n {
                            let x = (c1 - h + step * i as f64, c2 - h + step * j as f64);
                            let r = entropy_rate(x.0, x.1, &m);
                            if r.finite {
                                let v = t1 * x.0 + t2 * x.1 - r.value;
                                if v > best {
                                    best = v;
                                    arg = x;
                                }
                            }
                        }
                    }
                    c1 = arg.0;
                    c2 = arg.1;
                    h = 2.0 * step;
                }
                best
            };
            assert!((sup - log_mgf(t1, t2, &m)).abs() < 1e-6);
        }
    }

    #[test]
    fn inner_solver_monotonicity() {
        let m = two_type();
        for &t2 in &[-1.0, 0.0, 0.7] {
            let xs: Vec<f64> = (-20..=20).map(|i| gradient(0.2 * i as f64, t2, &m).0).collect();
            assert!(xs.windows(2).all(|w| w[1] > w[0]));
        }
        for &x1 in &[-0.5, 0.0, 0.6] {
            let ys: Vec<f64> = (-20..=20)
                .map(|i| {
                    let t2 = 0.25 * i as f64;
                    gradient(solve_t1(x1, t2, &m), t2, &m).1
                })
                .collect();
            assert!(ys.windows(2).all(|w| w[1] >= w[0] - 1e-14));
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn stationarity_and_nonnegativity(x1 in -0.95f64..0.95, frac in 0.02f64..0.98, b in -1.0f64..1.0) {
                let m = WeightModel::new(&[1.0, 2.0, 4.0], &[0.25, 0.5, 0.25]).unwrap();
                let (lo, hi) = m.weighted_range_given_mean(x1);
                let x2 = lo + frac * (hi - lo);
                let r = entropy_rate(x1, x2, &m);
                prop_assert!(r.finite);
                prop_assert!(r.residual <= 1e-10, "residual {}", r.residual);
                prop_assert!(r.value >= -1e-12);
                let rt = entropy_rate_tilted(x1, x2, b, &m);
                prop_assert!(rt.value >= -1e-12);
                let (u1, u2) = gradient(rt.duals.0 + b, rt.duals.1, &m);
                prop_assert!((u1 - x1).abs() <= 1e-10 && (u2 - x2).abs() <= 1e-10);
            }
        }
    }
}
