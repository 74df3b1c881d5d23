//! Large deviations of the total spin and the total weighted spin.
//!
//! The joint rate of `(S_n / n, S_n^(w) / n)` is an entropy term minus the
//! Curie-Weiss energy. Spin and weighted-spin rates follow by contraction.
//! Two independent routes are provided for comparison: the Legendre
//! transform of the pressure in the field (exact only at high temperature)
//! and the finite-type combinatorial route with logistic multipliers.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::legendre::{entropy_rate, entropy_rate_tilted, weighted_entropy_rate, RateEval};
use crate::roots::{bisect, expand_bracket, golden_min, log_cosh, logistic, newton_bracketed, scan_min, softplus};
use crate::thermo::{
    alpha, annealed_pressure, critical_beta, icw_pressure, magnetization, spontaneous_magnetization,
    ModelPoint,
};
use crate::weights::WeightModel;

const LN_2: f64 = std::f64::consts::LN_2;

/// Number of scan points used before golden refinement in the contractions.
pub const SCAN_POINTS: usize = 41;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpinMethod {
    Contraction,
    HighTLegendre,
    Combinatorial,
}

impl SpinMethod {
    pub fn name(&self) -> &'static str {
        match self {
            SpinMethod::Contraction => "contraction",
            SpinMethod::HighTLegendre => "highT_legendre",
            SpinMethod::Combinatorial => "combinatorial",
        }
    }
}

/// Spin rate evaluated on a grid of magnetizations.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinRateCurve {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    /// Inner optimizer for each grid point (`x2*` or `x*`, NaN when unused).
    pub minimizers: Vec<f64>,
    pub method: SpinMethod,
}

/// Logistic multipliers of the combinatorial route.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaPair {
    pub lambda1: f64,
    pub lambda2: f64,
    pub residuals: (f64, f64),
}

/// Constants of the joint rate at one model point.
#[derive(Debug, Clone)]
struct JointParts {
    kappa: f64,
    b: f64,
    /// `-log 2 - alpha + psi_an`, which equals `psi_icw - log 2`.
    offset: f64,
}

impl JointParts {
    fn new(point: &ModelPoint) -> Result<Self> {
        let psi = annealed_pressure(point)?;
        Ok(Self {
            kappa: point.theta() / point.model.mean(),
            b: point.b,
            offset: -LN_2 - alpha(point.beta, &point.model) + psi,
        })
    }

    fn eval(&self, x1: f64, x2: f64, model: &WeightModel) -> RateEval {
        let r = entropy_rate(x1, x2, model);
        if !r.finite {
            return r;
        }
        RateEval {
            value: r.value - 0.5 * self.kappa * x2 * x2 - self.b * x1 + self.offset,
            ..r
        }
    }
}

/// Joint annealed rate of the spin and weighted spin.
pub fn joint_rate(x1: f64, x2: f64, point: &ModelPoint) -> Result<RateEval> {
    Ok(JointParts::new(point)?.eval(x1, x2, &point.model))
}

/// Joint rate written with the field-tilted entropy.
pub fn joint_rate_alt(x1: f64, x2: f64, point: &ModelPoint) -> Result<RateEval> {
    let parts = JointParts::new(point)?;
    let r = entropy_rate_tilted(x1, x2, point.b, &point.model);
    if !r.finite {
        return Ok(r);
    }
    Ok(RateEval {
        value: r.value - 0.5 * parts.kappa * x2 * x2 - log_cosh(point.b) + parts.offset,
        ..r
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PressureForm {
    TwoDim,
    TwoDimB,
}

/// All roots of `x = E[W tanh(B + kappa W x)]` on `[-E W, E W]`.
pub fn weighted_fixed_points(kappa: f64, b: f64, model: &WeightModel) -> Vec<f64> {
    let h = |x: f64| model.expect(|a| a * (b + kappa * a * x).tanh()) - x;
    let mean = model.mean();
    let n = 200;
    let xs: Vec<f64> = (0..=n).map(|i| -mean + 2.0 * mean * i as f64 / n as f64).collect();
    let hs: Vec<f64> = xs.iter().map(|&x| h(x)).collect();
    let mut roots = Vec::new();
    for i in 0..n {
        if hs[i] == 0.0 {
            roots.push(xs[i]);
        } else if hs[i].signum() != hs[i + 1].signum() && hs[i + 1] != 0.0 {
            if let Ok((lo, hi)) = bisect(h, xs[i], xs[i + 1], 1e-16) {
                roots.push(0.5 * (lo + hi));
            }
        }
    }
    if hs[n] == 0.0 {
        roots.push(xs[n]);
    }
    roots
}

/// Annealed pressure as minus the infimum of a variational problem in the
/// spin and weighted spin. The infimum is located through the scalar fixed
/// point of the weighted magnetization.
pub fn pressure_variational(point: &ModelPoint, form: PressureForm) -> Result<f64> {
    let model = &point.model;
    let kappa = point.theta() / model.mean();
    let b = point.b;
    let a = alpha(point.beta, model);
    let roots = weighted_fixed_points(kappa, b, model);
    if roots.is_empty() {
        return Err(Error::Internal("no weighted fixed point found".into()));
    }
    let mut best = f64::NEG_INFINITY;
    for x2 in roots {
        let value = match form {
            PressureForm::TwoDim => {
                let t = kappa * x2;
                let x1 = model.expect(|w| (b + w * t).tanh());
                let r = entropy_rate(x1, x2, model);
                if !r.finite {
                    continue;
                }
                -(r.value - 0.5 * kappa * x2 * x2 - b * x1 - LN_2 - a)
            }
            PressureForm::TwoDimB => {
                let r = weighted_entropy_rate(x2, b, model);
                if !r.finite {
                    continue;
                }
                -(r.value - 0.5 * kappa * x2 * x2 - log_cosh(b) - LN_2 - a)
            }
        };
        best = best.max(value);
    }
    if !best.is_finite() {
        return Err(Error::Internal("variational pressure not attained".into()));
    }
    Ok(best)
}

/// Rate of the spin per vertex: `inf over x2` of the joint rate.
pub fn spin_rate(m: f64, point: &ModelPoint) -> Result<RateEval> {
    let model = &point.model;
    if !(m.abs() < 1.0) {
        return Ok(RateEval::infinite((m, f64::NAN)));
    }
    let parts = JointParts::new(point)?;
    if model.support_len() == 1 {
        return Ok(parts.eval(m, model.support_min() * m, model));
    }
    let (lo, hi) = model.weighted_range_given_mean(m);
    let f = |x2: f64| parts.eval(m, x2, model).value;
    let (x2, _) = scan_min(f, lo, hi, SCAN_POINTS, 1e-10);
    Ok(parts.eval(m, x2, model))
}

/// Rate of the weighted spin per vertex: `inf over x1` of the joint rate.
pub fn weighted_spin_rate(x2: f64, point: &ModelPoint) -> Result<RateEval> {
    let model = &point.model;
    if !(x2.abs() < model.mean()) {
        return Ok(RateEval::infinite((f64::NAN, x2)));
    }
    let parts = JointParts::new(point)?;
    if model.support_len() == 1 {
        return Ok(parts.eval(x2 / model.support_min(), x2, model));
    }
    let (lo, hi) = model.mean_range_given_weighted(x2);
    let f = |x1: f64| parts.eval(x1, x2, model).value;
    let (x1, _) = golden_min(f, lo, hi, 1e-11);
    Ok(parts.eval(x1, x2, model))
}

/// Legendre transform of the pressure in the field,
/// `sup_t (m t - psi(beta, B + t)) + psi(beta, B)`.
///
/// Below the critical temperature the pressure has a kink at zero field and
/// the transform is affine on `[-m+, m+]`. Those points are returned with
/// `exposed = false`.
pub fn spin_rate_high_t(m: f64, point: &ModelPoint) -> Result<RateEval> {
    let model = &point.model;
    if !(m.abs() < 1.0) {
        return Ok(RateEval::infinite((m, f64::NAN)));
    }
    let psi_b = annealed_pressure(point)?;
    let m_plus = if point.beta > critical_beta(model) {
        spontaneous_magnetization(point.beta, model)?
    } else {
        0.0
    };
    if m_plus > 0.0 && m.abs() <= m_plus {
        let psi0 = annealed_pressure(&point.with_field(0.0))?;
        let t = -point.b;
        return Ok(RateEval {
            value: m * t - psi0 + psi_b,
            duals: (t, f64::NAN),
            location: (m, f64::NAN),
            finite: true,
            exposed: m.abs() == m_plus,
            residual: 0.0,
        });
    }
    let g = |s: f64| magnetization(&point.with_field(s)).unwrap_or(f64::NAN) - m;
    let (lo, hi) = expand_bracket(g, 0.0, 700.0)
        .ok_or_else(|| Error::Internal(format!("no field reaches magnetization {m}")))?;
    let (a, b) = bisect(g, lo, hi, 1e-15)?;
    let s = 0.5 * (a + b);
    let t = s - point.b;
    let psi_s = annealed_pressure(&point.with_field(s))?;
    Ok(RateEval {
        value: m * t - psi_s + psi_b,
        duals: (t, f64::NAN),
        location: (m, f64::NAN),
        finite: true,
        exposed: true,
        residual: g(s).abs(),
    })
}

/// Range of `x = E[W u]` over `u: atoms -> [0, 1]` with `E u = (1 + m) / 2`.
fn lambda_range(m: f64, model: &WeightModel) -> (f64, f64) {
    let (lo, hi) = model.weighted_range_given_mean(m);
    (0.5 * (lo + model.mean()), 0.5 * (hi + model.mean()))
}

fn logistic_moments(l1: f64, l2: f64, model: &WeightModel) -> (f64, f64) {
    let mut g1 = 0.0;
    let mut g2 = 0.0;
    for (a, p) in model.support() {
        let u = logistic(l1 * a + l2);
        g1 += p * u;
        g2 += p * a * u;
    }
    (g1, g2)
}

fn logistic_curvature(l1: f64, l2: f64, model: &WeightModel) -> (f64, f64, f64) {
    let mut h = (0.0, 0.0, 0.0);
    for (a, p) in model.support() {
        let u = logistic(l1 * a + l2);
        let v = u * (1.0 - u);
        h.0 += p * v;
        h.1 += p * a * v;
        h.2 += p * a * a * v;
    }
    h
}

fn solve_lambda2(q: f64, l1: f64, model: &WeightModel) -> f64 {
    let center = (q / (1.0 - q)).ln();
    let (e1, e2) = (model.support_min() * l1, model.support_max() * l1);
    let lo = center - e1.max(e2);
    let hi = center - e1.min(e2);
    if hi <= lo {
        return lo;
    }
    newton_bracketed(
        |l2| (logistic_moments(l1, l2, model).0 - q, logistic_curvature(l1, l2, model).0),
        lo,
        hi,
        center - model.mean() * l1,
        1e-16,
        1e-16,
    )
}

/// Logistic multipliers with `E u = (1 + m) / 2` and `E[W u] = x`, where
/// `u = 1 / (1 + exp(-(lambda1 W + lambda2)))`.
pub fn solve_lambda(m: f64, x: f64, model: &WeightModel) -> Result<LambdaPair> {
    if !(m.abs() < 1.0) {
        return Err(Error::Domain(format!("magnetization {m} outside (-1, 1)")));
    }
    let q = 0.5 * (1.0 + m);
    if model.support_len() == 1 {
        let a = model.support_min();
        if (x - a * q).abs() > 1e-12 * a.max(1.0) {
            return Err(Error::Domain(format!("single type forces x = {}, got {x}", a * q)));
        }
        let l2 = (q / (1.0 - q)).ln();
        let (g1, g2) = logistic_moments(0.0, l2, model);
        return Ok(LambdaPair {
            lambda1: 0.0,
            lambda2: l2,
            residuals: ((g1 - q).abs(), (g2 - x).abs()),
        });
    }
    let (lo, hi) = lambda_range(m, model);
    if !(x > lo && x < hi) {
        return Err(Error::Domain(format!("x = {x} not inside the reachable interval ({lo}, {hi})")));
    }
    let outer = |l1: f64| {
        let l2 = solve_lambda2(q, l1, model);
        logistic_moments(l1, l2, model).1 - x
    };
    let (blo, bhi) = expand_bracket(outer, 0.0, 1400.0)
        .ok_or_else(|| Error::Domain(format!("x = {x} unreachable with |lambda1| <= 1400")))?;
    let l1 = newton_bracketed(
        |l1| {
            let l2 = solve_lambda2(q, l1, model);
            let g = logistic_moments(l1, l2, model).1 - x;
            let (h11, h12, h22) = logistic_curvature(l1, l2, model);
            (g, if h11 > 0.0 { h22 - h12 * h12 / h11 } else { 0.0 })
        },
        blo,
        bhi,
        0.5 * (blo + bhi),
        1e-16,
        1e-16,
    );
    let mut l = (l1, solve_lambda2(q, l1, model));
    let resid = |l: (f64, f64)| {
        let (g1, g2) = logistic_moments(l.0, l.1, model);
        ((g1 - q).abs(), (g2 - x).abs())
    };
    let mut r = resid(l);
    for _ in 0..6 {
        let (g1, g2) = logistic_moments(l.0, l.1, model);
        let (h11, h12, h22) = logistic_curvature(l.0, l.1, model);
        // unknown order (lambda1, lambda2): Jacobian [[h12, h11], [h22, h12]]
        let det = h12 * h12 - h11 * h22;
        if det == 0.0 {
            break;
        }
        let (r1, r2) = (g1 - q, g2 - x);
        let d1 = (h12 * r1 - h11 * r2) / det;
        let d2 = (h12 * r2 - h22 * r1) / det;
        let cand = (l.0 - d1, l.1 - d2);
        let rc = resid(cand);
        if rc.0.max(rc.1) < r.0.max(r.1) {
            l = cand;
            r = rc;
        } else {
            break;
        }
    }
    Ok(LambdaPair {
        lambda1: l.0,
        lambda2: l.1,
        residuals: r,
    })
}

/// `E[u log u + (1 - u) log(1 - u)]` at the solved multipliers.
pub fn combinatorial_entropy(m: f64, x: f64, model: &WeightModel) -> Result<(f64, LambdaPair)> {
    let lam = solve_lambda(m, x, model)?;
    let value = model.expect(|a| {
        let eta = lam.lambda1 * a + lam.lambda2;
        logistic(eta) * eta - softplus(eta)
    });
    Ok((value, lam))
}

/// Spin rate through the finite-type combinatorial route, minimized over
/// the weighted up-spin density `x`.
pub fn combinatorial_spin_rate(m: f64, point: &ModelPoint) -> Result<RateEval> {
    let model = &point.model;
    if !(m.abs() < 1.0) {
        return Ok(RateEval::infinite((m, f64::NAN)));
    }
    let bt = point.theta();
    let mean = model.mean();
    let psi = icw_pressure(bt, point.b, model)?;
    let objective = |x: f64| -> Option<(f64, LambdaPair)> {
        let (ent, lam) = combinatorial_entropy(m, x, model).ok()?;
        let v = -bt * mean / 2.0 - (2.0 * bt / mean) * x * x + 2.0 * bt * x - point.b * m + ent + psi;
        Some((v, lam))
    };
    let x_star = if model.support_len() == 1 {
        model.support_min() * 0.5 * (1.0 + m)
    } else {
        let (lo, hi) = lambda_range(m, model);
        scan_min(|x| objective(x).map_or(f64::INFINITY, |o| o.0), lo, hi, SCAN_POINTS, 1e-10).0
    };
    let Some((value, lam)) = objective(x_star) else {
        return Ok(RateEval::infinite((m, x_star)));
    };
    Ok(RateEval {
        value,
        duals: (lam.lambda1, lam.lambda2),
        location: (m, x_star),
        finite: true,
        exposed: true,
        residual: lam.residuals.0.max(lam.residuals.1),
    })
}

/// Evaluates one spin-rate method over a grid, in parallel, keeping grid order.
pub fn spin_rate_curve(grid: &[f64], point: &ModelPoint, method: SpinMethod) -> Result<SpinRateCurve> {
    let evals: Vec<Result<RateEval>> = grid
        .par_iter()
        .map(|&m| match method {
            SpinMethod::Contraction => spin_rate(m, point),
            SpinMethod::HighTLegendre => spin_rate_high_t(m, point),
            SpinMethod::Combinatorial => combinatorial_spin_rate(m, point),
        })
        .collect();
    let mut values = Vec::with_capacity(grid.len());
    let mut minimizers = Vec::with_capacity(grid.len());
    for e in evals {
        let e = e?;
        values.push(e.value);
        minimizers.push(e.location.1);
    }
    Ok(SpinRateCurve {
        grid: grid.to_vec(),
        values,
        minimizers,
        method,
    })
}
