//! Large deviations of the number of edges under the annealed measure.
//!
//! Tilting every edge by `e^t` rescales the Curie-Weiss coupling to
//! `e^t sinh beta`, so the limiting cumulant generating function per vertex
//! is a difference of two Curie-Weiss pressures plus the free edge term.

use crate::error::Result;
use crate::fixedpoint::solve_z_star;
use crate::legendre::RateEval;
use crate::roots::{bisect, log_cosh};
use crate::thermo::{icw_pressure, ModelPoint};

/// Bracket on the dual variable of the edge rate.
pub const EDGE_DUAL_LIMIT: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeCgfEval {
    pub t: f64,
    pub value: f64,
    pub derivative: f64,
    /// Fixed point at the tilted coupling `e^t sinh beta`.
    pub z_star_t: f64,
}

/// `phi(t) = psi_icw(e^t sinh b, B) - psi_icw(sinh b, B) + (e^t - 1) cosh(b) E[W] / 2`.
pub fn edge_cgf(t: f64, point: &ModelPoint) -> Result<EdgeCgfEval> {
    let model = &point.model;
    let theta = point.theta();
    let et = t.exp();
    let z_t = solve_z_star(et * theta, point.b, model)?.z_star;
    let value = if t == 0.0 {
        0.0
    } else {
        icw_pressure(et * theta, point.b, model)? - icw_pressure(theta, point.b, model)?
            + 0.5 * (et - 1.0) * point.beta.cosh() * model.mean()
    };
    Ok(EdgeCgfEval {
        t,
        value,
        derivative: 0.5 * z_t * z_t + 0.5 * et * point.beta.cosh() * model.mean(),
        z_star_t: z_t,
    })
}

/// `phi'(t) = z*(t)^2 / 2 + e^t cosh(beta) E[W] / 2`.
pub fn edge_cgf_derivative(t: f64, point: &ModelPoint) -> Result<f64> {
    let z_t = solve_z_star(t.exp() * point.theta(), point.b, &point.model)?.z_star;
    Ok(0.5 * z_t * z_t + 0.5 * t.exp() * point.beta.cosh() * point.model.mean())
}

/// Edges per vertex under the annealed measure.
pub fn typical_edge_density(point: &ModelPoint) -> Result<f64> {
    edge_cgf_derivative(0.0, point)
}

/// The same cumulant generating function written term by term, with the
/// `log cosh` and `z^2` pieces kept separate.
pub fn edge_cgf_expanded(t: f64, point: &ModelPoint) -> Result<f64> {
    let model = &point.model;
    let theta = point.theta();
    let et = t.exp();
    let z0 = solve_z_star(theta, point.b, model)?.z_star;
    let zt = solve_z_star(et * theta, point.b, model)?.z_star;
    let c0 = (theta / model.mean()).sqrt();
    let ct = (et * theta / model.mean()).sqrt();
    Ok(model.expect(|a| log_cosh(ct * a * zt + point.b))
        - model.expect(|a| log_cosh(c0 * a * z0 + point.b))
        + 0.5 * (z0 * z0 - zt * zt)
        + 0.5 * (et - 1.0) * point.beta.cosh() * model.mean())
}

/// Legendre transform `sup_t (t y - phi(t))` of the edge cumulant
/// generating function, with the dual restricted to `|t| <= 50`.
pub fn edge_rate(y: f64, point: &ModelPoint) -> Result<RateEval> {
    if !(y > 0.0) || !y.is_finite() {
        return Ok(RateEval::infinite((y, f64::NAN)));
    }
    let lo_d = edge_cgf_derivative(-EDGE_DUAL_LIMIT, point)?;
    let hi_d = edge_cgf_derivative(EDGE_DUAL_LIMIT, point)?;
    if y < lo_d || y > hi_d {
        return Ok(RateEval::infinite((y, f64::NAN)));
    }
    let g = |t: f64| edge_cgf_derivative(t, point).map_or(f64::NAN, |d| d - y);
    let (a, b) = bisect(g, -EDGE_DUAL_LIMIT, EDGE_DUAL_LIMIT, 1e-15)?;
    let t = 0.5 * (a + b);
    let phi = edge_cgf(t, point)?;
    Ok(RateEval {
        value: t * y - phi.value,
        duals: (t, f64::NAN),
        location: (y, f64::NAN),
        finite: true,
        exposed: true,
        residual: (phi.derivative - y).abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::WeightModel;

    fn pt(beta: f64, b: f64) -> ModelPoint {
        ModelPoint::new(beta, b, WeightModel::new(&[1.0, 3.0], &[0.5, 0.5]).unwrap()).unwrap()
    }

    #[test]
    fn zero_tilt_and_free_case() {
        assert_eq!(edge_cgf(0.0, &pt(0.8, 0.1)).unwrap().value, 0.0);
        let free = pt(0.0, 0.0);
        let e = edge_cgf(1.0, &free).unwrap();
        assert!((e.value - 1.718_281_828_459_045).abs() < 1e-15);
        assert_eq!(e.value, 0.5 * (1f64.exp() - 1.0) * 2.0);
        assert!((edge_cgf_derivative(0.0, &free).unwrap() - 1.0).abs() < 1e-15);
        assert!((typical_edge_density(&free).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn difference_form_matches_expanded_form() {
        for &(beta, b) in &[(0.8, 0.1), (0.2, 0.0), (0.8, 0.0), (1.1, -0.4)] {
            for &t in &[-1.5, -0.5, 0.3, 1.0] {
                let p = pt(beta, b);
                let a = edge_cgf(t, &p).unwrap().value;
                let e = edge_cgf_expanded(t, &p).unwrap();
                assert!((a - e).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let p = pt(0.8, 0.1);
        for &t in &[-1.0, 0.0, 1.0] {
            let h = 1e-5;
            let fd = (edge_cgf(t + h, &p).unwrap().value - edge_cgf(t - h, &p).unwrap().value) / (2.0 * h);
            let d = edge_cgf_derivative(t, &p).unwrap();
            assert!((fd - d).abs() < 1e-6, "t={t}: {fd} vs {d}");
        }
        assert_eq!(edge_cgf_derivative(0.0, &p).unwrap(), typical_edge_density(&p).unwrap());
    }

    #[test]
    fn convexity_and_positivity() {
        let p = pt(0.8, 0.1);
        let ts: Vec<f64> = (-20..=20).map(|i| 0.1 * i as f64).collect();
        let vals: Vec<EdgeCgfEval> = ts.iter().map(|&t| edge_cgf(t, &p).unwrap()).collect();
        for w in vals.windows(3) {
            assert!(w[0].value - 2.0 * w[1].value + w[2].value >= -1e-9);
        }
        assert!(vals.iter().all(|v| v.derivative > 0.0));
    }

    #[test]
    fn rate_cases() {
        let p = pt(0.8, 0.1);
        let y0 = typical_edge_density(&p).unwrap();
        let r = edge_rate(y0, &p).unwrap();
        assert!(r.value.abs() < 1e-10, "{}", r.value);
        assert!(edge_rate(y0 * 1.2, &p).unwrap().value > 0.0);
        assert!(edge_rate(y0 * 0.8, &p).unwrap().value > 0.0);
        let free = pt(0.0, 0.0);
        let r = edge_rate(2.0, &free).unwrap();
        assert!((r.value - (2.0 * 2f64.ln() - 1.0)).abs() < 1e-12);
        let tiny = edge_rate(1e-9, &p).unwrap();
        assert!(!tiny.finite || tiny.value > 1.0);
        assert!(!edge_rate(-1.0, &p).unwrap().finite);
        assert!(!edge_rate(0.0, &p).unwrap().finite);
    }

    #[test]
    fn relegendre_recovers_cgf() {
        let p = pt(0.8, 0.1);
        for &t in &[-0.5, 0.5] {
            let y_star = edge_cgf_derivative(t, &p).unwrap();
            let (_, sup) = crate::roots::golden_min(
                |y| -(t * y - edge_rate(y, &p).unwrap().value),
                0.5 * y_star,
                1.5 * y_star,
                1e-9,
            );
            let phi = edge_cgf(t, &p).unwrap().value;
            assert!((-sup - phi).abs() < 1e-5);
        }
    }

    #[test]
    fn annealing_adds_edges() {
        let m = WeightModel::new(&[1.0, 3.0], &[0.5, 0.5]).unwrap();
        for &beta in &[0.0, 0.2, 0.5, 0.8, 1.5] {
            for &b in &[0.0, 0.1, -0.7] {
                let p = ModelPoint::new(beta, b, m.clone()).unwrap();
                let y = typical_edge_density(&p).unwrap();
                if beta == 0.0 {
                    assert_eq!(y, 0.5 * m.mean());
                } else {
                    assert!(y > 0.5 * m.mean());
                }
            }
        }
        let p = pt(0.8, 0.0);
        assert!(typical_edge_density(&p).unwrap() > 0.5 * 0.8f64.cosh() * 2.0);
    }
}
