//! Limiting degree laws under the annealed measure.
//!
//! The degree of a vertex of weight `w` has asymptotic moment generating
//! function `exp(cosh(b) w (e^t - 1)) cosh(z* e^t w a + B) / cosh(z* w a + B)`
//! with `a = sqrt(sinh(b) / E[W])`. Expanding the hyperbolic cosines writes it
//! as a two-component Poisson mixture.

use statrs::function::factorial::ln_factorial;

use crate::error::{Error, Result};
use crate::roots::{log_cosh, logistic};
use crate::thermo::ModelPoint;

/// `a(beta) = sqrt(sinh(beta) / E[W])`.
pub fn a_beta(point: &ModelPoint) -> f64 {
    (point.theta() / point.model.mean()).sqrt()
}

/// Log of the limiting degree MGF of a vertex with weight `w`.
pub fn log_degree_mgf(t: f64, w: f64, point: &ModelPoint) -> Result<f64> {
    let z = point.z_star()?;
    let a = a_beta(point);
    let et = t.exp();
    Ok(point.beta.cosh() * w * (et - 1.0) + log_cosh(z * et * w * a + point.b) - log_cosh(z * w * a + point.b))
}

pub fn degree_mgf(t: f64, w: f64, point: &ModelPoint) -> Result<f64> {
    check_weight(w)?;
    Ok(log_degree_mgf(t, w, point)?.exp())
}

/// Degree MGF of a uniformly chosen vertex.
pub fn uniform_degree_mgf(t: f64, point: &ModelPoint) -> Result<f64> {
    let mut acc = 0.0;
    for (a, p) in point.model.support() {
        acc += p * degree_mgf(t, a, point)?;
    }
    Ok(acc)
}

/// Asymptotic joint MGF of several distinct vertices: the product of the
/// single-vertex MGFs.
pub fn joint_degree_mgf(ts: &[f64], ws: &[f64], point: &ModelPoint) -> Result<f64> {
    if ts.len() != ws.len() || ts.is_empty() {
        return Err(Error::Validation(format!(
            "need equally many tilts and weights (got {} and {})",
            ts.len(),
            ws.len()
        )));
    }
    let mut log = 0.0;
    for (&t, &w) in ts.iter().zip(ws) {
        check_weight(w)?;
        log += log_degree_mgf(t, w, point)?;
    }
    Ok(log.exp())
}

/// Two-component Poisson mixture of the limiting degree.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DegreeMixture {
    pub weight_plus: f64,
    pub weight_minus: f64,
    pub rate_plus: f64,
    pub rate_minus: f64,
    /// Both rates nonnegative, so the mixture is a probability law.
    pub valid_pmf: bool,
    pub a_beta: f64,
}

impl DegreeMixture {
    /// MGF of the mixture, `sum_Y P(Y) exp(rate_Y (e^t - 1))`.
    pub fn mgf(&self, t: f64) -> f64 {
        let s = t.exp() - 1.0;
        self.weight_plus * (self.rate_plus * s).exp() + self.weight_minus * (self.rate_minus * s).exp()
    }
}

/// Mixture rates `w (cosh b +- a z*)` with `P(Y = 1) = e^u / (2 cosh u)`,
/// `u = w a z* + B`.
pub fn degree_mixture(w: f64, point: &ModelPoint) -> Result<DegreeMixture> {
    check_weight(w)?;
    let z = point.z_star()?;
    let a = a_beta(point);
    let ch = point.beta.cosh();
    let u = w * a * z + point.b;
    let weight_plus = logistic(2.0 * u);
    let weight_minus = logistic(-2.0 * u);
    let rate_plus = w * (ch + a * z);
    let rate_minus = w * (ch - a * z);
    Ok(DegreeMixture {
        weight_plus,
        weight_minus,
        rate_plus,
        rate_minus,
        valid_pmf: rate_plus >= 0.0 && rate_minus >= 0.0,
        a_beta: a,
    })
}

fn log_poisson(d: u64, rate: f64) -> f64 {
    if rate == 0.0 {
        return if d == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    d as f64 * rate.ln() - rate - ln_factorial(d)
}

/// Limiting probability that a weight-`w` vertex has degree `d`.
pub fn degree_pmf(d: u64, w: f64, point: &ModelPoint) -> Result<f64> {
    let mix = degree_mixture(w, point)?;
    if !mix.valid_pmf {
        return Err(Error::NotAProbabilityLaw(format!(
            "rate {} is negative for w={w}",
            mix.rate_minus.min(mix.rate_plus)
        )));
    }
    Ok(mix.weight_plus * log_poisson(d, mix.rate_plus).exp()
        + mix.weight_minus * log_poisson(d, mix.rate_minus).exp())
}

fn check_weight(w: f64) -> Result<()> {
    if !(w > 0.0 && w.is_finite()) {
        return Err(Error::Validation(format!("vertex weight must be positive, got {w}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::edge_ldp::typical_edge_density;
    use crate::weights::WeightModel;

    fn pt(beta: f64, b: f64) -> ModelPoint {
        ModelPoint::new(beta, b, WeightModel::new(&[1.0, 3.0], &[0.5, 0.5]).unwrap()).unwrap()
    }

    #[test]
    fn normalization_and_free_case() {
        let p = pt(0.8, 0.1);
        assert_eq!(degree_mgf(0.0, 3.0, &p).unwrap(), 1.0);
        assert_eq!(uniform_degree_mgf(0.0, &p).unwrap(), 1.0);
        assert_eq!(joint_degree_mgf(&[0.0, 0.0], &[1.0, 3.0], &p).unwrap(), 1.0);
        let free = pt(0.0, 0.3);
        let t: f64 = 0.7;
        assert!((degree_mgf(t, 2.0, &free).unwrap() - (2.0 * (t.exp() - 1.0)).exp()).abs() < 1e-13);
        let u = uniform_degree_mgf(t, &free).unwrap();
        let expected = 0.5 * (t.exp() - 1.0).exp() + 0.5 * (3.0 * (t.exp() - 1.0)).exp();
        assert!((u - expected).abs() < 1e-13);
        assert!(joint_degree_mgf(&[0.1], &[1.0, 2.0], &p).is_err());
        assert_eq!(
            joint_degree_mgf(&[0.4], &[3.0], &p).unwrap(),
            degree_mgf(0.4, 3.0, &p).unwrap()
        );
    }

    #[test]
    fn uniform_mean_is_twice_edge_density() {
        let p = pt(0.8, 0.1);
        let h = 1e-5;
        let d = (uniform_degree_mgf(h, &p).unwrap() - uniform_degree_mgf(-h, &p).unwrap()) / (2.0 * h);
        assert!((d - 2.0 * typical_edge_density(&p).unwrap()).abs() < 1e-8);
    }

    #[test]
    fn mixture_reconstruction() {
        let p = pt(0.8, 0.1);
        let mix = degree_mixture(3.0, &p).unwrap();
        assert!((mix.weight_plus + mix.weight_minus - 1.0).abs() < 1e-12);
        for &t in &[-1.0, 0.5] {
            let a = mix.mgf(t);
            let b = degree_mgf(t, 3.0, &p).unwrap();
            assert!((a - b).abs() <= 1e-10 * b.max(1.0), "{a} vs {b}");
        }
        let free = degree_mixture(2.0, &pt(0.0, 0.4)).unwrap();
        assert_eq!((free.rate_plus, free.rate_minus), (2.0, 2.0));
        assert!(free.valid_pmf);
        let sub = degree_mixture(2.0, &pt(0.2, 0.0)).unwrap();
        assert_eq!(sub.weight_plus, 0.5);
        assert_eq!(sub.rate_plus, sub.rate_minus);
    }

    #[test]
    fn pmf_normalization_and_mean() {
        let p = pt(0.5, 0.2);
        let total: f64 = (0..=200).map(|d| degree_pmf(d, 1.0, &p).unwrap()).sum();
        assert!((total - 1.0).abs() < 1e-9);
        let mean: f64 = (0..=200).map(|d| d as f64 * degree_pmf(d, 1.0, &p).unwrap()).sum();
        let h = 1e-5;
        let dm = (degree_mgf(h, 1.0, &p).unwrap() - degree_mgf(-h, 1.0, &p).unwrap()) / (2.0 * h);
        assert!((mean - dm).abs() < 1e-8);
        let free = pt(0.0, 0.0);
        assert!((degree_pmf(0, 2.0, &free).unwrap() - (-2f64).exp()).abs() < 1e-16);
    }

    #[test]
    fn mixture_rates_stay_nonnegative() {
        // |z*| <= sqrt(sinh(b) E[W]) gives a |z*| <= sinh(b) < cosh(b)
        let m = WeightModel::new(&[0.01, 10.0], &[0.99, 0.01]).unwrap();
        for &beta in &[0.1, 1.0, 2.0, 6.0] {
            for &b in &[-2.0, 0.0, 1.0] {
                let p = ModelPoint::new(beta, b, m.clone()).unwrap();
                for &w in &[0.01, 1.0, 10.0] {
                    let mix = degree_mixture(w, &p).unwrap();
                    assert!(mix.valid_pmf && mix.rate_minus >= 0.0);
                    if beta > 2.0 {
                        continue;
                    }
                    let a = mix.mgf(0.3);
                    assert!((a - degree_mgf(0.3, w, &p).unwrap()).abs() < 1e-9 * a);
                }
            }
        }
        assert!(degree_mixture(-1.0, &pt(0.5, 0.0)).is_err());
    }

    #[test]
    fn field_flip_and_monotonicity() {
        for &b in &[0.1, 0.6] {
            let p = pt(0.8, b);
            let q = pt(0.8, -b);
            for &t in &[-1.0, 0.2, 1.0] {
                let a = degree_mgf(t, 3.0, &p).unwrap();
                let c = degree_mgf(t, 3.0, &q).unwrap();
                assert!((a - c).abs() < 1e-12 * a);
            }
            let vals: Vec<f64> = (-10..=10).map(|i| degree_mgf(0.1 * i as f64, 1.0, &p).unwrap()).collect();
            assert!(vals.windows(2).all(|w| w[1] > w[0]));
        }
    }
}
