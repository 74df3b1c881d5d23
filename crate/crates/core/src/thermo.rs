//! Closed-form thermodynamics of the annealed model.
//!
//! Everything is built on one coupling-generic core, the inhomogeneous
//! Curie-Weiss pressure `psi_icw(theta, B)`. The annealed pressure is
//! `alpha(beta) + psi_icw(sinh beta, B)`.

use crate::error::{Error, Result};
use crate::fixedpoint::{solve_z_star, solve_z_star_zero_field};
use crate::roots::log_cosh;
use crate::weights::WeightModel;

const LN_2: f64 = std::f64::consts::LN_2;

/// Inverse temperature, external field and weight law.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelPoint {
    pub beta: f64,
    pub b: f64,
    pub model: WeightModel,
}

impl ModelPoint {
    pub fn new(beta: f64, b: f64, model: WeightModel) -> Result<Self> {
        if !(beta >= 0.0 && beta.is_finite()) {
            return Err(Error::Validation(format!("beta must be finite and >= 0, got {beta}")));
        }
        if !b.is_finite() {
            return Err(Error::Validation(format!("field must be finite, got {b}")));
        }
        Ok(Self { beta, b, model })
    }

    /// Same temperature and weights, different field.
    pub fn with_field(&self, b: f64) -> Self {
        Self {
            beta: self.beta,
            b,
            model: self.model.clone(),
        }
    }

    /// Effective Curie-Weiss coupling `sinh beta`.
    pub fn theta(&self) -> f64 {
        self.beta.sinh()
    }

    pub fn z_star(&self) -> Result<f64> {
        Ok(solve_z_star(self.theta(), self.b, &self.model)?.z_star)
    }
}

/// `alpha(beta) = (cosh beta - 1) E[W] / 2`.
pub fn alpha(beta: f64, model: &WeightModel) -> f64 {
    0.5 * (beta.cosh() - 1.0) * model.mean()
}

/// `asinh(E[W] / E[W^2])`.
pub fn critical_beta(model: &WeightModel) -> f64 {
    (model.mean() / model.second_moment()).asinh()
}

/// Curie-Weiss pressure evaluated at a given `z`.
pub fn icw_pressure_at(z: f64, theta: f64, b: f64, model: &WeightModel) -> f64 {
    let c = (theta / model.mean()).sqrt();
    LN_2 + model.expect(|a| log_cosh(c * a * z + b)) - 0.5 * z * z
}

/// `psi_icw(theta, B) = log 2 + E log cosh(c W z* + B) - z*^2 / 2`.
pub fn icw_pressure(theta: f64, b: f64, model: &WeightModel) -> Result<f64> {
    let z = solve_z_star(theta, b, model)?.z_star;
    Ok(icw_pressure_at(z, theta, b, model))
}

/// `E tanh(c W z* + B)` at coupling `theta`.
pub fn icw_magnetization(theta: f64, b: f64, model: &WeightModel) -> Result<f64> {
    let z = solve_z_star(theta, b, model)?.z_star;
    let c = (theta / model.mean()).sqrt();
    Ok(model.expect(|a| (c * a * z + b).tanh()))
}

/// `E[W tanh(c W z* + B)]`, the limiting weighted magnetization.
pub fn icw_weighted_magnetization(theta: f64, b: f64, model: &WeightModel) -> Result<f64> {
    let z = solve_z_star(theta, b, model)?.z_star;
    let c = (theta / model.mean()).sqrt();
    Ok(model.expect(|a| a * (c * a * z + b).tanh()))
}

pub fn annealed_pressure(point: &ModelPoint) -> Result<f64> {
    Ok(alpha(point.beta, &point.model) + icw_pressure(point.theta(), point.b, &point.model)?)
}

pub fn magnetization(point: &ModelPoint) -> Result<f64> {
    icw_magnetization(point.theta(), point.b, &point.model)
}

/// Optimal weighted magnetization `x2* = E[W tanh(...)]`.
pub fn weighted_magnetization(point: &ModelPoint) -> Result<f64> {
    icw_weighted_magnetization(point.theta(), point.b, &point.model)
}

/// Spontaneous magnetization `M(beta, 0+)`, zero below criticality.
pub fn spontaneous_magnetization(beta: f64, model: &WeightModel) -> Result<f64> {
    let theta = beta.sinh();
    let z = solve_z_star_zero_field(theta, model)?.z_star;
    let c = (theta / model.mean()).sqrt();
    Ok(model.expect(|a| (c * a * z).tanh()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Susceptibility {
    pub value: f64,
    /// True when the derivative is taken from the `B > 0` side only.
    pub one_sided: bool,
}

/// `dM/dB` by central differences with one Richardson step, or the one-sided
/// limit from `B > 0` at zero field in the ordered phase.
pub fn susceptibility(point: &ModelPoint) -> Result<Susceptibility> {
    let model = &point.model;
    let beta_c = critical_beta(model);
    let b = point.b;
    if b == 0.0 && (point.beta - beta_c).abs() <= 1e-12 * beta_c.max(1.0) {
        return Err(Error::Diverging(format!(
            "susceptibility diverges at the critical point beta={}",
            point.beta
        )));
    }
    let theta = point.theta();
    let m = |field: f64| icw_magnetization(theta, field, model);
    let h = (1e-5 * b.abs()).max(1e-5);
    if b == 0.0 && point.beta > beta_c {
        let m0 = spontaneous_magnetization(point.beta, model)?;
        let one = |h: f64| -> Result<f64> { Ok((-3.0 * m0 + 4.0 * m(h)? - m(2.0 * h)?) / (2.0 * h)) };
        let coarse = one(h)?;
        let fine = one(0.5 * h)?;
        return Ok(Susceptibility {
            value: (4.0 * fine - coarse) / 3.0,
            one_sided: true,
        });
    }
    let central = |h: f64| -> Result<f64> { Ok((m(b + h)? - m(b - h)?) / (2.0 * h)) };
    let coarse = central(h)?;
    let fine = central(0.5 * h)?;
    Ok(Susceptibility {
        value: (4.0 * fine - coarse) / 3.0,
        one_sided: false,
    })
}

/// Bundle of the main thermodynamic quantities at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct ThermoReport {
    pub alpha: f64,
    pub psi_icw: f64,
    pub psi_an: f64,
    pub magnetization: f64,
    /// `None` at the critical point in zero field.
    pub susceptibility: Option<Susceptibility>,
    pub z_star: f64,
    pub beta_c: f64,
}

pub fn thermo_report(point: &ModelPoint) -> Result<ThermoReport> {
    let model = &point.model;
    let theta = point.theta();
    let z = solve_z_star(theta, point.b, model)?.z_star;
    let a = alpha(point.beta, model);
    let psi_icw = icw_pressure_at(z, theta, point.b, model);
    let susceptibility = match susceptibility(point) {
        Ok(s) => Some(s),
        Err(Error::Diverging(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(ThermoReport {
        alpha: a,
        psi_icw,
        psi_an: a + psi_icw,
        magnetization: magnetization(point)?,
        susceptibility,
        z_star: z,
        beta_c: critical_beta(model),
    })
}
