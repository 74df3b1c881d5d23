//! The scalar order parameter `z*` of the inhomogeneous Curie-Weiss model.
//!
//! For coupling `theta` and field `B`, `z*` solves
//! `z = E[tanh(c W z + B) c W]` with `c = sqrt(theta / E[W])`. The map is
//! bounded by `sqrt(theta E[W])`, which supplies the outer bracket.

use crate::error::{Error, Result};
use crate::roots::{bisect, sech2};
use crate::weights::WeightModel;

/// Slopes at the origin up to this margin above one count as subcritical.
pub const CRITICAL_SLOPE_MARGIN: f64 = 1e-13;

/// Which root of the fixed-point equation was selected.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// `B != 0`: the unique root with the sign of `B`.
    Signed,
    /// `z* = 0` (no coupling, or zero field below criticality).
    Zero,
    /// `B = 0` above criticality: the largest positive root.
    LargestPositive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixedPoint {
    pub z_star: f64,
    /// `|g(z*) - z*|`.
    pub residual: f64,
    pub coupling: f64,
    pub field: f64,
    pub branch: Branch,
    /// Final bisection bracket before the Newton polish.
    pub bracket: (f64, f64),
}

/// `g(z)` and `g'(z)`.
fn map_and_slope(z: f64, c: f64, b: f64, model: &WeightModel) -> (f64, f64) {
    let mut g = 0.0;
    let mut dg = 0.0;
    for (a, p) in model.support() {
        let u = c * a * z + b;
        g += p * u.tanh() * c * a;
        dg += p * sech2(u) * c * c * a * a;
    }
    (g, dg)
}

/// Residual `|g(z) - z|` at coupling `theta`.
pub fn residual(z: f64, theta: f64, b: f64, model: &WeightModel) -> f64 {
    let c = (theta / model.mean()).sqrt();
    (map_and_slope(z, c, b, model).0 - z).abs()
}

/// Bisection to width 1e-10 on a bracket where `g(z) - z` changes from
/// positive to nonpositive, then two guarded Newton steps.
fn polish(lo: f64, hi: f64, c: f64, b: f64, model: &WeightModel) -> Result<(f64, (f64, f64))> {
    let h = |z: f64| map_and_slope(z, c, b, model).0 - z;
    let (a, bb) = bisect(h, lo, hi, 1e-10)?;
    let mut z = 0.5 * (a + bb);
    for _ in 0..2 {
        let (g, dg) = map_and_slope(z, c, b, model);
        let denom = 1.0 - dg;
        if denom.abs() < 1e-300 {
            break;
        }
        let next = z - (z - g) / denom;
        if next.is_finite() && (next - z).abs() <= 1e-8 {
            z = next;
        }
    }
    Ok((z, (a, bb)))
}

/// Solves for `z*(theta, B)`.
pub fn solve_z_star(theta: f64, b: f64, model: &WeightModel) -> Result<FixedPoint> {
    check_theta(theta)?;
    if b == 0.0 {
        return solve_z_star_zero_field(theta, model);
    }
    if theta == 0.0 {
        return Ok(zero(theta, b));
    }
    let c = (theta / model.mean()).sqrt();
    let bound = (theta * model.mean()).sqrt();
    let (z, bracket) = polish(0.0, bound, c, b.abs(), model).map_err(|e| {
        Error::Internal(format!(
            "fixed point bracket failed for theta={theta}, B={b}: {e}"
        ))
    })?;
    let sign = b.signum();
    let z_star = sign * z;
    Ok(FixedPoint {
        z_star,
        residual: residual(z_star, theta, b, model),
        coupling: theta,
        field: b,
        branch: Branch::Signed,
        bracket: if sign > 0.0 { bracket } else { (-bracket.1, -bracket.0) },
    })
}

/// Zero-field fixed point: `0` below criticality, otherwise the largest
/// positive root.
pub fn solve_z_star_zero_field(theta: f64, model: &WeightModel) -> Result<FixedPoint> {
    check_theta(theta)?;
    let slope = theta * model.second_moment() / model.mean();
    if theta == 0.0 || slope <= 1.0 + CRITICAL_SLOPE_MARGIN {
        return Ok(zero(theta, 0.0));
    }
    let c = (theta / model.mean()).sqrt();
    let bound = (theta * model.mean()).sqrt();
    let h = |z: f64| map_and_slope(z, c, 0.0, model).0 - z;
    let mut hi = bound;
    let mut eps = bound;
    let mut found = false;
    for _ in 0..60 {
        if h(eps) > 0.0 {
            found = true;
            break;
        }
        hi = eps;
        eps *= 0.5;
    }
    if !found {
        return Ok(zero(theta, 0.0));
    }
    let (z, bracket) = polish(eps, hi, c, 0.0, model)?;
    Ok(FixedPoint {
        z_star: z,
        residual: residual(z, theta, 0.0, model),
        coupling: theta,
        field: 0.0,
        branch: Branch::LargestPositive,
        bracket,
    })
}

fn check_theta(theta: f64) -> Result<()> {
    if !(theta >= 0.0 && theta.is_finite()) {
        return Err(Error::Domain(format!("coupling must be a finite nonnegative real, got {theta}")));
    }
    Ok(())
}

fn zero(theta: f64, b: f64) -> FixedPoint {
    FixedPoint {
        z_star: 0.0,
        residual: 0.0,
        coupling: theta,
        field: b,
        branch: Branch::Zero,
        bracket: (0.0, 0.0),
    }
}
