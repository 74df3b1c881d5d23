//! Annealed Ising model on finite-type generalized random graphs.
//!
//! The crate computes limiting thermodynamics (pressure, magnetization,
//! susceptibility, critical temperature), large-deviation rate functions for
//! the total spin, the weighted spin and the edge count, and asymptotic
//! degree laws. Each formula can be checked against an exact finite-volume
//! enumeration ([`oracle`]) and a seeded Glauber sampler ([`mc`]).
//!
//! ```
//! use annealed_ldp::{thermo, weights::WeightModel};
//! let w = WeightModel::new(&[1.0, 3.0], &[0.5, 0.5]).unwrap();
//! let beta_c = thermo::critical_beta(&w);
//! assert!((beta_c - 0.4f64.asinh()).abs() < 1e-15);
//! ```

pub mod acceptance;
pub mod degrees;
pub mod edge_ldp;
pub mod error;
pub mod fixedpoint;
pub mod legendre;
pub mod mc;
pub mod oracle;
#[cfg(test)]
mod properties;
pub mod roots;
pub mod spin_ldp;
pub mod thermo;
pub mod weights;

pub use error::{Error, Result};
pub use thermo::ModelPoint;
pub use weights::{WeightModel, WeightSequence};
