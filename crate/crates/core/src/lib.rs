//! Rotor-effective wind speed estimation with a Takagi-Sugeno disturbance
//! observer.
//!
//! The crate bundles a reduced-order turbine plant ([`plant`]), generic
//! sector-nonlinearity TS machinery ([`ts`]), the four-state wind observer
//! ([`observer`]), Riccati-based gain synthesis ([`design`]) and Lyapunov
//! certificates ([`certificate`]), wind inputs ([`wind`]), tower stiffness
//! from a transfer-matrix model ([`structural`]) and a closed-loop
//! simulator ([`sim`]).

// `!(x > y)` is used on purpose so that NaN takes the rejecting branch
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod aero;
pub mod certificate;
pub mod commands;
pub mod design;
pub mod error;
pub mod linalg;
pub mod observer;
pub mod params;
pub mod plant;
pub mod sim;
pub mod structural;
pub mod ts;
pub mod wind;

pub use error::{Error, Result};
