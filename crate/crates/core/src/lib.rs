//! Numerics for a gauge-field model of market dynamics.
//!
//! The crate is organised bottom-up:
//!
//! * [`soliton`] evaluates the closed-form choice-field solutions (sech curvature
//!   soliton, Hasimoto wave function, choice-curve components, derived
//!   competition/profit/Berry-phase fields and the demand-circle law).
//! * [`frenet`] integrates the Frenet-Serret system and reconstructs the choice
//!   curve from its curvature and torsion.
//! * [`kernels`] holds the Newtonian-potential and Biot-Savart quadratures and
//!   the local-induction/capital-cutoff laws.
//! * [`equilibrium`] covers money dynamics, Berry connection and phase, and
//!   finite-difference residual checks of the market field equations.
//! * [`phillips`] composes the kernels into the inflation/unemployment relation.
//! * [`config`], [`figures`], [`svg`] and [`verify`] back the `marketfield` CLI.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod equilibrium;
pub mod error;
pub mod figures;
pub mod frenet;
pub mod kernels;
pub mod phillips;
pub mod quadrature;
pub mod soliton;
pub mod svg;
pub mod verify;

pub use error::{Error, Result};
pub use soliton::SolitonParams;

/// Three-component real vector used for positions and field values.
pub type Vec3 = nalgebra::Vector3<f64>;
