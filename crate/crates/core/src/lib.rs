//! Frequency-domain quantum network model of measurement chains.
//!
//! A measuring device is described as a reactive multipole coupled to
//! semi-infinite lines. Each line carries an incoming and an outgoing field,
//! normalized so that the fields obey canonical commutation relations, and the
//! device acts on them through a scattering matrix. Active elements (ideal
//! operational amplifiers) bring in *conjugated* noise channels, so the
//! consistency condition generalizes from unitarity to `S J S† = J`.
//!
//! From the scattering map the crate extracts an *estimator*: the readout
//! rescaled so that the coefficient of the measured signal is exactly one. The
//! remaining coefficients `μ_α` weight the noise sources, and the added noise is
//! `Σ = Σ_α |μ_α|² σ_α`.
//!
//! Modules:
//! - [`spectra`]: constants, frequency grids and the thermal noise laws.
//! - [`network`]: lines, reactive elements, the nodal solver and commutator checks.
//! - [`estimator`]: estimator coefficients and noise budgets.
//! - [`amplifier`]: the ideal op-amp stage in closed form.
//! - [`cascade`]: chains of stages and preamplification.
//! - [`accelerometer`]: the cold-damped capacitive accelerometer instance.
//!
//! Sign convention: `f(t) = ∫ dω/2π f[ω] e^{-iωt}`. Electronics formulas are
//! recovered by substituting `j → -i`; a capacitor therefore has impedance
//! `1/(-iωC)` and an inductor `-iωL`.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]
// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod accelerometer;
pub mod amplifier;
pub mod cascade;
mod error;
pub mod estimator;
pub mod linalg;
pub mod network;
pub mod spectra;

pub use num_complex::Complex64;

pub use error::{Error, Result};
