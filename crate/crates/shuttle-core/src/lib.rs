//! Transport of a trapped atom by a moving optical lattice, designed with
//! shortcuts to adiabaticity, together with the second-order sensitivity of
//! the final excitation energy to lattice noise.
//!
//! The library is organized around a single physical setup: a particle of
//! mass `m` held near one well of an optical lattice of depth `a` and
//! wavenumber `k`, approximated as a harmonic trap of angular frequency
//! `omega0 = sqrt(2 a k^2 / m)` whose center is steered from `0` to `d` in a
//! time `T`. The modules are
//!
//! - [`lattice`]: configuration, derived trap parameters, and the exact final
//!   excitation energy of a (generally non-ideal) transport,
//! - [`trajectory`]: the polynomial transport trajectory satisfying the
//!   boundary conditions that make the ideal transport excitation-free,
//! - [`noise`]: noise channels (lattice-spacing, depth, and position noise)
//!   and correlation models (white, Ornstein-Uhlenbeck, tabulated),
//! - [`sensitivity`]: second-order noise sensitivities of the final energy,
//!   computed by deterministic quadrature, plus closed forms and extrema,
//! - [`verify`]: independent stochastic checks of the same quantities via
//!   linear-response Monte Carlo and full nonlinear integration,
//! - [`quad`]: the adaptive Gauss-Kronrod integrator used throughout.
//!
//! Internally everything is SI: meters, seconds, kilograms, joules,
//! radians per second. Conversions to conventional presentation units
//! (recoil energies, trap periods) are left to callers.

pub mod constants;
pub mod error;
pub mod lattice;
pub mod noise;
pub mod quad;
pub mod sensitivity;
pub mod trajectory;
pub mod verify;

mod poly;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
