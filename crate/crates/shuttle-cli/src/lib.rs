//! Command-line front end for the `shuttle-core` library.
//!
//! The binary exposes three subcommands driven by a flat `key = value`
//! configuration file:
//!
//! * `run` — sweep the noise sensitivities over a grid of transport times
//!   and correlation times, optionally cross-checking each point with a
//!   Monte-Carlo estimate, and write a CSV table plus a JSON run record
//!   that captures everything needed to replay the sweep.
//! * `extrema` — report the characteristic transport times and slope
//!   ratios of the white-noise sensitivities for the configured lattice.
//! * `verify` — run the end-to-end statistical verification (Monte-Carlo
//!   vs. quadrature, quadratic amplitude scaling) and exit non-zero if
//!   any check fails.
//!
//! Everything the binary does is reachable through this library so that
//! integration tests can exercise the same code paths in-process.

pub mod config;
pub mod extrema;
pub mod record;
pub mod sweep;
pub mod verifysuite;
