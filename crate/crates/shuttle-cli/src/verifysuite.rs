//! End-to-end statistical verification of the sensitivity pipeline.
//!
//! For each configured channel this runs, at one transport time and one
//! correlation time:
//!
//! 1. the deterministic quadrature `G`;
//! 2. a seeded Monte-Carlo estimate of the same quantity through the
//!    first-order responses, checked to agree within three standard
//!    errors and to resolve `G` to better than 3%;
//! 3. the nonlinear simulations at several noise amplitudes, checked to
//!    scale as `lambda^2` (fitted exponent within 0.05 of 2) with a
//!    coefficient within three standard errors of the Monte-Carlo mean.
//!
//! Any failed check makes [`VerifyReport::passed`] false; the binary maps
//! that to exit code 3 so scripted pipelines can distinguish "the physics
//! disagrees" from configuration errors.

use std::fmt;

use shuttle_core::noise::{NoiseChannel, NoiseSpec};
use shuttle_core::sensitivity::{
    sensitivity_accordion, sensitivity_amplitude, sensitivity_position,
};
use shuttle_core::trajectory::Trajectory;
use shuttle_core::verify::{estimate_sensitivity_mc_with_grid, lambda_scaling_check};
use shuttle_core::{Error, Result};

use crate::config::RunConfig;

/// Tolerances of the verification checks.
pub const MC_SIGMA: f64 = 3.0;
pub const MC_RELATIVE_PRECISION: f64 = 0.03;
pub const EXPONENT_TOLERANCE: f64 = 0.05;

/// Outcome of the three checks for one channel.
#[derive(Clone, Debug)]
pub struct ChannelVerification {
    pub channel: NoiseChannel,
    /// Deterministic quadrature value `G`, J.
    pub quadrature: f64,
    /// Monte-Carlo mean, J.
    pub mc_mean: f64,
    /// Monte-Carlo standard error, J.
    pub mc_std_error: f64,
    /// `|mc_mean - quadrature| <= 3 std_error`.
    pub mc_agrees: bool,
    /// `std_error <= 3% of quadrature`.
    pub mc_resolves: bool,
    /// Fitted scaling exponent of the nonlinear excess energy.
    pub exponent: f64,
    /// `|exponent - 2| <= 0.05`.
    pub exponent_ok: bool,
    /// Fitted `lambda^2` coefficient, J.
    pub coefficient: f64,
    /// `|coefficient - mc_mean| <= 3 std_error`.
    pub coefficient_agrees: bool,
}

impl ChannelVerification {
    pub fn passed(&self) -> bool {
        self.mc_agrees && self.mc_resolves && self.exponent_ok && self.coefficient_agrees
    }
}

/// Aggregated verification outcome.
#[derive(Clone, Debug)]
pub struct VerifyReport {
    /// Transport time used, s.
    pub duration: f64,
    /// Correlation time used, s.
    pub tau: f64,
    /// Paths per Monte-Carlo estimate.
    pub paths: usize,
    /// Paths per amplitude in the scaling check.
    pub scaling_paths: usize,
    pub base_seed: u64,
    pub channels: Vec<ChannelVerification>,
    pub passed: bool,
}

/// Runs the verification described by `cfg`.
pub fn run_verification(cfg: &RunConfig) -> Result<VerifyReport> {
    let seed = cfg.mc_seed.ok_or_else(|| {
        Error::InvalidConfig("verify needs mc_seed (its estimates are seeded)".into())
    })?;
    if cfg.mc_paths < 100 {
        return Err(Error::InvalidConfig(format!(
            "verify needs mc_paths >= 100, got {}",
            cfg.mc_paths
        )));
    }
    let traj = Trajectory::design_polynomial(cfg.verify_t, cfg.lattice.distance)?;

    let mut channels = Vec::new();
    for &channel in &cfg.channels {
        let spec = NoiseSpec::ornstein_uhlenbeck(channel, cfg.strength, cfg.verify_tau)?;
        let quadrature = match channel {
            NoiseChannel::Accordion => {
                sensitivity_accordion(&cfg.derived, &traj, &spec, cfg.mode)?
            }
            NoiseChannel::Amplitude => {
                sensitivity_amplitude(&cfg.derived, &traj, &spec, cfg.mode)?
            }
            NoiseChannel::Position => {
                sensitivity_position(&cfg.derived, &traj, &spec, cfg.mode)?
            }
        }
        .total();

        let mc = estimate_sensitivity_mc_with_grid(
            &traj,
            &cfg.derived,
            &spec,
            channel,
            cfg.mode,
            cfg.mc_paths,
            seed,
            cfg.mc_grid_per_period,
        )?;
        let mc_agrees = (mc.mean - quadrature).abs() <= MC_SIGMA * mc.std_error;
        let mc_resolves = mc.std_error <= MC_RELATIVE_PRECISION * quadrature.abs();

        let fit = lambda_scaling_check(
            &traj,
            &cfg.derived,
            &spec,
            channel,
            cfg.mode,
            &cfg.lambda_grid,
            cfg.verify_paths,
            seed,
        )?;
        let exponent_ok = (fit.exponent - 2.0).abs() <= EXPONENT_TOLERANCE;
        let coefficient_agrees =
            (fit.coefficient - mc.mean).abs() <= MC_SIGMA * mc.std_error;

        channels.push(ChannelVerification {
            channel,
            quadrature,
            mc_mean: mc.mean,
            mc_std_error: mc.std_error,
            mc_agrees,
            mc_resolves,
            exponent: fit.exponent,
            exponent_ok,
            coefficient: fit.coefficient,
            coefficient_agrees,
        });
    }

    let passed = channels.iter().all(ChannelVerification::passed);
    Ok(VerifyReport {
        duration: cfg.verify_t,
        tau: cfg.verify_tau,
        paths: cfg.mc_paths,
        scaling_paths: cfg.verify_paths,
        base_seed: seed,
        channels,
        passed,
    })
}

fn yes_no(ok: bool) -> &'static str {
    if ok {
        "ok"
    } else {
        "FAIL"
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "verification: {} paths, {} scaling paths, seed {}",
            self.paths, self.scaling_paths, self.base_seed
        )?;
        for c in &self.channels {
            writeln!(f, "channel {}:", c.channel.name())?;
            writeln!(f, "  quadrature G        = {:.6e} J", c.quadrature)?;
            writeln!(
                f,
                "  monte-carlo         = {:.6e} J +- {:.2e} J  [within {} sigma: {}; stderr <= {}%: {}]",
                c.mc_mean,
                c.mc_std_error,
                MC_SIGMA,
                yes_no(c.mc_agrees),
                MC_RELATIVE_PRECISION * 100.0,
                yes_no(c.mc_resolves),
            )?;
            writeln!(
                f,
                "  scaling exponent    = {:.4}  [|exp - 2| <= {}: {}]",
                c.exponent,
                EXPONENT_TOLERANCE,
                yes_no(c.exponent_ok),
            )?;
            writeln!(
                f,
                "  lambda^2 coefficient = {:.6e} J  [within {} sigma of MC: {}]",
                c.coefficient,
                MC_SIGMA,
                yes_no(c.coefficient_agrees),
            )?;
        }
        writeln!(f, "verdict: {}", if self.passed { "PASS" } else { "FAIL" })
    }
}
