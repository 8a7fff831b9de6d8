//! Characteristic transport times and slope ratios of the white-noise
//! sensitivities.
//!
//! For white noise the trajectory-independent parts grow linearly in the
//! transport time while the trajectory-dependent parts decay, so three
//! numbers organize the whole landscape:
//!
//! * the transport time minimizing the accordion center-of-mass
//!   sensitivity (its `1/T^3` and linear pieces balance),
//! * the transport time where the two amplitude-noise contributions
//!   cross, and
//! * the large-`T` slope ratios between channels, which reduce to the
//!   ratio of the trap quantum to the recoil energy.
//!
//! Slopes are extracted numerically from the implemented closed forms at
//! large `T` (where the decaying pieces are negligible) rather than from
//! re-derived constants, so this report genuinely exercises the library.

use std::fmt;

use shuttle_core::noise::NoiseChannel;
use shuttle_core::sensitivity::{find_amplitude_crossing, find_g2k_minimum};
use shuttle_core::{Error, Result};

use crate::config::RunConfig;
use crate::sweep::white_point;

/// The quantities printed by the `extrema` subcommand.
#[derive(Clone, Copy, Debug)]
pub struct ExtremaSummary {
    /// Minimizer of the accordion center-of-mass sensitivity, trap periods.
    pub t_min_g2k_over_t0: f64,
    /// Crossing of the two amplitude-noise contributions, trap periods.
    pub t_star_amplitude_over_t0: f64,
    /// Large-`T` slope of the accordion center-of-mass part over the
    /// slope of its width part.
    pub g2k_linear_slope_over_g1k_slope: f64,
    /// Large-`T` slope of the accordion center-of-mass part over the
    /// slope of the position sensitivity.
    pub g2k_over_g2q_slope_ratio: f64,
    /// Position sensitivity over the amplitude width part (both linear
    /// in `T`, so the ratio is `T`-independent).
    pub g2q_over_g1a_ratio: f64,
    /// `hbar omega0 / E_R` for the configured lattice.
    pub hbar_omega0_over_recoil: f64,
}

/// Computes the white-noise extrema report for a configuration.
///
/// The report is only meaningful in the white-noise limit, so every entry
/// of `tau_list` must be `0`.
pub fn report_extrema(cfg: &RunConfig) -> Result<ExtremaSummary> {
    if cfg.taus.iter().any(|&t| t != 0.0) {
        return Err(Error::InvalidConfig(
            "the extrema report is defined for white noise; set tau_list = 0".into(),
        ));
    }
    let p = &cfg.derived;
    let d = cfg.lattice.distance;

    let t_min = find_g2k_minimum(p, d, cfg.strength)?;
    let t_star = find_amplitude_crossing(p, d, cfg.mode, cfg.strength)?;

    // Linear slopes from two well-separated large transport times. The
    // decaying contributions fall off as 1/T^3 and 1/T, so at 100 trap
    // periods they perturb the accordion slope below the 1e-4 level.
    let t1 = 100.0 * p.period;
    let t2 = 200.0 * p.period;
    let g1k_slope = part_slope(cfg, NoiseChannel::Accordion, Part::Width, t1, t2)?;
    let g2k_slope = part_slope(cfg, NoiseChannel::Accordion, Part::Center, t1, t2)?;
    let g1a_slope = part_slope(cfg, NoiseChannel::Amplitude, Part::Width, t1, t2)?;
    let g2q_slope = part_slope(cfg, NoiseChannel::Position, Part::Total, t1, t2)?;

    Ok(ExtremaSummary {
        t_min_g2k_over_t0: t_min / p.period,
        t_star_amplitude_over_t0: t_star / p.period,
        g2k_linear_slope_over_g1k_slope: g2k_slope / g1k_slope,
        g2k_over_g2q_slope_ratio: g2k_slope / g2q_slope,
        g2q_over_g1a_ratio: g2q_slope / g1a_slope,
        hbar_omega0_over_recoil: p.lamb_dicke_ratio,
    })
}

/// Which piece of a sensitivity result a slope is taken from.
#[derive(Clone, Copy, Debug)]
enum Part {
    Width,
    Center,
    Total,
}

fn part_slope(
    cfg: &RunConfig,
    channel: NoiseChannel,
    part: Part,
    t1: f64,
    t2: f64,
) -> Result<f64> {
    let pick = |r: &shuttle_core::sensitivity::SensitivityResult| match part {
        Part::Width => r.g1,
        Part::Center => r.g2,
        Part::Total => r.total(),
    };
    let a = pick(&white_point(cfg, channel, t1)?);
    let b = pick(&white_point(cfg, channel, t2)?);
    Ok((b - a) / (t2 - t1))
}

impl fmt::Display for ExtremaSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "T_min_G2K_over_T0 = {:.6}", self.t_min_g2k_over_t0)?;
        writeln!(
            f,
            "T_star_amplitude_over_T0 = {:.6}",
            self.t_star_amplitude_over_t0
        )?;
        writeln!(
            f,
            "G2K_linear_slope_over_G1K_slope = {:.6}",
            self.g2k_linear_slope_over_g1k_slope
        )?;
        writeln!(
            f,
            "G2K_over_G2Q_slope_ratio = {:.6}",
            self.g2k_over_g2q_slope_ratio
        )?;
        writeln!(f, "G2Q_over_G1A_ratio = {:.6}", self.g2q_over_g1a_ratio)?;
        writeln!(
            f,
            "hbar_omega0_over_recoil = {:.6}",
            self.hbar_omega0_over_recoil
        )
    }
}
