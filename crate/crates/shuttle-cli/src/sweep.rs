//! Sensitivity sweeps over (channel, correlation time, transport time).
//!
//! Rows are laid out channel-major, then correlation time, then transport
//! time, matching the configuration order. Each row evaluates the
//! deterministic quadrature; rows with a positive correlation time can
//! additionally run a seeded Monte-Carlo cross-check. A Monte-Carlo mean
//! more than five standard errors from the quadrature value flags the row
//! (the sweep still succeeds; the flag is recorded for a human).
//!
//! All CSV columns are dimensionless: times are in trap periods and
//! sensitivities are normalized by `G0 = hbar omega0^2 D`. Numbers are
//! printed with the shortest representation that parses back to the same
//! value, so `G_over_G0` recovers `G1_over_G0 + G2_over_G0` exactly and a
//! replayed sweep reproduces the file byte for byte.

use rayon::prelude::*;
use shuttle_core::noise::{NoiseChannel, NoiseSpec};
use shuttle_core::sensitivity::{
    sensitivity_accordion_with, sensitivity_amplitude_with, sensitivity_position_with,
    white_closed_forms, QuadSettings, SensitivityResult,
};
use shuttle_core::trajectory::Trajectory;
use shuttle_core::verify::estimate_sensitivity_mc_with_grid;
use shuttle_core::{constants::HBAR, Result};

use crate::config::RunConfig;
use crate::record::{
    DerivedSummary, MonteCarloSummary, QuadratureSummary, RowRecord, RunRecord,
    TrajectorySummary,
};

/// Column header of every sweep CSV.
pub const CSV_HEADER: &str =
    "channel,tau_over_T0,T_over_T0,G1_over_G0,G2_over_G0,G_over_G0,mc_G_over_G0,mc_stderr_over_G0";

/// Stride between per-row Monte-Carlo seeds (a 64-bit golden-ratio step,
/// so consecutive rows land far apart in seed space).
pub const ROW_SEED_STRIDE: u64 = 0x9E37_79B9_7F4A_7C15;

/// One evaluated sweep point.
#[derive(Clone, Debug)]
pub struct SweepRow {
    pub channel: NoiseChannel,
    /// Correlation time, s (`0` means white noise).
    pub tau: f64,
    /// Transport time, s.
    pub duration: f64,
    pub result: SensitivityResult,
    /// Monte-Carlo `(mean, std_error)` in J, when the cross-check ran.
    pub mc: Option<(f64, f64)>,
    pub row_seed: Option<u64>,
    pub flagged: bool,
}

/// Everything a sweep produces.
#[derive(Clone, Debug)]
pub struct SweepOutput {
    pub rows: Vec<SweepRow>,
    /// The CSV table, header included.
    pub csv: String,
    pub record: RunRecord,
}

impl SweepOutput {
    /// True when any row was flagged for Monte-Carlo/quadrature tension.
    pub fn any_flagged(&self) -> bool {
        self.rows.iter().any(|r| r.flagged)
    }
}

/// Runs the full sweep described by `cfg`. `config_text` is embedded
/// verbatim in the run record so the sweep can be replayed from it.
pub fn run_sweep(cfg: &RunConfig, config_text: &str) -> Result<SweepOutput> {
    let settings = QuadSettings::default();
    let mut points = Vec::new();
    for &channel in &cfg.channels {
        for &tau in &cfg.taus {
            for &duration in &cfg.t_grid {
                points.push((points.len(), channel, tau, duration));
            }
        }
    }

    let rows: Vec<SweepRow> = points
        .par_iter()
        .map(|&(idx, channel, tau, duration)| compute_row(cfg, &settings, idx, channel, tau, duration))
        .collect::<Result<_>>()?;

    let mut csv = String::with_capacity(64 * (rows.len() + 1));
    csv.push_str(CSV_HEADER);
    csv.push('\n');
    for row in &rows {
        csv.push_str(&format_row(row, cfg.derived.period));
        csv.push('\n');
    }

    let record = build_record(cfg, config_text, &settings, &rows)?;
    Ok(SweepOutput { rows, csv, record })
}

fn compute_row(
    cfg: &RunConfig,
    settings: &QuadSettings,
    idx: usize,
    channel: NoiseChannel,
    tau: f64,
    duration: f64,
) -> Result<SweepRow> {
    let traj = Trajectory::design_polynomial(duration, cfg.lattice.distance)?;
    let spec = if tau == 0.0 {
        NoiseSpec::white(channel, cfg.strength)?
    } else {
        NoiseSpec::ornstein_uhlenbeck(channel, cfg.strength, tau)?
    };
    let result = match channel {
        NoiseChannel::Accordion => {
            sensitivity_accordion_with(&cfg.derived, &traj, &spec, cfg.mode, settings)?
        }
        NoiseChannel::Amplitude => {
            sensitivity_amplitude_with(&cfg.derived, &traj, &spec, cfg.mode, settings)?
        }
        NoiseChannel::Position => {
            sensitivity_position_with(&cfg.derived, &traj, &spec, cfg.mode, settings)?
        }
    };

    let (mc, row_seed) = if tau > 0.0 && cfg.mc_paths > 0 {
        let seed = cfg
            .mc_seed
            .expect("validated: mc_seed present when mc_paths > 0")
            .wrapping_add((idx as u64).wrapping_mul(ROW_SEED_STRIDE));
        let est = estimate_sensitivity_mc_with_grid(
            &traj,
            &cfg.derived,
            &spec,
            channel,
            cfg.mode,
            cfg.mc_paths,
            seed,
            cfg.mc_grid_per_period,
        )?;
        (Some((est.mean, est.std_error)), Some(seed))
    } else {
        (None, None)
    };

    let flagged = match mc {
        Some((mean, se)) => (mean - result.total()).abs() > 5.0 * se,
        None => false,
    };

    Ok(SweepRow { channel, tau, duration, result, mc, row_seed, flagged })
}

fn format_row(row: &SweepRow, period: f64) -> String {
    let g0 = row.result.g0;
    let (mc_g, mc_se) = match row.mc {
        Some((mean, se)) => (format!("{}", mean / g0), format!("{}", se / g0)),
        None => (String::new(), String::new()),
    };
    // The total column is the sum of the two emitted normalized columns,
    // so a reader recovers it exactly from them.
    let g1n = row.result.g1_normalized();
    let g2n = row.result.g2_normalized();
    format!(
        "{},{},{},{},{},{},{},{}",
        row.channel.name(),
        row.tau / period,
        row.duration / period,
        g1n,
        g2n,
        g1n + g2n,
        mc_g,
        mc_se,
    )
}

fn build_record(
    cfg: &RunConfig,
    config_text: &str,
    settings: &QuadSettings,
    rows: &[SweepRow],
) -> Result<RunRecord> {
    let p = &cfg.derived;
    let derived = DerivedSummary {
        trap_frequency_rad_per_s: p.trap_frequency,
        trap_frequency_hz: p.trap_frequency / std::f64::consts::TAU,
        recoil_energy_j: p.recoil_energy,
        period_s: p.period,
        lamb_dicke_ratio: p.lamb_dicke_ratio,
        wavenumber_per_m: p.wavenumber,
        g0_joule: HBAR * p.trap_frequency * p.trap_frequency * cfg.strength,
    };
    let monte_carlo = if rows.iter().any(|r| r.mc.is_some()) {
        Some(MonteCarloSummary {
            paths: cfg.mc_paths,
            base_seed: cfg.mc_seed.expect("mc rows imply a seed"),
            grid_points_per_period: cfg.mc_grid_per_period,
            row_seed_stride: ROW_SEED_STRIDE,
        })
    } else {
        None
    };

    let mut trajectories = Vec::new();
    for &duration in &cfg.t_grid {
        if trajectories
            .iter()
            .any(|t: &TrajectorySummary| t.duration_s == duration)
        {
            continue;
        }
        let traj = Trajectory::design_polynomial(duration, cfg.lattice.distance)?;
        trajectories.push(TrajectorySummary {
            t_over_t0: duration / p.period,
            duration_s: duration,
            scaled_coefficients_m: traj.scaled_coefficients(),
        });
    }

    let mut flags = Vec::new();
    let row_records = rows
        .iter()
        .map(|row| {
            let g0 = row.result.g0;
            if row.flagged {
                flags.push(format!(
                    "row channel={} tau/T0={} T/T0={}: Monte-Carlo mean is more than \
                     5 standard errors from the quadrature value",
                    row.channel.name(),
                    row.tau / p.period,
                    row.duration / p.period,
                ));
            }
            RowRecord {
                channel: row.channel.name().to_string(),
                tau_over_t0: row.tau / p.period,
                t_over_t0: row.duration / p.period,
                g1_over_g0: row.result.g1_normalized(),
                g2_over_g0: row.result.g2_normalized(),
                g_over_g0: row.result.g1_normalized() + row.result.g2_normalized(),
                mc_g_over_g0: row.mc.map(|(mean, _)| mean / g0),
                mc_stderr_over_g0: row.mc.map(|(_, se)| se / g0),
                row_seed: row.row_seed,
                flagged_5sigma: row.flagged,
            }
        })
        .collect();

    Ok(RunRecord {
        tool_name: "shuttle".to_string(),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        command: "run".to_string(),
        config_text: config_text.to_string(),
        derived,
        quadrature: QuadratureSummary {
            rtol: settings.rtol,
            white_dispatch_tau_over_period: settings.white_dispatch_tau_over_period,
        },
        monte_carlo,
        trajectories,
        rows: row_records,
        flags,
    })
}

/// Convenience used by tests and the `extrema` command: the white-noise
/// sensitivity of one channel at one transport time.
pub fn white_point(
    cfg: &RunConfig,
    channel: NoiseChannel,
    duration: f64,
) -> Result<SensitivityResult> {
    white_closed_forms(
        &cfg.derived,
        duration,
        cfg.lattice.distance,
        cfg.mode,
        cfg.strength,
        channel,
    )
}
