//! JSON run records.
//!
//! A record captures everything a sweep consumed and produced: the raw
//! configuration text, the derived lattice quantities, solver settings,
//! seeds, the designed trajectories, and every output row. Replaying the
//! embedded configuration text must reproduce the CSV byte for byte, so
//! the record deliberately contains no timestamps or host information.

use serde::{Deserialize, Serialize};

/// Top-level JSON document written next to the sweep CSV.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunRecord {
    /// Name of the producing tool (the binary name).
    pub tool_name: String,
    /// Version of the producing tool.
    pub tool_version: String,
    /// Subcommand that produced this record (`run` or `verify`).
    pub command: String,
    /// The configuration file exactly as read.
    pub config_text: String,
    pub derived: DerivedSummary,
    pub quadrature: QuadratureSummary,
    /// Present when Monte-Carlo cross-checks ran.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub monte_carlo: Option<MonteCarloSummary>,
    /// One entry per distinct transport time.
    pub trajectories: Vec<TrajectorySummary>,
    /// One entry per CSV row, in CSV order.
    pub rows: Vec<RowRecord>,
    /// Human-readable anomalies (e.g. Monte-Carlo/quadrature tension).
    pub flags: Vec<String>,
}

/// Quantities derived from the lattice configuration, SI units.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DerivedSummary {
    /// Trap angular frequency `omega0`, rad/s.
    pub trap_frequency_rad_per_s: f64,
    /// `omega0 / 2 pi`, Hz.
    pub trap_frequency_hz: f64,
    /// Photon-recoil energy, J.
    pub recoil_energy_j: f64,
    /// Trap period `T0 = 2 pi / omega0`, s.
    pub period_s: f64,
    /// `hbar omega0 / E_R`.
    pub lamb_dicke_ratio: f64,
    /// Lattice wavenumber `k = 2 pi / lambda_L`, 1/m.
    pub wavenumber_per_m: f64,
    /// Normalization `G0 = hbar omega0^2 D`, J.
    pub g0_joule: f64,
}

/// Settings of the deterministic quadrature backend.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct QuadratureSummary {
    pub rtol: f64,
    /// Correlation times below this fraction of the trap period are
    /// evaluated with the white-noise closed forms.
    pub white_dispatch_tau_over_period: f64,
}

/// Settings of the stochastic estimators.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MonteCarloSummary {
    pub paths: usize,
    pub base_seed: u64,
    /// Noise-grid density, points per trap period.
    pub grid_points_per_period: f64,
    /// Row `i` uses seed `base_seed + i * row_seed_stride` (wrapping).
    pub row_seed_stride: u64,
}

/// The designed transport for one grid time.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TrajectorySummary {
    pub t_over_t0: f64,
    pub duration_s: f64,
    /// Coefficients of `q_c(t) = sum_j c_j (t/T)^j`, metres.
    pub scaled_coefficients_m: [f64; 6],
}

/// One sweep point; mirrors a CSV row.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RowRecord {
    pub channel: String,
    pub tau_over_t0: f64,
    pub t_over_t0: f64,
    pub g1_over_g0: f64,
    pub g2_over_g0: f64,
    pub g_over_g0: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub mc_g_over_g0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub mc_stderr_over_g0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub row_seed: Option<u64>,
    /// Monte-Carlo mean further than five standard errors from the
    /// quadrature value.
    pub flagged_5sigma: bool,
}

impl RunRecord {
    /// Serializes to pretty-printed JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("record serialization");
        s.push('\n');
        s
    }

    /// Parses a record previously written by [`RunRecord::to_json`].
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}
