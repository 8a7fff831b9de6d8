//! Noise channels, correlation models, and reproducible path sampling.
//!
//! Three multiplicative lattice noise channels are treated, each entering
//! the trap Hamiltonian through a dimensionless stationary process
//! `lambda xi(t)` with `E[xi] = 0` and `E[xi(t) xi(t+s)] = alpha(|s|)`:
//!
//! - accordion: wavenumber fluctuation `K = k [1 + lambda xi]` (lattice
//!   compression/expansion about the pivot),
//! - amplitude: depth fluctuation `A = a [1 + lambda xi]`,
//! - position: phase fluctuation displacing the trap by `lambda xi / k`.
//!
//! Correlation models: white noise `alpha(t) = D delta(t)` (defined only
//! under integrals, with the one-sided convention
//! `integral_0^T alpha(s) g(s) ds = (D/2) g(0+)`), Ornstein-Uhlenbeck noise
//! `alpha(t) = (D/2 tau) exp(-t/tau)` which recovers white noise as
//! `tau -> 0`, and tabulated correlation functions interpolated linearly
//! from user data.

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::{Error, Result};

/// Which lattice parameter the noise perturbs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NoiseChannel {
    /// Wavenumber ("accordion") noise `K = k [1 + lambda xi(t)]`.
    Accordion,
    /// Depth (amplitude) noise `A = a [1 + lambda xi(t)]`.
    Amplitude,
    /// Phase noise displacing the trap position by `lambda xi(t) / k`.
    Position,
}

impl NoiseChannel {
    /// Lower-case name used in CSV output and config files.
    pub fn name(self) -> &'static str {
        match self {
            NoiseChannel::Accordion => "accordion",
            NoiseChannel::Amplitude => "amplitude",
            NoiseChannel::Position => "position",
        }
    }
}

impl std::fmt::Display for NoiseChannel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Stationary correlation model for the dimensionless process `xi(t)`.
///
/// `strength` is the white-noise-equivalent intensity `D` (units s):
/// `D = 2 integral_0^inf alpha(t) dt` for the smooth models.
#[derive(Clone, Debug, PartialEq)]
pub enum CorrelationModel {
    /// `alpha(t) = D delta(t)`; evaluate only under integrals.
    White { strength: f64 },
    /// `alpha(t) = (D / 2 tau) exp(-t / tau)`.
    OrnsteinUhlenbeck { strength: f64, correlation_time: f64 },
    /// `alpha(t)` linearly interpolated on a strictly increasing grid
    /// starting at `t = 0`; no extrapolation beyond the last point.
    Tabulated { times: Vec<f64>, values: Vec<f64> },
}

/// A noise channel paired with its correlation model.
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseSpec {
    pub channel: NoiseChannel,
    pub model: CorrelationModel,
}

impl NoiseSpec {
    /// White noise of intensity `strength` (s) on `channel`.
    pub fn white(channel: NoiseChannel, strength: f64) -> Result<Self> {
        let spec = NoiseSpec { channel, model: CorrelationModel::White { strength } };
        spec.validate()?;
        Ok(spec)
    }

    /// Ornstein-Uhlenbeck noise of intensity `strength` (s) and correlation
    /// time `correlation_time` (s) on `channel`.
    pub fn ornstein_uhlenbeck(
        channel: NoiseChannel,
        strength: f64,
        correlation_time: f64,
    ) -> Result<Self> {
        let spec = NoiseSpec {
            channel,
            model: CorrelationModel::OrnsteinUhlenbeck { strength, correlation_time },
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Tabulated correlation function from parallel `(times, values)` grids.
    pub fn tabulated(channel: NoiseChannel, times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let spec = NoiseSpec { channel, model: CorrelationModel::Tabulated { times, values } };
        spec.validate()?;
        Ok(spec)
    }

    /// Tabulated correlation function parsed from two-column CSV text:
    /// `t_seconds,alpha` per line, `#`-prefixed comment lines and blank
    /// lines ignored. Strict: anything else is a parse error with its line
    /// number.
    pub fn tabulated_from_csv_text(channel: NoiseChannel, text: &str) -> Result<Self> {
        let mut times = Vec::new();
        let mut values = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut fields = line.split(',');
            let (Some(t_str), Some(a_str), None) = (fields.next(), fields.next(), fields.next())
            else {
                return Err(Error::parse(line_no, format!("expected `t,alpha`, got `{line}`")));
            };
            let t: f64 = t_str.trim().parse().map_err(|_| {
                Error::parse(line_no, format!("cannot parse time `{}` as a number", t_str.trim()))
            })?;
            let a: f64 = a_str.trim().parse().map_err(|_| {
                Error::parse(line_no, format!("cannot parse value `{}` as a number", a_str.trim()))
            })?;
            times.push(t);
            values.push(a);
        }
        Self::tabulated(channel, times, values)
    }

    /// Reads a tabulated correlation function from a CSV file
    /// (see [`NoiseSpec::tabulated_from_csv_text`]).
    pub fn tabulated_from_csv(channel: NoiseChannel, path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::io(path.display().to_string(), e))?;
        Self::tabulated_from_csv_text(channel, &text)
    }

    /// Checks the model invariants (`D >= 0`, `tau > 0`, table sanity).
    pub fn validate(&self) -> Result<()> {
        match &self.model {
            CorrelationModel::White { strength } => {
                if !(strength.is_finite() && *strength >= 0.0) {
                    return Err(Error::InvalidConfig(format!(
                        "white-noise intensity must be non-negative, got {strength}"
                    )));
                }
            }
            CorrelationModel::OrnsteinUhlenbeck { strength, correlation_time } => {
                if !(strength.is_finite() && *strength >= 0.0) {
                    return Err(Error::InvalidConfig(format!(
                        "noise intensity must be non-negative, got {strength}"
                    )));
                }
                if !(correlation_time.is_finite() && *correlation_time > 0.0) {
                    return Err(Error::InvalidConfig(format!(
                        "correlation time must be positive, got {correlation_time}"
                    )));
                }
            }
            CorrelationModel::Tabulated { times, values } => {
                if times.len() != values.len() {
                    return Err(Error::InvalidConfig(format!(
                        "correlation table has {} times but {} values",
                        times.len(),
                        values.len()
                    )));
                }
                if times.len() < 2 {
                    return Err(Error::InvalidConfig(
                        "correlation table needs at least two points".into(),
                    ));
                }
                if times[0] != 0.0 {
                    return Err(Error::InvalidConfig(format!(
                        "correlation table must start at t = 0, got {}",
                        times[0]
                    )));
                }
                if values[0] < 0.0 {
                    return Err(Error::InvalidConfig(format!(
                        "correlation at zero lag must be non-negative, got {}",
                        values[0]
                    )));
                }
                for (i, pair) in times.windows(2).enumerate() {
                    if !(pair[1].is_finite() && pair[1] > pair[0]) {
                        return Err(Error::InvalidConfig(format!(
                            "correlation table times must increase strictly (rows {} and {})",
                            i + 1,
                            i + 2
                        )));
                    }
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(Error::InvalidConfig(
                        "correlation table contains non-finite values".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Pointwise correlation `alpha(t)` at lag `t >= 0`.
    ///
    /// White noise has no pointwise value (it lives under integrals);
    /// tabulated models refuse to extrapolate beyond their grid.
    pub fn correlation(&self, t: f64) -> Result<f64> {
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::InvalidArgument(format!("correlation lag must be >= 0, got {t}")));
        }
        match &self.model {
            CorrelationModel::White { .. } => Err(Error::Unsupported(
                "white noise is delta-correlated; evaluate it under an integral instead".into(),
            )),
            CorrelationModel::OrnsteinUhlenbeck { strength, correlation_time } => {
                Ok(strength / (2.0 * correlation_time) * (-t / correlation_time).exp())
            }
            CorrelationModel::Tabulated { times, values } => {
                let t_max = *times.last().expect("validated non-empty");
                if t > t_max {
                    return Err(Error::OutOfRange(format!(
                        "lag {t} beyond tabulated range [0, {t_max}]"
                    )));
                }
                Ok(interp_linear(times, values, t))
            }
        }
    }

    /// One-sided cosine-transform spectral density
    /// `S(omega) = (1/pi) integral_0^inf alpha(t) cos(omega t) dt`.
    ///
    /// For the position channel the physical fluctuation is `xi / k`, so the
    /// density carries an extra `1/k^2` and `wavenumber` must be supplied;
    /// the other channels are fractional and ignore it.
    pub fn spectral_density(&self, omega: f64, wavenumber: Option<f64>) -> Result<f64> {
        if !(omega.is_finite() && omega >= 0.0) {
            return Err(Error::InvalidArgument(format!("frequency must be >= 0, got {omega}")));
        }
        let scale = match self.channel {
            NoiseChannel::Position => {
                let Some(k) = wavenumber else {
                    return Err(Error::InvalidArgument(
                        "position-channel spectral density needs the lattice wavenumber".into(),
                    ));
                };
                if !(k.is_finite() && k > 0.0) {
                    return Err(Error::InvalidArgument(format!(
                        "wavenumber must be positive, got {k}"
                    )));
                }
                1.0 / (k * k)
            }
            _ => 1.0,
        };
        let raw = match &self.model {
            CorrelationModel::White { strength } => strength / (2.0 * std::f64::consts::PI),
            CorrelationModel::OrnsteinUhlenbeck { strength, correlation_time } => {
                let wt = omega * correlation_time;
                strength / (2.0 * std::f64::consts::PI) / (1.0 + wt * wt)
            }
            CorrelationModel::Tabulated { times, values } => {
                let mut acc = 0.0;
                for i in 0..times.len() - 1 {
                    let dt = times[i + 1] - times[i];
                    let slope = (values[i + 1] - values[i]) / dt;
                    acc += segment_cosine_integral(values[i], slope, times[i], dt, omega);
                }
                acc / std::f64::consts::PI
            }
        };
        Ok(scale * raw)
    }

    /// White-noise-equivalent intensity `D` (s): the nominal strength for
    /// the white and Ornstein-Uhlenbeck models, `2 integral alpha(t) dt`
    /// (exact trapezoid) for tabulated data. Used for the `G0 = hbar
    /// omega0^2 D` normalization.
    pub fn strength(&self) -> f64 {
        match &self.model {
            CorrelationModel::White { strength }
            | CorrelationModel::OrnsteinUhlenbeck { strength, .. } => *strength,
            CorrelationModel::Tabulated { times, values } => {
                let mut acc = 0.0;
                for i in 0..times.len() - 1 {
                    acc += 0.5 * (values[i] + values[i + 1]) * (times[i + 1] - times[i]);
                }
                2.0 * acc
            }
        }
    }
}

/// Exact `integral_0^dt (a0 + slope u) cos(omega (t0 + u)) du`.
///
/// The closed form loses accuracy through cancellation when `omega dt` is
/// tiny, so a Taylor branch (error O((omega dt)^6)) takes over there.
fn segment_cosine_integral(a0: f64, slope: f64, t0: f64, dt: f64, omega: f64) -> f64 {
    let x = omega * dt;
    if x.abs() < 1e-2 {
        let (sin0, cos0) = (omega * t0).sin_cos();
        let w2 = omega * omega;
        let d2 = dt * dt;
        // integral (a0 + slope u) cos(omega u) du and ... sin(omega u) du,
        // expanded to O(x^4) relative accuracy.
        let int_cos = a0 * dt + slope * d2 / 2.0
            - w2 * (a0 * d2 * dt / 6.0 + slope * d2 * d2 / 8.0)
            + w2 * w2 * (a0 * d2 * d2 * dt / 120.0 + slope * d2 * d2 * d2 / 144.0);
        let int_sin = omega * (a0 * d2 / 2.0 + slope * d2 * dt / 3.0)
            - omega * w2 * (a0 * d2 * d2 / 8.0 + slope * d2 * d2 * dt / 10.0);
        cos0 * int_cos - sin0 * int_sin
    } else {
        let (sin_a, cos_a) = (omega * t0).sin_cos();
        let (sin_b, cos_b) = (omega * (t0 + dt)).sin_cos();
        let const_part = a0 * (sin_b - sin_a) / omega;
        let ramp_part = slope * (dt * sin_b / omega + (cos_b - cos_a) / (omega * omega));
        const_part + ramp_part
    }
}

fn interp_linear(times: &[f64], values: &[f64], t: f64) -> f64 {
    let idx = times.partition_point(|&x| x <= t);
    if idx == 0 {
        return values[0];
    }
    if idx == times.len() {
        return *values.last().expect("non-empty");
    }
    let (t0, t1) = (times[idx - 1], times[idx]);
    let w = (t - t0) / (t1 - t0);
    values[idx - 1] * (1.0 - w) + values[idx] * w
}

/// One sampled noise path `xi(t_i)` on the uniform grid
/// `t_i = i T / N, i = 0..=N`.
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseRealization {
    /// Grid span `T`, s.
    pub duration: f64,
    /// `N + 1` samples of `xi`, dimensionless.
    pub values: Vec<f64>,
    /// Seed that produced this path (provenance only; 0 by convention for
    /// synthetic paths).
    pub seed: u64,
}

impl NoiseRealization {
    /// Wraps precomputed samples (at least two, spanning `duration > 0`).
    pub fn from_values(duration: f64, values: Vec<f64>, seed: u64) -> Result<Self> {
        if !(duration.is_finite() && duration > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "path duration must be positive, got {duration}"
            )));
        }
        if values.len() < 2 {
            return Err(Error::InvalidArgument(
                "a noise path needs at least two grid points".into(),
            ));
        }
        Ok(NoiseRealization { duration, values, seed })
    }

    /// Number of grid intervals `N`.
    pub fn n_steps(&self) -> usize {
        self.values.len() - 1
    }

    /// Grid spacing `T / N`, s.
    pub fn dt(&self) -> f64 {
        self.duration / self.n_steps() as f64
    }
}

/// Derived seed for path `index` within a run seeded by `seed`.
///
/// XOR-splitting is sound here because each distinct 64-bit seed keys an
/// independent ChaCha stream; indices only need to be distinct within a run.
pub fn path_seed(seed: u64, index: u64) -> u64 {
    seed ^ index
}

/// Samples one Ornstein-Uhlenbeck path on `N + 1` uniform grid points.
///
/// Uses the exact one-step discretization (no time-step bias):
/// `xi_0 ~ Normal(0, D/2tau)` (stationary start), then
/// `xi_{i+1} = xi_i e^{-dt/tau} + sqrt[(D/2tau)(1 - e^{-2dt/tau})] Normal(0,1)`.
/// Deterministic given the seed: the same `(spec, duration, n_steps, seed)`
/// reproduce the path bit for bit.
pub fn sample_ou_path(
    spec: &NoiseSpec,
    duration: f64,
    n_steps: usize,
    seed: u64,
) -> Result<NoiseRealization> {
    spec.validate()?;
    let CorrelationModel::OrnsteinUhlenbeck { strength, correlation_time } = spec.model else {
        return Err(Error::InvalidArgument(
            "path sampling is defined for the Ornstein-Uhlenbeck model only".into(),
        ));
    };
    if !(duration.is_finite() && duration > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "path duration must be positive, got {duration}"
        )));
    }
    if n_steps < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least two grid steps, got {n_steps}"
        )));
    }

    let dt = duration / n_steps as f64;
    let stationary_sd = (strength / (2.0 * correlation_time)).sqrt();
    let decay = (-dt / correlation_time).exp();
    let step_sd = stationary_sd * (1.0 - decay * decay).sqrt();

    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut values = Vec::with_capacity(n_steps + 1);
    let first: f64 = StandardNormal.sample(&mut rng);
    values.push(stationary_sd * first);
    for _ in 0..n_steps {
        let z: f64 = StandardNormal.sample(&mut rng);
        let prev = *values.last().expect("non-empty");
        values.push(prev * decay + step_sd * z);
    }
    Ok(NoiseRealization { duration, values, seed })
}
