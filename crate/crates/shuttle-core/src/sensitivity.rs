//! Second-order noise sensitivities of the final transport energy.
//!
//! For each channel the noise-averaged final energy grows as
//! `E = E0 + lambda^2 G + O(lambda^4)`; this module evaluates `G` by
//! deterministic integration of the correlation function against the
//! channel's response kernels, split as `G = G1 + G2`:
//!
//! ```text
//! accordion: G1 = hbar w0^3 (4n+2) I_s(2 w0)
//!            G2 = m integral alpha(s) cos(w0 s) [int_0^{T-s} B(u)B(u+s) du] ds
//! amplitude: G1 = hbar w0^3 (n + 1/2) I_s(2 w0)
//!            G2 = m integral alpha(s) cos(w0 s) [int_0^{T-s} qc''(u)qc''(u+s) du] ds
//! position:  G1 = 0
//!            G2 = (m w0^4 / k^2) I_s(w0)
//! ```
//!
//! with the static integral `I_s(c) = integral_0^T alpha(s) (T-s) cos(c s) ds`
//! and `B(u) = qc''(u) - w0^2 qc(u)`. The inner lag products are polynomial
//! autocorrelations computed exactly in closed form ([`crate::poly`]), so the
//! only numerical step is the outer adaptive quadrature. White noise (and
//! Ornstein-Uhlenbeck noise below a configurable correlation-time threshold)
//! dispatches to the exact white-limit closed forms instead.
//!
//! Naming note: `G1`/`G2` follow the response decomposition (width vs
//! center-of-mass), which matches static vs dynamical for the accordion and
//! amplitude channels but not for position noise, where the only nonzero
//! term `G2` is static. Use [`SensitivityResult::static_part`] /
//! [`SensitivityResult::dynamical_part`] for the physical split.

use crate::constants::HBAR;
use crate::lattice::DerivedParams;
use crate::noise::{CorrelationModel, NoiseChannel, NoiseSpec};
use crate::poly::Poly;
use crate::quad;
use crate::trajectory::Trajectory;
use crate::{Error, Result};

/// Tuning knobs for the sensitivity quadrature.
#[derive(Clone, Copy, Debug)]
pub struct QuadSettings {
    /// Relative tolerance of the outer adaptive integration.
    pub rtol: f64,
    /// Ornstein-Uhlenbeck correlation times below this fraction of the trap
    /// period dispatch to the white-noise closed forms instead of
    /// integrating a needlessly stiff exponential.
    pub white_dispatch_tau_over_period: f64,
}

impl Default for QuadSettings {
    fn default() -> Self {
        QuadSettings { rtol: 1e-8, white_dispatch_tau_over_period: 1e-6 }
    }
}

/// Sensitivity of the final energy to one noise channel, decomposed as
/// `G = G1 + G2` (see the module docs for the split).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SensitivityResult {
    pub channel: NoiseChannel,
    /// Transport mode index `n`.
    pub mode: u32,
    /// Width-response contribution, J.
    pub g1: f64,
    /// Center-of-mass-response contribution, J.
    pub g2: f64,
    /// Normalization `G0 = hbar omega0^2 D`, J (the white-equivalent
    /// intensity is used for tabulated models).
    pub g0: f64,
}

impl SensitivityResult {
    /// Total sensitivity `G = G1 + G2`, J.
    pub fn total(&self) -> f64 {
        self.g1 + self.g2
    }

    /// `G1 / G0`.
    pub fn g1_normalized(&self) -> f64 {
        self.g1 / self.g0
    }

    /// `G2 / G0`.
    pub fn g2_normalized(&self) -> f64 {
        self.g2 / self.g0
    }

    /// `G / G0`.
    pub fn total_normalized(&self) -> f64 {
        self.total() / self.g0
    }

    /// Trajectory-independent ("static") contribution, J.
    pub fn static_part(&self) -> f64 {
        match self.channel {
            NoiseChannel::Accordion | NoiseChannel::Amplitude => self.g1,
            NoiseChannel::Position => self.total(),
        }
    }

    /// Trajectory-dependent ("dynamical") contribution, J.
    pub fn dynamical_part(&self) -> f64 {
        match self.channel {
            NoiseChannel::Accordion | NoiseChannel::Amplitude => self.g2,
            NoiseChannel::Position => 0.0,
        }
    }
}

fn check_params(p: &DerivedParams) -> Result<()> {
    if !(p.trap_frequency.is_finite() && p.trap_frequency > 0.0)
        || !(p.mass.is_finite() && p.mass > 0.0)
        || !(p.wavenumber.is_finite() && p.wavenumber > 0.0)
    {
        return Err(Error::InvalidConfig(
            "derived parameters must have positive frequency, mass and wavenumber".into(),
        ));
    }
    Ok(())
}

fn check_channel(spec: &NoiseSpec, expected: NoiseChannel) -> Result<()> {
    if spec.channel != expected {
        return Err(Error::InvalidArgument(format!(
            "noise spec is for the {} channel, expected {}",
            spec.channel, expected
        )));
    }
    Ok(())
}

/// Accordion (wavenumber) noise sensitivity with default settings.
pub fn sensitivity_accordion(
    p: &DerivedParams,
    traj: &Trajectory,
    spec: &NoiseSpec,
    mode: u32,
) -> Result<SensitivityResult> {
    sensitivity_accordion_with(p, traj, spec, mode, &QuadSettings::default())
}

/// Accordion (wavenumber) noise sensitivity.
pub fn sensitivity_accordion_with(
    p: &DerivedParams,
    traj: &Trajectory,
    spec: &NoiseSpec,
    mode: u32,
    settings: &QuadSettings,
) -> Result<SensitivityResult> {
    check_params(p)?;
    check_channel(spec, NoiseChannel::Accordion)?;
    spec.validate()?;
    if let Some(strength) = white_equivalent(spec, p, settings) {
        return white_closed_forms(
            p,
            traj.duration(),
            traj.distance(),
            mode,
            strength,
            NoiseChannel::Accordion,
        );
    }
    let w0 = p.trap_frequency;
    let two_n_plus_1 = 2.0 * f64::from(mode) + 1.0;
    let g1 =
        HBAR * w0.powi(3) * 2.0 * two_n_plus_1 * static_integral(spec, traj.duration(), 2.0 * w0, settings)?;
    let lag_poly = forcing_autocorrelation(traj, p, true);
    let g2 = p.mass * dynamical_integral(spec, traj.duration(), w0, &lag_poly, settings)?;
    Ok(SensitivityResult {
        channel: NoiseChannel::Accordion,
        mode,
        g1,
        g2,
        g0: HBAR * w0 * w0 * spec.strength(),
    })
}

/// Amplitude (trap-depth) noise sensitivity with default settings.
pub fn sensitivity_amplitude(
    p: &DerivedParams,
    traj: &Trajectory,
    spec: &NoiseSpec,
    mode: u32,
) -> Result<SensitivityResult> {
    sensitivity_amplitude_with(p, traj, spec, mode, &QuadSettings::default())
}

/// Amplitude (trap-depth) noise sensitivity.
pub fn sensitivity_amplitude_with(
    p: &DerivedParams,
    traj: &Trajectory,
    spec: &NoiseSpec,
    mode: u32,
    settings: &QuadSettings,
) -> Result<SensitivityResult> {
    check_params(p)?;
    check_channel(spec, NoiseChannel::Amplitude)?;
    spec.validate()?;
    if let Some(strength) = white_equivalent(spec, p, settings) {
        return white_closed_forms(
            p,
            traj.duration(),
            traj.distance(),
            mode,
            strength,
            NoiseChannel::Amplitude,
        );
    }
    let w0 = p.trap_frequency;
    let two_n_plus_1 = 2.0 * f64::from(mode) + 1.0;
    let g1 =
        HBAR * w0.powi(3) * 0.5 * two_n_plus_1 * static_integral(spec, traj.duration(), 2.0 * w0, settings)?;
    let lag_poly = forcing_autocorrelation(traj, p, false);
    let g2 = p.mass * dynamical_integral(spec, traj.duration(), w0, &lag_poly, settings)?;
    Ok(SensitivityResult {
        channel: NoiseChannel::Amplitude,
        mode,
        g1,
        g2,
        g0: HBAR * w0 * w0 * spec.strength(),
    })
}

/// Position (phase) noise sensitivity with default settings.
pub fn sensitivity_position(
    p: &DerivedParams,
    traj: &Trajectory,
    spec: &NoiseSpec,
    mode: u32,
) -> Result<SensitivityResult> {
    sensitivity_position_with(p, traj, spec, mode, &QuadSettings::default())
}

/// Position (phase) noise sensitivity. Depends on the trajectory only
/// through its duration, and not on the mode index at all: the width
/// dynamics are untouched by a rigid trap displacement.
pub fn sensitivity_position_with(
    p: &DerivedParams,
    traj: &Trajectory,
    spec: &NoiseSpec,
    mode: u32,
    settings: &QuadSettings,
) -> Result<SensitivityResult> {
    check_params(p)?;
    check_channel(spec, NoiseChannel::Position)?;
    spec.validate()?;
    if let Some(strength) = white_equivalent(spec, p, settings) {
        return white_closed_forms(
            p,
            traj.duration(),
            traj.distance(),
            mode,
            strength,
            NoiseChannel::Position,
        );
    }
    let w0 = p.trap_frequency;
    let g2 = p.mass * w0.powi(4) / (p.wavenumber * p.wavenumber)
        * static_integral(spec, traj.duration(), w0, settings)?;
    Ok(SensitivityResult {
        channel: NoiseChannel::Position,
        mode,
        g1: 0.0,
        g2,
        g0: HBAR * w0 * w0 * spec.strength(),
    })
}

/// Returns the white-equivalent strength when `spec` should bypass
/// quadrature: genuine white noise always, Ornstein-Uhlenbeck noise when
/// `tau` is below the dispatch threshold.
fn white_equivalent(spec: &NoiseSpec, p: &DerivedParams, settings: &QuadSettings) -> Option<f64> {
    match spec.model {
        CorrelationModel::White { strength } => Some(strength),
        CorrelationModel::OrnsteinUhlenbeck { strength, correlation_time }
            if correlation_time < settings.white_dispatch_tau_over_period * p.period =>
        {
            Some(strength)
        }
        _ => None,
    }
}

/// Exact white-noise sensitivities:
///
/// ```text
/// accordion: G1 = hbar w0^3 D (2n+1) T
///            G2 = m d^2 D [ (181/924) w0^4 T + 60/(7 T^3) + 10 w0^2/(7 T) ]
/// amplitude: G1 = (D/4) hbar w0^3 (2n+1) T
///            G2 = 60 m d^2 D / (7 T^3)
/// position:  G1 = 0
///            G2 = m w0^4 D T / (2 k^2)
/// ```
pub fn white_closed_forms(
    p: &DerivedParams,
    duration: f64,
    distance: f64,
    mode: u32,
    strength: f64,
    channel: NoiseChannel,
) -> Result<SensitivityResult> {
    check_params(p)?;
    if !(duration.is_finite() && duration > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "transport time must be positive, got {duration}"
        )));
    }
    if !(strength.is_finite() && strength >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "noise intensity must be non-negative, got {strength}"
        )));
    }
    let w0 = p.trap_frequency;
    let d2 = distance * distance;
    let two_n_plus_1 = 2.0 * f64::from(mode) + 1.0;
    let (g1, g2) = match channel {
        NoiseChannel::Accordion => (
            HBAR * w0.powi(3) * strength * two_n_plus_1 * duration,
            p.mass
                * d2
                * strength
                * (181.0 / 924.0 * w0.powi(4) * duration
                    + 60.0 / (7.0 * duration.powi(3))
                    + 10.0 * w0 * w0 / (7.0 * duration)),
        ),
        NoiseChannel::Amplitude => (
            0.25 * HBAR * w0.powi(3) * strength * two_n_plus_1 * duration,
            60.0 * p.mass * d2 * strength / (7.0 * duration.powi(3)),
        ),
        NoiseChannel::Position => {
            (0.0, p.mass * w0.powi(4) * strength * duration / (2.0 * p.wavenumber.powi(2)))
        }
    };
    Ok(SensitivityResult { channel, mode, g1, g2, g0: HBAR * w0 * w0 * strength })
}

/// `integral_0^T alpha(s) (T - s) cos(freq s) ds` for a smooth (non-white)
/// correlation model.
fn static_integral(
    spec: &NoiseSpec,
    duration: f64,
    freq: f64,
    settings: &QuadSettings,
) -> Result<f64> {
    let weight = move |s: f64| (duration - s) * (freq * s).cos();
    correlation_integral(spec, duration, weight, settings)
}

/// `integral_0^T alpha(s) cos(w0 s) A(s/T)/T^3 ds` where `A` is the exact
/// lag-autocorrelation polynomial of the scaled forcing.
fn dynamical_integral(
    spec: &NoiseSpec,
    duration: f64,
    w0: f64,
    lag_poly: &Poly,
    settings: &QuadSettings,
) -> Result<f64> {
    let t3 = duration.powi(3);
    let weight = move |s: f64| (w0 * s).cos() * lag_poly.eval(s / duration) / t3;
    correlation_integral(spec, duration, weight, settings)
}

/// Shared outer quadrature `integral_0^T alpha(s) weight(s) ds`, with the
/// integration domain truncated/knotted per correlation model.
fn correlation_integral(
    spec: &NoiseSpec,
    duration: f64,
    weight: impl Fn(f64) -> f64,
    settings: &QuadSettings,
) -> Result<f64> {
    let knots = match &spec.model {
        CorrelationModel::OrnsteinUhlenbeck { correlation_time, .. } => {
            // Beyond 50 correlation times the exponential tail is below
            // 2e-22 of the peak; cutting it there keeps the adaptive rule
            // focused where the integrand lives.
            vec![0.0, duration.min(50.0 * correlation_time)]
        }
        CorrelationModel::Tabulated { times, .. } => {
            let t_max = *times.last().expect("validated non-empty");
            if t_max < duration {
                return Err(Error::OutOfRange(format!(
                    "correlation table ends at {t_max} s but the sensitivity integral needs \
                     alpha on [0, {duration}] s; extend the table (zeros are fine)"
                )));
            }
            // Knot every breakpoint so no quadrature panel straddles a kink.
            let mut ks: Vec<f64> = times.iter().copied().filter(|&t| t < duration).collect();
            ks.push(duration);
            ks
        }
        CorrelationModel::White { .. } => {
            return Err(Error::Unsupported(
                "white noise has no pointwise correlation; use the closed forms".into(),
            ));
        }
    };
    let f = |s: f64| spec.correlation(s).map_or(f64::NAN, |a| a * weight(s));
    Ok(quad::integrate_with_knots(f, &knots, settings.rtol)?.value)
}

/// Exact lag autocorrelation `A(w) = integral_0^{1-w} phi(u) phi(u+w) du`
/// of the scaled forcing polynomial: `phi = p'' - (w0 T)^2 p` for the
/// accordion channel (`with_spring_term`), `phi = p''` for amplitude, where
/// `p(u) = q_c(uT)` in scaled time. The physical inner integral is then
/// `int_0^{T-s} B(u)B(u+s) du = A(s/T) / T^3` (resp. with `qc''`).
fn forcing_autocorrelation(traj: &Trajectory, p: &DerivedParams, with_spring_term: bool) -> Poly {
    let a = traj.scaled_coefficients();
    let shape = Poly::new(a.to_vec());
    let second = shape.derivative().derivative();
    let phi = if with_spring_term {
        let x = p.trap_frequency * traj.duration();
        second.add_scaled(&shape, -(x * x))
    } else {
        second
    };
    phi.autocorrelation_unit()
}

/// Transport time minimizing the white-noise accordion dynamical
/// sensitivity `G2`. `distance` and `strength` scale `G2` without moving
/// the minimum, so the result depends only on the trap frequency; they are
/// accepted (and validated) for interface symmetry.
pub fn find_g2k_minimum(p: &DerivedParams, distance: f64, strength: f64) -> Result<f64> {
    check_params(p)?;
    if !(distance.is_finite() && distance >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "distance must be non-negative, got {distance}"
        )));
    }
    if !(strength.is_finite() && strength >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "noise intensity must be non-negative, got {strength}"
        )));
    }
    let w0 = p.trap_frequency;
    // Strictly convex in T (both curvature terms positive), so the bracket
    // [T0/100, 10 T0] encloses the unique minimum comfortably.
    let shape = |t: f64| {
        181.0 / 924.0 * w0.powi(4) * t + 60.0 / (7.0 * t.powi(3)) + 10.0 * w0 * w0 / (7.0 * t)
    };
    Ok(golden_min(shape, 0.01 * p.period, 10.0 * p.period, 1e-6))
}

/// Transport time `T*` where the white-noise amplitude static and dynamical
/// sensitivities cross (`G1A(T*) = G2A(T*)`), in closed form:
/// `T* = [240 m d^2 / (7 hbar w0^3 (2n+1))]^{1/4}`. Returns 0 for `d = 0`
/// (the dynamical part vanishes identically and there is no crossing).
pub fn find_amplitude_crossing(
    p: &DerivedParams,
    distance: f64,
    mode: u32,
    strength: f64,
) -> Result<f64> {
    check_params(p)?;
    if !(distance.is_finite() && distance >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "distance must be non-negative, got {distance}"
        )));
    }
    if !(strength.is_finite() && strength >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "noise intensity must be non-negative, got {strength}"
        )));
    }
    let two_n_plus_1 = 2.0 * f64::from(mode) + 1.0;
    let ratio = 240.0 * p.mass * distance * distance
        / (7.0 * HBAR * p.trap_frequency.powi(3) * two_n_plus_1);
    Ok(ratio.powf(0.25))
}

/// Long-time heating rate `dE/dt` (J/s) of mode `n` for stationary noise,
/// valid once `T` greatly exceeds the correlation time:
///
/// ```text
/// accordion: 4 w0^2 pi E0 S(2 w0)
/// amplitude:   w0^2 pi E0 S(2 w0)
/// position:  m w0^4 pi S_Q(w0)
/// ```
///
/// with `E0 = hbar w0 (n + 1/2)` and `S` the spectral density of the spec.
pub fn heating_rate(
    p: &DerivedParams,
    spec: &NoiseSpec,
    mode: u32,
    channel: NoiseChannel,
) -> Result<f64> {
    check_params(p)?;
    check_channel(spec, channel)?;
    spec.validate()?;
    let w0 = p.trap_frequency;
    let e0 = HBAR * w0 * (f64::from(mode) + 0.5);
    let pi = std::f64::consts::PI;
    match channel {
        NoiseChannel::Accordion => {
            Ok(4.0 * w0 * w0 * pi * e0 * spec.spectral_density(2.0 * w0, None)?)
        }
        NoiseChannel::Amplitude => Ok(w0 * w0 * pi * e0 * spec.spectral_density(2.0 * w0, None)?),
        NoiseChannel::Position => {
            Ok(p.mass * w0.powi(4) * pi * spec.spectral_density(w0, Some(p.wavenumber))?)
        }
    }
}

/// Golden-section minimization of a unimodal function on `[a, b]` to
/// relative interval width `rtol` (positive bracket assumed).
fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, rtol: f64) -> f64 {
    let inv_phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while b - a > rtol * b {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}
