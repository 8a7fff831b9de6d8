//! Lattice/trap parameters and the exact final excitation energy.
//!
//! The atom sits near a minimum of an optical lattice of depth `a` and
//! wavenumber `k = 2 pi / lambda_L`. Expanding the sinusoidal well to second
//! order gives a harmonic trap of angular frequency
//! `omega0 = sqrt(2 a k^2 / m)`; all transport design and sensitivity
//! analysis in this crate happens in that harmonic approximation.

use crate::constants::HBAR;
use crate::{Error, Result};

/// Physical configuration of the lattice and the transport task. SI units.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LatticeConfig {
    /// Atom mass, kg.
    pub mass: f64,
    /// Lattice wavelength `lambda_L`, m. The lattice spatial period is
    /// `lambda_L / 2` and the wavenumber is `k = 2 pi / lambda_L`.
    pub lattice_wavelength: f64,
    /// Lattice depth `a`, J.
    pub depth: f64,
    /// Transport distance `d`, m. Defaults to `lambda_L / 2`, the distance
    /// between two contiguous minima.
    pub distance: f64,
}

impl LatticeConfig {
    /// Builds a configuration with the default transport distance
    /// `lambda_L / 2`.
    pub fn new(mass: f64, lattice_wavelength: f64, depth: f64) -> Result<Self> {
        let cfg = LatticeConfig {
            mass,
            lattice_wavelength,
            depth,
            distance: 0.5 * lattice_wavelength,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Replaces the transport distance (`d >= 0`).
    pub fn with_distance(mut self, distance: f64) -> Result<Self> {
        self.distance = distance;
        self.validate()?;
        Ok(self)
    }

    /// Lattice wavenumber `k = 2 pi / lambda_L`, 1/m.
    pub fn wavenumber(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.lattice_wavelength
    }

    /// Checks the physical invariants: positive mass, wavelength and depth,
    /// non-negative distance, all finite.
    pub fn validate(&self) -> Result<()> {
        if !(self.mass.is_finite() && self.mass > 0.0) {
            return Err(Error::InvalidConfig(format!("mass must be positive, got {}", self.mass)));
        }
        if !(self.lattice_wavelength.is_finite() && self.lattice_wavelength > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "lattice wavelength must be positive, got {}",
                self.lattice_wavelength
            )));
        }
        if !(self.depth.is_finite() && self.depth > 0.0) {
            return Err(Error::InvalidConfig(format!("depth must be positive, got {}", self.depth)));
        }
        if !(self.distance.is_finite() && self.distance >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "transport distance must be non-negative, got {}",
                self.distance
            )));
        }
        Ok(())
    }
}

/// Recoil energy `E_R = (hbar k)^2 / (2 m)` for a photon of wavelength
/// `lattice_wavelength`, J. Exposed standalone because lattice depths are
/// conventionally quoted in recoil units before a full config exists.
pub fn recoil_energy(mass: f64, lattice_wavelength: f64) -> f64 {
    let k = 2.0 * std::f64::consts::PI / lattice_wavelength;
    (HBAR * k).powi(2) / (2.0 * mass)
}

/// Trap quantities derived from a [`LatticeConfig`].
///
/// Besides the four derived scales, the mass and wavenumber are carried
/// along so that downstream sensitivity formulas (which need `m` and `k`)
/// can be evaluated from this struct alone.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DerivedParams {
    /// Harmonic trap angular frequency `omega0 = sqrt(2 a k^2 / m)`, rad/s.
    pub trap_frequency: f64,
    /// Recoil energy `E_R = (hbar k)^2 / (2 m)`, J.
    pub recoil_energy: f64,
    /// Trap oscillation period `T0 = 2 pi / omega0`, s.
    pub period: f64,
    /// `hbar omega0 / E_R`, dimensionless. Large values mean the atom is
    /// deep in the Lamb-Dicke regime where the harmonic expansion holds.
    pub lamb_dicke_ratio: f64,
    /// Atom mass, kg (copied from the config).
    pub mass: f64,
    /// Lattice wavenumber `k`, 1/m (copied from the config).
    pub wavenumber: f64,
}

/// Computes the derived trap quantities. Pure: identical inputs give
/// bit-identical outputs.
pub fn derive_params(cfg: &LatticeConfig) -> Result<DerivedParams> {
    cfg.validate()?;
    let k = cfg.wavenumber();
    let omega0 = (2.0 * cfg.depth * k * k / cfg.mass).sqrt();
    let e_r = (HBAR * k).powi(2) / (2.0 * cfg.mass);
    Ok(DerivedParams {
        trap_frequency: omega0,
        recoil_energy: e_r,
        period: 2.0 * std::f64::consts::PI / omega0,
        lamb_dicke_ratio: HBAR * omega0 / e_r,
        mass: cfg.mass,
        wavenumber: k,
    })
}

/// State of the auxiliary dynamics at the end of a transport.
///
/// `rho` is the dimensionless width scaling factor of the Ermakov equation
/// `rho'' + Omega^2 rho = omega0^2 / rho^3`, and `qc` is the classical
/// center-of-mass coordinate obeying the forced-oscillator (Newton)
/// equation. An ideal shortcut ends at `(rho, rho_dot, qc, qc_dot) =
/// (1, 0, d, 0)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FinalState {
    /// Width scaling factor `rho(T)`, dimensionless.
    pub rho: f64,
    /// `drho/dt` at `T`, 1/s.
    pub rho_dot: f64,
    /// Center-of-mass coordinate `q_c(T)`, m.
    pub qc: f64,
    /// `dq_c/dt` at `T`, m/s.
    pub qc_dot: f64,
    /// Transport mode index `n` (harmonic quantum number).
    pub mode: u32,
}

/// Exact final energy of transport mode `n` given the auxiliary final state:
///
/// ```text
/// E = (m/2) omega0^2 [qc - d]^2 + (hbar omega0/4)(2n+1)(1 + rho^4)/rho^2
///   + (m/2) qc_dot^2 + (hbar/(4 omega0))(2n+1) rho_dot^2
/// ```
///
/// which reduces to `hbar omega0 (n + 1/2)` for the ideal final state and
/// strictly exceeds it for any deviation.
pub fn final_energy(fs: &FinalState, p: &DerivedParams, distance: f64) -> Result<f64> {
    if !(fs.rho.is_finite() && fs.rho > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "final width factor rho must be positive, got {}",
            fs.rho
        )));
    }
    let omega0 = p.trap_frequency;
    let two_n_plus_1 = f64::from(2 * fs.mode + 1);
    let rho2 = fs.rho * fs.rho;
    let width = 0.25 * HBAR * omega0 * two_n_plus_1 * (1.0 / rho2 + rho2)
        + 0.25 * HBAR / omega0 * two_n_plus_1 * fs.rho_dot * fs.rho_dot;
    let motion = 0.5 * p.mass * (omega0 * (fs.qc - distance)).powi(2)
        + 0.5 * p.mass * fs.qc_dot * fs.qc_dot;
    Ok(width + motion)
}

/// Shortest transport time for which the harmonic treatment of the moving
/// well is still self-consistent, defined here as the unity threshold of the
/// validity ratio: `T` solving `6 m d^2 / (T^4 omega0^2 a) = 1`. Transports
/// much slower than this satisfy the deep-trap condition with room to spare.
pub fn min_shuttle_time(p: &DerivedParams, cfg: &LatticeConfig) -> Result<f64> {
    cfg.validate()?;
    let ratio = 6.0 * cfg.mass * cfg.distance * cfg.distance
        / (p.trap_frequency * p.trap_frequency * cfg.depth);
    Ok(ratio.powf(0.25))
}
