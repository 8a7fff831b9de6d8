//! Transport trajectory design.
//!
//! The shortcut protocol prescribes the classical center-of-mass path
//! `q_c(t)` freely, subject to six boundary conditions that guarantee the
//! atom starts and ends at rest in the trap frame:
//!
//! ```text
//! q_c(0) = 0,  q_c'(0) = 0,  q_c''(0) = 0,
//! q_c(T) = d,  q_c'(T) = 0,  q_c''(T) = 0.
//! ```
//!
//! The minimal polynomial family satisfying all six is degree 5; in scaled
//! time `s = t/T` the unique solution is `q_c = d (10 s^3 - 15 s^4 + 6 s^5)`.
//! The physical trap path then follows from the forced-oscillator relation
//! `q0 = q_c + q_c'' / omega0^2`.

use crate::lattice::DerivedParams;
use crate::{Error, Result};

/// Scaled-time coefficients of the unique degree-5 solution, per unit
/// distance: `q_c(sT)/d = 10 s^3 - 15 s^4 + 6 s^5`.
const UNIT_SHAPE: [f64; 6] = [0.0, 0.0, 0.0, 10.0, -15.0, 6.0];

/// A center-of-mass transport path: duration, distance, and evaluation of
/// `d^order q_c / dt^order`. Implemented by [`Trajectory`]; the trait is the
/// seam for alternative interpolation families.
pub trait TransportPath {
    /// Total transport time `T`, s.
    fn duration(&self) -> f64;
    /// Transport distance `d`, m.
    fn distance(&self) -> f64;
    /// `d^order q_c / dt^order` at `t` for `order` in `{0, 1, 2}`.
    fn eval(&self, t: f64, order: u32) -> Result<f64>;
}

/// Degree-5 polynomial transport trajectory `q_c(t) = sum_j b_j t^j`.
///
/// Coefficients are stored in the scaled form `a_j = b_j T^j` (meters) and
/// evaluated by Horner's scheme in `s = t/T`, so large or small `T` never
/// mixes wildly different coefficient magnitudes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Trajectory {
    duration: f64,
    distance: f64,
    /// `a_j` with `q_c(sT) = sum_j a_j s^j`, m.
    scaled: [f64; 6],
}

impl Trajectory {
    /// Designs the unique degree-5 polynomial satisfying the six transport
    /// boundary conditions for duration `T` and distance `d`.
    pub fn design_polynomial(duration: f64, distance: f64) -> Result<Self> {
        if !(duration.is_finite() && duration > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "transport time must be positive, got {duration}"
            )));
        }
        if !distance.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "transport distance must be finite, got {distance}"
            )));
        }
        let mut scaled = [0.0; 6];
        for (a, u) in scaled.iter_mut().zip(UNIT_SHAPE) {
            *a = distance * u;
        }
        Ok(Trajectory { duration, distance, scaled })
    }

    /// Total transport time `T`, s.
    pub fn duration(&self) -> f64 {
        self.duration
    }

    /// Transport distance `d`, m.
    pub fn distance(&self) -> f64 {
        self.distance
    }

    /// Physical-time coefficients `b_j` of `q_c(t) = sum_j b_j t^j`
    /// (units m/s^j).
    pub fn coefficients(&self) -> [f64; 6] {
        let mut b = self.scaled;
        let mut tj = 1.0;
        for (j, c) in b.iter_mut().enumerate() {
            if j > 0 {
                tj *= self.duration;
            }
            *c /= tj;
        }
        b
    }

    /// Scaled-time coefficients `a_j` of `q_c(sT) = sum_j a_j s^j` (all in
    /// meters), the numerically preferred representation.
    pub fn scaled_coefficients(&self) -> [f64; 6] {
        self.scaled
    }

    /// `d^order q_c / dt^order` at time `t`, for `order` in `{0, 1, 2}`.
    ///
    /// `t` must lie in `[0, T]` (a relative slack of 1e-9 absorbs grid
    /// round-off, and the evaluation point is clamped to the interval).
    pub fn eval_qc(&self, t: f64, order: u32) -> Result<f64> {
        if order > 2 {
            return Err(Error::Unsupported(format!(
                "derivative order {order} not available (orders 0-2)"
            )));
        }
        let slack = 1e-9 * self.duration;
        if !t.is_finite() || t < -slack || t > self.duration + slack {
            return Err(Error::OutOfRange(format!(
                "evaluation time {t} outside transport window [0, {}]",
                self.duration
            )));
        }
        let s = (t / self.duration).clamp(0.0, 1.0);
        let value = match order {
            0 => horner(&self.scaled, s),
            1 => horner_derived::<1>(&self.scaled, s) / self.duration,
            _ => horner_derived::<2>(&self.scaled, s) / (self.duration * self.duration),
        };
        Ok(value)
    }
}

impl TransportPath for Trajectory {
    fn duration(&self) -> f64 {
        self.duration
    }

    fn distance(&self) -> f64 {
        self.distance
    }

    fn eval(&self, t: f64, order: u32) -> Result<f64> {
        self.eval_qc(t, order)
    }
}

fn horner(coeffs: &[f64; 6], s: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * s + c)
}

/// Horner evaluation of the ORDER-th derivative with respect to `s`.
fn horner_derived<const ORDER: u32>(coeffs: &[f64; 6], s: f64) -> f64 {
    let mut acc = 0.0;
    for j in (ORDER as usize..6).rev() {
        let mut factor = 1.0;
        for r in 0..ORDER as usize {
            factor *= (j - r) as f64;
        }
        acc = acc * s + coeffs[j] * factor;
    }
    // The loop above runs Horner on the derivative coefficients
    // c_j * j! / (j - ORDER)! shifted down by ORDER powers.
    acc
}

/// Trap-center path `q0(t) = q_c(t) + q_c''(t) / omega0^2` that realizes the
/// designed center-of-mass motion through the forced-oscillator equation.
pub fn trap_trajectory(traj: &Trajectory, p: &DerivedParams, t: f64) -> Result<f64> {
    let w2 = p.trap_frequency * p.trap_frequency;
    Ok(traj.eval_qc(t, 0)? + traj.eval_qc(t, 2)? / w2)
}

/// Forcing kernel `B(t) = q_c''(t) - omega0^2 q_c(t)`, the effective drive
/// behind the accordion channel's center-of-mass sensitivity (equivalently
/// `2 q_c'' - omega0^2 q0`: part inertial, part trap-path).
pub fn forcing_kernel(traj: &Trajectory, p: &DerivedParams, t: f64) -> Result<f64> {
    let w2 = p.trap_frequency * p.trap_frequency;
    Ok(traj.eval_qc(t, 2)? - w2 * traj.eval_qc(t, 0)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::CS133_MASS;
    use crate::lattice::{derive_params, recoil_energy, LatticeConfig};

    fn cs_params() -> DerivedParams {
        let e_r = recoil_energy(CS133_MASS, 866e-9);
        derive_params(&LatticeConfig::new(CS133_MASS, 866e-9, 850.0 * e_r).unwrap()).unwrap()
    }

    #[test]
    fn boundary_conditions_hold() {
        let d = 433e-9;
        let tr = Trajectory::design_polynomial(2.3e-5, d).unwrap();
        let t_end = tr.duration();
        let scale_v = d / t_end;
        let scale_a = d / (t_end * t_end);
        assert!(tr.eval_qc(0.0, 0).unwrap().abs() <= 1e-12 * d);
        assert!(tr.eval_qc(0.0, 1).unwrap().abs() <= 1e-12 * scale_v);
        assert!(tr.eval_qc(0.0, 2).unwrap().abs() <= 1e-12 * scale_a);
        assert!((tr.eval_qc(t_end, 0).unwrap() - d).abs() <= 1e-12 * d);
        assert!(tr.eval_qc(t_end, 1).unwrap().abs() <= 1e-12 * scale_v);
        assert!(tr.eval_qc(t_end, 2).unwrap().abs() <= 1e-12 * scale_a);
    }

    #[test]
    fn midpoint_values() {
        let d = 1.0;
        let t_end = 4.0;
        let tr = Trajectory::design_polynomial(t_end, d).unwrap();
        assert!((tr.eval_qc(0.5 * t_end, 0).unwrap() - 0.5 * d).abs() < 1e-14);
        // q_c'(T/2) = (15/8) d/T for the degree-5 shape.
        let v = tr.eval_qc(0.5 * t_end, 1).unwrap();
        assert!((v - 15.0 / 8.0 * d / t_end).abs() < 1e-14);
    }

    #[test]
    fn null_transport_is_identically_zero() {
        let tr = Trajectory::design_polynomial(1.0, 0.0).unwrap();
        for c in tr.coefficients() {
            assert_eq!(c, 0.0);
        }
        assert_eq!(tr.eval_qc(0.5, 0).unwrap(), 0.0);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(Trajectory::design_polynomial(0.0, 1.0).is_err());
        assert!(Trajectory::design_polynomial(-1.0, 1.0).is_err());
        let tr = Trajectory::design_polynomial(1.0, 1.0).unwrap();
        assert!(tr.eval_qc(-0.1, 0).is_err());
        assert!(tr.eval_qc(1.1, 0).is_err());
        assert!(tr.eval_qc(0.5, 3).is_err());
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let tr = Trajectory::design_polynomial(7.0e-6, 433e-9).unwrap();
        let t_end = tr.duration();
        let h = 1e-7 * t_end;
        for frac in [0.11, 0.37, 0.5, 0.83] {
            let t = frac * t_end;
            let fd1 = (tr.eval_qc(t + h, 0).unwrap() - tr.eval_qc(t - h, 0).unwrap()) / (2.0 * h);
            let an1 = tr.eval_qc(t, 1).unwrap();
            assert!((fd1 - an1).abs() < 1e-5 * (433e-9 / t_end));
            let fd2 = (tr.eval_qc(t + h, 1).unwrap() - tr.eval_qc(t - h, 1).unwrap()) / (2.0 * h);
            let an2 = tr.eval_qc(t, 2).unwrap();
            assert!((fd2 - an2).abs() < 1e-4 * (433e-9 / (t_end * t_end)));
        }
    }

    #[test]
    fn trap_path_endpoints_and_midpoint() {
        let p = cs_params();
        let d = 433e-9;
        let tr = Trajectory::design_polynomial(p.period, d).unwrap();
        assert!(trap_trajectory(&tr, &p, 0.0).unwrap().abs() < 1e-12 * d);
        assert!((trap_trajectory(&tr, &p, tr.duration()).unwrap() - d).abs() < 1e-12 * d);
        // q_c'' vanishes at T/2 by antisymmetry, so q0(T/2) = d/2.
        let mid = trap_trajectory(&tr, &p, 0.5 * tr.duration()).unwrap();
        assert!((mid - 0.5 * d).abs() < 1e-12 * d);
    }

    #[test]
    fn forcing_kernel_trap_path_identity() {
        // q0 = qc + qc''/w0^2 and B = qc'' - w0^2 qc together force
        // B + w0^2 q0 = 2 qc'' pointwise, tying all three evaluators.
        let p = cs_params();
        let tr = Trajectory::design_polynomial(0.8 * p.period, 433e-9).unwrap();
        let w2 = p.trap_frequency * p.trap_frequency;
        for i in 0..=100 {
            let t = tr.duration() * i as f64 / 100.0;
            let b = forcing_kernel(&tr, &p, t).unwrap();
            let q0 = trap_trajectory(&tr, &p, t).unwrap();
            let acc = tr.eval_qc(t, 2).unwrap();
            assert!(
                (b + w2 * q0 - 2.0 * acc).abs() <= 1e-10 * w2 * 433e-9,
                "kernel identity fails at t = {t}"
            );
        }
    }

    #[test]
    fn forcing_kernel_boundary_values() {
        let p = cs_params();
        let d = 433e-9;
        let tr = Trajectory::design_polynomial(1.7 * p.period, d).unwrap();
        let w2 = p.trap_frequency * p.trap_frequency;
        assert!(forcing_kernel(&tr, &p, 0.0).unwrap().abs() < 1e-12 * w2 * d);
        let at_end = forcing_kernel(&tr, &p, tr.duration()).unwrap();
        assert!((at_end + w2 * d).abs() < 1e-12 * w2 * d);
    }

    #[test]
    fn scaled_and_physical_coefficients_agree() {
        let tr = Trajectory::design_polynomial(3.0, 2.0).unwrap();
        let b = tr.coefficients();
        let a = tr.scaled_coefficients();
        for j in 0..6 {
            assert!((b[j] * 3.0f64.powi(j as i32) - a[j]).abs() < 1e-12 * a[j].abs().max(1.0));
        }
    }
}
