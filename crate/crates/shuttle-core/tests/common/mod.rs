//! Helpers shared by the integration tests.

use shuttle_core::constants::CS133_MASS;
use shuttle_core::lattice::{derive_params, recoil_energy, DerivedParams, LatticeConfig};

/// Cesium in an 866 nm lattice of depth 850 recoil energies — the reference
/// parameter set used throughout the tests.
pub fn cs_config() -> LatticeConfig {
    let e_r = recoil_energy(CS133_MASS, 866e-9);
    LatticeConfig::new(CS133_MASS, 866e-9, 850.0 * e_r).unwrap()
}

pub fn cs_params() -> DerivedParams {
    derive_params(&cs_config()).unwrap()
}

/// Composite Simpson quadrature on `panels` (even) uniform panels.
#[allow(dead_code)]
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    assert!(panels >= 2 && panels % 2 == 0);
    let h = (b - a) / panels as f64;
    let mut acc = f(a) + f(b);
    for i in 1..panels {
        let weight = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += weight * f(a + i as f64 * h);
    }
    acc * h / 3.0
}
