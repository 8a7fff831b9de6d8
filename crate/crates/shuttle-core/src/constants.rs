//! Physical constants (CODATA 2018 recommended values).
//!
//! | constant | value | unit |
//! |---|---|---|
//! | `HBAR` | 1.054571817e-34 | J s |
//! | `ATOMIC_MASS_UNIT` | 1.66053906660e-27 | kg |
//! | `CS133_MASS_AMU` | 132.905451961 | u |

/// Reduced Planck constant, J s.
pub const HBAR: f64 = 1.054571817e-34;

/// Unified atomic mass unit, kg.
pub const ATOMIC_MASS_UNIT: f64 = 1.66053906660e-27;

/// Mass of cesium-133 in atomic mass units.
pub const CS133_MASS_AMU: f64 = 132.905451961;

/// Mass of cesium-133, kg.
pub const CS133_MASS: f64 = CS133_MASS_AMU * ATOMIC_MASS_UNIT;
