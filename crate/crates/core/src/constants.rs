//! SI constants used by the line model.

use std::f64::consts::PI;

/// Speed of light in vacuum, m/s (exact).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Vacuum permeability, H/m.
pub const MU_0: f64 = 4.0e-7 * PI;

/// Vacuum permittivity, F/m, from `1 / (mu_0 c^2)`.
pub const EPSILON_0: f64 = 1.0 / (MU_0 * SPEED_OF_LIGHT * SPEED_OF_LIGHT);

/// Magnitude floor for the input-impedance denominator.
pub const DEGENERATE_FLOOR: f64 = 1e-300;
