//! Complex permittivity reconstruction for low-dispersive materials from
//! transmitted-power-only measurements through a dielectric-filled coaxial
//! line.
//!
//! The crate is organised bottom-up:
//!
//! * [`em`] evaluates the analytic power delivered to the load of a
//!   coaxial fixture driven by a resistive source.
//! * [`objective`] compares that model with a measured [`PowerSpectrum`]
//!   over an equally spaced sampling window.
//! * [`solver`] minimises the window objective over `(eps', eps'')` and
//!   slides the window across the band.
//! * [`synthetic`] produces seeded synthetic spectra for verification.
//! * [`io`], [`config`] and [`app`] implement the file formats and the
//!   command-line workflows.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod app;
pub mod config;
pub mod constants;
pub mod em;
mod error;
pub mod io;
pub mod objective;
pub mod solver;
pub mod spectrum;
pub mod synthetic;

pub use em::{
    characteristic_impedance, input_impedance, line_quantities, load_power, propagation_constant,
    reflection_coefficient, source_voltage_from_dbm, CircuitConfig, CoaxGeometry,
    ComplexPermittivity, FrequencyGrid, LineQuantities,
};
pub use error::{Error, Result};
pub use objective::{
    plan_window, residual_at, window_objective, Lookup, Residual, ResidualMode, SamplingWindow,
    WindowProblem,
};
pub use solver::{
    coarse_grid_scan, reconstruct_window, sweep, Bounds, ReconstructionResult, SolverConfig,
    SweepPlan,
};
pub use spectrum::{NoiseInfo, PowerSpectrum, Provenance};
pub use synthetic::{add_noise, generate_spectrum, MaterialProfile, NoiseSpec};

/// Converts a power in dBm to watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

/// Converts a power in watts to dBm.
pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * watts.log10() + 30.0
}
