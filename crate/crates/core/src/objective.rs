//! Amplitude-only objective over a sampling window.
//!
//! For a candidate permittivity the per-frequency residual is
//! `delta(f) = |P_model(f) - P_measured(f)|`, and a window is scored by
//! the sum of squared residuals over its equally spaced samples.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::em::{characteristic_impedance, power_from_line, propagation_constant};
use crate::{
    load_power, watts_to_dbm, CircuitConfig, CoaxGeometry, ComplexPermittivity, Error,
    FrequencyGrid, PowerSpectrum, Result,
};

/// Units in which residuals are formed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResidualMode {
    /// `|P_model - P_meas|` in watts; the objective is in W^2.
    #[default]
    Watts,
    /// `|dBm(P_model) - dBm(P_meas)|`; the objective is in dB^2.
    Decibels,
}

/// How window sample frequencies are resolved against the measured grid.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Lookup {
    /// Must hit a measured sample within 1 Hz.
    #[default]
    Exact,
    /// Linear interpolation between bracketing samples.
    Linear,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObjectiveOptions {
    pub residual: ResidualMode,
    pub lookup: Lookup,
}

/// Equally spaced samples spanning `[center - bandwidth/2, center + bandwidth/2]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingWindow {
    center_frequency: f64,
    bandwidth: f64,
    samples: FrequencyGrid,
}

impl SamplingWindow {
    pub fn center_frequency(&self) -> f64 {
        self.center_frequency
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn samples(&self) -> &[f64] {
        self.samples.as_slice()
    }

    pub fn lower_edge(&self) -> f64 {
        self.samples()[0]
    }

    pub fn upper_edge(&self) -> f64 {
        self.samples()[self.samples.len() - 1]
    }

    pub fn spacing(&self) -> f64 {
        self.bandwidth / (self.samples.len() - 1) as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residual {
    pub frequency: f64,
    pub value: f64,
}

pub fn plan_window(center: f64, bandwidth: f64, n_samples: usize) -> Result<SamplingWindow> {
    if n_samples < 3 {
        return Err(Error::InvalidWindow(format!(
            "need at least 3 samples for two unknowns, got {n_samples}"
        )));
    }
    if !bandwidth.is_finite() || bandwidth <= 0.0 {
        return Err(Error::InvalidWindow(format!(
            "bandwidth must be > 0, got {bandwidth}"
        )));
    }
    let lower = center - bandwidth / 2.0;
    if !center.is_finite() || lower <= 0.0 {
        return Err(Error::InvalidWindow(format!(
            "lower edge {lower} Hz must be > 0 (center {center}, bandwidth {bandwidth})"
        )));
    }
    let last = (n_samples - 1) as f64;
    let mut samples: Vec<f64> = (0..n_samples)
        .map(|i| lower + bandwidth * (i as f64 / last))
        .collect();
    samples[n_samples - 1] = lower + bandwidth;
    Ok(SamplingWindow {
        center_frequency: center,
        bandwidth,
        samples: FrequencyGrid::new(samples)?,
    })
}

fn measured_power(measured: &PowerSpectrum, freq: f64, lookup: Lookup) -> Result<f64> {
    match lookup {
        Lookup::Exact => measured.power_at(freq),
        Lookup::Linear => measured.interpolated_power_at(freq),
    }
}

fn residual_value(model: f64, measured: f64, mode: ResidualMode) -> f64 {
    match mode {
        ResidualMode::Watts => (model - measured).abs(),
        ResidualMode::Decibels => (watts_to_dbm(model) - watts_to_dbm(measured)).abs(),
    }
}

/// Residual in watts with exact grid lookup.
pub fn residual_at(
    eps: &ComplexPermittivity,
    freq: f64,
    measured: &PowerSpectrum,
    geom: &CoaxGeometry,
    circuit: &CircuitConfig,
) -> Result<Residual> {
    residual_with(
        eps,
        freq,
        measured,
        geom,
        circuit,
        ObjectiveOptions::default(),
    )
}

pub fn residual_with(
    eps: &ComplexPermittivity,
    freq: f64,
    measured: &PowerSpectrum,
    geom: &CoaxGeometry,
    circuit: &CircuitConfig,
    options: ObjectiveOptions,
) -> Result<Residual> {
    let meas = measured_power(measured, freq, options.lookup)?;
    let model = load_power(freq, eps, geom, circuit)?;
    Ok(Residual {
        frequency: freq,
        value: residual_value(model, meas, options.residual),
    })
}

/// Sum of squared residuals over an arbitrary set of frequencies.
pub fn objective_over(
    eps: &ComplexPermittivity,
    frequencies: &[f64],
    measured: &PowerSpectrum,
    geom: &CoaxGeometry,
    circuit: &CircuitConfig,
    options: ObjectiveOptions,
) -> Result<f64> {
    frequencies.iter().try_fold(0.0, |acc, &f| {
        let r = residual_with(eps, f, measured, geom, circuit, options)?;
        Ok(acc + r.value * r.value)
    })
}

/// Sum of squared watt residuals over the window (W^2).
pub fn window_objective(
    eps: &ComplexPermittivity,
    window: &SamplingWindow,
    measured: &PowerSpectrum,
    geom: &CoaxGeometry,
    circuit: &CircuitConfig,
) -> Result<f64> {
    objective_over(
        eps,
        window.samples(),
        measured,
        geom,
        circuit,
        ObjectiveOptions::default(),
    )
}

/// A window whose measured powers have been resolved once, ready for the
/// many objective evaluations of a minimisation.
#[derive(Debug, Clone)]
pub struct WindowProblem {
    frequencies: Vec<f64>,
    targets: Vec<f64>,
    geom: CoaxGeometry,
    circuit: CircuitConfig,
    mode: ResidualMode,
}

impl WindowProblem {
    pub fn new(
        window: &SamplingWindow,
        measured: &PowerSpectrum,
        geom: &CoaxGeometry,
        circuit: &CircuitConfig,
        options: ObjectiveOptions,
    ) -> Result<Self> {
        let frequencies = window.samples().to_vec();
        let powers = frequencies
            .iter()
            .map(|&f| measured_power(measured, f, options.lookup))
            .collect::<Result<Vec<_>>>()?;
        let targets = match options.residual {
            ResidualMode::Watts => powers,
            ResidualMode::Decibels => powers.into_iter().map(watts_to_dbm).collect(),
        };
        Ok(Self {
            frequencies,
            targets,
            geom: *geom,
            circuit: *circuit,
            mode: options.residual,
        })
    }

    /// Model values at the window samples, in residual units (W or dBm).
    pub fn model(&self, eps: &ComplexPermittivity) -> Result<Vec<f64>> {
        let z0 = characteristic_impedance(&self.geom, eps);
        let root: Complex64 = eps.as_complex().sqrt();
        self.frequencies
            .iter()
            .map(|&f| {
                let gamma = propagation_constant_from_root(root, f);
                let p = power_from_line(z0, gamma, self.geom.length(), &self.circuit)?;
                Ok(match self.mode {
                    ResidualMode::Watts => p,
                    ResidualMode::Decibels => watts_to_dbm(p),
                })
            })
            .collect()
    }

    /// Sum of squared residuals at `(eps', eps'')`. Non-evaluable points
    /// score `+inf`.
    pub fn cost(&self, eps: &ComplexPermittivity) -> f64 {
        let z0 = characteristic_impedance(&self.geom, eps);
        let root: Complex64 = eps.as_complex().sqrt();
        let mut total = 0.0;
        for (&f, &target) in self.frequencies.iter().zip(&self.targets) {
            let gamma = propagation_constant_from_root(root, f);
            let Ok(p) = power_from_line(z0, gamma, self.geom.length(), &self.circuit) else {
                return f64::INFINITY;
            };
            let model = match self.mode {
                ResidualMode::Watts => p,
                ResidualMode::Decibels => watts_to_dbm(p),
            };
            total += (model - target) * (model - target);
        }
        if total.is_nan() {
            f64::INFINITY
        } else {
            total
        }
    }

    /// Bound on the rounding error of [`cost`](Self::cost) per unit of
    /// `sqrt(cost)`: `8 eps_mach ||targets||` in watts, with every target
    /// widened by 30 in dB mode. Objective differences below
    /// `rounding_scale() * sqrt(cost)` are not resolvable.
    pub fn rounding_scale(&self) -> f64 {
        let offset = match self.mode {
            ResidualMode::Watts => 0.0,
            ResidualMode::Decibels => 30.0,
        };
        8.0 * f64::EPSILON
            * self
                .targets
                .iter()
                .map(|t| (t.abs() + offset).powi(2))
                .sum::<f64>()
                .sqrt()
    }

    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }
}

fn propagation_constant_from_root(root: Complex64, freq: f64) -> Complex64 {
    let unit = propagation_constant(&ComplexPermittivity::VACUUM, freq);
    unit * root
}
