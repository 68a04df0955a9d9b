//! Transmission-line model of the dielectric-filled coaxial fixture.
//!
//! The fixture is an ideal TEM coaxial line of length `d` filled with the
//! material under test. It is driven by a source of peak voltage `V_s`
//! behind a resistance `R_s` and terminated by the analyzer's input
//! resistance `R_L`. Only the dielectric fill is lossy; conductor losses
//! and higher-order modes are not modelled.
//!
//! Complex square roots use the principal branch, so that a passive
//! material (`eps'' >= 0`) always yields `Re(gamma) >= 0` and
//! `Re(Z0) > 0`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::{DEGENERATE_FLOOR, EPSILON_0, MU_0, SPEED_OF_LIGHT};
use crate::{dbm_to_watts, Error, Result};

/// Relative permittivity `eps_r = eps' - j eps''`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexPermittivity {
    eps_real: f64,
    eps_imag: f64,
}

impl ComplexPermittivity {
    /// Requires `eps' >= 1` and `eps'' >= 0`, both finite.
    pub fn new(eps_real: f64, eps_imag: f64) -> Result<Self> {
        if !eps_real.is_finite() || eps_real < 1.0 {
            return Err(Error::invalid(
                "permittivity",
                format!("eps_real must be finite and >= 1, got {eps_real}"),
            ));
        }
        if !eps_imag.is_finite() || eps_imag < 0.0 {
            return Err(Error::invalid(
                "permittivity",
                format!("eps_imag must be finite and >= 0, got {eps_imag}"),
            ));
        }
        Ok(Self { eps_real, eps_imag })
    }

    pub const VACUUM: Self = Self {
        eps_real: 1.0,
        eps_imag: 0.0,
    };

    /// Caller guarantees the invariants (used inside validated bounds).
    pub(crate) fn new_unchecked(eps_real: f64, eps_imag: f64) -> Self {
        debug_assert!(eps_real >= 1.0 && eps_imag >= 0.0);
        Self { eps_real, eps_imag }
    }

    pub fn eps_real(&self) -> f64 {
        self.eps_real
    }

    pub fn eps_imag(&self) -> f64 {
        self.eps_imag
    }

    /// `eps' - j eps''` as a complex number.
    pub fn as_complex(&self) -> Complex64 {
        Complex64::new(self.eps_real, -self.eps_imag)
    }

    /// Linear interpolation `self + t (other - self)` of both parts.
    pub fn lerp(&self, other: &Self, t: f64) -> Self {
        Self {
            eps_real: self.eps_real + t * (other.eps_real - self.eps_real),
            eps_imag: self.eps_imag + t * (other.eps_imag - self.eps_imag),
        }
    }
}

/// Coaxial fixture dimensions, all in metres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoaxGeometry {
    inner_radius: f64,
    outer_radius: f64,
    length: f64,
}

impl CoaxGeometry {
    pub fn new(inner_radius: f64, outer_radius: f64, length: f64) -> Result<Self> {
        let finite = inner_radius.is_finite() && outer_radius.is_finite() && length.is_finite();
        if !finite || inner_radius <= 0.0 || outer_radius <= inner_radius {
            return Err(Error::invalid(
                "geometry",
                format!(
                    "require 0 < inner_radius < outer_radius, got inner={inner_radius} outer={outer_radius}"
                ),
            ));
        }
        if length <= 0.0 {
            return Err(Error::invalid(
                "geometry",
                format!("length must be > 0, got {length}"),
            ));
        }
        Ok(Self {
            inner_radius,
            outer_radius,
            length,
        })
    }

    pub fn inner_radius(&self) -> f64 {
        self.inner_radius
    }

    pub fn outer_radius(&self) -> f64 {
        self.outer_radius
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn with_length(&self, length: f64) -> Result<Self> {
        Self::new(self.inner_radius, self.outer_radius, length)
    }

    /// Outer-to-inner radius ratio that gives a vacuum characteristic
    /// impedance of `z0` ohms.
    pub fn radius_ratio_for_impedance(z0: f64) -> f64 {
        (2.0 * PI * z0 / (MU_0 / EPSILON_0).sqrt()).exp()
    }
}

impl Default for CoaxGeometry {
    /// 1.27 mm inner radius, 4.1 mm outer radius, 3.6 cm long.
    fn default() -> Self {
        Self {
            inner_radius: 1.27e-3,
            outer_radius: 4.1e-3,
            length: 3.6e-2,
        }
    }
}

/// Source and load terminations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircuitConfig {
    source_voltage_amplitude: f64,
    source_resistance: f64,
    load_resistance: f64,
}

impl CircuitConfig {
    /// `source_voltage_amplitude` is the peak open-circuit voltage `V_s`.
    pub fn new(
        source_voltage_amplitude: f64,
        source_resistance: f64,
        load_resistance: f64,
    ) -> Result<Self> {
        for (name, v) in [
            ("source_voltage_amplitude", source_voltage_amplitude),
            ("source_resistance", source_resistance),
            ("load_resistance", load_resistance),
        ] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::invalid(
                    "circuit",
                    format!("{name} must be finite and > 0, got {v}"),
                ));
            }
        }
        Ok(Self {
            source_voltage_amplitude,
            source_resistance,
            load_resistance,
        })
    }

    /// Builds the circuit from the source's available power in dBm.
    pub fn from_available_power_dbm(
        power_dbm: f64,
        source_resistance: f64,
        load_resistance: f64,
    ) -> Result<Self> {
        if !power_dbm.is_finite() {
            return Err(Error::invalid("circuit", "source power must be finite"));
        }
        if !source_resistance.is_finite() || source_resistance <= 0.0 {
            return Err(Error::invalid(
                "circuit",
                format!("source_resistance must be finite and > 0, got {source_resistance}"),
            ));
        }
        Self::new(
            source_voltage_from_dbm(power_dbm, source_resistance),
            source_resistance,
            load_resistance,
        )
    }

    pub fn source_voltage_amplitude(&self) -> f64 {
        self.source_voltage_amplitude
    }

    pub fn source_resistance(&self) -> f64 {
        self.source_resistance
    }

    pub fn load_resistance(&self) -> f64 {
        self.load_resistance
    }

    /// `|V_s|^2 / (8 R_s)`, the most the source can deliver.
    pub fn available_power(&self) -> f64 {
        self.source_voltage_amplitude.powi(2) / (8.0 * self.source_resistance)
    }
}

impl Default for CircuitConfig {
    /// 0 dBm available power, 50 ohm source and load.
    fn default() -> Self {
        Self::from_available_power_dbm(0.0, 50.0, 50.0).expect("default circuit is valid")
    }
}

/// Every line quantity that enters the delivered-power expression.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineQuantities {
    pub char_impedance: Complex64,
    pub propagation: Complex64,
    pub reflection: Complex64,
    pub input_impedance: Complex64,
}

/// Strictly increasing list of positive frequencies in hertz.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid(Vec<f64>);

impl FrequencyGrid {
    pub fn new(frequencies: Vec<f64>) -> Result<Self> {
        if frequencies.is_empty() {
            return Err(Error::invalid("frequency grid", "no frequencies"));
        }
        for (i, f) in frequencies.iter().enumerate() {
            if !f.is_finite() || *f <= 0.0 {
                return Err(Error::invalid(
                    "frequency grid",
                    format!("entry {i} must be finite and > 0, got {f}"),
                ));
            }
        }
        if let Some(i) = frequencies.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::invalid(
                "frequency grid",
                format!("not strictly increasing at entry {}", i + 1),
            ));
        }
        Ok(Self(frequencies))
    }

    /// `n` equally spaced points from `start` to `stop` inclusive, built by
    /// index so the last point equals `stop` exactly.
    pub fn linspace(start: f64, stop: f64, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid("frequency grid", "linspace needs n >= 2"));
        }
        let step = (stop - start) / (n - 1) as f64;
        let mut f: Vec<f64> = (0..n).map(|i| start + i as f64 * step).collect();
        f[n - 1] = stop;
        Self::new(f)
    }

    /// Points `start + k step` for every `k` with the point not beyond
    /// `stop` (1 ppb slack absorbs rounding in the count).
    pub fn stepped(start: f64, stop: f64, step: f64) -> Result<Self> {
        if !(step > 0.0) || !(stop >= start) {
            return Err(Error::invalid(
                "frequency grid",
                format!(
                    "need step > 0 and stop >= start, got start={start} stop={stop} step={step}"
                ),
            ));
        }
        let count = ((stop - start) / step * (1.0 + 1e-9)).floor() as usize + 1;
        Self::new((0..count).map(|k| start + k as f64 * step).collect())
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

fn free_space_wavenumber(freq: f64) -> f64 {
    2.0 * PI * freq / SPEED_OF_LIGHT
}

/// `Z0 = sqrt(mu_0 / (eps_0 eps_r)) ln(b/a) / 2 pi`.
pub fn characteristic_impedance(geom: &CoaxGeometry, eps: &ComplexPermittivity) -> Complex64 {
    let eta0 = (MU_0 / EPSILON_0).sqrt();
    let log_ratio = (geom.outer_radius / geom.inner_radius).ln();
    eta0 * log_ratio / (2.0 * PI) / eps.as_complex().sqrt()
}

/// `gamma = j (2 pi f / c) sqrt(eps_r)`; real part is attenuation in Np/m.
pub fn propagation_constant(eps: &ComplexPermittivity, freq: f64) -> Complex64 {
    Complex64::i() * free_space_wavenumber(freq) * eps.as_complex().sqrt()
}

/// `Gamma = (R_L - Z0) / (R_L + Z0)` at the load.
pub fn reflection_coefficient(z0: Complex64, load_resistance: f64) -> Complex64 {
    (load_resistance - z0) / (load_resistance + z0)
}

/// Impedance looking into a line of length `length` terminated in
/// `load_resistance`, `Z0 (R_L + Z0 tanh(gamma d)) / (Z0 + R_L tanh(gamma d))`.
///
/// Evaluated with `tanh(x) = (1 - e^{-2x}) / (1 + e^{-2x})` and both sides
/// multiplied through by `1 + e^{-2x}`, which stays finite at the
/// quarter-wave poles of `tanh`.
pub fn input_impedance(
    z0: Complex64,
    load_resistance: f64,
    gamma: Complex64,
    length: f64,
) -> Result<Complex64> {
    let e = (-2.0 * gamma * length).exp();
    let numer = load_resistance * (1.0 + e) + z0 * (1.0 - e);
    let denom = z0 * (1.0 + e) + load_resistance * (1.0 - e);
    let magnitude = denom.norm();
    if !(magnitude >= DEGENERATE_FLOOR) {
        return Err(Error::DegenerateEvaluation {
            what: "Z0 + R_L tanh(gamma d)",
            magnitude,
        });
    }
    Ok(z0 * numer / denom)
}

/// All intermediate line quantities at one frequency.
pub fn line_quantities(
    freq: f64,
    eps: &ComplexPermittivity,
    geom: &CoaxGeometry,
    load_resistance: f64,
) -> Result<LineQuantities> {
    let char_impedance = characteristic_impedance(geom, eps);
    let propagation = propagation_constant(eps, freq);
    Ok(LineQuantities {
        char_impedance,
        propagation,
        reflection: reflection_coefficient(char_impedance, load_resistance),
        input_impedance: input_impedance(
            char_impedance,
            load_resistance,
            propagation,
            geom.length,
        )?,
    })
}

/// Delivered power from precomputed `Z0` and `gamma`.
pub(crate) fn power_from_line(
    z0: Complex64,
    gamma: Complex64,
    length: f64,
    circuit: &CircuitConfig,
) -> Result<f64> {
    let rl = circuit.load_resistance;
    let rs = circuit.source_resistance;
    let zin = input_impedance(z0, rl, gamma, length)?;
    let refl = reflection_coefficient(z0, rl);
    let e1 = (-gamma * length).exp();
    let e2 = e1 * e1;
    let v_load = circuit.source_voltage_amplitude * zin * e1 * (refl + 1.0)
        / ((rs + zin) * (refl * e2 + 1.0));
    Ok(v_load.norm_sqr() / (2.0 * rl))
}

/// Time-averaged power delivered to the load resistance, in watts.
pub fn load_power(
    freq: f64,
    eps: &ComplexPermittivity,
    geom: &CoaxGeometry,
    circuit: &CircuitConfig,
) -> Result<f64> {
    if !freq.is_finite() || freq <= 0.0 {
        return Err(Error::invalid(
            "frequency",
            format!("must be finite and > 0, got {freq}"),
        ));
    }
    power_from_line(
        characteristic_impedance(geom, eps),
        propagation_constant(eps, freq),
        geom.length,
        circuit,
    )
}

/// Peak source voltage whose available power into a conjugate match is
/// `power_dbm`: `V_s = sqrt(8 R_s P)`.
pub fn source_voltage_from_dbm(power_dbm: f64, source_resistance: f64) -> f64 {
    (8.0 * source_resistance * dbm_to_watts(power_dbm)).sqrt()
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    fn matched_geometry(length: f64) -> CoaxGeometry {
        let a = 1.0e-3;
        CoaxGeometry::new(
            a,
            a * CoaxGeometry::radius_ratio_for_impedance(50.0),
            length,
        )
        .unwrap()
    }

    #[test]
    fn permittivity_rejects_unphysical_values() {
        assert!(ComplexPermittivity::new(0.99, 0.0).is_err());
        assert!(ComplexPermittivity::new(2.0, -1e-9).is_err());
        assert!(ComplexPermittivity::new(f64::NAN, 0.0).is_err());
        assert!(ComplexPermittivity::new(1.0, 0.0).is_ok());
    }

    #[test]
    fn geometry_and_circuit_validation() {
        assert!(CoaxGeometry::new(4.1e-3, 1.27e-3, 0.036).is_err());
        assert!(CoaxGeometry::new(1e-3, 1e-3, 0.036).is_err());
        assert!(CoaxGeometry::new(1e-3, 2e-3, 0.0).is_err());
        assert!(CircuitConfig::new(1.0, 0.0, 50.0).is_err());
        assert!(CircuitConfig::new(1.0, 50.0, f64::INFINITY).is_err());
    }

    #[test]
    fn vacuum_impedance_of_fixture() {
        // 59.958491... * ln(4.1 / 1.27), evaluated at 40 digits.
        let z0 = characteristic_impedance(&CoaxGeometry::default(), &ComplexPermittivity::VACUUM);
        assert!(rel(z0.re, 70.269_557_791_797_668) < 1e-12, "{z0}");
        assert!((z0.re - 70.28).abs() < 0.02);
        assert_eq!(z0.im, 0.0);

        let z4 = characteristic_impedance(
            &CoaxGeometry::default(),
            &ComplexPermittivity::new(4.0, 0.0).unwrap(),
        );
        assert!(rel(z4.re, z0.re / 2.0) < 1e-15);
    }

    #[test]
    fn lossy_impedance_has_positive_imaginary_part() {
        let eps = ComplexPermittivity::new(2.0, 0.02).unwrap();
        let z0 = characteristic_impedance(&CoaxGeometry::default(), &eps);
        // 40-digit evaluation of 59.958491...*ln(4.1/1.27)/sqrt(2-0.02j)
        assert!(rel(z0.re, 49.686_217_658_383_808) < 1e-12, "{z0}");
        assert!(rel(z0.im, 0.248_424_877_825_231_20) < 1e-12, "{z0}");
    }

    #[test]
    fn propagation_constant_values() {
        let g1 = propagation_constant(&ComplexPermittivity::VACUUM, 1e9);
        assert_eq!(g1.re, 0.0);
        assert!(rel(g1.im, 20.958_450_219_516_8) < 1e-12);
        let g4 = propagation_constant(&ComplexPermittivity::new(4.0, 0.0).unwrap(), 1e9);
        assert!(rel(g4.im, 2.0 * g1.im) < 1e-15);

        let g = propagation_constant(&ComplexPermittivity::new(2.0, 0.05).unwrap(), 0.5e9);
        // 40-digit evaluation of 1j*2*pi*5e8/c*sqrt(2-0.05j)
        assert!(rel(g.re, 0.185_233_809_851_384_78) < 1e-12, "{g}");
        assert!(rel(g.im, 14.821_019_849_062_157) < 1e-12, "{g}");
        assert!((g.im - 2f64.sqrt() * 0.5 * g1.im).abs() / g.im < 1e-3);
    }

    #[test]
    fn reflection_coefficient_values() {
        assert_eq!(
            reflection_coefficient(Complex64::new(50.0, 0.0), 50.0),
            Complex64::new(0.0, 0.0)
        );
        let g = reflection_coefficient(Complex64::new(70.28, 0.0), 50.0);
        assert!((g.re - (50.0 - 70.28) / (50.0 + 70.28)).abs() < 1e-15);
        assert!((g.re + 0.1686).abs() < 1e-4);
        let g = reflection_coefficient(Complex64::new(25.0, 0.0), 50.0);
        assert!((g.re - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn input_impedance_special_lengths() {
        let z0 = Complex64::new(70.28, 0.0);
        let beta = 20.0;
        let gamma = Complex64::new(0.0, beta);

        let zin = input_impedance(z0, 50.0, gamma, 0.0).unwrap();
        assert!((zin - 50.0).norm() < 1e-12);

        let half = input_impedance(z0, 50.0, gamma, PI / beta).unwrap();
        assert!((half - 50.0).norm() < 1e-9, "{half}");

        let quarter = input_impedance(z0, 50.0, gamma, PI / (2.0 * beta)).unwrap();
        assert!(rel(quarter.re, 70.28 * 70.28 / 50.0) < 1e-9, "{quarter}");
        assert!(quarter.im.abs() < 1e-6);
        assert!(rel(quarter.re, 98.78) < 1e-3);
    }

    #[test]
    fn input_impedance_degenerate_denominator() {
        // Only a non-physical Z0 = 0 on a line with gamma = 0 gets here.
        let err = input_impedance(
            Complex64::new(0.0, 0.0),
            50.0,
            Complex64::new(0.0, 0.0),
            0.1,
        )
        .unwrap_err();
        assert!(matches!(err, Error::DegenerateEvaluation { .. }));
    }

    #[test]
    fn source_voltage_conventions() {
        assert!(rel(source_voltage_from_dbm(0.0, 50.0), (0.4f64).sqrt()) < 1e-15);
        assert!(rel(source_voltage_from_dbm(0.0, 50.0), 0.6325) < 1e-4);
        assert!(rel(source_voltage_from_dbm(-10.0, 50.0), 0.2) < 1e-12);
        let ratio = source_voltage_from_dbm(0.0, 200.0) / source_voltage_from_dbm(0.0, 50.0);
        assert!(rel(ratio, 2.0) < 1e-15);
    }

    #[test]
    fn matched_lossless_line_delivers_available_power() {
        let circuit = CircuitConfig::default();
        let geom = matched_geometry(0.036);
        for f in [5e7, 3.3e8, 1.05e9] {
            let p = load_power(f, &ComplexPermittivity::VACUUM, &geom, &circuit).unwrap();
            assert!(rel(p, circuit.available_power()) < 1e-12, "{p}");
        }
    }

    #[test]
    fn matched_lossy_line_attenuates_exponentially() {
        // With Gamma = 0 the delivered power reduces to P_avail exp(-2 alpha d).
        let circuit = CircuitConfig::default();
        let eps = ComplexPermittivity::new(2.0, 0.3).unwrap();
        let gamma = propagation_constant(&eps, 8e8);
        let d = 0.036;
        let p = power_from_line(Complex64::new(50.0, 0.0), gamma, d, &circuit).unwrap();
        let expected = circuit.available_power() * (-2.0 * gamma.re * d).exp();
        assert!(rel(p, expected) < 1e-12, "{p} vs {expected}");
    }

    #[test]
    fn loss_reduces_power_on_matched_geometry() {
        // Geometry matched to 50 ohm at the real part of the fill.
        let eps_real: f64 = 2.5;
        let a = 1.0e-3;
        let ratio = CoaxGeometry::radius_ratio_for_impedance(50.0 * eps_real.sqrt());
        let geom = CoaxGeometry::new(a, a * ratio, 0.036).unwrap();
        let circuit = CircuitConfig::default();
        let p0 = load_power(
            6e8,
            &ComplexPermittivity::new(eps_real, 0.0).unwrap(),
            &geom,
            &circuit,
        )
        .unwrap();
        assert!(rel(p0, circuit.available_power()) < 1e-12);
        let mut last = p0;
        for k in 1..=40 {
            let eps = ComplexPermittivity::new(eps_real, 0.05 * k as f64).unwrap();
            let p = load_power(6e8, &eps, &geom, &circuit).unwrap();
            assert!(p < last, "not decreasing at eps''={}", eps.eps_imag());
            last = p;
        }
    }

    #[test]
    fn zero_length_is_a_resistive_divider() {
        let circuit = CircuitConfig::new(1.3, 40.0, 75.0).unwrap();
        let geom = CoaxGeometry::default().with_length(1e-12).unwrap();
        let eps = ComplexPermittivity::new(7.0, 1.5).unwrap();
        let p = load_power(7e8, &eps, &geom, &circuit).unwrap();
        let v = 1.3 * 75.0 / (40.0 + 75.0);
        assert!(rel(p, v * v / (2.0 * 75.0)) < 1e-9);
    }

    #[test]
    fn grids() {
        let g = FrequencyGrid::stepped(50e6, 1050e6, 5e6).unwrap();
        assert_eq!(g.len(), 201);
        assert_eq!(g.as_slice()[200], 1050e6);
        let l = FrequencyGrid::linspace(1.0, 2.0, 3).unwrap();
        assert_eq!(l.as_slice(), &[1.0, 1.5, 2.0]);
        assert!(FrequencyGrid::new(vec![1.0, 1.0]).is_err());
        assert!(FrequencyGrid::new(vec![0.0, 1.0]).is_err());
    }
}
