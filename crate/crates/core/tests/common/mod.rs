//! Test-only references that share no code with the library model.

#![allow(dead_code)]

use num_complex::Complex64;
use powerperm::{
    generate_spectrum, CircuitConfig, CoaxGeometry, ComplexPermittivity, FrequencyGrid,
    MaterialProfile, PowerSpectrum,
};

const C: f64 = 299_792_458.0;
const ETA0: f64 = 376.730_313_461_770_66;

/// Power into the load from a cascade of `segments` identical ABCD
/// two-ports, solved as a voltage divider at the load port.
pub fn abcd_power(
    freq: f64,
    eps: &ComplexPermittivity,
    geom: &CoaxGeometry,
    circuit: &CircuitConfig,
    segments: u32,
) -> f64 {
    let e = Complex64::new(eps.eps_real(), -eps.eps_imag());
    let root = e.sqrt();
    let z0 = ETA0 * (geom.outer_radius() / geom.inner_radius()).ln()
        / (2.0 * std::f64::consts::PI)
        / root;
    let gamma = Complex64::i() * (2.0 * std::f64::consts::PI * freq / C) * root;
    let gl = gamma * (geom.length() / segments as f64);
    let (ch, sh) = (gl.cosh(), gl.sinh());
    let seg = [[ch, z0 * sh], [sh / z0, ch]];
    let mut m = [
        [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
        [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
    ];
    for _ in 0..segments {
        m = [
            [
                m[0][0] * seg[0][0] + m[0][1] * seg[1][0],
                m[0][0] * seg[0][1] + m[0][1] * seg[1][1],
            ],
            [
                m[1][0] * seg[0][0] + m[1][1] * seg[1][0],
                m[1][0] * seg[0][1] + m[1][1] * seg[1][1],
            ],
        ];
    }
    let (rs, rl) = (circuit.source_resistance(), circuit.load_resistance());
    let denom = m[0][0] + m[0][1] / rl + rs * (m[1][0] + m[1][1] / rl);
    let v_load = circuit.source_voltage_amplitude() / denom;
    v_load.norm_sqr() / (2.0 * rl)
}

pub fn eps(re: f64, im: f64) -> ComplexPermittivity {
    ComplexPermittivity::new(re, im).unwrap()
}

/// Noiseless spectrum on the 5 MHz grid over 0.05-1.05 GHz.
pub fn reference_spectrum(profile: &MaterialProfile) -> PowerSpectrum {
    generate_spectrum(
        profile,
        &FrequencyGrid::stepped(50e6, 1050e6, 5e6).unwrap(),
        &CoaxGeometry::default(),
        &CircuitConfig::default(),
    )
    .unwrap()
}
