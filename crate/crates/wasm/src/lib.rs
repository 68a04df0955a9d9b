//! Browser bindings: forward power curves, objective landscapes and
//! single-window reconstruction on the default fixture.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use powerperm::{
    add_noise, generate_spectrum, plan_window, reconstruct_window, watts_to_dbm, Bounds,
    CircuitConfig, CoaxGeometry, ComplexPermittivity, FrequencyGrid, MaterialProfile, NoiseSpec,
    PowerSpectrum, SolverConfig, WindowProblem,
};
use wasm_bindgen::prelude::*;

const WINDOW_BANDWIDTH_HZ: f64 = 95e6;
const WINDOW_SAMPLES: usize = 20;

fn js(e: powerperm::Error) -> JsError {
    JsError::new(&e.to_string())
}

fn setup(outer_radius_mm: f64, length_cm: f64) -> Result<(CoaxGeometry, CircuitConfig), JsError> {
    let d = CoaxGeometry::default();
    let geom = CoaxGeometry::new(d.inner_radius(), outer_radius_mm * 1e-3, length_cm * 1e-2)
        .map_err(js)?;
    Ok((geom, CircuitConfig::default()))
}

fn spectrum(
    eps: ComplexPermittivity,
    grid: &FrequencyGrid,
    geom: &CoaxGeometry,
    circuit: &CircuitConfig,
    sigma_db: f64,
    seed: u64,
) -> Result<PowerSpectrum, JsError> {
    let clean =
        generate_spectrum(&MaterialProfile::Constant(eps), grid, geom, circuit).map_err(js)?;
    Ok(add_noise(
        &clean,
        &NoiseSpec::new(sigma_db, seed).map_err(js)?,
    ))
}

/// Frequencies of the default 5 MHz grid over 0.05-1.05 GHz, in Hz.
#[wasm_bindgen]
pub fn default_frequencies() -> Vec<f64> {
    FrequencyGrid::stepped(50e6, 1050e6, 5e6)
        .expect("default grid is valid")
        .into_inner()
}

/// Delivered power in dBm on the default grid.
#[wasm_bindgen]
pub fn power_curve(
    eps_real: f64,
    eps_imag: f64,
    outer_radius_mm: f64,
    length_cm: f64,
    sigma_db: f64,
    seed: u64,
) -> Result<Vec<f64>, JsError> {
    let (geom, circuit) = setup(outer_radius_mm, length_cm)?;
    let eps = ComplexPermittivity::new(eps_real, eps_imag).map_err(js)?;
    let grid = FrequencyGrid::new(default_frequencies()).map_err(js)?;
    let s = spectrum(eps, &grid, &geom, &circuit, sigma_db, seed)?;
    Ok(s.powers().iter().map(|&p| watts_to_dbm(p)).collect())
}

/// `log10` of the window objective on a `resolution x resolution` grid
/// (row-major, `eps''` rows, `eps'` columns) for a spectrum synthesised
/// from the given fill.
#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn objective_landscape(
    eps_real: f64,
    eps_imag: f64,
    outer_radius_mm: f64,
    length_cm: f64,
    sigma_db: f64,
    seed: u64,
    center_hz: f64,
    real_max: f64,
    imag_max: f64,
    resolution: usize,
) -> Result<Vec<f64>, JsError> {
    let (geom, circuit) = setup(outer_radius_mm, length_cm)?;
    let eps = ComplexPermittivity::new(eps_real, eps_imag).map_err(js)?;
    let window = plan_window(center_hz, WINDOW_BANDWIDTH_HZ, WINDOW_SAMPLES).map_err(js)?;
    let grid = FrequencyGrid::new(window.samples().to_vec()).map_err(js)?;
    let measured = spectrum(eps, &grid, &geom, &circuit, sigma_db, seed)?;
    let problem =
        WindowProblem::new(&window, &measured, &geom, &circuit, Default::default()).map_err(js)?;
    if resolution < 2 || !(real_max > 1.0) || !(imag_max > 0.0) {
        return Err(JsError::new(
            "need resolution >= 2, real_max > 1, imag_max > 0",
        ));
    }
    let step =
        |max: f64, min: f64, i: usize| min + (max - min) * i as f64 / (resolution - 1) as f64;
    let mut out = Vec::with_capacity(resolution * resolution);
    for row in 0..resolution {
        let im = step(imag_max, 0.0, row);
        for col in 0..resolution {
            let re = step(real_max, 1.0, col);
            let f = problem.cost(&ComplexPermittivity::new(re, im).map_err(js)?);
            out.push(f.max(1e-300).log10());
        }
    }
    Ok(out)
}

/// Reconstructs the window at `center_hz` from a synthesised spectrum.
/// Returns `[eps', eps'', objective, iterations, converged (0/1), spread]`.
#[wasm_bindgen]
pub fn reconstruct(
    eps_real: f64,
    eps_imag: f64,
    outer_radius_mm: f64,
    length_cm: f64,
    sigma_db: f64,
    seed: u64,
    center_hz: f64,
) -> Result<Vec<f64>, JsError> {
    let (geom, circuit) = setup(outer_radius_mm, length_cm)?;
    let eps = ComplexPermittivity::new(eps_real, eps_imag).map_err(js)?;
    let window = plan_window(center_hz, WINDOW_BANDWIDTH_HZ, WINDOW_SAMPLES).map_err(js)?;
    let grid = FrequencyGrid::new(window.samples().to_vec()).map_err(js)?;
    let measured = spectrum(eps, &grid, &geom, &circuit, sigma_db, seed)?;
    let config = SolverConfig {
        eps_real_bounds: Bounds::new(1.0, 90.0),
        eps_imag_bounds: Bounds::new(0.0, 50.0),
        parallel: false,
        ..SolverConfig::default()
    };
    let r = reconstruct_window(&window, &measured, &geom, &circuit, &config).map_err(js)?;
    Ok(vec![
        r.eps.eps_real(),
        r.eps.eps_imag(),
        r.final_objective,
        r.iterations as f64,
        if r.converged { 1.0 } else { 0.0 },
        r.multistart_spread,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_curve_matches_core() {
        let p = power_curve(2.02, 0.009, 4.1, 3.6, 0.0, 0).unwrap();
        assert_eq!(p.len(), 201);
        let direct = powerperm::load_power(
            50e6,
            &ComplexPermittivity::new(2.02, 0.009).unwrap(),
            &CoaxGeometry::default(),
            &CircuitConfig::default(),
        )
        .unwrap();
        assert!((p[0] - watts_to_dbm(direct)).abs() < 1e-12);
    }

    #[test]
    fn landscape_minimum_near_truth() {
        let n = 41;
        let l = objective_landscape(5.0, 1.0, 4.1, 3.6, 0.0, 0, 497.5e6, 9.0, 2.0, n).unwrap();
        let (best, _) = l
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .unwrap();
        // eps' = 5 -> column 20, eps'' = 1 -> row 20.
        assert_eq!(best, 20 * n + 20);
    }

    #[test]
    fn reconstruct_round_trip() {
        let r = reconstruct(5.0, 1.0, 4.1, 3.6, 0.0, 0, 497.5e6).unwrap();
        assert!(
            (r[0] - 5.0).abs() < 1e-4 && (r[1] - 1.0).abs() < 1e-4,
            "{r:?}"
        );
        assert_eq!(r[4], 1.0);
    }
}
