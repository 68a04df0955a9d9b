//! Synthetic "measured" spectra from a known material profile.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::{
    load_power, CircuitConfig, CoaxGeometry, ComplexPermittivity, Error, FrequencyGrid, NoiseInfo,
    PowerSpectrum, Provenance, Result,
};

/// Name recorded in spectrum metadata for the noise generator.
pub const NOISE_ALGORITHM: &str =
    "ChaCha20 (rand_chacha) seeded by seed_from_u64(seed), stream = sample index, StandardNormal";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum MaterialProfile {
    Constant(ComplexPermittivity),
    /// Nodes with strictly increasing frequency; linear in both parts
    /// between nodes.
    Tabulated(Vec<(f64, ComplexPermittivity)>),
}

impl MaterialProfile {
    pub fn tabulated(nodes: Vec<(f64, ComplexPermittivity)>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::invalid("material profile", "no nodes"));
        }
        if let Some(i) = nodes.windows(2).position(|w| !(w[1].0 > w[0].0)) {
            return Err(Error::invalid(
                "material profile",
                format!("node frequencies not strictly increasing at node {}", i + 1),
            ));
        }
        Ok(Self::Tabulated(nodes))
    }

    pub fn at(&self, freq: f64) -> Result<ComplexPermittivity> {
        match self {
            Self::Constant(eps) => Ok(*eps),
            Self::Tabulated(nodes) => {
                let (start, end) = (nodes[0].0, nodes[nodes.len() - 1].0);
                if !(freq >= start && freq <= end) {
                    return Err(Error::FrequencyOutOfRange { freq, start, end });
                }
                let idx = nodes.partition_point(|(f, _)| *f < freq);
                if nodes[idx].0 == freq {
                    return Ok(nodes[idx].1);
                }
                let (f0, e0) = nodes[idx - 1];
                let (f1, e1) = nodes[idx];
                Ok(e0.lerp(&e1, (freq - f0) / (f1 - f0)))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub sigma_db: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(sigma_db: f64, seed: u64) -> Result<Self> {
        if !sigma_db.is_finite() || sigma_db < 0.0 {
            return Err(Error::invalid(
                "noise",
                format!("sigma_db must be finite and >= 0, got {sigma_db}"),
            ));
        }
        Ok(Self { sigma_db, seed })
    }
}

pub fn generate_spectrum(
    profile: &MaterialProfile,
    grid: &FrequencyGrid,
    geom: &CoaxGeometry,
    circuit: &CircuitConfig,
) -> Result<PowerSpectrum> {
    let powers = grid
        .as_slice()
        .iter()
        .map(|&f| load_power(f, &profile.at(f)?, geom, circuit))
        .collect::<Result<Vec<_>>>()?;
    PowerSpectrum::new(grid.as_slice().to_vec(), powers, Provenance::Synthetic)
}

/// Standard normal draw for sample `index`; independent of draw order.
fn gaussian_for(seed: u64, index: usize) -> f64 {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng.sample(StandardNormal)
}

/// Multiplies each power by `10^(g/10)`, `g ~ N(0, sigma_db^2)`.
pub fn add_noise(spectrum: &PowerSpectrum, noise: &NoiseSpec) -> PowerSpectrum {
    let info = NoiseInfo {
        sigma_db: noise.sigma_db,
        seed: noise.seed,
        algorithm: NOISE_ALGORITHM.to_string(),
    };
    if noise.sigma_db == 0.0 {
        return spectrum.clone().with_noise_info(info);
    }
    spectrum
        .map_powers(|i, p| p * 10f64.powf(noise.sigma_db * gaussian_for(noise.seed, i) / 10.0))
        .with_noise_info(info)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat(n: usize) -> PowerSpectrum {
        let f = (1..=n).map(|i| i as f64 * 1e3).collect();
        PowerSpectrum::new(f, vec![1e-3; n], Provenance::Synthetic).unwrap()
    }

    #[test]
    fn zero_sigma_is_identity() {
        let s = flat(50);
        let out = add_noise(&s, &NoiseSpec::new(0.0, 9).unwrap());
        assert_eq!(out.powers(), s.powers());
        assert_eq!(out.noise().unwrap().sigma_db, 0.0);
    }

    #[test]
    fn seed_determinism() {
        let s = flat(200);
        let n = NoiseSpec::new(0.05, 1234).unwrap();
        let a = add_noise(&s, &n);
        let b = add_noise(&s, &n);
        assert!(a
            .powers()
            .iter()
            .zip(b.powers())
            .all(|(x, y)| x.to_bits() == y.to_bits()));
        let c = add_noise(&s, &NoiseSpec::new(0.05, 1235).unwrap());
        assert_ne!(a.powers(), c.powers());
        assert!(a.powers().iter().all(|&p| p > 0.0));
    }

    #[test]
    fn noise_standard_deviation_in_db() {
        let n = 100_000;
        let s = flat(n);
        let out = add_noise(&s, &NoiseSpec::new(0.05, 7).unwrap());
        let db: Vec<f64> = out
            .powers()
            .iter()
            .zip(s.powers())
            .map(|(o, i)| 10.0 * (o / i).log10())
            .collect();
        let mean = db.iter().sum::<f64>() / n as f64;
        let var = db.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!((var.sqrt() - 0.05).abs() < 0.002, "sd = {}", var.sqrt());
        assert!(mean.abs() < 0.001);
    }

    #[test]
    fn tabulated_profile_interpolates() {
        let e0 = ComplexPermittivity::new(2.0, 0.0).unwrap();
        let e1 = ComplexPermittivity::new(3.0, 0.2).unwrap();
        let p = MaterialProfile::tabulated(vec![(1e8, e0), (3e8, e1)]).unwrap();
        let mid = p.at(2e8).unwrap();
        assert!((mid.eps_real() - 2.5).abs() < 1e-15);
        assert!((mid.eps_imag() - 0.1).abs() < 1e-15);
        assert_eq!(p.at(1e8).unwrap(), e0);
        assert!(p.at(4e8).is_err());
        assert!(MaterialProfile::tabulated(vec![(1e8, e0), (1e8, e1)]).is_err());

        let grid = FrequencyGrid::new(vec![2e8]).unwrap();
        let geom = CoaxGeometry::default();
        let circuit = CircuitConfig::default();
        let s = generate_spectrum(&p, &grid, &geom, &circuit).unwrap();
        assert_eq!(
            s.powers()[0],
            load_power(2e8, &mid, &geom, &circuit).unwrap()
        );
        assert_eq!(s.provenance(), Provenance::Synthetic);
    }

    #[test]
    fn vacuum_on_matched_fixture_is_flat() {
        let a = 1e-3;
        let geom = CoaxGeometry::new(a, a * CoaxGeometry::radius_ratio_for_impedance(50.0), 0.036)
            .unwrap();
        let circuit = CircuitConfig::default();
        let grid = FrequencyGrid::stepped(50e6, 1050e6, 5e6).unwrap();
        let s = generate_spectrum(
            &MaterialProfile::Constant(ComplexPermittivity::VACUUM),
            &grid,
            &geom,
            &circuit,
        )
        .unwrap();
        for p in s.powers() {
            assert!(((p - circuit.available_power()) / p).abs() < 1e-12);
        }
    }
}
