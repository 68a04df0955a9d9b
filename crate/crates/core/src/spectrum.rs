use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Grid-matching tolerance for exact lookups, in hertz.
pub const GRID_MATCH_TOLERANCE_HZ: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Measured,
    Synthetic,
}

/// Record of the noise applied to a synthetic spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseInfo {
    pub sigma_db: f64,
    pub seed: u64,
    pub algorithm: String,
}

/// Ordered `(frequency [Hz], power [W])` samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerSpectrum {
    frequencies: Vec<f64>,
    powers: Vec<f64>,
    provenance: Provenance,
    noise: Option<NoiseInfo>,
}

impl PowerSpectrum {
    pub fn new(frequencies: Vec<f64>, powers: Vec<f64>, provenance: Provenance) -> Result<Self> {
        if frequencies.len() != powers.len() {
            return Err(Error::InvalidSpectrum(format!(
                "{} frequencies but {} powers",
                frequencies.len(),
                powers.len()
            )));
        }
        if frequencies.is_empty() {
            return Err(Error::InvalidSpectrum("no samples".into()));
        }
        for (i, (&f, &p)) in frequencies.iter().zip(&powers).enumerate() {
            if !f.is_finite() || f <= 0.0 {
                return Err(Error::InvalidSpectrum(format!(
                    "sample {i}: frequency must be finite and > 0, got {f}"
                )));
            }
            if !p.is_finite() || p <= 0.0 {
                return Err(Error::InvalidSpectrum(format!(
                    "sample {i}: power must be finite and > 0, got {p}"
                )));
            }
            if i > 0 && f <= frequencies[i - 1] {
                return Err(Error::InvalidSpectrum(format!(
                    "sample {i}: frequency {f} is not above the previous {}",
                    frequencies[i - 1]
                )));
            }
        }
        Ok(Self {
            frequencies,
            powers,
            provenance,
            noise: None,
        })
    }

    pub fn with_noise_info(mut self, noise: NoiseInfo) -> Self {
        self.noise = Some(noise);
        self
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    pub fn powers(&self) -> &[f64] {
        &self.powers
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn noise(&self) -> Option<&NoiseInfo> {
        self.noise.as_ref()
    }

    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }

    /// `(first, last)` frequency.
    pub fn span(&self) -> (f64, f64) {
        (self.frequencies[0], self.frequencies[self.len() - 1])
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.frequencies
            .iter()
            .copied()
            .zip(self.powers.iter().copied())
    }

    /// Power of the sample within [`GRID_MATCH_TOLERANCE_HZ`] of `freq`.
    pub fn power_at(&self, freq: f64) -> Result<f64> {
        self.check_span(freq)?;
        let idx = self.frequencies.partition_point(|&f| f < freq);
        let nearest = [idx.checked_sub(1), Some(idx)]
            .into_iter()
            .flatten()
            .filter(|&i| i < self.len())
            .min_by(|&a, &b| {
                (self.frequencies[a] - freq)
                    .abs()
                    .total_cmp(&(self.frequencies[b] - freq).abs())
            });
        match nearest {
            Some(i) if (self.frequencies[i] - freq).abs() <= GRID_MATCH_TOLERANCE_HZ => {
                Ok(self.powers[i])
            }
            _ => Err(Error::FrequencyNotOnGrid {
                freq,
                tolerance: GRID_MATCH_TOLERANCE_HZ,
            }),
        }
    }

    /// Power linearly interpolated (in watts) between the bracketing samples.
    pub fn interpolated_power_at(&self, freq: f64) -> Result<f64> {
        self.check_span(freq)?;
        let idx = self.frequencies.partition_point(|&f| f < freq);
        if idx < self.len() && (self.frequencies[idx] - freq).abs() <= GRID_MATCH_TOLERANCE_HZ {
            return Ok(self.powers[idx]);
        }
        if idx == 0 {
            return Ok(self.powers[0]);
        }
        if idx >= self.len() {
            return Ok(self.powers[self.len() - 1]);
        }
        let (f0, f1) = (self.frequencies[idx - 1], self.frequencies[idx]);
        let (p0, p1) = (self.powers[idx - 1], self.powers[idx]);
        Ok(p0 + (freq - f0) / (f1 - f0) * (p1 - p0))
    }

    fn check_span(&self, freq: f64) -> Result<()> {
        let (start, end) = self.span();
        if !(freq >= start - GRID_MATCH_TOLERANCE_HZ && freq <= end + GRID_MATCH_TOLERANCE_HZ) {
            return Err(Error::FrequencyOutOfRange { freq, start, end });
        }
        Ok(())
    }

    /// Same samples with every power replaced by `f(index, power)`.
    pub(crate) fn map_powers(&self, f: impl Fn(usize, f64) -> f64) -> Self {
        Self {
            frequencies: self.frequencies.clone(),
            powers: self
                .powers
                .iter()
                .enumerate()
                .map(|(i, &p)| f(i, p))
                .collect(),
            provenance: self.provenance,
            noise: self.noise.clone(),
        }
    }
}
