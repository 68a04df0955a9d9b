use serde::{Deserialize, Serialize};

use super::{reconstruct_problem, ReconstructionResult, SolverConfig};
use crate::objective::WindowProblem;
use crate::spectrum::GRID_MATCH_TOLERANCE_HZ;
use crate::{
    plan_window, CircuitConfig, CoaxGeometry, Error, PowerSpectrum, Result, SamplingWindow,
};

/// How window positions relate to the band edges; recorded in run metadata.
pub const WINDOW_ALIGNMENT: &str =
    "first window lower edge at band_start; centers at band_start + bandwidth/2 + k*shift \
     while the upper edge stays within band_end";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPlan {
    pub band_start: f64,
    pub band_end: f64,
    pub window_bandwidth: f64,
    pub window_shift: f64,
    pub n_samples: usize,
}

impl Default for SweepPlan {
    /// 0.05-1.05 GHz, 95 MHz windows of 20 samples shifted by 10 MHz.
    fn default() -> Self {
        Self {
            band_start: 50e6,
            band_end: 1050e6,
            window_bandwidth: 95e6,
            window_shift: 10e6,
            n_samples: 20,
        }
    }
}

impl SweepPlan {
    pub fn validate(&self) -> Result<()> {
        let bad = |reason: String| Err(Error::invalid("sweep plan", reason));
        let all_finite = [
            self.band_start,
            self.band_end,
            self.window_bandwidth,
            self.window_shift,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !all_finite || self.band_start <= 0.0 {
            return bad("band edges must be finite and band_start > 0".into());
        }
        if !(self.window_bandwidth > 0.0) || !(self.window_shift > 0.0) {
            return bad("window_bandwidth and window_shift must be > 0".into());
        }
        if self.n_samples < 3 {
            return bad(format!("n_samples must be >= 3, got {}", self.n_samples));
        }
        if self.band_end - self.band_start < self.window_bandwidth * (1.0 - 1e-12) {
            return bad(format!(
                "band [{}, {}] Hz is narrower than one window ({} Hz)",
                self.band_start, self.band_end, self.window_bandwidth
            ));
        }
        Ok(())
    }

    /// Window centres, generated by index from `band_start`.
    pub fn centers(&self) -> Vec<f64> {
        let room = self.band_end - self.band_start - self.window_bandwidth;
        if room < -self.window_bandwidth * 1e-12 {
            return Vec::new();
        }
        let steps = (room.max(0.0) / self.window_shift * (1.0 + 1e-9)).floor() as usize;
        let first = self.band_start + self.window_bandwidth / 2.0;
        (0..=steps)
            .map(|k| first + k as f64 * self.window_shift)
            .collect()
    }

    pub fn windows(&self) -> Result<Vec<SamplingWindow>> {
        self.centers()
            .into_iter()
            .map(|c| plan_window(c, self.window_bandwidth, self.n_samples))
            .collect()
    }
}

/// Solves every window of `plan`; results come back ordered by centre.
pub fn sweep(
    measured: &PowerSpectrum,
    plan: &SweepPlan,
    geom: &CoaxGeometry,
    circuit: &CircuitConfig,
    config: &SolverConfig,
) -> Result<Vec<ReconstructionResult>> {
    plan.validate()?;
    config.validate()?;
    let (start, end) = measured.span();
    if plan.band_start < start - GRID_MATCH_TOLERANCE_HZ
        || plan.band_end > end + GRID_MATCH_TOLERANCE_HZ
    {
        return Err(Error::PlanExceedsSpectrum {
            plan_start: plan.band_start,
            plan_end: plan.band_end,
            spectrum_start: start,
            spectrum_end: end,
        });
    }
    let windows = plan.windows()?;
    if windows.is_empty() {
        return Err(Error::EmptySweep(format!(
            "no {} Hz window fits in [{}, {}] Hz",
            plan.window_bandwidth, plan.band_start, plan.band_end
        )));
    }
    let problems = windows
        .iter()
        .map(|w| {
            WindowProblem::new(w, measured, geom, circuit, config.objective)
                .map(|p| (w.center_frequency(), p))
        })
        .collect::<Result<Vec<_>>>()?;

    let solve =
        |(center, problem): &(f64, WindowProblem)| reconstruct_problem(problem, *center, config);

    #[cfg(feature = "parallel")]
    if config.parallel {
        use rayon::prelude::*;
        return Ok(problems.par_iter().map(solve).collect());
    }
    Ok(problems.iter().map(solve).collect())
}
