//! Per-window minimisation and the sliding-window sweep.
//!
//! A window is solved in two stages: the objective is scanned on a tensor
//! grid over the permittivity bounds, then the best few cells are polished
//! with a box-constrained simplex. Each polish restarts from its own result
//! until a restart no longer moves the optimum, which guards against the
//! simplex collapsing in the long, flat valleys this objective produces
//! when the fill is close to matching the terminations.

mod simplex;
mod sweep;

use serde::{Deserialize, Serialize};

use crate::objective::{ObjectiveOptions, WindowProblem};
use crate::{
    CircuitConfig, CoaxGeometry, ComplexPermittivity, Error, PowerSpectrum, Result, SamplingWindow,
};
use simplex::{SimplexOptions, SimplexOutcome};

pub use sweep::{sweep, SweepPlan, WINDOW_ALIGNMENT};

/// Closed interval `[min, max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub min: f64,
    pub max: f64,
}

impl Bounds {
    pub fn new(min: f64, max: f64) -> Self {
        Self { min, max }
    }

    pub fn contains(&self, v: f64) -> bool {
        v >= self.min && v <= self.max
    }

    pub fn width(&self) -> f64 {
        self.max - self.min
    }

    /// `n >= 2` points from `min` to `max` inclusive.
    fn points(&self, n: usize) -> impl Iterator<Item = f64> + '_ {
        let last = (n - 1) as f64;
        (0..n).map(move |i| {
            if i + 1 == n {
                self.max
            } else {
                self.min + self.width() * (i as f64 / last)
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub eps_real_bounds: Bounds,
    pub eps_imag_bounds: Bounds,
    /// Grid points per axis for the coarse scan.
    pub grid_resolution: usize,
    /// Parameter-space stopping threshold (max-norm over the simplex).
    pub param_tolerance: f64,
    /// Objective-spread stopping threshold, in objective units.
    pub objective_tolerance: f64,
    /// Simplex iteration budget per start, restarts included.
    pub max_iterations: usize,
    pub multistart_count: usize,
    pub objective: ObjectiveOptions,
    /// Solve sweep windows on a thread pool (needs the `parallel` feature).
    pub parallel: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            eps_real_bounds: Bounds::new(1.0, 90.0),
            eps_imag_bounds: Bounds::new(0.0, 50.0),
            grid_resolution: 64,
            param_tolerance: 1e-6,
            objective_tolerance: 1e-30,
            max_iterations: 500,
            multistart_count: 3,
            objective: ObjectiveOptions::default(),
            parallel: true,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |reason: String| Err(Error::invalid("solver config", reason));
        let re = self.eps_real_bounds;
        let im = self.eps_imag_bounds;
        if !(re.min >= 1.0 && re.max > re.min && re.max.is_finite()) {
            return bad(format!(
                "eps_real bounds must satisfy 1 <= min < max < inf, got [{}, {}]",
                re.min, re.max
            ));
        }
        if !(im.min >= 0.0 && im.max > im.min && im.max.is_finite()) {
            return bad(format!(
                "eps_imag bounds must satisfy 0 <= min < max < inf, got [{}, {}]",
                im.min, im.max
            ));
        }
        if self.grid_resolution < 2 {
            return bad(format!(
                "grid_resolution must be >= 2, got {}",
                self.grid_resolution
            ));
        }
        if !(self.param_tolerance > 0.0 && self.objective_tolerance > 0.0) {
            return bad("tolerances must be > 0".into());
        }
        if self.max_iterations == 0 || self.multistart_count == 0 {
            return bad("max_iterations and multistart_count must be >= 1".into());
        }
        Ok(())
    }
}

/// Permittivity assigned to one window centre, with solver diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionResult {
    pub center_frequency: f64,
    pub eps: ComplexPermittivity,
    pub final_objective: f64,
    /// Simplex iterations spent by the winning start.
    pub iterations: usize,
    pub converged: bool,
    /// Largest pairwise distance in `(eps', eps'')` between the refined
    /// multistart solutions whose objective is within a factor of two of
    /// the best (plus the rounding floor). Starts that settle in a clearly
    /// worse basin are left out.
    pub multistart_spread: f64,
    /// Objective of the best coarse-grid cell.
    pub grid_objective: f64,
}

fn scan(
    problem: &WindowProblem,
    real: Bounds,
    imag: Bounds,
    resolution: usize,
) -> Vec<(ComplexPermittivity, f64)> {
    let mut cells: Vec<(ComplexPermittivity, f64)> = real
        .points(resolution)
        .flat_map(|er| {
            imag.points(resolution).map(move |ei| {
                let eps = ComplexPermittivity::new_unchecked(er, ei);
                (eps, problem.cost(&eps))
            })
        })
        .collect();
    cells.sort_by(|a, b| {
        a.1.total_cmp(&b.1)
            .then(a.0.eps_real().total_cmp(&b.0.eps_real()))
            .then(a.0.eps_imag().total_cmp(&b.0.eps_imag()))
    });
    cells
}

/// Starting points for the polish, from the profile of the coarse grid
/// over `eps'`.
///
/// For every `eps'` column the best cell is improved by a 1-D simplex over
/// `eps''`, giving the column's valley floor `g(eps')`. The starts are the
/// best local minima of `g` along the columns, padded with the best
/// remaining columns when there are fewer minima than `multistart_count`.
/// Ranking by `g` rather than by raw cell values keeps a narrow valley
/// that falls between grid rows from losing to broad shallow ones.
fn multistart_starts(
    problem: &WindowProblem,
    ranked: &[(ComplexPermittivity, f64)],
    config: &SolverConfig,
) -> Vec<ComplexPermittivity> {
    let n = config.grid_resolution;
    let real: Vec<f64> = config.eps_real_bounds.points(n).collect();
    let mut column_best: Vec<Option<ComplexPermittivity>> = vec![None; n];
    let mut filled = 0;
    for (eps, _) in ranked {
        let i = real.partition_point(|&v| v < eps.eps_real());
        if column_best[i].is_none() {
            column_best[i] = Some(*eps);
            filled += 1;
            if filled == n {
                break;
            }
        }
    }
    let lower = [config.eps_imag_bounds.min];
    let upper = [config.eps_imag_bounds.max];
    let step = [vec![0.5 * config.eps_imag_bounds.width() / (n - 1) as f64]];
    let opts = SimplexOptions {
        lower: &lower,
        upper: &upper,
        x_tolerance: config.param_tolerance,
        f_tolerance: config.objective_tolerance,
        f_rounding: problem.rounding_scale(),
        max_iterations: INNER_MAX_ITERATIONS,
    };
    let floors: Vec<(ComplexPermittivity, f64)> = column_best
        .into_iter()
        .map(|cell| {
            let cell = cell.expect("every column is scanned");
            let er = cell.eps_real();
            let out = simplex::minimize(
                |y: &[f64]| problem.cost(&ComplexPermittivity::new_unchecked(er, y[0])),
                &[cell.eps_imag()],
                &step,
                &opts,
            );
            (ComplexPermittivity::new_unchecked(er, out.x[0]), out.f)
        })
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| floors[a].1.total_cmp(&floors[b].1).then(a.cmp(&b)));
    let is_minimum = |i: usize| {
        let here = floors[i].1;
        (i == 0 || floors[i - 1].1 >= here) && (i + 1 == n || floors[i + 1].1 >= here)
    };
    let k = config.multistart_count;
    let mut chosen: Vec<usize> = order
        .iter()
        .copied()
        .filter(|&i| is_minimum(i))
        .take(k)
        .collect();
    for &i in &order {
        if chosen.len() >= k {
            break;
        }
        if !chosen.contains(&i) {
            chosen.push(i);
        }
    }
    chosen.into_iter().map(|i| floors[i].0).collect()
}

/// Objective on the full `resolution x resolution` grid over the bounds,
/// ranked ascending; ties break on `eps'` then `eps''`.
pub fn coarse_grid_scan(
    window: &SamplingWindow,
    measured: &PowerSpectrum,
    geom: &CoaxGeometry,
    circuit: &CircuitConfig,
    bounds: (Bounds, Bounds),
    resolution: usize,
) -> Result<Vec<(ComplexPermittivity, f64)>> {
    if resolution < 2 {
        return Err(Error::invalid(
            "grid resolution",
            format!("must be >= 2, got {resolution}"),
        ));
    }
    let config = SolverConfig {
        eps_real_bounds: bounds.0,
        eps_imag_bounds: bounds.1,
        grid_resolution: resolution,
        ..SolverConfig::default()
    };
    config.validate()?;
    let problem = WindowProblem::new(window, measured, geom, circuit, ObjectiveOptions::default())?;
    Ok(scan(&problem, bounds.0, bounds.1, resolution))
}

/// Gauss-Newton metric `J^T J` of the window residuals at `x`, with `J`
/// from central differences (one-sided against a bound).
fn residual_metric(
    problem: &WindowProblem,
    x: [f64; 2],
    lower: [f64; 2],
    upper: [f64; 2],
) -> [[f64; 2]; 2] {
    let mut jac = [Vec::new(), Vec::new()];
    for axis in 0..2 {
        let h = 1e-6 * x[axis].abs().max(1.0);
        let mut hi = x;
        let mut lo = x;
        hi[axis] = (x[axis] + h).min(upper[axis]);
        lo[axis] = (x[axis] - h).max(lower[axis]);
        let eval = |p: [f64; 2]| problem.model(&ComplexPermittivity::new_unchecked(p[0], p[1]));
        jac[axis] = match (eval(hi), eval(lo)) {
            (Ok(a), Ok(b)) => {
                let span = hi[axis] - lo[axis];
                a.iter().zip(&b).map(|(a, b)| (a - b) / span).collect()
            }
            _ => vec![0.0; problem.len()],
        };
    }
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let off = dot(&jac[0], &jac[1]);
    [[dot(&jac[0], &jac[0]), off], [off, dot(&jac[1], &jac[1])]]
}

/// Initial simplex edges along the principal axes of the local metric,
/// lengths proportional to `1/sqrt(eigenvalue)` with the longest equal to
/// `scale`. Falls back to the coordinate axes when the metric is unusable.
fn principal_edges(metric: [[f64; 2]; 2], scale: f64, cell: [f64; 2]) -> Vec<Vec<f64>> {
    let [[a, b], [_, d]] = metric;
    let fallback = || {
        let ratio = scale / cell[0].max(cell[1]);
        vec![vec![cell[0] * ratio, 0.0], vec![0.0, cell[1] * ratio]]
    };
    if !(a.is_finite() && b.is_finite() && d.is_finite()) || a + d <= 0.0 {
        return fallback();
    }
    let mean = 0.5 * (a + d);
    let radius = (0.25 * (a - d) * (a - d) + b * b).sqrt();
    let big = mean + radius;
    // Floor the small eigenvalue so edge lengths stay within 1e6 of each other.
    let small = (mean - radius).max(big * 1e-12);
    let theta = 0.5 * (2.0 * b).atan2(a - d);
    let (s, c) = theta.sin_cos();
    let stiff = [c, s];
    let flat = [-s, c];
    let stiff_len = scale * (small / big).sqrt();
    vec![
        vec![flat[0] * scale, flat[1] * scale],
        vec![stiff[0] * stiff_len, stiff[1] * stiff_len],
    ]
}

/// Iteration cap for each inner one-dimensional `eps''` solve.
const INNER_MAX_ITERATIONS: usize = 400;

/// Two-stage polish from a grid cell.
///
/// Stage one is a restarted 2-D simplex seeded along the principal axes of
/// the local Gauss-Newton metric; it finds the valley floor. Near-matched
/// fills give a strongly curved valley in which a 2-D simplex stagnates, so
/// stage two minimises the profile `g(eps') = min over eps'' of f` with a
/// 1-D simplex, each `g` evaluation being an inner 1-D simplex solve over
/// `eps''` warm-started from the previous one. The better stage wins.
fn refine(
    problem: &WindowProblem,
    start: ComplexPermittivity,
    config: &SolverConfig,
) -> SimplexOutcome {
    let lower = [config.eps_real_bounds.min, config.eps_imag_bounds.min];
    let upper = [config.eps_real_bounds.max, config.eps_imag_bounds.max];
    let cells = (config.grid_resolution - 1) as f64;
    let cell = [
        config.eps_real_bounds.width() / cells,
        config.eps_imag_bounds.width() / cells,
    ];
    let cost = |x: &[f64]| problem.cost(&ComplexPermittivity::new_unchecked(x[0], x[1]));
    let edges_at = |x: &[f64], scale: f64| {
        principal_edges(
            residual_metric(problem, [x[0], x[1]], lower, upper),
            scale,
            cell,
        )
    };
    let opts = SimplexOptions {
        lower: &lower,
        upper: &upper,
        x_tolerance: config.param_tolerance,
        f_tolerance: config.objective_tolerance,
        f_rounding: problem.rounding_scale(),
        max_iterations: config.max_iterations,
    };
    let valley = simplex::polish(
        cost,
        &[start.eps_real(), start.eps_imag()],
        edges_at,
        cell[0].max(cell[1]),
        &opts,
    );

    let profiled = profile_polish(problem, &valley, config, cell);
    if profiled.f < valley.f {
        SimplexOutcome {
            iterations: valley.iterations + profiled.iterations,
            ..profiled
        }
    } else {
        SimplexOutcome {
            iterations: valley.iterations + profiled.iterations,
            ..valley
        }
    }
}

fn profile_polish(
    problem: &WindowProblem,
    from: &SimplexOutcome,
    config: &SolverConfig,
    cell: [f64; 2],
) -> SimplexOutcome {
    use std::cell::Cell;

    let imag_lower = [config.eps_imag_bounds.min];
    let imag_upper = [config.eps_imag_bounds.max];
    let inner_opts = SimplexOptions {
        lower: &imag_lower,
        upper: &imag_upper,
        x_tolerance: config.param_tolerance * 1e-3,
        f_tolerance: config.objective_tolerance,
        f_rounding: problem.rounding_scale(),
        max_iterations: INNER_MAX_ITERATIONS,
    };
    let inner_step = [vec![cell[1] * 1e-3]];
    let warm = Cell::new(from.x[1]);
    let inner_ok = Cell::new(true);
    // (eps', eps'', f) of the best profile evaluation so far.
    let best = Cell::new((from.x[0], from.x[1], from.f));

    let profile = |x: &[f64]| {
        let eps_real = x[0];
        let out = simplex::minimize(
            |y: &[f64]| problem.cost(&ComplexPermittivity::new_unchecked(eps_real, y[0])),
            &[warm.get()],
            &inner_step,
            &inner_opts,
        );
        if !out.converged {
            inner_ok.set(false);
        }
        warm.set(out.x[0]);
        if out.f < best.get().2 {
            best.set((eps_real, out.x[0], out.f));
        }
        out.f
    };

    let real_lower = [config.eps_real_bounds.min];
    let real_upper = [config.eps_real_bounds.max];
    let outer_opts = SimplexOptions {
        lower: &real_lower,
        upper: &real_upper,
        x_tolerance: config.param_tolerance,
        f_tolerance: config.objective_tolerance,
        f_rounding: problem.rounding_scale(),
        max_iterations: config.max_iterations,
    };
    let outer = simplex::polish(
        profile,
        &[from.x[0]],
        |_, scale| vec![vec![scale]],
        cell[0] * 1e-2,
        &outer_opts,
    );
    let (eps_real, eps_imag, f) = best.get();
    SimplexOutcome {
        x: vec![eps_real, eps_imag],
        f,
        iterations: outer.iterations,
        converged: outer.converged && inner_ok.get(),
    }
}

fn spread(points: &[ComplexPermittivity]) -> f64 {
    let mut worst = 0.0f64;
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            let d = (a.eps_real() - b.eps_real()).hypot(a.eps_imag() - b.eps_imag());
            worst = worst.max(d);
        }
    }
    worst
}

pub(crate) fn reconstruct_problem(
    problem: &WindowProblem,
    center_frequency: f64,
    config: &SolverConfig,
) -> ReconstructionResult {
    let cells = scan(
        problem,
        config.eps_real_bounds,
        config.eps_imag_bounds,
        config.grid_resolution,
    );
    let grid_objective = cells[0].1;
    let outcomes: Vec<SimplexOutcome> = multistart_starts(problem, &cells, config)
        .into_iter()
        .map(|eps| refine(problem, eps, config))
        .collect();
    let solutions: Vec<ComplexPermittivity> = outcomes
        .iter()
        .map(|o| ComplexPermittivity::new_unchecked(o.x[0], o.x[1]))
        .collect();
    let (winner, best) = outcomes
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.f.total_cmp(&b.1.f))
        .expect("multistart_count >= 1");
    let floor = config
        .objective_tolerance
        .max(problem.rounding_scale() * best.f.max(0.0).sqrt());
    let competitive: Vec<ComplexPermittivity> = outcomes
        .iter()
        .zip(&solutions)
        .filter(|(o, _)| o.f <= 2.0 * best.f + floor)
        .map(|(_, eps)| *eps)
        .collect();
    ReconstructionResult {
        center_frequency,
        eps: solutions[winner],
        final_objective: best.f,
        iterations: best.iterations,
        converged: best.converged,
        multistart_spread: spread(&competitive),
        grid_objective,
    }
}

/// Best `(eps', eps'')` for one window. Non-convergence is reported through
/// `converged = false`, not as an error.
pub fn reconstruct_window(
    window: &SamplingWindow,
    measured: &PowerSpectrum,
    geom: &CoaxGeometry,
    circuit: &CircuitConfig,
    config: &SolverConfig,
) -> Result<ReconstructionResult> {
    config.validate()?;
    let problem = WindowProblem::new(window, measured, geom, circuit, config.objective)?;
    Ok(reconstruct_problem(
        &problem,
        window.center_frequency(),
        config,
    ))
}
