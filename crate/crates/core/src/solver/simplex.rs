//! Box-constrained Nelder-Mead.
//!
//! Trial points are clamped onto the box before evaluation, so every
//! vertex of the simplex is always feasible. Standard coefficients:
//! reflection 1, expansion 2, contraction 1/2, shrink 1/2.

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

#[derive(Debug, Clone)]
pub(crate) struct SimplexOptions<'a> {
    pub lower: &'a [f64],
    pub upper: &'a [f64],
    /// Stop when every vertex is within this distance (max-norm) of the best.
    pub x_tolerance: f64,
    /// ...and the objective spread across vertices is below this, or below
    /// the rounding floor `f_rounding * sqrt(f_best)`.
    pub f_tolerance: f64,
    pub f_rounding: f64,
    pub max_iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct SimplexOutcome {
    pub x: Vec<f64>,
    pub f: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn clamp_into(x: &mut [f64], lower: &[f64], upper: &[f64]) {
    for ((v, lo), hi) in x.iter_mut().zip(lower).zip(upper) {
        *v = v.clamp(*lo, *hi);
    }
}

fn along(from: &[f64], towards: &[f64], t: f64) -> Vec<f64> {
    from.iter()
        .zip(towards)
        .map(|(a, b)| a + t * (b - a))
        .collect()
}

/// Minimises `f` from `start`; the initial simplex is `start` plus each of
/// `edges`. An edge whose vertex would leave the box is taken in the
/// opposite direction before clamping.
pub(crate) fn minimize<F>(
    f: F,
    start: &[f64],
    edges: &[Vec<f64>],
    opts: &SimplexOptions,
) -> SimplexOutcome
where
    F: Fn(&[f64]) -> f64,
{
    let n = start.len();
    let mut x0 = start.to_vec();
    clamp_into(&mut x0, opts.lower, opts.upper);

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let f0 = f(&x0);
    simplex.push((x0.clone(), f0));
    for edge in edges.iter().take(n) {
        let inside = |sign: f64| {
            x0.iter()
                .zip(edge)
                .zip(opts.lower.iter().zip(opts.upper))
                .all(|((x, e), (lo, hi))| (lo..=hi).contains(&&(x + sign * e)))
        };
        let sign = if inside(1.0) || !inside(-1.0) {
            1.0
        } else {
            -1.0
        };
        let mut v: Vec<f64> = x0.iter().zip(edge).map(|(x, e)| x + sign * e).collect();
        clamp_into(&mut v, opts.lower, opts.upper);
        let fv = f(&v);
        simplex.push((v, fv));
    }

    let order = |s: &mut Vec<(Vec<f64>, f64)>| {
        s.sort_by(|a, b| a.1.total_cmp(&b.1));
    };

    let mut iterations = 0;
    loop {
        order(&mut simplex);
        let best = &simplex[0];
        let x_spread = simplex[1..]
            .iter()
            .flat_map(|(v, _)| v.iter().zip(&best.0).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        let f_spread = simplex[n].1 - best.1;
        let f_floor = opts
            .f_tolerance
            .max(opts.f_rounding * best.1.max(0.0).sqrt());
        if x_spread < opts.x_tolerance && f_spread < f_floor {
            return SimplexOutcome {
                x: best.0.clone(),
                f: best.1,
                iterations,
                converged: true,
            };
        }
        if iterations >= opts.max_iterations {
            return SimplexOutcome {
                x: best.0.clone(),
                f: best.1,
                iterations,
                converged: false,
            };
        }
        iterations += 1;

        let mut centroid = vec![0.0; n];
        for (v, _) in &simplex[..n] {
            for (c, x) in centroid.iter_mut().zip(v) {
                *c += x / n as f64;
            }
        }
        let worst = simplex[n].clone();
        let trial = |t: f64| {
            let mut p = along(&centroid, &worst.0, -t);
            clamp_into(&mut p, opts.lower, opts.upper);
            let fp = f(&p);
            (p, fp)
        };

        let reflected = trial(REFLECT);
        if reflected.1 < simplex[0].1 {
            let expanded = trial(EXPAND);
            simplex[n] = if expanded.1 < reflected.1 {
                expanded
            } else {
                reflected
            };
            continue;
        }
        if reflected.1 < simplex[n - 1].1 {
            simplex[n] = reflected;
            continue;
        }
        let contracted = if reflected.1 < worst.1 {
            trial(CONTRACT * REFLECT)
        } else {
            trial(-CONTRACT)
        };
        if contracted.1 < worst.1.min(reflected.1) {
            simplex[n] = contracted;
            continue;
        }
        let best_x = simplex[0].0.clone();
        for vertex in simplex.iter_mut().skip(1) {
            let mut p = along(&best_x, &vertex.0, SHRINK);
            clamp_into(&mut p, opts.lower, opts.upper);
            let fp = f(&p);
            *vertex = (p, fp);
        }
    }
}

/// Repeated [`minimize`] runs, each restarted at the previous optimum with
/// a fresh simplex from `edges_at(x, scale)`, until a restart no longer
/// improves or moves the optimum. A clamped simplex can collapse onto a
/// face of the box; restarting re-opens it. The iteration budget in
/// `opts` covers all runs.
pub(crate) fn polish<F, E>(
    f: F,
    start: &[f64],
    mut edges_at: E,
    initial_scale: f64,
    opts: &SimplexOptions,
) -> SimplexOutcome
where
    F: Fn(&[f64]) -> f64,
    E: FnMut(&[f64], f64) -> Vec<Vec<f64>>,
{
    let mut x = start.to_vec();
    clamp_into(&mut x, opts.lower, opts.upper);
    let mut fx = f(&x);
    let mut scale = initial_scale;
    let mut used = 0;
    loop {
        let run_opts = SimplexOptions {
            max_iterations: opts.max_iterations - used,
            ..opts.clone()
        };
        let edges = edges_at(&x, scale);
        let out = minimize(&f, &x, &edges, &run_opts);
        used += out.iterations;
        let moved = out
            .x
            .iter()
            .zip(&x)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let f_floor = opts.f_tolerance.max(opts.f_rounding * fx.max(0.0).sqrt());
        let improved = out.f < fx;
        let significant = fx - out.f >= f_floor;
        if improved {
            x = out.x;
            fx = out.f;
        }
        if !out.converged || !significant || moved < opts.x_tolerance {
            return SimplexOutcome {
                x,
                f: fx,
                iterations: used,
                converged: out.converged,
            };
        }
        scale = (10.0 * moved)
            .max(100.0 * opts.x_tolerance)
            .min(initial_scale);
    }
}
