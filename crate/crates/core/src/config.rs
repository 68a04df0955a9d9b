//! Run configuration: a registry of dotted keys, a flat `key = value` file
//! format, and layered resolution (command line over file over defaults).
//!
//! File grammar, one statement per line:
//!
//! ```text
//! line    := blank | comment | setting
//! comment := ws* '#' any*
//! setting := ws* key ws* '=' ws* value ws* ( '#' any* )?
//! key     := section '.' name          e.g. fixture.outer_radius_m
//! value   := bare | '"' any-but-quote* '"'
//! ```
//!
//! Bare values run to the first `#` and are trimmed; quote a value that
//! contains `#`. Every key is listed in [`KEYS`]; an unknown or repeated
//! key is an error. Numbers use Rust `f64`/integer syntax (`4.1e-3`, `64`),
//! booleans are `true`/`false`, and an empty value clears an optional key.

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::Serialize;

use crate::objective::ObjectiveOptions;
use crate::{
    Bounds, CircuitConfig, CoaxGeometry, ComplexPermittivity, Error, FrequencyGrid, Lookup,
    NoiseSpec, ResidualMode, Result, SolverConfig, SweepPlan,
};

/// One configurable key. `default: None` marks an optional key that is
/// unset unless given.
#[derive(Debug, Clone, Copy)]
pub struct KeySpec {
    pub key: &'static str,
    pub default: Option<&'static str>,
    pub help: &'static str,
}

const fn key(key: &'static str, default: &'static str, help: &'static str) -> KeySpec {
    KeySpec {
        key,
        default: Some(default),
        help,
    }
}

const fn optional(key: &'static str, help: &'static str) -> KeySpec {
    KeySpec {
        key,
        default: None,
        help,
    }
}

pub const KEYS: &[KeySpec] = &[
    key(
        "fixture.inner_radius_m",
        "1.27e-3",
        "inner conductor radius a [m]",
    ),
    key(
        "fixture.outer_radius_m",
        "4.1e-3",
        "outer conductor inner radius b [m]",
    ),
    key("fixture.length_m", "3.6e-2", "filled line length d [m]"),
    key(
        "circuit.source_power_dbm",
        "0",
        "available source power [dBm]",
    ),
    key(
        "circuit.source_resistance_ohm",
        "50",
        "source resistance R_s [ohm]",
    ),
    key(
        "circuit.load_resistance_ohm",
        "50",
        "load resistance R_L [ohm]",
    ),
    key(
        "grid.start_hz",
        "50e6",
        "first frequency of generated spectra [Hz]",
    ),
    key(
        "grid.stop_hz",
        "1050e6",
        "last frequency of generated spectra [Hz]",
    ),
    key(
        "grid.step_hz",
        "5e6",
        "frequency step of generated spectra [Hz]",
    ),
    key(
        "material.eps_real",
        "1",
        "constant fill eps' for forward/synth",
    ),
    key(
        "material.eps_imag",
        "0",
        "constant fill eps'' (eps = eps' - j eps'')",
    ),
    optional(
        "material.profile",
        "tabulated profile CSV (frequency_hz,eps_real,eps_imag); overrides the constant fill",
    ),
    key(
        "noise.sigma_db",
        "0",
        "log-normal noise standard deviation [dB] for synth",
    ),
    key("noise.seed", "0", "noise seed for synth"),
    key("sweep.band_start_hz", "50e6", "lower band edge [Hz]"),
    key("sweep.band_end_hz", "1050e6", "upper band edge [Hz]"),
    key("sweep.window_bandwidth_hz", "95e6", "window bandwidth [Hz]"),
    key("sweep.window_shift_hz", "10e6", "window shift [Hz]"),
    key("sweep.n_samples", "20", "samples per window"),
    optional(
        "sweep.center_hz",
        "solve only the window centred here instead of the whole sweep [Hz]",
    ),
    key("solver.eps_real_min", "1", "lower bound on eps'"),
    key("solver.eps_real_max", "90", "upper bound on eps'"),
    key("solver.eps_imag_min", "0", "lower bound on eps''"),
    key("solver.eps_imag_max", "50", "upper bound on eps''"),
    key(
        "solver.grid_resolution",
        "64",
        "coarse grid points per axis",
    ),
    key(
        "solver.param_tolerance",
        "1e-6",
        "simplex parameter tolerance",
    ),
    key(
        "solver.objective_tolerance",
        "1e-30",
        "simplex objective tolerance",
    ),
    key(
        "solver.max_iterations",
        "500",
        "simplex iteration budget per stage",
    ),
    key("solver.multistart_count", "3", "number of polished starts"),
    key("solver.residual", "watts", "residual units: watts | db"),
    key("solver.lookup", "exact", "sample lookup: exact | linear"),
    key("solver.parallel", "true", "solve windows in parallel"),
    optional("io.input", "input spectrum CSV"),
    optional("io.output", "output CSV (stdout when unset)"),
];

pub fn spec(key: &str) -> Option<&'static KeySpec> {
    KEYS.iter().find(|k| k.key == key)
}

/// Command-line flag for a key: `fixture.outer_radius_m` -> `fixture-outer-radius-m`.
pub fn flag_name(key: &str) -> String {
    key.replace(['.', '_'], "-")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Origin {
    Default,
    File,
    Cli,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Setting {
    pub value: String,
    pub origin: Origin,
}

/// Resolved raw values for every key that has one.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Settings(BTreeMap<String, Setting>);

fn config_err(key: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Config {
        key: key.into(),
        message: message.into(),
    }
}

/// Parses config-file text into `(key, value)` pairs in file order.
pub fn parse_file(text: &str) -> Result<Vec<(String, String)>> {
    let mut out: Vec<(String, String)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let (k, rest) = trimmed
            .split_once('=')
            .ok_or_else(|| config_err(format!("line {line}"), "expected `key = value`"))?;
        let k = k.trim();
        if spec(k).is_none() {
            return Err(config_err(k, format!("unknown key (line {line})")));
        }
        let rest = rest.trim_start();
        let value = if let Some(quoted) = rest.strip_prefix('"') {
            let (v, tail) = quoted
                .split_once('"')
                .ok_or_else(|| config_err(k, format!("unterminated quote (line {line})")))?;
            let tail = tail.trim();
            if !(tail.is_empty() || tail.starts_with('#')) {
                return Err(config_err(
                    k,
                    format!("text after closing quote (line {line})"),
                ));
            }
            v.to_string()
        } else {
            rest.split('#').next().unwrap_or("").trim().to_string()
        };
        if out.iter().any(|(seen, _)| seen == k) {
            return Err(config_err(k, format!("repeated key (line {line})")));
        }
        out.push((k.to_string(), value));
    }
    Ok(out)
}

impl Settings {
    /// Layers `file` then `cli` over the defaults. Empty values unset
    /// optional keys.
    pub fn resolve(file: &[(String, String)], cli: &[(String, String)]) -> Result<Self> {
        let mut map = BTreeMap::new();
        for spec in KEYS {
            if let Some(d) = spec.default {
                map.insert(
                    spec.key.to_string(),
                    Setting {
                        value: d.to_string(),
                        origin: Origin::Default,
                    },
                );
            }
        }
        for (layer, origin) in [(file, Origin::File), (cli, Origin::Cli)] {
            for (k, v) in layer {
                let spec = spec(k).ok_or_else(|| config_err(k.as_str(), "unknown key"))?;
                if v.is_empty() {
                    if spec.default.is_some() {
                        return Err(config_err(k.as_str(), "value required"));
                    }
                    map.remove(k);
                } else {
                    map.insert(
                        k.clone(),
                        Setting {
                            value: v.clone(),
                            origin,
                        },
                    );
                }
            }
        }
        Ok(Self(map))
    }

    pub fn get(&self, key: &str) -> Option<&Setting> {
        self.0.get(key)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Setting)> {
        self.0.iter().map(|(k, v)| (k.as_str(), v))
    }

    fn raw(&self, key: &str) -> Result<&str> {
        self.0
            .get(key)
            .map(|s| s.value.as_str())
            .ok_or_else(|| config_err(key, "not set"))
    }

    fn f64(&self, key: &str) -> Result<f64> {
        let raw = self.raw(key)?;
        let v: f64 = raw
            .parse()
            .map_err(|_| config_err(key, format!("`{raw}` is not a number")))?;
        if !v.is_finite() {
            return Err(config_err(key, format!("`{raw}` is not finite")));
        }
        Ok(v)
    }

    fn positive(&self, key: &str) -> Result<f64> {
        let v = self.f64(key)?;
        if v <= 0.0 {
            return Err(config_err(key, format!("must be > 0, got {v}")));
        }
        Ok(v)
    }

    fn opt_f64(&self, key: &str) -> Result<Option<f64>> {
        self.0.get(key).map(|_| self.f64(key)).transpose()
    }

    fn integer<T: std::str::FromStr>(&self, key: &str) -> Result<T> {
        let raw = self.raw(key)?;
        raw.parse()
            .map_err(|_| config_err(key, format!("`{raw}` is not a non-negative integer")))
    }

    fn bool(&self, key: &str) -> Result<bool> {
        match self.raw(key)? {
            "true" => Ok(true),
            "false" => Ok(false),
            other => Err(config_err(
                key,
                format!("expected true or false, got `{other}`"),
            )),
        }
    }

    fn path(&self, key: &str) -> Option<PathBuf> {
        self.0.get(key).map(|s| PathBuf::from(&s.value))
    }
}

/// Where the fill permittivity of generated spectra comes from.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MaterialSource {
    Constant(ComplexPermittivity),
    Profile(PathBuf),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    pub start_hz: f64,
    pub stop_hz: f64,
    pub step_hz: f64,
}

impl GridSpec {
    pub fn grid(&self) -> Result<FrequencyGrid> {
        FrequencyGrid::stepped(self.start_hz, self.stop_hz, self.step_hz)
    }
}

/// Typed, validated configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub geometry: CoaxGeometry,
    pub source_power_dbm: f64,
    pub circuit: CircuitConfig,
    pub grid: GridSpec,
    pub material: MaterialSource,
    pub noise: NoiseSpec,
    pub plan: SweepPlan,
    pub center_hz: Option<f64>,
    pub solver: SolverConfig,
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_settings(s: &Settings) -> Result<Self> {
        let a = s.positive("fixture.inner_radius_m")?;
        let b = s.positive("fixture.outer_radius_m")?;
        let d = s.positive("fixture.length_m")?;
        if b <= a {
            return Err(config_err(
                "fixture.outer_radius_m",
                format!("must exceed fixture.inner_radius_m ({a}), got {b}"),
            ));
        }
        let geometry =
            CoaxGeometry::new(a, b, d).map_err(|e| config_err("fixture", e.to_string()))?;

        let source_power_dbm = s.f64("circuit.source_power_dbm")?;
        let rs = s.positive("circuit.source_resistance_ohm")?;
        let rl = s.positive("circuit.load_resistance_ohm")?;
        let circuit = CircuitConfig::from_available_power_dbm(source_power_dbm, rs, rl)
            .map_err(|e| config_err("circuit.source_power_dbm", e.to_string()))?;

        let grid = GridSpec {
            start_hz: s.positive("grid.start_hz")?,
            stop_hz: s.positive("grid.stop_hz")?,
            step_hz: s.positive("grid.step_hz")?,
        };
        if grid.stop_hz < grid.start_hz {
            return Err(config_err(
                "grid.stop_hz",
                format!("must not be below grid.start_hz ({})", grid.start_hz),
            ));
        }
        grid.grid().map_err(|e| config_err("grid", e.to_string()))?;

        let eps_real = s.f64("material.eps_real")?;
        let eps_imag = s.f64("material.eps_imag")?;
        let eps = ComplexPermittivity::new(eps_real, eps_imag).map_err(|e| {
            let k = if eps_real < 1.0 {
                "material.eps_real"
            } else {
                "material.eps_imag"
            };
            config_err(k, e.to_string())
        })?;
        let material = match s.path("material.profile") {
            Some(p) => MaterialSource::Profile(p),
            None => MaterialSource::Constant(eps),
        };

        let sigma = s.f64("noise.sigma_db")?;
        let noise = NoiseSpec::new(sigma, s.integer("noise.seed")?)
            .map_err(|e| config_err("noise.sigma_db", e.to_string()))?;

        let plan = SweepPlan {
            band_start: s.positive("sweep.band_start_hz")?,
            band_end: s.positive("sweep.band_end_hz")?,
            window_bandwidth: s.positive("sweep.window_bandwidth_hz")?,
            window_shift: s.positive("sweep.window_shift_hz")?,
            n_samples: s.integer("sweep.n_samples")?,
        };
        if plan.n_samples < 3 {
            return Err(config_err(
                "sweep.n_samples",
                format!("must be >= 3, got {}", plan.n_samples),
            ));
        }
        if plan.band_end - plan.band_start < plan.window_bandwidth * (1.0 - 1e-12) {
            return Err(config_err(
                "sweep.window_bandwidth_hz",
                format!(
                    "{} Hz does not fit in the band [{}, {}] Hz",
                    plan.window_bandwidth, plan.band_start, plan.band_end
                ),
            ));
        }
        plan.validate()
            .map_err(|e| config_err("sweep", e.to_string()))?;
        let center_hz = s.opt_f64("sweep.center_hz")?;
        if let Some(c) = center_hz {
            if c - plan.window_bandwidth / 2.0 <= 0.0 {
                return Err(config_err(
                    "sweep.center_hz",
                    format!("window centred at {c} Hz reaches non-positive frequencies"),
                ));
            }
        }

        let residual = match s.raw("solver.residual")? {
            "watts" => ResidualMode::Watts,
            "db" => ResidualMode::Decibels,
            other => {
                return Err(config_err(
                    "solver.residual",
                    format!("expected watts or db, got `{other}`"),
                ))
            }
        };
        let lookup = match s.raw("solver.lookup")? {
            "exact" => Lookup::Exact,
            "linear" => Lookup::Linear,
            other => {
                return Err(config_err(
                    "solver.lookup",
                    format!("expected exact or linear, got `{other}`"),
                ))
            }
        };
        let solver = SolverConfig {
            eps_real_bounds: Bounds::new(
                s.f64("solver.eps_real_min")?,
                s.f64("solver.eps_real_max")?,
            ),
            eps_imag_bounds: Bounds::new(
                s.f64("solver.eps_imag_min")?,
                s.f64("solver.eps_imag_max")?,
            ),
            grid_resolution: s.integer("solver.grid_resolution")?,
            param_tolerance: s.positive("solver.param_tolerance")?,
            objective_tolerance: s.positive("solver.objective_tolerance")?,
            max_iterations: s.integer("solver.max_iterations")?,
            multistart_count: s.integer("solver.multistart_count")?,
            objective: ObjectiveOptions { residual, lookup },
            parallel: s.bool("solver.parallel")?,
        };
        let re = solver.eps_real_bounds;
        let im = solver.eps_imag_bounds;
        if re.min < 1.0 {
            return Err(config_err(
                "solver.eps_real_min",
                format!("must be >= 1, got {}", re.min),
            ));
        }
        if re.max <= re.min {
            return Err(config_err(
                "solver.eps_real_max",
                format!("must exceed solver.eps_real_min ({})", re.min),
            ));
        }
        if im.min < 0.0 {
            return Err(config_err(
                "solver.eps_imag_min",
                format!("must be >= 0, got {}", im.min),
            ));
        }
        if im.max <= im.min {
            return Err(config_err(
                "solver.eps_imag_max",
                format!("must exceed solver.eps_imag_min ({})", im.min),
            ));
        }
        if solver.grid_resolution < 2 {
            return Err(config_err(
                "solver.grid_resolution",
                format!("must be >= 2, got {}", solver.grid_resolution),
            ));
        }
        if solver.max_iterations < 1 {
            return Err(config_err("solver.max_iterations", "must be >= 1"));
        }
        if solver.multistart_count < 1 {
            return Err(config_err("solver.multistart_count", "must be >= 1"));
        }
        solver
            .validate()
            .map_err(|e| config_err("solver", e.to_string()))?;

        Ok(Self {
            geometry,
            source_power_dbm,
            circuit,
            grid,
            material,
            noise,
            plan,
            center_hz,
            solver,
            input: s.path("io.input"),
            output: s.path("io.output"),
        })
    }
}
