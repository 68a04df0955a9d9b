//! Command workflows shared by the command-line tool: configuration
//! loading, the four subcommands, and the mapping from failures to exit
//! codes.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::{parse_file, MaterialSource, RunConfig, Settings};
use crate::io::{format_results, format_spectrum, read_profile, read_spectrum, write_atomic};
use crate::solver::WINDOW_ALIGNMENT;
use crate::{
    add_noise, generate_spectrum, plan_window, reconstruct_window, sweep, Error, MaterialProfile,
    PowerSpectrum, ReconstructionResult,
};

pub const TOOL_NAME: &str = "powerperm";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// A failed run, classified by exit code.
#[derive(Debug, Clone, PartialEq)]
pub enum Failure {
    /// Bad or missing configuration; exit code 2.
    Config(Error),
    /// Numerical or output failure; exit code 3.
    Compute(Error),
    /// Unreadable input, or input that does not cover the requested plan;
    /// exit code 4.
    Data(Error),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Config(_) => 2,
            Failure::Compute(_) => 3,
            Failure::Data(_) => 4,
        }
    }

    pub fn error(&self) -> &Error {
        match self {
            Failure::Config(e) | Failure::Compute(e) | Failure::Data(e) => e,
        }
    }

    /// Errors raised while solving: data/plan mismatches are data
    /// failures, everything else is a compute failure.
    fn from_solve(e: Error) -> Self {
        match e {
            Error::PlanExceedsSpectrum { .. }
            | Error::EmptySweep(_)
            | Error::FrequencyOutOfRange { .. }
            | Error::FrequencyNotOnGrid { .. }
            | Error::InvalidSpectrum(_)
            | Error::Parse { .. } => Failure::Data(e),
            other => Failure::Compute(other),
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self {
            Failure::Config(_) => "configuration error",
            Failure::Compute(_) => "computation error",
            Failure::Data(_) => "data error",
        };
        write!(f, "{kind}: {}", self.error())
    }
}

impl std::error::Error for Failure {}

pub type RunResult<T> = std::result::Result<T, Failure>;

/// Resolved configuration together with the raw layered values.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub config_file: Option<PathBuf>,
    pub settings: Settings,
    pub config: RunConfig,
}

/// Reads the optional config file and layers `cli` pairs over it.
pub fn load(config_file: Option<&Path>, cli: &[(String, String)]) -> RunResult<Loaded> {
    let file = match config_file {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| {
                Failure::Config(Error::Io(format!(
                    "cannot read config {}: {e}",
                    p.display()
                )))
            })?;
            parse_file(&text).map_err(Failure::Config)?
        }
        None => Vec::new(),
    };
    let settings = Settings::resolve(&file, cli).map_err(Failure::Config)?;
    let config = RunConfig::from_settings(&settings).map_err(Failure::Config)?;
    Ok(Loaded {
        config_file: config_file.map(Path::to_path_buf),
        settings,
        config,
    })
}

/// Text produced by a command, and where it went.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub text: String,
    /// `None` when the text is meant for standard output.
    pub written: Option<PathBuf>,
    pub sidecar: Option<PathBuf>,
    pub warnings: Vec<String>,
}

fn emit(text: String, output: Option<&Path>) -> RunResult<Outcome> {
    if let Some(path) = output {
        write_atomic(path, text.as_bytes()).map_err(Failure::Compute)?;
    }
    Ok(Outcome {
        text,
        written: output.map(Path::to_path_buf),
        sidecar: None,
        warnings: Vec::new(),
    })
}

fn material(config: &RunConfig) -> RunResult<MaterialProfile> {
    match &config.material {
        MaterialSource::Constant(eps) => Ok(MaterialProfile::Constant(*eps)),
        MaterialSource::Profile(path) => read_profile(path).map_err(Failure::Data),
    }
}

fn model_spectrum(config: &RunConfig) -> RunResult<PowerSpectrum> {
    let grid = config.grid.grid().map_err(Failure::Config)?;
    generate_spectrum(&material(config)?, &grid, &config.geometry, &config.circuit)
        .map_err(Failure::from_solve)
}

/// Noiseless model spectrum on the configured grid.
pub fn run_forward(loaded: &Loaded) -> RunResult<Outcome> {
    let spectrum = model_spectrum(&loaded.config)?;
    emit(format_spectrum(&spectrum), loaded.config.output.as_deref())
}

/// Model spectrum with seeded log-normal noise.
pub fn run_synth(loaded: &Loaded) -> RunResult<Outcome> {
    let spectrum = add_noise(&model_spectrum(&loaded.config)?, &loaded.config.noise);
    emit(format_spectrum(&spectrum), loaded.config.output.as_deref())
}

#[derive(Serialize)]
struct InputSummary<'a> {
    path: &'a Path,
    samples: usize,
    span_hz: (f64, f64),
}

#[derive(Serialize)]
struct Sidecar<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    window_alignment: &'static str,
    config_file: Option<&'a Path>,
    settings: &'a Settings,
    resolved: &'a RunConfig,
    input: InputSummary<'a>,
    windows: usize,
    non_converged_centers_hz: Vec<f64>,
}

/// Path of the metadata file written next to a results file.
pub fn sidecar_path(output: &Path) -> PathBuf {
    let candidate = output.with_extension("json");
    if candidate == output {
        let mut s = output.as_os_str().to_os_string();
        s.push(".meta.json");
        PathBuf::from(s)
    } else {
        candidate
    }
}

/// Reconstructs the configured sweep (or the single window at
/// `sweep.center_hz`) from the input spectrum.
pub fn run_reconstruct(loaded: &Loaded) -> RunResult<Outcome> {
    let config = &loaded.config;
    let input = config.input.as_deref().ok_or_else(|| {
        Failure::Config(Error::Config {
            key: "io.input".into(),
            message: "reconstruct needs an input spectrum".into(),
        })
    })?;
    let measured = read_spectrum(input).map_err(|e| match e {
        Error::Io(_) | Error::Parse { .. } | Error::InvalidSpectrum(_) => Failure::Data(e),
        other => Failure::from_solve(other),
    })?;
    let results = solve(config, &measured)?;

    let warnings: Vec<String> = results
        .iter()
        .filter(|r| !r.converged)
        .map(|r| {
            format!(
                "window at {} Hz did not converge ({} iterations, objective {:e})",
                r.center_frequency, r.iterations, r.final_objective
            )
        })
        .collect();
    let mut outcome = emit(format_results(&results), config.output.as_deref())?;
    outcome.warnings = warnings;

    if let Some(out) = config.output.as_deref() {
        let sidecar = Sidecar {
            tool: TOOL_NAME,
            version: TOOL_VERSION,
            command: "reconstruct",
            window_alignment: WINDOW_ALIGNMENT,
            config_file: loaded.config_file.as_deref(),
            settings: &loaded.settings,
            resolved: config,
            input: InputSummary {
                path: input,
                samples: measured.len(),
                span_hz: measured.span(),
            },
            windows: results.len(),
            non_converged_centers_hz: results
                .iter()
                .filter(|r| !r.converged)
                .map(|r| r.center_frequency)
                .collect(),
        };
        let mut json = serde_json::to_string_pretty(&sidecar)
            .map_err(|e| Failure::Compute(Error::Io(e.to_string())))?;
        json.push('\n');
        let path = sidecar_path(out);
        write_atomic(&path, json.as_bytes()).map_err(Failure::Compute)?;
        outcome.sidecar = Some(path);
    }
    Ok(outcome)
}

fn solve(config: &RunConfig, measured: &PowerSpectrum) -> RunResult<Vec<ReconstructionResult>> {
    match config.center_hz {
        Some(center) => {
            let window = plan_window(center, config.plan.window_bandwidth, config.plan.n_samples)
                .map_err(Failure::Config)?;
            reconstruct_window(
                &window,
                measured,
                &config.geometry,
                &config.circuit,
                &config.solver,
            )
            .map(|r| vec![r])
            .map_err(Failure::from_solve)
        }
        None => sweep(
            measured,
            &config.plan,
            &config.geometry,
            &config.circuit,
            &config.solver,
        )
        .map_err(Failure::from_solve),
    }
}

/// Table of the planned windows, without touching any spectrum.
pub fn sweep_info(loaded: &Loaded) -> RunResult<Outcome> {
    let plan = &loaded.config.plan;
    let windows = match loaded.config.center_hz {
        Some(c) => {
            vec![plan_window(c, plan.window_bandwidth, plan.n_samples).map_err(Failure::Config)?]
        }
        None => plan.windows().map_err(Failure::Config)?,
    };
    let mut text = format!(
        "# windows: {}\n# alignment: {WINDOW_ALIGNMENT}\nindex,center_frequency_hz,lower_edge_hz,upper_edge_hz,samples,spacing_hz\n",
        windows.len()
    );
    for (i, w) in windows.iter().enumerate() {
        text.push_str(&format!(
            "{i},{},{},{},{},{}\n",
            crate::io::format_f64(w.center_frequency()),
            crate::io::format_f64(w.lower_edge()),
            crate::io::format_f64(w.upper_edge()),
            w.samples().len(),
            crate::io::format_f64(w.spacing())
        ));
    }
    Ok(Outcome {
        text,
        written: None,
        sidecar: None,
        warnings: Vec::new(),
    })
}
