//! CSV formats and atomic file output.
//!
//! Spectrum files carry the header `frequency_hz,power_dbm`; results files
//! carry [`RESULTS_HEADER`]; tabulated material profiles carry
//! `frequency_hz,eps_real,eps_imag`. Lines starting with `#` are comments,
//! blank lines are ignored, and the first remaining line must be the
//! header. Numbers are written with the shortest representation that
//! parses back to the same `f64`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::{
    dbm_to_watts, watts_to_dbm, ComplexPermittivity, Error, MaterialProfile, PowerSpectrum,
    Provenance, ReconstructionResult, Result,
};

pub const SPECTRUM_HEADER: &str = "frequency_hz,power_dbm";
pub const PROFILE_HEADER: &str = "frequency_hz,eps_real,eps_imag";
pub const RESULTS_HEADER: &str =
    "center_frequency_hz,eps_real,eps_imag,final_objective,iterations,converged,multistart_spread";

/// Shortest round-trip decimal form; exponent notation outside
/// `[1e-4, 1e15)`.
pub fn format_f64(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-4..1e15).contains(&a) || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// Data rows of a CSV text as `(line number, fields)`, after checking the
/// header.
fn data_rows(text: &str, header: &str) -> Result<Vec<(usize, Vec<String>)>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut records = reader.records().map(|r| {
        let record = r.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        Ok::<_, Error>((line, record.iter().map(str::to_string).collect::<Vec<_>>()))
    });
    let (line, found) = records.next().transpose()?.ok_or(Error::Parse {
        line: 0,
        message: format!("missing header `{header}`"),
    })?;
    if found.join(",") != header {
        return Err(Error::Parse {
            line,
            message: format!("expected header `{header}`, found `{}`", found.join(",")),
        });
    }
    let width = header.split(',').count();
    records
        .map(|r| {
            let (line, fields) = r?;
            if fields.len() != width {
                return Err(Error::Parse {
                    line,
                    message: format!("expected {width} fields, found {}", fields.len()),
                });
            }
            Ok((line, fields))
        })
        .collect()
}

fn number(line: usize, column: &str, field: &str) -> Result<f64> {
    let v: f64 = field.parse().map_err(|_| Error::Parse {
        line,
        message: format!("{column}: `{field}` is not a number"),
    })?;
    if !v.is_finite() {
        return Err(Error::Parse {
            line,
            message: format!("{column}: `{field}` is not finite"),
        });
    }
    Ok(v)
}

/// Parses a spectrum CSV; powers are converted from dBm to watts.
pub fn parse_spectrum(text: &str, provenance: Provenance) -> Result<PowerSpectrum> {
    let rows = data_rows(text, SPECTRUM_HEADER)?;
    if rows.is_empty() {
        return Err(Error::InvalidSpectrum("no samples".into()));
    }
    let mut freqs = Vec::with_capacity(rows.len());
    let mut powers = Vec::with_capacity(rows.len());
    for (line, fields) in &rows {
        let f = number(*line, "frequency_hz", &fields[0])?;
        let dbm = number(*line, "power_dbm", &fields[1])?;
        if f <= 0.0 {
            return Err(Error::InvalidSpectrum(format!(
                "line {line}: frequency must be > 0, got {f}"
            )));
        }
        if let Some(&prev) = freqs.last() {
            if f <= prev {
                return Err(Error::InvalidSpectrum(format!(
                    "line {line}: frequency {f} Hz is not above the previous row ({prev} Hz)"
                )));
            }
        }
        let watts = dbm_to_watts(dbm);
        if !(watts > 0.0 && watts.is_finite()) {
            return Err(Error::InvalidSpectrum(format!(
                "line {line}: power {dbm} dBm is outside the representable range"
            )));
        }
        freqs.push(f);
        powers.push(watts);
    }
    PowerSpectrum::new(freqs, powers, provenance)
}

/// Reads a spectrum file as [`Provenance::Measured`].
pub fn read_spectrum(path: &Path) -> Result<PowerSpectrum> {
    let text = read_text(path)?;
    parse_spectrum(&text, Provenance::Measured)
}

/// Spectrum CSV text. Provenance and noise metadata go into leading
/// comment lines.
pub fn format_spectrum(spectrum: &PowerSpectrum) -> String {
    let mut out = String::new();
    let provenance = match spectrum.provenance() {
        Provenance::Measured => "measured",
        Provenance::Synthetic => "synthetic",
    };
    out.push_str(&format!("# provenance: {provenance}\n"));
    if let Some(n) = spectrum.noise() {
        out.push_str(&format!(
            "# noise: sigma_db={} seed={} algorithm={}\n",
            format_f64(n.sigma_db),
            n.seed,
            n.algorithm
        ));
    }
    out.push_str(SPECTRUM_HEADER);
    out.push('\n');
    for (f, p) in spectrum.iter() {
        out.push_str(&format!(
            "{},{}\n",
            format_f64(f),
            format_f64(watts_to_dbm(p))
        ));
    }
    out
}

/// Parses a tabulated profile CSV.
pub fn parse_profile(text: &str) -> Result<MaterialProfile> {
    let rows = data_rows(text, PROFILE_HEADER)?;
    let nodes = rows
        .iter()
        .map(|(line, fields)| {
            let f = number(*line, "frequency_hz", &fields[0])?;
            let re = number(*line, "eps_real", &fields[1])?;
            let im = number(*line, "eps_imag", &fields[2])?;
            let eps = ComplexPermittivity::new(re, im).map_err(|e| Error::Parse {
                line: *line,
                message: e.to_string(),
            })?;
            Ok((f, eps))
        })
        .collect::<Result<Vec<_>>>()?;
    MaterialProfile::tabulated(nodes)
}

pub fn read_profile(path: &Path) -> Result<MaterialProfile> {
    parse_profile(&read_text(path)?)
}

pub fn format_profile(nodes: &[(f64, ComplexPermittivity)]) -> String {
    let mut out = format!("{PROFILE_HEADER}\n");
    for (f, eps) in nodes {
        out.push_str(&format!(
            "{},{},{}\n",
            format_f64(*f),
            format_f64(eps.eps_real()),
            format_f64(eps.eps_imag())
        ));
    }
    out
}

pub fn format_results(results: &[ReconstructionResult]) -> String {
    let mut out = format!("{RESULTS_HEADER}\n");
    for r in results {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            format_f64(r.center_frequency),
            format_f64(r.eps.eps_real()),
            format_f64(r.eps.eps_imag()),
            format_f64(r.final_objective),
            r.iterations,
            r.converged,
            format_f64(r.multistart_spread)
        ));
    }
    out
}

/// One parsed results row.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub center_frequency: f64,
    pub eps_real: f64,
    pub eps_imag: f64,
    pub final_objective: f64,
    pub iterations: usize,
    pub converged: bool,
    pub multistart_spread: f64,
}

pub fn parse_results(text: &str) -> Result<Vec<ResultRow>> {
    data_rows(text, RESULTS_HEADER)?
        .iter()
        .map(|(line, f)| {
            let bad = |column: &str, field: &str| Error::Parse {
                line: *line,
                message: format!("{column}: cannot parse `{field}`"),
            };
            Ok(ResultRow {
                center_frequency: number(*line, "center_frequency_hz", &f[0])?,
                eps_real: number(*line, "eps_real", &f[1])?,
                eps_imag: number(*line, "eps_imag", &f[2])?,
                final_objective: number(*line, "final_objective", &f[3])?,
                iterations: f[4].parse().map_err(|_| bad("iterations", &f[4]))?,
                converged: f[5].parse().map_err(|_| bad("converged", &f[5]))?,
                multistart_spread: number(*line, "multistart_spread", &f[6])?,
            })
        })
        .collect()
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io(format!("cannot read {}: {e}", path.display())))
}

/// Writes `contents` to a temporary sibling of `path`, then renames it
/// into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let name = path
        .file_name()
        .ok_or_else(|| Error::Io(format!("{} is not a file path", path.display())))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(name);
    tmp_name.push(format!(".tmp-{}", std::process::id()));
    let tmp: PathBuf = path.with_file_name(tmp_name);
    let context = |e: std::io::Error| Error::Io(format!("cannot write {}: {e}", path.display()));
    let result = (|| {
        let mut file = fs::File::create(&tmp)?;
        file.write_all(contents)?;
        file.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result.map_err(context)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_formatting_round_trips() {
        for x in [
            0.0,
            1.0,
            2.02,
            97.5e6,
            1e-30,
            4.2e-12,
            -3.5,
            1e15,
            0.1 + 0.2,
            f64::MIN_POSITIVE,
        ] {
            let s = format_f64(x);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{s}");
        }
        assert_eq!(format_f64(97.5e6), "97500000");
        assert_eq!(format_f64(1e-30), "1e-30");
    }

    #[test]
    fn spectrum_round_trip_is_exact() {
        let freqs = vec![5e7, 5.5e7, 6e7];
        let powers = vec![1.234e-3, 9.87654321e-4, 4.999999e-3];
        let s = PowerSpectrum::new(freqs, powers, Provenance::Synthetic).unwrap();
        let text = format_spectrum(&s);
        assert!(text.contains("frequency_hz,power_dbm\n"));
        let back = parse_spectrum(&text, Provenance::Synthetic).unwrap();
        assert_eq!(back.frequencies(), s.frequencies());
        for (a, b) in back.powers().iter().zip(s.powers()) {
            assert!(((a - b) / b).abs() < 1e-15);
        }
        assert_eq!(format_spectrum(&back), text);
    }

    #[test]
    fn comments_and_header() {
        let text = "# a comment\n\nfrequency_hz,power_dbm\n# inline\n1e8,-3\n2e8 , 0\n";
        let s = parse_spectrum(text, Provenance::Measured).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.powers()[1], 1e-3);
        let bad = parse_spectrum("freq,p\n1,2\n", Provenance::Measured).unwrap_err();
        assert_eq!(
            bad,
            Error::Parse {
                line: 1,
                message: "expected header `frequency_hz,power_dbm`, found `freq,p`".into()
            }
        );
    }

    #[test]
    fn errors_carry_line_numbers() {
        let err = parse_spectrum(
            "frequency_hz,power_dbm\n1e8,0\n2e8,x\n",
            Provenance::Measured,
        );
        assert!(matches!(err, Err(Error::Parse { line: 3, .. })), "{err:?}");
        let err = parse_spectrum(
            "frequency_hz,power_dbm\n1e8,0\n1e8,1\n",
            Provenance::Measured,
        );
        assert!(
            matches!(&err, Err(Error::InvalidSpectrum(m)) if m.starts_with("line 3")),
            "{err:?}"
        );
        let err = parse_spectrum("frequency_hz,power_dbm\n1e8\n", Provenance::Measured);
        assert!(matches!(err, Err(Error::Parse { line: 2, .. })));
        let err = parse_spectrum("frequency_hz,power_dbm\n", Provenance::Measured);
        assert_eq!(err, Err(Error::InvalidSpectrum("no samples".into())));
        assert!(matches!(
            parse_spectrum("", Provenance::Measured),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn profile_parsing() {
        let p =
            parse_profile("frequency_hz,eps_real,eps_imag\n1e8,2,0.01\n2e8,2.1,0.02\n").unwrap();
        let mid = p.at(1.5e8).unwrap();
        assert!((mid.eps_real() - 2.05).abs() < 1e-12);
        assert!(parse_profile("frequency_hz,eps_real,eps_imag\n1e8,0.5,0\n").is_err());
        let nodes = vec![(1e8, ComplexPermittivity::new(2.0, 0.01).unwrap())];
        assert_eq!(
            parse_profile(&format_profile(&nodes)).unwrap(),
            MaterialProfile::Tabulated(nodes)
        );
    }

    #[test]
    fn atomic_write_replaces_contents() {
        let dir = std::env::temp_dir().join(format!("powerperm-io-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("out.csv");
        write_atomic(&path, b"one\n").unwrap();
        write_atomic(&path, b"two\n").unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap(), "two\n");
        let leftovers = fs::read_dir(&dir).unwrap().count();
        assert_eq!(leftovers, 1);
        fs::remove_dir_all(&dir).unwrap();
        assert!(write_atomic(&dir.join("missing").join("x"), b"").is_err());
    }
}
