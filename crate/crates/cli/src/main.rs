use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Arg, ArgAction, ArgMatches, Command};
use powerperm::app::{self, Failure, Loaded, Outcome};
use powerperm::config::{flag_name, KEYS};

fn command() -> Command {
    let mut cmd = Command::new("powerperm")
        .version(app::TOOL_VERSION)
        .about("Complex permittivity from transmitted power through a coaxial fixture")
        .after_help(
            "Every setting can come from --config FILE (lines of `key = value`, e.g. \
             `fixture.outer_radius_m = 4.1e-3`) or from the matching flag \
             (--fixture-outer-radius-m). Flags override the file, which overrides defaults.\n\
             Exit codes: 0 ok, 2 configuration, 3 computation, 4 data/plan mismatch.",
        )
        .subcommand_required(true)
        .arg(
            Arg::new("config")
                .long("config")
                .short('c')
                .value_name("FILE")
                .value_parser(clap::value_parser!(PathBuf))
                .global(true)
                .help("flat key = value configuration file"),
        )
        .subcommand(Command::new("forward").about("Write the noiseless model spectrum"))
        .subcommand(
            Command::new("synth").about("Write a model spectrum with seeded log-normal noise"),
        )
        .subcommand(
            Command::new("reconstruct")
                .about("Reconstruct permittivity per window from a spectrum"),
        )
        .subcommand(Command::new("sweep-info").about("List the planned sampling windows"));
    for spec in KEYS {
        let flag: &'static str = Box::leak(flag_name(spec.key).into_boxed_str());
        let help = match spec.default {
            Some(d) => format!("{} [{}; default {d}]", spec.help, spec.key),
            None => format!("{} [{}]", spec.help, spec.key),
        };
        let mut arg = Arg::new(spec.key)
            .long(flag)
            .value_name("VALUE")
            .action(ArgAction::Set)
            .global(true)
            .help(help);
        match spec.key {
            "io.input" => arg = arg.short('i').visible_alias("input"),
            "io.output" => arg = arg.short('o').visible_alias("output"),
            _ => {}
        }
        cmd = cmd.arg(arg);
    }
    cmd
}

fn cli_pairs(m: &ArgMatches) -> Vec<(String, String)> {
    KEYS.iter()
        .filter_map(|spec| {
            m.get_one::<String>(spec.key)
                .map(|v| (spec.key.to_string(), v.clone()))
        })
        .collect()
}

fn run(sub: &str, m: &ArgMatches) -> Result<Outcome, Failure> {
    let loaded: Loaded = app::load(
        m.get_one::<PathBuf>("config").map(PathBuf::as_path),
        &cli_pairs(m),
    )?;
    match sub {
        "forward" => app::run_forward(&loaded),
        "synth" => app::run_synth(&loaded),
        "reconstruct" => app::run_reconstruct(&loaded),
        "sweep-info" => app::sweep_info(&loaded),
        other => unreachable!("unknown subcommand {other}"),
    }
}

fn main() -> ExitCode {
    let matches = match command().try_get_matches() {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let (sub, sub_matches) = matches.subcommand().expect("subcommand is required");
    match run(sub, sub_matches) {
        Ok(outcome) => {
            for w in &outcome.warnings {
                eprintln!("warning: {w}");
            }
            match &outcome.written {
                Some(path) => {
                    eprintln!("wrote {}", path.display());
                    if let Some(s) = &outcome.sidecar {
                        eprintln!("wrote {}", s.display());
                    }
                }
                None => {
                    let mut out = std::io::stdout().lock();
                    if out
                        .write_all(outcome.text.as_bytes())
                        .and_then(|_| out.flush())
                        .is_err()
                    {
                        return ExitCode::from(3);
                    }
                }
            }
            ExitCode::SUCCESS
        }
        Err(failure) => {
            eprintln!("error: {failure}");
            ExitCode::from(failure.exit_code() as u8)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn command_definition_is_consistent() {
        command().debug_assert();
    }

    #[test]
    fn flags_mirror_keys() {
        let m = command()
            .try_get_matches_from([
                "powerperm",
                "forward",
                "--fixture-outer-radius-m",
                "5e-3",
                "-o",
                "x.csv",
            ])
            .unwrap();
        let (_, sub) = m.subcommand().unwrap();
        let pairs = cli_pairs(sub);
        assert!(pairs.contains(&("fixture.outer_radius_m".into(), "5e-3".into())));
        assert!(pairs.contains(&("io.output".into(), "x.csv".into())));
    }
}
