//! Command-line driver: `run` a scenario, `verify` a report, or `profile`
//! isoperimetric ratios for a scenario's folner task.

use clap::{Parser, Subcommand};
use roelab_cli::{
    load_report, load_scenario, report_json, run_profile, run_scenario, summarize, verify_report,
    CliError,
};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "roelab",
    version,
    about = "Windowed amenability laboratory: Folner search, doubling certificates, operator diagnostics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write its report.
    Run {
        scenario: PathBuf,
        /// Output directory for report.json and CSV side files.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Override the scenario seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Re-verify every certificate and bound embedded in a report.
    Verify { report: PathBuf },
    /// Best Folner ratios per size target, written as CSV.
    Profile {
        scenario: PathBuf,
        /// Task kind to profile (only `folner` is supported).
        #[arg(long, default_value = "folner")]
        task: String,
        /// Comma-separated size targets.
        #[arg(long, value_delimiter = ',')]
        sizes: Vec<usize>,
        /// Output CSV path (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn write_file(path: &PathBuf, contents: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|source| CliError::Io {
            path: parent.display().to_string(),
            source,
        })?;
    }
    std::fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run {
            scenario,
            out,
            seed,
        } => {
            let mut scenario = load_scenario(&scenario)?;
            if let Some(seed) = seed {
                scenario.seed = seed;
            }
            let (report, failure) = run_scenario(&scenario)?;
            let report_path = out.join("report.json");
            write_file(&report_path, &report_json(&report))?;
            // Certificate side files: point lists for folner sets, pair lists
            // for doubling translations.
            for (i, result) in report.body.results.iter().enumerate() {
                match &result.output {
                    roelab_cli::TaskOutput::Folner { outcome } => {
                        if let Some(cert) = &outcome.certificate {
                            let csv: String = std::iter::once("x".to_string())
                                .chain(cert.f.iter().map(|x| x.to_string()))
                                .collect::<Vec<_>>()
                                .join("\n");
                            write_file(&out.join(format!("folner_{i}.csv")), &(csv + "\n"))?;
                        }
                    }
                    roelab_cli::TaskOutput::Tarski { report } => {
                        if let Some(roelab::translations::DoublingOutcome::Present(cert)) =
                            &report.doubling
                        {
                            for (suffix, pairs) in
                                [("tplus", &cert.t_plus), ("tminus", &cert.t_minus)]
                            {
                                let csv: String = std::iter::once("x,tx".to_string())
                                    .chain(pairs.iter().map(|(x, y)| format!("{x},{y}")))
                                    .collect::<Vec<_>>()
                                    .join("\n");
                                write_file(
                                    &out.join(format!("tarski_{i}_{suffix}.csv")),
                                    &(csv + "\n"),
                                )?;
                            }
                        }
                    }
                    _ => {}
                }
            }
            print!("{}", summarize(&report));
            println!("report: {}", report_path.display());
            match failure {
                Some(err) => Err(err),
                None => Ok(()),
            }
        }
        Command::Verify { report } => {
            let report = load_report(&report)?;
            verify_report(&report)?;
            println!(
                "verified: {} task(s), scenario {}",
                report.body.results.len(),
                &report.body.scenario_hash[..12]
            );
            Ok(())
        }
        Command::Profile {
            scenario,
            task,
            sizes,
            out,
        } => {
            if task != "folner" {
                return Err(CliError::Config(format!(
                    "unsupported profile task {task:?}; only `folner` is available"
                )));
            }
            if sizes.is_empty() {
                return Err(CliError::Config("no --sizes given".into()));
            }
            let scenario = load_scenario(&scenario)?;
            let profile = run_profile(&scenario, &sizes)?;
            let csv = profile.to_csv();
            match out {
                Some(path) => write_file(&path, &csv)?,
                None => print!("{csv}"),
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
