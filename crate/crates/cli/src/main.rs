use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cframe::report::Record;
use cframe_cli::error::{CliError, EXIT_OK, EXIT_PARSE, EXIT_VERDICT};
use cframe_cli::runner::{all_pass, run_scenario, RunOptions};
use cframe_cli::scenario::Scenario;
use cframe_cli::sweep::{sweep, write_table};

#[derive(Debug, Parser)]
#[command(name = "cframe", version, about = "Certify continuous frames, K-frames and weak A-frames")]
struct Cli {
    /// Seed override for randomized scenarios.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Relative floor for certified lower bounds.
    #[arg(long, global = true)]
    rtol: Option<f64>,
    /// JSON-lines report destination (default: stdout).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a scenario file.
    Run { config: PathBuf },
    /// Run a scenario once per value of one parameter.
    Sweep {
        config: PathBuf,
        /// Parameter name; defaults to the scenario's `[sweep]` section.
        #[arg(long)]
        param: Option<String>,
        /// Comma-separated values.
        #[arg(long, allow_hyphen_values = true)]
        values: Option<String>,
        /// CSV table destination (default: stdout).
        #[arg(long)]
        table: Option<PathBuf>,
    },
    /// Write example fixtures and a scenario into a directory.
    Gen {
        example: String,
        /// Parameter override `name=value`, repeatable.
        #[arg(long = "param", value_name = "NAME=VALUE")]
        params: Vec<String>,
        /// Window, multiplier or ladder name.
        #[arg(long)]
        choice: Option<String>,
        #[arg(short = 'o', long = "output-dir")]
        dir: PathBuf,
    },
}

fn config_error(message: String) -> CliError {
    CliError::Config {
        path: PathBuf::from("<command line>"),
        message,
    }
}

fn parse_values(text: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().map_err(|_| config_error(format!("invalid value `{t}`"))))
        .collect()
}

fn parse_params(items: &[String]) -> Result<BTreeMap<String, f64>, CliError> {
    items
        .iter()
        .map(|kv| {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| config_error(format!("expected NAME=VALUE, got `{kv}`")))?;
            let v = v
                .parse::<f64>()
                .map_err(|_| config_error(format!("invalid value in `{kv}`")))?;
            Ok((k.to_string(), v))
        })
        .collect()
}

fn write_records(out: Option<&Path>, records: &[Record]) -> Result<(), CliError> {
    let mut sink: Box<dyn Write> = match out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    };
    for r in records {
        r.write_to(&mut sink)?;
    }
    sink.flush()?;
    Ok(())
}

fn execute(cli: &Cli) -> Result<i32, CliError> {
    let opts = RunOptions {
        seed: cli.seed,
        rtol: cli.rtol,
    };
    match &cli.command {
        Command::Run { config } => {
            let scn = Scenario::load(config)?;
            let records = run_scenario(&scn, &opts)?;
            write_records(cli.out.as_deref(), &records)?;
            Ok(if all_pass(&records) { EXIT_OK } else { EXIT_VERDICT })
        }
        Command::Sweep {
            config,
            param,
            values,
            table,
        } => {
            let scn = Scenario::load(config)?;
            let (param, values) = match (param, values) {
                (Some(p), Some(v)) => (p.clone(), parse_values(v)?),
                (p, v) => {
                    let s = scn.sweep.as_ref().ok_or_else(|| {
                        config_error("sweep needs --param and --values or a [sweep] section".into())
                    })?;
                    let vals = match v {
                        Some(v) => parse_values(v)?,
                        None => s.values.clone(),
                    };
                    (p.clone().unwrap_or_else(|| s.parameter.clone()), vals)
                }
            };
            let (records, rows) = sweep(&scn, &param, &values, &opts)?;
            match table {
                Some(path) => {
                    write_table(File::create(path)?, &rows)?;
                    write_records(cli.out.as_deref(), &records)?;
                }
                None => {
                    if let Some(out) = &cli.out {
                        write_records(Some(out), &records)?;
                    }
                    write_table(io::stdout().lock(), &rows)?;
                }
            }
            Ok(if rows.iter().all(|r| r.verdict) { EXIT_OK } else { EXIT_VERDICT })
        }
        Command::Gen {
            example,
            params,
            choice,
            dir,
        } => {
            let written = cframe_cli::generate::gen(example, &parse_params(params)?, choice.clone(), dir)?;
            for p in written {
                println!("{}", p.display());
            }
            Ok(EXIT_OK)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            let code = if e.use_stderr() { EXIT_PARSE } else { EXIT_OK };
            return ExitCode::from(code as u8);
        }
    };
    match execute(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
