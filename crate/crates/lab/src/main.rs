use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gmres_forge_lab::experiments::{run_experiment, CurveKind, ExperimentConfig};
use gmres_forge_lab::forge_cli::{check_bundle, report_table, run_forge, write_outputs, ForgeKind};
use gmres_forge_lab::mtx::read_matrix_market;
use gmres_forge_lab::precond::{build_preconditioner, precond_study, PreconditionerKind};
use gmres_forge_lab::{LabError, Result};

#[derive(Parser)]
#[command(name = "gmres-forge", version, about = "Prescribed GMRES convergence: experiments and constructions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one of the weighted GMRES experiments (1 to 5).
    Experiment {
        #[arg(value_parser = clap::value_parser!(u8).range(1..=5))]
        id: u8,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long, value_enum)]
        curve: Option<CurveKind>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Compare left and right preconditioning on a Matrix Market matrix.
    PrecondStudy {
        matrix: PathBuf,
        #[arg(long, value_enum, default_value = "sym-part")]
        precond: PreconditionerKind,
        /// Preconditioner matrix for `--precond supplied`.
        #[arg(long)]
        preconditioner: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Build a system from a JSON prescription.
    Forge {
        #[arg(value_enum)]
        kind: ForgeKind,
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Re-run the solvers on a saved bundle and compare with its prescription.
    Check { bundle: PathBuf },
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(value)?)?;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Experiment { id, n, k, seed, samples, curve, out } => {
            let mut cfg = ExperimentConfig::new(id);
            cfg.seed = seed;
            if let Some(n) = n {
                cfg.n = n;
            }
            if let Some(k) = k {
                cfg.k = k;
            }
            if let Some(s) = samples {
                cfg.samples = s;
            }
            if let Some(c) = curve {
                cfg.curve = c;
            }
            let output = run_experiment(&cfg)?;
            std::fs::create_dir_all(&out)?;
            output.table.save(&out.join("curves.csv"))?;
            write_json(&out.join("report.json"), &output.report)?;
        }
        Command::PrecondStudy { matrix, precond, preconditioner, seed, out } => {
            let a = read_matrix_market(&matrix)?;
            let supplied = preconditioner.as_deref().map(read_matrix_market).transpose()?;
            let h = build_preconditioner(&a, precond, supplied.as_ref())?;
            let study = precond_study(&a, &h, precond, seed)?;
            std::fs::create_dir_all(&out)?;
            study.table.save(&out.join("curves.csv"))?;
            write_json(&out.join("report.json"), &study.report)?;
        }
        Command::Forge { kind, spec, out } => {
            let text = std::fs::read_to_string(&spec)?;
            let base = spec.parent().unwrap_or(Path::new("."));
            let output = run_forge(kind, &text, base)?;
            write_outputs(&output, &out)?;
            if !output.report.passed {
                return Err(LabError::VerificationFailed("fresh run does not match the prescription".into()));
            }
        }
        Command::Check { bundle } => {
            let report = check_bundle(&bundle)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
            let table = report_table(&report);
            table.write_csv(std::io::stderr().lock())?;
            if !report.passed {
                return Err(LabError::VerificationFailed("fresh run does not match the prescription".into()));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match &e {
                LabError::Core(inner) => eprintln!("error: {e} [{inner:?}]"),
                _ => eprintln!("error: {e}"),
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
