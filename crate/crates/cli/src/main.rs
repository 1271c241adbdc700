use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use specgeo_cli::{cmd_scan, cmd_tensor, cmd_verify, verify_exit_code, CliError, FormName, TensorName};

/// Builds special complex, symplectic and Kähler structures from holomorphic
/// data and checks their identities numerically.
///
/// Spec files are TOML. Keys: n, kind ("prepotential" | "one_form"),
/// components, sample_points ([re, im] pairs), fd_step, tol, conic,
/// theta_samples (in degrees), lambda_samples, fibers, expected_fail,
/// expected_skip, tolerances, seed.
#[derive(Debug, Parser)]
#[command(name = "specgeo", version)]
struct Cli {
    /// Worker threads (0 = one per core).
    #[arg(long, global = true, env = "SPECGEO_THREADS", default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run every check and print the JSON report. Exit 0 when all checks
    /// pass (or fail as expected), 1 on a failure, 2 on spec or IO errors.
    Verify {
        spec: PathBuf,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the seed used for random covectors and fibers.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Print one tensor at a sample point.
    Tensor {
        spec: PathBuf,
        #[arg(long, default_value_t = 0)]
        point: usize,
        #[arg(long, value_enum)]
        what: TensorName,
        /// 2-form used for J2.
        #[arg(long, value_enum, default_value = "omega11")]
        form: FormName,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tabulate det Im dF, det g, the signature of g and |d∇J| over a grid
    /// as CSV. Rows outside the regular domain carry a flag and no values.
    Scan {
        spec: PathBuf,
        /// Sample point whose coordinates are not scanned.
        #[arg(long, default_value_t = 0)]
        point: usize,
        /// Grid axis such as `z2.im=0.1:2:20`; give one or two.
        #[arg(long = "axis", required = true)]
        axes: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn emit(text: &str, out: Option<&PathBuf>) -> anyhow::Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<i32> {
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global().context("thread pool")?;
    }
    match cli.command {
        Command::Verify { spec, out, seed } => {
            let report = cmd_verify(&spec, seed)?;
            emit(&report.to_json(), out.as_ref())?;
            let s = &report.summary;
            eprintln!(
                "{}: {} passed, {} failed, {} expected failures, {} skipped",
                spec.display(),
                s.passed,
                s.failed,
                s.expected_failures,
                s.skipped
            );
            Ok(verify_exit_code(&report))
        }
        Command::Tensor { spec, point, what, form, out } => {
            emit(&cmd_tensor(&spec, point, what, form)?, out.as_ref())?;
            Ok(0)
        }
        Command::Scan { spec, point, axes, out } => {
            emit(&cmd_scan(&spec, point, &axes)?, out.as_ref())?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = e.downcast_ref::<CliError>().map_or(2, CliError::exit_code);
            ExitCode::from(code as u8)
        }
    }
}
