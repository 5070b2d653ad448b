//! Command-line driver: `compute`, `sweep` and `verify`.

pub mod commands;
pub mod config;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::Value;
use xibergman::verify::SuiteRegistry;

use commands::{CliError, Outcome};
use config::{ConfigError, Format, RunConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_FLAGGED: i32 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "xibergman",
    version,
    about = "p-Bergman kernels with respect to a functional"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate K_{ξ,p}(z), K^{H,p}(z) or the off-diagonal K_{ξ,p}(z, w).
    Compute(RunFlags),
    /// Sweep e^{(2n+pk)a} K_a over sublevel sets of the pluricomplex Green function.
    Sweep(RunFlags),
    /// Run verification suites.
    Verify(VerifyFlags),
}

#[derive(Args, Debug, Default)]
struct RunFlags {
    /// JSON file mirroring these flags; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// disk, bidisc, polydisc:n, ball:n, annulus:r or a JSON domain object.
    #[arg(long)]
    domain: Option<String>,
    /// Functional as `index:coeff` terms separated by `;`, e.g. "0:1; 1:0.5i".
    #[arg(long, allow_hyphen_values = true)]
    xi: Option<String>,
    /// Homogeneous polynomial, e.g. "z1^2: 1, z1 z2: 0.5".
    #[arg(long = "H", allow_hyphen_values = true)]
    h: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    p: Option<f64>,
    /// Comma-separated complex coordinates, e.g. "0.3,-0.2i".
    #[arg(long, allow_hyphen_values = true)]
    z: Option<String>,
    /// Base point of an off-diagonal kernel.
    #[arg(long, allow_hyphen_values = true)]
    w: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pole: Option<String>,
    #[arg(long)]
    degree: Option<u32>,
    #[arg(long)]
    radial_order: Option<usize>,
    #[arg(long)]
    angular_order: Option<usize>,
    #[arg(long)]
    max_nodes: Option<usize>,
    /// `start:stop:n` or a comma list of values a ≤ 0.
    #[arg(long, allow_hyphen_values = true)]
    a_grid: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; falls back to XIBERGMAN_THREADS.
    #[arg(long)]
    threads: Option<usize>,
    /// Solver name: exact-2, irls or multistart.
    #[arg(long)]
    method: Option<String>,
}

#[derive(Args, Debug, Default)]
struct VerifyFlags {
    #[arg(long)]
    config: Option<PathBuf>,
    /// algebra, quadrature, kernels, higher, green or all.
    #[arg(long)]
    suite: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Seconds after which remaining suites are skipped.
    #[arg(long)]
    budget: Option<f64>,
    #[arg(long)]
    threads: Option<usize>,
    /// Also write the JSON report here.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn string(v: Option<String>) -> Option<Value> {
    v.map(Value::String)
}

impl RunFlags {
    fn into_config(self) -> Result<RunConfig, ConfigError> {
        let base = match &self.config {
            Some(path) => RunConfig::from_file(path)?,
            None => RunConfig::default(),
        };
        let top = RunConfig {
            domain: string(self.domain),
            xi: string(self.xi),
            h: string(self.h),
            p: self.p,
            z: string(self.z),
            w: string(self.w),
            pole: string(self.pole),
            degree: self.degree,
            radial_order: self.radial_order,
            angular_order: self.angular_order,
            max_nodes: self.max_nodes,
            a_grid: string(self.a_grid),
            out: self.out,
            format: self.format,
            seed: self.seed,
            threads: self.threads,
            method: self.method,
            ..Default::default()
        };
        Ok(base.overlay(top))
    }
}

impl VerifyFlags {
    fn into_config(self) -> Result<RunConfig, ConfigError> {
        let base = match &self.config {
            Some(path) => RunConfig::from_file(path)?,
            None => RunConfig::default(),
        };
        let top = RunConfig {
            suite: self.suite,
            seed: self.seed,
            budget: self.budget,
            threads: self.threads,
            out: self.out,
            ..Default::default()
        };
        Ok(base.overlay(top))
    }
}

fn execute(command: Command, registry: &SuiteRegistry) -> Result<(RunConfig, Outcome), CliError> {
    let (cfg, run): (
        RunConfig,
        fn(&RunConfig, &SuiteRegistry) -> Result<Outcome, CliError>,
    ) = match command {
        Command::Compute(f) => (f.into_config()?, |c, _| commands::compute(c)),
        Command::Sweep(f) => (f.into_config()?, |c, _| commands::sweep_cmd(c)),
        Command::Verify(f) => (f.into_config()?, commands::verify_cmd),
    };
    let outcome = match cfg.threads()? {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| ConfigError::new("threads", e))?
            .install(|| run(&cfg, registry))?,
        None => run(&cfg, registry)?,
    };
    Ok((cfg, outcome))
}

/// Runs the command line `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with(args, &SuiteRegistry::default(), stdout, stderr)
}

pub fn run_with<I, T>(
    args: I,
    registry: &SuiteRegistry,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let target: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = write!(target, "{}", e.render());
            return code;
        }
    };
    match execute(cli.command, registry) {
        Ok((cfg, outcome)) => {
            if let Some(pre) = &outcome.preface {
                let _ = write!(stdout, "{pre}");
            }
            let written = match &cfg.out {
                Some(path) => std::fs::write(path, &outcome.document).map_err(CliError::Io),
                None => stdout
                    .write_all(outcome.document.as_bytes())
                    .map_err(CliError::Io),
            };
            if let Err(e) = written {
                let _ = writeln!(stderr, "{e}");
                return EXIT_ERROR;
            }
            if outcome.flagged {
                let _ = writeln!(stderr, "warning: result flagged (see diagnostics)");
                EXIT_FLAGGED
            } else {
                EXIT_OK
            }
        }
        Err(e) => {
            let _ = writeln!(stderr, "{e}");
            EXIT_ERROR
        }
    }
}
