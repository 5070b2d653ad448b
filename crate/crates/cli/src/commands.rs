use serde_json::{json, Value};
use xibergman::green::{sweep, GreenModel, SweepOptions, SweepTarget};
use xibergman::higher::higher_kernel_direct;
use xibergman::kernels::{kernel2_diagonal, kernelp_diagonal, off_diagonal, KernelEvaluation};
use xibergman::output::{fmt_num, json_num, round_json};
use xibergman::pspace::PolySpace;
use xibergman::verify::{self, SuiteRegistry};

use crate::config::{ConfigError, Format, RunConfig, Target};

#[derive(Debug)]
pub enum CliError {
    Config(ConfigError),
    Compute(xibergman::Error),
    Io(std::io::Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(e) => write!(f, "config error: {e}"),
            CliError::Compute(e) => write!(f, "computation failed: {e}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e)
    }
}

impl From<xibergman::Error> for CliError {
    fn from(e: xibergman::Error) -> Self {
        CliError::Compute(e)
    }
}

/// Rendered result of a command.
pub struct Outcome {
    /// Machine-readable document, written to `--out` when given.
    pub document: String,
    /// Printed to stdout before the document (verify's table).
    pub preface: Option<String>,
    /// Solver flags or failed checks; maps to exit code 2.
    pub flagged: bool,
}

fn pair(c: &num_complex::Complex64) -> Value {
    json!([json_num(c.re), json_num(c.im)])
}

fn metadata(cfg: &RunConfig) -> Value {
    json!({ "seed": cfg.seed(), "version": env!("CARGO_PKG_VERSION") })
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON value serializes");
    s.push('\n');
    s
}

fn evaluation_json(e: &KernelEvaluation) -> Value {
    json!({
        "kernel": e.kernel,
        "m": e.m,
        "p": e.p,
        "z": e.z.iter().map(pair).collect::<Vec<_>>(),
        "degree": e.degree,
        "diagnostics": e.diagnostics,
    })
}

pub fn compute(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let domain = cfg.domain()?;
    let n = domain.dim();
    let target = cfg.target(n)?;
    let p = cfg.p()?;
    let z = cfg.point("z", n)?;
    let w = if cfg.has_w() {
        Some(cfg.point("w", n)?)
    } else {
        None
    };
    let space_opts = cfg.space_options()?;
    let solver = cfg.solver_options()?;
    let format = cfg.format();
    let space = PolySpace::with_options(&domain, &space_opts)?;

    let (eval, target_json, extra) = match (&target, &w) {
        (Target::H(_), Some(_)) => {
            return Err(ConfigError::new(
                "w",
                "off-diagonal kernels are defined for `xi` targets only",
            )
            .into())
        }
        (Target::Xi(xi), Some(w)) => {
            let off = off_diagonal(&space, xi, w, p, &solver)?;
            let value = off.eval(&space, &z);
            let extra =
                json!({ "w": w.iter().map(pair).collect::<Vec<_>>(), "offDiagonal": pair(&value) });
            (
                off.base,
                serde_json::to_value(xi).expect("functional serializes"),
                Some((extra, value)),
            )
        }
        (Target::Xi(xi), None) => {
            let eval = if p == 2.0 && solver.method.is_none() {
                kernel2_diagonal(&space, xi, &z)?
            } else {
                kernelp_diagonal(&space, xi, &z, p, &solver)?
            };
            (
                eval,
                serde_json::to_value(xi).expect("functional serializes"),
                None,
            )
        }
        (Target::H(h), None) => (
            higher_kernel_direct(&space, h, &z, p, &solver)?,
            h.to_json(),
            None,
        ),
    };
    let flagged = eval.flagged();
    let document = match format {
        Format::Json => {
            let mut v = evaluation_json(&eval);
            let key = if matches!(target, Target::H(_)) {
                "H"
            } else {
                "xi"
            };
            v[key] = target_json;
            if let Some((extra, _)) = &extra {
                for (k, x) in extra.as_object().expect("object") {
                    v[k] = x.clone();
                }
            }
            v["metadata"] = metadata(cfg);
            round_json(&mut v);
            pretty(&v)
        }
        Format::Csv => {
            let mut header = String::from("K,m,p,degree,method,iterations,converged,flags");
            let d = &eval.diagnostics;
            let mut row = format!(
                "{},{},{},{},{},{},{},{}",
                fmt_num(eval.kernel),
                fmt_num(eval.m),
                fmt_num(eval.p),
                eval.degree,
                d.method,
                d.iterations + d.newton_iterations,
                d.converged,
                d.flags.join(";")
            );
            if let Some((_, value)) = extra {
                header.push_str(",offDiagonalRe,offDiagonalIm");
                row.push_str(&format!(",{},{}", fmt_num(value.re), fmt_num(value.im)));
            }
            format!("{header}\n{row}\n")
        }
    };
    Ok(Outcome {
        document,
        preface: None,
        flagged,
    })
}

pub fn sweep_cmd(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let domain = cfg.domain()?;
    let n = domain.dim();
    let target = cfg.target(n)?;
    let p = cfg.p()?;
    let pole = cfg.point("pole", n)?;
    let grid = cfg.a_grid()?;
    let opts = SweepOptions {
        space: cfg.space_options()?,
        solver: cfg.solver_options()?,
    };
    let model = GreenModel::for_pole(&domain, &pole).map_err(|e| ConfigError::new("pole", e))?;
    let target = match target {
        Target::Xi(xi) => SweepTarget::Functional(xi),
        Target::H(h) => SweepTarget::Higher(h),
    };
    let table = sweep(&model, &target, p, &grid, &opts)?;
    let document = match cfg.format.unwrap_or(Format::Csv) {
        Format::Csv => table.to_csv(),
        Format::Json => {
            let mut v = table.to_json();
            v["model"] = serde_json::to_value(model.kind()).expect("kind serializes");
            v["metadata"] = metadata(cfg);
            pretty(&v)
        }
    };
    Ok(Outcome {
        document,
        preface: None,
        flagged: table.flagged(),
    })
}

pub fn verify_cmd(cfg: &RunConfig, registry: &SuiteRegistry) -> Result<Outcome, CliError> {
    let suite = cfg.suite.clone().unwrap_or_else(|| "all".into());
    registry
        .resolve(&suite)
        .map_err(|e| ConfigError::new("suite", e))?;
    let report = verify::run(registry, &suite, cfg.seed(), cfg.budget()?)?;
    let document = pretty(&report.to_json());
    Ok(Outcome {
        document,
        preface: Some(report.to_table()),
        flagged: !report.pass,
    })
}
