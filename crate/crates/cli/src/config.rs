//! Run configuration: JSON file and command-line flags merged into one
//! validated description of a computation.

use std::fmt;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::Deserialize;
use serde_json::Value;
use xibergman::algebra::{Functional, MultiIndex};
use xibergman::domains::{Domain, DomainSpec};
use xibergman::green::linear_grid;
use xibergman::higher::{parse_complex, HomogeneousPolynomial};
use xibergman::pspace::SpaceOptions;
use xibergman::solver::SolverOptions;

pub const DEFAULT_SEED: u64 = 42;
pub const THREADS_ENV: &str = "XIBERGMAN_THREADS";

/// A configuration problem tied to the field that caused it.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(field: impl Into<String>, message: impl fmt::Display) -> Self {
        Self {
            field: field.into(),
            message: message.to_string(),
        }
    }

    fn missing(field: &str) -> Self {
        Self::new(field, "is required")
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid `{}`: {}", self.field, self.message)
    }
}

impl std::error::Error for ConfigError {}

type Result<T> = std::result::Result<T, ConfigError>;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// Unvalidated settings. Mirrors the command-line flags; strings use the flag syntax.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct RunConfig {
    /// Shape name (`disk`, `bidisc`, `polydisc:n`, `ball:n`, `annulus:r`) or a domain object.
    pub domain: Option<Value>,
    /// `"k:c; k1,k2:c"` or a functional object.
    pub xi: Option<Value>,
    #[serde(rename = "H")]
    pub h: Option<Value>,
    pub p: Option<f64>,
    /// Point as `"x, y"` with complex coordinates, or an array of coordinate strings or numbers.
    pub z: Option<Value>,
    /// Second point for off-diagonal kernels `K(z, w)`.
    pub w: Option<Value>,
    pub pole: Option<Value>,
    pub degree: Option<u32>,
    pub radial_order: Option<usize>,
    pub angular_order: Option<usize>,
    pub max_nodes: Option<usize>,
    /// `"start:stop:n"`, a comma list, or an array of numbers.
    pub a_grid: Option<Value>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub budget: Option<f64>,
    pub method: Option<String>,
    pub solver: Option<SolverOptions>,
    pub suite: Option<String>,
}

macro_rules! overlay {
    ($base:ident, $top:ident, $($f:ident),*) => {
        $(if $top.$f.is_some() { $base.$f = $top.$f; })*
    };
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::new("config", format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| ConfigError::new("config", e))
    }

    /// Fields set in `top` replace those in `self`.
    pub fn overlay(mut self, top: RunConfig) -> Self {
        overlay!(
            self,
            top,
            domain,
            xi,
            h,
            p,
            z,
            w,
            pole,
            degree,
            radial_order,
            angular_order,
            max_nodes,
            a_grid,
            out,
            format,
            seed,
            threads,
            budget,
            method,
            solver,
            suite
        );
        self
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }

    pub fn format(&self) -> Format {
        self.format.unwrap_or_default()
    }

    /// `--threads`, then `XIBERGMAN_THREADS`; `None` leaves the pool at its default.
    pub fn threads(&self) -> Result<Option<usize>> {
        let t = match self.threads {
            Some(t) => Some(t),
            None => match std::env::var(THREADS_ENV) {
                Ok(v) => Some(v.trim().parse().map_err(|_| {
                    ConfigError::new("threads", format!("{THREADS_ENV}=`{v}` is not a count"))
                })?),
                Err(_) => None,
            },
        };
        match t {
            Some(0) => Err(ConfigError::new("threads", "must be at least 1")),
            other => Ok(other),
        }
    }

    pub fn budget(&self) -> Result<Option<std::time::Duration>> {
        match self.budget {
            None => Ok(None),
            Some(b) if b.is_finite() && b >= 0.0 => Ok(Some(std::time::Duration::from_secs_f64(b))),
            Some(b) => Err(ConfigError::new(
                "budget",
                format!("must be a non-negative number of seconds, got {b}"),
            )),
        }
    }

    pub fn domain(&self) -> Result<Domain> {
        let v = self
            .domain
            .as_ref()
            .ok_or_else(|| ConfigError::missing("domain"))?;
        parse_domain(v).map_err(|e| ConfigError::new("domain", e))
    }

    pub fn p(&self) -> Result<f64> {
        let p = self.p.ok_or_else(|| ConfigError::missing("p"))?;
        if !(p.is_finite() && p > 0.0) {
            return Err(ConfigError::new("p", format!("must be positive, got {p}")));
        }
        Ok(p)
    }

    pub fn target(&self, dim: usize) -> Result<Target> {
        match (&self.xi, &self.h) {
            (Some(_), Some(_)) => Err(ConfigError::new("xi", "give either `xi` or `H`, not both")),
            (None, None) => Err(ConfigError::new("xi", "one of `xi` or `H` is required")),
            (Some(v), None) => {
                let xi = parse_functional(v, dim).map_err(|e| ConfigError::new("xi", e))?;
                if xi.is_zero() {
                    return Err(ConfigError::new(
                        "xi",
                        "the zero functional is not admissible",
                    ));
                }
                Ok(Target::Xi(xi))
            }
            (None, Some(v)) => parse_h(v, dim)
                .map(Target::H)
                .map_err(|e| ConfigError::new("H", e)),
        }
    }

    pub fn point(&self, field: &str, dim: usize) -> Result<Vec<Complex64>> {
        let v = match field {
            "z" => &self.z,
            "w" => &self.w,
            _ => &self.pole,
        };
        let v = v.as_ref().ok_or_else(|| ConfigError::missing(field))?;
        parse_point(v, dim).map_err(|e| ConfigError::new(field, e))
    }

    pub fn has_w(&self) -> bool {
        self.w.is_some()
    }

    pub fn space_options(&self) -> Result<SpaceOptions> {
        let mut opts = SpaceOptions::default();
        if let Some(d) = self.degree {
            opts = opts.degree(d);
        }
        match (self.radial_order, self.angular_order) {
            (Some(0), _) => return Err(ConfigError::new("radialOrder", "must be positive")),
            (_, Some(0)) => return Err(ConfigError::new("angularOrder", "must be positive")),
            (Some(r), Some(a)) => opts = opts.orders(r, a),
            (Some(_), None) => {
                return Err(ConfigError::new(
                    "angularOrder",
                    "is required with `radialOrder`",
                ))
            }
            (None, Some(_)) => {
                return Err(ConfigError::new(
                    "radialOrder",
                    "is required with `angularOrder`",
                ))
            }
            (None, None) => {}
        }
        if let Some(cap) = self.max_nodes {
            opts = opts.max_nodes(cap);
        }
        Ok(opts)
    }

    pub fn solver_options(&self) -> Result<SolverOptions> {
        let mut opts = self.solver.clone().unwrap_or_default();
        if let Some(m) = &self.method {
            opts.method = Some(m.clone());
        }
        if let Some(m) = &opts.method {
            let names = xibergman::solver::SolverRegistry::default().names();
            if !names.contains(&m.as_str()) {
                return Err(ConfigError::new(
                    "method",
                    format!("unknown solver `{m}`, expected one of {}", names.join(", ")),
                ));
            }
        }
        opts.seed = self.seed();
        Ok(opts)
    }

    pub fn a_grid(&self) -> Result<Vec<f64>> {
        let v = self
            .a_grid
            .as_ref()
            .ok_or_else(|| ConfigError::missing("aGrid"))?;
        let grid = parse_grid(v).map_err(|e| ConfigError::new("aGrid", e))?;
        if grid.is_empty() {
            return Err(ConfigError::new("aGrid", "is empty"));
        }
        if let Some(a) = grid.iter().find(|a| !(**a <= 0.0)) {
            return Err(ConfigError::new(
                "aGrid",
                format!("values must satisfy a ≤ 0, got {a}"),
            ));
        }
        if grid.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(ConfigError::new("aGrid", "must be strictly increasing"));
        }
        Ok(grid)
    }
}

#[derive(Clone, Debug)]
pub enum Target {
    Xi(Functional),
    H(HomogeneousPolynomial),
}

fn text_or_json(v: &Value) -> std::result::Result<Option<&str>, String> {
    match v {
        Value::String(s) if s.trim_start().starts_with('{') => Ok(None),
        Value::String(s) => Ok(Some(s)),
        Value::Object(_) => Ok(None),
        _ => Err("expected a string or an object".into()),
    }
}

fn json_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

pub fn parse_domain(v: &Value) -> std::result::Result<Domain, String> {
    let Some(text) = text_or_json(v)? else {
        let spec = DomainSpec::from_json(&json_text(v)).map_err(|e| e.to_string())?;
        return spec.build().map_err(|e| e.to_string());
    };
    let (name, arg) = match text.split_once(':') {
        Some((n, a)) => (n.trim(), Some(a.trim())),
        None => (text.trim(), None),
    };
    let count = |default: usize| -> std::result::Result<usize, String> {
        match arg {
            None => Ok(default),
            Some(a) => a
                .parse::<usize>()
                .ok()
                .filter(|n| *n > 0)
                .ok_or_else(|| format!("bad dimension `{a}`")),
        }
    };
    match name {
        "disk" => Ok(Domain::unit_disk()),
        "bidisc" => Ok(Domain::unit_polydisc(2)),
        "polydisc" => Ok(Domain::unit_polydisc(count(2)?)),
        "ball" => Ok(Domain::unit_ball(count(2)?)),
        "annulus" => {
            let r = arg.unwrap_or("0.5");
            let r: f64 = r.parse().map_err(|_| format!("bad inner radius `{r}`"))?;
            Domain::annulus(r, 1.0).map_err(|e| e.to_string())
        }
        other => Err(format!("unknown domain `{other}`; use disk, bidisc, polydisc:n, ball:n, annulus:r or a JSON object")),
    }
}

/// `"0:1"`, `"0:1; 1:0.5-0.5i"` or `"1,0:2"` in dimension 2.
pub fn parse_functional(v: &Value, dim: usize) -> std::result::Result<Functional, String> {
    let Some(text) = text_or_json(v)? else {
        let xi = Functional::from_json(&json_text(v)).map_err(|e| e.to_string())?;
        if xi.dim() != dim {
            return Err(format!(
                "functional has dimension {}, domain has {dim}",
                xi.dim()
            ));
        }
        return Ok(xi);
    };
    let mut xi = Functional::zero(dim);
    for term in text.split(';').map(str::trim).filter(|t| !t.is_empty()) {
        let (index, coeff) = term
            .rsplit_once(':')
            .ok_or_else(|| format!("term `{term}` needs `index: coefficient`"))?;
        let alpha = MultiIndex::parse_key(index).map_err(|e| e.to_string())?;
        if alpha.dim() != dim {
            return Err(format!(
                "index `{}` has dimension {}, domain has {dim}",
                index.trim(),
                alpha.dim()
            ));
        }
        xi = xi.with_term(alpha, parse_complex(coeff).map_err(|e| e.to_string())?);
    }
    Ok(xi)
}

pub fn parse_h(v: &Value, dim: usize) -> std::result::Result<HomogeneousPolynomial, String> {
    let h = match text_or_json(v)? {
        Some(text) => HomogeneousPolynomial::parse(text, Some(dim)),
        None => HomogeneousPolynomial::from_json(&json_text(v)),
    }
    .map_err(|e| e.to_string())?;
    if h.dim() != dim {
        return Err(format!("H has dimension {}, domain has {dim}", h.dim()));
    }
    Ok(h)
}

/// Coordinates separated by commas, each `re`, `re±imi` or `imi`; a single `0` fills every axis.
pub fn parse_point(v: &Value, dim: usize) -> std::result::Result<Vec<Complex64>, String> {
    let coords: Vec<Complex64> = match v {
        Value::String(s) => s
            .split(',')
            .map(|c| parse_complex(c).map_err(|e| e.to_string()))
            .collect::<std::result::Result<_, _>>()?,
        Value::Number(n) => vec![Complex64::new(n.as_f64().ok_or("bad number")?, 0.0)],
        Value::Array(items) => items
            .iter()
            .map(|it| match it {
                Value::Number(n) => n
                    .as_f64()
                    .map(|x| Complex64::new(x, 0.0))
                    .ok_or_else(|| "bad number".to_string()),
                Value::String(s) => parse_complex(s).map_err(|e| e.to_string()),
                _ => Err("coordinates must be numbers or strings".to_string()),
            })
            .collect::<std::result::Result<_, _>>()?,
        _ => return Err("expected a string, number or array".into()),
    };
    if coords.len() == 1 && dim > 1 && coords[0] == Complex64::new(0.0, 0.0) {
        return Ok(vec![coords[0]; dim]);
    }
    if coords.len() != dim {
        return Err(format!("expected {dim} coordinates, got {}", coords.len()));
    }
    Ok(coords)
}

pub fn parse_grid(v: &Value) -> std::result::Result<Vec<f64>, String> {
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| format!("bad number `{}`", s.trim()))
    };
    match v {
        Value::Array(items) => items
            .iter()
            .map(|x| {
                x.as_f64()
                    .ok_or_else(|| "grid entries must be numbers".to_string())
            })
            .collect(),
        Value::String(s) if s.contains(':') => {
            let parts: Vec<&str> = s.split(':').collect();
            let [start, stop, n] = parts.as_slice() else {
                return Err(format!("expected `start:stop:n`, got `{s}`"));
            };
            let n: usize = n
                .trim()
                .parse()
                .ok()
                .filter(|n| *n >= 1)
                .ok_or_else(|| format!("bad point count `{}`", n.trim()))?;
            Ok(linear_grid(num(start)?, num(stop)?, n))
        }
        Value::String(s) => s
            .split(',')
            .filter(|t| !t.trim().is_empty())
            .map(num)
            .collect(),
        _ => Err("expected `start:stop:n`, a comma list or an array".into()),
    }
}
