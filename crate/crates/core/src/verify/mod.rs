//! Verification batteries: each suite runs a module's invariant and property
//! checks and reports measured values against pinned tolerances.

mod algebra;
mod green;
mod higher;
mod kernels;
mod quadrature;

use std::fmt::Display;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::algebra::{indices_up_to, Functional};
use crate::error::{Error, Result};

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub measured: f64,
    pub relation: &'static str,
    pub bound: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl Check {
    pub fn at_most(name: impl Into<String>, measured: f64, bound: f64) -> Self {
        Self {
            name: name.into(),
            pass: measured <= bound,
            measured,
            relation: "<=",
            bound,
            detail: None,
        }
    }

    pub fn at_least(name: impl Into<String>, measured: f64, bound: f64) -> Self {
        Self {
            name: name.into(),
            pass: measured >= bound,
            measured,
            relation: ">=",
            bound,
            detail: None,
        }
    }

    pub fn failed(name: impl Into<String>, reason: impl Display) -> Self {
        Self {
            name: name.into(),
            pass: false,
            measured: f64::NAN,
            relation: "error",
            bound: f64::NAN,
            detail: Some(reason.to_string()),
        }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = Some(detail.into());
        self
    }
}

/// Runs `f`, turning an error into a failed check named `name`.
pub(crate) fn guarded(name: &str, f: impl FnOnce() -> Result<Check>) -> Check {
    f().unwrap_or_else(|e| Check::failed(name, e))
}

pub struct VerifyContext {
    pub seed: u64,
}

impl VerifyContext {
    /// Independent deterministic stream per check.
    pub(crate) fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        rng
    }
}

pub trait Suite: Send + Sync {
    fn name(&self) -> &'static str;
    fn run(&self, ctx: &VerifyContext) -> Vec<Check>;
}

pub struct SuiteRegistry {
    suites: Vec<Box<dyn Suite>>,
}

impl Default for SuiteRegistry {
    fn default() -> Self {
        let mut r = Self::empty();
        r.register(Box::new(algebra::AlgebraSuite));
        r.register(Box::new(quadrature::QuadratureSuite));
        r.register(Box::new(kernels::KernelsSuite));
        r.register(Box::new(higher::HigherSuite));
        r.register(Box::new(green::GreenSuite));
        r
    }
}

impl SuiteRegistry {
    pub fn empty() -> Self {
        Self { suites: Vec::new() }
    }

    pub fn register(&mut self, suite: Box<dyn Suite>) {
        self.suites.retain(|s| s.name() != suite.name());
        self.suites.push(suite);
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.suites.iter().map(|s| s.name()).collect()
    }

    /// The suites selected by `name`; `"all"` selects every registered suite.
    pub fn resolve(&self, name: &str) -> Result<Vec<&dyn Suite>> {
        if name == "all" {
            return Ok(self.suites.iter().map(|s| s.as_ref()).collect());
        }
        self.suites
            .iter()
            .find(|s| s.name() == name)
            .map(|s| vec![s.as_ref()])
            .ok_or_else(|| Error::UnknownName {
                kind: "suite",
                name: name.to_string(),
            })
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SuiteReport {
    pub name: String,
    pub pass: bool,
    pub checks: Vec<Check>,
    #[serde(skip)]
    pub elapsed: Duration,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct VerifyReport {
    pub suite: String,
    pub seed: u64,
    pub pass: bool,
    pub suites: Vec<SuiteReport>,
    /// Suites not started because the budget ran out.
    pub skipped: Vec<String>,
}

impl VerifyReport {
    pub fn to_json(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("report serializes");
        crate::output::round_json(&mut v);
        v
    }

    pub fn to_table(&self) -> String {
        let mut out = String::new();
        for s in &self.suites {
            out.push_str(&format!(
                "== {} ({:.1}s)\n",
                s.name,
                s.elapsed.as_secs_f64()
            ));
            for c in &s.checks {
                let status = if c.pass { "PASS" } else { "FAIL" };
                out.push_str(&format!(
                    "{status}  {:<32} {:>12.4e} {:<5} {:.1e}",
                    c.name, c.measured, c.relation, c.bound
                ));
                if let Some(d) = &c.detail {
                    out.push_str(&format!("  ({d})"));
                }
                out.push('\n');
            }
        }
        for s in &self.skipped {
            out.push_str(&format!("SKIP  {s} (budget exhausted)\n"));
        }
        out.push_str(if self.pass { "PASS\n" } else { "FAIL\n" });
        out
    }
}

/// Runs the suites selected by `name`. Suites that would start after
/// `budget` has elapsed are skipped and make the report fail.
pub fn run(
    registry: &SuiteRegistry,
    name: &str,
    seed: u64,
    budget: Option<Duration>,
) -> Result<VerifyReport> {
    let suites = registry.resolve(name)?;
    let ctx = VerifyContext { seed };
    let start = Instant::now();
    let mut reports = Vec::new();
    let mut skipped = Vec::new();
    for suite in suites {
        if budget.is_some_and(|b| start.elapsed() >= b) {
            skipped.push(suite.name().to_string());
            continue;
        }
        let t = Instant::now();
        let checks = suite.run(&ctx);
        let pass = checks.iter().all(|c| c.pass);
        reports.push(SuiteReport {
            name: suite.name().to_string(),
            pass,
            checks,
            elapsed: t.elapsed(),
        });
    }
    let pass = skipped.is_empty() && reports.iter().all(|r| r.pass);
    Ok(VerifyReport {
        suite: name.to_string(),
        seed,
        pass,
        suites: reports,
        skipped,
    })
}

pub(crate) fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Uniform point in the disk of radius `r` about `center`.
pub(crate) fn random_in_disk(rng: &mut impl Rng, center: Complex64, r: f64) -> Complex64 {
    let rho = r * rng.gen::<f64>().sqrt();
    center + Complex64::from_polar(rho, std::f64::consts::TAU * rng.gen::<f64>())
}

/// Real and imaginary parts uniform in `[−scale, scale]`.
pub(crate) fn random_complex(rng: &mut impl Rng, scale: f64) -> Complex64 {
    c(rng.gen_range(-scale..=scale), rng.gen_range(-scale..=scale))
}

/// One to three random terms of degree at most `max_degree`, leading coefficient bounded away from 0.
pub(crate) fn random_functional(rng: &mut impl Rng, dim: usize, max_degree: u32) -> Functional {
    let pool = indices_up_to(dim, max_degree);
    let count = rng.gen_range(1..=3usize.min(pool.len()));
    let mut xi = Functional::zero(dim);
    while xi.terms().count() < count {
        let alpha = pool[rng.gen_range(0..pool.len())].clone();
        if xi.coefficient(&alpha).norm() == 0.0 {
            let z = random_complex(rng, 1.0);
            let z = if z.norm() == 0.0 {
                c(1.0, 0.0)
            } else {
                z + z / z.norm() * 0.25
            };
            xi = xi.with_term(alpha, z);
        }
    }
    xi
}

/// `|a − b| / |b|`
pub(crate) fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}
