use std::f64::consts::PI;

use super::{c, guarded, rel, Check, Suite, VerifyContext};
use crate::algebra::{Functional, MultiIndex};
use crate::domains::Domain;
use crate::green::{
    limit_chain_check, linear_grid, sublevel_kernel, sweep, GreenModel, SweepOptions, SweepTarget,
};
use crate::higher::HomogeneousPolynomial;
use crate::kernels::kernelp_diagonal;
use crate::pspace::{PolySpace, SpaceOptions};
use crate::solver::SolverOptions;
use crate::Result;

pub struct GreenSuite;

impl Suite for GreenSuite {
    fn name(&self) -> &'static str {
        "green"
    }

    fn run(&self, _ctx: &VerifyContext) -> Vec<Check> {
        let mut out = moebius_sweeps();
        out.push(guarded("a0-row-is-domain-kernel", a0_row));
        out.extend(balanced());
        out.extend(limit_chains());
        out
    }
}

fn delta(k: u32) -> Functional {
    Functional::delta(MultiIndex::new(vec![k]))
}

/// Shape of the scaled and log columns on the Möbius model with pole 0.5.
fn moebius_sweeps() -> Vec<Check> {
    let run = || -> Result<(f64, f64, f64)> {
        let g = GreenModel::moebius(c(0.5, 0.0))?;
        let grid = linear_grid(-3.0, 0.0, 31);
        let opts = SweepOptions {
            space: SpaceOptions::default().degree(30),
            ..Default::default()
        };
        let (mut decrease, mut convexity, mut above) =
            (f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for k in [0, 1] {
            for p in [1.0, 1.5, 2.0] {
                let t = sweep(&g, &SweepTarget::Functional(delta(k)), p, &grid, &opts)?;
                if t.flagged() {
                    return Err(crate::Error::Solver(format!(
                        "flagged rows for k = {k}, p = {p}"
                    )));
                }
                decrease = decrease.max(t.max_relative_decrease());
                convexity = t
                    .log_second_differences_raw()
                    .into_iter()
                    .fold(convexity, f64::min);
                let cap = t.rows.last().expect("non-empty grid").scaled;
                above = t
                    .rows
                    .iter()
                    .map(|r| r.scaled / cap - 1.0)
                    .fold(above, f64::max);
            }
        }
        Ok((decrease, convexity, above))
    };
    match run() {
        Ok((d, cvx, up)) => vec![
            Check::at_most("moebius-scaled-monotone", d, 1e-8),
            Check::at_least("moebius-log-convex", cvx, -1e-6),
            Check::at_most("moebius-upper-bound", up, 1e-6),
        ],
        Err(e) => vec![Check::failed("moebius-scaled-monotone", e)],
    }
}

fn a0_row() -> Result<Check> {
    let g = GreenModel::moebius(c(0.5, 0.0))?;
    let opts = SweepOptions::default();
    let mut worst = 0.0f64;
    for p in [1.5, 2.0] {
        let (row, _) = sublevel_kernel(&g, &SweepTarget::Functional(delta(1)), p, 0.0, &opts)?;
        let space = PolySpace::new(&Domain::unit_disk())?;
        let direct =
            kernelp_diagonal(&space, &delta(1), g.pole(), p, &SolverOptions::default())?.kernel;
        worst = worst.max(rel(row, direct));
    }
    Ok(Check::at_most("a0-row-is-domain-kernel", worst, 1e-9))
}

/// Constant scaled columns on balanced models, with the disk closed form.
fn balanced() -> Vec<Check> {
    let run = || -> Result<(f64, f64)> {
        let disk = GreenModel::balanced(&Domain::unit_disk())?;
        let grid = linear_grid(-3.0, 0.0, 31);
        let opts = SweepOptions::default();
        let (mut spread, mut closed) = (0.0f64, 0.0f64);
        for k in [0, 1] {
            for p in [1.5, 2.0] {
                let t = sweep(&disk, &SweepTarget::Functional(delta(k)), p, &grid, &opts)?;
                spread = spread.max(t.relative_spread());
                let e = p * k as f64 + 2.0;
                for r in &t.rows {
                    closed = closed.max(rel(r.kernel, e / (2.0 * PI * (e * r.a).exp())));
                }
            }
        }
        let bidisc = GreenModel::balanced(&Domain::unit_polydisc(2))?;
        let small = SweepOptions {
            space: SpaceOptions::default().degree(6).orders(8, 16),
            ..Default::default()
        };
        let xi = Functional::delta(MultiIndex::zeros(2));
        let t = sweep(
            &bidisc,
            &SweepTarget::Functional(xi),
            2.0,
            &linear_grid(-3.0, 0.0, 7),
            &small,
        )?;
        spread = spread.max(t.relative_spread());
        Ok((spread, closed))
    };
    match run() {
        Ok((spread, closed)) => vec![
            Check::at_most("balanced-constant", spread, 1e-7),
            Check::at_most("balanced-closed-form", closed, 1e-6),
        ],
        Err(e) => vec![Check::failed("balanced-constant", e)],
    }
}

/// `K_{ξ,Ω,p}(o) ≥ lim ≥ K^{H,p}_{I_Ω(o)}(o)` with grid stabilization.
fn limit_chains() -> Vec<Check> {
    let run = || -> Result<(f64, f64)> {
        let grid = linear_grid(-3.0, 0.0, 7);
        let mut failures = 0usize;
        let mut stabilization = 0.0f64;
        for domain in [Domain::unit_disk(), Domain::unit_polydisc(2)] {
            let n = domain.dim();
            let g = GreenModel::balanced(&domain)?;
            let opts = if n == 1 {
                SweepOptions::default()
            } else {
                SweepOptions {
                    space: SpaceOptions::default().degree(6).orders(8, 16),
                    ..Default::default()
                }
            };
            let z = HomogeneousPolynomial::monomial(MultiIndex::axis(n, 0, 1), c(1.0, 0.0))?;
            for h in [HomogeneousPolynomial::one(n), z] {
                for p in [1.5, 2.0] {
                    let r = limit_chain_check(&g, &h, None, p, &grid, &opts)?;
                    failures += usize::from(!r.pass);
                    stabilization = stabilization.max(r.stabilization);
                }
            }
        }
        Ok((failures as f64, stabilization))
    };
    match run() {
        Ok((f, s)) => vec![
            Check::at_most("limit-chain-failures", f, 0.0),
            Check::at_most("limit-chain-stabilization", s, 1e-4),
        ],
        Err(e) => vec![Check::failed("limit-chain-failures", e)],
    }
}
