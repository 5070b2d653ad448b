use num_complex::Complex64;

use super::{c, guarded, random_complex, rel, Check, Suite, VerifyContext};
use crate::algebra::MultiIndex;
use crate::domains::Domain;
use crate::green::{linear_grid, sweep, GreenModel, SweepOptions, SweepTarget};
use crate::higher::{
    higher_kernel_direct, higher_kernel_via_inf, minimizing_xi_p2, FunctionalFamily,
    HomogeneousPolynomial, ViaInfOptions,
};
use crate::kernels::{kernel2_diagonal, kernelp_diagonal};
use crate::pspace::{PolySpace, SpaceOptions};
use crate::solver::SolverOptions;
use crate::Result;

pub struct HigherSuite;

impl Suite for HigherSuite {
    fn name(&self) -> &'static str {
        "higher"
    }

    fn run(&self, ctx: &VerifyContext) -> Vec<Check> {
        vec![
            guarded("sandwich", || sandwich(ctx)),
            guarded("three-way-p2-disk", || three_way(false)),
            guarded("three-way-p2-bidisc", || three_way(true)),
            guarded("direct-vs-inf-p1.5", direct_vs_inf),
            guarded("non-triviality-transfer", non_triviality),
            guarded("higher-sweep-monotone", higher_sweep),
        ]
    }
}

fn monomial(entries: Vec<u32>) -> HomogeneousPolynomial {
    HomogeneousPolynomial::monomial(MultiIndex::new(entries), c(1.0, 0.0))
        .expect("nonzero monomial")
}

fn disk_grid() -> Vec<(HomogeneousPolynomial, Complex64)> {
    let mut out = Vec::new();
    for k in [1, 2] {
        for z in [0.0, 0.3] {
            out.push((monomial(vec![k]), c(z, 0.0)));
        }
    }
    out
}

/// `K^{H,p}(z) ≤ K_{ξ,p}(z)` for random `ξ ∈ S_H`.
fn sandwich(ctx: &VerifyContext) -> Result<Check> {
    let mut rng = ctx.rng(31);
    let space = PolySpace::new(&Domain::unit_disk())?;
    let opts = SolverOptions::default();
    let mut worst = f64::NEG_INFINITY;
    for (h, z) in disk_grid() {
        let family = FunctionalFamily::new(&h);
        for p in [1.5, 2.0] {
            let direct = higher_kernel_direct(&space, &h, &[z], p, &opts)?.kernel;
            for _ in 0..50 {
                let free: Vec<Complex64> = (0..family.free_dim())
                    .map(|_| random_complex(&mut rng, 3.0))
                    .collect();
                let xi = family.member(&free)?;
                let k = kernelp_diagonal(&space, &xi, &[z], p, &opts)?.kernel;
                worst = worst.max((direct - k) / direct);
            }
        }
    }
    Ok(Check::at_most("sandwich", worst, 1e-8))
}

/// Direct, infimum and minimizing-functional routes at `p = 2`.
fn three_way(bidisc: bool) -> Result<Check> {
    let (space, grid) = if bidisc {
        let zs = [[c(0.0, 0.0), c(0.0, 0.0)], [c(0.3, 0.0), c(0.0, -0.2)]];
        let hs = [monomial(vec![1, 0]), monomial(vec![1, 1])];
        let grid: Vec<(HomogeneousPolynomial, Vec<Complex64>)> = hs
            .iter()
            .flat_map(|h| zs.iter().map(move |z| (h.clone(), z.to_vec())))
            .collect();
        (PolySpace::new(&Domain::unit_polydisc(2))?, grid)
    } else {
        (
            PolySpace::new(&Domain::unit_disk())?,
            disk_grid().into_iter().map(|(h, z)| (h, vec![z])).collect(),
        )
    };
    let opts = SolverOptions::default();
    let mut worst = 0.0f64;
    for (h, z) in grid {
        let direct = higher_kernel_direct(&space, &h, &z, 2.0, &opts)?.kernel;
        let inf =
            higher_kernel_via_inf(&space, &h, &z, 2.0, &opts, &ViaInfOptions::default())?.kernel;
        let star = kernel2_diagonal(&space, &minimizing_xi_p2(&space, &h, &z)?, &z)?.kernel;
        worst = worst
            .max(rel(inf, direct))
            .max(rel(star, direct))
            .max(rel(inf, star));
    }
    let name = if bidisc {
        "three-way-p2-bidisc"
    } else {
        "three-way-p2-disk"
    };
    Ok(Check::at_most(name, worst, 1e-7))
}

fn direct_vs_inf() -> Result<Check> {
    let space = PolySpace::new(&Domain::unit_disk())?;
    let opts = SolverOptions::default();
    let mut worst = 0.0f64;
    for (h, z) in disk_grid() {
        let direct = higher_kernel_direct(&space, &h, &[z], 1.5, &opts)?.kernel;
        let inf =
            higher_kernel_via_inf(&space, &h, &[z], 1.5, &opts, &ViaInfOptions::default())?.kernel;
        worst = worst.max(rel(inf, direct));
    }
    Ok(Check::at_most("direct-vs-inf-p1.5", worst, 1e-4))
}

/// Positive kernels on the indicatrix give positive kernels on the domain.
fn non_triviality() -> Result<Check> {
    let opts = SolverOptions::default();
    let mut worst = f64::INFINITY;
    for domain in [
        Domain::unit_disk(),
        Domain::unit_polydisc(2),
        Domain::unit_ball(2),
    ] {
        let g = GreenModel::balanced(&domain)?;
        let space = PolySpace::new(&domain)?;
        let indicatrix = PolySpace::new(&g.azukawa_indicatrix()?)?;
        let h = if domain.dim() == 1 {
            monomial(vec![1])
        } else {
            monomial(vec![1, 0])
        };
        for p in [1.5, 2.0] {
            let on_indicatrix = higher_kernel_direct(&indicatrix, &h, g.pole(), p, &opts)?.kernel;
            if on_indicatrix > 0.0 {
                worst = worst.min(higher_kernel_direct(&space, &h, g.pole(), p, &opts)?.kernel);
            }
        }
    }
    Ok(Check::at_least(
        "non-triviality-transfer",
        worst,
        f64::MIN_POSITIVE,
    ))
}

/// `a ↦ e^{(2n+pk)a} K^{H,p}_{Ω_a}(o)` is non-decreasing on the Möbius model.
/// For `p < 2` the minimizer vanishes at the pole and the slack adds the
/// row-wise gap between two quadrature resolutions.
fn higher_sweep() -> Result<Check> {
    let g = GreenModel::moebius(c(0.5, 0.0))?;
    let grid = linear_grid(-3.0, 0.0, 31);
    let coarse = SweepOptions {
        space: SpaceOptions::default().degree(30),
        ..Default::default()
    };
    let fine = SweepOptions {
        space: SpaceOptions::default().degree(30).orders(64, 128),
        ..Default::default()
    };
    let target = SweepTarget::Higher(monomial(vec![1]));
    let mut worst = f64::NEG_INFINITY;
    let mut detail = Vec::new();
    for p in [1.0, 1.5, 2.0] {
        let table = sweep(
            &g,
            &target,
            p,
            &grid,
            if p == 2.0 { &coarse } else { &fine },
        )?;
        if table.flagged() {
            return Ok(Check::failed(
                "higher-sweep-monotone",
                format!("flagged rows at p = {p}"),
            ));
        }
        let estimate = if p == 2.0 {
            0.0
        } else {
            let other = sweep(&g, &target, p, &grid, &coarse)?;
            table
                .rows
                .iter()
                .zip(&other.rows)
                .map(|(a, b)| rel(b.scaled, a.scaled))
                .fold(0.0, f64::max)
        };
        detail.push(format!("p={p}: quadrature estimate {estimate:.1e}"));
        worst = worst.max(table.max_relative_decrease() - estimate);
    }
    Ok(Check::at_most("higher-sweep-monotone", worst, 1e-8).with_detail(detail.join(", ")))
}
