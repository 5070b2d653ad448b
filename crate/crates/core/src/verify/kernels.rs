use std::f64::consts::{PI, TAU};

use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;

use super::{
    c, guarded, random_complex, random_functional, random_in_disk, rel, Check, Suite, VerifyContext,
};
use crate::algebra::{Functional, MultiIndex};
use crate::domains::Domain;
use crate::kernels::{
    annihilated_part, bounds_check, evaluation_bound, h_quantity, kernel2_diagonal,
    kernelp_diagonal, orthogonality_ratio, reproducing_residual,
};
use crate::pspace::{PolySpace, SpaceOptions, SpaceVector};
use crate::solver::{minimize, Constraints, SolverOptions};
use crate::Result;

pub struct KernelsSuite;

impl Suite for KernelsSuite {
    fn name(&self) -> &'static str {
        "kernels"
    }

    fn run(&self, ctx: &VerifyContext) -> Vec<Check> {
        let mut out = vec![guarded("closed-form-disk", closed_form)];
        out.extend(truncation());
        out.push(guarded("bergman-series", bergman_series));
        out.push(guarded("sub-mean-value-bound", || sub_mean_value(ctx)));
        out.push(guarded("p2-cross-path", || p2_cross(ctx)));
        out.push(guarded("uniqueness-random-starts", || uniqueness(ctx)));
        out.extend(product_formula());
        out.extend(reproducing(ctx));
        out.extend(inequalities(ctx));
        out.push(guarded("domain-monotonicity", domain_monotonicity));
        out.extend(exhaustion());
        out.extend(psh(ctx));
        out.push(guarded("boundary-blow-up-slope", boundary_slope));
        out.push(guarded("lipschitz-constant", || lipschitz(ctx)));
        out
    }
}

fn delta(k: u32) -> Functional {
    Functional::delta(MultiIndex::new(vec![k]))
}

/// `p = 2` goes through the exact path, everything else through the iterative solver.
fn kernel(space: &PolySpace, xi: &Functional, z: &[Complex64], p: f64) -> Result<f64> {
    if p == 2.0 {
        Ok(kernel2_diagonal(space, xi, z)?.kernel)
    } else {
        Ok(kernelp_diagonal(space, xi, z, p, &SolverOptions::default())?.kernel)
    }
}

/// `K_{δ_k,p}(0) = (pk+2)/(2π)` on the unit disk.
fn closed_form() -> Result<Check> {
    let space = PolySpace::with_options(
        &Domain::unit_disk(),
        &SpaceOptions::default().degree(16).orders(32, 64),
    )?;
    let mut worst_iter = 0.0f64;
    let mut worst_exact = 0.0f64;
    for p in [1.0, 1.5, 2.0, 3.0] {
        for k in 0..3u32 {
            let exact = (p * k as f64 + 2.0) / (2.0 * PI);
            let err = rel(kernel(&space, &delta(k), &[c(0.0, 0.0)], p)?, exact);
            if p == 2.0 {
                worst_exact = worst_exact.max(err);
            } else {
                worst_iter = worst_iter.max(err);
            }
        }
    }
    let pass = worst_iter <= 1e-4 && worst_exact <= 1e-9;
    let mut check = Check::at_most("closed-form-disk", worst_iter.max(worst_exact), 1e-4)
        .with_detail(format!("p=2 worst {:.3e} (bound 1e-9)", worst_exact));
    check.pass = pass;
    Ok(check)
}

/// `p = 2` kernels are non-decreasing in the degree and settle between 14 and 16.
fn truncation() -> Vec<Check> {
    let run = || -> Result<(f64, f64)> {
        let domain = Domain::unit_disk();
        let spaces: Vec<PolySpace> = (2..=16)
            .map(|d| PolySpace::with_degree(&domain, d))
            .collect::<Result<_>>()?;
        let mut worst_drop = f64::NEG_INFINITY;
        let mut worst_settle = 0.0f64;
        for xi in [
            delta(0),
            delta(1),
            delta(0).with_term(MultiIndex::new(vec![2]), c(0.5, 0.5)),
        ] {
            for r in [0.0, 0.2, 0.4, 0.7] {
                let z = [Complex64::from_polar(r, 0.7)];
                let ks: Vec<f64> = spaces
                    .iter()
                    .filter(|s| s.degree() >= xi.degree().unwrap_or(0))
                    .map(|s| kernel2_diagonal(s, &xi, &z).map(|e| e.kernel))
                    .collect::<Result<_>>()?;
                for w in ks.windows(2) {
                    worst_drop = worst_drop.max((w[0] - w[1]) / w[1]);
                }
                if r <= 0.3 && xi.degree().unwrap_or(0) <= 1 {
                    let n = ks.len();
                    worst_settle = worst_settle.max(rel(ks[n - 3], ks[n - 1]));
                }
            }
        }
        Ok((worst_drop, worst_settle))
    };
    match run() {
        Ok((drop, settle)) => vec![
            Check::at_most("truncation-monotone", drop, 1e-12),
            Check::at_most("truncation-settled-14-16", settle, 1e-8),
        ],
        Err(e) => vec![Check::failed("truncation-monotone", e)],
    }
}

/// `Σ_k |σ_k(z)|² → 1/(π(1−|z|²)²)` at degree 30.
fn bergman_series() -> Result<Check> {
    let space = PolySpace::with_degree(&Domain::unit_disk(), 30)?;
    let mut worst = 0.0f64;
    for (r, theta) in [(0.0, 0.0), (0.25, 1.0), (0.4, -2.0), (0.5, 0.3)] {
        let z = Complex64::from_polar(r, theta);
        let onb = space.orthonormal_basis(&[z])?;
        let sum: f64 = (0..onb.len())
            .map(|k| space.eval(&onb.sigma(k), &[z]).norm_sqr())
            .sum();
        worst = worst.max(rel(sum, 1.0 / (PI * (1.0 - r * r).powi(2))));
    }
    Ok(Check::at_most("bergman-series", worst, 1e-6))
}

fn random_vector(rng: &mut impl Rng, len: usize) -> SpaceVector {
    SpaceVector(DVector::from_fn(len, |_, _| random_complex(rng, 1.0)))
}

/// `|(ξ·f)(z)| ≤ C_{K,p}` for unit-norm `f` and `z` at distance ≥ 0.5 from the boundary.
fn sub_mean_value(ctx: &VerifyContext) -> Result<Check> {
    let mut rng = ctx.rng(21);
    let disk = PolySpace::new(&Domain::unit_disk())?;
    let bidisc = PolySpace::with_degree(&Domain::unit_polydisc(2), 6)?;
    let r = 0.5;
    let mut worst = 0.0f64;
    for trial in 0..200 {
        let (space, p) = match trial % 4 {
            0 => (&disk, 1.0),
            1 => (&disk, 1.5),
            2 => (&disk, 3.0),
            _ => (&bidisc, 2.0),
        };
        let n = space.dim();
        let xi = random_functional(&mut rng, n, 3);
        let f = random_vector(&mut rng, space.len());
        let f = f.scale(c(1.0 / space.lp_norm(&f, p), 0.0));
        let z: Vec<Complex64> = (0..n)
            .map(|_| random_in_disk(&mut rng, c(0.0, 0.0), 0.5))
            .collect();
        let value = space.apply(&xi, &f, &z)?.norm();
        worst = worst.max(value / evaluation_bound(&xi, p, r));
    }
    Ok(Check::at_most("sub-mean-value-bound", worst, 1.0))
}

/// Iterative solver at `p = 2` against the exact path.
fn p2_cross(ctx: &VerifyContext) -> Result<Check> {
    let mut rng = ctx.rng(22);
    let disk = PolySpace::new(&Domain::unit_disk())?;
    let bidisc = PolySpace::new(&Domain::unit_polydisc(2))?;
    let opts = SolverOptions {
        method: Some("irls".into()),
        ..Default::default()
    };
    let mut worst = 0.0f64;
    for trial in 0..20 {
        let space = if trial < 10 { &disk } else { &bidisc };
        let n = space.dim();
        let xi = random_functional(&mut rng, n, 2);
        let z: Vec<Complex64> = (0..n)
            .map(|_| random_in_disk(&mut rng, c(0.0, 0.0), 0.6))
            .collect();
        let a = kernelp_diagonal(space, &xi, &z, 2.0, &opts)?.kernel;
        let b = kernel2_diagonal(space, &xi, &z)?.kernel;
        worst = worst.max(rel(a, b));
    }
    Ok(Check::at_most("p2-cross-path", worst, 1e-9))
}

/// Five random feasible starts reach the same minimizer for `p = 1.5`.
fn uniqueness(ctx: &VerifyContext) -> Result<Check> {
    let mut rng = ctx.rng(23);
    let space = PolySpace::new(&Domain::unit_disk())?;
    let xi = delta(0).with_term(MultiIndex::new(vec![1]), c(0.5, -0.25));
    let z = [c(0.3, 0.2)];
    let row = space.functional_row(&xi, &z)?;
    let constraints = Constraints::single(row.clone(), c(1.0, 0.0));
    let opts = SolverOptions::default();
    let mut minimizers = Vec::new();
    for _ in 0..5 {
        let v = random_vector(&mut rng, space.len());
        let value = row.dot(&v.0);
        let start = v.scale(value.inv());
        minimizers.push(minimize(&space, &constraints, 1.5, Some(&start), &opts)?.coeffs);
    }
    let norm = space.lp_norm(&minimizers[0], 2.0);
    let mut worst = 0.0f64;
    for i in 0..5 {
        for j in i + 1..5 {
            let d = minimizers[i].axpy(c(-1.0, 0.0), &minimizers[j]);
            worst = worst.max(space.lp_norm(&d, 2.0) / norm);
        }
    }
    Ok(Check::at_most("uniqueness-random-starts", worst, 1e-6))
}

/// `m` on the bidisc against the product of per-factor disk values.
fn product_formula() -> Vec<Check> {
    let cases = [
        (delta(0), c(0.2, 0.0), delta(1), c(0.0, -0.1)),
        (
            delta(0).with_term(MultiIndex::new(vec![1]), c(0.5, 0.0)),
            c(0.1, 0.1),
            delta(0),
            c(0.15, 0.0),
        ),
        (delta(1), c(0.0, 0.0), delta(2), c(-0.1, 0.05)),
    ];
    let run = |p: f64| -> Result<f64> {
        let (disk, bidisc) = if p == 2.0 {
            (
                PolySpace::new(&Domain::unit_disk())?,
                PolySpace::new(&Domain::unit_polydisc(2))?,
            )
        } else {
            let small = SpaceOptions::default().degree(10).orders(8, 16);
            (
                PolySpace::with_options(&Domain::unit_disk(), &small)?,
                PolySpace::with_options(&Domain::unit_polydisc(2), &small)?,
            )
        };
        let opts = SolverOptions::default();
        let m = |s: &PolySpace, xi: &Functional, z: &[Complex64]| -> Result<f64> {
            Ok(if p == 2.0 {
                kernel2_diagonal(s, xi, z)?.m
            } else {
                kernelp_diagonal(s, xi, z, p, &opts)?.m
            })
        };
        let mut worst = 0.0f64;
        for (x1, z1, x2, z2) in &cases {
            let joint = m(&bidisc, &x1.tensor(x2), &[*z1, *z2])?;
            worst = worst.max(rel(joint, m(&disk, x1, &[*z1])? * m(&disk, x2, &[*z2])?));
        }
        Ok(worst)
    };
    [
        (2.0, 1e-6, "product-formula-p2"),
        (1.5, 1e-4, "product-formula-p1.5"),
    ]
    .into_iter()
    .map(|(p, tol, name)| guarded(name, || Ok(Check::at_most(name, run(p)?, tol))))
    .collect()
}

/// Reproducing residual and orthogonality of `ξ`-annihilated functions on disk and annulus.
fn reproducing(ctx: &VerifyContext) -> Vec<Check> {
    let run = || -> Result<(f64, f64)> {
        let mut rng = ctx.rng(24);
        let settings = [
            (Domain::unit_disk(), c(0.0, 0.3)),
            (Domain::annulus(0.5, 1.0)?, c(0.75, 0.0)),
        ];
        let xi = delta(0).with_term(MultiIndex::new(vec![1]), c(0.5, 0.0));
        let opts = SolverOptions::default();
        let (mut res, mut orth) = (0.0f64, 0.0f64);
        for (domain, z) in settings {
            let space = PolySpace::new(&domain)?;
            for p in [1.5, 2.0, 3.0] {
                let eval = kernelp_diagonal(&space, &xi, &[z], p, &opts)?;
                for _ in 0..30 {
                    let f = random_vector(&mut rng, space.len());
                    res = res.max(reproducing_residual(&space, &eval, &f)?);
                    let g = annihilated_part(&space, &xi, &[z], &f)?;
                    orth = orth.max(orthogonality_ratio(&space, &eval, &g));
                }
            }
        }
        Ok((res, orth))
    };
    match run() {
        Ok((res, orth)) => vec![
            Check::at_most("reproducing-residual", res, 1e-5),
            Check::at_most("orthogonality-integral", orth, 1e-8),
        ],
        Err(e) => vec![Check::failed("reproducing-residual", e)],
    }
}

/// H-quantity inequalities and the two-sided bounds on random pairs.
fn inequalities(ctx: &VerifyContext) -> Vec<Check> {
    let run = || -> Result<(f64, f64, f64)> {
        let mut rng = ctx.rng(25);
        let space = PolySpace::new(&Domain::unit_disk())?;
        let opts = SolverOptions::default();
        let (mut h_excess, mut lower_ratio, mut upper_ratio) = (f64::NEG_INFINITY, 0.0f64, 0.0f64);
        for p in [1.5, 3.0] {
            for _ in 0..25 {
                let xi = random_functional(&mut rng, 1, 2);
                let z = random_in_disk(&mut rng, c(0.0, 0.0), 0.6);
                let w = random_in_disk(&mut rng, c(0.0, 0.0), 0.6);
                let h = h_quantity(&space, &xi, p, &[z], &[w], &opts)?;
                h_excess = h_excess.max(h.lhs - h.rhs);
                let b = bounds_check(&space, &xi, p, &[z], &opts)?;
                lower_ratio = lower_ratio.max(b.lower / b.kernel);
                upper_ratio = upper_ratio.max(b.kernel / b.upper);
            }
        }
        Ok((h_excess, lower_ratio, upper_ratio))
    };
    match run() {
        Ok((h, lo, up)) => vec![
            Check::at_most("h-inequalities", h, 1e-8),
            Check::at_most("bounds-lower", lo, 1.0),
            Check::at_most("bounds-upper", up, 1.0),
        ],
        Err(e) => vec![Check::failed("h-inequalities", e)],
    }
}

/// `K_{rΔ} > K_{Δ}` strictly, and decreasing in `r`.
fn domain_monotonicity() -> Result<Check> {
    let mut worst = f64::INFINITY;
    for (xi, z, p) in [
        (delta(1), c(0.0, 0.0), 1.5),
        (
            delta(0).with_term(MultiIndex::new(vec![1]), c(1.0, 0.0)),
            c(0.2, 0.0),
            3.0,
        ),
    ] {
        let ks: Vec<f64> = [0.5, 0.7, 0.9, 1.0]
            .iter()
            .map(|&r| {
                kernel(
                    &PolySpace::new(&Domain::disk(c(0.0, 0.0), r)?)?,
                    &xi,
                    &[z],
                    p,
                )
            })
            .collect::<Result<_>>()?;
        for w in ks.windows(2) {
            worst = worst.min(w[0] / w[1] - 1.0);
        }
    }
    Ok(Check::at_least("domain-monotonicity", worst, 1e-6))
}

/// `K_{rΔ}(0.3) ↓ K_Δ(0.3)` along `r = 0.9, 0.99, 0.999`.
fn exhaustion() -> Vec<Check> {
    let run = || -> Result<(f64, f64)> {
        let z = [c(0.3, 0.0)];
        let limit = kernel(&PolySpace::new(&Domain::unit_disk())?, &delta(0), &z, 1.5)?;
        let ks: Vec<f64> = [0.9, 0.99, 0.999]
            .iter()
            .map(|&r| {
                kernel(
                    &PolySpace::new(&Domain::disk(c(0.0, 0.0), r)?)?,
                    &delta(0),
                    &z,
                    1.5,
                )
            })
            .collect::<Result<_>>()?;
        let step = ks
            .windows(2)
            .map(|w| w[0] - w[1])
            .fold(f64::INFINITY, f64::min);
        Ok((step, (ks[2] - limit).abs() / limit))
    };
    match run() {
        Ok((step, gap)) => vec![
            Check::at_least("exhaustion-decreasing", step, 0.0),
            Check::at_most("exhaustion-final-gap", gap, 1e-2),
        ],
        Err(e) => vec![Check::failed("exhaustion-decreasing", e)],
    }
}

/// Circle means of `log K` around interior centers, and the strict excess at the origin.
fn psh(ctx: &VerifyContext) -> Vec<Check> {
    let circle_excess =
        |space: &PolySpace, xi: &Functional, center: Complex64, r: f64, p: f64| -> Result<f64> {
            let m = 16;
            let mean = (0..m)
                .map(|j| {
                    kernel(
                        space,
                        xi,
                        &[center + Complex64::from_polar(r, TAU * j as f64 / m as f64)],
                        p,
                    )
                    .map(f64::ln)
                })
                .sum::<Result<f64>>()?
                / m as f64;
            Ok(mean - kernel(space, xi, &[center], p)?.ln())
        };
    let log_psh = || -> Result<f64> {
        let mut rng = ctx.rng(26);
        let space = PolySpace::new(&Domain::unit_disk())?;
        let xi = delta(0).with_term(MultiIndex::new(vec![1]), c(0.3, 0.4));
        let mut worst = f64::INFINITY;
        for _ in 0..10 {
            let center = random_in_disk(&mut rng, c(0.0, 0.0), 0.6);
            for p in [1.5, 2.0] {
                worst = worst.min(circle_excess(&space, &xi, center, 0.2, p)?);
            }
        }
        Ok(worst)
    };
    let strict = || -> Result<f64> {
        let space = PolySpace::new(&Domain::unit_disk())?;
        circle_excess(&space, &delta(0), c(0.0, 0.0), 0.1, 2.0)
    };
    vec![
        guarded("log-psh-circle-mean", || {
            Ok(Check::at_least("log-psh-circle-mean", log_psh()?, -1e-6))
        }),
        guarded("strict-psh-margin", || {
            Ok(Check::at_least("strict-psh-margin", strict()?, 1e-4))
        }),
    ]
}

/// Least-squares slope of `log K` against `−log δ` near the boundary.
fn boundary_slope() -> Result<Check> {
    let p = 1.5;
    let space = PolySpace::with_degree(&Domain::unit_disk(), 24)?;
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for x in [0.5, 0.6, 0.7, 0.8, 0.9] {
        xs.push(-(1.0f64 - x).ln());
        ys.push(kernel(&space, &delta(0), &[c(x, 0.0)], p)?.ln());
    }
    Ok(Check::at_least(
        "boundary-blow-up-slope",
        least_squares_slope(&xs, &ys),
        p,
    ))
}

pub(crate) fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// Largest difference quotient `|K(z+h) − K(z)|/|h|` over `|z| ≤ 0.5`, `|h| = 10⁻³`.
fn lipschitz(ctx: &VerifyContext) -> Result<Check> {
    let mut rng = ctx.rng(27);
    let space = PolySpace::new(&Domain::unit_disk())?;
    let xi = delta(0).with_term(MultiIndex::new(vec![1]), c(0.5, 0.0));
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let z = random_in_disk(&mut rng, c(0.0, 0.0), 0.5);
        let k0 = kernel(&space, &xi, &[z], 1.5)?;
        for j in 0..4 {
            let h = Complex64::from_polar(1e-3, TAU * j as f64 / 4.0);
            worst = worst.max((kernel(&space, &xi, &[z + h], 1.5)? - k0).abs() / 1e-3);
        }
    }
    Ok(Check::at_most("lipschitz-constant", worst, 1e3))
}
