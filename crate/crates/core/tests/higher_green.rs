use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;
use xibergman::algebra::{Functional, MultiIndex};
use xibergman::domains::Domain;
use xibergman::green::{
    limit_chain_check, linear_grid, sweep, GreenModel, SweepOptions, SweepTarget,
};
use xibergman::higher::{
    higher_kernel_direct, higher_kernel_via_inf, minimizing_xi_p2, FunctionalFamily,
    HomogeneousPolynomial, ViaInfOptions,
};
use xibergman::kernels::{kernel2_diagonal, kernelp_diagonal};
use xibergman::pspace::{PolySpace, SpaceOptions};
use xibergman::solver::SolverOptions;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn zk(k: u32) -> HomogeneousPolynomial {
    HomogeneousPolynomial::monomial(MultiIndex::new(vec![k]), c(1.0, 0.0)).unwrap()
}

fn delta(k: u32) -> Functional {
    Functional::delta(MultiIndex::new(vec![k]))
}

#[test]
fn higher_kernel_routes_agree_at_p2() {
    let space = PolySpace::new(&Domain::unit_disk()).unwrap();
    let opts = SolverOptions::default();
    for k in [1, 2] {
        for z in [c(0.0, 0.0), c(0.3, 0.0)] {
            let h = zk(k);
            let direct = higher_kernel_direct(&space, &h, &[z], 2.0, &opts)
                .unwrap()
                .kernel;
            let inf =
                higher_kernel_via_inf(&space, &h, &[z], 2.0, &opts, &ViaInfOptions::default())
                    .unwrap()
                    .kernel;
            let star = kernel2_diagonal(&space, &minimizing_xi_p2(&space, &h, &[z]).unwrap(), &[z])
                .unwrap()
                .kernel;
            assert!(
                rel(inf, direct) <= 1e-7 && rel(star, direct) <= 1e-7,
                "k={k} z={z}"
            );
        }
    }
}

/// `P_H f(0) = f^{(k)}(0)` for `H = z^k`, attained by `z^k/k!`, so `K^{H,p}(0) = (pk+2) k!^p/(2π)`.
#[test]
fn higher_kernel_origin_closed_form() {
    let space = PolySpace::new(&Domain::unit_disk()).unwrap();
    for k in [1u32, 2] {
        let kf: f64 = (1..=k).map(f64::from).product();
        for p in [1.5, 2.0] {
            let direct =
                higher_kernel_direct(&space, &zk(k), &[c(0.0, 0.0)], p, &SolverOptions::default())
                    .unwrap();
            let exact = (p * k as f64 + 2.0) * kf.powf(p) / (2.0 * PI);
            assert!(
                rel(direct.kernel, exact) <= 1e-4,
                "k={k} p={p}: {}",
                direct.kernel
            );
        }
    }
}

#[test]
fn higher_kernel_is_below_every_member() {
    let space = PolySpace::new(&Domain::unit_disk()).unwrap();
    let h = zk(2);
    let family = FunctionalFamily::new(&h);
    let z = [c(0.3, 0.0)];
    let opts = SolverOptions::default();
    let direct = higher_kernel_direct(&space, &h, &z, 1.5, &opts)
        .unwrap()
        .kernel;
    for free in [
        [c(0.0, 0.0), c(0.0, 0.0)],
        [c(1.0, -0.5), c(0.2, 0.0)],
        [c(-2.0, 0.0), c(0.0, 3.0)],
    ] {
        let xi = family.member(&free).unwrap();
        assert!(family.contains(&xi));
        let k = kernelp_diagonal(&space, &xi, &z, 1.5, &opts)
            .unwrap()
            .kernel;
        assert!(direct <= k * (1.0 + 1e-8));
    }
}

/// Points on the boundary of the sublevel disk satisfy `|φ(z)| = e^a` for the disk automorphism `φ`.
#[test]
fn moebius_sublevel_disk() {
    let z0 = c(0.5, 0.2);
    let g = GreenModel::moebius(z0).unwrap();
    for a in [-2.0, -0.5, -0.01] {
        let d = g.sublevel_domain(a).unwrap();
        let (center, radius) = (d.center()[0], d.axis_scales()[0]);
        for j in 0..8 {
            let z = center + Complex64::from_polar(radius, j as f64);
            let phi = (z - z0) / (c(1.0, 0.0) - z0.conj() * z);
            assert!((phi.norm() - f64::exp(a)).abs() <= 1e-12, "a={a}");
        }
    }
    assert!(g.sublevel_domain(0.1).is_err());
}

#[test]
fn balanced_disk_sweep_matches_closed_form() {
    let g = GreenModel::balanced(&Domain::unit_disk()).unwrap();
    let grid = linear_grid(-2.0, 0.0, 9);
    let t = sweep(
        &g,
        &SweepTarget::Functional(delta(0)),
        2.0,
        &grid,
        &SweepOptions::default(),
    )
    .unwrap();
    for r in &t.rows {
        assert!(rel(r.scaled, 1.0 / PI) <= 1e-7);
        assert!(rel(r.kernel, (-2.0 * r.a).exp() / PI) <= 1e-7);
    }
}

#[test]
fn moebius_sweeps_have_the_predicted_shape() {
    let g = GreenModel::moebius(c(0.5, 0.0)).unwrap();
    let grid = linear_grid(-3.0, 0.0, 13);
    let opts = SweepOptions {
        space: SpaceOptions::default().degree(30),
        ..Default::default()
    };
    for p in [1.5, 2.0] {
        let flat = sweep(&g, &SweepTarget::Functional(delta(0)), p, &grid, &opts).unwrap();
        assert!(flat.relative_spread() <= 1e-7, "p={p}");
        let t = sweep(&g, &SweepTarget::Functional(delta(1)), p, &grid, &opts).unwrap();
        assert!(!t.flagged());
        assert!(t.is_non_decreasing(1e-8), "p={p}");
        assert!(t.log_second_differences_raw().iter().all(|&d| d >= -1e-6));
        let cap = t.rows.last().unwrap().scaled;
        assert!(t.rows.iter().all(|r| r.scaled <= cap * (1.0 + 1e-6)));
    }
}

#[test]
fn limit_chain_on_disk() {
    let g = GreenModel::balanced(&Domain::unit_disk()).unwrap();
    let grid = linear_grid(-3.0, 0.0, 7);
    for h in [HomogeneousPolynomial::one(1), zk(1)] {
        for p in [1.5, 2.0] {
            let r = limit_chain_check(&g, &h, None, p, &grid, &SweepOptions::default()).unwrap();
            assert!(r.pass, "{r:?}");
            assert!(r.stabilization <= 1e-4);
        }
    }
}

#[test]
fn sweep_validation() {
    let g = GreenModel::moebius(c(0.5, 0.0)).unwrap();
    let target = SweepTarget::Functional(delta(0));
    let opts = SweepOptions::default();
    assert!(sweep(&g, &target, 2.0, &[-1.0, 0.1], &opts).is_err());
    assert!(sweep(&g, &target, 2.0, &[-0.5, -1.0], &opts).is_err());
    assert!(sweep(&g, &target, 2.0, &[], &opts).is_err());
    let t = sweep(&g, &target, 2.0, &[-1.0, -0.5], &opts).unwrap();
    let csv = t.to_csv();
    assert!(csv.starts_with("a,K,scaled,logK,flag"));
    assert_eq!(csv.lines().count(), 3);
}

#[test]
fn balanced_model_rejects_off_center_domains() {
    assert!(GreenModel::balanced(&Domain::disk(c(0.2, 0.0), 0.5).unwrap()).is_err());
    assert!(GreenModel::balanced(&Domain::annulus(0.5, 1.0).unwrap()).is_err());
    assert!(GreenModel::moebius(c(0.5, 0.0))
        .unwrap()
        .azukawa_indicatrix()
        .is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    /// `δ0` sweeps are flat on the Möbius model for every pole.
    #[test]
    fn delta0_moebius_sweep_is_flat(x in -0.6f64..0.6, y in -0.6f64..0.6) {
        let g = GreenModel::moebius(c(x, y)).unwrap();
        let opts = SweepOptions { space: SpaceOptions::default().degree(30), ..Default::default() };
        let t = sweep(&g, &SweepTarget::Functional(delta(0)), 2.0, &[-2.0, -1.0, 0.0], &opts).unwrap();
        prop_assert!(t.relative_spread() <= 1e-7);
    }
}
