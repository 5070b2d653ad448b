use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;
use xibergman::algebra::{Functional, MultiIndex};
use xibergman::domains::Domain;
use xibergman::kernels::{
    annihilated_part, bounds_check, h_quantity, kernel2_diagonal, kernelp_diagonal,
    orthogonality_ratio, reproducing_residual,
};
use xibergman::pspace::{PolySpace, SpaceOptions, SpaceVector};
use xibergman::solver::SolverOptions;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn delta(k: u32) -> Functional {
    Functional::delta(MultiIndex::new(vec![k]))
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn disk() -> PolySpace {
    PolySpace::new(&Domain::unit_disk()).unwrap()
}

fn kernel(space: &PolySpace, xi: &Functional, z: &[Complex64], p: f64) -> f64 {
    kernelp_diagonal(space, xi, z, p, &SolverOptions::default())
        .unwrap()
        .kernel
}

/// `∫_Δ |z|^{pk} = 2π/(pk+2)`, attained by `z^k`, so `K = (pk+2)/(2π)`.
#[test]
fn disk_origin_closed_form() {
    let space = disk();
    for k in 0..=2u32 {
        let exact = |p: f64| (p * k as f64 + 2.0) / (2.0 * PI);
        let k2 = kernel2_diagonal(&space, &delta(k), &[c(0.0, 0.0)])
            .unwrap()
            .kernel;
        assert!(rel(k2, exact(2.0)) <= 1e-9, "k={k} p=2: {k2}");
        for p in [1.0, 1.5, 3.0] {
            let kp = kernel(&space, &delta(k), &[c(0.0, 0.0)], p);
            assert!(rel(kp, exact(p)) <= 1e-4, "k={k} p={p}: {kp}");
        }
    }
}

/// Bergman kernels of the disk, bidisc and ball on the diagonal.
#[test]
fn p2_bergman_kernels() {
    let z = c(0.4, -0.3);
    let k = kernel2_diagonal(&disk(), &delta(0), &[z]).unwrap().kernel;
    assert!(rel(k, 1.0 / (PI * (1.0 - z.norm_sqr()).powi(2))) <= 1e-6);

    let w = [c(0.3, 0.1), c(-0.2, 0.25)];
    let xi0 = Functional::delta(MultiIndex::zeros(2));
    let bidisc = PolySpace::new(&Domain::unit_polydisc(2)).unwrap();
    let exact: f64 = w
        .iter()
        .map(|x| 1.0 / (PI * (1.0 - x.norm_sqr()).powi(2)))
        .product();
    assert!(rel(kernel2_diagonal(&bidisc, &xi0, &w).unwrap().kernel, exact) <= 1e-6);

    let ball = PolySpace::new(&Domain::unit_ball(2)).unwrap();
    let r2: f64 = w.iter().map(|x| x.norm_sqr()).sum();
    let exact = 2.0 / (PI * PI * (1.0 - r2).powi(3));
    assert!(rel(kernel2_diagonal(&ball, &xi0, &w).unwrap().kernel, exact) <= 1e-4);
}

/// `z^n` are orthogonal on the annulus, so `K = Σ_n |z|^{2n}/‖z^n‖²` over the included exponents.
#[test]
fn annulus_laurent_series() {
    let (r, z) = (0.5f64, c(0.45, 0.6));
    let space = PolySpace::new(&Domain::annulus(r, 1.0).unwrap()).unwrap();
    assert!(space.is_laurent());
    let exact: f64 = (0..space.len())
        .map(|i| {
            let n = space.exponents(i)[0];
            let norm2 = if n == -1 {
                2.0 * PI * (1.0 / r).ln()
            } else {
                let e = 2.0 * n as f64 + 2.0;
                2.0 * PI * (1.0 - r.powf(e)) / e
            };
            z.norm().powf(2.0 * n as f64) / norm2
        })
        .sum();
    let k = kernel2_diagonal(&space, &delta(0), &[z]).unwrap().kernel;
    assert!(rel(k, exact) <= 1e-9, "{k} vs {exact}");
}

#[test]
fn truncation_is_monotone() {
    let z = [c(0.5, 0.2)];
    let xi = delta(0).with_term(MultiIndex::new(vec![1]), c(0.3, 0.0));
    let mut last = 0.0;
    for d in [4, 8, 12, 16, 20] {
        let space = PolySpace::with_degree(&Domain::unit_disk(), d).unwrap();
        let k = kernel2_diagonal(&space, &xi, &z).unwrap().kernel;
        assert!(k >= last * (1.0 - 1e-12), "D={d}");
        last = k;
    }
}

#[test]
fn domain_monotonicity() {
    let z = [c(0.2, 0.1)];
    let small = PolySpace::new(&Domain::disk(c(0.0, 0.0), 0.8).unwrap()).unwrap();
    for p in [1.5, 2.0, 3.0] {
        assert!(kernel(&small, &delta(1), &z, p) > kernel(&disk(), &delta(1), &z, p));
    }
}

/// `K_{δ0,p}(z) ≤ 1/(π δ(z)²)` by the sub-mean-value property.
#[test]
fn sub_mean_value() {
    let space = disk();
    for x in [0.0, 0.3, 0.6] {
        for p in [1.0, 1.5, 2.0, 4.0] {
            let z = [c(x, 0.0)];
            let bound = 1.0 / (PI * (1.0 - x).powi(2));
            assert!(kernel(&space, &delta(0), &z, p) <= bound);
        }
    }
}

/// `K_{ξ,p,Δ×Δ} = K_{ξ1,p,Δ} K_{ξ2,p,Δ}` for `ξ = ξ1 ⊗ ξ2`.
#[test]
fn product_formula() {
    let small = SpaceOptions::default().degree(10).orders(8, 16);
    let d = PolySpace::with_options(&Domain::unit_disk(), &small).unwrap();
    let b = PolySpace::with_options(&Domain::unit_polydisc(2), &small).unwrap();
    let (x1, x2) = (
        delta(0).with_term(MultiIndex::new(vec![1]), c(0.5, 0.0)),
        delta(1),
    );
    let (z1, z2) = (c(0.1, 0.1), c(0.0, -0.15));
    for p in [1.5, 2.0] {
        let joint = kernel(&b, &x1.tensor(&x2), &[z1, z2], p);
        let split = kernel(&d, &x1, &[z1], p) * kernel(&d, &x2, &[z2], p);
        assert!(rel(joint, split) <= 1e-4, "p={p}");
    }
}

#[test]
fn reproducing_formula_and_orthogonality() {
    let space = disk();
    let z = [c(0.0, 0.3)];
    let xi = delta(0).with_term(MultiIndex::new(vec![1]), c(0.5, 0.0));
    let f = SpaceVector(
        (0..space.len())
            .map(|i| c(1.0 / (1.0 + i as f64), 0.5 - 0.1 * i as f64))
            .collect::<Vec<_>>()
            .into(),
    );
    for p in [1.5, 2.0, 3.0] {
        let eval = kernelp_diagonal(&space, &xi, &z, p, &SolverOptions::default()).unwrap();
        assert!(
            reproducing_residual(&space, &eval, &f).unwrap() <= 1e-5,
            "p={p}"
        );
        let g = annihilated_part(&space, &xi, &z, &f).unwrap();
        assert!(orthogonality_ratio(&space, &eval, &g) <= 1e-8, "p={p}");
    }
}

#[test]
fn h_inequalities_and_bounds() {
    let space = disk();
    let xi = delta(1);
    let opts = SolverOptions::default();
    for p in [1.5, 3.0] {
        let h = h_quantity(&space, &xi, p, &[c(0.2, 0.1)], &[c(-0.3, 0.4)], &opts).unwrap();
        assert!(h.holds(1e-8), "p={p}: {h:?}");
        for z in [c(0.0, 0.0), c(0.5, -0.5)] {
            assert!(
                bounds_check(&space, &xi, p, &[z], &opts).unwrap().holds(),
                "p={p} z={z}"
            );
        }
    }
}

/// `log K` at a center stays below its mean over a surrounding circle.
#[test]
fn log_kernel_is_subharmonic() {
    let space = disk();
    let xi = delta(0).with_term(MultiIndex::new(vec![1]), c(0.0, 0.4));
    for p in [1.5, 2.0] {
        let center = c(0.2, -0.1);
        let at = kernel(&space, &xi, &[center], p).ln();
        let mean = (0..12)
            .map(|j| {
                let t = 2.0 * PI * j as f64 / 12.0;
                kernel(&space, &xi, &[center + Complex64::from_polar(0.2, t)], p).ln()
            })
            .sum::<f64>()
            / 12.0;
        assert!(mean - at >= -1e-6, "p={p}");
    }
}

#[test]
fn boundary_blow_up() {
    let space = PolySpace::with_degree(&Domain::unit_disk(), 24).unwrap();
    let pts: Vec<(f64, f64)> = [0.5f64, 0.6, 0.7, 0.8, 0.9]
        .iter()
        .map(|&x| {
            (
                -(1.0 - x).ln(),
                kernel(&space, &delta(0), &[c(x, 0.0)], 1.5).ln(),
            )
        })
        .collect();
    let n = pts.len() as f64;
    let (mx, my) = (
        pts.iter().map(|p| p.0).sum::<f64>() / n,
        pts.iter().map(|p| p.1).sum::<f64>() / n,
    );
    let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
        / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    assert!(slope >= 1.5, "slope {slope}");
}

#[test]
fn random_starts_agree() {
    let space = disk();
    let xi = delta(0).with_term(MultiIndex::new(vec![1]), c(0.5, -0.25));
    let z = [c(0.3, 0.2)];
    let irls = kernel(&space, &xi, &z, 1.5);
    let opts = SolverOptions {
        method: Some("multistart".into()),
        ..Default::default()
    };
    let multi = kernelp_diagonal(&space, &xi, &z, 1.5, &opts)
        .unwrap()
        .kernel;
    assert!(rel(multi, irls) <= 1e-6);
}

#[test]
fn invalid_inputs() {
    let space = disk();
    assert!(kernel2_diagonal(&space, &Functional::zero(1), &[c(0.0, 0.0)]).is_err());
    assert!(kernel2_diagonal(&space, &delta(0), &[c(1.2, 0.0)]).is_err());
    assert!(kernel2_diagonal(&space, &delta(0), &[c(0.0, 0.0), c(0.0, 0.0)]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn p2_paths_agree(re in -0.5f64..0.5, im in -0.5f64..0.5, a in -1.0f64..1.0, b in -1.0f64..1.0) {
        let space = disk();
        let xi = delta(0).with_term(MultiIndex::new(vec![1]), c(a, b));
        let z = [c(re, im)];
        let exact = kernel2_diagonal(&space, &xi, &z).unwrap().kernel;
        let opts = SolverOptions { method: Some("irls".into()), ..Default::default() };
        let irls = kernelp_diagonal(&space, &xi, &z, 2.0, &opts).unwrap().kernel;
        prop_assert!(rel(irls, exact) <= 1e-9);
    }

    #[test]
    fn kernel_is_rotation_invariant(r in 0.0f64..0.7, t in 0.0f64..6.28, j in 1usize..64, p in 1.2f64..3.0) {
        let space = disk();
        let a = kernel(&space, &delta(1), &[c(r, 0.0)], p);
        // Rotations by the node spacing map the rule onto itself.
        let step = 2.0 * PI * j as f64 / space.quadrature().angular_order as f64;
        let on_grid = kernel(&space, &delta(1), &[Complex64::from_polar(r, step)], p);
        prop_assert!(rel(a, on_grid) <= 1e-9);
        let off_grid = kernel(&space, &delta(1), &[Complex64::from_polar(r, t)], p);
        prop_assert!(rel(a, off_grid) <= 1e-4);
    }
}
