use std::f64::consts::PI;

use num_complex::Complex64;

use super::{c, guarded, rel, Check, Suite, VerifyContext};
use crate::algebra::MultiIndex;
use crate::domains::{build_quadrature, Domain, Quadrature, QuadratureOrders};
use crate::kernels::ball_monomial_integral;
use crate::Result;

pub struct QuadratureSuite;

impl Suite for QuadratureSuite {
    fn name(&self) -> &'static str {
        "quadrature"
    }

    fn run(&self, _ctx: &VerifyContext) -> Vec<Check> {
        vec![
            guarded("disk-radial-moments", disk_radial_moments),
            guarded("disk-mixed-moments", disk_mixed_moments),
            guarded("volume-identities", volumes),
            guarded("ball-moments", ball_moments),
            guarded("scale-volume", scale_volume),
            guarded("product-volume", product_volume),
        ]
    }
}

fn default_rule(d: &Domain) -> Result<Quadrature> {
    let o = QuadratureOrders::default_for_dim(d.dim());
    build_quadrature(d, o.radial, o.angular)
}

/// `∫_Δ |z|^{2k} = π/(k+1)` for `k ≤ 20`.
fn disk_radial_moments() -> Result<Check> {
    let q = build_quadrature(&Domain::unit_disk(), 32, 64)?;
    let worst = (0..=20)
        .map(|k| {
            rel(
                q.integrate(|z| z[0].norm_sqr().powi(k)),
                PI / (k as f64 + 1.0),
            )
        })
        .fold(0.0, f64::max);
    Ok(Check::at_most("disk-radial-moments", worst, 1e-10))
}

/// `|∫_Δ z^j z̄^k| = 0` for `j ≠ k ≤ 20`.
fn disk_mixed_moments() -> Result<Check> {
    let q = build_quadrature(&Domain::unit_disk(), 32, 64)?;
    let mut worst = 0.0f64;
    for j in 0..=20 {
        for k in 0..=20 {
            if j == k {
                continue;
            }
            let s: Complex64 = q
                .nodes()
                .zip(q.weights())
                .map(|(z, w)| z[0].powu(j) * z[0].conj().powu(k) * *w)
                .sum();
            worst = worst.max(s.norm());
        }
    }
    Ok(Check::at_most("disk-mixed-moments", worst, 1e-12))
}

fn volumes() -> Result<Check> {
    let domains = [
        Domain::unit_disk(),
        Domain::disk(c(0.3, -0.2), 0.4)?,
        Domain::polydisc(vec![c(0.0, 0.0); 2], vec![1.0, 0.5])?,
        Domain::unit_ball(2),
        Domain::unit_ball(3),
        Domain::annulus(0.5, 1.0)?,
        Domain::unit_disk().product(&Domain::unit_ball(2))?,
    ];
    let exact = [
        PI,
        PI * 0.16,
        PI * PI * 0.25,
        PI * PI / 2.0,
        PI.powi(3) / 6.0,
        PI * 0.75,
        PI * PI * PI / 2.0,
    ];
    let mut worst = 0.0f64;
    for (d, v) in domains.iter().zip(exact) {
        worst = worst.max(rel(default_rule(d)?.total_weight(), v));
    }
    Ok(Check::at_most("volume-identities", worst, 1e-10))
}

/// `∫_{B} |z₁|^{2a}|z₂|^{2b}` against the Gamma-function closed form.
fn ball_moments() -> Result<Check> {
    let q = default_rule(&Domain::unit_ball(2))?;
    let mut worst = 0.0f64;
    for (a, b) in [(0u32, 0u32), (1, 0), (1, 1), (2, 1), (3, 2)] {
        let num = q.integrate(|z| z[0].norm_sqr().powi(a as i32) * z[1].norm_sqr().powi(b as i32));
        worst = worst.max(rel(
            num,
            ball_monomial_integral(&MultiIndex::new(vec![a, b]), 2.0, 1.0),
        ));
    }
    Ok(Check::at_most("ball-moments", worst, 1e-10))
}

/// Volume of `t·Ω` equals `t^{2n}` times the volume of `Ω`.
fn scale_volume() -> Result<Check> {
    let mut worst = 0.0f64;
    for d in [
        Domain::unit_disk(),
        Domain::unit_polydisc(2),
        Domain::unit_ball(2),
    ] {
        let base = default_rule(&d)?.total_weight();
        for t in [0.3, 0.75, 2.0] {
            let scaled = default_rule(&d.scale(t)?)?.total_weight();
            worst = worst.max(rel(scaled, t.powi(2 * d.dim() as i32) * base));
        }
    }
    Ok(Check::at_most("scale-volume", worst, 1e-9))
}

fn product_volume() -> Result<Check> {
    let a = Domain::disk(c(0.0, 0.0), 0.7)?;
    let b = Domain::unit_ball(2);
    let mut worst = 0.0f64;
    for (x, y) in [(&a, &a), (&a, &b)] {
        let v = default_rule(&x.product(y)?)?.total_weight();
        let vx = default_rule(x)?.total_weight();
        let vy = default_rule(y)?.total_weight();
        worst = worst.max(rel(v, vx * vy));
    }
    Ok(Check::at_most("product-volume", worst, 1e-9))
}
