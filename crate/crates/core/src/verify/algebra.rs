use std::cmp::Ordering;

use num_complex::Complex64;
use rand::Rng;

use super::{c, guarded, random_complex, random_functional, Check, Suite, VerifyContext};
use crate::algebra::{functional_apply, indices_up_to, prec_compare, MultiIndex, PolyCoeffs};

pub struct AlgebraSuite;

impl Suite for AlgebraSuite {
    fn name(&self) -> &'static str {
        "algebra"
    }

    fn run(&self, ctx: &VerifyContext) -> Vec<Check> {
        vec![
            guarded("prec-total-order", || Ok(prec_total_order())),
            guarded("functional-linearity", || linearity(ctx)),
            guarded("taylor-shift-round-trip", || Ok(round_trip(ctx))),
            guarded("witness-identity", || witness_identity(ctx)),
        ]
    }
}

/// Violations of antisymmetry, transitivity and trichotomy, exhaustively for n ≤ 3, degree ≤ 4.
fn prec_total_order() -> Check {
    let mut violations = 0usize;
    for n in 1..=3 {
        let all = indices_up_to(n, 4);
        let cmp = |a: &MultiIndex, b: &MultiIndex| prec_compare(a, b).expect("same dimension");
        for a in &all {
            for b in &all {
                let ab = cmp(a, b);
                if ab != cmp(b, a).reverse() || ((ab == Ordering::Equal) != (a == b)) {
                    violations += 1;
                }
                if ab != Ordering::Less {
                    continue;
                }
                for d in &all {
                    if cmp(b, d) == Ordering::Less && cmp(a, d) != Ordering::Less {
                        violations += 1;
                    }
                }
            }
        }
    }
    Check::at_most("prec-total-order", violations as f64, 0.0)
}

fn random_poly(rng: &mut impl Rng, dim: usize, degree: u32, center: Vec<Complex64>) -> PolyCoeffs {
    let terms: Vec<_> = indices_up_to(dim, degree)
        .into_iter()
        .map(|a| (a, random_complex(rng, 1.0)))
        .collect();
    PolyCoeffs::from_terms(center, terms).expect("matching dimension")
}

fn linearity(ctx: &VerifyContext) -> crate::Result<Check> {
    let mut rng = ctx.rng(11);
    let mut worst = 0.0f64;
    for trial in 0..50 {
        let dim = 1 + trial % 3;
        let xi = random_functional(&mut rng, dim, 3);
        let zero = vec![c(0.0, 0.0); dim];
        let f = random_poly(&mut rng, dim, 4, zero.clone());
        let g = random_poly(&mut rng, dim, 4, zero);
        let (a, b) = (random_complex(&mut rng, 2.0), random_complex(&mut rng, 2.0));
        let z: Vec<Complex64> = (0..dim).map(|_| random_complex(&mut rng, 0.8)).collect();
        let lhs = functional_apply(&xi, &f.linear_combination(a, &g, b), &z)?;
        let xf = functional_apply(&xi, &f, &z)?;
        let xg = functional_apply(&xi, &g, &z)?;
        let rhs = a * xf + b * xg;
        let scale = (a * xf).norm() + (b * xg).norm();
        worst = worst.max((lhs - rhs).norm() / scale.max(f64::MIN_POSITIVE));
    }
    Ok(Check::at_most("functional-linearity", worst, 1e-12))
}

/// Shift to `c` and back, error relative to `κ = Σ|a_β|(1 + |c|)^{|β|}`.
fn round_trip(ctx: &VerifyContext) -> Check {
    let mut rng = ctx.rng(12);
    let mut worst = 0.0f64;
    for trial in 0..40 {
        let dim = 1 + trial % 2;
        let degree = if dim == 1 { 20 } else { 12 };
        let zero = vec![c(0.0, 0.0); dim];
        let f = random_poly(&mut rng, dim, degree, zero.clone());
        let shift: Vec<Complex64> = (0..dim)
            .map(|_| super::random_in_disk(&mut rng, c(0.0, 0.0), 2.0))
            .collect();
        let cn = shift.iter().map(|s| s.norm()).fold(0.0, f64::max);
        let back = f.taylor_shift(&shift).taylor_shift(&zero);
        let kappa: f64 = f
            .terms()
            .map(|(a, v)| v.norm() * (1.0 + cn).powi(a.degree() as i32))
            .sum();
        let err = f
            .terms()
            .map(|(a, v)| (back.coefficient(a) - v).norm())
            .fold(0.0, f64::max);
        worst = worst.max(err / kappa);
    }
    Check::at_most("taylor-shift-round-trip", worst, 1e-12)
}

/// `ξ·(z − z₀)^{α₀}(z₀) = ξ_{α₀}` with zero error.
fn witness_identity(ctx: &VerifyContext) -> crate::Result<Check> {
    let mut rng = ctx.rng(13);
    let mut worst = 0.0f64;
    for trial in 0..50 {
        let dim = 1 + trial % 3;
        let xi = random_functional(&mut rng, dim, 4);
        let z0: Vec<Complex64> = (0..dim).map(|_| random_complex(&mut rng, 1.0)).collect();
        for (alpha, coeff) in xi.terms() {
            let w = PolyCoeffs::monomial(z0.clone(), alpha.clone(), c(1.0, 0.0));
            worst = worst.max((functional_apply(&xi, &w, &z0)? - coeff).norm());
        }
    }
    Ok(Check::at_most("witness-identity", worst, 0.0))
}
