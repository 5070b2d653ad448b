//! Pluricomplex Green models with closed-form sublevel sets, the Azukawa
//! indicatrix of balanced domains, and kernel sweeps along `a ↦ {G < a}`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::Functional;
use crate::domains::{Domain, Shape};
use crate::error::{Error, Result};
use crate::higher::{higher_kernel_direct, FunctionalFamily, HomogeneousPolynomial};
use crate::kernels::{kernel2_diagonal, kernelp_diagonal};
use crate::output::fmt_num;
use crate::pspace::{PolySpace, SpaceOptions};
use crate::solver::SolverOptions;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GreenKind {
    /// `G(z, 0) = log` of the Minkowski gauge.
    BalancedOrigin,
    /// Unit disk with an arbitrary pole, `G(ζ, z₀) = log|ζ − z₀|/|1 − z̄₀ζ|`.
    MoebiusDisk,
}

#[derive(Clone, Debug)]
pub struct GreenModel {
    base: Domain,
    pole: Vec<Complex64>,
    kind: GreenKind,
}

fn is_balanced_shape(d: &Domain) -> bool {
    match d.shape() {
        Shape::Disk { center, .. } => center.norm() == 0.0,
        Shape::Polydisc { center, .. } | Shape::Ball { center, .. } => {
            center.iter().all(|c| c.norm() == 0.0)
        }
        Shape::Product(f) => f.iter().all(is_balanced_shape),
        Shape::Annulus { .. } | Shape::Cloud { .. } => false,
    }
}

impl GreenModel {
    /// Balanced domain with pole at the origin.
    pub fn balanced(base: &Domain) -> Result<Self> {
        if !is_balanced_shape(base) {
            return Err(Error::InvalidDomain(
                "balanced model needs an origin-centered disk, polydisc or ball".into(),
            ));
        }
        Ok(Self {
            base: base.clone(),
            pole: vec![Complex64::new(0.0, 0.0); base.dim()],
            kind: GreenKind::BalancedOrigin,
        })
    }

    /// Unit disk with pole `z0`.
    pub fn moebius(z0: Complex64) -> Result<Self> {
        if !(z0.norm() < 1.0) {
            return Err(Error::OutsideDomain);
        }
        Ok(Self {
            base: Domain::unit_disk(),
            pole: vec![z0],
            kind: GreenKind::MoebiusDisk,
        })
    }

    /// Picks the Möbius model for off-center poles on the unit disk.
    pub fn for_pole(base: &Domain, pole: &[Complex64]) -> Result<Self> {
        if pole.len() != base.dim() {
            return Err(Error::DimensionMismatch {
                expected: base.dim(),
                found: pole.len(),
            });
        }
        if pole.iter().all(|c| c.norm() == 0.0) {
            return Self::balanced(base);
        }
        if *base == Domain::unit_disk() {
            return Self::moebius(pole[0]);
        }
        Err(Error::Unsupported(
            "off-center poles are modeled on the unit disk only".into(),
        ))
    }

    pub fn base(&self) -> &Domain {
        &self.base
    }

    pub fn pole(&self) -> &[Complex64] {
        &self.pole
    }

    pub fn kind(&self) -> GreenKind {
        self.kind
    }

    /// `{G(·, o) < a}` for `a ≤ 0`.
    pub fn sublevel_domain(&self, a: f64) -> Result<Domain> {
        if !(a <= 0.0) {
            return Err(Error::InvalidInput(format!(
                "sublevel parameter must satisfy a ≤ 0, got {a}"
            )));
        }
        let s = a.exp();
        match self.kind {
            GreenKind::BalancedOrigin => self.base.scale(s),
            GreenKind::MoebiusDisk => {
                let z0 = self.pole[0];
                let r2 = z0.norm_sqr();
                let denom = 1.0 - s * s * r2;
                Domain::disk(z0 * ((1.0 - s * s) / denom), s * (1.0 - r2) / denom)
            }
        }
    }

    /// `I_Ω(o)`, available in closed form for balanced models.
    pub fn azukawa_indicatrix(&self) -> Result<Domain> {
        match self.kind {
            GreenKind::BalancedOrigin => Ok(self.base.clone()),
            GreenKind::MoebiusDisk if self.pole[0].norm() == 0.0 => Ok(self.base.clone()),
            GreenKind::MoebiusDisk => Err(Error::Unsupported(
                "no closed-form indicatrix for an off-center pole".into(),
            )),
        }
    }
}

/// What a sweep evaluates at the pole.
#[derive(Clone, Debug)]
pub enum SweepTarget {
    Functional(Functional),
    Higher(HomogeneousPolynomial),
}

impl SweepTarget {
    pub fn order(&self) -> u32 {
        match self {
            SweepTarget::Functional(xi) => xi.degree().unwrap_or(0),
            SweepTarget::Higher(h) => h.degree(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SweepRow {
    pub a: f64,
    pub kernel: f64,
    pub scaled: f64,
    pub log_kernel: f64,
    pub flag: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SweepTable {
    pub p: f64,
    pub k: u32,
    pub n: usize,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    /// `2n + pk`
    pub fn exponent(&self) -> f64 {
        2.0 * self.n as f64 + self.p * self.k as f64
    }

    pub fn flagged(&self) -> bool {
        self.rows.iter().any(|r| r.flag.is_some())
    }

    pub fn scaled(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.scaled).collect()
    }

    /// Largest drop `scaled[i] − scaled[i+1]` relative to the column maximum (≤ 0 when monotone).
    pub fn max_relative_decrease(&self) -> f64 {
        let s = self.scaled();
        let top = s.iter().cloned().fold(0.0, f64::max);
        s.windows(2)
            .map(|w| (w[0] - w[1]) / top)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn is_non_decreasing(&self, slack: f64) -> bool {
        self.rows.len() < 2 || self.max_relative_decrease() <= slack
    }

    /// Second differences of `log K_a` normalized by the squared step.
    pub fn log_second_differences(&self) -> Vec<f64> {
        self.rows
            .windows(3)
            .map(|w| {
                let h1 = w[1].a - w[0].a;
                let h2 = w[2].a - w[1].a;
                let d1 = (w[1].log_kernel - w[0].log_kernel) / h1;
                let d2 = (w[2].log_kernel - w[1].log_kernel) / h2;
                (d2 - d1) / (0.5 * (h1 + h2))
            })
            .collect()
    }

    /// Raw second differences `log K_{i+1} − 2 log K_i + log K_{i−1}`.
    pub fn log_second_differences_raw(&self) -> Vec<f64> {
        self.rows
            .windows(3)
            .map(|w| w[2].log_kernel - 2.0 * w[1].log_kernel + w[0].log_kernel)
            .collect()
    }

    /// `(max − min)/max` of the scaled column.
    pub fn relative_spread(&self) -> f64 {
        let s = self.scaled();
        let max = s.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = s.iter().cloned().fold(f64::INFINITY, f64::min);
        (max - min) / max.abs()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("a,K,scaled,logK,flag\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                fmt_num(r.a),
                fmt_num(r.kernel),
                fmt_num(r.scaled),
                fmt_num(r.log_kernel),
                r.flag.as_deref().unwrap_or("")
            ));
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("sweep serializes");
        crate::output::round_json(&mut v);
        v
    }
}

#[derive(Clone, Debug, Default)]
pub struct SweepOptions {
    pub space: SpaceOptions,
    pub solver: SolverOptions,
}

/// Kernel at the pole of a single sublevel domain.
pub fn sublevel_kernel(
    g: &GreenModel,
    target: &SweepTarget,
    p: f64,
    a: f64,
    opts: &SweepOptions,
) -> Result<(f64, bool)> {
    let domain = g.sublevel_domain(a)?;
    let space = PolySpace::with_options(&domain, &opts.space)?;
    let eval = match target {
        SweepTarget::Functional(xi) if p == 2.0 && opts.solver.method.is_none() => {
            kernel2_diagonal(&space, xi, g.pole())?
        }
        SweepTarget::Functional(xi) => kernelp_diagonal(&space, xi, g.pole(), p, &opts.solver)?,
        SweepTarget::Higher(h) => higher_kernel_direct(&space, h, g.pole(), p, &opts.solver)?,
    };
    Ok((eval.kernel, eval.flagged()))
}

/// `K_a`, `e^{(2n+pk)a} K_a` and `log K_a` over an ascending grid of `a ≤ 0`.
pub fn sweep(
    g: &GreenModel,
    target: &SweepTarget,
    p: f64,
    a_grid: &[f64],
    opts: &SweepOptions,
) -> Result<SweepTable> {
    if a_grid.is_empty() {
        return Err(Error::InvalidInput("empty a-grid".into()));
    }
    if let Some(a) = a_grid.iter().find(|a| !(**a <= 0.0)) {
        return Err(Error::InvalidInput(format!(
            "a-grid values must satisfy a ≤ 0, got {a}"
        )));
    }
    if a_grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidInput(
            "a-grid must be strictly increasing".into(),
        ));
    }
    let n = g.base.dim();
    let k = target.order();
    let exponent = 2.0 * n as f64 + p * k as f64;
    let rows = a_grid
        .par_iter()
        .map(|&a| match sublevel_kernel(g, target, p, a, opts) {
            Ok((kernel, flagged)) => SweepRow {
                a,
                kernel,
                scaled: (exponent * a).exp() * kernel,
                log_kernel: kernel.ln(),
                flag: flagged.then(|| "solver-flagged".to_string()),
            },
            Err(e) => SweepRow {
                a,
                kernel: f64::NAN,
                scaled: f64::NAN,
                log_kernel: f64::NAN,
                flag: Some(e.to_string()),
            },
        })
        .collect();
    Ok(SweepTable { p, k, n, rows })
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct LimitChain {
    /// `K_{ξ,Ω,p}(o)`
    pub lhs: f64,
    /// Scaled column at the most negative `a`.
    pub limit: f64,
    /// `K^{H,p}_{I_Ω(o)}(o)`
    pub rhs: f64,
    /// Relative gap between the scaled column at the two most negative `a`.
    pub stabilization: f64,
    pub pass: bool,
}

/// `K_{ξ,Ω,p}(o) ≥ lim e^{(2n+pk)a} K_a ≥ K^{H,p}_{I_Ω(o)}(o)` for `ξ ∈ S_H`.
pub fn limit_chain_check(
    g: &GreenModel,
    h: &HomogeneousPolynomial,
    xi: Option<&Functional>,
    p: f64,
    a_grid: &[f64],
    opts: &SweepOptions,
) -> Result<LimitChain> {
    if g.kind != GreenKind::BalancedOrigin {
        return Err(Error::Unsupported(
            "the limit chain needs a balanced model".into(),
        ));
    }
    if !(p > 0.0 && p <= 2.0) {
        return Err(Error::InvalidInput(format!(
            "the limit chain needs 0 < p ≤ 2, got {p}"
        )));
    }
    if a_grid.len() < 2 {
        return Err(Error::InvalidInput(
            "the limit chain needs at least two grid points".into(),
        ));
    }
    let family = FunctionalFamily::new(h);
    let xi = match xi {
        Some(x) if family.contains(x) => x.clone(),
        Some(_) => return Err(Error::InvalidInput("ξ must belong to S_H".into())),
        None => family.member(&vec![Complex64::new(0.0, 0.0); family.free_dim()])?,
    };
    let (lhs, _) = sublevel_kernel(g, &SweepTarget::Functional(xi.clone()), p, 0.0, opts)?;
    let table = sweep(g, &SweepTarget::Functional(xi), p, a_grid, opts)?;
    if table.flagged() {
        return Err(Error::Solver("sweep rows were flagged".into()));
    }
    let limit = table.rows[0].scaled;
    let stabilization = (table.rows[1].scaled - limit).abs() / limit.abs();
    let indicatrix = g.azukawa_indicatrix()?;
    let space = PolySpace::with_options(&indicatrix, &opts.space)?;
    let rhs = higher_kernel_direct(&space, h, g.pole(), p, &opts.solver)?.kernel;
    let tol = 1e-6 * lhs.abs();
    let pass = lhs >= limit - tol && limit - tol >= rhs - 2.0 * tol;
    Ok(LimitChain {
        lhs,
        limit,
        rhs,
        stabilization,
        pass,
    })
}

/// `n` evenly spaced values from `start` to `stop` inclusive.
pub fn linear_grid(start: f64, stop: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![start];
    }
    (0..n)
        .map(|i| start + (stop - start) * i as f64 / (n - 1) as f64)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::MultiIndex;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn sublevel_examples() {
        let g = GreenModel::balanced(&Domain::unit_disk()).unwrap();
        let d = g.sublevel_domain(-1.0).unwrap();
        assert_eq!(d, Domain::disk(c(0.0), (-1.0f64).exp()).unwrap());
        let m = GreenModel::moebius(c(0.5)).unwrap();
        let d = m.sublevel_domain(0.0).unwrap();
        assert_eq!(d, Domain::unit_disk());
        let d = m.sublevel_domain(0.5f64.ln()).unwrap();
        match d.shape() {
            Shape::Disk { center, radius } => {
                assert_relative_eq!(center.re, 0.4, max_relative = 1e-12);
                assert_relative_eq!(*radius, 0.4, max_relative = 1e-12);
            }
            _ => panic!("expected a disk"),
        }
        assert!(m.sublevel_domain(0.1).is_err());
    }

    #[test]
    fn indicatrix_examples() {
        for d in [
            Domain::unit_disk(),
            Domain::unit_polydisc(2),
            Domain::unit_ball(2),
        ] {
            assert_eq!(
                GreenModel::balanced(&d)
                    .unwrap()
                    .azukawa_indicatrix()
                    .unwrap(),
                d
            );
        }
        assert!(GreenModel::moebius(c(0.5))
            .unwrap()
            .azukawa_indicatrix()
            .is_err());
        assert!(GreenModel::balanced(&Domain::annulus(0.5, 1.0).unwrap()).is_err());
    }

    #[test]
    fn balanced_sweep_is_constant() {
        let g = GreenModel::balanced(&Domain::unit_disk()).unwrap();
        let grid = linear_grid(-2.0, 0.0, 9);
        for (k, p) in [(0u32, 2.0), (1, 1.5)] {
            let xi = Functional::delta(MultiIndex::new(vec![k]));
            let t = sweep(
                &g,
                &SweepTarget::Functional(xi),
                p,
                &grid,
                &SweepOptions::default(),
            )
            .unwrap();
            let exact = (p * k as f64 + 2.0) / (2.0 * PI);
            assert!(t.relative_spread() < 1e-7, "{}", t.relative_spread());
            assert_relative_eq!(t.rows[8].kernel, exact, max_relative = 1e-6);
            assert_relative_eq!(t.rows[0].scaled, exact, max_relative = 1e-6);
        }
    }

    #[test]
    fn moebius_sweep_shape() {
        let g = GreenModel::moebius(c(0.5)).unwrap();
        let grid = linear_grid(-3.0, 0.0, 7);
        let opts = SweepOptions {
            space: SpaceOptions::default().degree(30),
            ..Default::default()
        };
        let xi = Functional::delta(MultiIndex::new(vec![0]));
        let t = sweep(&g, &SweepTarget::Functional(xi), 2.0, &grid, &opts).unwrap();
        assert!(t.is_non_decreasing(1e-8));
        assert!(t.log_second_differences().iter().all(|d| *d >= -1e-6));
        let exact = 1.0 / (PI * 0.75f64.powi(2));
        assert_relative_eq!(t.rows[6].kernel, exact, max_relative = 1e-8);
    }

    #[test]
    fn limit_chain_examples() {
        let g = GreenModel::balanced(&Domain::unit_disk()).unwrap();
        let grid = linear_grid(-3.0, 0.0, 7);
        let opts = SweepOptions::default();
        let r =
            limit_chain_check(&g, &HomogeneousPolynomial::one(1), None, 2.0, &grid, &opts).unwrap();
        assert!(r.pass);
        assert_relative_eq!(r.lhs, 1.0 / PI, max_relative = 1e-10);
        assert_relative_eq!(r.rhs, 1.0 / PI, max_relative = 1e-10);
        let z = HomogeneousPolynomial::monomial(MultiIndex::new(vec![1]), c(1.0)).unwrap();
        let r = limit_chain_check(&g, &z, None, 2.0, &grid, &opts).unwrap();
        assert!(r.pass);
        assert_relative_eq!(r.limit, 2.0 / PI, max_relative = 1e-8);
        assert!(limit_chain_check(
            &GreenModel::moebius(c(0.5)).unwrap(),
            &z,
            None,
            2.0,
            &grid,
            &opts
        )
        .is_err());
    }

    #[test]
    fn sweep_validation_and_csv() {
        let g = GreenModel::balanced(&Domain::unit_disk()).unwrap();
        let xi = SweepTarget::Functional(Functional::delta(MultiIndex::zeros(1)));
        let opts = SweepOptions::default();
        assert!(sweep(&g, &xi, 2.0, &[-1.0, 0.1], &opts).is_err());
        assert!(sweep(&g, &xi, 2.0, &[0.0, -1.0], &opts).is_err());
        let t = sweep(&g, &xi, 2.0, &[-1.0, 0.0], &opts).unwrap();
        let csv = t.to_csv();
        assert!(csv.starts_with("a,K,scaled,logK,flag\n-1,"));
        assert_eq!(csv.lines().count(), 3);
    }
}
