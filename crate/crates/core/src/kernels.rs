//! `m_{ξ,p}`, `K_{ξ,p}`, minimizers, off-diagonal kernels, the reproducing
//! formula and the `H_{ξ,p}` inequalities.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;
use statrs::function::gamma::gamma;

use crate::algebra::{Functional, MultiIndex, PolyCoeffs};
use crate::error::{Error, Result};
use crate::pspace::{lp_sum, PolySpace, SpaceVector};
use crate::solver::{self, Constraints, Diagnostics, SolverOptions};

#[derive(Clone, Debug)]
pub struct KernelEvaluation {
    /// `m_{ξ,p}(z)`
    pub m: f64,
    /// `K_{ξ,p}(z) = m^{−p}`
    pub kernel: f64,
    pub p: f64,
    pub z: Vec<Complex64>,
    pub xi: Functional,
    pub degree: u32,
    /// `m_{ξ,p}(·,z)`, normalized by `(ξ·f)(z) = 1`.
    pub minimizer: SpaceVector,
    pub diagnostics: Diagnostics,
}

impl KernelEvaluation {
    fn from_objective(
        objective: f64,
        p: f64,
        z: &[Complex64],
        xi: &Functional,
        space: &PolySpace,
        minimizer: SpaceVector,
        diagnostics: Diagnostics,
    ) -> Self {
        Self {
            m: objective.powf(1.0 / p),
            kernel: objective.recip(),
            p,
            z: z.to_vec(),
            xi: xi.clone(),
            degree: space.degree(),
            minimizer,
            diagnostics,
        }
    }

    pub fn minimizer_poly(&self, space: &PolySpace) -> Result<PolyCoeffs> {
        space.to_poly(&self.minimizer)
    }

    pub fn flagged(&self) -> bool {
        self.diagnostics.flagged()
    }
}

fn check_point(space: &PolySpace, z: &[Complex64]) -> Result<()> {
    if z.len() != space.dim() {
        return Err(Error::DimensionMismatch {
            expected: space.dim(),
            found: z.len(),
        });
    }
    if !space.domain().is_cloud() && !space.domain().contains(z) {
        return Err(Error::OutsideDomain);
    }
    Ok(())
}

fn check_functional(space: &PolySpace, xi: &Functional) -> Result<()> {
    xi.ensure_nonzero()?;
    if xi.dim() != space.dim() {
        return Err(Error::DimensionMismatch {
            expected: space.dim(),
            found: xi.dim(),
        });
    }
    Ok(())
}

/// `K_{ξ,2}(z) = Σ_α |c_α|²`, `c_α = (ξ·σ_α)(z)`, with minimizer `Σ c̄_α σ_α / K`.
pub fn kernel2_diagonal(
    space: &PolySpace,
    xi: &Functional,
    z: &[Complex64],
) -> Result<KernelEvaluation> {
    check_functional(space, xi)?;
    check_point(space, z)?;
    let onb = space.orthonormal_basis(z)?;
    let c = onb.functional_coeffs(space, xi)?;
    let k: f64 = c.iter().map(|x| x.norm_sqr()).sum();
    let row_scale = space
        .functional_row(xi, z)?
        .iter()
        .map(|x| x.norm())
        .fold(0.0, f64::max);
    if !(k > 0.0) || row_scale == 0.0 {
        return Err(Error::KernelZero);
    }
    let minimizer = SpaceVector(&onb.transform * c.map(|x| x.conj() / k));
    let constraint = Constraints::single(space.functional_row(xi, z)?, Complex64::new(1.0, 0.0));
    let mut diagnostics = Diagnostics {
        method: "exact-2".into(),
        converged: true,
        constraint_residual: constraint.residual(&minimizer),
        ..Default::default()
    };
    diagnostics.flags.extend(space.flags().iter().cloned());
    Ok(KernelEvaluation {
        m: k.powf(-0.5),
        kernel: k,
        p: 2.0,
        z: z.to_vec(),
        xi: xi.clone(),
        degree: space.degree(),
        minimizer,
        diagnostics,
    })
}

/// The witness `(z − z0)^{α0}/ξ_{α0}` for the `≺`-first nonzero coefficient.
pub fn witness(space: &PolySpace, xi: &Functional, z: &[Complex64]) -> Option<SpaceVector> {
    let alpha = xi.leading_index()?;
    let c = xi.coefficient(alpha);
    let f = PolyCoeffs::monomial(z.to_vec(), alpha.clone(), c.inv());
    space.from_poly(&f).ok()
}

/// `m_{ξ,p}(z)` and `K_{ξ,p}(z)` by constrained `L^p` minimization.
pub fn kernelp_diagonal(
    space: &PolySpace,
    xi: &Functional,
    z: &[Complex64],
    p: f64,
    opts: &SolverOptions,
) -> Result<KernelEvaluation> {
    check_functional(space, xi)?;
    check_point(space, z)?;
    let row = space.functional_row(xi, z)?;
    if row.iter().all(|x| x.norm() == 0.0) {
        return Err(Error::KernelZero);
    }
    let constraints = Constraints::single(row, Complex64::new(1.0, 0.0));
    let start = witness(space, xi, z);
    let sol = solver::minimize(space, &constraints, p, start.as_ref(), opts)?;
    Ok(KernelEvaluation::from_objective(
        sol.objective,
        p,
        z,
        xi,
        space,
        sol.coeffs,
        sol.diagnostics,
    ))
}

/// `K_{ξ,p}(·,w) = m_{ξ,p}(·,w) m_{ξ,p}(w)^{−p}`.
#[derive(Clone, Debug)]
pub struct OffDiagonalKernel {
    pub base: KernelEvaluation,
    pub values: SpaceVector,
}

impl OffDiagonalKernel {
    pub fn eval(&self, space: &PolySpace, z: &[Complex64]) -> Complex64 {
        space.eval(&self.values, z)
    }

    /// `(ξ·K_{ξ,p}(·,w))(z)`
    pub fn apply(&self, space: &PolySpace, z: &[Complex64]) -> Result<Complex64> {
        space.apply(&self.base.xi, &self.values, z)
    }
}

pub fn off_diagonal(
    space: &PolySpace,
    xi: &Functional,
    w: &[Complex64],
    p: f64,
    opts: &SolverOptions,
) -> Result<OffDiagonalKernel> {
    if p < 1.0 {
        return Err(Error::Unsupported("off-diagonal kernels need p ≥ 1".into()));
    }
    let base = kernelp_diagonal(space, xi, w, p, opts)?;
    Ok(off_diagonal_from(base))
}

pub fn off_diagonal_from(base: KernelEvaluation) -> OffDiagonalKernel {
    let values = base.minimizer.scale(Complex64::new(base.kernel, 0.0));
    OffDiagonalKernel { base, values }
}

/// Node weights `w_q |m|^{p−2}`, zero where `m` vanishes.
fn reproducing_weights(space: &PolySpace, m_values: &[Complex64], p: f64) -> Vec<f64> {
    m_values
        .iter()
        .zip(space.quadrature().weights())
        .map(|(m, w)| {
            if m.norm_sqr() == 0.0 {
                0.0
            } else {
                w * m.norm_sqr().powf(0.5 * (p - 2.0))
            }
        })
        .collect()
}

/// `∫ |m|^{p−2} m̄ f` by quadrature.
pub fn reproducing_integral(
    space: &PolySpace,
    eval: &KernelEvaluation,
    f: &SpaceVector,
) -> Complex64 {
    let m_values = space.node_values(&eval.minimizer);
    let f_values = space.node_values(f);
    let weights = reproducing_weights(space, &m_values, eval.p);
    m_values
        .iter()
        .zip(&f_values)
        .zip(&weights)
        .map(|((m, f), w)| m.conj() * f * *w)
        .sum()
}

/// `|(ξ·f)(w) − m^{−p} ∫ |m|^{p−2} m̄ f| / max(1, |(ξ·f)(w)|)`.
pub fn reproducing_residual(
    space: &PolySpace,
    eval: &KernelEvaluation,
    f: &SpaceVector,
) -> Result<f64> {
    if eval.p < 1.0 {
        return Err(Error::Unsupported(
            "the reproducing formula needs p ≥ 1".into(),
        ));
    }
    let lhs = space.apply(&eval.xi, f, &eval.z)?;
    let rhs = reproducing_integral(space, eval, f) * eval.kernel;
    Ok((lhs - rhs).norm() / lhs.norm().max(1.0))
}

/// `f − ((ξ·f)(w)/ξ_{α0})(z − w)^{α0}`, which satisfies `(ξ·g)(w) = 0`.
pub fn annihilated_part(
    space: &PolySpace,
    xi: &Functional,
    w: &[Complex64],
    f: &SpaceVector,
) -> Result<SpaceVector> {
    let value = space.apply(xi, f, w)?;
    let wit = witness(space, xi, w).ok_or(Error::DegreeOverflow {
        degree: xi.leading_index().map_or(0, MultiIndex::degree),
        max: space.degree(),
    })?;
    Ok(f.axpy(-value, &wit))
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct HQuantity {
    pub h: f64,
    pub k_z: f64,
    pub k_w: f64,
    /// `"p<=2"` or `"p>2"`: which of the two integral inequalities applies.
    pub inequality: &'static str,
    pub lhs: f64,
    pub rhs: f64,
}

impl HQuantity {
    pub fn holds(&self, slack: f64) -> bool {
        self.lhs <= self.rhs + slack
    }
}

/// `H_{ξ,p}(z,w)` and both sides of the matching integral inequality.
pub fn h_quantity(
    space: &PolySpace,
    xi: &Functional,
    p: f64,
    z: &[Complex64],
    w: &[Complex64],
    opts: &SolverOptions,
) -> Result<HQuantity> {
    if p <= 1.0 {
        return Err(Error::Unsupported("H inequalities need p > 1".into()));
    }
    let ez = kernelp_diagonal(space, xi, z, p, opts)?;
    let ew = kernelp_diagonal(space, xi, w, p, opts)?;
    Ok(h_from(space, &ez, &ew))
}

pub fn h_from(space: &PolySpace, ez: &KernelEvaluation, ew: &KernelEvaluation) -> HQuantity {
    let p = ez.p;
    let xi = &ez.xi;
    let (kz, kw) = (ez.kernel, ew.kernel);
    let xi_mw_at_z = space
        .apply(xi, &ew.minimizer, &ez.z)
        .expect("dimensions checked");
    let xi_mz_at_w = space
        .apply(xi, &ez.minimizer, &ew.z)
        .expect("dimensions checked");
    let h = kz + kw - (kw * xi_mw_at_z + kz * xi_mz_at_w).re;
    let mz = space.node_values(&ez.minimizer);
    let mw = space.node_values(&ew.minimizer);
    let weights = space.quadrature().weights();
    let (inequality, lhs, rhs) = if p <= 2.0 {
        let lhs = mz
            .iter()
            .zip(&mw)
            .zip(weights)
            .map(|((a, b), wq)| {
                let d = (a - b).norm_sqr();
                if d == 0.0 {
                    0.0
                } else {
                    wq * (a.norm() + b.norm()).powf(p - 2.0) * d
                }
            })
            .sum();
        ("p<=2", lhs, h / ((p - 1.0) * kz * kw))
    } else {
        let lhs = mz
            .iter()
            .zip(&mw)
            .zip(weights)
            .map(|((a, b), wq)| {
                wq * (a.norm().powf(p - 2.0) + b.norm().powf(p - 2.0)) * (a - b).norm_sqr()
            })
            .sum();
        ("p>2", lhs, 2.0 * h / (kz * kw))
    };
    HQuantity {
        h,
        k_z: kz,
        k_w: kw,
        inequality,
        lhs,
        rhs,
    }
}

/// `∫_{B(0,R)} Π_j |z_j|^{p α_j}` in closed form.
pub fn ball_monomial_integral(alpha: &MultiIndex, p: f64, radius: f64) -> f64 {
    let n = alpha.dim() as f64;
    let total = p * alpha.degree() as f64;
    let num: f64 = alpha
        .entries()
        .iter()
        .map(|&a| gamma(0.5 * p * a as f64 + 1.0))
        .product();
    PI.powf(n) * radius.powf(2.0 * n + total) * num / gamma(n + 1.0 + 0.5 * total)
}

/// `|(ξ·f)(z)| ≤ C ‖f‖_p` whenever `δ(z) ≥ r`.
pub fn evaluation_bound(xi: &Functional, p: f64, r: f64) -> f64 {
    let n = xi.dim() as f64;
    let series: f64 = xi
        .terms()
        .map(|(a, c)| c.norm() * (2.0 * n.sqrt() / r).powi(a.degree() as i32))
        .sum();
    let nfact = crate::algebra::factorial(xi.dim() as u32);
    series * nfact.powf(1.0 / p) * (4.0 / (PI * r * r)).powf(n / p)
}

#[derive(Clone, Debug, Serialize)]
pub struct Bounds {
    pub lower: f64,
    pub upper: f64,
    pub kernel: f64,
}

impl Bounds {
    pub fn holds(&self) -> bool {
        self.lower > 0.0 && self.lower <= self.kernel && self.kernel <= self.upper
    }
}

/// Lower bound `|ξ_{α0}|^p / ∫_{B(0,R)} |z^{α0}|^p` (best over the support) and
/// upper bound `C₁/δ(z)^{2n+pk₀}`.
pub fn bound_constants(
    space: &PolySpace,
    xi: &Functional,
    p: f64,
    z: &[Complex64],
) -> Result<(f64, f64)> {
    check_functional(space, xi)?;
    let n = space.dim();
    let diameter = space.domain().diameter();
    let delta = space.domain().boundary_distance(z)?;
    let k0 = xi.degree().unwrap_or(0);
    let lower = xi
        .terms()
        .map(|(a, c)| c.norm().powf(p) / ball_monomial_integral(a, p, diameter))
        .fold(0.0, f64::max);
    let series: f64 = xi
        .terms()
        .map(|(a, c)| {
            c.norm()
                * (2.0 * (n as f64).sqrt()).powi(a.degree() as i32)
                * diameter.powi((k0 - a.degree()) as i32)
        })
        .sum();
    let c1 = crate::algebra::factorial(n as u32) * (4.0 / PI).powi(n as i32) * series.powf(p);
    let upper = c1 / delta.powf(2.0 * n as f64 + p * k0 as f64);
    Ok((lower, upper))
}

pub fn bounds_check(
    space: &PolySpace,
    xi: &Functional,
    p: f64,
    z: &[Complex64],
    opts: &SolverOptions,
) -> Result<Bounds> {
    let (lower, upper) = bound_constants(space, xi, p, z)?;
    let kernel = kernelp_diagonal(space, xi, z, p, opts)?.kernel;
    Ok(Bounds {
        lower,
        upper,
        kernel,
    })
}

/// `‖f‖_p^p` of a space element against a kernel's minimizer weights; used by
/// the orthogonality check `∫ |m|^{p−2} m̄ f` scaled by `‖f‖_p m^{p−1}`.
pub fn orthogonality_ratio(space: &PolySpace, eval: &KernelEvaluation, f: &SpaceVector) -> f64 {
    let integral = reproducing_integral(space, eval, f).norm();
    let f_norm =
        lp_sum(space.quadrature().weights(), &space.node_values(f), eval.p).powf(1.0 / eval.p);
    integral / (f_norm * eval.m.powf(eval.p - 1.0))
}
