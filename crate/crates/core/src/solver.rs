//! Constrained `L^p` minimization over a [`PolySpace`]:
//! minimize `Σ_q w_q |f(x_q)|^p` subject to complex linear constraints `R a = b`.
//!
//! Constraints are eliminated in orthonormal coordinates (particular
//! minimum-norm solution plus a null-space basis). Solvers are registered by
//! name and selected at runtime.

use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, SplitMatrix};
use crate::pspace::{lp_sum, PolySpace, SpaceVector};

pub const FLAG_NONCONVEX: &str = "nonconvex-best-found";
pub const FLAG_NOT_CONVERGED: &str = "not-converged";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, rename_all = "camelCase")]
pub struct SolverOptions {
    /// Registered solver name; `None` picks by `p`.
    pub method: Option<String>,
    /// `ε = eps_factor · max|f|` in the IRLS weights.
    pub eps_factor: f64,
    /// Fixed `ε` factor used at `p = 1`.
    pub eps_factor_p1: f64,
    pub damping: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub newton: bool,
    /// IRLS tolerance before handing over to Newton.
    pub handoff_tol: f64,
    pub newton_max_iter: usize,
    /// Newton smooths with `newton_eps_scale · ε` for `p > 1`.
    pub newton_eps_scale: f64,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            method: None,
            eps_factor: 1e-7,
            eps_factor_p1: 1e-6,
            damping: 0.7,
            tol: 1e-11,
            max_iter: 300,
            newton: true,
            handoff_tol: 1e-8,
            newton_max_iter: 50,
            newton_eps_scale: 1e-3,
            restarts: 8,
            seed: 42,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Diagnostics {
    pub method: String,
    pub iterations: usize,
    pub newton_iterations: usize,
    pub final_relative_change: f64,
    pub constraint_residual: f64,
    pub converged: bool,
    pub flags: Vec<String>,
}

impl Diagnostics {
    pub fn flagged(&self) -> bool {
        !self.converged || self.flags.iter().any(|f| f == FLAG_NOT_CONVERGED)
    }
}

#[derive(Clone, Debug)]
pub struct Solution {
    pub coeffs: SpaceVector,
    /// `Σ_q w_q |f(x_q)|^p`, i.e. `m^p`.
    pub objective: f64,
    pub diagnostics: Diagnostics,
}

/// Complex linear constraints on space coefficients.
#[derive(Clone, Debug)]
pub struct Constraints {
    pub rows: DMatrix<Complex64>,
    pub rhs: DVector<Complex64>,
}

impl Constraints {
    pub fn single(row: DVector<Complex64>, value: Complex64) -> Self {
        Self {
            rows: DMatrix::from_row_slice(1, row.len(), row.as_slice()),
            rhs: DVector::from_element(1, value),
        }
    }

    pub fn residual(&self, v: &SpaceVector) -> f64 {
        let r = &self.rows * &v.0 - &self.rhs;
        let scale = self.rhs.iter().map(|c| c.norm()).fold(1.0, f64::max);
        r.iter().map(|c| c.norm()).fold(0.0, f64::max) / scale
    }
}

/// The eliminated problem: `f = g + B t` at the nodes, `t ∈ ℂ^M`.
pub struct Prepared<'a> {
    pub space: &'a PolySpace,
    pub constraints: &'a Constraints,
    pub p: f64,
    particular: DVector<Complex64>,
    null: DMatrix<Complex64>,
    g: Vec<Complex64>,
    onb_null: OnceLock<SplitMatrix>,
}

impl<'a> Prepared<'a> {
    pub fn new(space: &'a PolySpace, constraints: &'a Constraints, p: f64) -> Result<Self> {
        if !(p > 0.0 && p.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "p must be positive and finite, got {p}"
            )));
        }
        let n = space.len();
        let m = constraints.rows.nrows();
        if constraints.rows.ncols() != n || constraints.rhs.len() != m {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: constraints.rows.ncols(),
            });
        }
        if m > n {
            return Err(Error::Infeasible(format!(
                "{m} constraints on a {n}-dimensional space"
            )));
        }
        let rp = &constraints.rows * space.from_onb_matrix();
        let (q, r) = linalg::full_qr(&rp.adjoint());
        let row_norm = (0..m).map(|i| rp.row(i).norm()).fold(0.0, f64::max);
        for i in 0..m {
            if !(r[(i, i)].norm() > 1e-10 * row_norm) {
                return Err(Error::Infeasible(
                    "constraints are dependent or annihilate the truncated space".into(),
                ));
            }
        }
        let r1h = r.rows(0, m).adjoint();
        let u = r1h
            .solve_lower_triangular(&constraints.rhs)
            .ok_or_else(|| Error::Infeasible("singular constraint block".into()))?;
        let particular = q.columns(0, m) * u;
        let null = q.columns(m, n - m).into_owned();
        let onb = space.onb_values();
        let g = onb.mul_vec(&particular);
        Ok(Self {
            space,
            constraints,
            p,
            particular,
            null,
            g,
            onb_null: OnceLock::new(),
        })
    }

    /// Node values of the null-space directions, built on first use.
    fn b(&self) -> &SplitMatrix {
        self.onb_null
            .get_or_init(|| self.space.onb_values().mul(&self.null))
    }

    pub fn free_dim(&self) -> usize {
        self.null.ncols()
    }

    fn values(&self, t: &DVector<Complex64>) -> Vec<Complex64> {
        if t.is_empty() {
            return self.g.clone();
        }
        let bt = self.b().mul_vec(t);
        self.g.iter().zip(bt).map(|(g, b)| g + b).collect()
    }

    fn objective(&self, t: &DVector<Complex64>) -> f64 {
        lp_sum(self.space.quadrature().weights(), &self.values(t), self.p)
    }

    /// Free coordinates of a feasible space element.
    pub fn coords_of(&self, v: &SpaceVector) -> DVector<Complex64> {
        let y = self.space.to_onb(v);
        self.null.adjoint() * (y - &self.particular)
    }

    pub fn element(&self, t: &DVector<Complex64>) -> SpaceVector {
        let y = if t.is_empty() {
            self.particular.clone()
        } else {
            &self.particular + &self.null * t
        };
        self.space.from_onb(&y)
    }

    fn finish(&self, t: &DVector<Complex64>, mut diagnostics: Diagnostics) -> Solution {
        let coeffs = self.element(t);
        diagnostics.constraint_residual = self.constraints.residual(&coeffs);
        Solution {
            objective: self.objective(t),
            coeffs,
            diagnostics,
        }
    }

    fn eps(&self, values: &[Complex64], opts: &SolverOptions, fixed: Option<f64>) -> f64 {
        fixed.unwrap_or_else(|| {
            opts.eps_factor * values.iter().map(|f| f.norm()).fold(0.0, f64::max)
        })
    }

    /// One damped IRLS run from `t`. Returns the final point, iterations,
    /// last relative change and whether the tolerance was met.
    fn irls(
        &self,
        mut t: DVector<Complex64>,
        tol: f64,
        opts: &SolverOptions,
    ) -> (DVector<Complex64>, usize, f64, bool, f64) {
        let w = self.space.quadrature().weights();
        let p = self.p;
        let mut values = self.values(&t);
        let mut obj = lp_sum(w, &values, p);
        let fixed_eps = (p == 1.0)
            .then(|| opts.eps_factor_p1 * values.iter().map(|f| f.norm()).fold(0.0, f64::max));
        let mut eps = self.eps(&values, opts, fixed_eps);
        if t.is_empty() {
            return (t, 0, 0.0, true, eps);
        }
        let mut rel = f64::INFINITY;
        for iter in 1..=opts.max_iter {
            let omega: Vec<f64> = values
                .iter()
                .zip(w)
                .map(|(f, wq)| wq * (f.norm_sqr() + eps * eps).powf(0.5 * (p - 2.0)))
                .collect();
            let normal = self.b().weighted_gram(&omega);
            let rhs = -self.b().adjoint_mul_weighted(&omega, &self.g);
            let Some(t_new) = solve_hermitian(&normal, &rhs) else {
                return (t, iter, rel, false, eps);
            };
            let mut lambda = if p == 2.0 { 1.0 } else { opts.damping };
            let mut accepted = None;
            for _ in 0..20 {
                let cand =
                    &t * Complex64::new(1.0 - lambda, 0.0) + &t_new * Complex64::new(lambda, 0.0);
                let cand_values = self.values(&cand);
                let cand_obj = lp_sum(w, &cand_values, p);
                if cand_obj <= obj * (1.0 + 1e-14) {
                    accepted = Some((cand, cand_values, cand_obj));
                    break;
                }
                lambda *= 0.5;
            }
            let Some((cand, cand_values, cand_obj)) = accepted else {
                return (t, iter, 0.0, true, eps);
            };
            rel = (obj - cand_obj).abs() / obj.max(f64::MIN_POSITIVE);
            t = cand;
            values = cand_values;
            obj = cand_obj;
            eps = self.eps(&values, opts, fixed_eps);
            if rel < tol {
                return (t, iter, rel, true, eps);
            }
        }
        (t, opts.max_iter, rel, false, eps)
    }

    /// Damped Newton on the smoothed objective `Σ w (|f|² + ε²)^{p/2}`.
    fn newton(
        &self,
        mut t: DVector<Complex64>,
        eps: f64,
        opts: &SolverOptions,
    ) -> (DVector<Complex64>, usize, bool) {
        let w = self.space.quadrature().weights();
        let p = self.p;
        let e2 = eps * eps;
        let smoothed = |values: &[Complex64]| -> f64 {
            values
                .iter()
                .zip(w)
                .map(|(f, wq)| wq * (f.norm_sqr() + e2).powf(0.5 * p))
                .sum()
        };
        if t.is_empty() {
            return (t, 0, true);
        }
        let mut values = self.values(&t);
        let mut obj = smoothed(&values);
        for iter in 1..=opts.newton_max_iter {
            let s: Vec<f64> = values.iter().map(|f| f.norm_sqr() + e2).collect();
            let a: Vec<f64> = s
                .iter()
                .zip(w)
                .map(|(s, wq)| wq * p * s.powf(0.5 * p - 1.0))
                .collect();
            let beta: Vec<f64> = s
                .iter()
                .zip(w)
                .map(|(s, wq)| wq * p * (p - 2.0) * s.powf(0.5 * p - 2.0))
                .collect();
            let grad = linalg::to_real(&self.b().adjoint_mul_weighted(&a, &values));
            let mut hess = linalg::real_rep(&self.b().weighted_gram(&a));
            if p != 2.0 {
                let m2 = 2 * self.b().ncols();
                let mut extra = linalg::chunked_sum(values.len(), m2, m2, |start, len| {
                    let u = self.rank_one_rows(&values, start, len);
                    linalg::scale_rows(&u, &beta[start..start + len]).transpose() * u
                });
                linalg::symmetrize(&mut extra);
                hess += extra;
            }
            let Some(step) = solve_spd(&hess, &(-&grad)) else {
                return (t, iter, false);
            };
            let decrement = -grad.dot(&step);
            if !(decrement > 1e-20 * obj) {
                return (t, iter, true);
            }
            let dt = linalg::from_real(&step);
            let mut alpha = 1.0;
            let mut improved = false;
            for _ in 0..40 {
                let cand = &t + &dt * Complex64::new(alpha, 0.0);
                let cand_values = self.values(&cand);
                let cand_obj = smoothed(&cand_values);
                if cand_obj <= obj - 1e-4 * alpha * decrement {
                    let gain = obj - cand_obj;
                    t = cand;
                    values = cand_values;
                    if gain <= 1e-16 * obj {
                        return (t, iter, true);
                    }
                    obj = cand_obj;
                    improved = true;
                    break;
                }
                alpha *= 0.5;
            }
            if !improved {
                return (t, iter, true);
            }
        }
        (t, opts.newton_max_iter, false)
    }

    /// Rows `u_q = (Re(f_q b̄_q), Im(f_q b̄_q))` of the rank-one Hessian terms, for `q ∈ [start, start + len)`.
    fn rank_one_rows(&self, values: &[Complex64], start: usize, len: usize) -> DMatrix<f64> {
        let b = self.b();
        let m = b.ncols();
        DMatrix::from_fn(len, 2 * m, |r, col| {
            let row = start + r;
            let f = values[row];
            if col < m {
                f.re * b.re[(row, col)] + f.im * b.im[(row, col)]
            } else {
                f.im * b.re[(row, col - m)] - f.re * b.im[(row, col - m)]
            }
        })
    }
}

fn solve_hermitian(a: &DMatrix<Complex64>, b: &DVector<Complex64>) -> Option<DVector<Complex64>> {
    let scale = (0..a.nrows()).map(|i| a[(i, i)].re).fold(0.0, f64::max);
    for ridge in [0.0, 1e-14, 1e-12, 1e-10] {
        let mut m = a.clone();
        for i in 0..m.nrows() {
            m[(i, i)] += ridge * scale;
        }
        if let Some(c) = m.cholesky() {
            return Some(c.solve(b));
        }
    }
    None
}

fn solve_spd(a: &DMatrix<f64>, b: &DVector<f64>) -> Option<DVector<f64>> {
    let scale = (0..a.nrows()).map(|i| a[(i, i)]).fold(0.0, f64::max);
    for ridge in [0.0, 1e-14, 1e-12, 1e-10] {
        let mut m = a.clone();
        for i in 0..m.nrows() {
            m[(i, i)] += ridge * scale;
        }
        if let Some(c) = m.cholesky() {
            return Some(c.solve(b));
        }
    }
    None
}

/// A minimization strategy for a prepared constrained problem.
pub trait KernelSolver: Send + Sync {
    fn name(&self) -> &'static str;
    fn supports(&self, p: f64) -> bool;
    fn solve(
        &self,
        problem: &Prepared,
        start: Option<&SpaceVector>,
        opts: &SolverOptions,
    ) -> Result<Solution>;
}

/// Closed-form `p = 2` path: the minimum-norm particular solution.
pub struct Exact2;

impl KernelSolver for Exact2 {
    fn name(&self) -> &'static str {
        "exact-2"
    }

    fn supports(&self, p: f64) -> bool {
        p == 2.0
    }

    fn solve(
        &self,
        problem: &Prepared,
        _start: Option<&SpaceVector>,
        _opts: &SolverOptions,
    ) -> Result<Solution> {
        let t = DVector::zeros(problem.free_dim());
        let diagnostics = Diagnostics {
            method: self.name().into(),
            converged: true,
            ..Default::default()
        };
        Ok(problem.finish(&t, diagnostics))
    }
}

/// Damped IRLS followed by a Newton polish of the smoothed objective.
pub struct Irls;

impl KernelSolver for Irls {
    fn name(&self) -> &'static str {
        "irls"
    }

    fn supports(&self, p: f64) -> bool {
        p >= 1.0
    }

    fn solve(
        &self,
        problem: &Prepared,
        start: Option<&SpaceVector>,
        opts: &SolverOptions,
    ) -> Result<Solution> {
        let t0 = match start {
            Some(v) => problem.coords_of(v),
            None => DVector::zeros(problem.free_dim()),
        };
        let polish = opts.newton;
        let tol = if polish {
            opts.handoff_tol.max(opts.tol)
        } else {
            opts.tol
        };
        let (t, iterations, rel, irls_ok, eps) = problem.irls(t0, tol, opts);
        let (t, newton_iterations, newton_ok) = if polish {
            problem.newton(
                t,
                if problem.p > 1.0 {
                    eps * opts.newton_eps_scale
                } else {
                    eps
                },
                opts,
            )
        } else {
            (t, 0, true)
        };
        let converged = if polish { newton_ok } else { irls_ok };
        let mut flags = Vec::new();
        if !converged {
            flags.push(FLAG_NOT_CONVERGED.to_string());
        }
        let diagnostics = Diagnostics {
            method: self.name().into(),
            iterations,
            newton_iterations,
            final_relative_change: rel,
            converged,
            flags,
            ..Default::default()
        };
        Ok(problem.finish(&t, diagnostics))
    }
}

/// Random restarts of IRLS for the non-convex range `p < 1`.
pub struct Multistart;

impl KernelSolver for Multistart {
    fn name(&self) -> &'static str {
        "multistart"
    }

    fn supports(&self, p: f64) -> bool {
        p > 0.0
    }

    fn solve(
        &self,
        problem: &Prepared,
        start: Option<&SpaceVector>,
        opts: &SolverOptions,
    ) -> Result<Solution> {
        let m = problem.free_dim();
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let base = match start {
            Some(v) => problem.coords_of(v),
            None => DVector::zeros(m),
        };
        let spread = problem.particular.norm().max(1.0) / (m.max(1) as f64).sqrt();
        let mut starts = vec![base.clone(), DVector::zeros(m)];
        for _ in 0..opts.restarts {
            let noise = DVector::from_fn(m, |_, _| {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                Complex64::new(re, im) * spread
            });
            starts.push(&base + noise);
        }
        let mut best: Option<(f64, DVector<Complex64>, usize, f64, bool)> = None;
        let mut total_iterations = 0;
        for t0 in starts {
            let (t, iterations, rel, ok, _) = problem.irls(t0, opts.tol, opts);
            total_iterations += iterations;
            let obj = problem.objective(&t);
            if best.as_ref().map_or(true, |b| obj < b.0) {
                best = Some((obj, t, iterations, rel, ok));
            }
        }
        let (_, t, _, rel, ok) = best.expect("at least one start");
        let mut flags = Vec::new();
        if problem.p < 1.0 {
            flags.push(FLAG_NONCONVEX.to_string());
        }
        if !ok {
            flags.push(FLAG_NOT_CONVERGED.to_string());
        }
        let diagnostics = Diagnostics {
            method: self.name().into(),
            iterations: total_iterations,
            final_relative_change: rel,
            converged: ok,
            flags,
            ..Default::default()
        };
        Ok(problem.finish(&t, diagnostics))
    }
}

/// Name-keyed collection of [`KernelSolver`] strategies.
pub struct SolverRegistry {
    solvers: Vec<Box<dyn KernelSolver>>,
}

impl Default for SolverRegistry {
    fn default() -> Self {
        let mut r = Self {
            solvers: Vec::new(),
        };
        r.register(Box::new(Exact2));
        r.register(Box::new(Irls));
        r.register(Box::new(Multistart));
        r
    }
}

impl SolverRegistry {
    pub fn empty() -> Self {
        Self {
            solvers: Vec::new(),
        }
    }

    /// Adds a solver, replacing any existing one with the same name.
    pub fn register(&mut self, solver: Box<dyn KernelSolver>) {
        self.solvers.retain(|s| s.name() != solver.name());
        self.solvers.push(solver);
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.solvers.iter().map(|s| s.name()).collect()
    }

    pub fn get(&self, name: &str) -> Result<&dyn KernelSolver> {
        self.solvers
            .iter()
            .find(|s| s.name() == name)
            .map(|s| s.as_ref())
            .ok_or_else(|| Error::UnknownName {
                kind: "solver",
                name: name.to_string(),
            })
    }

    /// Explicit method if given, otherwise `multistart` for `p < 1` and `irls` above.
    pub fn select(&self, p: f64, method: Option<&str>) -> Result<&dyn KernelSolver> {
        let name = method.unwrap_or(if p < 1.0 { "multistart" } else { "irls" });
        let solver = self.get(name)?;
        if !solver.supports(p) {
            return Err(Error::Unsupported(format!(
                "solver `{name}` does not handle p = {p}"
            )));
        }
        Ok(solver)
    }
}

/// Minimizes the quadrature `L^p` norm under `constraints`.
pub fn minimize(
    space: &PolySpace,
    constraints: &Constraints,
    p: f64,
    start: Option<&SpaceVector>,
    opts: &SolverOptions,
) -> Result<Solution> {
    minimize_with(
        &SolverRegistry::default(),
        space,
        constraints,
        p,
        start,
        opts,
    )
}

pub fn minimize_with(
    registry: &SolverRegistry,
    space: &PolySpace,
    constraints: &Constraints,
    p: f64,
    start: Option<&SpaceVector>,
    opts: &SolverOptions,
) -> Result<Solution> {
    let problem = Prepared::new(space, constraints, p)?;
    let solver = registry.select(p, opts.method.as_deref())?;
    let mut sol = solver.solve(&problem, start, opts)?;
    sol.diagnostics.flags.extend(space.flags().iter().cloned());
    if !(sol.objective > 0.0 && sol.objective.is_finite()) {
        return Err(Error::Solver(format!(
            "degenerate objective {}",
            sol.objective
        )));
    }
    Ok(sol)
}
