//! Truncated polynomial surrogates of `A^p(Ω)`.
//!
//! Basis functions are scaled monomials `((z − c)/s)^e` about the domain's
//! expansion center `c`, with `s` the per-axis length scale, so that Gram
//! matrices stay well conditioned on small domains. On an annulus the basis
//! is the Laurent band `e ∈ [−D, D]`.

use std::collections::HashMap;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::algebra::{cpowi, gbinom, indices_up_to, Functional, MultiIndex, PolyCoeffs};
use crate::domains::{
    build_quadrature_capped, Domain, Quadrature, QuadratureOrders, Shape, DEFAULT_MAX_NODES,
};
use crate::error::{Error, Result};
use crate::linalg::{self, SplitMatrix};

/// Gram condition estimates above this are reported as rank loss.
pub const CONDITION_LIMIT: f64 = 1e12;

pub const FLAG_UNVERIFIED_DENSITY: &str = "unverified-density";

pub fn default_degree(dim: usize) -> u32 {
    match dim {
        1 => 16,
        2 => 10,
        _ => 4,
    }
}

#[derive(Clone, Debug)]
pub struct SpaceOptions {
    pub degree: Option<u32>,
    pub orders: Option<QuadratureOrders>,
    pub max_nodes: usize,
}

impl Default for SpaceOptions {
    fn default() -> Self {
        Self {
            degree: None,
            orders: None,
            max_nodes: DEFAULT_MAX_NODES,
        }
    }
}

impl SpaceOptions {
    pub fn degree(mut self, d: u32) -> Self {
        self.degree = Some(d);
        self
    }

    pub fn orders(mut self, radial: usize, angular: usize) -> Self {
        self.orders = Some(QuadratureOrders::new(radial, angular));
        self
    }

    pub fn max_nodes(mut self, cap: usize) -> Self {
        self.max_nodes = cap;
        self
    }
}

/// Coefficients of an element of a [`PolySpace`] in its basis.
#[derive(Clone, Debug, PartialEq)]
pub struct SpaceVector(pub DVector<Complex64>);

impl SpaceVector {
    pub fn zeros(len: usize) -> Self {
        Self(DVector::zeros(len))
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self(&self.0 * s)
    }

    pub fn axpy(&self, a: Complex64, other: &SpaceVector) -> Self {
        Self(&self.0 + &other.0 * a)
    }
}

#[derive(Clone, Debug)]
pub struct PolySpace {
    domain: Domain,
    quadrature: Arc<Quadrature>,
    degree: u32,
    laurent: bool,
    center: Vec<Complex64>,
    exponents: Vec<Vec<i64>>,
    scales: Vec<Vec<f64>>,
    lookup: HashMap<Vec<i64>, usize>,
    gram: DMatrix<Complex64>,
    /// Node values of an L²-orthonormal basis `ψ = φ · from_onb`.
    onb_values: SplitMatrix,
    from_onb: DMatrix<Complex64>,
    to_onb: DMatrix<Complex64>,
    condition: f64,
    flags: Vec<String>,
}

impl PolySpace {
    pub fn new(domain: &Domain) -> Result<Self> {
        Self::with_options(domain, &SpaceOptions::default())
    }

    pub fn with_degree(domain: &Domain, degree: u32) -> Result<Self> {
        Self::with_options(domain, &SpaceOptions::default().degree(degree))
    }

    pub fn with_options(domain: &Domain, opts: &SpaceOptions) -> Result<Self> {
        let dim = domain.dim();
        let degree = opts.degree.unwrap_or_else(|| default_degree(dim));
        let orders = opts
            .orders
            .unwrap_or_else(|| QuadratureOrders::default_for_dim(dim));
        let quadrature = Arc::new(build_quadrature_capped(domain, orders, opts.max_nodes)?);
        Self::from_quadrature(domain, quadrature, degree)
    }

    pub fn from_quadrature(
        domain: &Domain,
        quadrature: Arc<Quadrature>,
        degree: u32,
    ) -> Result<Self> {
        let dim = domain.dim();
        let center = domain.center();
        let axis_scales = domain.axis_scales();
        let laurent = domain.is_annulus();
        let (exponents, scales): (Vec<Vec<i64>>, Vec<Vec<f64>>) =
            if let Shape::Annulus { r_inner, r_outer } = domain.shape() {
                let d = degree as i64;
                (-d..=d)
                    .map(|e| (vec![e], vec![if e < 0 { *r_inner } else { *r_outer }]))
                    .unzip()
            } else {
                indices_up_to(dim, degree)
                    .into_iter()
                    .map(|a| {
                        (
                            a.entries().iter().map(|&x| x as i64).collect(),
                            axis_scales.clone(),
                        )
                    })
                    .unzip()
            };
        let lookup = exponents
            .iter()
            .enumerate()
            .map(|(i, e)| (e.clone(), i))
            .collect();
        let n_basis = exponents.len();
        let n_nodes = quadrature.len();

        let phi = DMatrix::from_fn(n_nodes, n_basis, |q, i| {
            basis_value(&exponents[i], &scales[i], &center, quadrature.node(q))
        });
        let phi = SplitMatrix::from_complex(&phi);
        let gram = phi.weighted_gram(quadrature.weights());
        let condition = linalg::condition_estimate(&gram);
        if !(condition <= CONDITION_LIMIT) {
            return Err(Error::RankDeficient { condition });
        }

        // Cholesky orthonormalization with one reorthogonalization pass.
        let l1 = linalg::cholesky_lower(&gram)?;
        let t1 = linalg::lower_inverse(&l1)?.adjoint();
        let psi1 = phi.mul(&t1);
        let g2 = psi1.weighted_gram(quadrature.weights());
        let l2 = linalg::cholesky_lower(&g2)?;
        let t2 = linalg::lower_inverse(&l2)?.adjoint();
        let onb_values = psi1.mul(&t2);
        let from_onb = &t1 * &t2;
        let to_onb = l2.adjoint() * l1.adjoint();

        let mut flags = Vec::new();
        if domain.is_cloud() {
            flags.push(FLAG_UNVERIFIED_DENSITY.to_string());
        }
        Ok(Self {
            domain: domain.clone(),
            quadrature,
            degree,
            laurent,
            center,
            exponents,
            scales,
            lookup,
            gram,
            onb_values,
            from_onb,
            to_onb,
            condition,
            flags,
        })
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn quadrature(&self) -> &Quadrature {
        &self.quadrature
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }

    pub fn is_laurent(&self) -> bool {
        self.laurent
    }

    pub fn center(&self) -> &[Complex64] {
        &self.center
    }

    pub fn exponents(&self, i: usize) -> &[i64] {
        &self.exponents[i]
    }

    pub fn condition(&self) -> f64 {
        self.condition
    }

    pub fn flags(&self) -> &[String] {
        &self.flags
    }

    /// `G[i][j] = Σ_q w_q φ_j(x_q) conj(φ_i(x_q))`.
    pub fn gram_matrix(&self) -> &DMatrix<Complex64> {
        &self.gram
    }

    pub fn onb_values(&self) -> &SplitMatrix {
        &self.onb_values
    }

    /// Coordinates in the orthonormal basis `ψ` (so `‖f‖₂ = |y|`).
    pub fn to_onb(&self, v: &SpaceVector) -> DVector<Complex64> {
        &self.to_onb * &v.0
    }

    pub fn from_onb(&self, y: &DVector<Complex64>) -> SpaceVector {
        SpaceVector(&self.from_onb * y)
    }

    pub(crate) fn from_onb_matrix(&self) -> &DMatrix<Complex64> {
        &self.from_onb
    }

    pub fn basis_value(&self, i: usize, z: &[Complex64]) -> Complex64 {
        basis_value(&self.exponents[i], &self.scales[i], &self.center, z)
    }

    pub fn eval(&self, v: &SpaceVector, z: &[Complex64]) -> Complex64 {
        (0..self.len())
            .map(|i| v.0[i] * self.basis_value(i, z))
            .sum()
    }

    pub fn node_values(&self, v: &SpaceVector) -> Vec<Complex64> {
        self.onb_values.mul_vec(&self.to_onb(v))
    }

    /// `Σ_q w_q |f(x_q)|^p`.
    pub fn lp_norm_pow(&self, v: &SpaceVector, p: f64) -> f64 {
        let values = self.node_values(v);
        lp_sum(self.quadrature.weights(), &values, p)
    }

    pub fn lp_norm(&self, v: &SpaceVector, p: f64) -> f64 {
        self.lp_norm_pow(v, p).powf(1.0 / p)
    }

    /// Quadrature `L^p` norm of a polynomial given by Taylor coefficients.
    pub fn lp_norm_poly(&self, f: &PolyCoeffs, p: f64) -> Result<f64> {
        if !(p > 0.0) {
            return Err(Error::InvalidInput(format!("p must be positive, got {p}")));
        }
        Ok(self.lp_norm(&self.from_poly(f)?, p))
    }

    /// Taylor coefficient of basis function `i` at `z`, index `alpha`.
    pub fn taylor_coeff(&self, i: usize, z: &[Complex64], alpha: &MultiIndex) -> Complex64 {
        let e = &self.exponents[i];
        let s = &self.scales[i];
        let mut acc = Complex64::new(1.0, 0.0);
        for j in 0..e.len() {
            let a = alpha.entries()[j];
            let b = gbinom(e[j], a);
            if b == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            let u = (z[j] - self.center[j]) / s[j];
            acc *= cpowi(u, e[j] - a as i64) * (b / s[j].powi(a as i32));
        }
        acc
    }

    /// `r_i = (ξ·φ_i)(z)`.
    pub fn functional_row(&self, xi: &Functional, z: &[Complex64]) -> Result<DVector<Complex64>> {
        if xi.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: xi.dim(),
            });
        }
        if z.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: z.len(),
            });
        }
        Ok(DVector::from_fn(self.len(), |i, _| {
            xi.terms()
                .map(|(alpha, c)| c * self.taylor_coeff(i, z, alpha))
                .sum()
        }))
    }

    /// `(ξ·f)(z)` for an element of the space.
    pub fn apply(&self, xi: &Functional, v: &SpaceVector, z: &[Complex64]) -> Result<Complex64> {
        Ok(self.functional_row(xi, z)?.dot(&v.0))
    }

    /// Index of the basis element with the given exponents.
    pub fn index_of(&self, exponents: &[i64]) -> Option<usize> {
        self.lookup.get(exponents).copied()
    }

    /// Expands a polynomial in the space basis.
    pub fn from_poly(&self, f: &PolyCoeffs) -> Result<SpaceVector> {
        if f.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: f.dim(),
            });
        }
        let shifted = f.taylor_shift(&self.center);
        let mut out = SpaceVector::zeros(self.len());
        for (alpha, c) in shifted.terms() {
            if c.norm() == 0.0 {
                continue;
            }
            let e: Vec<i64> = alpha.entries().iter().map(|&a| a as i64).collect();
            let i = self.index_of(&e).ok_or(Error::DegreeOverflow {
                degree: alpha.degree(),
                max: self.degree,
            })?;
            let scale: f64 = e
                .iter()
                .zip(&self.scales[i])
                .map(|(&k, s)| s.powi(k as i32))
                .product();
            out.0[i] += c * scale;
        }
        Ok(out)
    }

    /// Taylor coefficients about the space center. Fails on Laurent spaces.
    pub fn to_poly(&self, v: &SpaceVector) -> Result<PolyCoeffs> {
        if self.laurent {
            return Err(Error::Unsupported(
                "Laurent elements have no polynomial form".into(),
            ));
        }
        let terms = (0..self.len()).filter(|&i| v.0[i].norm() > 0.0).map(|i| {
            let e = &self.exponents[i];
            let scale: f64 = e
                .iter()
                .zip(&self.scales[i])
                .map(|(&k, s)| s.powi(-(k as i32)))
                .product();
            (
                MultiIndex::new(e.iter().map(|&k| k as u32).collect()),
                v.0[i] * scale,
            )
        });
        PolyCoeffs::from_terms(self.center.clone(), terms)
    }

    /// Jet indices `E` used for the ≺-triangular basis: all `α` with `|α| ≤ D`,
    /// or `0..=2D` on an annulus.
    pub fn jet_indices(&self) -> Vec<MultiIndex> {
        if self.laurent {
            (0..self.len() as u32)
                .map(|k| MultiIndex::new(vec![k]))
                .collect()
        } else {
            indices_up_to(self.dim(), self.degree)
        }
    }

    /// The ≺-triangular orthonormal basis `σ_α` at `z0`.
    pub fn orthonormal_basis(&self, z0: &[Complex64]) -> Result<OrthonormalBasis> {
        if z0.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: z0.len(),
            });
        }
        if !self.domain.is_cloud() && !self.domain.contains(z0) {
            return Err(Error::OutsideDomain);
        }
        let indices = self.jet_indices();
        let length = self.domain.axis_scales();
        // Rows are jets in the rescaled variable so row norms stay comparable.
        let row_scale: Vec<f64> = indices
            .iter()
            .map(|a| {
                a.entries()
                    .iter()
                    .zip(&length)
                    .map(|(&k, s)| s.powi(k as i32))
                    .product()
            })
            .collect();
        let jets = DMatrix::from_fn(indices.len(), self.len(), |r, i| {
            self.taylor_coeff(i, z0, &indices[r]) * row_scale[r]
        });
        // LQ of the jet matrix in orthonormal coordinates: M·U lower triangular.
        let m = &jets * &self.from_onb;
        let (q, r) = linalg::full_qr(&m.adjoint());
        let n = self.len();
        let diag_max = (0..n).map(|i| r[(i, i)].norm()).fold(0.0, f64::max);
        let diag_min = (0..n)
            .map(|i| r[(i, i)].norm())
            .fold(f64::INFINITY, f64::min);
        if !(diag_min > 1e-13 * diag_max) {
            return Err(Error::RankDeficient {
                condition: diag_max / diag_min,
            });
        }
        let transform = &self.from_onb * &q;
        let lower = r.adjoint();
        let jets = DMatrix::from_fn(n, n, |b, a| lower[(b, a)] / row_scale[b]);
        Ok(OrthonormalBasis {
            point: z0.to_vec(),
            transform,
            indices,
            jets,
        })
    }
}

fn basis_value(e: &[i64], s: &[f64], center: &[Complex64], z: &[Complex64]) -> Complex64 {
    let mut acc = Complex64::new(1.0, 0.0);
    for j in 0..e.len() {
        acc *= cpowi((z[j] - center[j]) / s[j], e[j]);
    }
    acc
}

pub(crate) fn lp_sum(weights: &[f64], values: &[Complex64], p: f64) -> f64 {
    if p == 2.0 {
        weights
            .iter()
            .zip(values)
            .map(|(w, f)| w * f.norm_sqr())
            .sum()
    } else {
        weights
            .iter()
            .zip(values)
            .map(|(w, f)| w * f.norm().powf(p))
            .sum()
    }
}

/// Orthonormal basis `σ_α` with `(D^β σ_α)(z0) = 0` for `β ≺ α`.
#[derive(Clone, Debug)]
pub struct OrthonormalBasis {
    pub point: Vec<Complex64>,
    /// Column `α` holds `σ_α` in the space basis.
    pub transform: DMatrix<Complex64>,
    pub indices: Vec<MultiIndex>,
    /// `jets[(β, α)] = (D^β σ_α)(z0)/β!`, lower triangular.
    pub jets: DMatrix<Complex64>,
}

impl OrthonormalBasis {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn sigma(&self, k: usize) -> SpaceVector {
        SpaceVector(self.transform.column(k).into_owned())
    }

    pub fn position(&self, alpha: &MultiIndex) -> Option<usize> {
        self.indices.iter().position(|a| a == alpha)
    }

    /// `c_α = (ξ·σ_α)(z0)`.
    pub fn functional_coeffs(
        &self,
        space: &PolySpace,
        xi: &Functional,
    ) -> Result<DVector<Complex64>> {
        let row = space.functional_row(xi, &self.point)?;
        Ok(self.transform.tr_mul(&row))
    }
}
