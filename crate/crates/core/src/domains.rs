//! Bounded model domains in ℂⁿ and their Lebesgue quadratures.

use std::f64::consts::PI;
use std::path::Path;

use gauss_quad::GaussLegendre;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hard cap on the number of materialized quadrature nodes.
pub const DEFAULT_MAX_NODES: usize = 2_000_000;

#[derive(Clone, Debug, PartialEq)]
pub enum Shape {
    Disk {
        center: Complex64,
        radius: f64,
    },
    Polydisc {
        center: Vec<Complex64>,
        radii: Vec<f64>,
    },
    Ball {
        center: Vec<Complex64>,
        radius: f64,
    },
    /// Centered at the origin, `n = 1`.
    Annulus {
        r_inner: f64,
        r_outer: f64,
    },
    Cloud {
        nodes: Vec<Vec<Complex64>>,
        weights: Vec<f64>,
    },
    /// Cartesian product of shape domains.
    Product(Vec<Domain>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Domain {
    shape: Shape,
}

fn check_radius(r: f64, what: &str) -> Result<()> {
    if r.is_finite() && r > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidDomain(format!(
            "{what} must be positive and finite, got {r}"
        )))
    }
}

impl Domain {
    pub fn new(shape: Shape) -> Result<Self> {
        match &shape {
            Shape::Disk { radius, .. } => check_radius(*radius, "radius")?,
            Shape::Polydisc { center, radii } => {
                if radii.is_empty() || center.len() != radii.len() {
                    return Err(Error::InvalidDomain(
                        "polydisc needs one radius per axis".into(),
                    ));
                }
                for r in radii {
                    check_radius(*r, "radius")?;
                }
            }
            Shape::Ball { center, radius } => {
                if center.is_empty() {
                    return Err(Error::InvalidDomain("ball needs a center".into()));
                }
                check_radius(*radius, "radius")?;
            }
            Shape::Annulus { r_inner, r_outer } => {
                check_radius(*r_inner, "rInner")?;
                check_radius(*r_outer, "rOuter")?;
                if r_inner >= r_outer {
                    return Err(Error::InvalidDomain("rInner must be below rOuter".into()));
                }
            }
            Shape::Cloud { nodes, weights } => {
                if nodes.is_empty() || nodes.len() != weights.len() {
                    return Err(Error::InvalidDomain(
                        "cloud needs one weight per node".into(),
                    ));
                }
                let dim = nodes[0].len();
                if dim == 0 || nodes.iter().any(|x| x.len() != dim) {
                    return Err(Error::InvalidDomain(
                        "cloud nodes must share a dimension".into(),
                    ));
                }
                if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
                    return Err(Error::InvalidDomain(
                        "cloud weights must be positive and finite".into(),
                    ));
                }
            }
            Shape::Product(factors) => {
                if factors.len() < 2 {
                    return Err(Error::InvalidDomain("product needs two factors".into()));
                }
            }
        }
        Ok(Self { shape })
    }

    pub fn disk(center: Complex64, radius: f64) -> Result<Self> {
        Self::new(Shape::Disk { center, radius })
    }

    pub fn unit_disk() -> Self {
        Self::disk(Complex64::new(0.0, 0.0), 1.0).expect("unit disk")
    }

    pub fn polydisc(center: Vec<Complex64>, radii: Vec<f64>) -> Result<Self> {
        Self::new(Shape::Polydisc { center, radii })
    }

    pub fn unit_polydisc(dim: usize) -> Self {
        Self::polydisc(vec![Complex64::new(0.0, 0.0); dim], vec![1.0; dim]).expect("unit polydisc")
    }

    pub fn ball(center: Vec<Complex64>, radius: f64) -> Result<Self> {
        Self::new(Shape::Ball { center, radius })
    }

    pub fn unit_ball(dim: usize) -> Self {
        Self::ball(vec![Complex64::new(0.0, 0.0); dim], 1.0).expect("unit ball")
    }

    pub fn annulus(r_inner: f64, r_outer: f64) -> Result<Self> {
        Self::new(Shape::Annulus { r_inner, r_outer })
    }

    pub fn cloud(nodes: Vec<Vec<Complex64>>, weights: Vec<f64>) -> Result<Self> {
        Self::new(Shape::Cloud { nodes, weights })
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn dim(&self) -> usize {
        match &self.shape {
            Shape::Disk { .. } | Shape::Annulus { .. } => 1,
            Shape::Polydisc { radii, .. } => radii.len(),
            Shape::Ball { center, .. } => center.len(),
            Shape::Cloud { nodes, .. } => nodes[0].len(),
            Shape::Product(f) => f.iter().map(Domain::dim).sum(),
        }
    }

    pub fn is_cloud(&self) -> bool {
        matches!(self.shape, Shape::Cloud { .. })
    }

    pub fn is_annulus(&self) -> bool {
        matches!(self.shape, Shape::Annulus { .. })
    }

    /// Closed-form Lebesgue volume (the weight sum for clouds).
    pub fn volume(&self) -> f64 {
        match &self.shape {
            Shape::Disk { radius, .. } => PI * radius * radius,
            Shape::Polydisc { radii, .. } => radii.iter().map(|r| PI * r * r).product(),
            Shape::Ball { center, radius } => {
                let n = center.len() as i32;
                PI.powi(n) * radius.powi(2 * n) / crate::algebra::factorial(n as u32)
            }
            Shape::Annulus { r_inner, r_outer } => PI * (r_outer * r_outer - r_inner * r_inner),
            Shape::Cloud { weights, .. } => weights.iter().sum(),
            Shape::Product(f) => f.iter().map(Domain::volume).product(),
        }
    }

    /// Upper bound on `sup |z − w|` over the domain.
    pub fn diameter(&self) -> f64 {
        match &self.shape {
            Shape::Disk { radius, .. } => 2.0 * radius,
            Shape::Polydisc { radii, .. } => 2.0 * radii.iter().map(|r| r * r).sum::<f64>().sqrt(),
            Shape::Ball { radius, .. } => 2.0 * radius,
            Shape::Annulus { r_outer, .. } => 2.0 * r_outer,
            Shape::Cloud { nodes, .. } => {
                let dim = nodes[0].len();
                let mut sq = 0.0;
                for j in 0..dim {
                    let (mut lo_re, mut hi_re, mut lo_im, mut hi_im) =
                        (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
                    for x in nodes {
                        lo_re = lo_re.min(x[j].re);
                        hi_re = hi_re.max(x[j].re);
                        lo_im = lo_im.min(x[j].im);
                        hi_im = hi_im.max(x[j].im);
                    }
                    sq += (hi_re - lo_re).powi(2) + (hi_im - lo_im).powi(2);
                }
                sq.sqrt()
            }
            Shape::Product(f) => f.iter().map(|d| d.diameter().powi(2)).sum::<f64>().sqrt(),
        }
    }

    /// Expansion center used by polynomial bases on this domain.
    pub fn center(&self) -> Vec<Complex64> {
        match &self.shape {
            Shape::Disk { center, .. } => vec![*center],
            Shape::Polydisc { center, .. } | Shape::Ball { center, .. } => center.clone(),
            Shape::Annulus { .. } => vec![Complex64::new(0.0, 0.0)],
            Shape::Cloud { nodes, weights } => {
                let total: f64 = weights.iter().sum();
                let dim = nodes[0].len();
                (0..dim)
                    .map(|j| {
                        nodes
                            .iter()
                            .zip(weights)
                            .map(|(x, w)| x[j] * *w)
                            .sum::<Complex64>()
                            / total
                    })
                    .collect()
            }
            Shape::Product(f) => f.iter().flat_map(Domain::center).collect(),
        }
    }

    /// Per-axis length scale used to normalize monomials.
    pub fn axis_scales(&self) -> Vec<f64> {
        match &self.shape {
            Shape::Disk { radius, .. } => vec![*radius],
            Shape::Polydisc { radii, .. } => radii.clone(),
            Shape::Ball { center, radius } => vec![*radius; center.len()],
            Shape::Annulus { r_outer, .. } => vec![*r_outer],
            Shape::Cloud { nodes, .. } => {
                let c = self.center();
                (0..c.len())
                    .map(|j| {
                        nodes
                            .iter()
                            .map(|x| (x[j] - c[j]).norm())
                            .fold(0.0, f64::max)
                            .max(f64::MIN_POSITIVE)
                    })
                    .collect()
            }
            Shape::Product(f) => f.iter().flat_map(Domain::axis_scales).collect(),
        }
    }

    pub fn contains(&self, z: &[Complex64]) -> bool {
        if z.len() != self.dim() {
            return false;
        }
        match &self.shape {
            Shape::Disk { center, radius } => (z[0] - center).norm() < *radius,
            Shape::Polydisc { center, radii } => z
                .iter()
                .zip(center)
                .zip(radii)
                .all(|((x, c), r)| (x - c).norm() < *r),
            Shape::Ball { center, radius } => euclid(z, center) < *radius,
            Shape::Annulus { r_inner, r_outer } => {
                let r = z[0].norm();
                r > *r_inner && r < *r_outer
            }
            Shape::Cloud { nodes, .. } => (0..z.len()).all(|j| {
                let (lo_re, hi_re) = bounds(nodes.iter().map(|x| x[j].re));
                let (lo_im, hi_im) = bounds(nodes.iter().map(|x| x[j].im));
                (lo_re..=hi_re).contains(&z[j].re) && (lo_im..=hi_im).contains(&z[j].im)
            }),
            Shape::Product(f) => split_point(f, z).all(|(d, part)| d.contains(part)),
        }
    }

    /// `δ(z) = inf_{w ∈ ∂Ω} |z − w|`.
    pub fn boundary_distance(&self, z: &[Complex64]) -> Result<f64> {
        if z.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: z.len(),
            });
        }
        if self.is_cloud() {
            return Err(Error::Unsupported(
                "cloud domains carry no boundary model".into(),
            ));
        }
        if !self.contains(z) {
            return Err(Error::OutsideDomain);
        }
        Ok(match &self.shape {
            Shape::Disk { center, radius } => radius - (z[0] - center).norm(),
            Shape::Polydisc { center, radii } => z
                .iter()
                .zip(center)
                .zip(radii)
                .map(|((x, c), r)| r - (x - c).norm())
                .fold(f64::INFINITY, f64::min),
            Shape::Ball { center, radius } => radius - euclid(z, center),
            Shape::Annulus { r_inner, r_outer } => {
                let r = z[0].norm();
                (r - r_inner).min(r_outer - r)
            }
            Shape::Product(f) => {
                let mut best = f64::INFINITY;
                for (d, part) in split_point(f, z) {
                    best = best.min(d.boundary_distance(part)?);
                }
                best
            }
            Shape::Cloud { .. } => unreachable!(),
        })
    }

    fn origin_centered(&self) -> bool {
        match &self.shape {
            Shape::Disk { center, .. } => center.norm() == 0.0,
            Shape::Polydisc { center, .. } | Shape::Ball { center, .. } => {
                center.iter().all(|c| c.norm() == 0.0)
            }
            Shape::Annulus { .. } => true,
            Shape::Cloud { .. } => false,
            Shape::Product(f) => f.iter().all(Domain::origin_centered),
        }
    }

    /// `t·Ω` for a shape domain centered at the origin.
    pub fn scale(&self, t: f64) -> Result<Domain> {
        if !(t.is_finite() && t > 0.0) {
            return Err(Error::InvalidInput(format!(
                "scale factor must be positive, got {t}"
            )));
        }
        if !self.origin_centered() {
            return Err(Error::Unsupported(
                "scaling needs an origin-centered shape domain".into(),
            ));
        }
        let shape = match &self.shape {
            Shape::Disk { center, radius } => Shape::Disk {
                center: *center,
                radius: radius * t,
            },
            Shape::Polydisc { center, radii } => Shape::Polydisc {
                center: center.clone(),
                radii: radii.iter().map(|r| r * t).collect(),
            },
            Shape::Ball { center, radius } => Shape::Ball {
                center: center.clone(),
                radius: radius * t,
            },
            Shape::Annulus { r_inner, r_outer } => Shape::Annulus {
                r_inner: r_inner * t,
                r_outer: r_outer * t,
            },
            Shape::Product(f) => {
                Shape::Product(f.iter().map(|d| d.scale(t)).collect::<Result<_>>()?)
            }
            Shape::Cloud { .. } => unreachable!(),
        };
        Domain::new(shape)
    }

    /// `Ω₁ × Ω₂`. Products of (poly)discs stay polydiscs.
    pub fn product(&self, other: &Domain) -> Result<Domain> {
        for d in [self, other] {
            if matches!(d.shape, Shape::Cloud { .. } | Shape::Annulus { .. }) {
                return Err(Error::Unsupported(
                    "product factors must be discs, polydiscs or balls".into(),
                ));
            }
        }
        if let (Some((c1, r1)), Some((c2, r2))) = (self.as_polydisc(), other.as_polydisc()) {
            return Domain::polydisc([c1, c2].concat(), [r1, r2].concat());
        }
        let mut factors = Vec::new();
        for d in [self, other] {
            match &d.shape {
                Shape::Product(f) => factors.extend(f.iter().cloned()),
                _ => factors.push(d.clone()),
            }
        }
        Domain::new(Shape::Product(factors))
    }

    fn as_polydisc(&self) -> Option<(Vec<Complex64>, Vec<f64>)> {
        match &self.shape {
            Shape::Disk { center, radius } => Some((vec![*center], vec![*radius])),
            Shape::Polydisc { center, radii } => Some((center.clone(), radii.clone())),
            _ => None,
        }
    }
}

fn euclid(z: &[Complex64], c: &[Complex64]) -> f64 {
    z.iter()
        .zip(c)
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

fn bounds(it: impl Iterator<Item = f64>) -> (f64, f64) {
    it.fold((f64::MAX, f64::MIN), |(lo, hi), x| (lo.min(x), hi.max(x)))
}

fn split_point<'a>(
    factors: &'a [Domain],
    z: &'a [Complex64],
) -> impl Iterator<Item = (&'a Domain, &'a [Complex64])> {
    let mut offset = 0;
    factors.iter().map(move |d| {
        let part = &z[offset..offset + d.dim()];
        offset += d.dim();
        (d, part)
    })
}

/// Nodes and positive Lebesgue weights on a domain.
#[derive(Clone, Debug)]
pub struct Quadrature {
    dim: usize,
    /// Row-major `len × dim`.
    nodes: Vec<Complex64>,
    weights: Vec<f64>,
    pub radial_order: usize,
    pub angular_order: usize,
}

impl Quadrature {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn node(&self, q: usize) -> &[Complex64] {
        &self.nodes[q * self.dim..(q + 1) * self.dim]
    }

    pub fn nodes(&self) -> impl Iterator<Item = &[Complex64]> {
        self.nodes.chunks_exact(self.dim)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn integrate(&self, mut f: impl FnMut(&[Complex64]) -> f64) -> f64 {
        self.nodes().zip(&self.weights).map(|(x, w)| w * f(x)).sum()
    }

    fn tensor(
        factors: &[Quadrature],
        radial_order: usize,
        angular_order: usize,
        cap: usize,
    ) -> Result<Self> {
        let total: usize = factors.iter().map(Quadrature::len).product();
        if total > cap {
            return Err(Error::TooManyNodes { nodes: total, cap });
        }
        let dim: usize = factors.iter().map(Quadrature::dim).sum();
        let mut nodes = vec![Complex64::new(0.0, 0.0); 0];
        let mut weights = vec![1.0];
        let mut cur_dim = 0;
        let mut cur_nodes: Vec<Complex64> = Vec::new();
        for f in factors {
            let mut next_nodes = Vec::with_capacity(weights.len() * f.len() * (cur_dim + f.dim));
            let mut next_weights = Vec::with_capacity(weights.len() * f.len());
            for (i, w) in weights.iter().enumerate() {
                for (x, v) in f.nodes().zip(&f.weights) {
                    next_nodes.extend_from_slice(&cur_nodes[i * cur_dim..(i + 1) * cur_dim]);
                    next_nodes.extend_from_slice(x);
                    next_weights.push(w * v);
                }
            }
            cur_dim += f.dim;
            cur_nodes = next_nodes;
            weights = next_weights;
        }
        nodes.extend(cur_nodes);
        Ok(Quadrature {
            dim,
            nodes,
            weights,
            radial_order,
            angular_order,
        })
    }
}

/// Resolution parameters for [`build_quadrature`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureOrders {
    pub radial: usize,
    pub angular: usize,
}

impl QuadratureOrders {
    pub fn new(radial: usize, angular: usize) -> Self {
        Self { radial, angular }
    }

    /// Per-axis defaults. Full (32, 64) resolution per axis would put a bidisc
    /// above [`DEFAULT_MAX_NODES`], so higher dimensions use coarser grids
    /// that still integrate `|f|²` exactly at the default polynomial degrees.
    pub fn default_for_dim(dim: usize) -> Self {
        match dim {
            1 => Self::new(32, 64),
            2 => Self::new(12, 24),
            _ => Self::new(7, 14),
        }
    }
}

/// Gauss–Legendre nodes and weights mapped to `[a, b]`.
fn gauss_legendre(order: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let rule = GaussLegendre::new(order).expect("order >= 2");
    let half = 0.5 * (b - a);
    let mid = 0.5 * (b + a);
    let mut pairs: Vec<(f64, f64)> = rule
        .iter()
        .map(|(x, w)| (mid + half * x, half * w))
        .collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    pairs
}

fn angles(order: usize) -> Vec<Complex64> {
    (0..order)
        .map(|m| Complex64::from_polar(1.0, 2.0 * PI * m as f64 / order as f64))
        .collect()
}

/// Gauss–Legendre in the radius times the trapezoid rule in the angle.
fn ring_rule(
    center: Complex64,
    r_inner: f64,
    r_outer: f64,
    orders: QuadratureOrders,
) -> Quadrature {
    let radial = gauss_legendre(orders.radial, r_inner, r_outer);
    let phases = angles(orders.angular);
    let dtheta = 2.0 * PI / orders.angular as f64;
    let mut nodes = Vec::with_capacity(radial.len() * phases.len());
    let mut weights = Vec::with_capacity(radial.len() * phases.len());
    for (r, w) in &radial {
        for e in &phases {
            nodes.push(center + e * *r);
            weights.push(w * r * dtheta);
        }
    }
    Quadrature {
        dim: 1,
        nodes,
        weights,
        radial_order: orders.radial,
        angular_order: orders.angular,
    }
}

/// Conical-product rule on the simplex `{u ∈ [0,1]^m, Σ u ≤ 1}` (weights sum to `1/m!`).
fn simplex_rule(m: usize, order: usize) -> Vec<(Vec<f64>, f64)> {
    if m == 0 {
        return vec![(Vec::new(), 1.0)];
    }
    let inner = simplex_rule(m - 1, order);
    let mut out = Vec::new();
    for (t, w) in gauss_legendre(order, 0.0, 1.0) {
        let jac = (1.0 - t).powi(m as i32 - 1);
        for (v, wv) in &inner {
            let mut u = Vec::with_capacity(m);
            u.push(t);
            u.extend(v.iter().map(|x| (1.0 - t) * x));
            out.push((u, w * jac * wv));
        }
    }
    out
}

/// Ball in ℂⁿ through `t_j = |z_j − c_j|²`: `dV = 2^{-n} s^{n−1} ds dσ(u) Π dθ_j`
/// with `t = s·u`, `u` on the standard simplex.
fn ball_rule(
    center: &[Complex64],
    radius: f64,
    orders: QuadratureOrders,
    cap: usize,
) -> Result<Quadrature> {
    let n = center.len();
    let total = orders.radial.pow(n as u32) * orders.angular.pow(n as u32);
    if total > cap {
        return Err(Error::TooManyNodes { nodes: total, cap });
    }
    let shells = gauss_legendre(orders.radial, 0.0, radius * radius);
    let simplex = simplex_rule(n - 1, orders.radial);
    let phases = angles(orders.angular);
    let dtheta = 2.0 * PI / orders.angular as f64;
    let scale = 0.5f64.powi(n as i32) * dtheta.powi(n as i32);

    let mut nodes = Vec::with_capacity(total * n);
    let mut weights = Vec::with_capacity(total);
    let mut phase_idx = vec![0usize; n];
    for (s, ws) in &shells {
        for (u, wu) in &simplex {
            let last = 1.0 - u.iter().sum::<f64>();
            let moduli: Vec<f64> = u
                .iter()
                .chain(std::iter::once(&last))
                .map(|x| (s * x.max(0.0)).sqrt())
                .collect();
            let w = ws * s.powi(n as i32 - 1) * wu * scale;
            phase_idx.iter_mut().for_each(|p| *p = 0);
            loop {
                for j in 0..n {
                    nodes.push(center[j] + phases[phase_idx[j]] * moduli[j]);
                }
                weights.push(w);
                // odometer over the angular grid
                let mut j = 0;
                while j < n {
                    phase_idx[j] += 1;
                    if phase_idx[j] < phases.len() {
                        break;
                    }
                    phase_idx[j] = 0;
                    j += 1;
                }
                if j == n {
                    break;
                }
            }
        }
    }
    Ok(Quadrature {
        dim: n,
        nodes,
        weights,
        radial_order: orders.radial,
        angular_order: orders.angular,
    })
}

/// Builds a quadrature with the default node cap.
pub fn build_quadrature(
    d: &Domain,
    radial_order: usize,
    angular_order: usize,
) -> Result<Quadrature> {
    build_quadrature_capped(
        d,
        QuadratureOrders::new(radial_order, angular_order),
        DEFAULT_MAX_NODES,
    )
}

pub fn build_quadrature_capped(
    d: &Domain,
    orders: QuadratureOrders,
    cap: usize,
) -> Result<Quadrature> {
    if !matches!(d.shape, Shape::Cloud { .. }) && (orders.radial < 4 || orders.angular < 4) {
        return Err(Error::Unsupported(format!(
            "quadrature orders must be at least 4, got ({}, {})",
            orders.radial, orders.angular
        )));
    }
    match &d.shape {
        Shape::Disk { center, radius } => Ok(ring_rule(*center, 0.0, *radius, orders)),
        Shape::Annulus { r_inner, r_outer } => Ok(ring_rule(
            Complex64::new(0.0, 0.0),
            *r_inner,
            *r_outer,
            orders,
        )),
        Shape::Polydisc { center, radii } => {
            let factors: Vec<Quadrature> = center
                .iter()
                .zip(radii)
                .map(|(c, r)| ring_rule(*c, 0.0, *r, orders))
                .collect();
            Quadrature::tensor(&factors, orders.radial, orders.angular, cap)
        }
        Shape::Ball { center, radius } => ball_rule(center, *radius, orders, cap),
        Shape::Cloud { nodes, weights } => {
            if nodes.len() > cap {
                return Err(Error::TooManyNodes {
                    nodes: nodes.len(),
                    cap,
                });
            }
            Ok(Quadrature {
                dim: nodes[0].len(),
                nodes: nodes.iter().flatten().copied().collect(),
                weights: weights.clone(),
                radial_order: 0,
                angular_order: 0,
            })
        }
        Shape::Product(factors) => {
            let rules = factors
                .iter()
                .map(|f| build_quadrature_capped(f, orders, cap))
                .collect::<Result<Vec<_>>>()?;
            Quadrature::tensor(&rules, orders.radial, orders.angular, cap)
        }
    }
}

/// JSON domain description, e.g. `{"shape":"disk","radius":1.0,"center":[0,0]}`.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct DomainSpec {
    pub shape: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radii: Option<Vec<f64>>,
    /// `[re, im]` for a disk, `[[re, im], …]` for polydiscs and balls.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<serde_json::Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_inner: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_outer: Option<f64>,
    /// CSV file of `re,im,…,weight` rows for clouds.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub factors: Option<Vec<DomainSpec>>,
}

fn parse_pair(v: &serde_json::Value) -> Result<Complex64> {
    let arr = v
        .as_array()
        .filter(|a| a.len() == 2)
        .ok_or_else(|| Error::Parse("expected [re, im]".into()))?;
    let re = arr[0]
        .as_f64()
        .ok_or_else(|| Error::Parse("non-numeric coordinate".into()))?;
    let im = arr[1]
        .as_f64()
        .ok_or_else(|| Error::Parse("non-numeric coordinate".into()))?;
    Ok(Complex64::new(re, im))
}

fn parse_center(v: Option<&serde_json::Value>, dim: usize) -> Result<Vec<Complex64>> {
    let Some(v) = v else {
        return Ok(vec![Complex64::new(0.0, 0.0); dim]);
    };
    let arr = v
        .as_array()
        .ok_or_else(|| Error::Parse("center must be an array".into()))?;
    if dim == 1 && arr.len() == 2 && arr.iter().all(serde_json::Value::is_number) {
        return Ok(vec![parse_pair(v)?]);
    }
    let center = arr.iter().map(parse_pair).collect::<Result<Vec<_>>>()?;
    if center.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: center.len(),
        });
    }
    Ok(center)
}

impl DomainSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("domain JSON: {e}")))
    }

    pub fn build(&self) -> Result<Domain> {
        let need = |v: Option<f64>, name: &str| {
            v.ok_or_else(|| Error::InvalidDomain(format!("shape `{}` needs `{name}`", self.shape)))
        };
        match self.shape.as_str() {
            "disk" => {
                let center = parse_center(self.center.as_ref(), 1)?;
                Domain::disk(center[0], self.radius.unwrap_or(1.0))
            }
            "polydisc" | "bidisc" => {
                let radii = match (&self.radii, self.dim) {
                    (Some(r), _) => r.clone(),
                    (None, Some(n)) => vec![self.radius.unwrap_or(1.0); n],
                    (None, None) if self.shape == "bidisc" => vec![self.radius.unwrap_or(1.0); 2],
                    _ => {
                        return Err(Error::InvalidDomain(
                            "polydisc needs `radii` or `dim`".into(),
                        ))
                    }
                };
                let center = parse_center(self.center.as_ref(), radii.len())?;
                Domain::polydisc(center, radii)
            }
            "ball" => {
                let dim = match (&self.center, self.dim) {
                    (_, Some(n)) => n,
                    (Some(serde_json::Value::Array(a)), None) => a.len(),
                    _ => 2,
                };
                Domain::ball(
                    parse_center(self.center.as_ref(), dim)?,
                    self.radius.unwrap_or(1.0),
                )
            }
            "annulus" => {
                Domain::annulus(need(self.r_inner, "rInner")?, need(self.r_outer, "rOuter")?)
            }
            "cloud" => {
                let path = self
                    .csv
                    .as_ref()
                    .ok_or_else(|| Error::InvalidDomain("cloud needs a `csv` path".into()))?;
                read_cloud_csv(Path::new(path))
            }
            "product" => {
                let factors = self
                    .factors
                    .as_ref()
                    .ok_or_else(|| Error::InvalidDomain("product needs `factors`".into()))?;
                let mut iter = factors.iter();
                let mut acc = iter
                    .next()
                    .ok_or_else(|| Error::InvalidDomain("empty product".into()))?
                    .build()?;
                for f in iter {
                    acc = acc.product(&f.build()?)?;
                }
                Ok(acc)
            }
            other => Err(Error::UnknownName {
                kind: "domain shape",
                name: other.to_string(),
            }),
        }
    }
}

/// Reads `re,im,…,weight` rows (one complex coordinate per axis, weight last).
pub fn parse_cloud_csv(text: &str) -> Result<Domain> {
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let values = line
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>();
        let values = match values {
            Ok(v) => v,
            // header row
            Err(_) if nodes.is_empty() && lineno == 0 => continue,
            Err(e) => return Err(Error::Parse(format!("cloud CSV line {}: {e}", lineno + 1))),
        };
        if values.len() < 3 || values.len() % 2 == 0 {
            return Err(Error::Parse(format!(
                "cloud CSV line {}: expected re,im,…,weight",
                lineno + 1
            )));
        }
        let (coords, w) = values.split_at(values.len() - 1);
        nodes.push(
            coords
                .chunks_exact(2)
                .map(|c| Complex64::new(c[0], c[1]))
                .collect(),
        );
        weights.push(w[0]);
    }
    Domain::cloud(nodes, weights)
}

pub fn read_cloud_csv(path: &Path) -> Result<Domain> {
    parse_cloud_csv(&std::fs::read_to_string(path)?)
}
