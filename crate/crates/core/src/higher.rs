//! Higher-order kernels `K^{H,p}` for a homogeneous polynomial `H`, the
//! functional family `S_H`, and the two routes of the infimum identity
//! `K^{H,p}(z) = min_{ξ ∈ S_H} K_{ξ,p}(z)`.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::algebra::{functional_apply, indices_up_to, Functional, MultiIndex, PolyCoeffs};
use crate::error::{Error, Result};
use crate::kernels::{kernel2_diagonal, kernelp_diagonal, KernelEvaluation};
use crate::optimize::{nelder_mead, NelderMeadOptions};
use crate::pspace::{PolySpace, SpaceVector};
use crate::solver::{self, Constraints, SolverOptions};

/// `H(z) = Σ_{|α|=k} a_α z^α` with at least one nonzero coefficient.
#[derive(Clone, Debug, PartialEq)]
pub struct HomogeneousPolynomial {
    dim: usize,
    degree: u32,
    coeffs: BTreeMap<MultiIndex, Complex64>,
}

impl HomogeneousPolynomial {
    pub fn new(
        dim: usize,
        terms: impl IntoIterator<Item = (MultiIndex, Complex64)>,
    ) -> Result<Self> {
        let mut coeffs: BTreeMap<MultiIndex, Complex64> = BTreeMap::new();
        let mut degree = None;
        for (alpha, c) in terms {
            if alpha.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: alpha.dim(),
                });
            }
            match degree {
                None => degree = Some(alpha.degree()),
                Some(k) if k != alpha.degree() => {
                    return Err(Error::InvalidInput(format!(
                        "H must be homogeneous: found degrees {k} and {}",
                        alpha.degree()
                    )))
                }
                _ => {}
            }
            *coeffs.entry(alpha).or_default() += c;
        }
        coeffs.retain(|_, c| c.norm() != 0.0);
        let degree =
            degree.ok_or_else(|| Error::InvalidInput("H needs a nonzero coefficient".into()))?;
        if coeffs.is_empty() {
            return Err(Error::InvalidInput("H needs a nonzero coefficient".into()));
        }
        Ok(Self {
            dim,
            degree,
            coeffs,
        })
    }

    /// `c·z^α`
    pub fn monomial(alpha: MultiIndex, c: Complex64) -> Result<Self> {
        Self::new(alpha.dim(), [(alpha, c)])
    }

    /// `H = 1` in dimension `dim`.
    pub fn one(dim: usize) -> Self {
        Self::monomial(MultiIndex::zeros(dim), Complex64::new(1.0, 0.0)).expect("constant")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn coefficient(&self, alpha: &MultiIndex) -> Complex64 {
        self.coeffs.get(alpha).copied().unwrap_or_default()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &Complex64)> {
        self.coeffs.iter()
    }

    /// Functional of `P_H`: `ξ_α = a_α α!` on `|α| = k`.
    pub fn operator_functional(&self) -> Functional {
        Functional::from_terms(
            self.dim,
            self.coeffs
                .iter()
                .map(|(a, c)| (a.clone(), c * a.factorial())),
        )
        .expect("dimensions agree")
    }

    /// Parses `"z1^2: 1.0, z1 z2: 0.5"`. A bare `z` means `z1`; `1` is the constant
    /// monomial; coefficients may be complex, e.g. `1.5-2i`.
    pub fn parse(text: &str, dim: Option<usize>) -> Result<Self> {
        let mut raw: Vec<(Vec<(usize, u32)>, Complex64)> = Vec::new();
        let mut max_var = 0;
        for term in text.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let (mono, coeff) = term.rsplit_once(':').ok_or_else(|| {
                Error::Parse(format!("H term `{term}` needs `monomial: coefficient`"))
            })?;
            let coeff = parse_complex(coeff.trim())?;
            let mut factors = Vec::new();
            for factor in mono.split_whitespace() {
                if factor == "1" {
                    continue;
                }
                let (var, power) = match factor.split_once('^') {
                    Some((v, e)) => (
                        v,
                        e.parse::<u32>()
                            .map_err(|_| Error::Parse(format!("bad exponent in `{factor}`")))?,
                    ),
                    None => (factor, 1),
                };
                let idx = var
                    .strip_prefix('z')
                    .ok_or_else(|| Error::Parse(format!("unknown variable `{var}`")))?;
                let idx = if idx.is_empty() {
                    1
                } else {
                    idx.parse::<usize>()
                        .map_err(|_| Error::Parse(format!("unknown variable `{var}`")))?
                };
                if idx == 0 {
                    return Err(Error::Parse("variables are numbered from z1".into()));
                }
                max_var = max_var.max(idx);
                factors.push((idx - 1, power));
            }
            raw.push((factors, coeff));
        }
        let dim = dim.unwrap_or(max_var.max(1));
        if max_var > dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: max_var,
            });
        }
        let terms = raw.into_iter().map(|(factors, c)| {
            let mut e = vec![0u32; dim];
            for (j, k) in factors {
                e[j] += k;
            }
            (MultiIndex::new(e), c)
        });
        Self::new(dim, terms)
    }

    /// `{"degree": k, "a1,…,an": [re, im], …}`
    pub fn to_json(&self) -> serde_json::Value {
        let mut map = serde_json::Map::new();
        map.insert("degree".into(), self.degree.into());
        for (a, c) in &self.coeffs {
            map.insert(a.key(), serde_json::json!([c.re, c.im]));
        }
        serde_json::Value::Object(map)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("H JSON: {e}")))?;
        let obj = value
            .as_object()
            .ok_or_else(|| Error::Parse("H JSON must be an object".into()))?;
        let mut terms = Vec::new();
        let mut dim = None;
        for (key, v) in obj {
            if key == "degree" {
                continue;
            }
            let alpha = MultiIndex::parse_key(key)?;
            if *dim.get_or_insert(alpha.dim()) != alpha.dim() {
                return Err(Error::Parse("H JSON mixes dimensions".into()));
            }
            let pair = v
                .as_array()
                .filter(|a| a.len() == 2)
                .and_then(|a| Some(Complex64::new(a[0].as_f64()?, a[1].as_f64()?)))
                .ok_or_else(|| {
                    Error::Parse(format!("H coefficient for `{key}` must be [re, im]"))
                })?;
            terms.push((alpha, pair));
        }
        let h = Self::new(
            dim.ok_or_else(|| Error::Parse("H JSON has no terms".into()))?,
            terms,
        )?;
        if let Some(k) = obj.get("degree").and_then(serde_json::Value::as_u64) {
            if k != h.degree as u64 {
                return Err(Error::Parse(format!(
                    "H JSON degree {k} disagrees with its terms"
                )));
            }
        }
        Ok(h)
    }
}

/// Parses `re`, `re+imi`, `re-imi` or `imi`.
pub fn parse_complex(text: &str) -> Result<Complex64> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || Error::Parse(format!("bad complex number `{text}`"));
    if let Some(body) = s.strip_suffix('i') {
        // split at the last sign that is not part of an exponent
        let bytes = body.as_bytes();
        let split = (1..bytes.len()).rev().find(|&i| {
            (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E')
        });
        let (re, im) = match split {
            Some(i) => (&body[..i], &body[i..]),
            None => ("0", body),
        };
        let im = match im {
            "" | "+" => 1.0,
            "-" => -1.0,
            other => other.parse::<f64>().map_err(|_| bad())?,
        };
        Ok(Complex64::new(re.parse::<f64>().map_err(|_| bad())?, im))
    } else {
        Ok(Complex64::new(s.parse::<f64>().map_err(|_| bad())?, 0.0))
    }
}

/// `P_H(f)(z) = Σ a_α (D^α f)(z)`.
pub fn apply_ph(h: &HomogeneousPolynomial, f: &PolyCoeffs, z: &[Complex64]) -> Result<Complex64> {
    functional_apply(&h.operator_functional(), f, z)
}

/// The affine family `S_H`: `ξ_α = a_α α!` at `|α| = k`, zero above, free below.
#[derive(Clone, Debug)]
pub struct FunctionalFamily {
    pub h: HomogeneousPolynomial,
    pub free: Vec<MultiIndex>,
}

impl FunctionalFamily {
    pub fn new(h: &HomogeneousPolynomial) -> Self {
        let free = if h.degree == 0 {
            Vec::new()
        } else {
            indices_up_to(h.dim, h.degree - 1)
        };
        Self { h: h.clone(), free }
    }

    pub fn free_dim(&self) -> usize {
        self.free.len()
    }

    pub fn member(&self, free: &[Complex64]) -> Result<Functional> {
        if free.len() != self.free.len() {
            return Err(Error::DimensionMismatch {
                expected: self.free.len(),
                found: free.len(),
            });
        }
        let mut xi = self.h.operator_functional();
        for (a, c) in self.free.iter().zip(free) {
            xi = xi.with_term(a.clone(), *c);
        }
        Ok(xi)
    }

    pub fn contains(&self, xi: &Functional) -> bool {
        let fixed = self.h.operator_functional();
        xi.dim() == self.h.dim
            && xi.terms().all(|(a, c)| {
                a.degree() < self.h.degree
                    || (a.degree() == self.h.degree
                        && (c - fixed.coefficient(a)).norm() <= 1e-12 * c.norm().max(1.0))
            })
            && fixed
                .terms()
                .all(|(a, c)| (xi.coefficient(a) - c).norm() <= 1e-12 * c.norm().max(1.0))
    }

    pub fn free_part(&self, xi: &Functional) -> Vec<Complex64> {
        self.free.iter().map(|a| xi.coefficient(a)).collect()
    }
}

/// `κ^{E₀,p}`: minimize `‖f‖_p` subject to `(D^α f)(z) = 0` for `α ∈ E₀`
/// and `(η·f)(z) = 1`.
pub fn partition_kernel(
    space: &PolySpace,
    e0: &[MultiIndex],
    eta: &Functional,
    z: &[Complex64],
    p: f64,
    start: Option<&SpaceVector>,
    opts: &SolverOptions,
) -> Result<KernelEvaluation> {
    if z.len() != space.dim() || eta.dim() != space.dim() {
        return Err(Error::DimensionMismatch {
            expected: space.dim(),
            found: z.len(),
        });
    }
    if !space.domain().is_cloud() && !space.domain().contains(z) {
        return Err(Error::OutsideDomain);
    }
    if eta.is_zero() {
        return Err(Error::ZeroFunctional);
    }
    let n = space.len();
    let m = e0.len() + 1;
    if m > n {
        return Err(Error::Infeasible(format!(
            "{m} constraints exceed the space dimension {n}"
        )));
    }
    let mut rows = DMatrix::zeros(m, n);
    for (r, alpha) in e0.iter().enumerate() {
        for i in 0..n {
            rows[(r, i)] = space.taylor_coeff(i, z, alpha);
        }
    }
    let eta_row = space.functional_row(eta, z)?;
    rows.row_mut(m - 1).copy_from(&eta_row.transpose());
    let mut rhs = DVector::zeros(m);
    rhs[m - 1] = Complex64::new(1.0, 0.0);
    let constraints = Constraints { rows, rhs };
    let sol = solver::minimize(space, &constraints, p, start, opts)?;
    Ok(KernelEvaluation {
        m: sol.objective.powf(1.0 / p),
        kernel: sol.objective.recip(),
        p,
        z: z.to_vec(),
        xi: eta.clone(),
        degree: space.degree(),
        minimizer: sol.coeffs,
        diagnostics: sol.diagnostics,
    })
}

fn check_higher(space: &PolySpace, h: &HomogeneousPolynomial) -> Result<()> {
    if h.dim != space.dim() {
        return Err(Error::DimensionMismatch {
            expected: space.dim(),
            found: h.dim,
        });
    }
    if !space.is_laurent() && h.degree > space.degree() {
        return Err(Error::Infeasible(format!(
            "H has degree {} above the space degree {}",
            h.degree,
            space.degree()
        )));
    }
    Ok(())
}

/// `K^{H,p}(z)`: minimize `‖f‖_p` with vanishing `(k−1)`-jet at `z` and `P_H(f)(z) = 1`.
pub fn higher_kernel_direct(
    space: &PolySpace,
    h: &HomogeneousPolynomial,
    z: &[Complex64],
    p: f64,
    opts: &SolverOptions,
) -> Result<KernelEvaluation> {
    check_higher(space, h)?;
    let family = FunctionalFamily::new(h);
    let (alpha, a) = h.terms().next().expect("nonzero H");
    let start = PolyCoeffs::monomial(z.to_vec(), alpha.clone(), (a * alpha.factorial()).inv());
    let start = space.from_poly(&start).ok();
    partition_kernel(
        space,
        &family.free,
        &h.operator_functional(),
        z,
        p,
        start.as_ref(),
        opts,
    )
}

/// `ξ* ∈ S_H` with `c_α(ξ*) = 0` for `|α| < k`, so that `K_{ξ*,2}(z) = K^{H,2}(z)`.
pub fn minimizing_xi_p2(
    space: &PolySpace,
    h: &HomogeneousPolynomial,
    z: &[Complex64],
) -> Result<Functional> {
    check_higher(space, h)?;
    let family = FunctionalFamily::new(h);
    let nf = family.free_dim();
    if nf == 0 {
        return family.member(&[]);
    }
    let onb = space.orthonormal_basis(z)?;
    let position = |a: &MultiIndex| {
        onb.position(a).ok_or_else(|| {
            Error::Solver(format!("jet index {a} missing from the orthonormal basis"))
        })
    };
    let free_pos: Vec<usize> = family.free.iter().map(position).collect::<Result<_>>()?;
    let fixed = h.operator_functional();
    let fixed_pos: Vec<(usize, Complex64)> = fixed
        .terms()
        .map(|(a, c)| Ok((position(a)?, *c)))
        .collect::<Result<_>>()?;
    // Row α, column β: (D^β σ_α)(z)/β!, upper triangular since the jets are ≺-triangular.
    let a = DMatrix::from_fn(nf, nf, |r, c| onb.jets[(free_pos[c], free_pos[r])]);
    let rhs = DVector::from_fn(nf, |r, _| {
        -fixed_pos
            .iter()
            .map(|(b, c)| c * onb.jets[(*b, free_pos[r])])
            .sum::<Complex64>()
    });
    let diag_max = (0..nf).map(|i| a[(i, i)].norm()).fold(0.0, f64::max);
    if (0..nf).any(|i| !(a[(i, i)].norm() > 1e-14 * diag_max)) {
        return Err(Error::Solver("jet system lost triangularity".into()));
    }
    let x = a
        .solve_upper_triangular(&rhs)
        .ok_or_else(|| Error::Solver("singular jet system".into()))?;
    family.member(x.as_slice())
}

#[derive(Clone, Debug)]
pub struct ViaInfOptions {
    pub nelder_mead: NelderMeadOptions,
    /// Initial simplex edge relative to `1 + |seed|_∞`.
    pub relative_step: f64,
}

impl Default for ViaInfOptions {
    fn default() -> Self {
        Self {
            nelder_mead: NelderMeadOptions {
                max_evals: 1500,
                f_tol: 1e-12,
                x_tol: 1e-9,
                ..Default::default()
            },
            relative_step: 0.1,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct LocalMinimum {
    pub seed: &'static str,
    pub kernel: f64,
    pub converged: bool,
    pub evaluations: usize,
}

#[derive(Clone, Debug)]
pub struct ViaInf {
    pub kernel: f64,
    pub xi_star: Functional,
    pub minima: Vec<LocalMinimum>,
    /// Smallest `K_{ξ,p}(z)` among every probed `ξ`, equal to `kernel`.
    pub probed_min: f64,
    pub converged: bool,
}

/// `min_{ξ ∈ S_H} K_{ξ,p}(z)` by Nelder–Mead over the free coordinates,
/// seeded at `0` and at the `p = 2` minimizing functional.
pub fn higher_kernel_via_inf(
    space: &PolySpace,
    h: &HomogeneousPolynomial,
    z: &[Complex64],
    p: f64,
    opts: &SolverOptions,
    outer: &ViaInfOptions,
) -> Result<ViaInf> {
    if p < 1.0 {
        return Err(Error::Unsupported("the infimum route needs p ≥ 1".into()));
    }
    check_higher(space, h)?;
    let family = FunctionalFamily::new(h);
    let evaluate = |xi: &Functional| -> Result<f64> {
        if p == 2.0 {
            Ok(kernel2_diagonal(space, xi, z)?.kernel)
        } else {
            Ok(kernelp_diagonal(space, xi, z, p, opts)?.kernel)
        }
    };
    let nf = family.free_dim();
    let to_real = |v: &[Complex64]| -> Vec<f64> {
        v.iter()
            .map(|c| c.re)
            .chain(v.iter().map(|c| c.im))
            .collect()
    };
    let to_complex = |x: &[f64]| -> Vec<Complex64> {
        (0..nf).map(|i| Complex64::new(x[i], x[i + nf])).collect()
    };

    let p2 = minimizing_xi_p2(space, h, z)?;
    let seeds: [(&'static str, Vec<Complex64>); 2] = [
        ("zero", vec![Complex64::new(0.0, 0.0); nf]),
        ("p2", family.free_part(&p2)),
    ];
    let mut minima = Vec::new();
    let mut best: Option<(f64, Vec<Complex64>)> = None;
    let mut probed_min = f64::INFINITY;
    let mut converged = true;
    let mut first_error = None;
    for (name, seed) in seeds {
        let x0 = to_real(&seed);
        let scale = 1.0 + x0.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let nm_opts = NelderMeadOptions {
            step: outer.relative_step * scale,
            ..outer.nelder_mead.clone()
        };
        let res = nelder_mead(
            |x| match family.member(&to_complex(x)).and_then(|xi| evaluate(&xi)) {
                Ok(k) => {
                    probed_min = probed_min.min(k);
                    k
                }
                Err(e) => {
                    first_error.get_or_insert(e);
                    f64::INFINITY
                }
            },
            &x0,
            &nm_opts,
        );
        converged &= res.converged;
        minima.push(LocalMinimum {
            seed: name,
            kernel: res.value,
            converged: res.converged,
            evaluations: res.evals,
        });
        if best.as_ref().map_or(true, |b| res.value < b.0) {
            best = Some((res.value, to_complex(&res.x)));
        }
    }
    let (kernel, free) = best.expect("two seeds");
    if !kernel.is_finite() {
        return Err(
            first_error.unwrap_or_else(|| Error::Solver("outer minimization failed".into()))
        );
    }
    Ok(ViaInf {
        kernel,
        xi_star: family.member(&free)?,
        minima,
        probed_min,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::Domain;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn zk(k: u32) -> HomogeneousPolynomial {
        HomogeneousPolynomial::monomial(MultiIndex::new(vec![k]), c(1.0)).unwrap()
    }

    fn poly(k: u32) -> PolyCoeffs {
        PolyCoeffs::monomial(vec![c(0.0)], MultiIndex::new(vec![k]), c(1.0))
    }

    #[test]
    fn apply_ph_examples() {
        assert_eq!(apply_ph(&zk(2), &poly(3), &[c(0.0)]).unwrap(), c(0.0));
        assert_eq!(apply_ph(&zk(2), &poly(2), &[c(0.0)]).unwrap(), c(2.0));
        let f = PolyCoeffs::from_terms(
            vec![c(0.0)],
            [
                (MultiIndex::new(vec![1]), c(2.0)),
                (MultiIndex::new(vec![0]), c(1.0)),
            ],
        )
        .unwrap();
        let z = [Complex64::new(0.3, 0.2)];
        assert_eq!(
            apply_ph(&HomogeneousPolynomial::one(1), &f, &z).unwrap(),
            f.eval(&z)
        );
    }

    #[test]
    fn parse_examples() {
        let h = HomogeneousPolynomial::parse("z1^2: 1.0, z1 z2: 0.5", None).unwrap();
        assert_eq!(h.dim(), 2);
        assert_eq!(h.degree(), 2);
        assert_eq!(h.coefficient(&MultiIndex::new(vec![1, 1])), c(0.5));
        assert!(HomogeneousPolynomial::parse("z1^2: 1, z1: 1", None).is_err());
        let h = HomogeneousPolynomial::parse("z: 1-2i", None).unwrap();
        assert_eq!(
            h.coefficient(&MultiIndex::new(vec![1])),
            Complex64::new(1.0, -2.0)
        );
        assert_eq!(
            HomogeneousPolynomial::parse("1: 1", Some(2)).unwrap(),
            HomogeneousPolynomial::one(2)
        );
        let back = HomogeneousPolynomial::from_json(&h.to_json().to_string()).unwrap();
        assert_eq!(back, h);
    }

    #[test]
    fn direct_examples() {
        let s = PolySpace::new(&Domain::unit_disk()).unwrap();
        let opts = SolverOptions::default();
        let e = higher_kernel_direct(&s, &zk(2), &[c(0.0)], 2.0, &opts).unwrap();
        assert_relative_eq!(e.kernel, 12.0 / PI, max_relative = 1e-10);
        let e = higher_kernel_direct(&s, &zk(1), &[c(0.0)], 2.0, &opts).unwrap();
        assert_relative_eq!(e.kernel, 2.0 / PI, max_relative = 1e-10);
        let e = higher_kernel_direct(&s, &zk(1), &[c(0.0)], 1.5, &opts).unwrap();
        assert_relative_eq!(e.kernel, 3.5 / (2.0 * PI), max_relative = 1e-6);
        let one = higher_kernel_direct(&s, &HomogeneousPolynomial::one(1), &[c(0.4)], 1.5, &opts)
            .unwrap();
        let d0 = kernelp_diagonal(
            &s,
            &Functional::delta(MultiIndex::zeros(1)),
            &[c(0.4)],
            1.5,
            &opts,
        )
        .unwrap();
        assert_relative_eq!(one.kernel, d0.kernel, max_relative = 1e-9);
        let small = PolySpace::with_degree(&Domain::unit_disk(), 2).unwrap();
        assert!(higher_kernel_direct(&small, &zk(3), &[c(0.0)], 2.0, &opts).is_err());
    }

    #[test]
    fn minimizing_xi_examples() {
        let s = PolySpace::new(&Domain::unit_disk()).unwrap();
        let xi = minimizing_xi_p2(&s, &zk(2), &[c(0.0)]).unwrap();
        assert!((xi.coefficient(&MultiIndex::new(vec![2])) - c(2.0)).norm() < 1e-12);
        assert!(xi.coefficient(&MultiIndex::new(vec![0])).norm() < 1e-10);
        assert!(xi.coefficient(&MultiIndex::new(vec![1])).norm() < 1e-10);
        let z = [c(0.3)];
        let xi = minimizing_xi_p2(&s, &zk(1), &z).unwrap();
        assert!(xi.coefficient(&MultiIndex::new(vec![0])).norm() > 1e-3);
        let k_xi = kernel2_diagonal(&s, &xi, &z).unwrap().kernel;
        let direct = higher_kernel_direct(&s, &zk(1), &z, 2.0, &SolverOptions::default())
            .unwrap()
            .kernel;
        assert_relative_eq!(k_xi, direct, max_relative = 1e-8);
        let xi = minimizing_xi_p2(&s, &HomogeneousPolynomial::one(1), &z).unwrap();
        assert_eq!(xi, Functional::delta(MultiIndex::zeros(1)));
    }

    #[test]
    fn via_inf_examples() {
        let s = PolySpace::new(&Domain::unit_disk()).unwrap();
        let opts = SolverOptions::default();
        let r = higher_kernel_via_inf(&s, &zk(2), &[c(0.0)], 2.0, &opts, &ViaInfOptions::default())
            .unwrap();
        assert_relative_eq!(r.kernel, 12.0 / PI, max_relative = 1e-9);
        let family = FunctionalFamily::new(&zk(2));
        assert!(family.free_part(&r.xi_star).iter().all(|x| x.norm() < 1e-4));
        let r = higher_kernel_via_inf(&s, &zk(1), &[c(0.0)], 1.5, &opts, &ViaInfOptions::default())
            .unwrap();
        let direct = higher_kernel_direct(&s, &zk(1), &[c(0.0)], 1.5, &opts)
            .unwrap()
            .kernel;
        assert_relative_eq!(r.kernel, direct, max_relative = 1e-4);
        assert!(r.probed_min >= r.kernel - 1e-8);
    }

    #[test]
    fn family_membership() {
        let h = HomogeneousPolynomial::parse("z1^2: 1.0, z1 z2: 0.5", None).unwrap();
        let family = FunctionalFamily::new(&h);
        assert_eq!(family.free_dim(), 3);
        let xi = family
            .member(&[c(1.0), c(-2.0), Complex64::new(0.0, 1.0)])
            .unwrap();
        assert!(family.contains(&xi));
        assert_eq!(xi.coefficient(&MultiIndex::new(vec![2, 0])), c(2.0));
        assert_eq!(xi.coefficient(&MultiIndex::new(vec![1, 1])), c(0.5));
        assert!(!family.contains(&Functional::delta(MultiIndex::new(vec![0, 2]))));
    }

    #[test]
    fn parse_complex_forms() {
        assert_eq!(parse_complex("2").unwrap(), c(2.0));
        assert_eq!(
            parse_complex("1.5e-1-2i").unwrap(),
            Complex64::new(0.15, -2.0)
        );
        assert_eq!(parse_complex("-i").unwrap(), Complex64::new(0.0, -1.0));
        assert_eq!(parse_complex("3i").unwrap(), Complex64::new(0.0, 3.0));
        assert!(parse_complex("abc").is_err());
    }
}
