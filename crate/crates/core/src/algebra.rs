//! Multi-indices, the graded `≺` order, finitely supported functionals and
//! polynomial coefficient vectors.
//!
//! A functional `ξ` acts on a holomorphic germ `f` at a point `z` through its
//! Taylor coefficients: `(ξ·f)(z) = Σ_α ξ_α a_α` where `a_α = f^{(α)}(z)/α!`.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::de::{self, Deserializer, MapAccess, Visitor};
use serde::ser::{SerializeMap, Serializer};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A multi-index `α ∈ ℕⁿ` with its cached total degree `|α|`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct MultiIndex {
    entries: Vec<u32>,
    degree: u32,
}

impl MultiIndex {
    pub fn new(entries: Vec<u32>) -> Self {
        let degree = entries.iter().sum();
        Self { entries, degree }
    }

    pub fn zeros(dim: usize) -> Self {
        Self::new(vec![0; dim])
    }

    /// The index `k·e_axis`.
    pub fn axis(dim: usize, axis: usize, k: u32) -> Self {
        let mut entries = vec![0; dim];
        entries[axis] = k;
        Self::new(entries)
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn entries(&self) -> &[u32] {
        &self.entries
    }

    /// `α! = Π α_j!`
    pub fn factorial(&self) -> f64 {
        self.entries.iter().map(|&a| factorial(a)).product()
    }

    /// Componentwise `self ≤ other`.
    pub fn divides(&self, other: &MultiIndex) -> bool {
        self.dim() == other.dim() && self.entries.iter().zip(&other.entries).all(|(a, b)| a <= b)
    }

    /// Concatenation `(α, β)` used for product domains.
    pub fn concat(&self, other: &MultiIndex) -> MultiIndex {
        let mut entries = self.entries.clone();
        entries.extend_from_slice(&other.entries);
        MultiIndex::new(entries)
    }

    pub fn prec_cmp(&self, other: &MultiIndex) -> Result<Ordering> {
        prec_compare(self, other)
    }

    /// Serialization key `"a1,a2,…,an"`.
    pub fn key(&self) -> String {
        self.entries
            .iter()
            .map(|a| a.to_string())
            .collect::<Vec<_>>()
            .join(",")
    }

    pub fn parse_key(key: &str) -> Result<Self> {
        let trimmed = key.trim().trim_start_matches('(').trim_end_matches(')');
        let entries = trimmed
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<u32>()
                    .map_err(|_| Error::Parse(format!("invalid multi-index `{key}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        if entries.is_empty() {
            return Err(Error::Parse(format!("empty multi-index `{key}`")));
        }
        Ok(Self::new(entries))
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.key())
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.key())
    }
}

/// Graded order: `|α|` first, ties broken by the entries read from position
/// `n` down to `1` (the first differing entry decides).
pub fn prec_compare(a: &MultiIndex, b: &MultiIndex) -> Result<Ordering> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    Ok(graded_cmp(a, b))
}

fn graded_cmp(a: &MultiIndex, b: &MultiIndex) -> Ordering {
    a.degree.cmp(&b.degree).then_with(|| {
        for (x, y) in a.entries.iter().rev().zip(b.entries.iter().rev()) {
            match x.cmp(y) {
                Ordering::Equal => continue,
                other => return other,
            }
        }
        Ordering::Equal
    })
}

// Indices of different dimension never meet inside one map; ordering them by
// dimension first keeps `Ord` total.
impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.dim()
            .cmp(&other.dim())
            .then_with(|| graded_cmp(self, other))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// All `α ∈ ℕⁿ` with `|α| = degree`, in `≺` order.
pub fn indices_of_degree(dim: usize, degree: u32) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    let mut current = vec![0u32; dim];
    fill_degree(&mut current, 0, degree, &mut out);
    out.sort();
    out
}

fn fill_degree(current: &mut [u32], pos: usize, remaining: u32, out: &mut Vec<MultiIndex>) {
    if pos + 1 == current.len() {
        current[pos] = remaining;
        out.push(MultiIndex::new(current.to_vec()));
        return;
    }
    for k in 0..=remaining {
        current[pos] = k;
        fill_degree(current, pos + 1, remaining - k, out);
    }
    current[pos] = 0;
}

/// All `α ∈ ℕⁿ` with `|α| ≤ max_degree`, in `≺` order.
pub fn indices_up_to(dim: usize, max_degree: u32) -> Vec<MultiIndex> {
    (0..=max_degree)
        .flat_map(|d| indices_of_degree(dim, d))
        .collect()
}

pub fn factorial(k: u32) -> f64 {
    (1..=k).map(f64::from).product()
}

/// Generalized binomial coefficient `C(e, k)` for integer (possibly negative) `e`.
pub fn gbinom(e: i64, k: u32) -> f64 {
    if e >= 0 && (k as i64) > e {
        return 0.0;
    }
    let mut acc = 1.0;
    for i in 0..k as i64 {
        acc *= (e - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// Integer power that accepts negative exponents and treats `0^0 = 1`.
pub fn cpowi(z: Complex64, e: i64) -> Complex64 {
    if e == 0 {
        return Complex64::new(1.0, 0.0);
    }
    if e > 0 {
        z.powu(e as u32)
    } else {
        z.powu((-e) as u32).inv()
    }
}

/// A finitely supported functional `ξ ∈ ℓ₀⁽ⁿ⁾`.
#[derive(Clone, Debug, PartialEq)]
pub struct Functional {
    dim: usize,
    terms: BTreeMap<MultiIndex, Complex64>,
}

impl Functional {
    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            terms: BTreeMap::new(),
        }
    }

    /// `δ_α`: the functional picking the Taylor coefficient of index `α`.
    pub fn delta(alpha: MultiIndex) -> Self {
        let dim = alpha.dim();
        Self::zero(dim).with_term(alpha, Complex64::new(1.0, 0.0))
    }

    pub fn from_terms(
        dim: usize,
        terms: impl IntoIterator<Item = (MultiIndex, Complex64)>,
    ) -> Result<Self> {
        let mut out = Self::zero(dim);
        for (alpha, c) in terms {
            if alpha.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: alpha.dim(),
                });
            }
            out = out.with_term(alpha, c);
        }
        Ok(out)
    }

    /// Sets `ξ_α = c` (adding to any existing coefficient). Zero results are dropped.
    pub fn with_term(mut self, alpha: MultiIndex, c: Complex64) -> Self {
        assert_eq!(alpha.dim(), self.dim, "multi-index dimension");
        let entry = self
            .terms
            .entry(alpha.clone())
            .or_insert(Complex64::new(0.0, 0.0));
        *entry += c;
        if entry.norm() == 0.0 {
            self.terms.remove(&alpha);
        }
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coefficient(&self, alpha: &MultiIndex) -> Complex64 {
        self.terms.get(alpha).copied().unwrap_or_default()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &Complex64)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// `deg(ξ)`: the largest `|α|` with `ξ_α ≠ 0`.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(MultiIndex::degree).max()
    }

    /// The `≺`-smallest index carrying a nonzero coefficient.
    pub fn leading_index(&self) -> Option<&MultiIndex> {
        self.terms.keys().next()
    }

    pub(crate) fn ensure_nonzero(&self) -> Result<()> {
        if self.is_zero() {
            Err(Error::ZeroFunctional)
        } else {
            Ok(())
        }
    }

    /// `ξ⁽⁰⁾_{(α,β)} = ξ⁽¹⁾_α ξ⁽²⁾_β`.
    pub fn tensor(&self, other: &Functional) -> Functional {
        let mut out = Functional::zero(self.dim + other.dim);
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                out = out.with_term(a.concat(b), ca * cb);
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("functional serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("functional JSON: {e}")))
    }
}

impl Serialize for Functional {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.terms.len()))?;
        for (alpha, c) in &self.terms {
            map.serialize_entry(&alpha.key(), &[c.re, c.im])?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for Functional {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct FunctionalVisitor;

        impl<'de> Visitor<'de> for FunctionalVisitor {
            type Value = Functional;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a map from \"a1,…,an\" to [re, im]")
            }

            fn visit_map<A: MapAccess<'de>>(
                self,
                mut access: A,
            ) -> std::result::Result<Functional, A::Error> {
                let mut terms = Vec::new();
                while let Some((key, value)) = access.next_entry::<String, [f64; 2]>()? {
                    let alpha = MultiIndex::parse_key(&key).map_err(de::Error::custom)?;
                    terms.push((alpha, Complex64::new(value[0], value[1])));
                }
                let dim = terms
                    .first()
                    .map(|(a, _)| a.dim())
                    .ok_or_else(|| de::Error::custom("functional has no terms"))?;
                Functional::from_terms(dim, terms).map_err(de::Error::custom)
            }
        }

        deserializer.deserialize_map(FunctionalVisitor)
    }
}

/// Taylor coefficients of a polynomial `f(z) = Σ a_α (z − center)^α`.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyCoeffs {
    center: Vec<Complex64>,
    coeffs: BTreeMap<MultiIndex, Complex64>,
}

impl PolyCoeffs {
    pub fn new(center: Vec<Complex64>) -> Self {
        Self {
            center,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn from_terms(
        center: Vec<Complex64>,
        terms: impl IntoIterator<Item = (MultiIndex, Complex64)>,
    ) -> Result<Self> {
        let mut out = Self::new(center);
        for (alpha, c) in terms {
            if alpha.dim() != out.dim() {
                return Err(Error::DimensionMismatch {
                    expected: out.dim(),
                    found: alpha.dim(),
                });
            }
            *out.coeffs.entry(alpha).or_default() += c;
        }
        Ok(out)
    }

    /// `c·(z − center)^α`
    pub fn monomial(center: Vec<Complex64>, alpha: MultiIndex, c: Complex64) -> Self {
        Self::from_terms(center, [(alpha, c)]).expect("monomial dimension")
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn center(&self) -> &[Complex64] {
        &self.center
    }

    pub fn coefficient(&self, alpha: &MultiIndex) -> Complex64 {
        self.coeffs.get(alpha).copied().unwrap_or_default()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &Complex64)> {
        self.coeffs.iter()
    }

    pub fn max_degree(&self) -> u32 {
        self.coeffs
            .keys()
            .map(MultiIndex::degree)
            .max()
            .unwrap_or(0)
    }

    pub fn eval(&self, z: &[Complex64]) -> Complex64 {
        self.coeffs
            .iter()
            .map(|(alpha, c)| {
                let mono: Complex64 = alpha
                    .entries()
                    .iter()
                    .zip(z.iter().zip(&self.center))
                    .map(|(&a, (zj, cj))| (zj - cj).powu(a))
                    .product();
                c * mono
            })
            .sum()
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            center: self.center.clone(),
            coeffs: self
                .coeffs
                .iter()
                .map(|(a, c)| (a.clone(), c * s))
                .collect(),
        }
    }

    /// `a·self + b·other`, both re-expanded about `self`'s center.
    pub fn linear_combination(&self, a: Complex64, other: &PolyCoeffs, b: Complex64) -> Self {
        let other = other.taylor_shift(&self.center);
        let mut out = self.scale(a);
        for (alpha, c) in other.coeffs {
            *out.coeffs.entry(alpha).or_default() += b * c;
        }
        out
    }

    /// Binomial re-expansion about `new_center`.
    pub fn taylor_shift(&self, new_center: &[Complex64]) -> PolyCoeffs {
        assert_eq!(new_center.len(), self.dim(), "center dimension");
        let shift: Vec<Complex64> = new_center
            .iter()
            .zip(&self.center)
            .map(|(n, o)| n - o)
            .collect();
        if shift.iter().all(|d| d.norm() == 0.0) {
            return PolyCoeffs {
                center: new_center.to_vec(),
                coeffs: self.coeffs.clone(),
            };
        }
        let mut out: BTreeMap<MultiIndex, Complex64> = BTreeMap::new();
        for (beta, c) in &self.coeffs {
            // (z − c)^β = Π_j ((z − c') + d_j)^{β_j}
            let mut partial: Vec<(Vec<u32>, Complex64)> = vec![(Vec::new(), *c)];
            for (j, &bj) in beta.entries().iter().enumerate() {
                let mut next = Vec::with_capacity(partial.len() * (bj as usize + 1));
                for (prefix, value) in &partial {
                    for aj in 0..=bj {
                        let factor = gbinom(bj as i64, aj) * shift[j].powu(bj - aj);
                        let mut idx = prefix.clone();
                        idx.push(aj);
                        next.push((idx, value * factor));
                    }
                }
                partial = next;
            }
            for (idx, value) in partial {
                *out.entry(MultiIndex::new(idx)).or_default() += value;
            }
        }
        PolyCoeffs {
            center: new_center.to_vec(),
            coeffs: out,
        }
    }
}

/// `(ξ·f)(z) = Σ_α ξ_α · (Taylor coefficient of f at z, index α)`.
pub fn functional_apply(xi: &Functional, f: &PolyCoeffs, z: &[Complex64]) -> Result<Complex64> {
    if xi.dim() != f.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            found: xi.dim(),
        });
    }
    if z.len() != f.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            found: z.len(),
        });
    }
    if z.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(Error::InvalidInput(
            "evaluation point must be finite".into(),
        ));
    }
    let shifted = f.taylor_shift(z);
    Ok(xi
        .terms()
        .map(|(alpha, c)| c * shifted.coefficient(alpha))
        .sum())
}
