//! Dense complex linear algebra on split real storage.
//!
//! Tall node-by-basis matrices are kept as separate real and imaginary parts so
//! products go through the blocked real GEMM.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct SplitMatrix {
    pub re: DMatrix<f64>,
    pub im: DMatrix<f64>,
}

impl SplitMatrix {
    pub fn from_complex(m: &DMatrix<Complex64>) -> Self {
        Self {
            re: m.map(|c| c.re),
            im: m.map(|c| c.im),
        }
    }

    pub fn nrows(&self) -> usize {
        self.re.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.re.ncols()
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        Complex64::new(self.re[(r, c)], self.im[(r, c)])
    }

    /// `self · b`
    pub fn mul(&self, b: &DMatrix<Complex64>) -> SplitMatrix {
        let br = b.map(|c| c.re);
        let bi = b.map(|c| c.im);
        SplitMatrix {
            re: &self.re * &br - &self.im * &bi,
            im: &self.re * &bi + &self.im * &br,
        }
    }

    /// `self · v`
    pub fn mul_vec(&self, v: &DVector<Complex64>) -> Vec<Complex64> {
        let vr = v.map(|c| c.re);
        let vi = v.map(|c| c.im);
        let re = &self.re * &vr - &self.im * &vi;
        let im = &self.re * &vi + &self.im * &vr;
        re.iter()
            .zip(im.iter())
            .map(|(a, b)| Complex64::new(*a, *b))
            .collect()
    }

    /// `selfᴴ · diag(w) · v`
    pub fn adjoint_mul_weighted(&self, w: &[f64], v: &[Complex64]) -> DVector<Complex64> {
        let wr = DVector::from_iterator(v.len(), v.iter().zip(w).map(|(c, w)| c.re * w));
        let wi = DVector::from_iterator(v.len(), v.iter().zip(w).map(|(c, w)| c.im * w));
        let re = self.re.tr_mul(&wr) + self.im.tr_mul(&wi);
        let im = self.re.tr_mul(&wi) - self.im.tr_mul(&wr);
        DVector::from_iterator(
            re.len(),
            re.iter()
                .zip(im.iter())
                .map(|(a, b)| Complex64::new(*a, *b)),
        )
    }

    /// `selfᴴ · diag(w) · self`, Hermitian by construction.
    pub fn weighted_gram(&self, w: &[f64]) -> DMatrix<Complex64> {
        let n = self.ncols();
        let parts = chunked_sum(self.nrows(), n, 2 * n, |start, len| {
            let re = self.re.rows(start, len);
            let im = self.im.rows(start, len);
            let wr = scale_rows(&re.into_owned(), &w[start..start + len]).transpose();
            let wi = scale_rows(&im.into_owned(), &w[start..start + len]).transpose();
            let mut out = DMatrix::zeros(n, 2 * n);
            out.columns_mut(0, n).copy_from(&(&wr * re + &wi * im));
            out.columns_mut(n, n).copy_from(&(&wr * im - &wi * re));
            out
        });
        let mut g = DMatrix::from_fn(n, n, |i, j| {
            Complex64::new(parts[(i, j)], parts[(i, n + j)])
        });
        hermitize(&mut g);
        g
    }
}

/// Rows per block in [`chunked_sum`].
const CHUNK: usize = 4096;

/// `Σ_blocks f(start, len)` over fixed row blocks of `0..nrows`, evaluated in
/// parallel and summed in block order so the result is thread-count independent.
pub fn chunked_sum(
    nrows: usize,
    out_rows: usize,
    out_cols: usize,
    f: impl Fn(usize, usize) -> DMatrix<f64> + Sync,
) -> DMatrix<f64> {
    let starts: Vec<usize> = (0..nrows).step_by(CHUNK).collect();
    let parts: Vec<DMatrix<f64>> = starts
        .par_iter()
        .map(|&s| f(s, CHUNK.min(nrows - s)))
        .collect();
    parts
        .into_iter()
        .fold(DMatrix::zeros(out_rows, out_cols), |acc, p| acc + p)
}

pub fn scale_rows(m: &DMatrix<f64>, w: &[f64]) -> DMatrix<f64> {
    let mut out = m.clone();
    for (mut row, wq) in out.row_iter_mut().zip(w) {
        row *= *wq;
    }
    out
}

/// `mᵀ · diag(w) · m` for real `m` and signed `w`.
pub fn weighted_ata(m: &DMatrix<f64>, w: &[f64]) -> DMatrix<f64> {
    let n = m.ncols();
    let mut g = chunked_sum(m.nrows(), n, n, |start, len| {
        let rows = m.rows(start, len);
        scale_rows(&rows.into_owned(), &w[start..start + len]).transpose() * rows
    });
    symmetrize(&mut g);
    g
}

pub fn symmetrize(g: &mut DMatrix<f64>) {
    let n = g.nrows();
    for i in 0..n {
        for j in 0..i {
            let v = 0.5 * (g[(i, j)] + g[(j, i)]);
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
    }
}

pub fn hermitize(g: &mut DMatrix<Complex64>) {
    let n = g.nrows();
    for i in 0..n {
        g[(i, i)] = Complex64::new(g[(i, i)].re, 0.0);
        for j in 0..i {
            let v = 0.5 * (g[(i, j)] + g[(j, i)].conj());
            g[(i, j)] = v;
            g[(j, i)] = v.conj();
        }
    }
}

/// Householder QR of `a` (`m × k`, `k ≤ m`) completed to a full unitary `Q`
/// with `R`'s diagonal made real and non-negative.
pub fn full_qr(a: &DMatrix<Complex64>) -> (DMatrix<Complex64>, DMatrix<Complex64>) {
    let (m, k) = a.shape();
    let mut aug = DMatrix::zeros(m, k + m);
    aug.view_mut((0, 0), (m, k)).copy_from(a);
    for i in 0..m {
        aug[(i, k + i)] = Complex64::new(1.0, 0.0);
    }
    let qr = aug.qr();
    let mut q = qr.q();
    let mut r = qr.r().columns(0, k).into_owned();
    for i in 0..k.min(m) {
        let d = r[(i, i)];
        if d.norm() > 0.0 {
            let phase = d / d.norm();
            for j in 0..k {
                r[(i, j)] *= phase.conj();
            }
            for row in 0..m {
                q[(row, i)] *= phase;
            }
        }
    }
    (q, r)
}

/// Smallest-to-largest eigenvalue ratio of a Hermitian positive matrix after
/// symmetric diagonal normalization.
pub fn condition_estimate(g: &DMatrix<Complex64>) -> f64 {
    let n = g.nrows();
    let d: Vec<f64> = (0..n)
        .map(|i| g[(i, i)].re.max(f64::MIN_POSITIVE).sqrt().recip())
        .collect();
    let scaled = DMatrix::from_fn(n, n, |i, j| g[(i, j)] * d[i] * d[j]);
    let ev = scaled.symmetric_eigenvalues();
    let max = ev.iter().cloned().fold(f64::MIN, f64::max);
    let min = ev.iter().cloned().fold(f64::MAX, f64::min);
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Lower Cholesky factor of a Hermitian positive definite matrix.
pub fn cholesky_lower(g: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
    g.clone()
        .cholesky()
        .map(|c| c.l())
        .ok_or(Error::RankDeficient {
            condition: f64::INFINITY,
        })
}

/// Inverse of a lower-triangular matrix.
pub fn lower_inverse(l: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
    let n = l.nrows();
    let mut inv = DMatrix::<Complex64>::identity(n, n);
    if !l.solve_lower_triangular_mut(&mut inv) {
        return Err(Error::RankDeficient {
            condition: f64::INFINITY,
        });
    }
    Ok(inv)
}

/// Real `2n × 2n` representation of a complex `n × n` matrix acting on `(Re x, Im x)`.
pub fn real_rep(g: &DMatrix<Complex64>) -> DMatrix<f64> {
    let n = g.nrows();
    DMatrix::from_fn(2 * n, 2 * n, |i, j| {
        let c = g[(i % n, j % n)];
        match (i < n, j < n) {
            (true, true) | (false, false) => c.re,
            (true, false) => -c.im,
            (false, true) => c.im,
        }
    })
}

pub fn to_real(v: &DVector<Complex64>) -> DVector<f64> {
    let n = v.len();
    DVector::from_fn(2 * n, |i, _| if i < n { v[i].re } else { v[i - n].im })
}

pub fn from_real(x: &DVector<f64>) -> DVector<Complex64> {
    let n = x.len() / 2;
    DVector::from_fn(n, |i, _| Complex64::new(x[i], x[i + n]))
}
