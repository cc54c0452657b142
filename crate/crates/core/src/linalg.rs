//! Small dense helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::Scalar;

/// Relative cutoff below which an eigenvalue or singular value counts as zero.
pub const RANK_CUTOFF: f64 = 1e-10;

/// Eigenvalues of a symmetric matrix, ascending.
pub fn symmetric_eigenvalues<T: Scalar>(m: &DMatrix<T>) -> Vec<T> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let mut ev: Vec<T> = m
        .clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .collect();
    ev.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
    ev
}

pub fn max_asymmetry<T: Scalar>(m: &DMatrix<T>) -> T {
    let mut worst = T::zero();
    for i in 0..m.nrows() {
        for j in (i + 1)..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

pub fn spectral_norm<T: Scalar>(m: &DMatrix<T>) -> T {
    if m.is_empty() {
        return T::zero();
    }
    m.clone()
        .singular_values()
        .iter()
        .copied()
        .fold(T::zero(), |a, b| a.max(b))
}

pub fn column_mean<T: Scalar>(x: &DMatrix<T>) -> DVector<T> {
    let n = T::count(x.ncols());
    let mut mean = DVector::zeros(x.nrows());
    for col in x.column_iter() {
        mean += col;
    }
    mean / n
}

/// The matrix whose every column is `v`.
pub fn replicate<T: Scalar>(v: &DVector<T>, n: usize) -> DMatrix<T> {
    DMatrix::from_fn(v.len(), n, |i, _| v[i])
}

/// Frobenius distance from `x` to the consensus subspace.
pub fn consensus_error<T: Scalar>(x: &DMatrix<T>) -> T {
    let mean = column_mean(x);
    let mut acc = T::zero();
    for col in x.column_iter() {
        acc += (col - &mean).norm_squared();
    }
    acc.sqrt()
}

/// Orthogonal projector onto the column space of `m`.
pub fn range_projector<T: Scalar>(m: &DMatrix<T>) -> DMatrix<T> {
    let rows = m.nrows();
    if m.is_empty() {
        return DMatrix::zeros(rows, rows);
    }
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("requested U");
    let smax = svd
        .singular_values
        .iter()
        .copied()
        .fold(T::zero(), |a, b| a.max(b));
    let cutoff = smax * T::lit(RANK_CUTOFF);
    let mut p = DMatrix::zeros(rows, rows);
    for (k, s) in svd.singular_values.iter().enumerate() {
        if *s > cutoff {
            let col = u.column(k);
            p += col * col.transpose();
        }
    }
    p
}

/// Haar-distributed orthogonal matrix (QR of a Gaussian matrix, sign-fixed).
pub fn random_orthogonal<T: Scalar, R: Rng + ?Sized>(d: usize, rng: &mut R) -> DMatrix<T> {
    let g = DMatrix::from_fn(d, d, |_, _| T::standard_normal(rng));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..d {
        if r[(j, j)] < T::zero() {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

pub fn all_finite<T: Scalar>(v: &[T]) -> bool {
    v.iter().all(|x| x.is_finite_value())
}
