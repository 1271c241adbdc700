//! Small dense helpers on top of nalgebra.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex;
use serde::Serialize;

use crate::scalar::Real;

/// Rank-3 tensor stored as slices along its first index.
///
/// For a connection-like tensor `slices[mu][(a, nu)]` is `Γ^a_{mu nu}`;
/// for a derivative of a matrix field it is `∂_mu f[(a, nu)]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor3<T: Real> {
    pub slices: Vec<DMatrix<T>>,
}

impl<T: Real> Tensor3<T> {
    pub fn zeros(d0: usize, rows: usize, cols: usize) -> Self {
        Self { slices: vec![DMatrix::zeros(rows, cols); d0] }
    }

    pub fn from_fn(d0: usize, rows: usize, cols: usize, f: impl Fn(usize, usize, usize) -> T) -> Self {
        Self { slices: (0..d0).map(|m| DMatrix::from_fn(rows, cols, |a, b| f(m, a, b))).collect() }
    }

    #[inline]
    pub fn get(&self, m: usize, a: usize, b: usize) -> T {
        self.slices[m][(a, b)]
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        let (r, c) = self.slices.first().map(|s| s.shape()).unwrap_or((0, 0));
        (self.slices.len(), r, c)
    }

    pub fn map_slices(&self, f: impl Fn(&DMatrix<T>) -> DMatrix<T>) -> Self {
        Self { slices: self.slices.iter().map(f).collect() }
    }

    pub fn combine(&self, other: &Self, f: impl Fn(T, T) -> T) -> Self {
        Self { slices: self.slices.iter().zip(&other.slices).map(|(a, b)| a.zip_map(b, &f)).collect() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.combine(other, |a, b| a - b)
    }

    pub fn max_abs(&self) -> T {
        self.slices.iter().map(max_abs).fold(T::zero(), |a, b| a.max(b))
    }
}

pub fn max_abs<T: Real>(m: &DMatrix<T>) -> T {
    m.iter().fold(T::zero(), |acc, x| acc.max(x.abs()))
}

pub fn max_abs_complex<T: Real>(m: &DMatrix<Complex<T>>) -> T {
    m.iter().fold(T::zero(), |acc, x| acc.max(x.norm_sqr().sqrt()))
}

/// Real 2n×2n realification `[[A, -B], [B, A]]` of a complex n×n matrix `A + iB`.
pub fn realify<T: Real>(m: &DMatrix<Complex<T>>) -> DMatrix<T> {
    let n = m.nrows();
    DMatrix::from_fn(2 * n, 2 * n, |r, c| {
        let z = m[(r % n, c % n)];
        match (r < n, c < n) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    })
}

/// Block matrix `[[a, b], [c, d]]` from four equally sized square blocks.
pub fn blocks<T: Real>(a: &DMatrix<T>, b: &DMatrix<T>, c: &DMatrix<T>, d: &DMatrix<T>) -> DMatrix<T> {
    let n = a.nrows();
    let mut m = DMatrix::zeros(2 * n, 2 * n);
    m.view_mut((0, 0), (n, n)).copy_from(a);
    m.view_mut((0, n), (n, n)).copy_from(b);
    m.view_mut((n, 0), (n, n)).copy_from(c);
    m.view_mut((n, n), (n, n)).copy_from(d);
    m
}

/// Eigenvalue counts of a symmetric form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Signature {
    pub positive: usize,
    pub negative: usize,
    pub zero: usize,
}

/// Eigenvalues (ascending) and signature of a symmetric matrix; eigenvalues
/// with modulus below `tol` count as zero.
pub fn symmetric_signature<T: Real>(m: &DMatrix<T>, tol: T) -> (Vec<T>, Signature) {
    let sym = (m + m.transpose()) * T::from_f64(0.5).unwrap();
    let eig = SymmetricEigen::new(sym);
    let mut ev: Vec<T> = eig.eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let mut sig = Signature { positive: 0, negative: 0, zero: 0 };
    for &e in &ev {
        if e.abs() < tol {
            sig.zero += 1;
        } else if e > T::zero() {
            sig.positive += 1;
        } else {
            sig.negative += 1;
        }
    }
    (ev, sig)
}

/// Eigenvalues and signature of a Hermitian matrix, via its realification
/// (each eigenvalue appears twice there and is reported once).
pub fn hermitian_signature<T: Real>(m: &DMatrix<Complex<T>>, tol: T) -> (Vec<T>, Signature) {
    let (ev, sig) = symmetric_signature(&realify(m), tol);
    let halved: Vec<T> = ev.iter().step_by(2).copied().collect();
    (halved, Signature { positive: sig.positive / 2, negative: sig.negative / 2, zero: sig.zero / 2 })
}

/// `a` is invertible relative to its row scale: `|det a| > tol * prod(row norms)`.
pub fn relative_det<T: Real>(a: &DMatrix<T>) -> (T, T) {
    let det = a.clone().determinant();
    let scale = a.row_iter().fold(T::one(), |acc, r| acc * r.norm());
    (det, scale)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn realification_preserves_products() {
        let a = DMatrix::from_fn(2, 2, |i, j| Complex::new(i as f64 + 0.5, j as f64 - 0.25));
        let b = DMatrix::from_fn(2, 2, |i, j| Complex::new((i * j) as f64, 1.0 - i as f64));
        let lhs = realify(&(&a * &b));
        let rhs = realify(&a) * realify(&b);
        assert!(max_abs(&(lhs - rhs)) < 1e-14);
    }

    #[test]
    fn hermitian_signature_counts_once() {
        let m = DMatrix::from_row_slice(
            2,
            2,
            &[Complex::new(2.0, 0.0), Complex::new(0.0, 1.0), Complex::new(0.0, -1.0), Complex::new(-3.0, 0.0)],
        );
        let (ev, sig): (Vec<f64>, _) = hermitian_signature(&m, 1e-12);
        assert_eq!(sig, Signature { positive: 1, negative: 1, zero: 0 });
        assert_eq!(ev.len(), 2);
        // trace and determinant of the 2x2 Hermitian matrix
        assert!((ev[0] + ev[1] + 1.0).abs() < 1e-12);
        assert!((ev[0] * ev[1] + 7.0).abs() < 1e-12);
    }
}
