//! Dense complex helpers shared by the algebra, superoperator and form code.

use nalgebra::DMatrix;
use num_complex::Complex64;

pub(crate) type CMatrix = DMatrix<Complex64>;

/// Largest entrywise modulus.
pub(crate) fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

/// Largest entrywise modulus of `m - m*`.
pub(crate) fn hermitian_deviation(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub(crate) fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Eigendecomposition of a Hermitian matrix with eigenvalues in ascending
/// order and the matching unit eigenvectors as columns.
///
/// Only the Hermitian part of `m` is decomposed.
pub(crate) fn eigh(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), CMatrix::zeros(0, 0));
    }
    let h = hermitian_part(m);
    let mut eig = h.clone().symmetric_eigen();
    if !all_finite(eig.eigenvalues.iter()) {
        let shift = positive_shift(&h);
        eig = shifted(&h, shift).symmetric_eigen();
        eig.eigenvalues.iter_mut().for_each(|x| *x -= shift);
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = CMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    (values, vectors)
}

pub(crate) fn eigvalsh(m: &CMatrix) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let h = hermitian_part(m);
    let mut values: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    if !all_finite(values.iter()) {
        let shift = positive_shift(&h);
        values = shifted(&h, shift)
            .symmetric_eigenvalues()
            .iter()
            .map(|x| x - shift)
            .collect();
    }
    values.sort_by(f64::total_cmp);
    values
}

// The implicit QR sweep in nalgebra can produce 0/0 when the tridiagonal
// form of a very sparse matrix has diagonal and off-diagonal entries near
// underflow, since its deflation test is relative to the diagonal. Shifting
// by more than the spectral radius keeps the diagonal away from zero; the
// eigenvectors are unchanged.
fn all_finite<'a>(mut values: impl Iterator<Item = &'a f64>) -> bool {
    values.all(|x| x.is_finite())
}

fn positive_shift(h: &CMatrix) -> f64 {
    2.0 * h.norm() + 1.0
}

fn shifted(h: &CMatrix, shift: f64) -> CMatrix {
    let mut out = h.clone();
    for i in 0..out.nrows() {
        out[(i, i)] += shift;
    }
    out
}

/// Rebuilds `V diag(f(λ)) V*` from an eigendecomposition.
pub(crate) fn spectral_map(values: &[f64], vectors: &CMatrix, f: impl Fn(f64) -> f64) -> CMatrix {
    let n = vectors.nrows();
    let mut scaled = vectors.clone();
    for (j, &lambda) in values.iter().enumerate() {
        let w = f(lambda);
        for i in 0..n {
            scaled[(i, j)] *= w;
        }
    }
    scaled * vectors.adjoint()
}

/// Clamps the spectrum of the Hermitian part of `m` into `[lo, hi]`.
pub(crate) fn clamp_spectrum(m: &CMatrix, lo: f64, hi: f64) -> CMatrix {
    let (values, vectors) = eigh(m);
    spectral_map(&values, &vectors, |x| x.clamp(lo, hi))
}

/// Number of bytes a dense complex square matrix of side `n` occupies.
pub(crate) fn dense_bytes(n: u128) -> u128 {
    n * n * std::mem::size_of::<Complex64>() as u128
}
