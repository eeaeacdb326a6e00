//! The matrix tower `M_2 ⊂ M_4 ⊂ M_8 ⊂ …`.
//!
//! An [`AlgebraElement`] at level `n` is a dense `2^n × 2^n` complex matrix.
//! Its row/column index is read as a binary string of `n` tensor legs with
//! leg 1 as the most significant bit, so a level-`n` element `a` sits inside
//! level `n + k` as `a ⊗ 1`, with the new legs appended on the right.
//!
//! The trace is always the normalized one, `τ_n = Tr / 2^n`, which makes
//! every inclusion unital, trace preserving and isometric for the
//! Hilbert–Schmidt inner product `⟨a, b⟩₂ = τ(a* b)`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};

/// Largest level this crate will ever allocate (`2^12 = 4096` rows).
pub const MAX_LEVEL: usize = 12;

/// Numerical tolerances used by checks and property suites.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    /// Entrywise / scalar comparisons.
    pub abs_tol: f64,
    /// Eigenvalue based positivity checks.
    pub eig_tol: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            eig_tol: 1e-12,
        }
    }
}

impl Tolerance {
    pub fn new(abs_tol: f64, eig_tol: f64) -> Result<Self> {
        if !(abs_tol >= 0.0 && eig_tol >= 0.0) {
            return Err(Error::Config(format!(
                "tolerances must be nonnegative (abs_tol={abs_tol}, eig_tol={eig_tol})"
            )));
        }
        Ok(Self { abs_tol, eig_tol })
    }
}

/// `2^level`, rejecting levels above [`MAX_LEVEL`].
pub fn dim_of(level: usize) -> Result<usize> {
    if level > MAX_LEVEL {
        return Err(Error::LevelTooLarge(level));
    }
    Ok(1usize << level)
}

/// Inverse of [`dim_of`] for exact powers of two.
pub fn level_of(dim: usize) -> Option<usize> {
    if dim.is_power_of_two() {
        Some(dim.trailing_zeros() as usize)
    } else {
        None
    }
}

/// A level-tagged element of `M_{2^n}(C)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixJson", into = "MatrixJson")]
pub struct AlgebraElement {
    level: usize,
    entries: CMatrix,
}

impl AlgebraElement {
    pub fn new(level: usize, entries: DMatrix<Complex64>) -> Result<Self> {
        let expected = dim_of(level)?;
        if entries.nrows() != expected || entries.ncols() != expected {
            return Err(Error::Shape {
                rows: entries.nrows(),
                cols: entries.ncols(),
                level,
                expected,
            });
        }
        Ok(Self { level, entries })
    }

    /// Wraps a square matrix whose side is a power of two.
    pub fn from_matrix(entries: DMatrix<Complex64>) -> Result<Self> {
        let level = level_of(entries.nrows())
            .filter(|_| entries.is_square())
            .ok_or(Error::Shape {
                rows: entries.nrows(),
                cols: entries.ncols(),
                level: 0,
                expected: 1,
            })?;
        Self::new(level, entries)
    }

    /// Builds a level-`level` element from real row-major entries.
    pub fn from_real_rows(level: usize, rows: &[f64]) -> Result<Self> {
        let d = dim_of(level)?;
        if rows.len() != d * d {
            return Err(Error::Shape {
                rows: rows.len(),
                cols: 1,
                level,
                expected: d,
            });
        }
        let data: Vec<Complex64> = rows.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::new(level, DMatrix::from_row_slice(d, d, &data))
    }

    pub(crate) fn from_matrix_unchecked(level: usize, entries: CMatrix) -> Self {
        debug_assert_eq!(entries.nrows(), 1 << level);
        Self { level, entries }
    }

    pub fn from_fn(level: usize, f: impl FnMut(usize, usize) -> Complex64) -> Result<Self> {
        let d = dim_of(level)?;
        Ok(Self {
            level,
            entries: DMatrix::from_fn(d, d, f),
        })
    }

    pub fn zeros(level: usize) -> Result<Self> {
        let d = dim_of(level)?;
        Ok(Self {
            level,
            entries: DMatrix::zeros(d, d),
        })
    }

    /// The unit `1` of `M_{2^level}`.
    pub fn identity(level: usize) -> Result<Self> {
        let d = dim_of(level)?;
        Ok(Self {
            level,
            entries: DMatrix::identity(d, d),
        })
    }

    /// Diagonal matrix; the length must be a power of two.
    pub fn diagonal(values: &[Complex64]) -> Result<Self> {
        let level = level_of(values.len()).ok_or(Error::Shape {
            rows: values.len(),
            cols: values.len(),
            level: 0,
            expected: 1,
        })?;
        Self::new(
            level,
            DMatrix::from_diagonal(&DVector::from_column_slice(values)),
        )
    }

    pub fn real_diagonal(values: &[f64]) -> Result<Self> {
        let values: Vec<Complex64> = values.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::diagonal(&values)
    }

    /// Matrix unit `e_{row,col}` (0-based).
    pub fn matrix_unit(level: usize, row: usize, col: usize) -> Result<Self> {
        let mut e = Self::zeros(level)?;
        let d = e.dim();
        if row >= d || col >= d {
            return Err(Error::Config(format!(
                "matrix unit ({row}, {col}) out of range for dimension {d}"
            )));
        }
        e.entries[(row, col)] = Complex64::new(1.0, 0.0);
        Ok(e)
    }

    /// Rank-one diagonal projection onto the `index`-th basis vector
    /// (0-based, so `index = 0` is the usual `p_1`).
    pub fn projection(level: usize, index: usize) -> Result<Self> {
        Self::matrix_unit(level, index, index)
    }

    /// All `2^level` diagonal rank-one projections, in index order.
    pub fn diagonal_projections(level: usize) -> Result<Vec<Self>> {
        let d = dim_of(level)?;
        (0..d).map(|i| Self::projection(level, i)).collect()
    }

    pub fn pauli_x() -> Self {
        Self::from_real_rows(1, &[0.0, 1.0, 1.0, 0.0]).expect("2x2")
    }

    pub fn pauli_y() -> Self {
        let i = Complex64::new(0.0, 1.0);
        let z = Complex64::new(0.0, 0.0);
        Self::from_matrix_unchecked(1, DMatrix::from_row_slice(2, 2, &[z, -i, i, z]))
    }

    pub fn pauli_z() -> Self {
        Self::real_diagonal(&[1.0, -1.0]).expect("2x2")
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn into_entries(self) -> DMatrix<Complex64> {
        self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[(row, col)]
    }

    /// Conjugate transpose `a*`.
    pub fn adjoint(&self) -> Self {
        Self::from_matrix_unchecked(self.level, self.entries.adjoint())
    }

    pub fn transpose(&self) -> Self {
        Self::from_matrix_unchecked(self.level, self.entries.transpose())
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self::from_matrix_unchecked(self.level, self.entries.map(|z| z * c))
    }

    pub fn scale_real(&self, c: f64) -> Self {
        Self::from_matrix_unchecked(self.level, self.entries.scale(c))
    }

    /// Tensor product `self ⊗ other`; levels add.
    pub fn kron(&self, other: &Self) -> Result<Self> {
        let level = self.level + other.level;
        dim_of(level)?;
        Ok(Self::from_matrix_unchecked(
            level,
            self.entries.kronecker(&other.entries),
        ))
    }

    /// `[self, other] = self·other − other·self`.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.check_level(other)?;
        Ok(Self::from_matrix_unchecked(
            self.level,
            &self.entries * &other.entries - &other.entries * &self.entries,
        ))
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.check_level(other)?;
        Ok(Self::from_matrix_unchecked(self.level, &self.entries * &other.entries))
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.check_level(other)?;
        Ok(Self::from_matrix_unchecked(self.level, &self.entries + &other.entries))
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.check_level(other)?;
        Ok(Self::from_matrix_unchecked(self.level, &self.entries - &other.entries))
    }

    pub(crate) fn check_level(&self, other: &Self) -> Result<()> {
        if self.level != other.level {
            return Err(Error::LevelMismatch {
                expected: self.level,
                found: other.level,
            });
        }
        Ok(())
    }

    /// Largest entrywise modulus of `self − other`, or `∞` when the levels differ.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.level != other.level {
            return f64::INFINITY;
        }
        linalg::max_abs(&(&self.entries - &other.entries))
    }

    pub fn max_abs(&self) -> f64 {
        linalg::max_abs(&self.entries)
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.max_abs_diff(other) <= tol
    }

    pub fn hermitian_deviation(&self) -> f64 {
        linalg::hermitian_deviation(&self.entries)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_deviation() <= tol
    }

    pub fn hermitian_part(&self) -> Self {
        Self::from_matrix_unchecked(self.level, linalg::hermitian_part(&self.entries))
    }

    /// Ascending eigenvalues of the Hermitian part.
    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::eigvalsh(&self.entries)
    }

    /// `||a||₂ = τ(a* a)^{1/2}`.
    pub fn norm2(&self) -> f64 {
        self.norm2_sq().sqrt()
    }

    pub fn norm2_sq(&self) -> f64 {
        self.entries.norm_squared() / self.dim() as f64
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|z| *z == Complex64::new(0.0, 0.0))
    }
}

impl fmt::Display for AlgebraElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "level {} {}", self.level, self.entries)
    }
}

macro_rules! binary_op {
    ($trait:ident, $method:ident, $op:tt) => {
        impl $trait<&AlgebraElement> for &AlgebraElement {
            type Output = AlgebraElement;

            /// Panics when the levels differ; use the `checked_*` methods to
            /// get an error instead.
            fn $method(self, rhs: &AlgebraElement) -> AlgebraElement {
                assert_eq!(
                    self.level, rhs.level,
                    "level mismatch in AlgebraElement arithmetic"
                );
                AlgebraElement::from_matrix_unchecked(self.level, &self.entries $op &rhs.entries)
            }
        }

        impl $trait<AlgebraElement> for AlgebraElement {
            type Output = AlgebraElement;

            fn $method(self, rhs: AlgebraElement) -> AlgebraElement {
                &self $op &rhs
            }
        }
    };
}

binary_op!(Add, add, +);
binary_op!(Sub, sub, -);
binary_op!(Mul, mul, *);

impl Neg for &AlgebraElement {
    type Output = AlgebraElement;

    fn neg(self) -> AlgebraElement {
        AlgebraElement::from_matrix_unchecked(self.level, -&self.entries)
    }
}

impl Neg for AlgebraElement {
    type Output = AlgebraElement;

    fn neg(self) -> AlgebraElement {
        -&self
    }
}

/// `τ_n(a) = Tr(a) / 2^n`.
pub fn normalized_trace(a: &AlgebraElement) -> Complex64 {
    a.entries.trace() / a.dim() as f64
}

/// `⟨a, b⟩₂ = τ(a* b)`, conjugate-linear in `a`.
pub fn gns_inner(a: &AlgebraElement, b: &AlgebraElement) -> Result<Complex64> {
    a.check_level(b)?;
    Ok(gns_inner_unchecked(a, b))
}

pub(crate) fn gns_inner_unchecked(a: &AlgebraElement, b: &AlgebraElement) -> Complex64 {
    let sum: Complex64 = a
        .entries
        .iter()
        .zip(b.entries.iter())
        .map(|(x, y)| x.conj() * y)
        .sum();
    sum / a.dim() as f64
}

/// `a ↦ a ⊗ 1_{2^(target − level)}`: the unital inclusion into a higher level.
pub fn embed(a: &AlgebraElement, target_level: usize) -> Result<AlgebraElement> {
    if target_level < a.level {
        return Err(Error::LevelOrder {
            from: a.level,
            to: target_level,
        });
    }
    let k = dim_of(target_level - a.level)?;
    dim_of(target_level)?;
    if k == 1 {
        return Ok(a.clone());
    }
    let d = a.dim();
    let mut out = DMatrix::zeros(d * k, d * k);
    for i in 0..d {
        for j in 0..d {
            let v = a.entries[(i, j)];
            if v == Complex64::new(0.0, 0.0) {
                continue;
            }
            for s in 0..k {
                out[(i * k + s, j * k + s)] = v;
            }
        }
    }
    Ok(AlgebraElement::from_matrix_unchecked(target_level, out))
}

/// The modular conjugation `J`: on matrices, the conjugate transpose.
/// Its fixed points are the real (Hermitian) elements.
pub fn modular_conjugation(a: &AlgebraElement) -> AlgebraElement {
    a.adjoint()
}

/// Sampling ensembles for [`random_element`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ElementKind {
    /// `(G + G*)/2`-type Hermitian matrix with `E|h_ij|² = 1`.
    Hermitian,
    /// Complex Ginibre matrix with `E|g_ij|² = 1`.
    General,
    /// Hermitian sample with its spectrum clamped into `[0, 1]`.
    Contraction,
    /// Hermitian sample with its spectrum clamped into `[0, ∞)`.
    Psd,
}

/// Deterministic sample from the given ensemble.
pub fn random_element(level: usize, kind: ElementKind, seed: u64) -> Result<AlgebraElement> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_element_with(level, kind, &mut rng)
}

/// Like [`random_element`], drawing from a caller-owned generator.
pub fn random_element_with<R: Rng + ?Sized>(
    level: usize,
    kind: ElementKind,
    rng: &mut R,
) -> Result<AlgebraElement> {
    let d = dim_of(level)?;
    let entries = random_matrix(d, kind, rng);
    Ok(AlgebraElement::from_matrix_unchecked(level, entries))
}

/// Dense sample of arbitrary side `d`, used where block sizes are not
/// powers of two (amplified forms).
pub(crate) fn random_matrix<R: Rng + ?Sized>(d: usize, kind: ElementKind, rng: &mut R) -> CMatrix {
    let half = std::f64::consts::FRAC_1_SQRT_2;
    let mut gauss = || -> f64 { StandardNormal.sample(&mut *rng) };
    match kind {
        ElementKind::General => {
            DMatrix::from_fn(d, d, |_, _| Complex64::new(gauss() * half, gauss() * half))
        }
        ElementKind::Hermitian | ElementKind::Contraction | ElementKind::Psd => {
            let mut h = DMatrix::zeros(d, d);
            for i in 0..d {
                h[(i, i)] = Complex64::new(gauss(), 0.0);
                for j in (i + 1)..d {
                    let z = Complex64::new(gauss() * half, gauss() * half);
                    h[(i, j)] = z;
                    h[(j, i)] = z.conj();
                }
            }
            match kind {
                ElementKind::Contraction => linalg::clamp_spectrum(&h, 0.0, 1.0),
                ElementKind::Psd => linalg::clamp_spectrum(&h, 0.0, f64::INFINITY),
                _ => h,
            }
        }
    }
}

/// The matrix JSON exchange format: `{"level": n, "re": [[..]], "im": [[..]]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixJson {
    pub level: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

/// Dense square matrix of arbitrary dimension: `{"dim": d, "re": .., "im": ..}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DenseMatrixJson {
    pub dim: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

fn split_parts(m: &CMatrix) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let rows = 0..m.nrows();
    let re = rows
        .clone()
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)].re).collect())
        .collect();
    let im = rows
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)].im).collect())
        .collect();
    (re, im)
}

fn join_parts(dim: usize, re: &[Vec<f64>], im: &[Vec<f64>], level: usize) -> Result<CMatrix> {
    let bad = |rows: usize, cols: usize| Error::Shape {
        rows,
        cols,
        level,
        expected: dim,
    };
    if re.len() != dim || im.len() != dim {
        return Err(bad(re.len().max(im.len()), 0));
    }
    for (r, i) in re.iter().zip(im) {
        if r.len() != dim || i.len() != dim {
            return Err(bad(dim, r.len().max(i.len())));
        }
    }
    Ok(DMatrix::from_fn(dim, dim, |i, j| {
        Complex64::new(re[i][j], im[i][j])
    }))
}

impl From<AlgebraElement> for MatrixJson {
    fn from(a: AlgebraElement) -> Self {
        let (re, im) = split_parts(&a.entries);
        Self {
            level: a.level,
            re,
            im,
        }
    }
}

impl TryFrom<MatrixJson> for AlgebraElement {
    type Error = Error;

    fn try_from(m: MatrixJson) -> Result<Self> {
        let d = dim_of(m.level)?;
        let entries = join_parts(d, &m.re, &m.im, m.level)?;
        AlgebraElement::new(m.level, entries)
    }
}

impl DenseMatrixJson {
    pub fn from_matrix(m: &DMatrix<Complex64>) -> Self {
        let (re, im) = split_parts(m);
        Self {
            dim: m.nrows(),
            re,
            im,
        }
    }

    pub fn to_matrix(&self) -> Result<DMatrix<Complex64>> {
        join_parts(self.dim, &self.re, &self.im, 0)
    }
}

impl AlgebraElement {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: MatrixJson = serde_json::from_str(text)?;
        AlgebraElement::try_from(raw)
    }
}
