//! Linear maps on a fixed level of the tower.
//!
//! A [`SuperOperator`] keeps a structured body (diagonal projection,
//! double-commutator family, Schur multiplier, …) and is evaluated without
//! ever forming a `4^n × 4^n` matrix. [`SuperOperator::densify`] produces
//! the dense matrix on demand, acting on row-stacked vectorizations:
//! `vec(a)[i·d + j] = a[i, j]`.
//!
//! In the standard basis the trace inner product is `⟨a, b⟩₂ =
//! vec(a)* vec(b) / d`, so a map is self-adjoint for `⟨,⟩₂` exactly when its
//! dense matrix is Hermitian. Spectral calculus, semigroups and the Choi
//! criterion all rely on this.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expectations::{diag_expect, project_p};
use crate::linalg::{self, CMatrix};
use crate::report::PropertyReport;
use crate::tower::{
    dim_of, gns_inner_unchecked, normalized_trace, random_element_with, AlgebraElement,
    ElementKind, Tolerance,
};

/// Default cap on the level at which dense `4^n × 4^n` matrices are formed.
pub const DEFAULT_DENSE_LEVEL_CAP: usize = 6;

/// The structured content of a [`SuperOperator`].
#[derive(Debug, Clone, PartialEq)]
pub enum Body {
    Identity,
    Zero,
    /// `B`: keep the diagonal.
    DiagonalExpectation,
    /// `I − B`.
    DiagonalComplement,
    /// `P_n` for the given target level.
    ConditionalProjection { target_level: usize },
    /// `a ↦ Σ_i [m_i, [m_i, a]] + h a + a h` with Hermitian `m_i`, `h`.
    DoubleCommutatorFamily {
        ms: Vec<AlgebraElement>,
        h: Option<AlgebraElement>,
    },
    /// Entrywise multiplication by a fixed coefficient matrix.
    SchurMultiplier(CMatrix),
    Transpose,
    /// Matrix acting on row-stacked vectorizations.
    Dense(CMatrix),
    /// `outer ∘ inner`.
    Compose(Box<SuperOperator>, Box<SuperOperator>),
    Sum(Vec<SuperOperator>),
    Scaled(Complex64, Box<SuperOperator>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuperOperator {
    level: usize,
    body: Body,
}

fn check_level(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::LevelMismatch { expected, found });
    }
    Ok(())
}

pub(crate) fn vectorize(a: &AlgebraElement) -> DVector<Complex64> {
    let d = a.dim();
    let m = a.entries();
    DVector::from_fn(d * d, |k, _| m[(k / d, k % d)])
}

pub(crate) fn unvectorize(level: usize, v: &[Complex64]) -> AlgebraElement {
    let d = 1usize << level;
    AlgebraElement::from_matrix_unchecked(level, DMatrix::from_fn(d, d, |i, j| v[i * d + j]))
}

fn dense_budget(level: usize, cap: usize) -> Result<()> {
    if level > cap {
        let side = 1u128 << (2 * level);
        return Err(Error::BudgetExceeded {
            level,
            cap,
            bytes: linalg::dense_bytes(side),
        });
    }
    Ok(())
}

impl SuperOperator {
    fn with_body(level: usize, body: Body) -> Result<Self> {
        dim_of(level)?;
        Ok(Self { level, body })
    }

    pub fn identity(level: usize) -> Result<Self> {
        Self::with_body(level, Body::Identity)
    }

    pub fn zero(level: usize) -> Result<Self> {
        Self::with_body(level, Body::Zero)
    }

    pub fn diagonal_expectation(level: usize) -> Result<Self> {
        Self::with_body(level, Body::DiagonalExpectation)
    }

    /// `Δ = I − B`, the generator of the diagonal Dirichlet form.
    pub fn diagonal_complement(level: usize) -> Result<Self> {
        Self::with_body(level, Body::DiagonalComplement)
    }

    pub fn conditional_projection(level: usize, target_level: usize) -> Result<Self> {
        if target_level > level {
            return Err(Error::LevelOrder {
                from: level,
                to: target_level,
            });
        }
        Self::with_body(level, Body::ConditionalProjection { target_level })
    }

    /// The Lindblad-type generator `Σ_i [m_i, [m_i, ·]] + h· + ·h`.
    pub fn double_commutator(
        level: usize,
        ms: Vec<AlgebraElement>,
        h: Option<AlgebraElement>,
        tol: f64,
    ) -> Result<Self> {
        for m in ms.iter().chain(h.iter()) {
            check_level(level, m.level())?;
            let deviation = m.hermitian_deviation();
            if deviation > tol {
                return Err(Error::NotHermitian { deviation });
            }
        }
        Self::with_body(level, Body::DoubleCommutatorFamily { ms, h })
    }

    /// `Σ_j [p_j, [p_j, ·]]` over all diagonal rank-one projections.
    pub fn diagonal_double_commutator(level: usize) -> Result<Self> {
        let ms = AlgebraElement::diagonal_projections(level)?;
        Self::with_body(level, Body::DoubleCommutatorFamily { ms, h: None })
    }

    pub fn schur_multiplier(level: usize, coefficients: DMatrix<Complex64>) -> Result<Self> {
        let d = dim_of(level)?;
        if coefficients.nrows() != d || coefficients.ncols() != d {
            return Err(Error::Shape {
                rows: coefficients.nrows(),
                cols: coefficients.ncols(),
                level,
                expected: d,
            });
        }
        Self::with_body(level, Body::SchurMultiplier(coefficients))
    }

    pub fn transpose(level: usize) -> Result<Self> {
        Self::with_body(level, Body::Transpose)
    }

    pub fn dense(level: usize, matrix: DMatrix<Complex64>) -> Result<Self> {
        let d = dim_of(level)?;
        if matrix.nrows() != d * d || matrix.ncols() != d * d {
            return Err(Error::Shape {
                rows: matrix.nrows(),
                cols: matrix.ncols(),
                level,
                expected: d * d,
            });
        }
        Self::with_body(level, Body::Dense(matrix))
    }

    pub fn compose(outer: SuperOperator, inner: SuperOperator) -> Result<Self> {
        check_level(outer.level, inner.level)?;
        let level = outer.level;
        Self::with_body(level, Body::Compose(Box::new(outer), Box::new(inner)))
    }

    pub fn sum(level: usize, terms: Vec<SuperOperator>) -> Result<Self> {
        for t in &terms {
            check_level(level, t.level)?;
        }
        Self::with_body(level, Body::Sum(terms))
    }

    pub fn scaled(factor: Complex64, op: SuperOperator) -> Self {
        Self {
            level: op.level,
            body: Body::Scaled(factor, Box::new(op)),
        }
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn body(&self) -> &Body {
        &self.body
    }

    pub fn dim(&self) -> usize {
        1 << self.level
    }

    pub fn apply(&self, a: &AlgebraElement) -> Result<AlgebraElement> {
        check_level(self.level, a.level())?;
        Ok(self.apply_unchecked(a))
    }

    fn apply_unchecked(&self, a: &AlgebraElement) -> AlgebraElement {
        match &self.body {
            Body::Identity => a.clone(),
            Body::Zero => AlgebraElement::from_matrix_unchecked(
                self.level,
                DMatrix::zeros(a.dim(), a.dim()),
            ),
            Body::DiagonalExpectation => diag_expect(a),
            Body::DiagonalComplement => a - &diag_expect(a),
            Body::ConditionalProjection { target_level } => {
                project_p(a, *target_level).expect("target level checked at construction")
            }
            Body::DoubleCommutatorFamily { ms, h } => {
                let mut out = DMatrix::zeros(a.dim(), a.dim());
                let x = a.entries();
                for m in ms {
                    let m = m.entries();
                    let inner = m * x - x * m;
                    out += m * &inner - &inner * m;
                }
                if let Some(h) = h {
                    let h = h.entries();
                    out += h * x + x * h;
                }
                AlgebraElement::from_matrix_unchecked(self.level, out)
            }
            Body::SchurMultiplier(c) => {
                AlgebraElement::from_matrix_unchecked(self.level, c.component_mul(a.entries()))
            }
            Body::Transpose => a.transpose(),
            Body::Dense(m) => {
                let v = m * vectorize(a);
                unvectorize(self.level, v.as_slice())
            }
            Body::Compose(outer, inner) => outer.apply_unchecked(&inner.apply_unchecked(a)),
            Body::Sum(terms) => {
                let mut out = DMatrix::zeros(a.dim(), a.dim());
                for t in terms {
                    out += t.apply_unchecked(a).entries();
                }
                AlgebraElement::from_matrix_unchecked(self.level, out)
            }
            Body::Scaled(c, op) => op.apply_unchecked(a).scale(*c),
        }
    }

    /// Dense matrix of the map, probing each matrix unit.
    pub fn dense_matrix(&self, cap: usize) -> Result<CMatrix> {
        dense_budget(self.level, cap)?;
        if let Body::Dense(m) = &self.body {
            return Ok(m.clone());
        }
        let d = self.dim();
        let n = d * d;
        let mut out = DMatrix::zeros(n, n);
        for col in 0..n {
            let e = AlgebraElement::matrix_unit(self.level, col / d, col % d)?;
            let image = self.apply_unchecked(&e);
            let m = image.entries();
            for row in 0..n {
                out[(row, col)] = m[(row / d, row % d)];
            }
        }
        Ok(out)
    }

    /// Dense form of the map under the default level cap.
    pub fn densify(&self) -> Result<SuperOperator> {
        self.densify_with_cap(DEFAULT_DENSE_LEVEL_CAP)
    }

    pub fn densify_with_cap(&self, cap: usize) -> Result<SuperOperator> {
        let m = self.dense_matrix(cap)?;
        Ok(Self {
            level: self.level,
            body: Body::Dense(m),
        })
    }

    /// Largest `|⟨S e_k, e_l⟩₂ − ⟨e_k, S e_l⟩₂|` over matrix units, scaled
    /// back to dense-matrix entries, with the offending pair.
    pub fn self_adjointness_defect(&self, cap: usize) -> Result<(f64, usize, usize)> {
        let m = self.dense_matrix(cap)?;
        Ok(hermitian_defect(&m))
    }
}

fn hermitian_defect(m: &CMatrix) -> (f64, usize, usize) {
    let n = m.nrows();
    let mut worst = (0.0, 0, 0);
    for i in 0..n {
        for j in i..n {
            let dev = (m[(i, j)] - m[(j, i)].conj()).norm();
            if dev > worst.0 {
                worst = (dev, i, j);
            }
        }
    }
    worst
}

/// Eigen-decomposition of a `⟨,⟩₂`-self-adjoint map.
///
/// The eigenvectors are orthonormal for `⟨,⟩₂`; partial sums of their
/// rank-one projections are the spectral projections `F_λ`.
#[derive(Debug, Clone)]
pub struct SpectralResolution {
    level: usize,
    eigenvalues: Vec<f64>,
    /// Euclidean-unit eigenvectors (columns) in row-stacked coordinates.
    vectors: CMatrix,
}

impl SpectralResolution {
    pub fn level(&self) -> usize {
        self.level
    }

    /// Ascending.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// `u_k`, normalized so that `⟨u_k, u_k⟩₂ = 1`.
    pub fn eigenvector(&self, k: usize) -> AlgebraElement {
        let d = (1usize << self.level) as f64;
        let col: Vec<Complex64> = self.vectors.column(k).iter().map(|z| z * d.sqrt()).collect();
        unvectorize(self.level, &col)
    }

    pub fn eigenvectors(&self) -> Vec<AlgebraElement> {
        (0..self.len()).map(|k| self.eigenvector(k)).collect()
    }

    /// `⟨u_k, a⟩₂` for every `k`.
    pub fn coefficients(&self, a: &AlgebraElement) -> Result<Vec<Complex64>> {
        check_level(self.level, a.level())?;
        let d = (1usize << self.level) as f64;
        let c = self.vectors.adjoint() * vectorize(a);
        Ok(c.iter().map(|z| z / d.sqrt()).collect())
    }

    /// `Σ_k f(λ_k) u_k ⟨u_k, a⟩₂`.
    pub fn apply_function(
        &self,
        a: &AlgebraElement,
        f: impl Fn(f64) -> f64,
    ) -> Result<AlgebraElement> {
        check_level(self.level, a.level())?;
        let mut c = self.vectors.adjoint() * vectorize(a);
        for (z, &lambda) in c.iter_mut().zip(&self.eigenvalues) {
            *z *= f(lambda);
        }
        let v = &self.vectors * c;
        Ok(unvectorize(self.level, v.as_slice()))
    }

    /// Rebuilds `S a` from the spectral data.
    pub fn reconstruct(&self, a: &AlgebraElement) -> Result<AlgebraElement> {
        self.apply_function(a, |lambda| lambda)
    }

    /// `Σ_k λ_k |⟨u_k, a⟩₂|²`.
    pub fn form_value(&self, a: &AlgebraElement) -> Result<f64> {
        Ok(self
            .coefficients(a)?
            .iter()
            .zip(&self.eigenvalues)
            .map(|(c, lambda)| lambda * c.norm_sqr())
            .sum())
    }

    /// `F_λ a`: the component of `a` in the eigenspaces with eigenvalue `≤ λ`.
    pub fn spectral_projection(&self, lambda: f64, a: &AlgebraElement) -> Result<AlgebraElement> {
        self.apply_function(a, |x| if x <= lambda { 1.0 } else { 0.0 })
    }

    /// The distribution function `λ ↦ ⟨F_λ a, a⟩₂` sampled at each distinct
    /// eigenvalue (within `merge_tol`).
    pub fn spectral_distribution(&self, a: &AlgebraElement, merge_tol: f64) -> Result<Vec<(f64, f64)>> {
        let c = self.coefficients(a)?;
        let mut out: Vec<(f64, f64)> = Vec::new();
        let mut cumulative = 0.0;
        for (lambda, coeff) in self.eigenvalues.iter().zip(&c) {
            cumulative += coeff.norm_sqr();
            match out.last_mut() {
                Some(last) if (lambda - last.0).abs() <= merge_tol => last.1 = cumulative,
                _ => out.push((*lambda, cumulative)),
            }
        }
        Ok(out)
    }

    /// Dense matrix of `f(S)` in row-stacked coordinates.
    pub fn function_matrix(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        linalg::spectral_map(&self.eigenvalues, &self.vectors, f)
    }
}

pub fn spectral_resolve(op: &SuperOperator) -> Result<SpectralResolution> {
    spectral_resolve_with(op, &Tolerance::default(), DEFAULT_DENSE_LEVEL_CAP)
}

/// Spectral resolution; rejects maps whose dense matrix deviates from
/// Hermitian by more than `tol.abs_tol`.
pub fn spectral_resolve_with(
    op: &SuperOperator,
    tol: &Tolerance,
    cap: usize,
) -> Result<SpectralResolution> {
    let m = op.dense_matrix(cap)?;
    let (deviation, row, col) = hermitian_defect(&m);
    if deviation > tol.abs_tol {
        return Err(Error::NotSelfAdjoint {
            deviation,
            row,
            col,
        });
    }
    let (eigenvalues, vectors) = linalg::eigh(&m);
    Ok(SpectralResolution {
        level: op.level,
        eigenvalues,
        vectors,
    })
}

#[derive(Debug, Clone)]
enum SemigroupKind {
    /// `Δ = 0`.
    Trivial,
    /// `Δ = I − B`: `Φ_t = e^{−t} id + (1 − e^{−t}) B`.
    DiagonalProjection,
    Spectral(SpectralResolution),
}

/// `t ↦ Φ_t = e^{−tΔ}` for a positive self-adjoint generator `Δ`.
#[derive(Debug, Clone)]
pub struct Semigroup {
    level: usize,
    kind: SemigroupKind,
}

impl Semigroup {
    /// Uses the closed form for `Δ = I − B` and `Δ = 0`, and the spectral
    /// exponential otherwise.
    pub fn new(generator: &SuperOperator) -> Result<Self> {
        match generator.body() {
            Body::DiagonalComplement => Ok(Self {
                level: generator.level,
                kind: SemigroupKind::DiagonalProjection,
            }),
            Body::Zero => Ok(Self {
                level: generator.level,
                kind: SemigroupKind::Trivial,
            }),
            _ => Self::spectral(generator),
        }
    }

    pub fn spectral(generator: &SuperOperator) -> Result<Self> {
        Self::spectral_with(generator, &Tolerance::default(), DEFAULT_DENSE_LEVEL_CAP)
    }

    pub fn spectral_with(generator: &SuperOperator, tol: &Tolerance, cap: usize) -> Result<Self> {
        let resolution = spectral_resolve_with(generator, tol, cap)?;
        let min = resolution.min_eigenvalue();
        if min < -tol.eig_tol {
            return Err(Error::NotPositive {
                min_eigenvalue: min,
            });
        }
        Ok(Self {
            level: generator.level,
            kind: SemigroupKind::Spectral(resolution),
        })
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn is_closed_form(&self) -> bool {
        !matches!(self.kind, SemigroupKind::Spectral(_))
    }

    /// `Φ_t(a)`.
    pub fn apply(&self, t: f64, a: &AlgebraElement) -> Result<AlgebraElement> {
        check_time(t)?;
        check_level(self.level, a.level())?;
        match &self.kind {
            SemigroupKind::Trivial => Ok(a.clone()),
            SemigroupKind::DiagonalProjection => {
                let decay = (-t).exp();
                Ok(&a.scale_real(decay) + &diag_expect(a).scale_real(1.0 - decay))
            }
            SemigroupKind::Spectral(r) => r.apply_function(a, |lambda| (-t * lambda).exp()),
        }
    }

    /// `Φ_t` as a map. For `Δ = I − B` this is the Schur multiplier with
    /// coefficients `e^{−t}` off the diagonal and `1` on it.
    pub fn map_at(&self, t: f64) -> Result<SuperOperator> {
        check_time(t)?;
        match &self.kind {
            SemigroupKind::Trivial => SuperOperator::identity(self.level),
            SemigroupKind::DiagonalProjection => {
                let d = 1usize << self.level;
                let decay = Complex64::new((-t).exp(), 0.0);
                let one = Complex64::new(1.0, 0.0);
                let c = DMatrix::from_fn(d, d, |i, j| if i == j { one } else { decay });
                SuperOperator::schur_multiplier(self.level, c)
            }
            SemigroupKind::Spectral(r) => {
                SuperOperator::dense(self.level, r.function_matrix(|lambda| (-t * lambda).exp()))
            }
        }
    }
}

fn check_time(t: f64) -> Result<()> {
    if !t.is_finite() || t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    Ok(())
}

/// `e^{−tΔ} a`.
pub fn semigroup_apply(generator: &SuperOperator, t: f64, a: &AlgebraElement) -> Result<AlgebraElement> {
    check_time(t)?;
    Semigroup::new(generator)?.apply(t, a)
}

/// Choi matrix `Σ_{k,l} e_{kl} ⊗ S(e_{kl})`: block `(k, l)` is `S(e_{kl})`.
pub fn choi_matrix(op: &SuperOperator) -> Result<DMatrix<Complex64>> {
    choi_matrix_with_cap(op, DEFAULT_DENSE_LEVEL_CAP)
}

pub fn choi_matrix_with_cap(op: &SuperOperator, cap: usize) -> Result<DMatrix<Complex64>> {
    dense_budget(op.level, cap)?;
    let d = op.dim();
    let mut out = DMatrix::zeros(d * d, d * d);
    for k in 0..d {
        for l in 0..d {
            let e = AlgebraElement::matrix_unit(op.level, k, l)?;
            let block = op.apply_unchecked(&e);
            out.view_mut((k * d, l * d), (d, d)).copy_from(block.entries());
        }
    }
    Ok(out)
}

/// Verdict of the Choi criterion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChoiCertificate {
    pub level: usize,
    pub min_eigenvalue: f64,
    pub hermitian_deviation: f64,
    pub completely_positive: bool,
}

pub fn certify_complete_positivity(op: &SuperOperator, eig_tol: f64) -> Result<ChoiCertificate> {
    let choi = choi_matrix(op)?;
    let hermitian_deviation = linalg::hermitian_deviation(&choi);
    let min_eigenvalue = linalg::eigvalsh(&choi).first().copied().unwrap_or(0.0);
    Ok(ChoiCertificate {
        level: op.level,
        min_eigenvalue,
        hermitian_deviation,
        completely_positive: min_eigenvalue >= -eig_tol && hermitian_deviation <= eig_tol.max(1e-12),
    })
}

/// Checks `0 ≤ x ≤ 1 ⇒ 0 ≤ Φ_t(x) ≤ 1` on sampled contractions.
pub fn markov_check(
    generator: &SuperOperator,
    times: &[f64],
    n_samples: usize,
    seed: u64,
    tol: f64,
) -> Result<PropertyReport> {
    let semigroup = Semigroup::new(generator)?;
    let mut report = PropertyReport::new("markov", generator.level, seed, tol);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..n_samples {
        let x = random_element_with(generator.level, ElementKind::Contraction, &mut rng)?;
        let mut margins = Vec::with_capacity(times.len() * 3);
        for &t in times {
            let y = semigroup.apply(t, &x)?;
            let spectrum = y.eigenvalues();
            margins.push(-y.hermitian_deviation());
            margins.push(spectrum[0]);
            margins.push(1.0 - spectrum[spectrum.len() - 1]);
        }
        report.record(margins);
    }
    Ok(report)
}

/// Checks `τ(Φ_t(x) y) = τ(x Φ_t(y))` on sampled pairs and `Φ_t(1) = 1`.
pub fn symmetry_conservativity_check(
    generator: &SuperOperator,
    times: &[f64],
    n_samples: usize,
    seed: u64,
    tol: f64,
) -> Result<PropertyReport> {
    let semigroup = Semigroup::new(generator)?;
    let level = generator.level;
    let mut report = PropertyReport::new("symmetry", level, seed, tol);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let one = AlgebraElement::identity(level)?;
    let mut unit_errors = Vec::with_capacity(times.len());
    for &t in times {
        unit_errors.push(semigroup.apply(t, &one)?.max_abs_diff(&one));
    }
    for _ in 0..n_samples {
        let x = random_element_with(level, ElementKind::General, &mut rng)?;
        let y = random_element_with(level, ElementKind::General, &mut rng)?;
        let mut margins = Vec::with_capacity(2 * times.len());
        for (&t, &unit_err) in times.iter().zip(&unit_errors) {
            let lhs = normalized_trace(&(&semigroup.apply(t, &x)? * &y));
            let rhs = normalized_trace(&(&x * &semigroup.apply(t, &y)?));
            margins.push(PropertyReport::equality_margin((lhs - rhs).norm()));
            margins.push(PropertyReport::equality_margin(unit_err));
        }
        report.record(margins);
    }
    Ok(report)
}

/// Sampled instances of `Σ_{i,j} b_i* Φ(a_i* a_j) b_j ≥ 0` with families of
/// size `family_size`.
pub fn cp_spot_check(
    map: &SuperOperator,
    family_size: usize,
    n_samples: usize,
    seed: u64,
    tol: f64,
) -> Result<PropertyReport> {
    let level = map.level;
    let mut report = PropertyReport::new("cp_spot", level, seed, tol);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..n_samples {
        let a: Vec<AlgebraElement> = (0..family_size)
            .map(|_| random_element_with(level, ElementKind::General, &mut rng))
            .collect::<Result<_>>()?;
        let b: Vec<AlgebraElement> = (0..family_size)
            .map(|_| random_element_with(level, ElementKind::General, &mut rng))
            .collect::<Result<_>>()?;
        let mut total = AlgebraElement::zeros(level)?;
        for i in 0..family_size {
            for j in 0..family_size {
                let inner = map.apply_unchecked(&(&a[i].adjoint() * &a[j]));
                total = &total + &(&(&b[i].adjoint() * &inner) * &b[j]);
            }
        }
        report.record([total.eigenvalues()[0], -total.hermitian_deviation()]);
    }
    Ok(report)
}

/// Sampled check of `⟨S a, b⟩₂ = ⟨a, S b⟩₂`; returns the largest error.
pub fn sampled_self_adjointness(op: &SuperOperator, n_samples: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0_f64;
    for _ in 0..n_samples {
        let a = random_element_with(op.level, ElementKind::General, &mut rng)?;
        let b = random_element_with(op.level, ElementKind::General, &mut rng)?;
        let lhs = gns_inner_unchecked(&op.apply_unchecked(&a), &b);
        let rhs = gns_inner_unchecked(&a, &op.apply_unchecked(&b));
        worst = worst.max((lhs - rhs).norm());
    }
    Ok(worst)
}

/// File format for Lindblad-type generators: `{"m": [matrix, ...], "h": matrix}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LindbladJson {
    pub m: Vec<AlgebraElement>,
    #[serde(default)]
    pub h: Option<AlgebraElement>,
}

impl LindbladJson {
    pub fn into_generator(self, tol: f64) -> Result<SuperOperator> {
        let level = self
            .m
            .first()
            .or(self.h.as_ref())
            .map(|a| a.level())
            .ok_or_else(|| Error::Config("Lindblad generator needs at least one matrix".into()))?;
        SuperOperator::double_commutator(level, self.m, self.h, tol)
    }
}
