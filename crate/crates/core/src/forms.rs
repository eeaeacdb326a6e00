//! Quadratic forms `E(a) = ⟨Δa, a⟩₂` and the Dirichlet property.
//!
//! The two reference forms are the diagonal form with generator `I − B` and
//! the commutator form `Σ_i τ(|[p_i, a]|²)` with generator
//! `Σ_j [p_j, [p_j, ·]]`. The commutator form is exactly twice the diagonal
//! form; both normalizations are exposed.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::expectations::cond_expect;
use crate::linalg::{self, CMatrix};
use crate::report::PropertyReport;
use crate::superop::{spectral_resolve_with, SpectralResolution, SuperOperator, DEFAULT_DENSE_LEVEL_CAP};
use crate::tower::{
    embed, gns_inner_unchecked, normalized_trace, random_element_with, random_matrix,
    AlgebraElement, ElementKind, Tolerance,
};

/// Largest side of an amplified matrix accepted by [`amplified_form`].
pub const AMPLIFIED_SIDE_CAP: usize = 1024;

/// A form `a ↦ ⟨Δa, a⟩₂` on one level of the tower.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticForm {
    generator: SuperOperator,
    label: String,
    /// Known `||Δ||`, when available without a spectral computation.
    norm_hint: Option<f64>,
}

impl QuadraticForm {
    /// Validates that `generator` is self-adjoint and positive, using its
    /// spectral resolution.
    pub fn new(generator: SuperOperator, label: impl Into<String>) -> Result<Self> {
        let tol = Tolerance::default();
        let r = spectral_resolve_with(&generator, &tol, DEFAULT_DENSE_LEVEL_CAP)?;
        if r.min_eigenvalue() < -tol.eig_tol {
            return Err(Error::NotPositive {
                min_eigenvalue: r.min_eigenvalue(),
            });
        }
        Ok(Self {
            generator,
            label: label.into(),
            norm_hint: Some(r.max_eigenvalue().max(0.0)),
        })
    }

    pub(crate) fn trusted(generator: SuperOperator, label: impl Into<String>, norm_hint: Option<f64>) -> Self {
        Self {
            generator,
            label: label.into(),
            norm_hint,
        }
    }

    /// `E(a) = ⟨(I − B)a, a⟩₂ = ||a||₂² − ||Ba||₂²`.
    pub fn diagonal(level: usize) -> Result<Self> {
        Ok(Self::trusted(
            SuperOperator::diagonal_complement(level)?,
            "diagonal",
            Some(if level == 0 { 0.0 } else { 1.0 }),
        ))
    }

    /// `E(a) = Σ_i τ([p_i, a][p_i, a]*)`, generator `Σ_j [p_j, [p_j, ·]]`.
    pub fn commutator(level: usize) -> Result<Self> {
        Ok(Self::trusted(
            SuperOperator::diagonal_double_commutator(level)?,
            "commutator",
            Some(if level == 0 { 0.0 } else { 2.0 }),
        ))
    }

    pub fn zero(level: usize) -> Result<Self> {
        Ok(Self::trusted(SuperOperator::zero(level)?, "zero", Some(0.0)))
    }

    /// `c·E` for `c ≥ 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if c.is_nan() || c < 0.0 {
            return Err(Error::Config(format!("form scale must be nonnegative, got {c}")));
        }
        Ok(Self::trusted(
            SuperOperator::scaled(Complex64::new(c, 0.0), self.generator.clone()),
            format!("{c}*{}", self.label),
            self.norm_hint.map(|n| n * c),
        ))
    }

    pub fn level(&self) -> usize {
        self.generator.level()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn generator(&self) -> &SuperOperator {
        &self.generator
    }

    pub fn eval(&self, a: &AlgebraElement) -> Result<f64> {
        let image = self.generator.apply(a)?;
        Ok(gns_inner_unchecked(&image, a).re)
    }

    /// `⟨a, b⟩₁ = ⟨Δa, b⟩₂ + ⟨a, b⟩₂`.
    pub fn energy_inner(&self, a: &AlgebraElement, b: &AlgebraElement) -> Result<Complex64> {
        a.check_level(b)?;
        let image = self.generator.apply(a)?;
        Ok(gns_inner_unchecked(&image, b) + gns_inner_unchecked(a, b))
    }

    pub fn spectral_resolution(&self) -> Result<SpectralResolution> {
        spectral_resolve_with(&self.generator, &Tolerance::default(), DEFAULT_DENSE_LEVEL_CAP)
    }

    /// `||Δ||`, the top of the spectrum.
    pub fn operator_norm(&self) -> Result<f64> {
        match self.norm_hint {
            Some(n) => Ok(n),
            None => Ok(self.spectral_resolution()?.max_eigenvalue().max(0.0)),
        }
    }
}

/// Anything that can be evaluated on square matrices of a fixed side; lets
/// [`dirichlet_check`] cover amplified forms whose blocks do not form a
/// tower level.
pub trait MatrixForm {
    fn side(&self) -> usize;
    /// Level recorded in reports.
    fn report_level(&self) -> usize;
    fn form_label(&self) -> String;
    fn eval_matrix(&self, m: &DMatrix<Complex64>) -> Result<f64>;
}

impl MatrixForm for QuadraticForm {
    fn side(&self) -> usize {
        1 << self.level()
    }

    fn report_level(&self) -> usize {
        self.level()
    }

    fn form_label(&self) -> String {
        self.label.clone()
    }

    fn eval_matrix(&self, m: &DMatrix<Complex64>) -> Result<f64> {
        self.eval(&AlgebraElement::new(self.level(), m.clone())?)
    }
}

/// `E(a) = ⟨Δa, a⟩₂`.
pub fn eval_form(form: &QuadraticForm, a: &AlgebraElement) -> Result<f64> {
    form.eval(a)
}

pub fn energy_inner(form: &QuadraticForm, a: &AlgebraElement, b: &AlgebraElement) -> Result<Complex64> {
    form.energy_inner(a, b)
}

/// `Σ_{i=1}^{2^n} τ_n([p_i, E_n a][p_i, E_n a]*)`, evaluated term by term.
pub fn commutator_form_eval(a: &AlgebraElement, n: usize) -> Result<f64> {
    let b = cond_expect(a, n)?;
    let mut total = Complex64::new(0.0, 0.0);
    for p in AlgebraElement::diagonal_projections(n)? {
        let c = p.commutator(&b)?;
        total += normalized_trace(&(&c * &c.adjoint()));
    }
    Ok(total.re)
}

/// `a ∧ 1`: the `⟨,⟩₂`-nearest point of `{x : 0 ≤ x ≤ 1}`, obtained by
/// clamping the spectrum of `a` into `[0, 1]`.
pub fn wedge_one(a: &AlgebraElement) -> Result<AlgebraElement> {
    wedge_one_with(a, Tolerance::default().abs_tol)
}

pub fn wedge_one_with(a: &AlgebraElement, hermitian_tol: f64) -> Result<AlgebraElement> {
    let deviation = a.hermitian_deviation();
    if deviation > hermitian_tol {
        return Err(Error::NotHermitian { deviation });
    }
    AlgebraElement::new(a.level(), linalg::clamp_spectrum(a.entries(), 0.0, 1.0))
}

/// Checks `E(a ∧ 1) ≤ E(a)` on Hermitian samples and `E(J a) = E(a)` on
/// general samples.
pub fn dirichlet_check<F: MatrixForm + ?Sized>(
    form: &F,
    n_samples: usize,
    seed: u64,
    tol: f64,
) -> Result<PropertyReport> {
    let side = form.side();
    let mut report = PropertyReport::new("dirichlet", form.report_level(), seed, tol);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..n_samples {
        let h = random_matrix(side, ElementKind::Hermitian, &mut rng);
        let wedge = linalg::clamp_spectrum(&h, 0.0, 1.0);
        let contraction = form.eval_matrix(&h)? - form.eval_matrix(&wedge)?;

        let g = random_matrix(side, ElementKind::General, &mut rng);
        let real = form.eval_matrix(&g.adjoint())? - form.eval_matrix(&g)?;

        report.record([contraction, PropertyReport::equality_margin(real)]);
    }
    Ok(report)
}

/// The `k × k` amplification `E^k([a_ij]) = Σ_{i,j} E(a_ij)`.
#[derive(Debug, Clone)]
pub struct AmplifiedForm {
    base: QuadraticForm,
    k: usize,
}

impl AmplifiedForm {
    pub fn base(&self) -> &QuadraticForm {
        &self.base
    }

    pub fn k(&self) -> usize {
        self.k
    }

    fn block_dim(&self) -> usize {
        1 << self.base.level()
    }

    fn check_shape(&self, m: &CMatrix) -> Result<()> {
        let side = self.side();
        if m.nrows() != side || m.ncols() != side {
            return Err(Error::Shape {
                rows: m.nrows(),
                cols: m.ncols(),
                level: self.base.level(),
                expected: side,
            });
        }
        Ok(())
    }

    pub fn block(&self, m: &CMatrix, i: usize, j: usize) -> AlgebraElement {
        let d = self.block_dim();
        AlgebraElement::from_matrix_unchecked(self.base.level(), m.view((i * d, j * d), (d, d)).into_owned())
    }

    /// `Δ ⊗ I_k`: the base generator applied to every block.
    pub fn apply_generator(&self, m: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
        self.check_shape(m)?;
        let d = self.block_dim();
        let mut out = DMatrix::zeros(m.nrows(), m.ncols());
        for i in 0..self.k {
            for j in 0..self.k {
                let image = self.base.generator().apply(&self.block(m, i, j))?;
                out.view_mut((i * d, j * d), (d, d)).copy_from(image.entries());
            }
        }
        Ok(out)
    }
}

impl MatrixForm for AmplifiedForm {
    fn side(&self) -> usize {
        self.k * self.block_dim()
    }

    fn report_level(&self) -> usize {
        self.base.level()
    }

    fn form_label(&self) -> String {
        format!("{}^{}", self.base.label(), self.k)
    }

    fn eval_matrix(&self, m: &DMatrix<Complex64>) -> Result<f64> {
        self.check_shape(m)?;
        let mut total = 0.0;
        for i in 0..self.k {
            for j in 0..self.k {
                total += self.base.eval(&self.block(m, i, j))?;
            }
        }
        Ok(total)
    }
}

pub fn amplified_form(form: &QuadraticForm, k: usize) -> Result<AmplifiedForm> {
    if k == 0 {
        return Err(Error::Config("amplification order must be at least 1".into()));
    }
    let side = k.saturating_mul(1 << form.level());
    if side > AMPLIFIED_SIDE_CAP {
        return Err(Error::BudgetExceeded {
            level: form.level(),
            cap: AMPLIFIED_SIDE_CAP,
            bytes: linalg::dense_bytes(side as u128),
        });
    }
    Ok(AmplifiedForm {
        base: form.clone(),
        k,
    })
}

/// `E_n(a) = E(P_n a)`, with generator `P_n Δ P_n`.
pub fn restricted_form(form: &QuadraticForm, n: usize) -> Result<QuadraticForm> {
    let level = form.level();
    if n == level {
        return Ok(form.clone());
    }
    let p = SuperOperator::conditional_projection(level, n)?;
    let generator = SuperOperator::compose(
        p.clone(),
        SuperOperator::compose(form.generator().clone(), p)?,
    )?;
    Ok(QuadraticForm::trusted(
        generator,
        format!("{}|{n}", form.label()),
        // ||P Δ P|| ≤ ||Δ||; keep the exact value lazy.
        None,
    ))
}

/// A sequence of forms on levels `1..=N`, each meant to extend the previous
/// one along the embedding.
#[derive(Debug, Clone)]
pub struct CompatibleFamily {
    forms: Vec<QuadraticForm>,
}

impl CompatibleFamily {
    pub fn new(forms: Vec<QuadraticForm>) -> Result<Self> {
        if forms.is_empty() {
            return Err(Error::Config("a family needs at least one form".into()));
        }
        for (i, f) in forms.iter().enumerate() {
            if f.level() != i + 1 {
                return Err(Error::LevelMismatch {
                    expected: i + 1,
                    found: f.level(),
                });
            }
        }
        Ok(Self { forms })
    }

    pub fn commutator(top_level: usize) -> Result<Self> {
        Self::new((1..=top_level).map(QuadraticForm::commutator).collect::<Result<_>>()?)
    }

    pub fn diagonal(top_level: usize) -> Result<Self> {
        Self::new((1..=top_level).map(QuadraticForm::diagonal).collect::<Result<_>>()?)
    }

    pub fn zero(top_level: usize) -> Result<Self> {
        Self::new((1..=top_level).map(QuadraticForm::zero).collect::<Result<_>>()?)
    }

    pub fn top_level(&self) -> usize {
        self.forms.len()
    }

    pub fn forms(&self) -> &[QuadraticForm] {
        &self.forms
    }

    /// Form at `level` (1-based).
    pub fn at(&self, level: usize) -> Option<&QuadraticForm> {
        level.checked_sub(1).and_then(|i| self.forms.get(i))
    }

    /// Replaces the form at `level`.
    pub fn with_form(mut self, form: QuadraticForm) -> Result<Self> {
        let level = form.level();
        match level.checked_sub(1).and_then(|i| self.forms.get_mut(i)) {
            Some(slot) => *slot = form,
            None => {
                return Err(Error::LevelMismatch {
                    expected: self.forms.len(),
                    found: level,
                })
            }
        }
        Ok(self)
    }

    /// Verifies `Ẽ_n(a) = Ẽ_{n+1}(a ⊗ 1)` for `n < up_to` by comparing the
    /// sesquilinear forms on every pair of level-`n` matrix units. Returns
    /// the largest discrepancy seen.
    pub fn check_compatibility(&self, up_to: usize, tol: f64) -> Result<f64> {
        let mut worst = 0.0_f64;
        for n in 1..up_to.min(self.top_level()) {
            worst = worst.max(self.check_pair(n, tol)?);
        }
        Ok(worst)
    }

    fn check_pair(&self, n: usize, tol: f64) -> Result<f64> {
        let lower = &self.forms[n - 1];
        let upper = &self.forms[n];
        let lower_dense = lower.generator().dense_matrix(DEFAULT_DENSE_LEVEL_CAP)?;
        let d = 1usize << n;
        let size = d * d;
        let scale = 1.0 / d as f64;
        let mut worst = (0.0_f64, 0, 0);
        for col in 0..size {
            let e = AlgebraElement::matrix_unit(n, col / d, col % d)?;
            let image = upper.generator().apply(&embed(&e, n + 1)?)?;
            let compressed = cond_expect(&image, n)?;
            for row in 0..size {
                let up = compressed.get(row / d, row % d);
                let dev = (up - lower_dense[(row, col)]).norm() * scale;
                if dev > worst.0 {
                    worst = (dev, row, col);
                }
            }
        }
        if worst.0 > tol {
            let (_, row, col) = worst;
            let witness = self.witness(n, row, col)?;
            let lower_value = lower.eval(&witness)?;
            let upper_value = upper.eval(&embed(&witness, n + 1)?)?;
            return Err(Error::IncompatibleFamily {
                level: n,
                witness: Box::new(witness),
                lower: lower_value,
                upper: upper_value,
            });
        }
        Ok(worst.0)
    }

    /// Among `e_c`, `e_r`, `e_c + e_r` and `e_c + i e_r`, the element whose
    /// quadratic values differ most between levels `n` and `n + 1`.
    fn witness(&self, n: usize, row: usize, col: usize) -> Result<AlgebraElement> {
        let d = 1usize << n;
        let ec = AlgebraElement::matrix_unit(n, col / d, col % d)?;
        let er = AlgebraElement::matrix_unit(n, row / d, row % d)?;
        let candidates = [
            ec.clone(),
            er.clone(),
            &ec + &er,
            &ec + &er.scale(Complex64::new(0.0, 1.0)),
        ];
        let mut best = (f64::NEG_INFINITY, ec);
        for w in candidates {
            let gap = (self.forms[n - 1].eval(&w)? - self.forms[n].eval(&embed(&w, n + 1)?)?).abs();
            if gap > best.0 {
                best = (gap, w);
            }
        }
        Ok(best.1)
    }

    /// `n ↦ Ẽ_n(E_n a)` for `n = 1..=min(a.level(), N)`.
    pub fn restricted_sequence(&self, a: &AlgebraElement) -> Result<Vec<f64>> {
        let top = a.level().min(self.top_level());
        (1..=top)
            .map(|n| self.forms[n - 1].eval(&cond_expect(a, n)?))
            .collect()
    }
}

/// Number of probes per level used by [`build_from_family`] to confirm that
/// the restricted values stabilize.
pub const STABILIZATION_PROBES: usize = 4;

/// Recovers the level-`ambient_level` form from a compatible family.
///
/// At finite scale the limit `lim_n Ẽ_n(E_n a)` is reached at
/// `n = ambient_level`, so the result is `Ẽ_N` itself; the family is
/// checked for compatibility first, and for every `j ≤ N` a few elements
/// from level `j` are pushed to level `N` to confirm that their restricted
/// values are constant from `n = j` on.
pub fn build_from_family(
    family: &CompatibleFamily,
    ambient_level: usize,
    tol: f64,
) -> Result<QuadraticForm> {
    if ambient_level == 0 || ambient_level > family.top_level() {
        return Err(Error::Config(format!(
            "ambient level {ambient_level} outside the family range 1..={}",
            family.top_level()
        )));
    }
    family.check_compatibility(ambient_level, tol)?;

    let mut rng = ChaCha8Rng::seed_from_u64(ambient_level as u64);
    for j in 1..=ambient_level {
        for _ in 0..STABILIZATION_PROBES {
            let b = random_element_with(j, ElementKind::General, &mut rng)?;
            let target = family.forms[j - 1].eval(&b)?;
            let a = embed(&b, ambient_level)?;
            let sequence = family.restricted_sequence(&a)?;
            let scale = target.abs().max(1.0);
            if let Some((offset, &value)) = sequence[j - 1..]
                .iter()
                .enumerate()
                .find(|(_, v)| (**v - target).abs() > tol * scale)
            {
                return Err(Error::IncompatibleFamily {
                    level: j + offset,
                    witness: Box::new(b),
                    lower: target,
                    upper: value,
                });
            }
        }
    }

    let top = &family.forms[ambient_level - 1];
    Ok(QuadraticForm::trusted(
        top.generator().clone(),
        format!("recovered({})", top.label()),
        top.norm_hint,
    ))
}

/// `||Q_n a||₂²` for `a` at the ambient level.
pub fn tail_norm_sq(a: &AlgebraElement, n: usize) -> Result<f64> {
    Ok(crate::expectations::project_q(a, n)?.norm2_sq())
}

/// `Σ_k λ_k |⟨u_k, a⟩₂|²`: the form evaluated through the spectral
/// resolution of its generator.
pub fn spectral_form_value(form: &QuadraticForm, a: &AlgebraElement) -> Result<f64> {
    form.spectral_resolution()?.form_value(a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tower::random_element;

    /// Frank–Wolfe iteration for `argmin ||x − a||₂` over `{0 ≤ x ≤ 1}`.
    /// The linear step only needs the sign pattern of the gradient's
    /// spectrum, so it never clamps `a` itself.
    fn frank_wolfe_wedge(a: &CMatrix, iterations: usize) -> CMatrix {
        let n = a.nrows();
        let mut x = CMatrix::zeros(n, n);
        for _ in 0..iterations {
            let grad = &x - a;
            let (values, vectors) = linalg::eigh(&grad);
            // Minimizer of ⟨grad, s⟩ over the set: projection onto the
            // negative eigenspace of the gradient.
            let s = linalg::spectral_map(&values, &vectors, |l| if l < 0.0 { 1.0 } else { 0.0 });
            let dir = &s - &x;
            let denom = dir.norm_squared();
            if denom < 1e-30 {
                break;
            }
            let num = -(grad.adjoint() * &dir).trace().re;
            let step = (num / denom).clamp(0.0, 1.0);
            x += dir * Complex64::new(step, 0.0);
        }
        x
    }

    #[test]
    fn wedge_examples_agree_with_frank_wolfe() {
        let a = AlgebraElement::real_diagonal(&[2.0, -1.0]).unwrap();
        let w = wedge_one(&a).unwrap();
        let oracle = frank_wolfe_wedge(a.entries(), 5000);
        assert!(linalg::max_abs(&(w.entries() - &oracle)) < 1e-6);
        assert!(w.approx_eq(&AlgebraElement::real_diagonal(&[1.0, 0.0]).unwrap(), 1e-14));

        let a = AlgebraElement::from_real_rows(1, &[0.0, 2.0, 2.0, 0.0]).unwrap();
        let w = wedge_one(&a).unwrap();
        let oracle = frank_wolfe_wedge(a.entries(), 5000);
        assert!(linalg::max_abs(&(w.entries() - &oracle)) < 1e-6);
        let expected = AlgebraElement::from_real_rows(1, &[0.5, 0.5, 0.5, 0.5]).unwrap();
        assert!(w.approx_eq(&expected, 1e-14));
    }

    #[test]
    fn wedge_agrees_with_frank_wolfe_on_random_input() {
        let a = random_element(2, ElementKind::Hermitian, 3).unwrap();
        let w = wedge_one(&a).unwrap();
        let oracle = frank_wolfe_wedge(a.entries(), 20000);
        assert!(linalg::max_abs(&(w.entries() - &oracle)) < 1e-3);
    }

    #[test]
    fn wedge_fixes_the_unit_interval_and_rejects_non_hermitian() {
        let x = random_element(3, ElementKind::Contraction, 4).unwrap();
        assert!(wedge_one(&x).unwrap().approx_eq(&x, 1e-12));
        let g = random_element(1, ElementKind::General, 4).unwrap();
        assert!(matches!(wedge_one(&g), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn diagonal_form_examples() {
        let f = QuadraticForm::diagonal(1).unwrap();
        assert!((f.eval(&AlgebraElement::pauli_x()).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(f.eval(&AlgebraElement::identity(1).unwrap()).unwrap(), 0.0);
        let d = AlgebraElement::real_diagonal(&[4.0, -3.0]).unwrap();
        assert_eq!(f.eval(&d).unwrap(), 0.0);
        assert!(f.eval(&AlgebraElement::identity(2).unwrap()).is_err());
        assert_eq!(f.eval(&AlgebraElement::zeros(1).unwrap()).unwrap(), 0.0);
    }

    #[test]
    fn form_is_quadratic() {
        let f = QuadraticForm::diagonal(2).unwrap();
        let a = random_element(2, ElementKind::General, 5).unwrap();
        let lambda = Complex64::new(1.5, -0.5);
        let lhs = f.eval(&a.scale(lambda)).unwrap();
        assert!((lhs - lambda.norm_sqr() * f.eval(&a).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn commutator_form_examples() {
        let x = AlgebraElement::pauli_x();
        assert!((commutator_form_eval(&x, 1).unwrap() - 2.0).abs() < 1e-15);
        let d = AlgebraElement::real_diagonal(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(commutator_form_eval(&d, 2).unwrap(), 0.0);
        let xi = embed(&x, 2).unwrap();
        assert!((commutator_form_eval(&xi, 1).unwrap() - 2.0).abs() < 1e-15);
        assert!(commutator_form_eval(&x, 2).is_err());
    }

    #[test]
    fn commutator_form_is_twice_the_diagonal_form() {
        let f = QuadraticForm::commutator(3).unwrap();
        let g = QuadraticForm::diagonal(3).unwrap();
        let a = random_element(3, ElementKind::General, 6).unwrap();
        assert!((f.eval(&a).unwrap() - commutator_form_eval(&a, 3).unwrap()).abs() < 1e-12);
        assert!((f.eval(&a).unwrap() - 2.0 * g.eval(&a).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn dirichlet_example_values() {
        let f = QuadraticForm::diagonal(1).unwrap();
        let a = AlgebraElement::from_real_rows(1, &[0.0, 2.0, 2.0, 0.0]).unwrap();
        let e_a = f.eval(&a).unwrap();
        let e_w = f.eval(&wedge_one(&a).unwrap()).unwrap();
        assert!((e_a - 4.0).abs() < 1e-14);
        assert!((e_w - 0.25).abs() < 1e-14);

        let x = random_element(2, ElementKind::Contraction, 7).unwrap();
        let f2 = QuadraticForm::diagonal(2).unwrap();
        let diff = f2.eval(&wedge_one(&x).unwrap()).unwrap() - f2.eval(&x).unwrap();
        assert!(diff.abs() < 1e-12);
    }

    #[test]
    fn dirichlet_check_small_run() {
        let f = QuadraticForm::diagonal(2).unwrap();
        let r = dirichlet_check(&f, 50, 1, 1e-10).unwrap();
        assert_eq!(r.samples, 50);
        assert!(r.passed(), "{r:?}");
    }

    #[test]
    fn dirichlet_check_flags_a_non_dirichlet_form() {
        // E(a) = |τ(a)|², generator P_0 = τ(·)1. diag(3, −3) has energy 0
        // while its wedge diag(1, 0) has energy 1/4.
        let f = QuadraticForm::new(SuperOperator::conditional_projection(1, 0).unwrap(), "trace").unwrap();
        let a = AlgebraElement::real_diagonal(&[3.0, -3.0]).unwrap();
        assert_eq!(f.eval(&a).unwrap(), 0.0);
        assert!((f.eval(&wedge_one(&a).unwrap()).unwrap() - 0.25).abs() < 1e-15);
        let r = dirichlet_check(&f, 200, 2, 1e-10).unwrap();
        assert!(r.failures > 0, "{r:?}");
    }

    #[test]
    fn amplified_examples() {
        let f = QuadraticForm::diagonal(1).unwrap();
        let one = amplified_form(&f, 1).unwrap();
        let a = random_element(1, ElementKind::General, 8).unwrap();
        assert!((one.eval_matrix(a.entries()).unwrap() - f.eval(&a).unwrap()).abs() < 1e-15);

        let two = amplified_form(&f, 2).unwrap();
        let mut m = CMatrix::zeros(4, 4);
        m.view_mut((0, 0), (2, 2)).copy_from(AlgebraElement::pauli_x().entries());
        assert!((two.eval_matrix(&m).unwrap() - 1.0).abs() < 1e-15);
        assert!(dirichlet_check(&two, 100, 3, 1e-10).unwrap().passed());
        assert!(amplified_form(&f, 0).is_err());
        assert!(two.eval_matrix(&CMatrix::zeros(3, 3)).is_err());
    }

    #[test]
    fn amplified_generator_is_blockwise() {
        let f = QuadraticForm::diagonal(1).unwrap();
        let amp = amplified_form(&f, 3).unwrap();
        let m = random_matrix(6, ElementKind::General, &mut ChaCha8Rng::seed_from_u64(9));
        let image = amp.apply_generator(&m).unwrap();
        let lhs: f64 = (image.adjoint() * &m).trace().re / 2.0;
        assert!((lhs - amp.eval_matrix(&m).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn restricted_form_examples() {
        let f = QuadraticForm::diagonal(2).unwrap();
        assert_eq!(restricted_form(&f, 2).unwrap(), f);
        let r1 = restricted_form(&f, 1).unwrap();
        let xi = embed(&AlgebraElement::pauli_x(), 2).unwrap();
        assert!((r1.eval(&xi).unwrap() - 1.0).abs() < 1e-15);

        // X on the second leg only: E_1 kills it.
        let a = AlgebraElement::identity(1).unwrap().kron(&AlgebraElement::pauli_x()).unwrap();
        assert!(r1.eval(&a).unwrap().abs() < 1e-15);
        assert!(f.eval(&a).unwrap() > 0.5);
        assert!(restricted_form(&f, 3).is_err());
    }

    #[test]
    fn restricted_form_is_bounded_and_dirichlet_on_its_own_level() {
        let f = QuadraticForm::diagonal(3).unwrap();
        let r = restricted_form(&f, 1).unwrap();
        let norm = r.operator_norm().unwrap();
        assert!(norm <= 1.0 + 1e-12 && norm > 0.5);

        // For a = b ⊗ 1 the wedge commutes with the embedding, so the
        // contraction property is inherited from the level-1 form.
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..100 {
            let b = random_element_with(1, ElementKind::Hermitian, &mut rng).unwrap();
            let a = embed(&b, 3).unwrap();
            let lhs = r.eval(&wedge_one(&a).unwrap()).unwrap();
            assert!(lhs <= r.eval(&a).unwrap() + 1e-12);
        }
    }

    #[test]
    fn restricted_form_is_not_dirichlet_on_the_ambient_level() {
        // E_1 does not commute with a ↦ a ∧ 1:
        // a = [[0,−1],[−1,0]] ⊗ p₁ + [[2,1],[1,2]] ⊗ p₂ has E_1 a = 1, but
        // E_1(a ∧ 1) = [[3/4, −1/4], [−1/4, 3/4]] with energy 1/16.
        let x = AlgebraElement::from_real_rows(1, &[0.0, -1.0, -1.0, 0.0]).unwrap();
        let y = AlgebraElement::from_real_rows(1, &[2.0, 1.0, 1.0, 2.0]).unwrap();
        let p = AlgebraElement::diagonal_projections(1).unwrap();
        let a = &x.kron(&p[0]).unwrap() + &y.kron(&p[1]).unwrap();
        let r = restricted_form(&QuadraticForm::diagonal(2).unwrap(), 1).unwrap();
        assert!(r.eval(&a).unwrap().abs() < 1e-15);
        assert!((r.eval(&wedge_one(&a).unwrap()).unwrap() - 1.0 / 16.0).abs() < 1e-14);
        assert!(dirichlet_check(&r, 500, 4, 1e-10).unwrap().failures > 0);
    }

    #[test]
    fn energy_inner_examples() {
        let f = QuadraticForm::diagonal(1).unwrap();
        let x = AlgebraElement::pauli_x();
        assert!((f.energy_inner(&x, &x).unwrap() - Complex64::new(2.0, 0.0)).norm() < 1e-15);
        let one = AlgebraElement::identity(1).unwrap();
        assert!((f.energy_inner(&one, &one).unwrap() - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        let a = random_element(1, ElementKind::General, 10).unwrap();
        let b = random_element(1, ElementKind::General, 11).unwrap();
        let ab = f.energy_inner(&a, &b).unwrap();
        let ba = f.energy_inner(&b, &a).unwrap();
        assert!((ab - ba.conj()).norm() < 1e-12);
        assert!(f.energy_inner(&a, &AlgebraElement::identity(2).unwrap()).is_err());
    }

    #[test]
    fn validated_constructor_rejects_bad_generators() {
        let neg = SuperOperator::scaled(Complex64::new(-1.0, 0.0), SuperOperator::diagonal_complement(1).unwrap());
        assert!(matches!(QuadraticForm::new(neg, "neg"), Err(Error::NotPositive { .. })));
        let t = SuperOperator::transpose(1).unwrap();
        // The transpose is self-adjoint for ⟨,⟩₂ but has eigenvalue −1.
        assert!(QuadraticForm::new(t, "t").is_err());
    }

    #[test]
    fn spectral_identity_for_forms() {
        let f = QuadraticForm::diagonal(2).unwrap();
        let a = random_element(2, ElementKind::General, 12).unwrap();
        assert!((spectral_form_value(&f, &a).unwrap() - f.eval(&a).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn family_examples() {
        let fam = CompatibleFamily::commutator(3).unwrap();
        let recovered = build_from_family(&fam, 3, 1e-12).unwrap();
        let a = random_element(3, ElementKind::General, 13).unwrap();
        assert!((recovered.eval(&a).unwrap() - commutator_form_eval(&a, 3).unwrap()).abs() < 1e-12);

        let zero = build_from_family(&CompatibleFamily::zero(3).unwrap(), 3, 1e-12).unwrap();
        assert_eq!(zero.eval(&a).unwrap(), 0.0);

        let doubled = QuadraticForm::commutator(2).unwrap().scaled(2.0).unwrap();
        let bad = CompatibleFamily::commutator(3).unwrap().with_form(doubled).unwrap();
        match build_from_family(&bad, 3, 1e-12) {
            Err(Error::IncompatibleFamily {
                level,
                witness,
                lower,
                upper,
            }) => {
                assert!(level == 1 || level == 2);
                assert!((lower - upper).abs() > 1e-3, "{lower} {upper}");
                assert!(witness.level() == level);
            }
            other => panic!("expected rejection, got {other:?}"),
        }
        assert!(build_from_family(&fam, 4, 1e-12).is_err());
        assert!(CompatibleFamily::new(vec![QuadraticForm::diagonal(2).unwrap()]).is_err());
    }

    #[test]
    fn restricted_sequence_stabilizes() {
        let fam = CompatibleFamily::diagonal(4).unwrap();
        let b = random_element(2, ElementKind::General, 14).unwrap();
        let seq = fam.restricted_sequence(&embed(&b, 4).unwrap()).unwrap();
        let target = QuadraticForm::diagonal(2).unwrap().eval(&b).unwrap();
        for v in &seq[1..] {
            assert!((v - target).abs() < 1e-12);
        }
    }
}
