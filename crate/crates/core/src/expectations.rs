//! Conditional expectations on the tower.
//!
//! `E_n` is the normalized partial trace over the trailing legs, `Π_n` the
//! inclusion back into the ambient level, `P_n = Π_n ∘ E_n` and
//! `Q_n = I − P_n`. `B` extracts the diagonal (the expectation onto the
//! diagonal masa `D_{2^n}`).

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tower::{dim_of, embed, AlgebraElement};

/// A pair (ambient level `N`, target level `n ≤ N`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExpectationSpec {
    ambient_level: usize,
    target_level: usize,
}

impl ExpectationSpec {
    pub fn new(ambient_level: usize, target_level: usize) -> Result<Self> {
        if target_level > ambient_level {
            return Err(Error::LevelOrder {
                from: ambient_level,
                to: target_level,
            });
        }
        dim_of(ambient_level)?;
        Ok(Self {
            ambient_level,
            target_level,
        })
    }

    pub fn ambient_level(&self) -> usize {
        self.ambient_level
    }

    pub fn target_level(&self) -> usize {
        self.target_level
    }

    fn check(&self, a: &AlgebraElement) -> Result<()> {
        if a.level() != self.ambient_level {
            return Err(Error::LevelMismatch {
                expected: self.ambient_level,
                found: a.level(),
            });
        }
        Ok(())
    }

    pub fn expect(&self, a: &AlgebraElement) -> Result<AlgebraElement> {
        self.check(a)?;
        cond_expect(a, self.target_level)
    }

    pub fn extend(&self, b: &AlgebraElement) -> Result<AlgebraElement> {
        if b.level() != self.target_level {
            return Err(Error::LevelMismatch {
                expected: self.target_level,
                found: b.level(),
            });
        }
        embed(b, self.ambient_level)
    }

    pub fn project(&self, a: &AlgebraElement) -> Result<AlgebraElement> {
        self.check(a)?;
        project_p(a, self.target_level)
    }

    pub fn complement(&self, a: &AlgebraElement) -> Result<AlgebraElement> {
        self.check(a)?;
        project_q(a, self.target_level)
    }
}

/// `E_n`: normalized partial trace over legs `n+1 ..= a.level()`.
pub fn cond_expect(a: &AlgebraElement, n: usize) -> Result<AlgebraElement> {
    let top = a.level();
    if n > top {
        return Err(Error::LevelOrder { from: top, to: n });
    }
    if n == top {
        return Ok(a.clone());
    }
    let d = 1usize << n;
    let k = 1usize << (top - n);
    let entries = a.entries();
    let scale = 1.0 / k as f64;
    let reduced = DMatrix::from_fn(d, d, |i, j| {
        let mut acc = Complex64::new(0.0, 0.0);
        for s in 0..k {
            acc += entries[(i * k + s, j * k + s)];
        }
        acc * scale
    });
    Ok(AlgebraElement::from_matrix_unchecked(n, reduced))
}

/// `P_n = Π_n ∘ E_n`, returned at the level of `a`.
pub fn project_p(a: &AlgebraElement, n: usize) -> Result<AlgebraElement> {
    embed(&cond_expect(a, n)?, a.level())
}

/// `Q_n = I − P_n`.
pub fn project_q(a: &AlgebraElement, n: usize) -> Result<AlgebraElement> {
    Ok(a - &project_p(a, n)?)
}

/// `B`: the diagonal part of `a`.
pub fn diag_expect(a: &AlgebraElement) -> AlgebraElement {
    let d = a.dim();
    let entries = a.entries();
    let diag = DMatrix::from_fn(d, d, |i, j| {
        if i == j {
            entries[(i, i)]
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    AlgebraElement::from_matrix_unchecked(a.level(), diag)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tower::{gns_inner, normalized_trace, random_element, ElementKind};

    /// Partial-trace oracle: sums `a[(i,s),(j,s)]` through a explicit
    /// multi-index decomposition, independent of the strided kernel above.
    fn partial_trace_oracle(a: &AlgebraElement, n: usize) -> DMatrix<Complex64> {
        let top = a.level();
        let d = 1usize << n;
        let mut out = DMatrix::zeros(d, d);
        for row in 0..a.dim() {
            for col in 0..a.dim() {
                let (hi_r, lo_r) = (row >> (top - n), row & ((1 << (top - n)) - 1));
                let (hi_c, lo_c) = (col >> (top - n), col & ((1 << (top - n)) - 1));
                if lo_r == lo_c {
                    out[(hi_r, hi_c)] += a.get(row, col);
                }
            }
        }
        out / Complex64::new((1usize << (top - n)) as f64, 0.0)
    }

    #[test]
    fn partial_trace_example() {
        let z = AlgebraElement::pauli_z();
        let a = z.kron(&AlgebraElement::real_diagonal(&[3.0, 1.0]).unwrap()).unwrap();
        let e = cond_expect(&a, 1).unwrap();
        assert_eq!(e.entries(), &partial_trace_oracle(&a, 1));
        assert_eq!(e, AlgebraElement::real_diagonal(&[2.0, -2.0]).unwrap());
    }

    #[test]
    fn partial_trace_matches_oracle_on_random_input() {
        let a = random_element(4, ElementKind::General, 77).unwrap();
        for n in 0..=4 {
            let e = cond_expect(&a, n).unwrap();
            let oracle = partial_trace_oracle(&a, n);
            assert!(crate::linalg::max_abs(&(e.entries() - oracle)) < 1e-12);
        }
    }

    #[test]
    fn cond_expect_identity_cases() {
        let a = random_element(2, ElementKind::General, 1).unwrap();
        assert_eq!(cond_expect(&a, 2).unwrap(), a);
        let one = AlgebraElement::identity(3).unwrap();
        assert_eq!(cond_expect(&one, 1).unwrap(), AlgebraElement::identity(1).unwrap());
        assert!(matches!(cond_expect(&a, 3), Err(Error::LevelOrder { .. })));
    }

    #[test]
    fn cond_expect_is_trace_preserving_and_bimodular() {
        let a = random_element(3, ElementKind::General, 2).unwrap();
        let x = random_element(1, ElementKind::General, 3).unwrap();
        let y = random_element(1, ElementKind::General, 4).unwrap();
        let tr = normalized_trace(&cond_expect(&a, 1).unwrap()) - normalized_trace(&a);
        assert!(tr.norm() < 1e-12);
        let xa_y = &(&embed(&x, 3).unwrap() * &a) * &embed(&y, 3).unwrap();
        let lhs = cond_expect(&xa_y, 1).unwrap();
        let rhs = &(&x * &cond_expect(&a, 1).unwrap()) * &y;
        assert!(lhs.approx_eq(&rhs, 1e-12));
    }

    #[test]
    fn projection_examples() {
        let z = AlgebraElement::pauli_z();
        let a = z.kron(&AlgebraElement::real_diagonal(&[3.0, 1.0]).unwrap()).unwrap();
        let p = project_p(&a, 1).unwrap();
        let oracle = embed(
            &AlgebraElement::new(1, partial_trace_oracle(&a, 1)).unwrap(),
            2,
        )
        .unwrap();
        assert_eq!(p, oracle);
        assert_eq!(p, AlgebraElement::real_diagonal(&[2.0, 2.0, -2.0, -2.0]).unwrap());

        let r = random_element(3, ElementKind::General, 5).unwrap();
        for n in 0..=3 {
            let inner = gns_inner(&project_p(&r, n).unwrap(), &project_q(&r, n).unwrap()).unwrap();
            assert!(inner.norm() < 1e-12);
        }

        let b = random_element(1, ElementKind::General, 6).unwrap();
        let up = embed(&b, 3).unwrap();
        assert!(project_p(&up, 1).unwrap().approx_eq(&up, 1e-12));
    }

    #[test]
    fn spec_object_checks_levels() {
        assert!(ExpectationSpec::new(2, 3).is_err());
        let spec = ExpectationSpec::new(3, 1).unwrap();
        let a = random_element(3, ElementKind::General, 7).unwrap();
        assert_eq!(spec.project(&a).unwrap(), project_p(&a, 1).unwrap());
        assert_eq!(
            spec.extend(&spec.expect(&a).unwrap()).unwrap(),
            project_p(&a, 1).unwrap()
        );
        assert!(spec.expect(&AlgebraElement::identity(2).unwrap()).is_err());
        assert!((&spec.project(&a).unwrap() + &spec.complement(&a).unwrap()).approx_eq(&a, 1e-12));
    }

    #[test]
    fn diag_expect_examples() {
        let a = AlgebraElement::from_real_rows(1, &[1.0, 5.0, 7.0, 2.0]).unwrap();
        assert_eq!(diag_expect(&a), AlgebraElement::real_diagonal(&[1.0, 2.0]).unwrap());
        assert!(diag_expect(&AlgebraElement::pauli_x()).is_zero());
        let r = random_element(3, ElementKind::General, 8).unwrap();
        let b = diag_expect(&r);
        assert_eq!(diag_expect(&b), b);
    }

    #[test]
    fn diag_expect_is_sum_of_compressions() {
        let r = random_element(3, ElementKind::General, 9).unwrap();
        let mut sum = AlgebraElement::zeros(3).unwrap();
        for p in AlgebraElement::diagonal_projections(3).unwrap() {
            sum = &sum + &(&(&p * &r) * &p);
        }
        assert!(sum.approx_eq(&diag_expect(&r), 1e-14));
    }

    #[test]
    fn diag_expect_is_positive_and_trace_preserving() {
        let p = random_element(3, ElementKind::Psd, 10).unwrap();
        let b = diag_expect(&p);
        assert!(b.eigenvalues()[0] >= -1e-12);
        assert!((normalized_trace(&b) - normalized_trace(&p)).norm() < 1e-12);
    }
}
