//! The commutator derivation `∂_n a = ⊕_j [p_j, E_n a]` into the Hilbert
//! bimodule `l²(2^n, M_{2^n})`.
//!
//! Left and right actions are componentwise, `(a·f)(j) = a f(j)` and
//! `(f·a)(j) = f(j) a`, and the algebra-valued inner product is
//! `⟨f, g⟩ = Σ_j f(j)* g(j)`. The bimodule is a direct sum of `2^n` copies
//! of the trivial bimodule by construction.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expectations::cond_expect;
use crate::tower::{level_of, normalized_trace, AlgebraElement};

/// An element of `l²(2^n, M_{2^m})`: `2^n` components at a common level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<AlgebraElement>", into = "Vec<AlgebraElement>")]
pub struct BimoduleVector {
    level: usize,
    components: Vec<AlgebraElement>,
}

impl BimoduleVector {
    pub fn new(components: Vec<AlgebraElement>) -> Result<Self> {
        let level = level_of(components.len()).ok_or_else(|| {
            Error::BimoduleMismatch(format!(
                "component count {} is not a power of two",
                components.len()
            ))
        })?;
        if let Some(first) = components.first() {
            let carrier = first.level();
            if let Some(bad) = components.iter().find(|c| c.level() != carrier) {
                return Err(Error::BimoduleMismatch(format!(
                    "components at levels {carrier} and {}",
                    bad.level()
                )));
            }
        }
        Ok(Self { level, components })
    }

    pub fn zeros(level: usize, carrier_level: usize) -> Result<Self> {
        let count = crate::tower::dim_of(level)?;
        let zero = AlgebraElement::zeros(carrier_level)?;
        Ok(Self {
            level,
            components: vec![zero; count],
        })
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn carrier_level(&self) -> usize {
        self.components[0].level()
    }

    pub fn components(&self) -> &[AlgebraElement] {
        &self.components
    }

    pub fn component(&self, j: usize) -> &AlgebraElement {
        &self.components[j]
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.level != other.level || self.carrier_level() != other.carrier_level() {
            return Err(Error::BimoduleMismatch(format!(
                "l²(2^{}, M_(2^{})) vs l²(2^{}, M_(2^{}))",
                self.level,
                self.carrier_level(),
                other.level,
                other.carrier_level()
            )));
        }
        Ok(())
    }

    fn check_carrier(&self, a: &AlgebraElement) -> Result<()> {
        if a.level() != self.carrier_level() {
            return Err(Error::LevelMismatch {
                expected: self.carrier_level(),
                found: a.level(),
            });
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(Self {
            level: self.level,
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(f, g)| f + g)
                .collect(),
        })
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.check_same_shape(other).is_err() {
            return f64::INFINITY;
        }
        self.components
            .iter()
            .zip(&other.components)
            .map(|(f, g)| f.max_abs_diff(g))
            .fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(AlgebraElement::is_zero)
    }
}

impl TryFrom<Vec<AlgebraElement>> for BimoduleVector {
    type Error = Error;

    fn try_from(components: Vec<AlgebraElement>) -> Result<Self> {
        Self::new(components)
    }
}

impl From<BimoduleVector> for Vec<AlgebraElement> {
    fn from(v: BimoduleVector) -> Self {
        v.components
    }
}

/// `∂_n a`: component `j` is `[p_j, E_n a]`.
pub fn derive(a: &AlgebraElement, n: usize) -> Result<BimoduleVector> {
    let b = cond_expect(a, n)?;
    let components = AlgebraElement::diagonal_projections(n)?
        .iter()
        .map(|p| p.commutator(&b))
        .collect::<Result<Vec<_>>>()?;
    Ok(BimoduleVector {
        level: n,
        components,
    })
}

/// `(a·f)(j) = a f(j)`.
pub fn bimodule_left(a: &AlgebraElement, f: &BimoduleVector) -> Result<BimoduleVector> {
    f.check_carrier(a)?;
    Ok(BimoduleVector {
        level: f.level,
        components: f.components.iter().map(|c| a * c).collect(),
    })
}

/// `(f·a)(j) = f(j) a`.
pub fn bimodule_right(f: &BimoduleVector, a: &AlgebraElement) -> Result<BimoduleVector> {
    f.check_carrier(a)?;
    Ok(BimoduleVector {
        level: f.level,
        components: f.components.iter().map(|c| c * a).collect(),
    })
}

/// `⟨f, g⟩ = Σ_j f(j)* g(j)`, an element of the carrier algebra.
pub fn bimodule_inner(f: &BimoduleVector, g: &BimoduleVector) -> Result<AlgebraElement> {
    f.check_same_shape(g)?;
    let mut total = AlgebraElement::zeros(f.carrier_level())?;
    for (x, y) in f.components.iter().zip(&g.components) {
        total = &total + &(&x.adjoint() * y);
    }
    Ok(total)
}

/// `τ(⟨∂_n a, ∂_n a⟩)`, which equals the commutator form at level `n`.
pub fn derivation_energy(a: &AlgebraElement, n: usize) -> Result<f64> {
    let f = derive(a, n)?;
    Ok(normalized_trace(&bimodule_inner(&f, &f)?).re)
}
