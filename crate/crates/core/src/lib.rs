//! Noncommutative Dirichlet forms on the matrix tower `M_2 ⊂ M_4 ⊂ …`.
//!
//! Everything is computed at a finite working level with dense complex
//! linear algebra: conditional expectations, quantum Markov semigroups and
//! their Choi matrices, Dirichlet forms with their restrictions and
//! amplifications, and the commutator derivation into `l²(2^n, M_{2^n})`.

pub mod derivation;
pub mod error;
pub mod expectations;
pub mod forms;
pub mod harness;
mod linalg;
pub mod report;
pub mod superop;
pub mod tower;

pub use error::{Error, Result};
pub use report::PropertyReport;
pub use tower::{AlgebraElement, ElementKind, Tolerance};
