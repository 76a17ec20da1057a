//! Invariants of parametric numerical and affine semigroups
//! `S_n = <f_1(n), ..., f_k(n)>`, evaluated at each `n` and fitted with
//! eventual quasi-polynomials.
//!
//! - [`polyfam`]: integer polynomials in `n` and parametric families.
//! - [`numsg`]: Frobenius number, genus, Apéry sets, pseudo-Frobenius numbers.
//! - [`factor`]: factorizations, length sets and delta sets.
//! - [`homology`]: squarefree divisor complexes and graded Betti numbers.
//! - [`eqp`]: exact quasi-polynomial fitting.
//! - [`presburger`]: parametric Presburger formulas with a bounded evaluator.
//! - [`sweep`]: the invariant registry and sweeps over `n`.

pub mod eqp;
pub mod factor;
pub mod homology;
pub mod numsg;
pub mod polyfam;
pub mod presburger;
pub mod sweep;

use thiserror::Error;

pub use eqp::{fit, QuasiPolynomial, SampleSeries};
pub use homology::{FieldSpec, SimplicialComplex};
pub use numsg::SemigroupView;
pub use polyfam::{ParametricFamily, PolynomialZ};
pub use presburger::Formula;
pub use sweep::{sweep, Invariant, Sweep, SweepOptions};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error(transparent)]
    Family(#[from] polyfam::FamilyError),
    #[error(transparent)]
    Poly(#[from] polyfam::PolyError),
    #[error(transparent)]
    Semigroup(#[from] numsg::NumsgError),
    #[error(transparent)]
    Factor(#[from] factor::FactorError),
    #[error(transparent)]
    Homology(#[from] homology::HomologyError),
    #[error(transparent)]
    Eqp(#[from] eqp::EqpError),
    #[error(transparent)]
    Presburger(#[from] presburger::PresburgerError),
    #[error("unknown invariant `{0}`")]
    UnknownInvariant(String),
    #[error("length_count and delta_elem_count need an element polynomial")]
    MissingElement,
    #[error("empty range {n_lo}..{n_hi}")]
    EmptyRange { n_lo: u64, n_hi: u64 },
}
