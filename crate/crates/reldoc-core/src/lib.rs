//! Executable core of quantale- and semiring-valued relation calculus on
//! finite carriers.
//!
//! The crate is organised in layers:
//!
//! * [`valuealg`] — value algebras: quantales (complete lattices with a
//!   monoidal tensor) and ordered semirings, with law checkers.
//! * [`doctrine`] — indexed families of relations over a base category:
//!   matrix relations valued in a quantale or semiring, fully tabulated
//!   presentations, change of base, and the generic law battery.
//! * [`lifting`] — structure-preserving maps between doctrines, the
//!   Hausdorff lifting of the finite powerset functor, and bisimulation
//!   fixpoints for coalgebras.
//! * [`quotient`] — equivalence data, quotient arrows with certificates,
//!   and the quotient completion together with its unit and multiplication.
//! * [`extensional`] — extensional equality of arrows, collapse of a
//!   doctrine to graph-distinguishable arrows, and separation quotients of
//!   metric spaces.
//! * [`projalg`] — projective objects, monads and their algebras, and the
//!   doctrine of congruences over Eilenberg-Moore categories.
//! * [`structure`] — ordered categories with involution, the doctrine of
//!   all arrows over the category of maps, the rule of unique choice,
//!   product structure on fibres, and the Frobenius/modular law checkers.
//!
//! Everything is finite and deterministic: sampled checks draw from a
//! seeded generator, and every failed law comes with a replayable witness.

pub mod valuealg;
pub mod doctrine;
pub mod lifting;
pub mod quotient;
pub mod extensional;
pub mod projalg;
pub mod structure;

mod report;
pub use report::{LawEntry, LawReport};

use thiserror::Error;

/// Errors shared by every layer of the crate.
#[derive(Error, Debug, Clone)]
pub enum DocError {
    #[error("unknown object: {0}")]
    UnknownObject(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("malformed table: {0}")]
    MalformedTable(String),
    #[error("empty base set")]
    EmptyBase,
    #[error("enumeration cap exceeded: {0}")]
    CapExceeded(String),
    #[error("size limit exceeded: {0}")]
    SizeLimit(String),
    #[error("not a descent datum: {0}")]
    NotDescentDatum(String),
    #[error("relation is not an equivalence: {0}")]
    NotEquivalence(String),
    #[error("equivalence is not coarser: {0}")]
    NotCoarser(String),
    #[error("no quotient constructor for this doctrine")]
    NoQuotientConstructor,
    #[error("base assignment is not functorial: {0}")]
    NonFunctorial(String),
    #[error("arrows are not parallel: {0}")]
    NotParallel(String),
    #[error("fibre element is not a congruence: {0}")]
    NotCongruence(String),
    #[error("base category has no declared finite products")]
    NoProducts,
    #[error("ill-defined quotient data: {0}")]
    IllDefined(String),
    #[error("lifting is not monotone: {0}")]
    NonMonotoneLifting(String),
    #[error("precondition failed: {0}")]
    PreconditionFailed(String),
}

pub type Result<T> = std::result::Result<T, DocError>;
