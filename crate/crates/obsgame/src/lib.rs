//! Exact rational toolkit for an observability attack/defense game on
//! linear systems.
//!
//! The value of the game is the dimension of the unobservable subspace of
//! `(C, A + BF)`, an integer that is discontinuous in the matrix entries.
//! Every computation here is therefore carried out in exact arbitrary
//! precision rational arithmetic: ranks, kernels, pseudoinverses, Jordan
//! structure, invariant subspaces and the epoch game built on top of them
//! are all bit-reproducible.
//!
//! Module map:
//!
//! * [`ratmat`] — rational scalars, dense matrices, ranks/kernels/pinv.
//! * [`jordan`] — exact Jordan decomposition for rational-spectrum matrices.
//! * [`attack`] — sensor synthesis minimizing the unobservable subspace.
//! * [`subspace`] — V* iteration and friend-matrix synthesis maximizing it.
//! * [`normalform`] — relative degree and the normal-form reduction.
//! * [`game`] — the alternating best-response game engine and mode analysis.
//! * [`scenario`] — JSON scenario files shared by the CLI and the web demo.

pub mod attack;
pub mod game;
pub mod jordan;
pub mod normalform;
pub mod ratmat;
mod roots;
pub mod scenario;
pub mod subspace;

pub use ratmat::{Matrix, Rat, Subspace};

/// Errors shared across the synthesis and game modules.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    /// The characteristic polynomial has an irrational (or complex) root,
    /// so the exact Jordan machinery cannot proceed.
    #[error("matrix spectrum is not fully rational")]
    NonRationalSpectrum,
    /// Matrix dimensions do not match what the operation requires.
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    /// The supplied subspace is not (A,B)-invariant, so no friend exists.
    #[error("subspace is not (A,B)-invariant")]
    NotInvariant,
    /// No relative degree exists (an output row never reaches the input
    /// within n differentiations, or the decoupling matrix is singular).
    #[error("system has no relative degree")]
    NoRelativeDegree,
}

pub type Result<T> = std::result::Result<T, Error>;
