//! Stochastic distillation of quantum steering under local filters.
//!
//! A steering experiment leaves one party ("B") with a *state assemblage*: a
//! family of unnormalised states `σ_{a|x}` indexed by the remote measurement
//! input `x` and outcome `a`. This crate implements the toolbox needed to
//! study how such assemblages transform under single-Kraus local filters on
//! the trusted side:
//!
//! - dense complex Hermitian linear algebra ([`linalg`]): spectral
//!   decompositions, support projectors, operator square roots and
//!   pseudo-inverses, polar decomposition;
//! - assemblage types and the steering-equivalent observable (SEO)
//!   ([`assemblage`]);
//! - max-relative entropy and the optimal-scaling constant behind filter
//!   success probabilities ([`maxrelent`]);
//! - filter application and optimal single-Kraus filter synthesis
//!   ([`filter`]);
//! - the SEO ordering decision problem: witness verification and a
//!   random-restart search on the unitary manifold ([`ordering`]);
//! - a small dense semidefinite-programming solver with primal/dual
//!   certificates ([`sdp`]);
//! - LHS/JM membership and robustness measures, noise models, the
//!   steering-induced incompatibility measure, and free operations
//!   ([`robustness`]);
//! - reproducible random instance generation ([`random`]), file formats
//!   ([`document`]), batch certification suites ([`certify`]) and the
//!   built-in qubit-qutrit demo ([`demo`]).
//!
//! Start with the runnable programs under `examples/`; each one exercises a
//! single capability end to end. The `steerdist` binary exposes the same
//! functionality as subcommands (`seo`, `check-order`, `robustness`, `demo`,
//! `certify`, `generate`).

pub mod assemblage;
pub mod certify;
pub mod demo;
pub mod document;
pub mod error;
pub mod filter;
pub mod linalg;
pub mod maxrelent;
mod optim;
pub mod ordering;
pub mod presets;
pub mod random;
pub mod robustness;
pub mod sdp;

pub use error::{Error, Result};
pub use linalg::{GeneralOperator, HermitianOperator};
