//! Two-dimensional Meixner random vectors as block-tridiagonal operators on
//! truncated chaos spaces.
//!
//! A random variable is modelled by its quantum decomposition
//! `X = a⁻ + a⁰ + a⁺` on a graded space `⊕ G_n`; a pair `(X, Y)` shares one
//! such space. The crate builds these models, computes their joint moments
//! and commutator tables, recovers them from moment tables, and runs the
//! reduction of a two-dimensional `M_L` vector to a decoupled normal form.

pub mod apc;
pub mod classify;
pub mod error;
pub mod fit;
pub mod graded;
pub mod lie;
pub mod meixner1d;
pub mod sampling;
pub mod vectors2d;

pub use apc::{decompose, moment, moment_equal, MomentFunctional, Word};
pub use classify::{decouple, eliminate_couplings, normalize, CaseTaken, ClassificationReport};
pub use error::{Error, Result};
pub use lie::{check_ml, extract_coefficients, jacobi_audit, StructureCoefficients};
pub use meixner1d::{build_triple, classify1d, lie_closure_1d, JacobiSpec, MeixnerClass, Preset, Support};
pub use vectors2d::{
    build_mixed, build_product, check_nondegenerate, mix_linear, ApcSystem, MixedPreservationSpec,
    SystemSpec,
};
