//! Dimension-level verification engine for modular fusion data.
//!
//! Given the modular data of a fusion category (S-matrix, twists, central
//! charge, fusion tensor), this crate validates the structural axioms and
//! mechanically checks the quantitative identities a consistent theory of
//! conformal-block dimensions must satisfy:
//!
//! * fusion coefficients recomputed from S via the Verlinde sum,
//! * S-conjugation diagonalizing the fusion ring,
//! * triviality of the transparent (Mueger) center,
//! * conformal-block dimensions over stable genus-labeled graphs,
//!   independent of the chosen graph (factorization),
//! * invariance under inserting the vacuum label (propagation of vacua),
//! * charge-conjugation modular invariance and doubled correlator-space
//!   dimensions,
//! * the exact commutation identity of the truncated sewing element over
//!   graded modules.
//!
//! See the `modfunctor` binary for the batch interface.

// index loops mirror the matrix notation throughout the numeric code
#![allow(clippy::needless_range_loop)]

pub mod blocks;
pub mod checks;
pub mod correlators;
pub mod error;
pub mod graph;
pub mod modular;
pub mod report;
pub mod rng;
pub mod sewing;
pub mod verlinde;

pub use error::{Error, Result};
pub use modular::{Label, ModularDatum, Tolerances};
pub use report::{CheckEntry, CheckReport, Residual};
