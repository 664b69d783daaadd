//! Exact computations on affine semigroups: Hilbert bases, Apéry sets,
//! extraction grades, strong atoms, stratifications of the atom set and the
//! unique layered representations they induce.

pub mod arith;
pub mod block;
pub mod cone;
pub mod error;
pub mod extraction;
pub mod hilbert;
pub mod monoid;
pub mod oracle;
pub mod stratify;

pub use arith::{IntVec, LatticeBasis, Rat, RatVec};
pub use error::{Error, ErrorKind, Result};
