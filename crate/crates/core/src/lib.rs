//! Matching fields for Grassmannians `Gr(k, n)`, their lattice polytopes,
//! combinatorial mutations between block diagonal matching field polytopes,
//! and desk-scale toric degeneration certificates.

pub mod combinat;
pub mod error;
pub mod mutation;
pub mod polytope;
pub mod toric;
pub mod weightmat;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/matching-fields.md")]
    mod matching_fields {}
    #[doc = include_str!("../../../book/src/polytopes.md")]
    mod polytopes {}
    #[doc = include_str!("../../../book/src/mutations.md")]
    mod mutations {}
    #[doc = include_str!("../../../book/src/toric.md")]
    mod toric {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
