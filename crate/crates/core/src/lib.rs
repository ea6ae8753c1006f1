//! Exact combinatorics of translational tilings of finite cyclic groups:
//! verification, cyclotomic spectra, box counts, splitting structure, and
//! seeded search.

pub mod boxes;
pub mod cyclotomic;
pub mod isometry;
pub mod error;
pub mod multiset;
pub mod corpus;
pub mod search;
pub mod splitting;
pub mod structure;
pub mod tiling;
pub mod zmod;

pub use error::{Error, Result};
pub use multiset::Multiset;
pub use zmod::Modulus;
