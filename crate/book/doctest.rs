//! Runs the code blocks of the guide as doctests.

#[doc = include_str!("src/overview.md")]
pub mod overview {}

#[doc = include_str!("src/quaternions.md")]
pub mod quaternions {}

#[doc = include_str!("src/polynomials.md")]
pub mod polynomials {}

#[doc = include_str!("src/relaxations.md")]
pub mod relaxations {}

#[doc = include_str!("src/sparsity.md")]
pub mod sparsity {}

#[doc = include_str!("src/extraction.md")]
pub mod extraction {}

#[doc = include_str!("src/applications.md")]
pub mod applications {}

#[doc = include_str!("src/cli.md")]
pub mod cli {}
