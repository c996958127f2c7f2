//! Compiles the order-`m` cycle-count statistic
//!
//! ```text
//! C_m = sum over distinct i_1..i_m of A[i_1,i_2] A[i_2,i_3] ... A[i_m,i_1]
//! ```
//!
//! into a signed integer combination of cheap algebraic terms, and evaluates
//! the result on concrete symmetric matrices.
//!
//! The pipeline is:
//!
//! 1. [`partition`]: stream the set partitions of the cycle's vertices and
//!    merge each admissible one into a multigraph.
//! 2. [`catalog`]: group the multigraphs by isomorphism and attach each class
//!    its Möbius coefficient.
//! 3. [`prune`]: rewrite each class's full sum by pruning pendant nodes of a
//!    labeled multigraph until a single node (a vector expression) or an
//!    irreducible core remains.
//! 4. [`expr`]: the resulting [`expr::Formula`], with LaTeX, text and JSON
//!    emitters.
//! 5. [`eval`]: numeric evaluation, brute-force oracles and timing.
//!
//! [`detect`] reproduces a low-rank detection study built on top of the
//! compiled formulas.

pub mod cache;
pub mod catalog;
pub mod detect;
pub mod error;
pub mod eval;
pub mod exec;
pub mod expr;
pub mod partition;
pub mod prune;

pub use catalog::{build_catalog, Catalog, GraphClass};
pub use error::{Error, Result};
pub use exec::Exec;
pub use expr::{compile, Formula, Term, TermBody};
pub use partition::{MultiGraph, Partition};

/// Largest order compiled without an explicit override.
pub const DEFAULT_MAX_ORDER: usize = 12;

/// Hard ceiling on the order; partitions store block ids as `u8` and node
/// sets as `u32` masks.
pub const HARD_MAX_ORDER: usize = 16;
