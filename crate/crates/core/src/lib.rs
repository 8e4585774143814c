//! Discrete computational laboratory for strong maximal functions.
//!
//! The crate models functions and weights as nonnegative values on a finite
//! lattice and computes, exactly, the maximal operators built from averages
//! over axis-parallel rectangles:
//!
//! - [`grid`]: lattices, rectangles, rectangle families, prefix sums.
//! - [`young`]: Young functions, Luxemburg norms, complementary functions.
//! - [`maximal`]: Hardy-Littlewood, strong, complexity-c, multilinear and
//!   Orlicz maximal operators, each with a brute-force oracle.
//! - [`weights`]: rectangle Muckenhoupt constants, Condition (A) estimates,
//!   multiple weights and a catalog of test weights.
//! - [`covering`]: greedy half-overlap and scattered rectangle selections.
//! - [`verify`]: ratio harness for weighted maximal inequalities.
//! - [`cli`]: the `strongmax` command-line front end.
//!
//! Runnable walkthroughs of every capability live in `examples/`.

pub mod cli;
pub mod covering;
pub mod error;
pub mod grid;
pub mod maximal;
pub mod profiles;
pub mod verify;
pub mod weights;
pub mod young;

pub use error::{Error, Result};
pub use grid::{GridFunction, PrefixSum, Rect, RectBasis};
pub use young::YoungFunction;
