//! Minmax median-of-means (MOM) estimation for linear models under convex
//! Lipschitz losses.
//!
//! The crate provides:
//!
//! - the four classical convex Lipschitz loss families (logistic, hinge,
//!   Huber, quantile) with minimum-norm subgradients ([`losses`]);
//! - median-of-means over blocks and MOM of incremental risks ([`mom`]);
//! - the randomized descent–ascent solver for the minmax MOM estimator,
//!   with ERM as the `K = 1` special case ([`solver`]);
//! - block-count selection by robust cross-validation and a finite-candidate
//!   Lepski procedure ([`model_select`]);
//! - Monte Carlo Rademacher fixed-point complexity estimation for linear
//!   classes together with the closed-form rank bound ([`complexity`]);
//! - numerical verification of local Bernstein conditions for synthetic
//!   models with known conditional output laws ([`bernstein`]);
//! - seeded adversarial/heavy-tailed data generators and the exact
//!   weighted-median solver for one-dimensional L1 regression ([`datagen`]);
//! - outlier scoring from median-block selection counts ([`diagnostics`]);
//! - desk-scale experiment harnesses emitting CSV records ([`experiments`]).
//!
//! All numeric kernels are generic over the scalar type through [`scalar::Real`]
//! (`f32` or `f64`); the experiment harnesses and the CLI work in `f64`.
//! Every randomized routine takes an explicit 64-bit seed and is deterministic
//! given that seed; see [`rng`] for the seed-derivation scheme.

// Comparisons like `!(x > 0)` are deliberate: they reject NaN parameters
// along with out-of-range ones.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bernstein;
pub mod complexity;
pub mod data;
pub mod datagen;
pub mod diagnostics;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod losses;
pub mod model_select;
pub mod mom;
pub mod rng;
pub mod scalar;
pub mod solver;

pub use error::{Error, Result};
pub use scalar::Real;

/// Concrete `f64` instantiations of the core types.
pub type Matrix64 = linalg::Matrix<f64>;
pub type Dataset64 = data::Dataset<f64>;
pub type LossSpec64 = losses::LossSpec<f64>;
pub type SolverConfig64 = solver::SolverConfig<f64>;
pub type FitResult64 = solver::FitResult<f64>;
pub type ComplexityEstimate64 = complexity::ComplexityEstimate<f64>;
pub type BernsteinReport64 = bernstein::BernsteinReport<f64>;
