//! Smoothing of nonsmooth convex functions by integral averaging over a
//! shrinking ball or cube, plus the two regularized Newton-type methods that
//! operate on the twice-differentiable double average.
//!
//! The crate is split along the pipeline:
//!
//! * [`corpus`] — Lipschitz convex test objectives with value/subgradient
//!   oracles, known minimizers and (where available) closed-form smoothed
//!   references.
//! * [`smoothing`] — the averaging domain, single and double integral
//!   averages of a function (value, gradient, Hessian) under closed-form,
//!   quadrature and Monte Carlo estimators.
//! * [`model`] — the regularized local model `F(y) = Phi(y) + lambda*|y-x|^2`
//!   built on the double average, with its spectral-bound checker.
//! * [`solver`] — the stationary-point search and the superlinear method,
//!   including the halving line search and the radius coherence rules.
//!
//! The crate is `no_std`-compatible (requires `alloc`); all IO, file formats
//! and the CLI live in the companion harness crate.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod corpus;
pub mod error;
pub mod linalg;
pub(crate) mod math;
pub mod model;
pub mod smoothing;
pub mod solver;

pub use error::{Error, Result};
