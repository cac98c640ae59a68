//! Trace and observability constants for Laplace eigenfunctions on the flat
//! torus `T^d = R^d / Z^d`.
//!
//! An eigenfunction with eigenvalue `4π²λ²` is a trigonometric polynomial
//! whose frequencies lie on the lattice shell `{k ∈ Z^d : |k|² = λ²}`. For a
//! probability measure `μ` on the torus,
//!
//! ```text
//! ∫ |u|² dμ = Σ_{k,ℓ} μ̂(k − ℓ) û_k conj(û_ℓ)
//! ```
//!
//! so the best per-shell constants of the trace and observability
//! inequalities are the extremal eigenvalues of the Hermitian Gram matrix
//! `[μ̂(k − ℓ)]`. This crate builds those matrices and their spectra
//! ([`quadform`]), the integer and geometric structure of the shells
//! ([`arith`], [`lattice`]), a catalogue of measures with Fourier
//! coefficients ([`measures`]), explicit concentrating and vanishing
//! eigenfunctions ([`construct`]), and exact fractional Sobolev seminorms of
//! indicator functions of interval unions ([`sobolev`]).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod arith;
pub mod cli;
pub mod construct;
mod eigen;
mod error;
pub mod lattice;
pub mod measures;
pub mod quadform;
pub mod quadrature;
pub mod report;
pub mod sobolev;

pub use eigen::{hermitian_extremes, symmetric_extremes, Extremes};
pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;

/// An integer frequency vector.
pub type Freq = Vec<i64>;
