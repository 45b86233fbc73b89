//! A numerical laboratory for the bound states of a fixed two-level system
//! absorbing and emitting relativistic bosons (N + θ ↔ V, no crossing
//! symmetry) on a compact two-dimensional surface.
//!
//! The model is handled through its resolvent rather than a renormalized
//! Hamiltonian: on the sector pair F⁽ⁿ⁺¹⁾ ⊕ F⁽ⁿ⁾ the block inverse of
//! (H − E) is driven by the Schur complement Φ(E) = d − b a⁻¹ b† — the
//! principal operator — whose eigenvalue zeros below threshold are the
//! bound-state energies. The crate
//!
//! * builds Laplace–Beltrami mode catalogs for flat tori and round spheres
//!   ([`manifold`]), and heat-kernel diagonals with two independent
//!   evaluation routes;
//! * enumerates boson occupation bases ([`fock`]) and assembles the
//!   renormalized Φ(E) with the bare mass μ(Λ) ([`principal`]);
//! * tracks the monotone eigenvalue flow ω₀(E), root-finds ω₀(E) = 0 and
//!   reconstructs the two-component ground-state wavefunction from the
//!   Riesz projection ([`spectral`]);
//! * keeps an explicit truncated Hamiltonian as the ground-truth oracle,
//!   with its block resolvent, pseudo-resolvent residuals and decay checks
//!   ([`hamiltonian`]);
//! * evaluates the analytic upper/lower bounds that sandwich the ground
//!   state ([`bounds`]) and the continuum light-front integrals behind them
//!   ([`lightfront`]);
//! * exposes everything as a reproducible CLI with cached, byte-stable
//!   reports ([`cli`]).

// `!(x > 0)`-style guards reject NaN along with the out-of-range values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod cli;
pub mod error;
pub mod fock;
pub mod hamiltonian;
pub mod lightfront;
pub mod manifold;
pub mod numeric;
pub mod principal;
pub mod quad;
pub mod spectral;

pub use error::{Error, Result};
