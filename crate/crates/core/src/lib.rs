//! Numerical laboratory for Gaussian-type measures on the Wasserstein space.
//!
//! A Gaussian measure `G` on the tangent space `T₀ = L²(μ₀)` is pushed to the
//! space of probability measures through `Ψ(φ) = μ₀ ∘ φ⁻¹`. The crate samples
//! that image measure, simulates the associated Ornstein–Uhlenbeck-type
//! diffusion mode by mode with exact transitions, computes Wasserstein
//! distances between the resulting point clouds, and evaluates the
//! intrinsic-derivative calculus and Dirichlet-form quantities built on top.
//!
//! Module map:
//!
//! * [`spectral`]: eigenvalue sequences, per-mode OU kernels, Hermite
//!   eigenfunctions and heat-kernel trace bounds.
//! * [`measure`]: discrete reference measures, the cosine eigenbasis,
//!   tangent vectors, Gaussian sampling and the push-forward map.
//! * [`wasserstein`]: exact 1-D, exact LP and entropic `W_p` solvers.
//! * [`calculus`]: cylindrical functions, intrinsic derivatives and the
//!   reference functions used for tightness arguments.
//! * [`dirichlet`]: Monte Carlo energies, square-field operators and
//!   Galerkin eigenvalue comparison.
//! * [`ou`]: path simulation, invariant-measure sampling and the
//!   semigroup / integration-by-parts / invariance checks.

pub mod calculus;
pub mod dirichlet;
pub mod error;
pub mod measure;
pub mod ou;
pub mod quadrature;
pub mod rng;
pub mod spectral;
pub mod stats;
pub mod wasserstein;

pub use error::{Error, Result};
