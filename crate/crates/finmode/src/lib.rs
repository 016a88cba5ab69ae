//! Finite-mode incompressible flows on the 3-torus.
//!
//! A velocity field is a finite sum of Fourier modes
//! `u(x) = sum_n u_n exp(i n . x)` with each coefficient orthogonal to its
//! frequency. The crate provides the field container and its invariants
//! ([`spectral_field`]), the pairwise convective bracket and the exact
//! classification of non-interacting pairs ([`interaction`]), rational
//! convex-position geometry on supports ([`geometry`]), recognition of the
//! stationary families with machine-checkable certificates ([`classifier`]),
//! and a Galerkin integrator for the truncated evolution with optional
//! rotation and viscosity ([`dynamics`]).

pub mod classifier;
pub mod dynamics;
pub mod generate;
pub mod geometry;
pub mod interaction;
pub mod lattice;
pub mod linalg;
pub mod rat;
pub mod spectral_field;
pub mod verify;
