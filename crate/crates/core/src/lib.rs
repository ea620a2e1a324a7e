//! Discrete approximations of planar domains on the triangular lattice,
//! critical site percolation crossing events on them, and conformal-map
//! oracles for the continuum crossing probabilities.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]

extern crate alloc;

mod math;

pub mod geometry;
pub mod domain_approx;
pub mod exec;
pub mod lattice;
pub mod percolation;
pub mod cardy_oracle;
