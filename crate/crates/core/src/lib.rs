//! Weak covering of the unit cube by random and low-discrepancy designs.
//!
//! The crate estimates the covered volume fraction `F_d(r, X_n)` of balls of
//! radius `r` centred at `n` design points, compares sampling schemes
//! (uniform or beta on a shrunken δ-cube, Sobol, vertex designs) and provides
//! normal and Edgeworth approximations of the ball-cube intersection
//! probability that drives the product formula
//! `F = E_U[1 - (1 - P_X{|U - X| <= r})^n]`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod coverage;
pub mod error;
pub mod geometry;
pub mod intersect;
mod kernels;
pub mod quadrature;
pub mod rng;
pub mod sampling;
pub mod sobol;
pub mod solvers;
pub mod special;

pub use error::{Error, Result};
pub use geometry::{Ball, DeltaCube, Design, Point};
pub use rng::SeededStream;
