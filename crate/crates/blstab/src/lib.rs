//! Numerical toolkit for spectral instability of shear flows over a wall.
//!
//! The crate discretizes the half line `z >= 0`, builds background shear
//! profiles and their heat-semigroup evolution, solves the inviscid and
//! viscous stability eigenproblems, propagates the linearized vorticity
//! equation, constructs an approximate growing solution as a wavenumber
//! ladder, and runs the truncated nonlinear system to measure instability.

pub mod cli;
pub mod config;
pub mod elliptic;
pub mod error;
pub mod expansion;
pub mod fit;
pub mod grid;
pub mod linprop;
pub mod nonlin;
pub mod norms;
pub mod profiles;
pub mod report;
pub mod stability;

pub use error::{Error, Result};
