//! Numerical laboratory for the coupled incompressible Navier–Stokes /
//! Fokker–Planck model of dilute polymer solutions with spring potential
//! `U(m) = |m|^{2q}` on the periodic torus.

pub mod energetics;
pub mod error;
pub mod fokker_planck;
pub mod grid;
pub mod hierarchy;
mod integrate;
pub mod mgrid;
pub mod moments;
pub mod navier_stokes;
pub mod runner;

pub use error::{Error, Result};
