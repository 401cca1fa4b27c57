//! Probability boxes, imprecise copulas, credal products and stochastic
//! orders, decided over exact rationals.
//!
//! Objects live on finite grids of the extended real line. Coherence and
//! envelope questions are answered by an exact simplex oracle
//! ([`numerics::simplex`]), so "coherent" and "not coherent" are decided
//! without floating-point slack.

pub mod numerics;
pub mod grid;
pub mod pbox;
pub mod copula;
pub mod icopula;
pub mod combine;
pub mod credal;
pub mod orders;
pub mod io;
pub mod cli;
