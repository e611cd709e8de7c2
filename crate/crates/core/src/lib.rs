//! Simulation of zero-temperature Markovian open quantum systems.
//!
//! The master equation is assembled in non-diagonal form from eigenoperators
//! of the free Hamiltonian and a spectral tensor, then solved three ways:
//! direct superoperator propagation ([`oracle`]), a cascade over free-energy
//! sectors driven by a non-Hermitian effective generator ([`cascade`]), and
//! quantum-jump Monte Carlo ([`trajectory`]).

pub mod cascade;
pub mod eigenops;
pub mod error;
pub mod lindblad;
pub mod models;
pub mod ode;
pub mod operator;
pub mod oracle;
pub mod trajectory;

pub use error::{Error, Result};
