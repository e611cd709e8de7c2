//! Sector cascade solver for zero-temperature master equations.
//!
//! The state is split into blocks `P(e_m) rho P(e_n)` over energy sectors of
//! `H_S`. Each block evolves under the non-Hermitian generator
//! `B = H_0 - (i/2) H'` and is fed only by the block one jump above it, so
//! the whole evolution is a triangular cascade. Diagonal blocks are mutually
//! orthogonal and their traces give the jump-count law.

mod closed_form;
mod generator;
mod solve;

pub use closed_form::{closed_form_block, gauss_legendre, MAX_CLOSED_FORM_ORDER};
pub use generator::{effective_generator, free_hamiltonian, EffectiveGenerator};
pub use solve::{
    cascade_solve, jump_count_distribution, sector_split, CascadeOptions, JumpDistribution,
    SectorBlock, SectorSolution, Sectors,
};

#[cfg(test)]
mod tests;
