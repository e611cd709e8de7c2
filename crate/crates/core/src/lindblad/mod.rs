//! Markovian master-equation assembly: spectral tensor, Lamb shift and the
//! tagged Liouvillian superoperator.

mod liouvillian;
mod tensor;

pub use liouvillian::{
    build_lamb_shift, build_liouvillian, frequency_terms, match_tol, FrequencyTerm,
    LiouvillianParts, TaggedLiouvillian,
};
pub use tensor::{gamma_from_halfline, scalar_entry, SpectralEntry, SpectralTensor};
