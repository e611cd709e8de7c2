//! Quantum-jump unraveling of the zero-temperature master equation.
//!
//! Pure states drift under `exp(-iBt)` while their norm decays; a jump fires
//! when the squared norm drops below a uniform draw, through one of the
//! channels obtained by diagonalizing `gamma(w)`.

mod channels;
mod ensemble;
mod run;

pub use channels::{diagonalize_channels, JumpChannel, JumpChannelSet, RATE_CLIP_TOL};
pub use ensemble::{ensemble_average, jump_count_histogram, EnsembleEstimate, JumpHistogram};
pub use run::{
    run_ensemble, InitialEnsemble, JumpEvent, TrajectoryRecord, TrajectorySimulator,
    TIME_RESOLUTION,
};
