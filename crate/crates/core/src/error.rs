use thiserror::Error;

/// Errors raised by the simulation library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("operator is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("operator is not Hermitian: max|M - M^dagger| = {deviation:.3e} (allowed {allowed:.3e})")]
    NotHermitian { deviation: f64, allowed: f64 },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("non-finite entries in {0}")]
    NonFinite(String),

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("rate matrix at omega = {omega} is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPositive { omega: f64, min_eigenvalue: f64 },

    #[error("channel count mismatch: tensor has {tensor} channels, decomposition has {decomposition}")]
    ChannelMismatch { tensor: usize, decomposition: usize },

    #[error("zero-temperature rule violated: dissipation rate at omega = {omega} < 0 must vanish when the bath is at T = 0")]
    AbsorptionAtZeroTemperature { omega: f64 },

    #[error("the sector cascade requires a zero-temperature spectral tensor (gamma(omega < 0) = 0); restrict the tensor or use the oracle propagator")]
    NotZeroTemperature,

    #[error("zero-frequency dissipation (|gamma(0)| = {magnitude:.3e}) cannot be expressed as a sector cascade; use the oracle propagator")]
    ZeroFrequencyDissipation { magnitude: f64 },

    #[error("cascade feeding from sector pair {from:?} to {to:?} does not lower the energy; selection rule broken")]
    CyclicFeeding { from: (usize, usize), to: (usize, usize) },

    #[error("jump-count statistics need an initial state inside one diagonal energy sector; split the state by linearity ({0})")]
    MixedSectorInitialState(String),

    #[error("nested-integral order {order} is too large (cost ~ {cost:.3e} propagator evaluations); maximum supported order is {max}")]
    ClosedFormTooDeep { order: usize, cost: f64, max: usize },

    #[error("step size underflow at t = {time} (last accepted step), h = {step:.3e}")]
    StepUnderflow { time: f64, step: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
