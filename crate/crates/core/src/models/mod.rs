//! Model specifications, prebuilt physical models and observables.

mod builders;
mod observables;

use std::collections::BTreeMap;

pub use builders::{
    model_damped_cavity, model_n_atoms_cavity, model_two_atoms, random_model, singlet,
    triplet, MAX_MODEL_DIM,
};
pub use observables::{concurrence, dfs_basis, populations};

use crate::cascade::{
    cascade_solve, effective_generator, free_hamiltonian, sector_split, CascadeOptions,
    EffectiveGenerator, SectorSolution,
};
use crate::eigenops::{default_freq_tol, BohrDecomposition};
use crate::error::{Error, Result};
use crate::lindblad::{build_liouvillian, SpectralTensor, TaggedLiouvillian};
use crate::operator::{
    default_cluster_tol, ensure_finite, ensure_hermitian, ensure_square, hermitian_eigensystem,
    projector, validate_density_matrix, Operator, StateVector, HERMITIAN_INPUT_TOL,
};
use crate::oracle::{propagate_expm, EvolutionResult, INITIAL_STATE_TOL};
use crate::trajectory::{diagonalize_channels, JumpChannelSet};

/// Microscopic inputs of a simulation.
#[derive(Debug, Clone)]
pub struct ModelSpec {
    pub dims: Vec<usize>,
    pub h_s: Operator,
    pub couplings: Vec<(String, Operator)>,
    pub tensor: SpectralTensor,
    pub initial_state: Operator,
    pub metadata: BTreeMap<String, String>,
}

impl ModelSpec {
    pub fn new(
        dims: Vec<usize>,
        h_s: Operator,
        couplings: Vec<(String, Operator)>,
        tensor: SpectralTensor,
        initial_state: Operator,
    ) -> Result<Self> {
        let spec = Self {
            dims,
            h_s,
            couplings,
            tensor,
            initial_state,
            metadata: BTreeMap::new(),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn dim(&self) -> usize {
        self.h_s.nrows()
    }

    pub fn validate(&self) -> Result<()> {
        let dim = ensure_square(&self.h_s)?;
        ensure_finite(&self.h_s, "Hamiltonian")?;
        ensure_hermitian(&self.h_s, HERMITIAN_INPUT_TOL)?;
        let product: usize = self.dims.iter().product();
        if self.dims.is_empty() || product != dim {
            return Err(Error::Dimension(format!(
                "subsystem dims {:?} do not multiply to the Hamiltonian dimension {dim}",
                self.dims
            )));
        }
        if self.couplings.is_empty() {
            return Err(Error::InvalidArgument("at least one coupling is required".into()));
        }
        for (label, a) in &self.couplings {
            if ensure_square(a)? != dim {
                return Err(Error::Dimension(format!("coupling '{label}' has the wrong dimension")));
            }
            ensure_finite(a, label)?;
            ensure_hermitian(a, HERMITIAN_INPUT_TOL)?;
        }
        if self.tensor.channel_count() != self.couplings.len() {
            return Err(Error::ChannelMismatch {
                tensor: self.tensor.channel_count(),
                decomposition: self.couplings.len(),
            });
        }
        if ensure_square(&self.initial_state)? != dim {
            return Err(Error::Dimension("initial state has the wrong dimension".into()));
        }
        validate_density_matrix(&self.initial_state, INITIAL_STATE_TOL)
    }

    pub fn with_initial_state(mut self, rho: Operator) -> Result<Self> {
        self.initial_state = rho;
        self.validate()?;
        Ok(self)
    }

    pub fn with_initial_pure(self, psi: &StateVector) -> Result<Self> {
        let n = psi.norm();
        self.with_initial_state(projector(&(psi / nalgebra::Complex::new(n, 0.0))))
    }

    pub fn with_metadata(mut self, key: &str, value: impl ToString) -> Self {
        self.metadata.insert(key.to_string(), value.to_string());
        self
    }

    /// Eigenoperator decomposition with the default clustering tolerances.
    pub fn decomposition(&self) -> Result<BohrDecomposition> {
        let spectrum = hermitian_eigensystem(&self.h_s, default_cluster_tol(&self.h_s))?;
        let freq_tol = default_freq_tol(&spectrum).max(f64::MIN_POSITIVE);
        BohrDecomposition::new(
            spectrum,
            self.couplings.iter().map(|(_, a)| a.clone()).collect(),
            freq_tol,
        )
    }

    pub fn prepare(&self) -> Result<PreparedModel> {
        self.validate()?;
        let decomposition = self.decomposition()?;
        let liouvillian = build_liouvillian(&self.h_s, &self.tensor, &decomposition)?;
        Ok(PreparedModel {
            spec: self.clone(),
            decomposition,
            liouvillian,
        })
    }
}

/// A model with its decomposition and generator assembled.
#[derive(Debug, Clone)]
pub struct PreparedModel {
    pub spec: ModelSpec,
    pub decomposition: BohrDecomposition,
    pub liouvillian: TaggedLiouvillian,
}

impl PreparedModel {
    /// `H_S + H_LS`.
    pub fn effective_hamiltonian(&self) -> Operator {
        &self.spec.h_s + self.liouvillian.lamb_shift_operator()
    }

    pub fn generator(&self, include_lamb_shift: bool) -> Result<EffectiveGenerator> {
        let h0 = free_hamiltonian(
            &self.spec.h_s,
            &self.spec.tensor,
            &self.decomposition,
            include_lamb_shift,
        )?;
        effective_generator(&h0, &self.spec.tensor, &self.decomposition)
    }

    pub fn channels(&self) -> Result<JumpChannelSet> {
        diagonalize_channels(&self.spec.tensor, &self.decomposition)
    }

    pub fn oracle(&self, times: &[f64]) -> Result<EvolutionResult> {
        propagate_expm(&self.liouvillian, &self.spec.initial_state, times)
    }

    pub fn cascade(&self, times: &[f64], include_lamb_shift: bool, opts: &CascadeOptions) -> Result<SectorSolution> {
        let generator = self.generator(include_lamb_shift)?;
        let blocks = sector_split(&self.spec.initial_state, self.decomposition.spectrum())?;
        cascade_solve(&blocks, &generator, &self.decomposition, times, opts)
    }

    /// Largest eigenvalue of `H'`, the fastest total decay rate.
    pub fn max_decay_rate(&self) -> Result<f64> {
        let h_prime = self.generator(true)?.h_prime().clone();
        Ok(crate::operator::hermitian_eigenvalues(&h_prime)
            .last()
            .copied()
            .unwrap_or(0.0))
    }
}
