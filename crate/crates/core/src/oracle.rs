//! Reference propagation of the full master equation, by superoperator
//! exponentiation and by adaptive integration, with state-health diagnostics.

use crate::error::{Error, Result};
use crate::lindblad::TaggedLiouvillian;
use crate::ode::{integrate, OdeOptions};
use crate::operator::{
    hermiticity_deviation, matrix_exponential_reported, max_abs_diff, min_eigenvalue, trace,
    unvectorize, validate_density_matrix, vectorize, Operator, ONE,
};

pub const TRACE_TOL: f64 = 1e-8;
pub const HERMITICITY_TOL: f64 = 1e-9;
pub const POSITIVITY_TOL: f64 = 1e-8;

/// Input density-matrix tolerance.
pub const INITIAL_STATE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diagnostics {
    pub trace_deviation: f64,
    pub hermiticity_deviation: f64,
    pub min_eigenvalue: f64,
}

impl Diagnostics {
    pub fn of(rho: &Operator) -> Self {
        Self {
            trace_deviation: (trace(rho) - ONE).norm(),
            hermiticity_deviation: hermiticity_deviation(rho),
            min_eigenvalue: min_eigenvalue(rho),
        }
    }

    pub fn is_healthy(&self) -> bool {
        self.trace_deviation <= TRACE_TOL
            && self.hermiticity_deviation <= HERMITICITY_TOL
            && self.min_eigenvalue >= -POSITIVITY_TOL
    }
}

#[derive(Debug, Clone)]
pub struct EvolutionResult {
    pub times: Vec<f64>,
    pub states: Vec<Operator>,
    pub diagnostics: Vec<Diagnostics>,
    /// Free-form remarks, e.g. exponential fallbacks.
    pub notes: Vec<String>,
}

impl EvolutionResult {
    fn new(times: &[f64], states: Vec<Operator>, notes: Vec<String>) -> Self {
        let diagnostics = states.iter().map(Diagnostics::of).collect();
        Self {
            times: times.to_vec(),
            states,
            diagnostics,
            notes,
        }
    }

    /// First time whose state violates a health bound, if any.
    pub fn first_unhealthy(&self) -> Option<(f64, Diagnostics)> {
        self.times
            .iter()
            .zip(&self.diagnostics)
            .find(|(_, d)| !d.is_healthy())
            .map(|(&t, &d)| (t, d))
    }

    /// Worst values over all times: (trace deviation, Hermiticity deviation, min eigenvalue).
    pub fn worst(&self) -> Diagnostics {
        self.diagnostics.iter().fold(
            Diagnostics {
                trace_deviation: 0.0,
                hermiticity_deviation: 0.0,
                min_eigenvalue: f64::INFINITY,
            },
            |acc, d| Diagnostics {
                trace_deviation: acc.trace_deviation.max(d.trace_deviation),
                hermiticity_deviation: acc.hermiticity_deviation.max(d.hermiticity_deviation),
                min_eigenvalue: acc.min_eigenvalue.min(d.min_eigenvalue),
            },
        )
    }

    /// Max entrywise distance to another result on the same grid.
    pub fn max_distance(&self, other: &EvolutionResult) -> Result<f64> {
        if self.times.len() != other.times.len() {
            return Err(Error::Dimension("time grids differ".into()));
        }
        Ok(self
            .states
            .iter()
            .zip(&other.states)
            .map(|(a, b)| max_abs_diff(a, b))
            .fold(0.0, f64::max))
    }
}

fn check_inputs(l: &TaggedLiouvillian, rho0: &Operator, times: &[f64]) -> Result<()> {
    if rho0.nrows() != l.dim() {
        return Err(Error::Dimension(format!(
            "state dimension {} differs from generator dimension {}",
            rho0.nrows(),
            l.dim()
        )));
    }
    validate_density_matrix(rho0, INITIAL_STATE_TOL)?;
    if times.iter().any(|&t| !(t >= 0.0) || !t.is_finite()) {
        return Err(Error::InvalidArgument("times must be finite and non-negative".into()));
    }
    Ok(())
}

/// `rho(t) = unvec(exp(L t) vec(rho0))` at each requested time.
pub fn propagate_expm(
    l: &TaggedLiouvillian,
    rho0: &Operator,
    times: &[f64],
) -> Result<EvolutionResult> {
    check_inputs(l, rho0, times)?;
    let v0 = vectorize(rho0);
    let mut notes = Vec::new();
    let mut states = Vec::with_capacity(times.len());
    for &t in times {
        let (e, fallback) = matrix_exponential_reported(l.total(), t)?;
        if fallback {
            notes.push(format!("t = {t}: exponential recomputed by repeated squaring"));
        }
        states.push(unvectorize(&(e * &v0), l.dim()));
    }
    Ok(EvolutionResult::new(times, states, notes))
}

/// Adaptive Dormand-Prince integration of `d vec(rho)/dt = L vec(rho)`.
pub fn propagate_adaptive(
    l: &TaggedLiouvillian,
    rho0: &Operator,
    times: &[f64],
    opts: &OdeOptions,
) -> Result<EvolutionResult> {
    check_inputs(l, rho0, times)?;
    let total = l.total();
    let (vs, stats) = integrate(|_, v| total * v, 0.0, &vectorize(rho0), times, opts)?;
    let states = vs.iter().map(|v| unvectorize(v, l.dim())).collect();
    let notes = vec![format!(
        "{} accepted / {} rejected steps",
        stats.accepted, stats.rejected
    )];
    Ok(EvolutionResult::new(times, states, notes))
}

/// Evenly spaced grid `0, t_max/(n-1), ..., t_max`.
pub fn uniform_grid(t_max: f64, points: usize) -> Vec<f64> {
    assert!(points >= 2, "a grid needs at least two points");
    (0..points)
        .map(|k| t_max * k as f64 / (points - 1) as f64)
        .collect()
}
