use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::operator::{c, Operator};
use crate::oracle::EvolutionResult;
use crate::trajectory::run::TrajectoryRecord;

/// Ensemble mean of `|psi(t)><psi(t)|` with per-entry standard errors.
#[derive(Debug, Clone)]
pub struct EnsembleEstimate {
    pub times: Vec<f64>,
    pub samples: usize,
    pub mean: Vec<Operator>,
    /// `sqrt((var Re + var Im) / M)` per entry, from sample variances.
    pub std_error: Vec<DMatrix<f64>>,
}

impl EnsembleEstimate {
    /// Largest ratio `|rho_hat - rho| / max(sigma_factor * sigma, floor)` over
    /// times and entries; at most 1 means every entry lies within its band.
    pub fn band_ratio(&self, reference: &EvolutionResult, sigma_factor: f64, floor: f64) -> Result<f64> {
        if reference.states.len() != self.mean.len() {
            return Err(Error::Dimension("time grids differ".into()));
        }
        let mut worst = 0.0_f64;
        for ((m, s), r) in self.mean.iter().zip(&self.std_error).zip(&reference.states) {
            for i in 0..m.nrows() {
                for j in 0..m.ncols() {
                    let band = (sigma_factor * s[(i, j)]).max(floor);
                    worst = worst.max((m[(i, j)] - r[(i, j)]).norm() / band);
                }
            }
        }
        Ok(worst)
    }

    /// Max entrywise distance to a reference evolution.
    pub fn max_distance(&self, reference: &EvolutionResult) -> Result<f64> {
        if reference.states.len() != self.mean.len() {
            return Err(Error::Dimension("time grids differ".into()));
        }
        Ok(self
            .mean
            .iter()
            .zip(&reference.states)
            .map(|(a, b)| crate::operator::max_abs_diff(a, b))
            .fold(0.0, f64::max))
    }

    /// Largest standard error over all times and entries.
    pub fn max_std_error(&self) -> f64 {
        self.std_error.iter().map(|s| s.max()).fold(0.0, f64::max)
    }
}

/// Averages records in index order.
pub fn ensemble_average(records: &[TrajectoryRecord], times: &[f64]) -> Result<EnsembleEstimate> {
    if records.len() < 2 {
        return Err(Error::InvalidArgument("an ensemble needs at least two records".into()));
    }
    if records.iter().any(|r| r.states.len() != times.len()) {
        return Err(Error::Dimension("records do not share the output grid".into()));
    }
    let dim = records[0].states[0].len();
    if records.iter().any(|r| r.states.iter().any(|s| s.len() != dim)) {
        return Err(Error::Dimension("records differ in dimension".into()));
    }
    let m = records.len() as f64;
    let mut mean = Vec::with_capacity(times.len());
    let mut std_error = Vec::with_capacity(times.len());
    for k in 0..times.len() {
        let mut sum = Operator::zeros(dim, dim);
        for r in records {
            let psi = &r.states[k];
            sum += psi * psi.adjoint();
        }
        let avg = sum * c(1.0 / m, 0.0);
        let avg = (&avg + avg.adjoint()) * c(0.5, 0.0);
        // second pass: squared deviations from the mean
        let mut dev = DMatrix::<f64>::zeros(dim, dim);
        for r in records {
            let psi = &r.states[k];
            for j in 0..dim {
                for i in 0..dim {
                    dev[(i, j)] += (psi[i] * psi[j].conj() - avg[(i, j)]).norm_sqr();
                }
            }
        }
        let se = dev.map(|v| (v / (m - 1.0) / m).sqrt());
        mean.push(avg);
        std_error.push(se);
    }
    Ok(EnsembleEstimate {
        times: times.to_vec(),
        samples: records.len(),
        mean,
        std_error,
    })
}

/// Empirical jump-count law at one time.
#[derive(Debug, Clone)]
pub struct JumpHistogram {
    pub time: f64,
    pub samples: usize,
    /// `probabilities[k]`: fraction of records with exactly `k` jumps by `time`.
    pub probabilities: Vec<f64>,
}

impl JumpHistogram {
    /// Binomial standard error `sqrt(p (1 - p) / M)` of bin `k`.
    pub fn std_error(&self, k: usize) -> f64 {
        let p = self.probabilities.get(k).copied().unwrap_or(0.0);
        (p * (1.0 - p) / self.samples as f64).sqrt()
    }

    /// Binomial standard error at a reference probability `p`.
    pub fn std_error_at(&self, p: f64) -> f64 {
        (p * (1.0 - p) / self.samples as f64).sqrt()
    }
}

pub fn jump_count_histogram(records: &[TrajectoryRecord], time: f64) -> JumpHistogram {
    let counts: Vec<usize> = records.iter().map(|r| r.jumps_until(time)).collect();
    let max = counts.iter().copied().max().unwrap_or(0);
    let mut probabilities = vec![0.0; max + 1];
    for k in counts {
        probabilities[k] += 1.0;
    }
    let m = records.len().max(1) as f64;
    for p in &mut probabilities {
        *p /= m;
    }
    JumpHistogram {
        time,
        samples: records.len(),
        probabilities,
    }
}
