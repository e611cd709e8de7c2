use nalgebra::SymmetricEigen;

use crate::eigenops::BohrDecomposition;
use crate::error::{Error, Result};
use crate::lindblad::{frequency_terms, SpectralTensor};
use crate::operator::{hermitian_part, Operator, StateVector, C64};

/// Negative rates down to `-RATE_CLIP_TOL` are treated as roundoff and set to zero.
pub const RATE_CLIP_TOL: f64 = 1e-12;

/// `L_k(w) = sum_b conj(U_bk) A_b(w)` with rate `r_k(w)`, where
/// `gamma(w) = U diag(r) U^dagger`.
#[derive(Debug, Clone)]
pub struct JumpChannel {
    pub omega: f64,
    /// Index into the decomposition's frequency list.
    pub freq_index: usize,
    pub rate: f64,
    /// Column of `U`; largest component made real and positive.
    pub mixing: StateVector,
    pub op: Operator,
}

#[derive(Debug, Clone)]
pub struct JumpChannelSet {
    dim: usize,
    channels: Vec<JumpChannel>,
}

impl JumpChannelSet {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Channels grouped by ascending frequency, rates descending within a frequency.
    pub fn channels(&self) -> &[JumpChannel] {
        &self.channels
    }

    pub fn len(&self) -> usize {
        self.channels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.channels.is_empty()
    }

    /// Channels with a rate above `tol`.
    pub fn active(&self, tol: f64) -> impl Iterator<Item = &JumpChannel> {
        self.channels.iter().filter(move |c| c.rate > tol)
    }

    /// `sum_k r_k L_k rho L_k^dagger`.
    pub fn apply(&self, rho: &Operator) -> Operator {
        self.channels
            .iter()
            .filter(|c| c.rate > 0.0)
            .fold(Operator::zeros(rho.nrows(), rho.ncols()), |acc, c| {
                acc + &c.op * rho * c.op.adjoint() * C64::new(c.rate, 0.0)
            })
    }

    /// `sum_k r_k L_k^dagger L_k`, which equals `H'`.
    pub fn decay_operator(&self) -> Operator {
        self.channels
            .iter()
            .filter(|c| c.rate > 0.0)
            .fold(Operator::zeros(self.dim, self.dim), |acc, c| {
                acc + c.op.adjoint() * &c.op * C64::new(c.rate, 0.0)
            })
    }
}

fn normalize_phase(v: &mut StateVector) {
    let mut best = 0;
    for (k, z) in v.iter().enumerate() {
        if z.norm() > v[best].norm() * (1.0 + 1e-12) {
            best = k;
        }
    }
    let z = v[best];
    if z.norm() > 0.0 {
        let phase = z.conj() / z.norm();
        *v *= phase;
    }
}

fn lexicographic(a: &StateVector, b: &StateVector) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b.iter()) {
        let o = x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im));
        if o.is_ne() {
            return o;
        }
    }
    std::cmp::Ordering::Equal
}

/// Diagonalizes `gamma(w)` at every positive frequency of a zero-temperature tensor.
pub fn diagonalize_channels(tensor: &SpectralTensor, d: &BohrDecomposition) -> Result<JumpChannelSet> {
    if !tensor.is_zero_temperature() {
        return Err(Error::NotZeroTemperature);
    }
    let zero_freq = tensor.zero_frequency_dissipation(d.freq_tol());
    if zero_freq > 0.0 {
        return Err(Error::ZeroFrequencyDissipation {
            magnitude: zero_freq,
        });
    }
    let mut channels = Vec::new();
    for term in frequency_terms(tensor, d)?
        .into_iter()
        .filter(|t| t.omega > d.freq_tol())
    {
        let eig = SymmetricEigen::new(hermitian_part(&term.gamma));
        let mut found: Vec<(f64, StateVector)> = Vec::with_capacity(term.ops.len());
        for k in 0..eig.eigenvalues.len() {
            let mut rate = eig.eigenvalues[k];
            if rate < -RATE_CLIP_TOL {
                return Err(Error::NotPositive {
                    omega: term.omega,
                    min_eigenvalue: rate,
                });
            }
            rate = rate.max(0.0);
            let mut u: StateVector = eig.eigenvectors.column(k).into_owned();
            normalize_phase(&mut u);
            found.push((rate, u));
        }
        found.sort_by(|a, b| b.0.total_cmp(&a.0));
        // degenerate rates: deterministic order by eigenvector components
        let tie = 1e-12 * found.first().map(|f| f.0).unwrap_or(0.0).max(1.0);
        let mut start = 0;
        while start < found.len() {
            let mut end = start + 1;
            while end < found.len() && found[end - 1].0 - found[end].0 <= tie {
                end += 1;
            }
            found[start..end].sort_by(|a, b| lexicographic(&a.1, &b.1));
            start = end;
        }
        for (rate, u) in found {
            let op = term
                .ops
                .iter()
                .zip(u.iter())
                .fold(Operator::zeros(d.dim(), d.dim()), |acc, (a, ub)| acc + a * ub.conj());
            channels.push(JumpChannel {
                omega: term.omega,
                freq_index: term.index,
                rate,
                mixing: u,
                op,
            });
        }
    }
    Ok(JumpChannelSet {
        dim: d.dim(),
        channels,
    })
}
