use crate::eigenops::BohrDecomposition;
use crate::error::{Error, Result};
use crate::lindblad::{build_lamb_shift, frequency_terms, FrequencyTerm, SpectralTensor};
use crate::operator::{c, ensure_square, matrix_exponential, min_eigenvalue, zeros, Operator, I};

const H_PRIME_PSD_TOL: f64 = 1e-10;

/// Non-Hermitian generator `B = H_0 - (i/2) H'` of the deterministic
/// (no-jump) evolution, with `H' = sum_{w>0} sum_ab gamma_ab(w) A_a(w)^dagger A_b(w)`.
#[derive(Debug, Clone)]
pub struct EffectiveGenerator {
    h0: Operator,
    h_prime: Operator,
    b: Operator,
    terms: Vec<FrequencyTerm>,
}

impl EffectiveGenerator {
    pub fn h0(&self) -> &Operator {
        &self.h0
    }

    pub fn h_prime(&self) -> &Operator {
        &self.h_prime
    }

    pub fn b(&self) -> &Operator {
        &self.b
    }

    pub fn dim(&self) -> usize {
        self.b.nrows()
    }

    /// Energy-lowering frequency terms feeding the cascade.
    pub fn terms(&self) -> &[FrequencyTerm] {
        &self.terms
    }

    /// `U(t) = exp(-i B t)`.
    pub fn propagator(&self, t: f64) -> Result<Operator> {
        matrix_exponential(&(&self.b * -I), t)
    }

    /// `U(t) X U(t)^dagger`: the jump-free part of the evolution.
    pub fn deterministic(&self, x: &Operator, t: f64) -> Result<Operator> {
        let u = self.propagator(t)?;
        Ok(&u * x * u.adjoint())
    }

    /// Sandwich (jump) terms `sum_{w>0} sum_ab gamma_ab A_b X A_a^dagger`.
    pub fn jump(&self, x: &Operator) -> Operator {
        self.terms
            .iter()
            .fold(Operator::zeros(x.nrows(), x.ncols()), |acc, t| acc + t.jump(x))
    }
}

/// `H_0 = H_S + H_LS`, or `H_S` alone when `include_lamb_shift` is false.
pub fn free_hamiltonian(
    h_s: &Operator,
    tensor: &SpectralTensor,
    d: &BohrDecomposition,
    include_lamb_shift: bool,
) -> Result<Operator> {
    if include_lamb_shift {
        Ok(h_s + build_lamb_shift(tensor, d)?)
    } else {
        Ok(h_s.clone())
    }
}

/// Builds `B` for a zero-temperature tensor.
pub fn effective_generator(
    h0: &Operator,
    tensor: &SpectralTensor,
    d: &BohrDecomposition,
) -> Result<EffectiveGenerator> {
    let dim = ensure_square(h0)?;
    if dim != d.dim() {
        return Err(Error::Dimension(format!(
            "H_0 dimension {dim} differs from decomposition dimension {}",
            d.dim()
        )));
    }
    if !tensor.is_zero_temperature() {
        return Err(Error::NotZeroTemperature);
    }
    let zero_freq = tensor.zero_frequency_dissipation(d.freq_tol());
    if zero_freq > 0.0 {
        return Err(Error::ZeroFrequencyDissipation {
            magnitude: zero_freq,
        });
    }
    let terms: Vec<FrequencyTerm> = frequency_terms(tensor, d)?
        .into_iter()
        .filter(|t| t.omega > d.freq_tol())
        .collect();
    let raw = terms
        .iter()
        .fold(zeros(dim), |acc, t| acc + t.quadratic(&t.gamma));
    let h_prime = (&raw + raw.adjoint()) * c(0.5, 0.0);
    let min_ev = min_eigenvalue(&h_prime);
    if min_ev < -H_PRIME_PSD_TOL {
        return Err(Error::NotPositive {
            omega: f64::NAN,
            min_eigenvalue: min_ev,
        });
    }
    let b = h0 - &h_prime * c(0.0, 0.5);
    Ok(EffectiveGenerator {
        h0: h0.clone(),
        h_prime,
        b,
        terms,
    })
}
