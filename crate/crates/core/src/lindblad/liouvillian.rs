use crate::eigenops::BohrDecomposition;
use crate::error::{Error, Result};
use crate::lindblad::tensor::SpectralTensor;
use crate::operator::{
    c, ensure_square, identity, max_norm, sandwich_superop, unvectorize, vectorize, zeros,
    Operator, Spectrum, C64, I,
};

/// Tensor coefficients matched to one decomposition frequency.
#[derive(Debug, Clone)]
pub struct FrequencyTerm {
    /// Index into `BohrDecomposition::frequencies`.
    pub index: usize,
    pub omega: f64,
    pub gamma: Operator,
    pub shift: Operator,
    /// `A_alpha(w)` per channel.
    pub ops: Vec<Operator>,
}

impl FrequencyTerm {
    /// `sum_ab gamma_ab A_b X A_a^dagger`.
    pub fn jump(&self, x: &Operator) -> Operator {
        let n = self.ops.len();
        let mut out = Operator::zeros(x.nrows(), x.ncols());
        for b in 0..n {
            let left = &self.ops[b] * x;
            for a in 0..n {
                let g = self.gamma[(a, b)];
                if g != C64::new(0.0, 0.0) {
                    out += &left * self.ops[a].adjoint() * g;
                }
            }
        }
        out
    }

    /// `sum_ab m_ab A_a^dagger A_b`.
    pub fn quadratic(&self, m: &Operator) -> Operator {
        let n = self.ops.len();
        let dim = self.ops[0].nrows();
        let mut out = zeros(dim);
        for a in 0..n {
            let ad = self.ops[a].adjoint();
            for b in 0..n {
                let g = m[(a, b)];
                if g != C64::new(0.0, 0.0) {
                    out += &ad * &self.ops[b] * g;
                }
            }
        }
        out
    }
}

/// Tolerance used to match tensor frequencies to Bohr frequencies.
pub fn match_tol(d: &BohrDecomposition, omega: f64) -> f64 {
    d.freq_tol().max(1e-9 * omega.abs().max(1.0))
}

/// Pairs each decomposition frequency with its tensor entry; frequencies with
/// no entry are skipped.
pub fn frequency_terms(tensor: &SpectralTensor, d: &BohrDecomposition) -> Result<Vec<FrequencyTerm>> {
    if tensor.channel_count() != d.channel_count() {
        return Err(Error::ChannelMismatch {
            tensor: tensor.channel_count(),
            decomposition: d.channel_count(),
        });
    }
    let mut terms = Vec::new();
    for (index, &omega) in d.frequencies().iter().enumerate() {
        if let Some(entry) = tensor.lookup(omega, match_tol(d, omega)) {
            terms.push(FrequencyTerm {
                index,
                omega,
                gamma: entry.gamma.clone(),
                shift: entry.shift.clone(),
                ops: d.ops_at(index),
            });
        }
    }
    for e in tensor.entries() {
        if d.frequency_index(e.omega, match_tol(d, e.omega)).is_none()
            && (max_norm(&e.gamma) > 0.0 || max_norm(&e.shift) > 0.0)
        {
            log::warn!(
                "spectral entry at omega = {} matches no Bohr frequency of the couplings; ignored",
                e.omega
            );
        }
    }
    Ok(terms)
}

/// `H_LS = sum_w sum_ab S_ab(w) A_a(w)^dagger A_b(w)`.
pub fn build_lamb_shift(tensor: &SpectralTensor, d: &BohrDecomposition) -> Result<Operator> {
    let terms = frequency_terms(tensor, d)?;
    let h = terms
        .iter()
        .fold(zeros(d.dim()), |acc, t| acc + t.quadratic(&t.shift));
    // exact Hermitian symmetrization of roundoff
    Ok((&h + h.adjoint()) * c(0.5, 0.0))
}

/// Superoperator parts of the generator, tagged by physical role.
#[derive(Debug, Clone)]
pub struct LiouvillianParts {
    /// `-i[H_S, .]`
    pub hamiltonian: Operator,
    /// `-i[H_LS, .]`
    pub lamb_shift: Operator,
    /// Sandwich terms `gamma_ab A_b . A_a^dagger`.
    pub jump: Operator,
    /// Anticommutator terms `-1/2 {gamma_ab A_a^dagger A_b, .}`.
    pub drift: Operator,
}

/// Vectorized master-equation generator with its parts kept separate.
#[derive(Debug, Clone)]
pub struct TaggedLiouvillian {
    dim: usize,
    total: Operator,
    parts: LiouvillianParts,
    lamb_shift_operator: Operator,
}

impl TaggedLiouvillian {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn total(&self) -> &Operator {
        &self.total
    }

    pub fn parts(&self) -> &LiouvillianParts {
        &self.parts
    }

    pub fn lamb_shift_operator(&self) -> &Operator {
        &self.lamb_shift_operator
    }

    pub fn apply(&self, rho: &Operator) -> Operator {
        unvectorize(&(&self.total * vectorize(rho)), self.dim)
    }

    /// `max |total - sum of parts|`.
    pub fn parts_residual(&self) -> f64 {
        let p = &self.parts;
        let sum = &p.hamiltonian + &p.lamb_shift + &p.jump + &p.drift;
        crate::operator::max_abs_diff(&sum, &self.total)
    }

    /// `max_j |tr L(E_j)|` over matrix units, i.e. the largest entry of
    /// `vec(I)^dagger L`.
    pub fn trace_preservation_violation(&self) -> f64 {
        let d = self.dim;
        (0..d * d)
            .map(|col| {
                (0..d)
                    .map(|i| self.total[(i * d + i, col)])
                    .sum::<C64>()
                    .norm()
            })
            .fold(0.0, f64::max)
    }

    /// Largest entry of the generator (in the energy eigenbasis) that links a
    /// source pair `(m', n')` to a target pair other than itself or a pair
    /// lowered by a common positive frequency `e_m' - e_m = e_n' - e_n > 0`.
    pub fn selection_rule_violation(&self, spectrum: &Spectrum, freq_tol: f64) -> f64 {
        let d = self.dim;
        let mut v = Operator::zeros(d, d);
        let mut level = Vec::with_capacity(d);
        let mut col = 0;
        for (k, b) in spectrum.bases().iter().enumerate() {
            for j in 0..b.ncols() {
                v.set_column(col, &b.column(j));
                level.push(k);
                col += 1;
            }
        }
        let s = v.conjugate().kronecker(&v);
        let l_e = s.adjoint() * &self.total * &s;
        let e = spectrum.energies();
        let pair = |idx: usize| (level[idx % d], level[idx / d]);
        let mut worst = 0.0_f64;
        for src in 0..d * d {
            let (ms, ns) = pair(src);
            for dst in 0..d * d {
                let (mt, nt) = pair(dst);
                let allowed = if (mt, nt) == (ms, ns) {
                    true
                } else {
                    let dm = e[ms] - e[mt];
                    let dn = e[ns] - e[nt];
                    dm > freq_tol && (dm - dn).abs() <= 2.0 * freq_tol.max(1e-12 * dm)
                };
                if !allowed {
                    worst = worst.max(l_e[(dst, src)].norm());
                }
            }
        }
        worst
    }
}

/// Assembles `L(rho) = -i[H_S + H_LS, rho] + sum_w sum_ab gamma_ab(w)
/// (A_b rho A_a^dagger - 1/2 {A_a^dagger A_b, rho})`.
pub fn build_liouvillian(
    h_s: &Operator,
    tensor: &SpectralTensor,
    d: &BohrDecomposition,
) -> Result<TaggedLiouvillian> {
    let dim = ensure_square(h_s)?;
    if dim != d.dim() {
        return Err(Error::Dimension(format!(
            "Hamiltonian dimension {dim} differs from decomposition dimension {}",
            d.dim()
        )));
    }
    let terms = frequency_terms(tensor, d)?;
    let id = identity(dim);
    let commutator_superop =
        |h: &Operator| -> Operator { (sandwich_superop(h, &id) - sandwich_superop(&id, h)) * -I };

    let h_ls = build_lamb_shift(tensor, d)?;
    let hamiltonian = commutator_superop(h_s);
    let lamb_shift = commutator_superop(&h_ls);

    let n2 = dim * dim;
    let mut jump = Operator::zeros(n2, n2);
    let mut drift = Operator::zeros(n2, n2);
    for t in &terms {
        let n = t.ops.len();
        for a in 0..n {
            let ad = t.ops[a].adjoint();
            for b in 0..n {
                let g = t.gamma[(a, b)];
                if g == C64::new(0.0, 0.0) {
                    continue;
                }
                jump += sandwich_superop(&t.ops[b], &ad) * g;
            }
        }
        let k = t.quadratic(&t.gamma);
        drift -= (sandwich_superop(&k, &id) + sandwich_superop(&id, &k)) * c(0.5, 0.0);
    }
    let total = &hamiltonian + &lamb_shift + &jump + &drift;
    Ok(TaggedLiouvillian {
        dim,
        total,
        parts: LiouvillianParts {
            hamiltonian,
            lamb_shift,
            jump,
            drift,
        },
        lamb_shift_operator: h_ls,
    })
}
