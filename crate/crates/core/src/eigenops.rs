//! Eigenoperator (Bohr-frequency) decomposition of system coupling operators.
//!
//! For a coupling `A` and free Hamiltonian `H_S = sum_e e P(e)`,
//! `A(w) = sum_{e' - e = w} P(e) A P(e')`. Components with `w > 0` lower the
//! energy by `w`; `A(-w) = A(w)^dagger` for Hermitian `A`.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::operator::{
    c, ensure_hermitian, ensure_square, max_abs_diff, max_norm, zeros, Operator, Spectrum,
    HERMITIAN_INPUT_TOL,
};

/// Default frequency clustering tolerance: `1e-8` times the spectral range.
pub fn default_freq_tol(spectrum: &Spectrum) -> f64 {
    1e-8 * spectrum.range()
}

/// Bohr frequencies of a spectrum with the level transitions behind each one.
#[derive(Debug, Clone)]
pub struct BohrFrequencies {
    values: Vec<f64>,
    /// `(from, to)` level indices with `e_from - e_to` in the cluster.
    transitions: Vec<Vec<(usize, usize)>>,
}

impl BohrFrequencies {
    pub fn new(spectrum: &Spectrum, freq_tol: f64) -> Self {
        let e = spectrum.energies();
        let n = e.len();
        // non-negative differences e_from - e_to, from >= to
        let mut diffs: Vec<(f64, usize, usize)> = Vec::with_capacity(n * (n + 1) / 2);
        for from in 0..n {
            for to in 0..=from {
                diffs.push((e[from] - e[to], from, to));
            }
        }
        diffs.sort_by(|a, b| a.0.total_cmp(&b.0));

        let mut clusters: Vec<Vec<(f64, usize, usize)>> = Vec::new();
        for d in diffs {
            match clusters.last_mut() {
                Some(cl) if d.0 - cl.last().unwrap().0 <= freq_tol => cl.push(d),
                _ => clusters.push(vec![d]),
            }
        }

        let mut positive: Vec<(f64, Vec<(usize, usize)>)> = Vec::new();
        let mut zero: Vec<(usize, usize)> = Vec::new();
        for cl in clusters {
            let holds_zero = cl.iter().any(|&(_, f, t)| f == t);
            if holds_zero {
                for &(_, f, t) in &cl {
                    zero.push((f, t));
                    if f != t {
                        zero.push((t, f));
                    }
                }
            } else {
                let mean = cl.iter().map(|d| d.0).sum::<f64>() / cl.len() as f64;
                positive.push((mean, cl.iter().map(|&(_, f, t)| (f, t)).collect()));
            }
        }

        let mut values = Vec::with_capacity(2 * positive.len() + 1);
        let mut transitions = Vec::with_capacity(2 * positive.len() + 1);
        for (w, tr) in positive.iter().rev() {
            values.push(-w);
            transitions.push(tr.iter().map(|&(f, t)| (t, f)).collect());
        }
        values.push(0.0);
        zero.sort_unstable();
        transitions.push(zero);
        for (w, tr) in positive {
            values.push(w);
            transitions.push(tr);
        }
        Self {
            values,
            transitions,
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn transitions(&self, index: usize) -> &[(usize, usize)] {
        &self.transitions[index]
    }

    /// `sum over transitions of P(to) A P(from)` for frequency `index`.
    fn component(&self, a: &Operator, spectrum: &Spectrum, index: usize) -> Operator {
        let p = spectrum.projectors();
        self.transitions[index]
            .iter()
            .fold(zeros(a.nrows()), |acc, &(from, to)| acc + &p[to] * a * &p[from])
    }
}

/// Eigenoperator components of a single Hermitian coupling, as `(w, A(w))`
/// pairs in ascending `w`. Vanishing components are dropped.
pub fn decompose(a: &Operator, spectrum: &Spectrum, freq_tol: f64) -> Result<Vec<(f64, Operator)>> {
    check_coupling(a, spectrum)?;
    let freqs = BohrFrequencies::new(spectrum, freq_tol);
    let drop_below = 1e-13 * max_norm(a).max(1.0);
    Ok((0..freqs.values.len())
        .map(|k| (freqs.values[k], freqs.component(a, spectrum, k)))
        .filter(|(_, op)| max_norm(op) >= drop_below)
        .collect())
}

fn check_coupling(a: &Operator, spectrum: &Spectrum) -> Result<()> {
    let n = ensure_square(a)?;
    if n != spectrum.dim() {
        return Err(Error::Dimension(format!(
            "coupling has dimension {n}, Hamiltonian has {}",
            spectrum.dim()
        )));
    }
    ensure_hermitian(a, HERMITIAN_INPUT_TOL)
}

/// Decomposition of every coupling channel `A_alpha` into `A_alpha(w)`.
#[derive(Debug, Clone)]
pub struct BohrDecomposition {
    spectrum: Spectrum,
    couplings: Vec<Operator>,
    frequencies: Vec<f64>,
    transitions: Vec<Vec<(usize, usize)>>,
    ops: BTreeMap<(usize, usize), Operator>,
    freq_tol: f64,
}

impl BohrDecomposition {
    pub fn new(spectrum: Spectrum, couplings: Vec<Operator>, freq_tol: f64) -> Result<Self> {
        if couplings.is_empty() {
            return Err(Error::InvalidArgument("at least one coupling channel is required".into()));
        }
        for a in &couplings {
            check_coupling(a, &spectrum)?;
        }
        let all = BohrFrequencies::new(&spectrum, freq_tol);
        let mut ops = BTreeMap::new();
        let mut frequencies = Vec::new();
        let mut transitions = Vec::new();
        for k in 0..all.values.len() {
            let mut present = false;
            for (alpha, a) in couplings.iter().enumerate() {
                let op = all.component(a, &spectrum, k);
                if max_norm(&op) >= 1e-13 * max_norm(a).max(1.0) {
                    ops.insert((alpha, frequencies.len()), op);
                    present = true;
                }
            }
            if present {
                frequencies.push(all.values[k]);
                transitions.push(all.transitions[k].clone());
            }
        }
        Ok(Self {
            spectrum,
            couplings,
            frequencies,
            transitions,
            ops,
            freq_tol,
        })
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    pub fn couplings(&self) -> &[Operator] {
        &self.couplings
    }

    pub fn channel_count(&self) -> usize {
        self.couplings.len()
    }

    pub fn dim(&self) -> usize {
        self.spectrum.dim()
    }

    /// Frequencies carrying at least one nonzero component, ascending.
    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    pub fn freq_tol(&self) -> f64 {
        self.freq_tol
    }

    /// Level transitions `(from, to)` grouped under frequency `index`.
    pub fn transitions(&self, index: usize) -> &[(usize, usize)] {
        &self.transitions[index]
    }

    /// `A_alpha(w_index)`, or `None` when that component vanishes.
    pub fn op(&self, channel: usize, index: usize) -> Option<&Operator> {
        self.ops.get(&(channel, index))
    }

    /// Index of the frequency within `tol` of `omega`.
    pub fn frequency_index(&self, omega: f64, tol: f64) -> Option<usize> {
        self.frequencies.iter().position(|&w| (w - omega).abs() <= tol)
    }

    /// Indices of the strictly positive (energy-lowering) frequencies.
    pub fn positive_indices(&self) -> impl Iterator<Item = usize> + '_ {
        let tol = self.freq_tol;
        (0..self.frequencies.len()).filter(move |&k| self.frequencies[k] > tol)
    }

    /// `A_alpha(w)` for every channel, zero matrices where absent.
    pub fn ops_at(&self, index: usize) -> Vec<Operator> {
        (0..self.channel_count())
            .map(|a| self.op(a, index).cloned().unwrap_or_else(|| zeros(self.dim())))
            .collect()
    }

    /// Maximum violations of the eigenoperator algebra.
    pub fn verify_algebra(&self) -> AlgebraReport {
        let h = self.spectrum.reconstruct();
        let all = BohrFrequencies::new(&self.spectrum, self.freq_tol);
        let mut report = AlgebraReport::default();

        for (alpha, a) in self.couplings.iter().enumerate() {
            let scale = max_norm(a).max(f64::MIN_POSITIVE);
            let mut sum = zeros(self.dim());
            for (k, &w) in self.frequencies.iter().enumerate() {
                let op = self.op(alpha, k).cloned().unwrap_or_else(|| zeros(self.dim()));

                // construction against a fresh projector sandwich
                let full_index = all
                    .values
                    .iter()
                    .position(|&v| (v - w).abs() <= self.freq_tol)
                    .expect("frequency missing from its own spectrum");
                let fresh = all.component(a, &self.spectrum, full_index);
                report.construction = report.construction.max(max_abs_diff(&op, &fresh));

                let comm = &h * &op - &op * &h + &op * c(w, 0.0);
                report.commutator = report.commutator.max(max_norm(&comm) / scale);

                let mirror = self
                    .frequency_index(-w, self.freq_tol)
                    .and_then(|m| self.op(alpha, m).cloned())
                    .unwrap_or_else(|| zeros(self.dim()));
                report.adjoint = report.adjoint.max(max_abs_diff(&op.adjoint(), &mirror));

                sum += op;
            }
            report.completeness = report.completeness.max(max_abs_diff(&sum, a));
        }
        report
    }
}

/// Maximum entrywise violations of the eigenoperator identities.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AlgebraReport {
    /// `A(w)` against `sum P(e) A P(e')`.
    pub construction: f64,
    /// `[H_S, A(w)] + w A(w)`, relative to `max|A|`.
    pub commutator: f64,
    /// `A(w)^dagger - A(-w)`.
    pub adjoint: f64,
    /// `sum_w A(w) - A`.
    pub completeness: f64,
}

impl AlgebraReport {
    pub fn max(&self) -> f64 {
        self.construction
            .max(self.commutator)
            .max(self.adjoint)
            .max(self.completeness)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::tests::{sigma_x, sigma_z_up};
    use crate::operator::{
        basis_state, default_cluster_tol, hermitian_eigensystem, matrix_exponential, I, ONE,
        ZERO,
    };
    use nalgebra::DVector;
    use proptest::prelude::*;

    fn qubit_spectrum() -> Spectrum {
        let h = Operator::from_diagonal(&DVector::from_vec(vec![ZERO, ONE]));
        hermitian_eigensystem(&h, 1e-9).unwrap()
    }

    fn sigma_minus() -> Operator {
        basis_state(2, 0) * basis_state(2, 1).adjoint()
    }

    fn ladder(n: usize) -> Operator {
        let mut a = zeros(n);
        for k in 1..n {
            a[(k - 1, k)] = c((k as f64).sqrt(), 0.0);
        }
        a
    }

    #[test]
    fn qubit_sigma_x_splits_into_ladder() {
        let s = qubit_spectrum();
        let parts = decompose(&sigma_x(), &s, 1e-8).unwrap();
        assert_eq!(parts.len(), 2);
        assert_eq!(parts[0].0, -1.0);
        assert_eq!(parts[1].0, 1.0);
        assert!(max_abs_diff(&parts[1].1, &sigma_minus()) < 1e-15);
        assert!(max_abs_diff(&parts[0].1, &sigma_minus().adjoint()) < 1e-15);
    }

    #[test]
    fn commuting_coupling_is_zero_frequency() {
        let s = qubit_spectrum();
        let parts = decompose(&sigma_z_up(), &s, 1e-8).unwrap();
        assert_eq!(parts.len(), 1);
        assert_eq!(parts[0].0, 0.0);
        assert!(max_abs_diff(&parts[0].1, &sigma_z_up()) < 1e-15);
    }

    #[test]
    fn oscillator_position_gives_ladder_operators() {
        let n = 4;
        let h = Operator::from_diagonal(&DVector::from_fn(n, |k, _| c(k as f64, 0.0)));
        let s = hermitian_eigensystem(&h, 1e-9).unwrap();
        let a = ladder(n);
        let x = &a + a.adjoint();
        let parts = decompose(&x, &s, 1e-8).unwrap();
        assert_eq!(parts.len(), 2);
        assert!((parts[1].0 - 1.0).abs() < 1e-14);
        assert!(max_abs_diff(&parts[1].1, &a) < 1e-15);
        assert!(max_abs_diff(&parts[0].1, &a.adjoint()) < 1e-15);
    }

    #[test]
    fn rejects_non_hermitian_coupling() {
        let s = qubit_spectrum();
        assert!(matches!(
            decompose(&sigma_minus(), &s, 1e-8),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn qubit_algebra_is_clean() {
        let d = BohrDecomposition::new(qubit_spectrum(), vec![sigma_x()], 1e-8).unwrap();
        let r = d.verify_algebra();
        assert!(r.max() < 1e-14, "{r:?}");
    }

    #[test]
    fn corrupted_component_is_reported() {
        let mut d = BohrDecomposition::new(qubit_spectrum(), vec![sigma_x()], 1e-8).unwrap();
        let k = d.frequency_index(1.0, 1e-9).unwrap();
        let op = d.ops.get_mut(&(0, k)).unwrap();
        *op *= c(1.01, 0.0);
        let r = d.verify_algebra();
        assert!((r.completeness - 0.01).abs() < 1e-12, "{r:?}");
        assert!((r.construction - 0.01).abs() < 1e-12);
    }

    fn hermitian_from(values: &[(f64, f64)], n: usize) -> Operator {
        let m = Operator::from_fn(n, n, |i, j| {
            let (re, im) = values[i * n + j];
            c(re, im)
        });
        &m + m.adjoint()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn random_five_level_algebra(
            hv in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 25),
            av in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 25),
            t in 0.0..10.0f64,
        ) {
            let h = hermitian_from(&hv, 5);
            let a = hermitian_from(&av, 5);
            let s = hermitian_eigensystem(&h, default_cluster_tol(&h)).unwrap();
            let tol = default_freq_tol(&s);
            let d = BohrDecomposition::new(s, vec![a], tol).unwrap();
            let r = d.verify_algebra();
            prop_assert!(r.max() < 1e-10, "{:?}", r);

            // symmetric frequency set
            for &w in d.frequencies() {
                prop_assert!(d.frequency_index(-w, tol).is_some());
            }

            // interaction-picture phase law
            let u = matrix_exponential(&(&h * I), t).unwrap();
            let ud = matrix_exponential(&(&h * -I), t).unwrap();
            for (k, &w) in d.frequencies().iter().enumerate() {
                let op = d.op(0, k).unwrap();
                let lhs = &u * op * &ud;
                let rhs = op * (-I * w * t).exp();
                prop_assert!(max_abs_diff(&lhs, &rhs) < 1e-9);
            }
        }
    }
}
