//! Dense complex operator algebra shared by the rest of the crate.
//!
//! Operators are plain `nalgebra` matrices; vectorization is column-stacking,
//! so `vec(A X B) = (B^T ⊗ A) vec(X)`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
/// Dense square matrix acting on a Hilbert space (or on vectorized operators).
pub type Operator = DMatrix<C64>;
pub type StateVector = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Relative Hermiticity tolerance accepted on input operators.
pub const HERMITIAN_INPUT_TOL: f64 = 1e-10;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(dim: usize) -> Operator {
    Operator::identity(dim, dim)
}

pub fn zeros(dim: usize) -> Operator {
    Operator::zeros(dim, dim)
}

pub fn dagger(m: &Operator) -> Operator {
    m.adjoint()
}

/// Largest entry modulus.
pub fn max_norm(m: &Operator) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_diff(a: &Operator, b: &Operator) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch in max_abs_diff");
    a.iter()
        .zip(b.iter())
        .fold(0.0_f64, |acc, (x, y)| acc.max((x - y).norm()))
}

/// max |M - M^dagger|.
pub fn hermiticity_deviation(m: &Operator) -> f64 {
    let n = m.nrows();
    let mut dev = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

pub fn ensure_square(m: &Operator) -> Result<usize> {
    if m.nrows() != m.ncols() || m.nrows() == 0 {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(m.nrows())
}

pub fn ensure_finite(m: &Operator, what: &str) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what.to_string()))
    }
}

/// Checks `max|M - M^dagger| <= rel_tol * max|M|`.
pub fn ensure_hermitian(m: &Operator, rel_tol: f64) -> Result<()> {
    ensure_square(m)?;
    let deviation = hermiticity_deviation(m);
    let allowed = rel_tol * max_norm(m);
    if deviation > allowed {
        return Err(Error::NotHermitian { deviation, allowed });
    }
    Ok(())
}

pub fn hermitian_part(m: &Operator) -> Operator {
    (m + m.adjoint()) * c(0.5, 0.0)
}

pub fn commutator(a: &Operator, b: &Operator) -> Operator {
    a * b - b * a
}

pub fn anticommutator(a: &Operator, b: &Operator) -> Operator {
    a * b + b * a
}

pub fn trace(m: &Operator) -> C64 {
    m.diagonal().iter().sum()
}

pub fn kron(a: &Operator, b: &Operator) -> Operator {
    a.kronecker(b)
}

/// Tensor product of a list of factors, leftmost factor most significant.
pub fn kron_all(factors: &[Operator]) -> Operator {
    factors
        .iter()
        .skip(1)
        .fold(factors[0].clone(), |acc, f| acc.kronecker(f))
}

/// Embeds a single-site operator at position `site` of a multipartite space.
pub fn embed(op: &Operator, site: usize, dims: &[usize]) -> Operator {
    let factors: Vec<Operator> = dims
        .iter()
        .enumerate()
        .map(|(k, &d)| if k == site { op.clone() } else { identity(d) })
        .collect();
    kron_all(&factors)
}

pub fn projector(psi: &StateVector) -> Operator {
    psi * psi.adjoint()
}

pub fn basis_state(dim: usize, index: usize) -> StateVector {
    let mut v = StateVector::zeros(dim);
    v[index] = ONE;
    v
}

pub fn vectorize(m: &Operator) -> StateVector {
    StateVector::from_column_slice(m.as_slice())
}

pub fn unvectorize(v: &StateVector, dim: usize) -> Operator {
    Operator::from_column_slice(dim, dim, v.as_slice())
}

/// Superoperator of `X -> A X B`.
pub fn sandwich_superop(a: &Operator, b: &Operator) -> Operator {
    b.transpose().kronecker(a)
}

/// Smallest eigenvalue of the Hermitian part of `m`.
pub fn min_eigenvalue(m: &Operator) -> f64 {
    let eig = SymmetricEigen::new(hermitian_part(m));
    eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min)
}

pub fn hermitian_eigenvalues(m: &Operator) -> Vec<f64> {
    let mut ev: Vec<f64> = SymmetricEigen::new(hermitian_part(m))
        .eigenvalues
        .iter()
        .cloned()
        .collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Checks unit trace, Hermiticity and positivity of a density matrix.
pub fn validate_density_matrix(rho: &Operator, tol: f64) -> Result<()> {
    ensure_square(rho)?;
    ensure_finite(rho, "density matrix")?;
    let tr = trace(rho);
    if (tr - ONE).norm() > tol {
        return Err(Error::InvalidState(format!("trace is {tr}, expected 1")));
    }
    let herm = hermiticity_deviation(rho);
    if herm > tol {
        return Err(Error::InvalidState(format!(
            "Hermiticity deviation {herm:.3e}"
        )));
    }
    let min_ev = min_eigenvalue(rho);
    if min_ev < -tol {
        return Err(Error::InvalidState(format!(
            "negative eigenvalue {min_ev:.3e}"
        )));
    }
    Ok(())
}

/// Eigen-decomposition of a Hermitian operator with degenerate levels merged.
#[derive(Debug, Clone)]
pub struct Spectrum {
    energies: Vec<f64>,
    projectors: Vec<Operator>,
    bases: Vec<Operator>,
    cluster_tol: f64,
}

impl Spectrum {
    /// Distinct energies, ascending.
    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn projectors(&self) -> &[Operator] {
        &self.projectors
    }

    /// Orthonormal eigenvectors of each level, stored as columns (`dim x multiplicity`).
    pub fn bases(&self) -> &[Operator] {
        &self.bases
    }

    pub fn multiplicities(&self) -> Vec<usize> {
        self.bases.iter().map(|b| b.ncols()).collect()
    }

    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.projectors[0].nrows()
    }

    pub fn cluster_tol(&self) -> f64 {
        self.cluster_tol
    }

    pub fn range(&self) -> f64 {
        self.energies[self.energies.len() - 1] - self.energies[0]
    }

    /// `sum_e e * P(e)`.
    pub fn reconstruct(&self) -> Operator {
        self.energies
            .iter()
            .zip(&self.projectors)
            .fold(zeros(self.dim()), |acc, (&e, p)| acc + p * c(e, 0.0))
    }

    /// Index of the level within `tol` of `energy`.
    pub fn level_of(&self, energy: f64, tol: f64) -> Option<usize> {
        self.energies
            .iter()
            .position(|&e| (e - energy).abs() <= tol)
    }
}

/// Default clustering tolerance: `1e-9` times the spectral range.
pub fn default_cluster_tol(m: &Operator) -> f64 {
    let ev = hermitian_eigenvalues(m);
    let range = ev[ev.len() - 1] - ev[0];
    1e-9 * range.max(f64::MIN_POSITIVE)
}

/// Hermitian eigensystem with eigenvalues closer than `cluster_tol` merged
/// (single linkage on the sorted list).
pub fn hermitian_eigensystem(m: &Operator, cluster_tol: f64) -> Result<Spectrum> {
    let dim = ensure_square(m)?;
    ensure_finite(m, "Hamiltonian")?;
    if !(cluster_tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "cluster tolerance must be positive, got {cluster_tol}"
        )));
    }
    ensure_hermitian(m, HERMITIAN_INPUT_TOL)?;

    let eig = SymmetricEigen::new(hermitian_part(m));
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let mut groups: Vec<Vec<usize>> = Vec::new();
    for &k in &order {
        match groups.last_mut() {
            Some(g) if eig.eigenvalues[k] - eig.eigenvalues[*g.last().unwrap()] <= cluster_tol => {
                g.push(k)
            }
            _ => groups.push(vec![k]),
        }
    }

    let mut energies = Vec::with_capacity(groups.len());
    let mut projectors = Vec::with_capacity(groups.len());
    let mut bases = Vec::with_capacity(groups.len());
    for g in groups {
        let mean = g.iter().map(|&k| eig.eigenvalues[k]).sum::<f64>() / g.len() as f64;
        let mut basis = Operator::zeros(dim, g.len());
        for (col, &k) in g.iter().enumerate() {
            basis.set_column(col, &eig.eigenvectors.column(k));
        }
        projectors.push(&basis * basis.adjoint());
        bases.push(basis);
        energies.push(mean);
    }
    Ok(Spectrum {
        energies,
        projectors,
        bases,
        cluster_tol,
    })
}

/// `exp(M t)`.
pub fn matrix_exponential(m: &Operator, t: f64) -> Result<Operator> {
    matrix_exponential_reported(m, t).map(|(e, _)| e)
}

/// `exp(M t)`; the flag reports whether the fallback path (explicit repeated
/// squaring from a reduced step) was needed.
pub fn matrix_exponential_reported(m: &Operator, t: f64) -> Result<(Operator, bool)> {
    ensure_square(m)?;
    ensure_finite(m, "exponent")?;
    if !t.is_finite() {
        return Err(Error::InvalidArgument(format!("non-finite time {t}")));
    }
    let scaled = m * c(t, 0.0);
    let e = scaled.clone().exp();
    if e.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        return Ok((e, false));
    }
    let norm1 = (0..scaled.ncols())
        .map(|j| scaled.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let squarings = (norm1.log2().ceil().max(0.0) as u32) + 4;
    let mut e = (scaled * c(0.5_f64.powi(squarings as i32), 0.0)).exp();
    for _ in 0..squarings {
        e = &e * &e;
    }
    ensure_finite(&e, "matrix exponential (overflow)")?;
    Ok((e, true))
}

/// Trace over every subsystem not listed in `keep`.
///
/// `dims` lists subsystem dimensions, leftmost most significant; the kept
/// subsystems appear in ascending order in the result.
pub fn partial_trace(rho: &Operator, dims: &[usize], keep: &[usize]) -> Result<Operator> {
    let dim = ensure_square(rho)?;
    if dims.is_empty() || dims.iter().any(|&d| d == 0) {
        return Err(Error::Dimension(format!("invalid subsystem dims {dims:?}")));
    }
    let total: usize = dims.iter().product();
    if total != dim {
        return Err(Error::Dimension(format!(
            "subsystem dims {dims:?} multiply to {total}, operator has dimension {dim}"
        )));
    }
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    if let Some(&bad) = kept.iter().find(|&&k| k >= dims.len()) {
        return Err(Error::Dimension(format!(
            "subsystem index {bad} out of range for {} subsystems",
            dims.len()
        )));
    }
    let out_dim: usize = kept.iter().map(|&k| dims[k]).product();
    let is_kept: Vec<bool> = (0..dims.len()).map(|k| kept.contains(&k)).collect();

    // digit decomposition: (kept index, traced index)
    let split = |mut idx: usize| -> (usize, usize) {
        let (mut kidx, mut kmul, mut tidx, mut tmul) = (0, 1, 0, 1);
        for k in (0..dims.len()).rev() {
            let digit = idx % dims[k];
            idx /= dims[k];
            if is_kept[k] {
                kidx += digit * kmul;
                kmul *= dims[k];
            } else {
                tidx += digit * tmul;
                tmul *= dims[k];
            }
        }
        (kidx, tidx)
    };
    let parts: Vec<(usize, usize)> = (0..dim).map(split).collect();

    let mut out = Operator::zeros(out_dim, out_dim);
    for j in 0..dim {
        let (kj, tj) = parts[j];
        for i in 0..dim {
            let (ki, ti) = parts[i];
            if ti == tj {
                out[(ki, kj)] += rho[(i, j)];
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    pub fn sigma_x() -> Operator {
        Operator::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
    }

    pub fn sigma_z_up() -> Operator {
        // |0> lower, |1> upper
        Operator::from_diagonal(&DVector::from_vec(vec![c(-1.0, 0.0), ONE]))
    }

    fn random_matrix(rng: &mut ChaCha8Rng, n: usize, m: usize) -> Operator {
        Operator::from_fn(n, m, |_, _| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
    }

    fn random_density(rng: &mut ChaCha8Rng, n: usize) -> Operator {
        let g = random_matrix(rng, n, n);
        let r = &g * g.adjoint();
        let t = trace(&r);
        r / t
    }

    #[test]
    fn qubit_diagonal_spectrum() {
        let h = Operator::from_diagonal(&DVector::from_vec(vec![ZERO, ONE]));
        let s = hermitian_eigensystem(&h, 1e-9).unwrap();
        assert_eq!(s.energies().len(), 2);
        assert!((s.energies()[0]).abs() < 1e-15 && (s.energies()[1] - 1.0).abs() < 1e-15);
        let p0 = projector(&basis_state(2, 0));
        assert!(max_abs_diff(&s.projectors()[0], &p0) < 1e-14);
    }

    #[test]
    fn pauli_x_projectors_ordered() {
        let s = hermitian_eigensystem(&sigma_x(), 1e-9).unwrap();
        assert!((s.energies()[0] + 1.0).abs() < 1e-14);
        assert!((s.energies()[1] - 1.0).abs() < 1e-14);
        let minus = (identity(2) - sigma_x()) * c(0.5, 0.0);
        let plus = (identity(2) + sigma_x()) * c(0.5, 0.0);
        assert!(max_abs_diff(&s.projectors()[0], &minus) < 1e-14);
        assert!(max_abs_diff(&s.projectors()[1], &plus) < 1e-14);
    }

    #[test]
    fn two_qubit_degeneracy() {
        let h = (kron(&sigma_z_up(), &identity(2)) + kron(&identity(2), &sigma_z_up()))
            * c(0.5, 0.0);
        let s = hermitian_eigensystem(&h, 1e-9).unwrap();
        assert_eq!(s.multiplicities(), vec![1, 2, 1]);
        let expected = [-1.0, 0.0, 1.0];
        for (e, x) in s.energies().iter().zip(expected) {
            assert!((e - x).abs() < 1e-14);
        }
        let sum = s.projectors().iter().fold(zeros(4), |a, p| a + p);
        assert!(max_abs_diff(&sum, &identity(4)) < 1e-12);
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = Operator::from_row_slice(2, 2, &[ZERO, ONE, ZERO, ZERO]);
        match hermitian_eigensystem(&m, 1e-9) {
            Err(Error::NotHermitian { deviation, .. }) => assert!((deviation - 1.0).abs() < 1e-15),
            other => panic!("expected NotHermitian, got {other:?}"),
        }
    }

    #[test]
    fn spectrum_invariants_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 1..8 {
            let g = random_matrix(&mut rng, n, n);
            let h = &g + g.adjoint();
            let s = hermitian_eigensystem(&h, default_cluster_tol(&h)).unwrap();
            let sum = s.projectors().iter().fold(zeros(n), |a, p| a + p);
            assert!(max_abs_diff(&sum, &identity(n)) < 1e-12);
            for (i, p) in s.projectors().iter().enumerate() {
                for (j, q) in s.projectors().iter().enumerate() {
                    let expect = if i == j { p.clone() } else { zeros(n) };
                    assert!(max_abs_diff(&(p * q), &expect) < 1e-12);
                }
            }
            assert!(max_abs_diff(&s.reconstruct(), &h) < 1e-10);
            for w in s.energies().windows(2) {
                assert!(w[1] - w[0] > s.cluster_tol());
            }
        }
    }

    #[test]
    fn exponential_examples() {
        let z = zeros(3);
        assert!(max_abs_diff(&matrix_exponential(&z, 2.5).unwrap(), &identity(3)) < 1e-15);

        let sz = Operator::from_diagonal(&DVector::from_vec(vec![ONE, c(-1.0, 0.0)]));
        let e = matrix_exponential(&(sz * -I), std::f64::consts::PI).unwrap();
        assert!(max_abs_diff(&e, &(identity(2) * c(-1.0, 0.0))) < 1e-14);
    }

    #[test]
    fn exponential_semigroup() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let n = rng.random_range(2..7);
            let mut m = random_matrix(&mut rng, n, n);
            let norm = m.norm();
            m *= c(rng.random::<f64>() * 5.0 / norm, 0.0);
            let (t1, t2) = (rng.random::<f64>(), rng.random::<f64>());
            let lhs = matrix_exponential(&m, t1 + t2).unwrap();
            let rhs = matrix_exponential(&m, t1).unwrap() * matrix_exponential(&m, t2).unwrap();
            assert!(max_abs_diff(&lhs, &rhs) < 1e-9);
        }
    }

    #[test]
    fn partial_trace_product_and_bell() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = random_density(&mut rng, 2);
        let b = random_density(&mut rng, 3);
        let pt = partial_trace(&kron(&a, &b), &[2, 3], &[0]).unwrap();
        assert!(max_abs_diff(&pt, &a) < 1e-14);
        let pt = partial_trace(&kron(&a, &b), &[2, 3], &[1]).unwrap();
        assert!(max_abs_diff(&pt, &b) < 1e-14);

        let s = 0.5_f64.sqrt();
        let phi = StateVector::from_vec(vec![c(s, 0.0), ZERO, ZERO, c(s, 0.0)]);
        let pt = partial_trace(&projector(&phi), &[2, 2], &[0]).unwrap();
        assert!(max_abs_diff(&pt, &(identity(2) * c(0.5, 0.0))) < 1e-15);
    }

    #[test]
    fn partial_trace_matches_double_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let rho = random_density(&mut rng, 6);
        let pt = partial_trace(&rho, &[2, 3], &[1]).unwrap();
        // oracle: rho_B[b, b'] = sum_a rho[(a,b), (a,b')]
        let mut oracle = Operator::zeros(3, 3);
        for b in 0..3 {
            for bp in 0..3 {
                for a in 0..2 {
                    oracle[(b, bp)] += rho[(a * 3 + b, a * 3 + bp)];
                }
            }
        }
        assert!(max_abs_diff(&pt, &oracle) < 1e-13);
        assert!((trace(&pt) - trace(&rho)).norm() < 1e-12);
    }

    #[test]
    fn partial_trace_linear() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..10 {
            let x = random_matrix(&mut rng, 12, 12);
            let y = random_matrix(&mut rng, 12, 12);
            let (a, b) = (c(rng.random(), rng.random()), c(rng.random(), rng.random()));
            let lhs = partial_trace(&(&x * a + &y * b), &[2, 3, 2], &[0, 2]).unwrap();
            let rhs = partial_trace(&x, &[2, 3, 2], &[0, 2]).unwrap() * a
                + partial_trace(&y, &[2, 3, 2], &[0, 2]).unwrap() * b;
            assert!(max_abs_diff(&lhs, &rhs) < 1e-12);
        }
    }

    #[test]
    fn partial_trace_rejects_bad_dims() {
        assert!(matches!(
            partial_trace(&identity(4), &[2, 3], &[0]),
            Err(Error::Dimension(_))
        ));
        assert!(matches!(
            partial_trace(&identity(4), &[2, 2], &[2]),
            Err(Error::Dimension(_))
        ));
    }
}
