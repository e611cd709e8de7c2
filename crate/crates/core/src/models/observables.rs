use nalgebra::SymmetricEigen;

use crate::eigenops::BohrDecomposition;
use crate::error::{Error, Result};
use crate::lindblad::SpectralTensor;
use crate::operator::{
    c, ensure_square, hermitian_part, kron, validate_density_matrix, Operator, StateVector, ZERO,
};
use crate::oracle::INITIAL_STATE_TOL;
use crate::trajectory::diagonalize_channels;

/// Diagonal of `rho`, real parts.
pub fn populations(rho: &Operator) -> Vec<f64> {
    (0..rho.nrows()).map(|i| rho[(i, i)].re).collect()
}

/// Square root of a positive semidefinite Hermitian matrix, negative
/// eigenvalues clipped.
fn psd_sqrt(m: &Operator) -> Operator {
    let eig = SymmetricEigen::new(hermitian_part(m));
    let v = &eig.eigenvectors;
    let roots = eig.eigenvalues.map(|x| c(x.max(0.0).sqrt(), 0.0));
    v * Operator::from_diagonal(&roots) * v.adjoint()
}

/// Wootters concurrence of a two-qubit density matrix.
pub fn concurrence(rho: &Operator) -> Result<f64> {
    if ensure_square(rho)? != 4 {
        return Err(Error::Dimension("concurrence needs a two-qubit (4x4) state".into()));
    }
    validate_density_matrix(rho, INITIAL_STATE_TOL.max(1e-8))?;
    let sy = Operator::from_row_slice(2, 2, &[ZERO, c(0.0, -1.0), c(0.0, 1.0), ZERO]);
    let yy = kron(&sy, &sy);
    let tilde = &yy * rho.conjugate() * &yy;
    let root = psd_sqrt(rho);
    let inner = &root * tilde * &root;
    let mut lambda: Vec<f64> = SymmetricEigen::new(hermitian_part(&inner))
        .eigenvalues
        .iter()
        .map(|x| x.max(0.0).sqrt())
        .collect();
    lambda.sort_by(|a, b| b.total_cmp(a));
    Ok((lambda[0] - lambda[1] - lambda[2] - lambda[3]).clamp(0.0, 1.0))
}

/// Orthonormal basis (columns) of the null space of `m`: singular values below `tol`,
/// read off the Gram matrix.
fn null_space(m: &Operator, cols: usize, tol: f64) -> Operator {
    if m.nrows() == 0 {
        return Operator::identity(cols, cols);
    }
    // eigenvectors of m^dagger m with eigenvalue below tol^2
    let gram = m.adjoint() * m;
    let eig = SymmetricEigen::new(hermitian_part(&gram));
    let keep: Vec<usize> = (0..cols).filter(|&k| eig.eigenvalues[k] <= tol * tol).collect();
    let mut out = Operator::zeros(cols, keep.len());
    for (j, &k) in keep.iter().enumerate() {
        out.set_column(j, &eig.eigenvectors.column(k));
    }
    out
}

/// Decoherence-free subspace: the largest subspace of the joint kernel of all
/// active jump operators that is invariant under `h_eff`, returned as
/// eigenvectors of `h_eff` inside it (ascending energy).
pub fn dfs_basis(d: &BohrDecomposition, tensor: &SpectralTensor, h_eff: &Operator) -> Result<Vec<StateVector>> {
    let dim = d.dim();
    if ensure_square(h_eff)? != dim {
        return Err(Error::Dimension("effective Hamiltonian has the wrong dimension".into()));
    }
    let set = diagonalize_channels(tensor, d)?;
    let max_rate = set.channels().iter().map(|c| c.rate).fold(0.0, f64::max);
    let active: Vec<Operator> = set
        .active(1e-12 * max_rate.max(1.0))
        .map(|ch| &ch.op * c(ch.rate.sqrt(), 0.0))
        .collect();
    let scale = active
        .iter()
        .map(crate::operator::max_norm)
        .fold(crate::operator::max_norm(h_eff), f64::max)
        .max(1.0);
    let tol = 1e-6 * scale;

    let mut stacked = Operator::zeros(active.len() * dim, dim);
    for (k, l) in active.iter().enumerate() {
        stacked.view_mut((k * dim, 0), (dim, dim)).copy_from(l);
    }
    let mut basis = null_space(&stacked, dim, tol);

    // W <- { v in W : H v in W } until stable
    loop {
        let k = basis.ncols();
        if k == 0 {
            break;
        }
        let hw = h_eff * &basis;
        let outside = &hw - &basis * (basis.adjoint() * &hw);
        let coeffs = null_space(&outside, k, tol);
        if coeffs.ncols() == k {
            break;
        }
        basis = &basis * coeffs;
    }
    if basis.ncols() == 0 {
        return Ok(Vec::new());
    }
    let reduced = basis.adjoint() * h_eff * &basis;
    let eig = SymmetricEigen::new(hermitian_part(&reduced));
    let mut order: Vec<usize> = (0..basis.ncols()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    Ok(order
        .into_iter()
        .map(|k| {
            let mut v: StateVector = &basis * eig.eigenvectors.column(k);
            let n = v.norm();
            v /= c(n, 0.0);
            // fix the global phase: largest component real and positive
            let big = v.iter().cloned().fold(ZERO, |a, z| if z.norm() > a.norm() * (1.0 + 1e-12) { z } else { a });
            if big.norm() > 0.0 {
                v *= big.conj() / big.norm();
            }
            v
        })
        .collect())
}
