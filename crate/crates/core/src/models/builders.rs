use rand::Rng;

use crate::error::{Error, Result};
use crate::lindblad::{scalar_entry, SpectralEntry, SpectralTensor};
use crate::models::ModelSpec;
use crate::operator::{
    basis_state, c, embed, identity, projector, Operator, StateVector, ONE, ZERO,
};

/// Largest Hilbert-space dimension the builders accept.
pub const MAX_MODEL_DIM: usize = 4096;

// qubit basis: 0 = ground, 1 = excited
fn sigma_minus() -> Operator {
    Operator::from_row_slice(2, 2, &[ZERO, ONE, ZERO, ZERO])
}

fn sigma_x() -> Operator {
    Operator::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
}

fn sigma_z() -> Operator {
    Operator::from_row_slice(2, 2, &[c(-1.0, 0.0), ZERO, ZERO, ONE])
}

fn annihilation(levels: usize) -> Operator {
    let mut a = Operator::zeros(levels, levels);
    for n in 1..levels {
        a[(n - 1, n)] = c((n as f64).sqrt(), 0.0);
    }
    a
}

fn number(levels: usize) -> Operator {
    Operator::from_fn(levels, levels, |i, j| if i == j { c(i as f64, 0.0) } else { ZERO })
}

fn check_rate(name: &str, value: f64) -> Result<()> {
    if !(value >= 0.0) || !value.is_finite() {
        return Err(Error::InvalidArgument(format!("{name} must be finite and non-negative, got {value}")));
    }
    Ok(())
}

fn check_finite(name: &str, value: f64) -> Result<()> {
    if !value.is_finite() {
        return Err(Error::InvalidArgument(format!("{name} must be finite, got {value}")));
    }
    Ok(())
}

/// Truncated cavity `H_S = w_c a^dagger a` on `n_max + 1` Fock levels, coupled
/// through `a + a^dagger` with `gamma(+w_c) = kappa`. Starts in `|n_max>`.
pub fn model_damped_cavity(n_max: usize, omega_c: f64, kappa: f64) -> Result<ModelSpec> {
    if n_max < 1 || n_max + 1 > MAX_MODEL_DIM {
        return Err(Error::InvalidArgument(format!(
            "photon truncation must lie in 1..{MAX_MODEL_DIM}, got {n_max}"
        )));
    }
    if !(omega_c > 0.0) || !omega_c.is_finite() {
        return Err(Error::InvalidArgument(format!("cavity frequency must be positive, got {omega_c}")));
    }
    check_rate("kappa", kappa)?;
    let levels = n_max + 1;
    let a = annihilation(levels);
    let h = number(levels) * c(omega_c, 0.0);
    let tensor = SpectralTensor::zero_temperature(1, vec![scalar_entry(omega_c, kappa, 0.0)])?;
    let rho0 = projector(&basis_state(levels, n_max));
    Ok(ModelSpec::new(
        vec![levels],
        h,
        vec![("a+a^dagger".into(), &a + a.adjoint())],
        tensor,
        rho0,
    )?
    .with_metadata("model", "damped_cavity")
    .with_metadata("n_max", n_max)
    .with_metadata("omega_c", omega_c)
    .with_metadata("kappa", kappa))
}

/// Two two-level atoms, `H_S = (w0/2)(sz1 + sz2)`, channels `sx1`, `sx2`,
/// `gamma(+w0) = [[g, g12], [g12, g]]`, `S(+w0) = [[0, s12], [s12, 0]]`.
/// Starts in `|ee>`.
pub fn model_two_atoms(omega0: f64, gamma: f64, gamma12: f64, s12: f64) -> Result<ModelSpec> {
    if !(omega0 > 0.0) || !omega0.is_finite() {
        return Err(Error::InvalidArgument(format!("atomic frequency must be positive, got {omega0}")));
    }
    check_rate("gamma", gamma)?;
    check_finite("gamma12", gamma12)?;
    check_finite("s12", s12)?;
    let dims = [2, 2];
    let h = (embed(&sigma_z(), 0, &dims) + embed(&sigma_z(), 1, &dims)) * c(0.5 * omega0, 0.0);
    let g = Operator::from_row_slice(2, 2, &[c(gamma, 0.0), c(gamma12, 0.0), c(gamma12, 0.0), c(gamma, 0.0)]);
    let s = Operator::from_row_slice(2, 2, &[ZERO, c(s12, 0.0), c(s12, 0.0), ZERO]);
    let tensor = SpectralTensor::zero_temperature(
        2,
        vec![SpectralEntry {
            omega: omega0,
            gamma: g,
            shift: s,
        }],
    )?;
    let rho0 = projector(&basis_state(4, 3));
    Ok(ModelSpec::new(
        dims.to_vec(),
        h,
        vec![
            ("sx1".into(), embed(&sigma_x(), 0, &dims)),
            ("sx2".into(), embed(&sigma_x(), 1, &dims)),
        ],
        tensor,
        rho0,
    )?
    .with_metadata("model", "two_atoms")
    .with_metadata("omega0", omega0)
    .with_metadata("gamma", gamma)
    .with_metadata("gamma12", gamma12)
    .with_metadata("s12", s12))
}

/// `(|eg> - |ge>)/sqrt 2` in the two-atom basis.
pub fn singlet() -> StateVector {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    StateVector::from_vec(vec![ZERO, c(-r, 0.0), c(r, 0.0), ZERO])
}

/// `(|eg> + |ge>)/sqrt 2` in the two-atom basis.
pub fn triplet() -> StateVector {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    StateVector::from_vec(vec![ZERO, c(r, 0.0), c(r, 0.0), ZERO])
}

/// Tavis-Cummings model of `N = g.len()` atoms resonant with a cavity of
/// frequency `omega`, truncated at `n_photons`:
/// `H_S = w a^dagger a + (w/2) sum_i sz_i + sum_i g_i (a s+_i + a^dagger s-_i)`.
///
/// Channels are `a + a^dagger` and each `sx_i`. At every positive Bohr
/// frequency of `H_S` the rate matrix is `diag(kappa, gamma_at, ..., gamma_at)`.
/// Atoms come first in the tensor order, the cavity last. Starts with the
/// first atom excited and the cavity empty.
pub fn model_n_atoms_cavity(
    g: &[f64],
    omega: f64,
    kappa: f64,
    gamma_at: f64,
    n_photons: usize,
) -> Result<ModelSpec> {
    let n = g.len();
    if n == 0 {
        return Err(Error::InvalidArgument("at least one atom is required".into()));
    }
    if n_photons < 1 {
        return Err(Error::InvalidArgument(
            "photon truncation must be at least the initial excitation number (1)".into(),
        ));
    }
    if !(omega > 0.0) || !omega.is_finite() {
        return Err(Error::InvalidArgument(format!("frequency must be positive, got {omega}")));
    }
    for (k, gi) in g.iter().enumerate() {
        check_finite(&format!("g[{k}]"), *gi)?;
    }
    check_rate("kappa", kappa)?;
    check_rate("gamma_at", gamma_at)?;
    let levels = n_photons + 1;
    let dim = 2usize
        .checked_pow(n as u32)
        .and_then(|p| p.checked_mul(levels))
        .filter(|&d| d <= MAX_MODEL_DIM)
        .ok_or_else(|| {
            Error::Dimension(format!(
                "{n} atoms with {n_photons} photons exceed the dimension limit {MAX_MODEL_DIM}"
            ))
        })?;

    let mut dims = vec![2; n];
    dims.push(levels);
    let a = embed(&annihilation(levels), n, &dims);
    let mut h = embed(&number(levels), n, &dims) * c(omega, 0.0);
    let mut couplings = vec![("cavity".to_string(), &a + a.adjoint())];
    for (i, gi) in g.iter().enumerate() {
        let sm = embed(&sigma_minus(), i, &dims);
        h += embed(&sigma_z(), i, &dims) * c(0.5 * omega, 0.0);
        h += (&a * sm.adjoint() + a.adjoint() * &sm) * c(*gi, 0.0);
        couplings.push((format!("atom{}", i + 1), embed(&sigma_x(), i, &dims)));
    }
    let h = (&h + h.adjoint()) * c(0.5, 0.0);

    let mut rates = vec![gamma_at; n + 1];
    rates[0] = kappa;
    let gamma = Operator::from_fn(n + 1, n + 1, |i, j| if i == j { c(rates[i], 0.0) } else { ZERO });
    // frequencies come from the same decomposition ModelSpec::decomposition builds
    let probe = ModelSpec {
        dims: dims.clone(),
        h_s: h.clone(),
        couplings: couplings.clone(),
        tensor: SpectralTensor::zero_temperature(n + 1, vec![])?,
        initial_state: identity(dim) * c(1.0 / dim as f64, 0.0),
        metadata: Default::default(),
    };
    let d = probe.decomposition()?;
    let entries = d
        .positive_indices()
        .map(|k| SpectralEntry {
            omega: d.frequencies()[k],
            gamma: gamma.clone(),
            shift: Operator::zeros(n + 1, n + 1),
        })
        .collect();
    let tensor = SpectralTensor::zero_temperature(n + 1, entries)?;

    let mut index = 1usize << (n - 1); // first atom excited
    index *= levels;
    let rho0 = projector(&basis_state(dim, index));
    let mut spec = ModelSpec::new(dims, h, couplings, tensor, rho0)?
        .with_metadata("model", "n_atoms_cavity")
        .with_metadata("atoms", n)
        .with_metadata("omega", omega)
        .with_metadata("kappa", kappa)
        .with_metadata("gamma_at", gamma_at)
        .with_metadata("n_photons", n_photons);
    spec.metadata.insert(
        "g".into(),
        g.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","),
    );
    Ok(spec)
}

fn random_hermitian<R: Rng>(rng: &mut R, dim: usize) -> Operator {
    let m = Operator::from_fn(dim, dim, |_, _| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
    (&m + m.adjoint()) * c(0.5, 0.0)
}

/// Random zero-temperature model on `dim` levels: random `H_S`, one or two
/// random Hermitian couplings, random PSD `gamma(w)` and Hermitian `S(w)` at
/// every positive Bohr frequency, random mixed initial state.
pub fn random_model<R: Rng>(rng: &mut R, dim: usize) -> Result<ModelSpec> {
    if !(2..=8).contains(&dim) {
        return Err(Error::InvalidArgument(format!("random models use 2..=8 levels, got {dim}")));
    }
    let h = random_hermitian(rng, dim) * c(2.0, 0.0);
    let channels = rng.random_range(1..=2usize);
    let couplings: Vec<(String, Operator)> = (0..channels)
        .map(|k| (format!("A{}", k + 1), random_hermitian(rng, dim)))
        .collect();
    let probe = ModelSpec {
        dims: vec![dim],
        h_s: h.clone(),
        couplings: couplings.clone(),
        tensor: SpectralTensor::zero_temperature(channels, vec![])?,
        initial_state: identity(dim) * c(1.0 / dim as f64, 0.0),
        metadata: Default::default(),
    };
    let d = probe.decomposition()?;
    let entries = d
        .positive_indices()
        .map(|k| {
            let g = Operator::from_fn(channels, channels, |_, _| {
                c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
            });
            SpectralEntry {
                omega: d.frequencies()[k],
                gamma: &g * g.adjoint(),
                shift: random_hermitian(rng, channels) * c(0.2, 0.0),
            }
        })
        .collect();
    let tensor = SpectralTensor::zero_temperature(channels, entries)?;
    let m = Operator::from_fn(dim, dim, |_, _| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
    let rho = &m * m.adjoint();
    let tr = crate::operator::trace(&rho);
    let rho0 = &rho / tr;
    let rho0 = (&rho0 + rho0.adjoint()) * c(0.5, 0.0);
    Ok(ModelSpec::new(vec![dim], h, couplings, tensor, rho0)?.with_metadata("model", "random"))
}
