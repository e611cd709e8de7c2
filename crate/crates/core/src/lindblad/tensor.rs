use crate::error::{Error, Result};
use crate::operator::{c, hermiticity_deviation, max_abs_diff, max_norm, min_eigenvalue, Operator};

const GAMMA_HERMITIAN_TOL: f64 = 1e-12;
const GAMMA_PSD_TOL: f64 = 1e-10;

/// Rate matrix `gamma(w)` and Lamb-shift matrix `S(w)` at one Bohr frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralEntry {
    pub omega: f64,
    pub gamma: Operator,
    pub shift: Operator,
}

/// Per-frequency Hermitian channel matrices of the bath correlation functions.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralTensor {
    entries: Vec<SpectralEntry>,
    channels: usize,
    /// Inverse temperature; `f64::INFINITY` at T = 0.
    beta: f64,
}

impl SpectralTensor {
    pub fn new(channels: usize, beta: f64, mut entries: Vec<SpectralEntry>) -> Result<Self> {
        if channels == 0 {
            return Err(Error::InvalidArgument("channel count must be positive".into()));
        }
        if !(beta > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "inverse temperature must be positive or infinite, got {beta}"
            )));
        }
        entries.sort_by(|a, b| a.omega.total_cmp(&b.omega));
        for w in entries.windows(2) {
            if (w[1].omega - w[0].omega).abs() <= 1e-12 * w[0].omega.abs().max(1.0) {
                return Err(Error::InvalidArgument(format!(
                    "duplicate spectral entry at omega = {}",
                    w[0].omega
                )));
            }
        }
        for e in &entries {
            validate_entry(e, channels)?;
            if beta.is_infinite() && e.omega < 0.0 && max_norm(&e.gamma) > 0.0 {
                return Err(Error::AbsorptionAtZeroTemperature { omega: e.omega });
            }
        }
        Ok(Self {
            entries,
            channels,
            beta,
        })
    }

    /// Zero-temperature tensor.
    pub fn zero_temperature(channels: usize, entries: Vec<SpectralEntry>) -> Result<Self> {
        Self::new(channels, f64::INFINITY, entries)
    }

    pub fn entries(&self) -> &[SpectralEntry] {
        &self.entries
    }

    pub fn channel_count(&self) -> usize {
        self.channels
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn is_zero_temperature(&self) -> bool {
        self.beta.is_infinite()
            && self
                .entries
                .iter()
                .all(|e| e.omega >= 0.0 || max_norm(&e.gamma) == 0.0)
    }

    /// Entry whose frequency lies within `tol` of `omega`.
    pub fn lookup(&self, omega: f64, tol: f64) -> Option<&SpectralEntry> {
        self.entries
            .iter()
            .filter(|e| (e.omega - omega).abs() <= tol)
            .min_by(|a, b| (a.omega - omega).abs().total_cmp(&(b.omega - omega).abs()))
    }

    /// Largest `|gamma(w)|` among entries with `|w| <= tol`.
    pub fn zero_frequency_dissipation(&self, tol: f64) -> f64 {
        self.entries
            .iter()
            .filter(|e| e.omega.abs() <= tol)
            .map(|e| max_norm(&e.gamma))
            .fold(0.0, f64::max)
    }

    /// Drops every absorption (`w < 0`) rate and marks the bath as T = 0.
    /// Lamb-shift matrices are kept; entries left entirely zero are removed.
    pub fn restrict_zero_temperature(&self) -> SpectralTensor {
        let entries = self
            .entries
            .iter()
            .filter_map(|e| {
                if e.omega < 0.0 {
                    if max_norm(&e.shift) == 0.0 {
                        None
                    } else {
                        Some(SpectralEntry {
                            omega: e.omega,
                            gamma: Operator::zeros(self.channels, self.channels),
                            shift: e.shift.clone(),
                        })
                    }
                } else {
                    Some(e.clone())
                }
            })
            .collect();
        SpectralTensor {
            entries,
            channels: self.channels,
            beta: f64::INFINITY,
        }
    }

    /// Largest violation of detailed balance `gamma(w) = e^{beta w} gamma(-w)`
    /// over `w > 0` and all channel pairs (missing entries count as zero).
    /// Zero for T = 0 tensors.
    pub fn check_detailed_balance(&self, beta: f64) -> f64 {
        if beta.is_infinite() {
            return 0.0;
        }
        let tol = 1e-12;
        let zero = Operator::zeros(self.channels, self.channels);
        let mut worst = 0.0_f64;
        for e in self.entries.iter().filter(|e| e.omega > 0.0) {
            let absorb = self
                .lookup(-e.omega, tol * e.omega.max(1.0))
                .map(|m| &m.gamma)
                .unwrap_or(&zero);
            let factor = (beta * e.omega).exp();
            for (em, ab) in e.gamma.iter().zip(absorb.iter()) {
                let predicted = if ab.norm() == 0.0 { *ab } else { ab * factor };
                worst = worst.max((em - predicted).norm());
            }
        }
        for e in self.entries.iter().filter(|e| e.omega < 0.0) {
            // absorption without a matching emission entry
            if self.lookup(-e.omega, tol * e.omega.abs().max(1.0)).is_none() {
                let factor = (beta * -e.omega).exp();
                worst = worst.max(max_norm(&e.gamma) * factor);
            }
        }
        worst
    }
}

fn validate_entry(e: &SpectralEntry, channels: usize) -> Result<()> {
    for (name, m) in [("gamma", &e.gamma), ("S", &e.shift)] {
        if m.nrows() != channels || m.ncols() != channels {
            return Err(Error::Dimension(format!(
                "{name}({}) is {}x{}, expected {channels}x{channels}",
                e.omega,
                m.nrows(),
                m.ncols()
            )));
        }
        if !m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::NonFinite(format!("{name}({})", e.omega)));
        }
        let deviation = hermiticity_deviation(m);
        let allowed = GAMMA_HERMITIAN_TOL * max_norm(m).max(1.0);
        if deviation > allowed {
            return Err(Error::NotHermitian { deviation, allowed });
        }
    }
    let min_eigenvalue = min_eigenvalue(&e.gamma);
    if min_eigenvalue < -GAMMA_PSD_TOL {
        return Err(Error::NotPositive {
            omega: e.omega,
            min_eigenvalue,
        });
    }
    Ok(())
}

/// Builds `gamma = Gamma + Gamma^dagger` and `S = (Gamma - Gamma^dagger) / 2i`
/// from one-sided bath correlation transforms `Gamma(w)`.
pub fn gamma_from_halfline(
    halfline: &[(f64, Operator)],
    channels: usize,
    beta: f64,
) -> Result<SpectralTensor> {
    let entries = halfline
        .iter()
        .map(|(omega, g)| {
            let gd = g.adjoint();
            SpectralEntry {
                omega: *omega,
                gamma: g + &gd,
                shift: (g - &gd) * c(0.0, -0.5),
            }
        })
        .collect();
    SpectralTensor::new(channels, beta, entries)
}

/// Scalar single-channel entry.
pub fn scalar_entry(omega: f64, gamma: f64, shift: f64) -> SpectralEntry {
    SpectralEntry {
        omega,
        gamma: Operator::from_element(1, 1, c(gamma, 0.0)),
        shift: Operator::from_element(1, 1, c(shift, 0.0)),
    }
}

impl SpectralEntry {
    pub fn is_close(&self, other: &SpectralEntry, tol: f64) -> bool {
        (self.omega - other.omega).abs() <= tol
            && max_abs_diff(&self.gamma, &other.gamma) <= tol
            && max_abs_diff(&self.shift, &other.shift) <= tol
    }
}
