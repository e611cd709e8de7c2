//! Adaptive Dormand-Prince 5(4) integrator for complex linear systems.

use crate::error::{Error, Result};
use crate::operator::{c, StateVector};

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    pub initial_step: Option<f64>,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            max_steps: 5_000_000,
            initial_step: None,
        }
    }
}

impl OdeOptions {
    pub fn with_tolerances(rtol: f64, atol: f64) -> Self {
        Self {
            rtol,
            atol,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// fifth-order solution minus embedded fourth-order solution
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;

fn combo(y: &StateVector, h: f64, terms: &[(f64, &StateVector)]) -> StateVector {
    let mut out = y.clone();
    for &(a, k) in terms {
        if a != 0.0 {
            out.axpy(c(h * a, 0.0), k, c(1.0, 0.0));
        }
    }
    out
}

fn error_norm(err: &StateVector, y: &StateVector, y_new: &StateVector, opts: &OdeOptions) -> f64 {
    err.iter()
        .zip(y.iter().zip(y_new.iter()))
        .map(|(e, (a, b))| e.norm() / (opts.atol + opts.rtol * a.norm().max(b.norm())))
        .fold(0.0, f64::max)
}

/// Integrates `y' = f(t, y)` from `(t0, y0)` and returns the state at each of
/// the ascending output `times` (all `>= t0`).
pub fn integrate<F>(
    f: F,
    t0: f64,
    y0: &StateVector,
    times: &[f64],
    opts: &OdeOptions,
) -> Result<(Vec<StateVector>, OdeStats)>
where
    F: Fn(f64, &StateVector) -> StateVector,
{
    if !(opts.rtol > 0.0 && opts.atol > 0.0) {
        return Err(Error::InvalidArgument("tolerances must be positive".into()));
    }
    if times.windows(2).any(|w| w[1] < w[0]) || times.first().is_some_and(|&t| t < t0) {
        return Err(Error::InvalidArgument(
            "output times must be ascending and not precede the start time".into(),
        ));
    }

    let mut stats = OdeStats::default();
    let mut out = Vec::with_capacity(times.len());
    let mut t = t0;
    let mut y = y0.clone();
    let mut k1 = f(t, &y);
    stats.rhs_evals += 1;

    let t_end = times.last().copied().unwrap_or(t0);
    let span = t_end - t0;
    let mut h = opts.initial_step.unwrap_or_else(|| {
        let scale = |v: &StateVector| {
            v.iter()
                .zip(y.iter())
                .map(|(x, y0)| x.norm() / (opts.atol + opts.rtol * y0.norm()))
                .fold(0.0, f64::max)
        };
        let (d0, d1) = (scale(&y), scale(&k1));
        let guess = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        guess.min(span.max(f64::MIN_POSITIVE))
    });

    for &target in times {
        while t < target {
            if stats.accepted + stats.rejected >= opts.max_steps {
                return Err(Error::StepUnderflow { time: t, step: h });
            }
            let last_step = target - t <= h * (1.0 + 1e-12);
            let step = if last_step { target - t } else { h };

            let k2 = f(t + C2 * step, &combo(&y, step, &[(A21, &k1)]));
            let k3 = f(t + C3 * step, &combo(&y, step, &[(A31, &k1), (A32, &k2)]));
            let k4 = f(
                t + C4 * step,
                &combo(&y, step, &[(A41, &k1), (A42, &k2), (A43, &k3)]),
            );
            let k5 = f(
                t + C5 * step,
                &combo(&y, step, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
            );
            let k6 = f(
                t + step,
                &combo(
                    &y,
                    step,
                    &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
                ),
            );
            let y_new = combo(
                &y,
                step,
                &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
            );
            let k7 = f(t + step, &y_new);
            stats.rhs_evals += 6;

            let zero = StateVector::zeros(y.len());
            let err = combo(
                &zero,
                step,
                &[(E1, &k1), (E3, &k3), (E4, &k4), (E5, &k5), (E6, &k6), (E7, &k7)],
            );
            let en = error_norm(&err, &y, &y_new, opts);

            if en <= 1.0 {
                stats.accepted += 1;
                t = if last_step { target } else { t + step };
                y = y_new;
                k1 = k7;
                let factor = if en == 0.0 {
                    MAX_FACTOR
                } else {
                    (SAFETY * en.powf(-0.2)).clamp(MIN_FACTOR, MAX_FACTOR)
                };
                // a shortened final step says nothing about the natural step size
                if !last_step || step >= h {
                    h = step * factor;
                }
            } else {
                stats.rejected += 1;
                h = step * (SAFETY * en.powf(-0.2)).clamp(MIN_FACTOR, 1.0);
            }
            if h < 16.0 * f64::EPSILON * t.abs().max(f64::MIN_POSITIVE) || !h.is_finite() {
                return Err(Error::StepUnderflow { time: t, step: h });
            }
        }
        out.push(y.clone());
    }
    Ok((out, stats))
}
