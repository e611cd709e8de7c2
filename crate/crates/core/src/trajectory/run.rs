use nalgebra::SymmetricEigen;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::cascade::EffectiveGenerator;
use crate::error::{Error, Result};
use crate::operator::{hermitian_part, matrix_exponential, validate_density_matrix, Operator, StateVector, I};
use crate::oracle::INITIAL_STATE_TOL;
use crate::trajectory::channels::JumpChannelSet;

/// Jump times are located to `TIME_RESOLUTION * t_max`.
pub const TIME_RESOLUTION: f64 = 1e-10;

const MAX_LEVELS: u32 = 60;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpEvent {
    pub time: f64,
    pub omega: f64,
    /// Index into `JumpChannelSet::channels`.
    pub channel: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub seed: u64,
    pub stream: u64,
    pub jumps: Vec<JumpEvent>,
    /// Normalized state at each output time.
    pub states: Vec<StateVector>,
}

impl TrajectoryRecord {
    /// Number of jumps at or before `t`.
    pub fn jumps_until(&self, t: f64) -> usize {
        self.jumps.iter().take_while(|j| j.time <= t).count()
    }
}

/// Propagators `exp(-iB h / 2^j)`, `j = 0..=levels`, for one output interval.
#[derive(Debug, Clone)]
struct Ladder {
    start: f64,
    length: f64,
    levels: u32,
    steps: Vec<Operator>,
}

impl Ladder {
    fn tick(&self) -> f64 {
        self.length / (1u64 << self.levels) as f64
    }
}

/// Precomputed drift propagators and channels for a fixed output grid.
#[derive(Debug, Clone)]
pub struct TrajectorySimulator {
    channels: JumpChannelSet,
    times: Vec<f64>,
    ladders: Vec<Ladder>,
    rate_tol: f64,
}

impl TrajectorySimulator {
    pub fn new(generator: &EffectiveGenerator, channels: JumpChannelSet, times: &[f64]) -> Result<Self> {
        if generator.dim() != channels.dim() {
            return Err(Error::Dimension("generator and channels differ in dimension".into()));
        }
        if times.is_empty()
            || times.iter().any(|t| !t.is_finite() || *t < 0.0)
            || times.windows(2).any(|w| w[1] < w[0])
        {
            return Err(Error::InvalidArgument(
                "output times must be finite, non-negative and ascending".into(),
            ));
        }
        let t_max = *times.last().unwrap();
        let resolution = TIME_RESOLUTION * t_max.max(f64::MIN_POSITIVE);
        let minus_ib = generator.b() * -I;
        let mut ladders = Vec::with_capacity(times.len());
        let mut start = 0.0;
        for &end in times {
            let length = end - start;
            let levels = if length > resolution {
                ((length / resolution).log2().ceil() as u32).min(MAX_LEVELS)
            } else {
                0
            };
            let steps = (0..=levels)
                .map(|j| matrix_exponential(&minus_ib, length / (1u64 << j) as f64))
                .collect::<Result<Vec<_>>>()?;
            ladders.push(Ladder {
                start,
                length,
                levels,
                steps,
            });
            start = end;
        }
        let max_rate = channels.channels().iter().map(|c| c.rate).fold(0.0, f64::max);
        Ok(Self {
            channels,
            times: times.to_vec(),
            ladders,
            rate_tol: 1e-14 * max_rate,
        })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn channels(&self) -> &JumpChannelSet {
        &self.channels
    }

    /// One trajectory from a normalized `psi0`, drawing from `rng`.
    pub fn run<R: Rng>(&self, psi0: &StateVector, rng: &mut R) -> Result<(Vec<JumpEvent>, Vec<StateVector>)> {
        if psi0.len() != self.channels.dim() {
            return Err(Error::Dimension("initial state does not match the model".into()));
        }
        let n0 = psi0.norm();
        if (n0 - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidState(format!("initial state has norm {n0}")));
        }
        let mut phi = psi0.clone();
        let mut threshold = uniform_open(rng);
        let mut jumps = Vec::new();
        let mut states = Vec::with_capacity(self.times.len());

        for ladder in &self.ladders {
            let total: u64 = 1 << ladder.levels;
            let mut pos: u64 = 0;
            // finest level the crossing search has narrowed down to
            let mut min_level: u32 = 0;
            while pos < total {
                let aligned = if pos == 0 {
                    0
                } else {
                    ladder.levels - pos.trailing_zeros().min(ladder.levels)
                };
                let level = aligned.max(min_level);
                let next = &ladder.steps[level as usize] * &phi;
                if next.norm_squared() > threshold {
                    phi = next;
                    pos += 1 << (ladder.levels - level);
                } else if level < ladder.levels {
                    min_level = level + 1;
                } else {
                    pos += 1;
                    let time = ladder.start + pos as f64 * ladder.tick();
                    phi = next;
                    match self.jump(&phi, rng) {
                        Some((k, after)) => {
                            jumps.push(JumpEvent {
                                time,
                                omega: self.channels.channels()[k].omega,
                                channel: k,
                            });
                            phi = after;
                            threshold = uniform_open(rng);
                        }
                        None => {
                            // nothing can fire here; renormalize and keep drifting
                            let n = phi.norm();
                            phi /= nalgebra::Complex::new(n, 0.0);
                            threshold = uniform_open(rng);
                        }
                    }
                    min_level = 0;
                }
            }
            let n = phi.norm();
            states.push(&phi / nalgebra::Complex::new(n, 0.0));
        }
        Ok((jumps, states))
    }

    fn jump<R: Rng>(&self, phi: &StateVector, rng: &mut R) -> Option<(usize, StateVector)> {
        let weights: Vec<(usize, f64, StateVector)> = self
            .channels
            .channels()
            .iter()
            .enumerate()
            .filter(|(_, c)| c.rate > self.rate_tol)
            .map(|(k, c)| {
                let out = &c.op * phi;
                (k, c.rate * out.norm_squared(), out)
            })
            .collect();
        let total: f64 = weights.iter().map(|w| w.1).sum();
        if !(total > 0.0) || !total.is_finite() {
            return None;
        }
        let target = rng.random::<f64>() * total;
        let mut acc = 0.0;
        let mut chosen = None;
        for (k, w, out) in &weights {
            if *w > 0.0 {
                chosen = Some((*k, out));
                acc += w;
                if target < acc {
                    break;
                }
            }
        }
        chosen.map(|(k, out)| (k, out / nalgebra::Complex::new(out.norm(), 0.0)))
    }

    /// Trajectory `stream` of the master `seed`.
    pub fn run_trajectory(&self, initial: &InitialEnsemble, seed: u64, stream: u64) -> Result<TrajectoryRecord> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        let psi0 = initial.sample(&mut rng);
        let (jumps, states) = self.run(psi0, &mut rng)?;
        Ok(TrajectoryRecord {
            seed,
            stream,
            jumps,
            states,
        })
    }
}

/// Uniform draw in `(0, 1)`.
fn uniform_open<R: Rng>(rng: &mut R) -> f64 {
    loop {
        let u = rng.random::<f64>();
        if u > 0.0 {
            return u;
        }
    }
}

/// Initial density matrix as a mixture of its eigenvectors.
#[derive(Debug, Clone)]
pub struct InitialEnsemble {
    weights: Vec<f64>,
    states: Vec<StateVector>,
}

impl InitialEnsemble {
    pub fn pure(psi: &StateVector) -> Result<Self> {
        let n = psi.norm();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::InvalidState("zero or non-finite state vector".into()));
        }
        Ok(Self {
            weights: vec![1.0],
            states: vec![psi / nalgebra::Complex::new(n, 0.0)],
        })
    }

    /// Eigen-decomposition of `rho`; eigenvalues below `1e-14` are dropped.
    pub fn from_density(rho: &Operator) -> Result<Self> {
        validate_density_matrix(rho, INITIAL_STATE_TOL)?;
        let eig = SymmetricEigen::new(hermitian_part(rho));
        let mut pairs: Vec<(f64, StateVector)> = (0..eig.eigenvalues.len())
            .filter(|&k| eig.eigenvalues[k] > 1e-14)
            .map(|k| (eig.eigenvalues[k], eig.eigenvectors.column(k).into_owned()))
            .collect();
        pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
        let total: f64 = pairs.iter().map(|p| p.0).sum();
        Ok(Self {
            weights: pairs.iter().map(|p| p.0 / total).collect(),
            states: pairs.into_iter().map(|p| p.1).collect(),
        })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn states(&self) -> &[StateVector] {
        &self.states
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> &StateVector {
        if self.states.len() == 1 {
            return &self.states[0];
        }
        let u = rng.random::<f64>();
        let mut acc = 0.0;
        for (w, s) in self.weights.iter().zip(&self.states) {
            acc += w;
            if u < acc {
                return s;
            }
        }
        self.states.last().unwrap()
    }
}

/// `count` trajectories on streams `0..count`, run in parallel, returned in stream order.
pub fn run_ensemble(
    sim: &TrajectorySimulator,
    initial: &InitialEnsemble,
    count: usize,
    seed: u64,
) -> Result<Vec<TrajectoryRecord>> {
    (0..count as u64)
        .into_par_iter()
        .map(|i| sim.run_trajectory(initial, seed, i))
        .collect()
}
