use std::collections::{BTreeMap, VecDeque};

use crate::cascade::generator::EffectiveGenerator;
use crate::eigenops::BohrDecomposition;
use crate::error::{Error, Result};
use crate::ode::{integrate, OdeOptions};
use crate::operator::{max_abs_diff, max_norm, trace, zeros, Operator, Spectrum, StateVector, C64, I};
use crate::oracle::EvolutionResult;

/// Energy sectors of `H_S`, highest energy first.
#[derive(Debug, Clone)]
pub struct Sectors {
    energies: Vec<f64>,
    bases: Vec<Operator>,
}

impl Sectors {
    pub fn from_spectrum(spectrum: &Spectrum) -> Self {
        Self {
            energies: spectrum.energies().iter().rev().cloned().collect(),
            bases: spectrum.bases().iter().rev().cloned().collect(),
        }
    }

    /// Sector energies, descending.
    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    /// Descending sector index of an ascending spectrum level.
    fn from_level(&self, level: usize) -> usize {
        self.energies.len() - 1 - level
    }

    fn projector(&self, m: usize) -> Operator {
        &self.bases[m] * self.bases[m].adjoint()
    }

    fn reduce(&self, op: &Operator, m: usize, n: usize) -> Operator {
        self.bases[m].adjoint() * op * &self.bases[n]
    }

    fn expand(&self, x: &Operator, m: usize, n: usize) -> Operator {
        &self.bases[m] * x * self.bases[n].adjoint()
    }
}

/// `P(e_m) rho P(e_n)` for sector pair `(m, n)` (descending indices).
#[derive(Debug, Clone)]
pub struct SectorBlock {
    pub pair: (usize, usize),
    pub block: Operator,
}

const BLOCK_DROP_TOL: f64 = 1e-13;

/// Splits a state into sector blocks, dropping blocks with max-norm below `1e-13`.
pub fn sector_split(rho0: &Operator, spectrum: &Spectrum) -> Result<Vec<SectorBlock>> {
    if rho0.nrows() != spectrum.dim() || rho0.ncols() != spectrum.dim() {
        return Err(Error::Dimension(format!(
            "state is {}x{}, Hamiltonian dimension is {}",
            rho0.nrows(),
            rho0.ncols(),
            spectrum.dim()
        )));
    }
    let sectors = Sectors::from_spectrum(spectrum);
    let projectors: Vec<Operator> = (0..sectors.len()).map(|m| sectors.projector(m)).collect();
    let mut blocks = Vec::new();
    for m in 0..sectors.len() {
        let left = &projectors[m] * rho0;
        for n in 0..sectors.len() {
            let block = &left * &projectors[n];
            if max_norm(&block) >= BLOCK_DROP_TOL {
                blocks.push(SectorBlock { pair: (m, n), block });
            }
        }
    }
    Ok(blocks)
}

#[derive(Debug, Clone, Copy)]
pub struct CascadeOptions {
    pub ode: OdeOptions,
}

impl Default for CascadeOptions {
    fn default() -> Self {
        Self {
            ode: OdeOptions::with_tolerances(1e-11, 1e-13),
        }
    }
}

/// One feeding term `gamma_ab a_b X a_a^dagger` from a source pair into a target pair,
/// in sector-reduced coordinates.
struct Feed {
    source: usize,
    target: usize,
    terms: Vec<(C64, Operator, Operator)>,
}

struct PairLayout {
    pair: (usize, usize),
    rows: usize,
    cols: usize,
    offset: usize,
}

/// Time-indexed sector blocks produced by the cascade.
#[derive(Debug, Clone)]
pub struct SectorSolution {
    times: Vec<f64>,
    sector_energies: Vec<f64>,
    pairs: Vec<(usize, usize)>,
    initial_pairs: Vec<(usize, usize)>,
    /// `blocks[time][pair]`, full operators.
    blocks: Vec<Vec<Operator>>,
}

impl SectorSolution {
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// Sector energies, descending.
    pub fn sector_energies(&self) -> &[f64] {
        &self.sector_energies
    }

    /// Sector pairs carried by the solution, highest total energy first.
    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn initial_pairs(&self) -> &[(usize, usize)] {
        &self.initial_pairs
    }

    pub fn block(&self, time_index: usize, pair: (usize, usize)) -> Option<&Operator> {
        self.pairs
            .iter()
            .position(|&p| p == pair)
            .map(|k| &self.blocks[time_index][k])
    }

    pub fn blocks_at(&self, time_index: usize) -> impl Iterator<Item = ((usize, usize), &Operator)> {
        self.pairs.iter().cloned().zip(self.blocks[time_index].iter())
    }

    /// Sum of all blocks at one time.
    pub fn reassemble(&self, time_index: usize) -> Operator {
        let dim = self.blocks[time_index]
            .first()
            .map(|b| b.nrows())
            .unwrap_or(0);
        self.blocks[time_index]
            .iter()
            .fold(zeros(dim), |acc, b| acc + b)
    }

    /// `tr rho_(m,m)(t)`, zero for sectors the cascade never reaches.
    pub fn sector_weight(&self, time_index: usize, m: usize) -> f64 {
        self.block(time_index, (m, m))
            .map(|b| trace(b).re)
            .unwrap_or(0.0)
    }

    /// `max_{i != j} max|rho_i rho_j|` over diagonal blocks.
    pub fn orthogonality_violation(&self, time_index: usize) -> f64 {
        let diag: Vec<&Operator> = self
            .pairs
            .iter()
            .zip(&self.blocks[time_index])
            .filter(|((m, n), _)| m == n)
            .map(|(_, b)| b)
            .collect();
        let mut worst = 0.0_f64;
        for (i, a) in diag.iter().enumerate() {
            for (j, b) in diag.iter().enumerate() {
                if i != j {
                    worst = worst.max(max_norm(&(*a * *b)));
                }
            }
        }
        worst
    }

    /// Largest entrywise distance of the reassembled state to a reference evolution.
    pub fn max_distance(&self, reference: &EvolutionResult) -> Result<f64> {
        if reference.times.len() != self.times.len() {
            return Err(Error::Dimension("time grids differ".into()));
        }
        Ok((0..self.times.len())
            .map(|k| max_abs_diff(&self.reassemble(k), &reference.states[k]))
            .fold(0.0, f64::max))
    }
}

/// Integrates the sector cascade
/// `dX_mn/dt = -i(B X_mn - X_mn B^dagger) + sum_w sum_ab gamma_ab A_b(w) X_m'n' A_a(w)^dagger`,
/// where `(m', n')` is the pair lying `w` above `(m, n)` on both sides.
///
/// All reachable blocks share one adaptive step sequence; the right-hand side
/// is evaluated pair by pair from the highest total energy down, so each block
/// only reads blocks above it.
pub fn cascade_solve(
    blocks: &[SectorBlock],
    generator: &EffectiveGenerator,
    d: &BohrDecomposition,
    times: &[f64],
    opts: &CascadeOptions,
) -> Result<SectorSolution> {
    if generator.dim() != d.dim() {
        return Err(Error::Dimension("generator and decomposition dimensions differ".into()));
    }
    let sectors = Sectors::from_spectrum(d.spectrum());
    let e = sectors.energies().to_vec();
    let nsec = sectors.len();
    for b in blocks {
        if b.pair.0 >= nsec || b.pair.1 >= nsec || b.block.nrows() != d.dim() {
            return Err(Error::Dimension(format!("block {:?} does not fit the spectrum", b.pair)));
        }
    }

    // transitions (from -> to) per energy-lowering term, descending indices
    let term_transitions: Vec<Vec<(usize, usize)>> = generator
        .terms()
        .iter()
        .map(|t| {
            d.transitions(t.index)
                .iter()
                .map(|&(f, to)| (sectors.from_level(f), sectors.from_level(to)))
                .collect()
        })
        .collect();

    // reachable pairs and feeding edges
    let mut index: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    let mut queue: VecDeque<(usize, usize)> = VecDeque::new();
    for b in blocks {
        if !index.contains_key(&b.pair) {
            index.insert(b.pair, pairs.len());
            pairs.push(b.pair);
            queue.push_back(b.pair);
        }
    }
    let mut edges: Vec<((usize, usize), (usize, usize), usize)> = Vec::new();
    while let Some((ms, ns)) = queue.pop_front() {
        for (k, tr) in term_transitions.iter().enumerate() {
            for &(_, mt) in tr.iter().filter(|(f, _)| *f == ms) {
                for &(_, nt) in tr.iter().filter(|(f, _)| *f == ns) {
                    if e[mt] + e[nt] >= e[ms] + e[ns] {
                        return Err(Error::CyclicFeeding {
                            from: (ms, ns),
                            to: (mt, nt),
                        });
                    }
                    edges.push(((ms, ns), (mt, nt), k));
                    if !index.contains_key(&(mt, nt)) {
                        index.insert((mt, nt), pairs.len());
                        pairs.push((mt, nt));
                        queue.push_back((mt, nt));
                    }
                }
            }
        }
    }

    // top-down order
    pairs.sort_by(|a, b| (e[b.0] + e[b.1]).total_cmp(&(e[a.0] + e[a.1])).then(a.cmp(b)));
    let position: BTreeMap<(usize, usize), usize> =
        pairs.iter().enumerate().map(|(k, &p)| (p, k)).collect();

    let mut layouts = Vec::with_capacity(pairs.len());
    let mut offset = 0;
    for &(m, n) in &pairs {
        let (rows, cols) = (sectors.bases[m].ncols(), sectors.bases[n].ncols());
        layouts.push(PairLayout {
            pair: (m, n),
            rows,
            cols,
            offset,
        });
        offset += rows * cols;
    }
    let state_len = offset;

    let reduced_b: Vec<Operator> = (0..nsec).map(|m| sectors.reduce(generator.b(), m, m)).collect();
    let reduced_bd: Vec<Operator> = reduced_b.iter().map(|b| b.adjoint()).collect();

    let mut feeds: Vec<Feed> = Vec::with_capacity(edges.len());
    for &((ms, ns), (mt, nt), k) in &edges {
        let term = &generator.terms()[k];
        let nch = term.ops.len();
        let left: Vec<Operator> = (0..nch).map(|b| sectors.reduce(&term.ops[b], mt, ms)).collect();
        let right: Vec<Operator> = (0..nch)
            .map(|a| sectors.reduce(&term.ops[a], nt, ns).adjoint())
            .collect();
        let mut terms = Vec::new();
        for a in 0..nch {
            for b in 0..nch {
                let g = term.gamma[(a, b)];
                if g != C64::new(0.0, 0.0) && max_norm(&left[b]) > 0.0 && max_norm(&right[a]) > 0.0 {
                    terms.push((g, left[b].clone(), right[a].clone()));
                }
            }
        }
        if !terms.is_empty() {
            feeds.push(Feed {
                source: position[&(ms, ns)],
                target: position[&(mt, nt)],
                terms,
            });
        }
    }
    feeds.sort_by_key(|f| (f.source, f.target));

    let mut y0 = StateVector::zeros(state_len);
    for b in blocks {
        let lay = &layouts[position[&b.pair]];
        let x = sectors.reduce(&b.block, lay.pair.0, lay.pair.1);
        for (k, z) in x.iter().enumerate() {
            y0[lay.offset + k] += *z;
        }
    }

    let view = |y: &StateVector, lay: &PairLayout| -> Operator {
        Operator::from_column_slice(
            lay.rows,
            lay.cols,
            &y.as_slice()[lay.offset..lay.offset + lay.rows * lay.cols],
        )
    };
    let rhs = |_t: f64, y: &StateVector| -> StateVector {
        let mut out = StateVector::zeros(state_len);
        let current: Vec<Operator> = layouts.iter().map(|lay| view(y, lay)).collect();
        for (lay, x) in layouts.iter().zip(&current) {
            let (m, n) = lay.pair;
            let dx = (&reduced_b[m] * x - x * &reduced_bd[n]) * -I;
            out.as_mut_slice()[lay.offset..lay.offset + lay.rows * lay.cols]
                .copy_from_slice(dx.as_slice());
        }
        for f in &feeds {
            let src = &current[f.source];
            let lay = &layouts[f.target];
            let slot = &mut out.as_mut_slice()[lay.offset..lay.offset + lay.rows * lay.cols];
            for (g, l, r) in &f.terms {
                let contrib = l * src * r * *g;
                for (o, z) in slot.iter_mut().zip(contrib.iter()) {
                    *o += *z;
                }
            }
        }
        out
    };

    let (ys, _stats) = integrate(rhs, 0.0, &y0, times, &opts.ode)?;

    let blocks_out = ys
        .iter()
        .map(|y| {
            layouts
                .iter()
                .map(|lay| sectors.expand(&view(y, lay), lay.pair.0, lay.pair.1))
                .collect()
        })
        .collect();

    let mut initial_pairs: Vec<(usize, usize)> = blocks.iter().map(|b| b.pair).collect();
    initial_pairs.sort_unstable();
    initial_pairs.dedup();
    Ok(SectorSolution {
        times: times.to_vec(),
        sector_energies: e,
        pairs,
        initial_pairs,
        blocks: blocks_out,
    })
}

/// Jump-count law `P_k(t) = tr rho_(N-k)(t)` for a start inside one sector.
#[derive(Debug, Clone)]
pub struct JumpDistribution {
    pub times: Vec<f64>,
    /// Descending index of the starting sector.
    pub initial_sector: usize,
    /// `probabilities[time][k]`, `k = 0..=` number of sectors below the start.
    pub probabilities: Vec<Vec<f64>>,
}

impl JumpDistribution {
    pub fn max_jumps(&self) -> usize {
        self.probabilities.first().map(|p| p.len() - 1).unwrap_or(0)
    }
}

pub fn jump_count_distribution(s: &SectorSolution) -> Result<JumpDistribution> {
    let initial = match s.initial_pairs() {
        [(m, n)] if m == n => *m,
        other => {
            return Err(Error::MixedSectorInitialState(format!(
                "initial blocks occupy sector pairs {other:?}"
            )))
        }
    };
    let nsec = s.sector_energies().len();
    let probabilities = (0..s.times().len())
        .map(|t| {
            (initial..nsec)
                .map(|m| s.sector_weight(t, m))
                .collect::<Vec<f64>>()
        })
        .collect();
    Ok(JumpDistribution {
        times: s.times().to_vec(),
        initial_sector: initial,
        probabilities,
    })
}
