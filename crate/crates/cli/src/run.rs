use std::fs;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use log::{info, warn};
use qcascade_core::cascade::{jump_count_distribution, CascadeOptions, JumpDistribution, SectorSolution};
use qcascade_core::models::{concurrence, dfs_basis, populations, ModelSpec, PreparedModel};
use qcascade_core::operator::{commutator, hermiticity_deviation, max_norm, Operator};
use qcascade_core::oracle::{uniform_grid, Diagnostics, EvolutionResult};
use qcascade_core::trajectory::{
    ensemble_average, jump_count_histogram, run_ensemble, EnsembleEstimate, InitialEnsemble,
    TrajectoryRecord, TrajectorySimulator,
};

use crate::error::{CliError, CliResult};
use crate::model_file::{parse_builtin, parse_model};

/// Monte Carlo entries must lie within `max(MC_SIGMAS * sigma, MC_FLOOR)` of the oracle.
/// Every entry at every output time is tested at once, so the band is wider
/// than a single 3 sigma test to keep false alarms rare.
pub const MC_SIGMAS: f64 = 5.0;
pub const MC_FLOOR: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Solver {
    Oracle,
    Nud,
    Mc,
    All,
}

impl Solver {
    fn oracle(self) -> bool {
        matches!(self, Solver::Oracle | Solver::All)
    }

    fn nud(self) -> bool {
        matches!(self, Solver::Nud | Solver::All)
    }

    fn mc(self) -> bool {
        matches!(self, Solver::Mc | Solver::All)
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    /// Defaults to `5 / Gamma_max`.
    pub t_max: Option<f64>,
    pub points: usize,
    pub solver: Solver,
    pub trajectories: usize,
    pub seed: u64,
    pub include_lamb_shift: bool,
    /// Allowed cascade-vs-oracle distance.
    pub tol: f64,
    pub check: bool,
    pub out: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            t_max: None,
            points: 50,
            solver: Solver::Nud,
            trajectories: 1000,
            seed: 0,
            include_lamb_shift: true,
            tol: 1e-8,
            check: false,
            out: PathBuf::from("."),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> CliResult<()> {
        if let Some(t) = self.t_max {
            if !(t > 0.0) || !t.is_finite() {
                return Err(CliError::Validation(format!("--t-max must be positive, got {t}")));
            }
        }
        if self.points < 2 {
            return Err(CliError::Validation("--points must be at least 2".into()));
        }
        if self.trajectories < 1 {
            return Err(CliError::Validation("--trajectories must be at least 1".into()));
        }
        if !(self.tol > 0.0) {
            return Err(CliError::Validation("--tol must be positive".into()));
        }
        Ok(())
    }

    fn times(&self, p: &PreparedModel) -> Vec<f64> {
        let t_max = self.t_max.unwrap_or_else(|| {
            let rate = p.max_decay_rate().unwrap_or(0.0);
            if rate > 0.0 {
                5.0 / rate
            } else {
                1.0
            }
        });
        uniform_grid(t_max, self.points)
    }
}

/// Reads a model file, or builds a builtin when `source` is a call like `two_atoms(gamma=1)`.
pub fn load_model(source: &str) -> CliResult<ModelSpec> {
    let path = Path::new(source);
    if !path.exists() && source.trim_end().ends_with(')') {
        return parse_builtin(source).map_err(CliError::Validation);
    }
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{source}: {e}")))?;
    parse_model(&text).map_err(|e| CliError::Validation(format!("{source}: {e}")))
}

#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub limit: f64,
    /// `value >= limit` passes instead of `value <= limit`.
    pub lower_bound: bool,
}

impl Check {
    fn upper(name: &str, value: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            value,
            limit,
            lower_bound: false,
        }
    }

    fn lower(name: &str, value: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            value,
            limit,
            lower_bound: true,
        }
    }

    pub fn passed(&self) -> bool {
        if self.lower_bound {
            self.value >= self.limit
        } else {
            self.value <= self.limit
        }
    }
}

impl std::fmt::Display for Check {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let tag = if self.passed() { "ok  " } else { "FAIL" };
        let op = if self.lower_bound { ">=" } else { "<=" };
        write!(f, "{tag} {:<32} {:>11.3e} {op} {:.0e}", self.name, self.value, self.limit)
    }
}

fn health_checks(prefix: &str, states: &[Operator]) -> Vec<Check> {
    let mut worst_trace: f64 = 0.0;
    let mut worst_herm: f64 = 0.0;
    let mut min_eig = f64::INFINITY;
    for rho in states {
        let d = Diagnostics::of(rho);
        worst_trace = worst_trace.max(d.trace_deviation);
        worst_herm = worst_herm.max(d.hermiticity_deviation);
        min_eig = min_eig.min(d.min_eigenvalue);
    }
    vec![
        Check::upper(&format!("{prefix} |tr - 1|"), worst_trace, 1e-8),
        Check::upper(&format!("{prefix} Hermiticity"), worst_herm, 1e-9),
        Check::lower(&format!("{prefix} min eigenvalue"), min_eig, -1e-8),
    ]
}

/// Structural invariants of the assembled model.
pub fn model_checks(p: &PreparedModel) -> Vec<Check> {
    let l = &p.liouvillian;
    let mut checks = vec![
        Check::upper("eigenoperator algebra", p.decomposition.verify_algebra().max(), 1e-10),
        Check::upper("generator parts residual", l.parts_residual(), 1e-12),
        Check::upper("trace preservation", l.trace_preservation_violation(), 1e-10),
    ];
    if p.spec.tensor.is_zero_temperature() {
        checks.push(Check::upper(
            "block triangularity",
            l.selection_rule_violation(p.decomposition.spectrum(), p.decomposition.freq_tol()),
            1e-13,
        ));
    }
    let hls = l.lamb_shift_operator();
    let scale = (max_norm(&p.spec.h_s) * max_norm(hls)).max(1.0);
    checks.push(Check::upper("Lamb shift Hermiticity", hermiticity_deviation(hls), 1e-11));
    checks.push(Check::upper(
        "[H_LS, H_S] (relative)",
        max_norm(&commutator(hls, &p.spec.h_s)) / scale,
        1e-10,
    ));
    checks
}

fn fail_on(checks: &[Check]) -> CliResult<()> {
    let failed: Vec<String> = checks.iter().filter(|c| !c.passed()).map(|c| c.name.clone()).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Validation(format!("invariant checks failed: {}", failed.join(", "))))
    }
}

/// What a command produced, for the terminal summary.
#[derive(Debug, Default)]
pub struct Report {
    pub lines: Vec<String>,
    pub files: Vec<PathBuf>,
}

impl Report {
    fn note(&mut self, s: impl Into<String>) {
        self.lines.push(s.into());
    }

    fn checks(&mut self, checks: &[Check]) {
        self.lines.extend(checks.iter().map(|c| c.to_string()));
    }
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

struct Csv {
    path: PathBuf,
    writer: csv::Writer<fs::File>,
}

impl Csv {
    fn create(dir: &Path, name: &str, header: &[String]) -> CliResult<Self> {
        fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        let path = dir.join(name);
        let mut writer = csv::Writer::from_path(&path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        writer.write_record(header)?;
        Ok(Self { path, writer })
    }

    fn row(&mut self, fields: Vec<String>) -> CliResult<()> {
        self.writer.write_record(&fields)?;
        Ok(())
    }

    fn finish(mut self, report: &mut Report) -> CliResult<()> {
        self.writer.flush()?;
        report.files.push(self.path);
        Ok(())
    }
}

fn write_states(dir: &Path, times: &[f64], states: &[Operator], report: &mut Report) -> CliResult<()> {
    let d = states[0].nrows();
    let mut header = vec!["time".to_string()];
    for i in 0..d {
        for j in 0..d {
            header.push(format!("re_{i}_{j}"));
            header.push(format!("im_{i}_{j}"));
        }
    }
    let mut csv = Csv::create(dir, "state.csv", &header)?;
    for (t, rho) in times.iter().zip(states) {
        let mut row = vec![num(*t)];
        for i in 0..d {
            for j in 0..d {
                row.push(num(rho[(i, j)].re));
                row.push(num(rho[(i, j)].im));
            }
        }
        csv.row(row)?;
    }
    csv.finish(report)
}

fn write_observables(
    dir: &Path,
    spec: &ModelSpec,
    times: &[f64],
    states: &[Operator],
    report: &mut Report,
) -> CliResult<()> {
    let d = spec.dim();
    let two_qubits = spec.dims == [2, 2];
    let mut header = vec!["time".to_string()];
    header.extend((0..d).map(|i| format!("p_{i}")));
    header.extend((0..d.saturating_sub(1)).map(|i| format!("abs_rho_{i}_{}", i + 1)));
    header.push("purity".into());
    if two_qubits {
        header.push("concurrence".into());
    }
    let mut csv = Csv::create(dir, "observables.csv", &header)?;
    for (t, rho) in times.iter().zip(states) {
        let mut row = vec![num(*t)];
        row.extend(populations(rho).into_iter().map(num));
        row.extend((0..d.saturating_sub(1)).map(|i| num(rho[(i, i + 1)].norm())));
        row.push(num((rho * rho).trace().re));
        if two_qubits {
            // Monte Carlo estimates can sit marginally outside the state space
            let c = concurrence(&((rho + rho.adjoint()) * nalgebra::Complex::new(0.5, 0.0)));
            row.push(c.map(num).unwrap_or_else(|_| "nan".into()));
        }
        csv.row(row)?;
    }
    csv.finish(report)
}

fn write_jump_table(dir: &Path, name: &str, times: &[f64], rows: &[Vec<f64>], report: &mut Report) -> CliResult<()> {
    let width = rows.iter().map(Vec::len).max().unwrap_or(1);
    let mut header = vec!["time".to_string()];
    header.extend((0..width).map(|k| format!("P_{k}")));
    let mut csv = Csv::create(dir, name, &header)?;
    for (t, r) in times.iter().zip(rows) {
        let mut row = vec![num(*t)];
        row.extend((0..width).map(|k| num(r.get(k).copied().unwrap_or(0.0))));
        csv.row(row)?;
    }
    csv.finish(report)
}

fn histograms(records: &[TrajectoryRecord], times: &[f64]) -> Vec<Vec<f64>> {
    times
        .iter()
        .map(|&t| jump_count_histogram(records, t).probabilities)
        .collect()
}

struct McRun {
    records: Vec<TrajectoryRecord>,
    estimate: Option<EnsembleEstimate>,
}

fn run_mc(p: &PreparedModel, cfg: &RunConfig, times: &[f64]) -> CliResult<McRun> {
    let sim = TrajectorySimulator::new(&p.generator(cfg.include_lamb_shift)?, p.channels()?, times)?;
    let init = InitialEnsemble::from_density(&p.spec.initial_state)?;
    info!("running {} trajectories with seed {}", cfg.trajectories, cfg.seed);
    let records = run_ensemble(&sim, &init, cfg.trajectories, cfg.seed)?;
    let estimate = if records.len() >= 2 {
        Some(ensemble_average(&records, times)?)
    } else {
        None
    };
    Ok(McRun { records, estimate })
}

fn mc_mean_states(mc: &McRun) -> Vec<Operator> {
    match &mc.estimate {
        Some(e) => e.mean.clone(),
        None => mc.records[0].states.iter().map(|psi| psi * psi.adjoint()).collect(),
    }
}

/// `max |rho_hat - rho| / max(MC_SIGMAS sigma, MC_FLOOR)` over entries at one time.
fn band_ratio_at(est: &EnsembleEstimate, reference: &Operator, k: usize) -> f64 {
    let m = &est.mean[k];
    let s = &est.std_error[k];
    let mut worst: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let band = (MC_SIGMAS * s[(i, j)]).max(MC_FLOOR);
            worst = worst.max((m[(i, j)] - reference[(i, j)]).norm() / band);
        }
    }
    worst
}

fn nud_states(s: &SectorSolution, n: usize) -> Vec<Operator> {
    (0..n).map(|k| s.reassemble(k)).collect()
}

fn worst_at(times: &[f64], values: &[f64]) -> (f64, f64) {
    values
        .iter()
        .zip(times)
        .fold((0.0, times[0]), |acc, (&v, &t)| if v > acc.0 { (v, t) } else { acc })
}

/// Runs the selected solvers and writes `state.csv`, `observables.csv`,
/// `jumps.csv` and, when several solvers run, `compare.csv`.
pub fn simulate(spec: &ModelSpec, cfg: &RunConfig) -> CliResult<Report> {
    cfg.validate()?;
    let p = spec.prepare()?;
    let times = cfg.times(&p);
    let mut report = Report::default();
    report.note(format!(
        "dimension {}, {} channels, t_max = {}, {} points",
        spec.dim(),
        spec.couplings.len(),
        times.last().unwrap(),
        times.len()
    ));

    let oracle = if cfg.solver.oracle() || cfg.check {
        Some(p.oracle(&times)?)
    } else {
        None
    };
    let nud = if cfg.solver.nud() {
        Some(p.cascade(&times, cfg.include_lamb_shift, &CascadeOptions::default())?)
    } else {
        None
    };
    let mc = if cfg.solver.mc() {
        Some(run_mc(&p, cfg, &times)?)
    } else {
        None
    };

    let primary = if let Some(s) = &nud {
        nud_states(s, times.len())
    } else if let Some(m) = &mc {
        mc_mean_states(m)
    } else {
        oracle.as_ref().unwrap().states.clone()
    };
    write_states(&cfg.out, &times, &primary, &mut report)?;
    write_observables(&cfg.out, spec, &times, &primary, &mut report)?;

    if let Some(s) = &nud {
        match jump_count_distribution(s) {
            Ok(law) => write_jump_table(&cfg.out, "jumps.csv", &times, &law.probabilities, &mut report)?,
            Err(e) => warn!("jumps.csv skipped: {e}"),
        }
    } else if let Some(m) = &mc {
        write_jump_table(&cfg.out, "jumps.csv", &times, &histograms(&m.records, &times), &mut report)?;
    }

    let mut agreement = Ok(());
    if cfg.solver == Solver::All {
        agreement = write_compare(&cfg.out, &times, oracle.as_ref().unwrap(), nud.as_ref().unwrap(), mc.as_ref().unwrap(), cfg.tol, &mut report)?;
    }

    if cfg.check {
        let mut checks = model_checks(&p);
        checks.extend(health_checks("oracle", &oracle.as_ref().unwrap().states));
        if let Some(s) = &nud {
            checks.extend(health_checks("cascade", &nud_states(s, times.len())));
            checks.push(Check::upper(
                "cascade sector orthogonality",
                (0..times.len()).map(|k| s.orthogonality_violation(k)).fold(0.0, f64::max),
                1e-10,
            ));
        }
        report.checks(&checks);
        fail_on(&checks)?;
    }
    agreement?;
    Ok(report)
}

#[allow(clippy::too_many_arguments)]
fn write_compare(
    dir: &Path,
    times: &[f64],
    oracle: &EvolutionResult,
    nud: &SectorSolution,
    mc: &McRun,
    tol: f64,
    report: &mut Report,
) -> CliResult<CliResult<()>> {
    let header: Vec<String> = ["time", "nud_vs_oracle", "mc_vs_oracle", "mc_sigma", "mc_band_ratio"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let mut csv = Csv::create(dir, "compare.csv", &header)?;
    let mut nud_err = Vec::with_capacity(times.len());
    let mut bands = Vec::with_capacity(times.len());
    for (k, &t) in times.iter().enumerate() {
        let reference = &oracle.states[k];
        let e_nud = qcascade_core::operator::max_abs_diff(&nud.reassemble(k), reference);
        let (e_mc, sigma, band) = match &mc.estimate {
            Some(est) => (
                qcascade_core::operator::max_abs_diff(&est.mean[k], reference),
                est.std_error[k].max(),
                band_ratio_at(est, reference, k),
            ),
            None => (f64::NAN, f64::NAN, f64::NAN),
        };
        csv.row(vec![num(t), num(e_nud), num(e_mc), num(sigma), num(band)])?;
        nud_err.push(e_nud);
        bands.push(if band.is_nan() { 0.0 } else { band });
    }
    csv.finish(report)?;

    let (worst_nud, t_nud) = worst_at(times, &nud_err);
    let (worst_band, t_band) = worst_at(times, &bands);
    report.note(format!("cascade vs oracle: max {worst_nud:.3e} at t = {t_nud} (limit {tol:.0e})"));
    report.note(format!(
        "Monte Carlo vs oracle: worst band ratio {worst_band:.3} at t = {t_band} (limit 1, band max({MC_SIGMAS} sigma, {MC_FLOOR}))"
    ));
    if worst_nud > tol {
        return Ok(Err(CliError::Disagreement {
            what: "cascade vs oracle max-norm distance".into(),
            value: worst_nud,
            limit: tol,
            time: t_nud,
        }));
    }
    if worst_band > 1.0 {
        return Ok(Err(CliError::Disagreement {
            what: "Monte Carlo band ratio".into(),
            value: worst_band,
            limit: 1.0,
            time: t_band,
        }));
    }
    Ok(Ok(()))
}

/// Parses and checks a model without propagating beyond the default grid.
pub fn validate(spec: &ModelSpec, cfg: &RunConfig) -> CliResult<Report> {
    cfg.validate()?;
    let p = spec.prepare()?;
    let mut report = Report::default();
    report.note(format!("dimension {} (subsystems {:?})", spec.dim(), spec.dims));
    for (k, (name, _)) in spec.couplings.iter().enumerate() {
        report.note(format!("channel {k}: {name}"));
    }
    let freqs: Vec<String> = p.decomposition.frequencies().iter().map(|w| format!("{w:.6}")).collect();
    report.note(format!("Bohr frequencies: {}", freqs.join(", ")));
    if spec.tensor.is_zero_temperature() {
        report.note("bath: zero temperature");
    } else {
        report.note(format!(
            "bath: beta = {}; only the oracle propagator applies",
            spec.tensor.beta()
        ));
    }
    let times = cfg.times(&p);
    let mut checks = model_checks(&p);
    checks.extend(health_checks("oracle", &p.oracle(&times)?.states));
    report.checks(&checks);
    fail_on(&checks)?;
    Ok(report)
}

/// Forces all three solvers and fails on disagreement.
pub fn compare(spec: &ModelSpec, cfg: &RunConfig) -> CliResult<Report> {
    let cfg = RunConfig {
        solver: Solver::All,
        ..cfg.clone()
    };
    simulate(spec, &cfg)
}

/// Monte Carlo run with one row per jump in `trajectories.csv`.
pub fn traj(spec: &ModelSpec, cfg: &RunConfig) -> CliResult<Report> {
    cfg.validate()?;
    let p = spec.prepare()?;
    let times = cfg.times(&p);
    let mc = run_mc(&p, cfg, &times)?;
    let mut report = Report::default();
    let states = mc_mean_states(&mc);
    write_states(&cfg.out, &times, &states, &mut report)?;
    write_observables(&cfg.out, spec, &times, &states, &mut report)?;
    write_jump_table(&cfg.out, "jumps.csv", &times, &histograms(&mc.records, &times), &mut report)?;

    let header: Vec<String> = ["trajectory", "time", "omega", "channel"].iter().map(|s| s.to_string()).collect();
    let mut csv = Csv::create(&cfg.out, "trajectories.csv", &header)?;
    let mut total = 0;
    for r in &mc.records {
        for j in &r.jumps {
            csv.row(vec![r.stream.to_string(), num(j.time), num(j.omega), j.channel.to_string()])?;
            total += 1;
        }
    }
    csv.finish(&mut report)?;
    report.note(format!(
        "{} trajectories, {total} jumps, mean {:.4} per trajectory",
        mc.records.len(),
        total as f64 / mc.records.len() as f64
    ));
    if let Some(est) = &mc.estimate {
        report.note(format!("largest ensemble standard error {:.3e}", est.max_std_error()));
    }
    Ok(report)
}

/// Jump-count law, from the cascade (`nud`), trajectories (`mc`) or both (`all`).
pub fn photocount(spec: &ModelSpec, cfg: &RunConfig) -> CliResult<Report> {
    cfg.validate()?;
    let p = spec.prepare()?;
    let times = cfg.times(&p);
    if cfg.solver == Solver::Oracle {
        return Err(CliError::Validation(
            "photocount needs the cascade or trajectories (--solver nud, mc or all)".into(),
        ));
    }
    let mut report = Report::default();
    let law: Option<JumpDistribution> = if cfg.solver.nud() {
        let s = p.cascade(&times, cfg.include_lamb_shift, &CascadeOptions::default())?;
        Some(jump_count_distribution(&s)?)
    } else {
        None
    };
    if let Some(law) = &law {
        write_jump_table(&cfg.out, "jumps.csv", &times, &law.probabilities, &mut report)?;
        let last = law.probabilities.last().unwrap();
        let row: Vec<String> = last.iter().map(|p| format!("{p:.6}")).collect();
        report.note(format!("P_k at t = {}: {}", times.last().unwrap(), row.join(" ")));
    }
    if cfg.solver.mc() {
        let mc = run_mc(&p, cfg, &times)?;
        let hist = histograms(&mc.records, &times);
        let name = if law.is_some() { "jumps_mc.csv" } else { "jumps.csv" };
        write_jump_table(&cfg.out, name, &times, &hist, &mut report)?;
        if let Some(law) = &law {
            let m = mc.records.len() as f64;
            let mut ratios = Vec::with_capacity(times.len());
            for (exact, est) in law.probabilities.iter().zip(&hist) {
                let mut worst: f64 = 0.0;
                for k in 0..exact.len().max(est.len()) {
                    let pk = exact.get(k).copied().unwrap_or(0.0);
                    let qk = est.get(k).copied().unwrap_or(0.0);
                    let band = (MC_SIGMAS * (pk * (1.0 - pk) / m).max(0.0).sqrt()).max(MC_FLOOR);
                    worst = worst.max((qk - pk).abs() / band);
                }
                ratios.push(worst);
            }
            let (worst, t) = worst_at(&times, &ratios);
            report.note(format!("histogram vs cascade: worst band ratio {worst:.3} at t = {t}"));
            if worst > 1.0 {
                return Err(CliError::Disagreement {
                    what: "jump histogram band ratio".into(),
                    value: worst,
                    limit: 1.0,
                    time: t,
                });
            }
        }
    }
    Ok(report)
}

/// Decoherence-free states of `H_eff`, written to `dfs.csv`.
pub fn dfs(spec: &ModelSpec, cfg: &RunConfig) -> CliResult<Report> {
    let p = spec.prepare()?;
    let h_eff = p.effective_hamiltonian();
    let basis = dfs_basis(&p.decomposition, &spec.tensor, &h_eff)?;
    let d = spec.dim();
    let mut header = vec!["state".to_string(), "energy".to_string()];
    for i in 0..d {
        header.push(format!("re_{i}"));
        header.push(format!("im_{i}"));
    }
    let mut report = Report::default();
    let mut csv = Csv::create(&cfg.out, "dfs.csv", &header)?;
    for (k, psi) in basis.iter().enumerate() {
        let energy = (psi.adjoint() * &h_eff * psi)[(0, 0)].re;
        let mut row = vec![k.to_string(), num(energy)];
        for z in psi.iter() {
            row.push(num(z.re));
            row.push(num(z.im));
        }
        csv.row(row)?;
        let stationary = max_norm(&p.liouvillian.apply(&(psi * psi.adjoint())));
        let weight = (psi.adjoint() * &spec.initial_state * psi)[(0, 0)].re;
        report.note(format!(
            "state {k}: energy {energy:.6}, initial weight {weight:.6}, |L(rho)| {stationary:.1e}"
        ));
    }
    csv.finish(&mut report)?;
    report.note(format!("decoherence-free subspace of dimension {}", basis.len()));
    Ok(report)
}
