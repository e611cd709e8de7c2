//! Acceptance criteria, one verdict line each.

use std::io::Write;
use std::time::Instant;

use nalgebra::SymmetricEigen;
use qcascade_core::cascade::{closed_form_block, jump_count_distribution, CascadeOptions};
use qcascade_core::eigenops::{default_freq_tol, BohrDecomposition};
use qcascade_core::models::{
    concurrence, model_damped_cavity, model_n_atoms_cavity, model_two_atoms, random_model, singlet,
    ModelSpec,
};
use qcascade_core::operator::{
    basis_state, c, default_cluster_tol, hermitian_eigensystem, max_abs_diff, Operator,
};
use qcascade_core::oracle::uniform_grid;
use qcascade_core::trajectory::{
    ensemble_average, jump_count_histogram, run_ensemble, InitialEnsemble, TrajectorySimulator,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn grid_for(spec: &ModelSpec, span: f64, points: usize) -> Vec<f64> {
    let gamma = spec.prepare().unwrap().max_decay_rate().unwrap();
    uniform_grid(span / gamma, points)
}

fn cascade_vs_oracle(spec: &ModelSpec) -> f64 {
    let p = spec.prepare().unwrap();
    let times = grid_for(spec, 5.0, 50);
    let s = p.cascade(&times, true, &CascadeOptions::default()).unwrap();
    s.max_distance(&p.oracle(&times).unwrap()).unwrap()
}

fn equivalence() -> Verdict {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    worst = worst.max(cascade_vs_oracle(&model_damped_cavity(5, 1.0, 1.0).unwrap()));
    let atoms = model_two_atoms(1.0, 1.0, 0.8, 0.3).unwrap();
    worst = worst.max(cascade_vs_oracle(&atoms));
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..20 {
        let dim = rng.random_range(2..=8);
        worst = worst.max(cascade_vs_oracle(&random_model(&mut rng, dim).unwrap()));
    }
    let elapsed = start.elapsed().as_secs_f64();
    verdict(
        worst <= 1e-8 && elapsed <= 60.0,
        format!("max distance {worst:.3e} (<= 1e-8), {elapsed:.1} s (<= 60 s)"),
    )
}

fn photocounting() -> Verdict {
    let kappa = 1.0;
    let spec = model_damped_cavity(2, 1.0, kappa).unwrap();
    let p = spec.prepare().unwrap();
    let t = std::f64::consts::LN_2 / kappa;
    let times = [0.0, t];
    let law = jump_count_distribution(&p.cascade(&times, true, &CascadeOptions::default()).unwrap()).unwrap();
    let expected = [0.25, 0.5, 0.25];
    let exact_err = (0..3)
        .map(|k| (law.probabilities[1][k] - expected[k]).abs())
        .fold(0.0, f64::max);

    let sim = TrajectorySimulator::new(&p.generator(true).unwrap(), p.channels().unwrap(), &times).unwrap();
    let init = InitialEnsemble::from_density(&spec.initial_state).unwrap();
    let hist = jump_count_histogram(&run_ensemble(&sim, &init, 20_000, 7).unwrap(), t);
    let mut mc_ratio: f64 = 0.0;
    for (k, &pk) in expected.iter().enumerate() {
        let got = hist.probabilities.get(k).copied().unwrap_or(0.0);
        mc_ratio = mc_ratio.max((got - pk).abs() / hist.std_error_at(pk));
    }
    let extra: f64 = hist.probabilities.iter().skip(3).sum();
    verdict(
        exact_err <= 1e-9 && mc_ratio <= 3.0 && extra == 0.0,
        format!("cascade error {exact_err:.3e} (<= 1e-9), MC deviation {mc_ratio:.2} sigma (<= 3)"),
    )
}

fn trapped_entanglement() -> Verdict {
    let gamma = 1.0;
    let spec = model_two_atoms(1.0, gamma, gamma, 0.2)
        .unwrap()
        .with_initial_pure(&basis_state(4, 2))
        .unwrap();
    let p = spec.prepare().unwrap();
    let times = [0.0, 40.0 / gamma];
    let s = p.cascade(&times, true, &CascadeOptions::default()).unwrap();
    let rho = s.reassemble(1);
    let conc = concurrence(&rho).unwrap();
    let sv = singlet();
    let singlet_pop = (sv.adjoint() * &rho * &sv)[(0, 0)].re;
    let law = jump_count_distribution(&s).unwrap();
    let n = law.max_jumps();
    let fewer: f64 = law.probabilities[1][..n].iter().sum();
    let pass = (conc - 0.5).abs() <= 1e-6 && (singlet_pop - 0.5).abs() <= 1e-8 && (fewer - 0.5).abs() <= 1e-6;
    verdict(
        pass,
        format!("concurrence {conc:.9}, singlet population {singlet_pop:.10}, P(< {n} clicks) {fewer:.9}"),
    )
}

fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> Operator {
    let m = Operator::from_fn(n, n, |_, _| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
    &m + m.adjoint()
}

/// `V diag(levels) V^dagger`; half the cases draw levels from a small integer
/// set so that degeneracies and repeated Bohr gaps occur.
fn random_spectrum_hamiltonian(rng: &mut ChaCha8Rng, n: usize) -> Operator {
    let v = SymmetricEigen::new(random_hermitian(rng, n)).eigenvectors;
    let degenerate = rng.random::<bool>();
    let levels: Vec<f64> = (0..n)
        .map(|_| {
            if degenerate {
                rng.random_range(0..4) as f64
            } else {
                4.0 * rng.random::<f64>()
            }
        })
        .collect();
    let diag = Operator::from_diagonal(&nalgebra::DVector::from_iterator(n, levels.iter().map(|&e| c(e, 0.0))));
    let h = &v * diag * v.adjoint();
    (&h + h.adjoint()) * c(0.5, 0.0)
}

fn eigenoperator_algebra() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut worst: f64 = 0.0;
    let cases = 120;
    for _ in 0..cases {
        let n = rng.random_range(2..=10);
        let h = random_spectrum_hamiltonian(&mut rng, n);
        let channels = rng.random_range(1..=3);
        let couplings = (0..channels).map(|_| random_hermitian(&mut rng, n)).collect();
        let spectrum = hermitian_eigensystem(&h, default_cluster_tol(&h)).unwrap();
        let tol = default_freq_tol(&spectrum);
        let d = BohrDecomposition::new(spectrum, couplings, tol).unwrap();
        worst = worst.max(d.verify_algebra().max());
    }
    verdict(worst <= 1e-10, format!("{cases} cases, worst violation {worst:.3e} (<= 1e-10)"))
}

fn shipped_models() -> Vec<ModelSpec> {
    vec![
        model_damped_cavity(5, 1.0, 1.0).unwrap(),
        model_damped_cavity(1, 1.0, 0.5).unwrap(),
        model_two_atoms(1.0, 1.0, 0.8, 0.3).unwrap(),
        model_two_atoms(1.0, 1.0, 1.0, 0.2)
            .unwrap()
            .with_initial_pure(&basis_state(4, 2))
            .unwrap(),
        model_n_atoms_cavity(&[0.1], 1.0, 0.2, 0.05, 3).unwrap(),
        model_n_atoms_cavity(&[0.1, 0.07], 1.0, 0.2, 0.05, 2).unwrap(),
    ]
}

fn block_triangularity() -> Verdict {
    let mut specs = shipped_models();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for dim in 2..=8 {
        for _ in 0..3 {
            specs.push(random_model(&mut rng, dim).unwrap());
        }
    }
    let mut worst: f64 = 0.0;
    for spec in &specs {
        let p = spec.prepare().unwrap();
        let v = p
            .liouvillian
            .selection_rule_violation(p.decomposition.spectrum(), p.decomposition.freq_tol());
        worst = worst.max(v);
    }
    verdict(
        worst <= 1e-13,
        format!("{} generators, worst off-block magnitude {worst:.3e} (<= 1e-13)", specs.len()),
    )
}

fn state_health() -> Verdict {
    let mut trace_dev: f64 = 0.0;
    let mut herm_dev: f64 = 0.0;
    let mut min_eig = f64::INFINITY;
    for spec in shipped_models() {
        let times = grid_for(&spec, 20.0, 50);
        let res = spec.prepare().unwrap().oracle(&times).unwrap();
        let w = res.worst();
        trace_dev = trace_dev.max(w.trace_deviation);
        herm_dev = herm_dev.max(w.hermiticity_deviation);
        min_eig = min_eig.min(w.min_eigenvalue);
    }
    verdict(
        trace_dev <= 1e-8 && herm_dev <= 1e-9 && min_eig >= -1e-8,
        format!("|tr-1| {trace_dev:.3e}, Hermiticity {herm_dev:.3e}, min eigenvalue {min_eig:.3e}"),
    )
}

fn monte_carlo() -> Verdict {
    let kappa = 1.0;
    let spec = model_damped_cavity(1, 1.0, kappa).unwrap();
    let p = spec.prepare().unwrap();
    let times = uniform_grid(3.0 / kappa, 13);
    let sim = TrajectorySimulator::new(&p.generator(true).unwrap(), p.channels().unwrap(), &times).unwrap();
    let init = InitialEnsemble::from_density(&spec.initial_state).unwrap();
    let records = run_ensemble(&sim, &init, 10_000, 11).unwrap();
    let mut survival_ratio: f64 = 0.0;
    for &t in &times[1..] {
        let hist = jump_count_histogram(&records, t);
        let expected = (-kappa * t).exp();
        survival_ratio = survival_ratio.max((hist.probabilities[0] - expected).abs() / hist.std_error_at(expected));
    }
    let est = ensemble_average(&records, &times).unwrap();
    let band = est.band_ratio(&p.oracle(&times).unwrap(), 3.0, 0.01).unwrap();
    verdict(
        survival_ratio <= 3.0 && band <= 1.0,
        format!("survival deviation {survival_ratio:.2} sigma (<= 3), ensemble band ratio {band:.2} (<= 1)"),
    )
}

fn closed_form() -> Verdict {
    let spec = model_damped_cavity(5, 1.0, 0.8).unwrap();
    let p = spec.prepare().unwrap();
    let g = p.generator(true).unwrap();
    let times = uniform_grid(4.0, 9);
    let s = p.cascade(&times, true, &CascadeOptions::default()).unwrap();
    let mut worst: f64 = 0.0;
    for (k, &t) in times.iter().enumerate() {
        for j in 0..=2 {
            let cf = closed_form_block(&spec.initial_state, &g, j, t, 48).unwrap();
            let block = s.block(k, (j, j)).unwrap();
            worst = worst.max(max_abs_diff(&cf, block));
        }
    }
    verdict(worst <= 1e-6, format!("j <= 2, worst block difference {worst:.3e} (<= 1e-6)"))
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Verdict); 8] = [
        ("1 cascade/master-equation equivalence", equivalence),
        ("2 photocounting", photocounting),
        ("3 trapped entanglement and click deficit", trapped_entanglement),
        ("4 eigenoperator algebra", eigenoperator_algebra),
        ("5 block triangularity", block_triangularity),
        ("6 state health", state_health),
        ("7 Monte Carlo consistency", monte_carlo),
        ("8 closed-form cross-check", closed_form),
    ];
    let mut failed = Vec::new();
    for (name, check) in criteria {
        let v = check();
        let tag = if v.pass { "PASS" } else { "FAIL" };
        // bypass libtest capture so the verdicts show in plain `cargo test` output
        let mut out = std::io::stdout().lock();
        writeln!(out, "{tag} criterion {name}: {}", v.detail).unwrap();
        out.flush().unwrap();
        if !v.pass {
            failed.push(name);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
