use super::*;
use crate::eigenops::{default_freq_tol, BohrDecomposition};
use crate::error::Error;
use crate::lindblad::{build_liouvillian, scalar_entry, SpectralEntry, SpectralTensor};
use crate::models::{model_damped_cavity, model_two_atoms, singlet};
use crate::operator::{
    basis_state, c, default_cluster_tol, hermitian_eigensystem, hermitian_eigenvalues,
    max_abs_diff, projector, trace, Operator, StateVector, ONE, ZERO,
};
use crate::oracle::{propagate_expm, uniform_grid};

fn qubit(kappa: f64) -> (Operator, SpectralTensor, BohrDecomposition) {
    let h = Operator::from_row_slice(2, 2, &[ZERO, ZERO, ZERO, ONE]);
    let sx = Operator::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]);
    let spectrum = hermitian_eigensystem(&h, 1e-9).unwrap();
    let tol = default_freq_tol(&spectrum);
    let d = BohrDecomposition::new(spectrum, vec![sx], tol).unwrap();
    let t = SpectralTensor::zero_temperature(1, vec![scalar_entry(1.0, kappa, 0.0)]).unwrap();
    (h, t, d)
}

fn plus_state() -> Operator {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    projector(&StateVector::from_vec(vec![c(r, 0.0), c(r, 0.0)]))
}

#[test]
fn split_excited_qubit_is_one_block() {
    let (_, _, d) = qubit(1.0);
    let rho = projector(&basis_state(2, 1));
    let blocks = sector_split(&rho, d.spectrum()).unwrap();
    assert_eq!(blocks.len(), 1);
    // descending order: the excited level is sector 0
    assert_eq!(blocks[0].pair, (0, 0));
}

#[test]
fn split_plus_state_has_four_half_blocks() {
    let (_, _, d) = qubit(1.0);
    let rho = plus_state();
    let blocks = sector_split(&rho, d.spectrum()).unwrap();
    assert_eq!(blocks.len(), 4);
    let mut sum = Operator::zeros(2, 2);
    for b in &blocks {
        assert!((crate::operator::max_norm(&b.block) - 0.5).abs() < 1e-15);
        sum += &b.block;
    }
    assert!(max_abs_diff(&sum, &rho) < 1e-14);
}

#[test]
fn split_eigenstate_initial_condition_is_one_block() {
    // eigenvector of H_S in a degenerate level stays inside one sector
    let spec = model_two_atoms(1.0, 1.0, 0.5, 0.0).unwrap();
    let d = spec.decomposition().unwrap();
    let blocks = sector_split(&projector(&singlet()), d.spectrum()).unwrap();
    assert_eq!(blocks.len(), 1);
    assert_eq!(blocks[0].pair.0, blocks[0].pair.1);
}

#[test]
fn qubit_generator() {
    let (h, t, d) = qubit(0.7);
    let g = effective_generator(&h, &t, &d).unwrap();
    let expected = Operator::from_row_slice(2, 2, &[ZERO, ZERO, ZERO, c(1.0, -0.35)]);
    assert!(max_abs_diff(g.b(), &expected) < 1e-15);
}

#[test]
fn cavity_generator() {
    let spec = model_damped_cavity(3, 1.0, 0.4).unwrap();
    let p = spec.prepare().unwrap();
    let g = p.generator(true).unwrap();
    let n = Operator::from_fn(4, 4, |i, j| if i == j { c(i as f64, 0.0) } else { ZERO });
    let expected = &spec.h_s - &n * c(0.0, 0.2);
    assert!(max_abs_diff(g.b(), &expected) < 1e-13);
}

#[test]
fn two_atom_decay_operator_has_collective_rates() {
    let (gamma, g12) = (1.0, 0.6);
    let spec = model_two_atoms(1.0, gamma, g12, 0.2).unwrap();
    let g = spec.prepare().unwrap().generator(true).unwrap();
    // restricted to the single-excitation span {|ge>, |eg>}
    let hp = g.h_prime();
    let sub = Operator::from_fn(2, 2, |i, j| hp[(i + 1, j + 1)]);
    let ev = hermitian_eigenvalues(&sub);
    assert!((ev[0] - (gamma - g12)).abs() < 1e-13);
    assert!((ev[1] - (gamma + g12)).abs() < 1e-13);
    // anti-Hermitian part of B is exactly -H'/2
    let anti = (g.b() - g.b().adjoint()) * c(0.5, 0.0);
    assert!(max_abs_diff(&anti, &(hp * c(0.0, -0.5))) < 1e-15);
}

#[test]
fn generator_refuses_finite_temperature() {
    let (h, _, d) = qubit(1.0);
    let t = SpectralTensor::new(
        1,
        1.0,
        vec![scalar_entry(1.0, 1.0, 0.0), scalar_entry(-1.0, 0.3, 0.0)],
    )
    .unwrap();
    assert!(matches!(effective_generator(&h, &t, &d), Err(Error::NotZeroTemperature)));
}

#[test]
fn generator_refuses_zero_frequency_dissipation() {
    let h = Operator::from_row_slice(2, 2, &[ZERO, ZERO, ZERO, ONE]);
    let sz = Operator::from_row_slice(2, 2, &[c(-1.0, 0.0), ZERO, ZERO, ONE]);
    let spectrum = hermitian_eigensystem(&h, 1e-9).unwrap();
    let d = BohrDecomposition::new(spectrum, vec![sz], 1e-8).unwrap();
    let t = SpectralTensor::zero_temperature(1, vec![scalar_entry(0.0, 0.5, 0.0)]).unwrap();
    assert!(matches!(
        effective_generator(&h, &t, &d),
        Err(Error::ZeroFrequencyDissipation { .. })
    ));
}

#[test]
fn damped_qubit_cascade_is_analytic() {
    let kappa = 0.8;
    let (h, t, d) = qubit(kappa);
    let g = effective_generator(&h, &t, &d).unwrap();
    let rho = projector(&basis_state(2, 1));
    let blocks = sector_split(&rho, d.spectrum()).unwrap();
    let times = uniform_grid(5.0, 21);
    let s = cascade_solve(&blocks, &g, &d, &times, &CascadeOptions::default()).unwrap();
    for (k, &tm) in times.iter().enumerate() {
        let top = s.block(k, (0, 0)).unwrap();
        let bottom = s.block(k, (1, 1)).unwrap();
        assert!((top[(1, 1)].re - (-kappa * tm).exp()).abs() < 1e-10);
        assert!((bottom[(0, 0)].re - (1.0 - (-kappa * tm).exp())).abs() < 1e-10);
        assert!(s.orthogonality_violation(k) < 1e-10);
    }
}

#[test]
fn zero_rates_give_pure_phases() {
    let (h, t, d) = qubit(0.0);
    let g = effective_generator(&h, &t, &d).unwrap();
    let rho = plus_state();
    let blocks = sector_split(&rho, d.spectrum()).unwrap();
    let times = uniform_grid(3.0, 7);
    let s = cascade_solve(&blocks, &g, &d, &times, &CascadeOptions::default()).unwrap();
    for (k, &tm) in times.iter().enumerate() {
        let r = s.reassemble(k);
        // rho_01(t) = rho_01(0) e^{+it} with e_0 = 0, e_1 = 1
        let expected = c(0.0, tm).exp() * 0.5;
        assert!((r[(0, 1)] - expected).norm() < 1e-10);
        assert!((r[(1, 1)].re - 0.5).abs() < 1e-12);
    }
}

#[test]
fn damped_cavity_matches_oracle() {
    let kappa = 0.5;
    let spec = model_damped_cavity(5, 1.0, kappa)
        .unwrap()
        .with_initial_pure(&basis_state(6, 3))
        .unwrap();
    let p = spec.prepare().unwrap();
    let times = uniform_grid(5.0 / kappa, 30);
    let s = p.cascade(&times, true, &CascadeOptions::default()).unwrap();
    let o = p.oracle(&times).unwrap();
    assert!(s.max_distance(&o).unwrap() < 1e-8);
}

#[test]
fn coherent_superposition_matches_oracle() {
    // off-diagonal sector pairs evolve through the same cascade
    let spec = model_two_atoms(1.0, 1.0, 0.4, 0.3).unwrap();
    let psi = StateVector::from_vec(vec![c(0.3, 0.0), c(0.1, 0.4), c(-0.5, 0.2), c(0.6, 0.0)]);
    let spec = spec.with_initial_pure(&psi).unwrap();
    let p = spec.prepare().unwrap();
    let times = uniform_grid(4.0, 20);
    let s = p.cascade(&times, true, &CascadeOptions::default()).unwrap();
    let o = p.oracle(&times).unwrap();
    assert!(s.max_distance(&o).unwrap() < 1e-8);
}

#[test]
fn jump_law_is_binomial_for_cavity() {
    let kappa = 1.3;
    let spec = model_damped_cavity(2, 1.0, kappa).unwrap();
    let p = spec.prepare().unwrap();
    let t_half = std::f64::consts::LN_2 / kappa;
    let s = p.cascade(&[0.0, t_half], true, &CascadeOptions::default()).unwrap();
    let law = jump_count_distribution(&s).unwrap();
    assert_eq!(law.max_jumps(), 2);
    assert!((law.probabilities[0][0] - 1.0).abs() < 1e-14);
    let expected = [0.25, 0.5, 0.25];
    for k in 0..3 {
        assert!((law.probabilities[1][k] - expected[k]).abs() < 1e-9);
    }
}

#[test]
fn jump_law_rejects_mixed_sectors() {
    let (h, t, d) = qubit(1.0);
    let g = effective_generator(&h, &t, &d).unwrap();
    let blocks = sector_split(&plus_state(), d.spectrum()).unwrap();
    let s = cascade_solve(&blocks, &g, &d, &[0.0, 1.0], &CascadeOptions::default()).unwrap();
    assert!(matches!(
        jump_count_distribution(&s),
        Err(Error::MixedSectorInitialState(_))
    ));
}

#[test]
fn singlet_of_coincident_atoms_never_clicks() {
    let spec = model_two_atoms(1.0, 1.0, 1.0, 0.0)
        .unwrap()
        .with_initial_pure(&singlet())
        .unwrap();
    let p = spec.prepare().unwrap();
    let times = uniform_grid(10.0, 11);
    let s = p.cascade(&times, true, &CascadeOptions::default()).unwrap();
    let law = jump_count_distribution(&s).unwrap();
    for row in &law.probabilities {
        assert!((row[0] - 1.0).abs() < 1e-10);
    }
}

#[test]
fn top_block_is_deterministic() {
    let spec = model_damped_cavity(4, 1.0, 0.6).unwrap();
    let p = spec.prepare().unwrap();
    let g = p.generator(true).unwrap();
    let times = uniform_grid(3.0, 10);
    let s = p.cascade(&times, true, &CascadeOptions::default()).unwrap();
    for (k, &tm) in times.iter().enumerate() {
        let expected = g.deterministic(&spec.initial_state, tm).unwrap();
        assert!(max_abs_diff(s.block(k, (0, 0)).unwrap(), &expected) < 1e-10);
    }
}

#[test]
fn gauss_legendre_integrates_polynomials() {
    for n in [1, 2, 5, 16, 64] {
        let (x, w) = gauss_legendre(n);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-13);
        for deg in 0..(2 * n).min(40) {
            let q: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(deg as i32)).sum();
            let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
            assert!((q - exact).abs() < 1e-12, "n={n} deg={deg}");
        }
        assert!(x.windows(2).all(|p| p[0] < p[1]));
    }
}

#[test]
fn closed_form_orders_zero_and_one() {
    let kappa = 0.9;
    let (h, t, d) = qubit(kappa);
    let g = effective_generator(&h, &t, &d).unwrap();
    let top = projector(&basis_state(2, 1));
    let tm = 1.7;
    let zero = closed_form_block(&top, &g, 0, tm, 8).unwrap();
    assert!(max_abs_diff(&zero, &g.deterministic(&top, tm).unwrap()) < 1e-15);
    let one = closed_form_block(&top, &g, 1, tm, 64).unwrap();
    assert!((one[(0, 0)].re - (1.0 - (-kappa * tm).exp())).abs() < 1e-12);
    assert!((trace(&one).re - one[(0, 0)].re).abs() < 1e-15);
}

#[test]
fn closed_form_order_two_matches_cascade() {
    let spec = model_damped_cavity(2, 1.0, 0.7).unwrap();
    let p = spec.prepare().unwrap();
    let g = p.generator(true).unwrap();
    let times = [0.0, 0.8, 2.5];
    let s = p.cascade(&times, true, &CascadeOptions::default()).unwrap();
    for (k, &tm) in times.iter().enumerate() {
        let two = closed_form_block(&spec.initial_state, &g, 2, tm, 64).unwrap();
        assert!(max_abs_diff(&two, s.block(k, (2, 2)).unwrap()) < 1e-6);
    }
}

#[test]
fn closed_form_rejects_deep_orders() {
    let (h, t, d) = qubit(1.0);
    let g = effective_generator(&h, &t, &d).unwrap();
    let top = projector(&basis_state(2, 1));
    match closed_form_block(&top, &g, 4, 1.0, 64) {
        Err(Error::ClosedFormTooDeep { order, cost, max }) => {
            assert_eq!((order, max), (4, 3));
            assert_eq!(cost, 64f64.powi(4));
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn lamb_shift_switch_changes_only_h0() {
    let spec = model_two_atoms(1.0, 1.0, 0.5, 0.4).unwrap();
    let p = spec.prepare().unwrap();
    let with = p.generator(true).unwrap();
    let without = p.generator(false).unwrap();
    assert!(max_abs_diff(with.h_prime(), without.h_prime()) == 0.0);
    let diff = with.h0() - without.h0();
    assert!(max_abs_diff(&diff, p.liouvillian.lamb_shift_operator()) < 1e-15);
}

#[test]
fn cascade_with_tensor_entries_off_the_spectrum_still_matches() {
    // an entry whose frequency matches no transition is ignored by both solvers
    let h = Operator::from_row_slice(2, 2, &[ZERO, ZERO, ZERO, ONE]);
    let sx = Operator::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]);
    let spectrum = hermitian_eigensystem(&h, default_cluster_tol(&h)).unwrap();
    let d = BohrDecomposition::new(spectrum, vec![sx], 1e-8).unwrap();
    let t = SpectralTensor::zero_temperature(
        1,
        vec![
            scalar_entry(1.0, 0.5, 0.1),
            SpectralEntry {
                omega: 3.0,
                gamma: Operator::from_element(1, 1, c(2.0, 0.0)),
                shift: Operator::zeros(1, 1),
            },
        ],
    )
    .unwrap();
    let l = build_liouvillian(&h, &t, &d).unwrap();
    let g = effective_generator(&(&h + l.lamb_shift_operator()), &t, &d).unwrap();
    let rho = plus_state();
    let times = uniform_grid(4.0, 9);
    let s = cascade_solve(&sector_split(&rho, d.spectrum()).unwrap(), &g, &d, &times, &CascadeOptions::default())
        .unwrap();
    let o = propagate_expm(&l, &rho, &times).unwrap();
    assert!(s.max_distance(&o).unwrap() < 1e-9);
}
