use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use qtomo::chronocyclic::{arm_modulus, tt_tomogram, tt_tomogram_arms, chrono_eps_tei, CombArm, CombParams, CombState, TTGrid};
use qtomo::decoherence::{damp_mode, DampingParams};
use qtomo::dynamics::sweep::sector_eigensystem;
use qtomo::dynamics::{bec_analytic_state, evolve, HamiltonianSpec, Propagator};
use qtomo::fock::{make_coherent, make_pacs, tensor_density, tensor_pure};
use qtomo::indicators::{eps_bd, eps_pcc, eps_tei, negativity, xi_average, xi_qmi, xi_svne, IndicatorKind};
use qtomo::io::{density_from_json, density_to_json, tomogram_from_json, tomogram_to_json};
use qtomo::squeezing::{entropic_threshold, hong_mandel_moment, tomographic_entropy_slice, Moments};
use qtomo::timeseries::{max_local_exponent, mi_delay, ScalarSeries};
use qtomo::tomography::{
    all_xyz_axes, ensemble_pure, reduced_tomogram, spin_tomogram, tomogram_density_single, tomogram_pure_single, tomogram_two_mode_pure,
    QuadGrid, Subsystem, TwoModeSlicer,
};
use qtomo::{DensityMatrix, ModeSpace, PureState, C64};

fn amps(n: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), n).prop_filter("nonzero", |v| v.iter().map(|(a, b)| a * a + b * b).sum::<f64>() > 1e-3)
}

fn pure(space: ModeSpace, raw: &[(f64, f64)]) -> PureState {
    let n = raw.iter().map(|(a, b)| a * a + b * b).sum::<f64>().sqrt();
    PureState::new(space, DVector::from_iterator(raw.len(), raw.iter().map(|&(a, b)| C64::new(a / n, b / n)))).unwrap()
}

/// Convex mixture of the given pure states with weights proportional to `w`.
fn mixture(states: &[PureState], w: &[f64]) -> DensityMatrix {
    let total: f64 = w.iter().sum();
    let d = states[0].dim();
    let mut mat = DMatrix::<C64>::zeros(d, d);
    for (s, &p) in states.iter().zip(w) {
        mat += &s.amps * s.amps.adjoint() * C64::new(p / total, 0.0);
    }
    DensityMatrix::new(states[0].space.clone(), mat, 1e-10).unwrap()
}

fn small_grid(thetas: Vec<f64>) -> QuadGrid {
    QuadGrid::new(-7.0, 7.0, 141, thetas).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn constructors_are_normalized(re in -2.0..2.0f64, im in -2.0..2.0f64, m in 0usize..4) {
        let s = ModeSpace::fock(50);
        for psi in [make_coherent(C64::new(re, im), &s).unwrap(), make_pacs(C64::new(re, im), m, &s).unwrap()] {
            prop_assert!((psi.amps.norm() - 1.0).abs() < 1e-10);
            psi.to_density().unwrap().validate(1e-10).unwrap();
        }
    }

    #[test]
    fn partial_trace_undoes_tensor(a in amps(3), b in amps(3), c in amps(4), wa in 0.1..1.0f64) {
        let sa = ModeSpace::new(vec![3]).unwrap();
        let rho_a = mixture(&[pure(sa.clone(), &a), pure(sa, &b)], &[wa, 1.0 - wa + 0.05]);
        let rho_b = pure(ModeSpace::new(vec![4]).unwrap(), &c).to_density().unwrap();
        let ab = tensor_density(&rho_a, &rho_b).unwrap();
        let back = ab.partial_trace(&[0]).unwrap();
        prop_assert!((back.mat - &rho_a.mat).iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn tensor_is_associative(a in amps(2), b in amps(3), c in amps(4)) {
        let (pa, pb, pc) = (
            pure(ModeSpace::new(vec![2]).unwrap(), &a),
            pure(ModeSpace::new(vec![3]).unwrap(), &b),
            pure(ModeSpace::new(vec![4]).unwrap(), &c),
        );
        let left = tensor_pure(&tensor_pure(&pa, &pb), &pc);
        let right = tensor_pure(&pa, &tensor_pure(&pb, &pc));
        prop_assert_eq!(left.space.dims(), &[2, 3, 4]);
        prop_assert!((left.amps - right.amps).norm() < 1e-14);
    }

    #[test]
    fn tomograms_are_normalized_and_reflection_symmetric(raw in amps(12), theta in 0.0..PI) {
        let psi = pure(ModeSpace::fock(11), &raw);
        let g = QuadGrid::standard(vec![theta, theta + PI]).unwrap();
        let t = tomogram_pure_single(&psi, &g).unwrap();
        prop_assert!(t.min_value() >= 0.0);
        prop_assert!(t.max_normalization_error() < 1e-4);
        let (a, b) = (t.slice(0), t.slice(1));
        let n = a.len();
        prop_assert!((0..n).all(|k| (b[k] - a[n - 1 - k]).abs() < 1e-8));
    }

    #[test]
    fn density_route_matches_pure_route(raw in amps(10), theta in 0.0..PI) {
        let psi = pure(ModeSpace::fock(9), &raw);
        let g = QuadGrid::standard(vec![theta]).unwrap();
        let a = tomogram_pure_single(&psi, &g).unwrap();
        let b = tomogram_density_single(&psi.to_density().unwrap(), &g).unwrap();
        prop_assert!(a.values.iter().zip(&b.values).all(|(x, y)| (x - y).abs() < 1e-10));
    }

    #[test]
    fn product_tomograms_factorize(a in amps(6), b in amps(6), ta in 0.0..PI, tb in 0.0..PI) {
        let (pa, pb) = (pure(ModeSpace::fock(5), &a), pure(ModeSpace::fock(5), &b));
        let (ga, gb) = (small_grid(vec![ta]), small_grid(vec![tb]));
        let joint = tomogram_two_mode_pure(&tensor_pure(&pa, &pb), &ga, &gb).unwrap();
        let wa = tomogram_pure_single(&pa, &ga).unwrap();
        let wb = tomogram_pure_single(&pb, &gb).unwrap();
        let s = joint.joint_slice(0, 0);
        let mut worst = 0.0f64;
        for i in 0..ga.n_x {
            for j in 0..gb.n_x {
                worst = worst.max((s.at(i, j) - wa.values[i] * wb.values[j]).abs());
            }
        }
        prop_assert!(worst < 1e-8);
    }

    #[test]
    fn reduced_tomogram_ignores_the_other_angle(raw in amps(25)) {
        let psi = pure(ModeSpace::two_mode(4, 4), &raw);
        let g = small_grid(vec![0.0, 0.9, 2.0]);
        let t = tomogram_two_mode_pure(&psi, &g, &g).unwrap();
        let r0 = reduced_tomogram(&t, Subsystem::A, 0.0).unwrap();
        let r1 = reduced_tomogram(&t, Subsystem::A, 2.0).unwrap();
        prop_assert!(r0.values.iter().zip(&r1.values).all(|(x, y)| (x - y).abs() < 1e-6));
    }

    #[test]
    fn bec_evolution_conserves_sectors(o1 in -1.0..1.0f64, lam in 0.0..1.0f64, t in 0.0..3.0f64, raw in amps(25)) {
        let spec = HamiltonianSpec::Bec { omega0: 1.0, omega1: o1, u: 0.7, lambda: lam };
        let space = spec.space(4);
        let psi = pure(space.clone(), &raw);
        let prop = Propagator::new(&spec, &space).unwrap();
        let before = prop.sector_populations(&psi);
        let after = prop.sector_populations(&prop.evolve(&psi, t).unwrap());
        prop_assert!(before.iter().zip(&after).all(|(a, b)| (a - b).abs() < 1e-10));
    }

    #[test]
    fn bec_levels_reflect(o0 in 0.0..2.0f64, o1 in -1.0..1.0f64, u in 0.1..2.0f64, lam in 0.0..1.0f64, n in 1usize..6) {
        let spec = HamiltonianSpec::Bec { omega0: o0, omega1: o1, u, lambda: lam };
        let space = spec.space(n);
        let e = sector_eigensystem(&spec, &space, &[n]).unwrap().energies;
        let nn = n as f64;
        for k in 0..=n {
            prop_assert!((e[k] + e[n - k] - 2.0 * (o0 * nn + u * nn * nn)).abs() < 1e-9);
        }
    }

    #[test]
    fn bec_closed_form_matches_numeric(ar in -1.0..1.0f64, br in -1.0..1.0f64, m1 in 0usize..2, m2 in 0usize..2, t in 0.0..2.0f64) {
        let spec = HamiltonianSpec::Bec { omega0: 1.0, omega1: 0.4, u: 0.3, lambda: 0.5 };
        let space = spec.space(24);
        let (a, b) = (C64::new(ar, 0.2), C64::new(br, -0.1));
        let closed = bec_analytic_state(a, b, m1, m2, &spec, t, &space).unwrap();
        let start = bec_analytic_state(a, b, m1, m2, &spec, 0.0, &space).unwrap();
        let numeric = evolve(&start, &spec, t).unwrap();
        prop_assert!((closed.inner(&numeric).norm() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn damping_keeps_states_physical(raw in amps(16), gt in 0.0..3.0f64, phase in any::<bool>()) {
        let rho = pure(ModeSpace::fock(15), &raw).to_density().unwrap();
        let p = if phase { DampingParams::phase(1.0, gt) } else { DampingParams::amplitude(1.0, gt) };
        let out = damp_mode(&rho, 0, &p).unwrap();
        prop_assert!((out.trace().re - 1.0).abs() < 1e-10);
        prop_assert!(out.eigenvalues().iter().all(|&l| l >= -1e-9));
        if phase {
            prop_assert!((0..16).all(|n| (out.mat[(n, n)] - rho.mat[(n, n)]).norm() < 1e-14));
        }
    }

    #[test]
    fn tomogram_moments_match_operators(re in -1.5..1.5f64, im in -1.5..1.5f64, m in 0usize..3) {
        let psi = make_pacs(C64::new(re, im), m, &ModeSpace::fock(40)).unwrap();
        let mut th: Vec<f64> = (0..=4).flat_map(QuadGrid::quorum_angles).collect();
        th.sort_by(f64::total_cmp);
        th.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        let t = tomogram_pure_single(&psi, &QuadGrid::standard(th).unwrap()).unwrap();
        for k in 0..=4 {
            for l in 0..=4 - k {
                prop_assert!((t.moment(k, l, 0, 0).unwrap() - psi.moment(k, l, 0, 0).unwrap()).norm() < 1e-4);
            }
        }
    }

    #[test]
    fn entropic_uncertainty_holds(raw in amps(8)) {
        let psi = pure(ModeSpace::fock(7), &raw);
        let t = tomogram_pure_single(&psi, &QuadGrid::standard(vec![0.0, PI / 2.0]).unwrap()).unwrap();
        let s = tomographic_entropy_slice(&t, 0.0).unwrap() + tomographic_entropy_slice(&t, PI / 2.0).unwrap();
        prop_assert!(s >= 2.0 * entropic_threshold() - 1e-9);
    }

    #[test]
    fn hong_mandel_first_order_is_quadrature_variance(re in -1.0..1.0f64, im in -1.0..1.0f64, m in 0usize..3, theta in 0.0..PI) {
        let psi = make_pacs(C64::new(re, im), m, &ModeSpace::fock(40)).unwrap();
        let t = tomogram_pure_single(&psi, &QuadGrid::standard(vec![theta]).unwrap()).unwrap();
        // ⟨X_θ⟩ and ⟨X_θ²⟩ from normal-ordered moments
        let ph = C64::from_polar(1.0, theta);
        let a = psi.moment(0, 1, 0, 0).unwrap();
        let mean = (a * ph.conj()).re * 2f64.sqrt();
        let a2 = psi.moment(0, 2, 0, 0).unwrap();
        let n = psi.moment(1, 1, 0, 0).unwrap().re;
        let second = (a2 * ph.conj() * ph.conj()).re + n + 0.5;
        prop_assert!((hong_mandel_moment(&t, theta, 1).unwrap() - (second - mean * mean)).abs() < 1e-8);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn jensen_bound_on_random_slices(raw in amps(16), ta in 0.0..PI, tb in 0.0..PI) {
        let psi = pure(ModeSpace::two_mode(3, 3), &raw);
        let g = small_grid(vec![0.0]);
        let s = TwoModeSlicer::new(ensemble_pure(&psi).unwrap(), &g, &g).unwrap().slice(ta, tb);
        prop_assert!(eps_tei(&s).unwrap() >= 2.0 * eps_bd(&s).unwrap() - 1e-9);
    }

    #[test]
    fn product_slices_carry_no_correlation(a in amps(5), b in amps(5), ta in 0.0..PI, tb in 0.0..PI) {
        let psi = tensor_pure(&pure(ModeSpace::fock(4), &a), &pure(ModeSpace::fock(4), &b));
        let g = small_grid(vec![0.0]);
        let s = TwoModeSlicer::new(ensemble_pure(&psi).unwrap(), &g, &g).unwrap().slice(ta, tb);
        prop_assert!(eps_tei(&s).unwrap() < 1e-9);
        prop_assert!(eps_bd(&s).unwrap() < 1e-9);
        prop_assert!(eps_pcc(&s).unwrap() < 1e-9);
    }

    #[test]
    fn pure_state_qmi_is_twice_the_entropy(raw in amps(12)) {
        let rho = pure(ModeSpace::new(vec![3, 4]).unwrap(), &raw).to_density().unwrap();
        prop_assert!((xi_qmi(&rho, &[0], &[1]).unwrap() - 2.0 * xi_svne(&rho, &[0]).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn separable_mixtures_have_no_negativity(parts in prop::collection::vec((amps(2), amps(3), 0.05..1.0f64), 1..5)) {
        let states: Vec<PureState> = parts
            .iter()
            .map(|(a, b, _)| tensor_pure(&pure(ModeSpace::new(vec![2]).unwrap(), a), &pure(ModeSpace::new(vec![3]).unwrap(), b)))
            .collect();
        let w: Vec<f64> = parts.iter().map(|p| p.2).collect();
        let rho = mixture(&states, &w);
        prop_assert!(negativity(&rho, &[1]).unwrap() < 1e-9);
    }

    #[test]
    fn xi_ignores_angle_order(raw in amps(16), shuffle in Just((0..5).collect::<Vec<usize>>()).prop_shuffle()) {
        let psi = pure(ModeSpace::two_mode(3, 3), &raw);
        let g = small_grid(vec![0.0]);
        let sl = TwoModeSlicer::new(ensemble_pure(&psi).unwrap(), &g, &g).unwrap();
        let angles: Vec<f64> = (0..5).map(|k| PI * k as f64 / 5.0).collect();
        let permuted: Vec<f64> = shuffle.iter().map(|&i| angles[i]).collect();
        for kind in IndicatorKind::ALL {
            let a = xi_average(&sl, kind, &angles).unwrap();
            let b = xi_average(&sl, kind, &permuted).unwrap();
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn spin_tomogram_rows_are_distributions(raw in amps(4), raw2 in amps(4), w in 0.0..1.0f64) {
        let s = ModeSpace::qubits(2);
        let rho = mixture(&[pure(s.clone(), &raw), pure(s, &raw2)], &[w + 0.01, 1.0 - w]);
        let st = spin_tomogram(&rho, &all_xyz_axes(2)).unwrap();
        for row in &st.probs {
            prop_assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-10);
            prop_assert!(row.iter().all(|&p| p >= -1e-12));
        }
    }

    #[test]
    fn density_export_round_trips(raw in amps(6), raw2 in amps(6), w in 0.0..1.0f64) {
        let s = ModeSpace::new(vec![2, 3]).unwrap();
        let rho = mixture(&[pure(s.clone(), &raw), pure(s, &raw2)], &[w + 0.01, 1.0 - w]);
        let text = density_to_json(&rho).unwrap();
        prop_assert_eq!(density_to_json(&density_from_json(&text).unwrap()).unwrap(), text);
    }

    #[test]
    fn tomogram_export_round_trips(raw in amps(6), theta in 0.0..PI) {
        let t = tomogram_pure_single(&pure(ModeSpace::fock(5), &raw), &small_grid(vec![theta])).unwrap();
        let text = tomogram_to_json(&t).unwrap();
        prop_assert_eq!(tomogram_to_json(&tomogram_from_json(&text).unwrap()).unwrap(), text);
    }

    #[test]
    fn blocking_the_product_does_not_matter(entries in prop::collection::vec(-2.0..2.0f64, 8), l in 2usize..40) {
        let a = DMatrix::from_row_slice(2, 2, &entries[..4]);
        let b = DMatrix::from_row_slice(2, 2, &entries[4..]);
        prop_assume!(a.determinant().abs() > 1e-3 && b.determinant().abs() > 1e-3);
        let path: Vec<&DMatrix<f64>> = (0..l).map(|i| if i % 2 == 0 { &a } else { &b }).collect();
        let pair = &b * &a;
        let mut direct = DMatrix::<f64>::identity(2, 2);
        for m in &path {
            direct = *m * direct;
        }
        let smax = direct.svd(false, false).singular_values.max();
        prop_assume!(smax.is_finite() && smax > 1e-200 && smax < 1e200);
        let want = smax.ln() / l as f64;
        prop_assert!((max_local_exponent(&path) - want).abs() < 1e-6);
        if l % 2 == 0 {
            let paired: Vec<&DMatrix<f64>> = vec![&pair; l / 2];
            prop_assert!((max_local_exponent(&paired) * 0.5 - want).abs() < 1e-6);
        }
    }

    #[test]
    fn time_reversal_flips_the_exponent_order(entries in prop::collection::vec(-1.0..1.0f64, 4), l in 5usize..30) {
        let a = DMatrix::from_row_slice(2, 2, &entries);
        prop_assume!(a.determinant().abs() > 0.05);
        let inv = a.clone().try_inverse().unwrap();
        let forward = vec![&a; l];
        let backward = vec![&inv; l];
        let mut p = DMatrix::<f64>::identity(2, 2);
        for _ in 0..l {
            p = &a * p;
        }
        // smallest singular value through the determinant, which stays exact when A^l is ill conditioned
        let smax = p.svd(false, false).singular_values.max();
        let log_smin = l as f64 * a.determinant().abs().ln() - smax.ln();
        prop_assert!((max_local_exponent(&backward) + log_smin / l as f64).abs() < 1e-6);
        prop_assert!(max_local_exponent(&backward) >= -max_local_exponent(&forward) - 1e-9);
    }

    #[test]
    fn mi_delay_is_deterministic(seed in 0u64..1000, bins in 8usize..40) {
        let x: Vec<f64> = (0..3000).map(|i| ((i as f64) * 0.13 + seed as f64).sin() + 0.1 * (((i * 7919 + seed as usize) % 101) as f64 / 101.0)).collect();
        let s = ScalarSeries::new(x, 1.0).unwrap();
        prop_assert_eq!(mi_delay(&s, 30, bins, 1).unwrap(), mi_delay(&s, 30, bins, 1).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn chrono_surface_is_translation_invariant(scale_bar in 0.8..1.2f64, scale_w in 0.8..1.2f64) {
        let p = CombParams::from_hz(391.8856e12, 19.2e9 * scale_bar, 1.92e9 * scale_w, 10.9e12, 6e12).unwrap();
        // ridges of |A(u)| repeat with the comb period 2π/κ
        let period = 2.0 * PI * 2.0 * (p.d_omega.powi(2) + p.d_big_omega.powi(2)) / (p.omega_bar * p.d_big_omega.powi(2));
        prop_assert!((p.ridge_spacing() - period).abs() < 1e-9 * period);
        for u in [0.0, 0.3 * period, 1.7 * period] {
            let a = arm_modulus(&p, CombArm::InPhase, u);
            let b = arm_modulus(&p, CombArm::InPhase, u + period);
            prop_assert!((a - b).abs() < 1e-6 * a.max(1.0));
        }
        let g = TTGrid::default_for(&p);
        let w = tt_tomogram(CombState::Alpha, &p, &g).unwrap();
        let n = w.n();
        for (i, j) in [(3usize, 40usize), (1000, 1037), (n - 50, n - 13)] {
            prop_assert_eq!(w.at(i, j), w.at_offset(j as i64 - i as i64));
        }
        let swapped = tt_tomogram_arms((CombArm::InPhase, CombArm::Alternating), &p, &g).unwrap();
        let beta = tt_tomogram(CombState::Beta, &p, &g).unwrap();
        let (eb, es) = (chrono_eps_tei(&beta).unwrap(), chrono_eps_tei(&swapped).unwrap());
        prop_assert!((eb - es).abs() < 1e-9 * eb);
    }
}
