use proptest::prelude::*;

use qrm_heat::approx::grwa_spectrum;
use qrm_heat::baths::{power_spectrum, spectral_density, w_function, BathSide, BathSpec, MatsubaraPolicy};
use qrm_heat::cli::config::{AxisGrid, OutputFormat};
use qrm_heat::cli::{parse_config, RunConfig};
use qrm_heat::hilbert::{build_coupling_operators, build_rabi_hamiltonian, diagonalize, EigenSystem, JunctionParams, TruncationConfig};
use qrm_heat::master_equation::{
    fsme_steady_state, golden_rule_rates, psme_steady_state, redfield_residual, select_coherent_pairs, RedfieldTensor,
};
use qrm_heat::transport::{build_eigensystem, forward_backward_eigsys, BathSetup, SolverMode, SolverOptions, SweepAxis};

fn cases(n: u32) -> ProptestConfig {
    ProptestConfig { cases: n, ..ProptestConfig::default() }
}

fn junction() -> impl Strategy<Value = JunctionParams> {
    (0.05..2.0f64, -1.5..1.5f64, 0.0..0.5f64).prop_map(|(d, e, g)| JunctionParams::new(d, e, g).unwrap())
}

fn bath() -> impl Strategy<Value = BathSpec> {
    (1e-4..0.1f64, 0.05..3.0f64, 2.0..10.0f64)
        .prop_map(|(a, t, wc)| BathSpec::new(BathSide::Left, a, t, wc).unwrap())
}

fn spectrum(p: &JunctionParams, n_fock: usize, n_levels: usize) -> EigenSystem {
    let trunc = TruncationConfig::new(n_fock, n_levels).unwrap();
    let h = build_rabi_hamiltonian(p, n_fock).unwrap();
    diagonalize(&h, &build_coupling_operators(n_fock).unwrap(), &trunc).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

proptest! {
    #![proptest_config(cases(48))]

    #[test]
    fn uncoupled_spectrum_is_qubit_plus_ladder(delta in 0.05..2.0f64, eps in -1.5..1.5f64) {
        let p = JunctionParams::new(delta, eps, 0.0).unwrap();
        let wq = p.qubit_frequency();
        let mut expected: Vec<f64> = (0..12).flat_map(|n| [n as f64 - wq / 2.0, n as f64 + wq / 2.0]).collect();
        expected.sort_by(f64::total_cmp);
        let es = spectrum(&p, 12, 8);
        for (a, b) in es.omega.iter().zip(&expected) {
            prop_assert!((a - b).abs() < 1e-12 * b.abs().max(1.0));
        }
    }

    #[test]
    fn parity_kills_diagonal_elements(delta in 0.05..2.0f64, g in 0.0..0.5f64) {
        let es = spectrum(&JunctionParams::new(delta, 0.0, g).unwrap(), 20, 5);
        for n in 0..5 {
            prop_assert!(es.q_left[(n, n)].abs() < 1e-10);
            prop_assert!(es.q_right[(n, n)].abs() < 1e-10);
        }
    }

    #[test]
    fn spectrum_even_in_bias(p in junction()) {
        let flipped = JunctionParams { epsilon: -p.epsilon, ..p };
        let (a, b) = (spectrum(&p, 20, 6), spectrum(&flipped, 20, 6));
        for (x, y) in a.omega.iter().zip(&b.omega) {
            prop_assert!((x - y).abs() < 1e-12 * x.abs().max(1.0));
        }
    }

    #[test]
    fn ground_energy_decreases_with_fock_cutoff(p in junction()) {
        let e: Vec<f64> = [6, 10, 14, 20].iter().map(|&n| spectrum(&p, n, 2).omega[0]).collect();
        for w in e.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-12);
        }
    }

    #[test]
    fn spectral_density_is_odd(b in bath(), w in -20.0..20.0f64) {
        prop_assert_eq!(spectral_density(-w, &b), -spectral_density(w, &b));
    }

    #[test]
    fn detailed_balance(b in bath(), w in 0.01..5.0f64) {
        let (s_plus, s_minus) = (power_spectrum(w, &b), power_spectrum(-w, &b));
        prop_assert!(s_plus > 0.0 && s_minus > 0.0);
        prop_assert!(rel(s_plus / s_minus, (w / b.temperature).exp()) < 1e-10);
    }

    #[test]
    fn absorption_and_emission_rates_non_negative(b in bath(), w in 0.01..5.0f64) {
        let policy = MatsubaraPolicy::default();
        prop_assert!(w_function(w, &b, &policy).unwrap().re >= 0.0);
        prop_assert!(w_function(-w, &b, &policy).unwrap().re >= 0.0);
    }

    #[test]
    fn grwa_amplitudes_normalized(delta in 0.05..1.0f64, g in 0.0..0.5f64) {
        let s = grwa_spectrum(&JunctionParams::new(delta, 0.0, g).unwrap(), 4).unwrap();
        for n in 0..4 {
            prop_assert!((s.u_n_minus[n].powi(2) + s.v_n_minus[n].powi(2) - 1.0).abs() < 1e-12);
            prop_assert!((s.u_n_plus[n].powi(2) + s.v_n_plus[n].powi(2) - 1.0).abs() < 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(cases(32))]

    #[test]
    fn fsme_populations_invariant_under_alpha_rescaling(
        p in junction(), t in 0.1..2.0f64, dt in 0.0..1.0f64, alpha in 1e-4..1e-2f64,
    ) {
        let setup = BathSetup::symmetric(alpha);
        let es = build_eigensystem(&p, &setup, &TruncationConfig::default(), false).unwrap();
        let (tl, tr) = (t + 0.5 * dt * t, t - 0.5 * dt * t);
        let base = fsme_steady_state(&golden_rule_rates(&es, &setup.pair(tl, tr).unwrap())).unwrap();
        for c in [0.1, 10.0] {
            let scaled = BathSetup::symmetric(c * alpha);
            let s = fsme_steady_state(&golden_rule_rates(&es, &scaled.pair(tl, tr).unwrap())).unwrap();
            for (a, b) in s.populations.iter().zip(&base.populations) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn psme_state_is_normalized_hermitian_and_stationary(
        p in junction(), t in 0.1..2.0f64, dt in 0.0..1.0f64, threshold in 0.0..0.5f64,
    ) {
        let setup = BathSetup::symmetric(1e-2);
        let es = build_eigensystem(&p, &setup, &TruncationConfig::default(), true).unwrap();
        let baths = setup.pair(t + 0.5 * dt * t, t - 0.5 * dt * t).unwrap();
        let pairs = select_coherent_pairs(&es, threshold).unwrap();
        let policy = MatsubaraPolicy::default();
        let state = psme_steady_state(&es, &baths, &pairs, &policy).unwrap();
        prop_assert!((state.trace() - 1.0).abs() < 1e-12);
        let rho = state.density_matrix();
        prop_assert!((&rho - rho.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max) < 1e-12);
        let tensor = RedfieldTensor::new(&es, &baths, &policy).unwrap();
        prop_assert!(redfield_residual(&tensor, &state) < 1e-10);
    }

    #[test]
    fn currents_conserve_energy_and_follow_bias(
        p in junction(), t in 0.1..2.0f64, frac in 0.01..1.9f64, psme in any::<bool>(),
    ) {
        let mode = if psme { SolverMode::Psme } else { SolverMode::Fsme };
        let setup = BathSetup::symmetric(1e-2);
        let es = build_eigensystem(&p, &setup, &TruncationConfig::default(), psme).unwrap();
        let pair = forward_backward_eigsys(&es, &setup, t, frac * t, &SolverOptions::new(mode)).unwrap();
        for s in [pair.forward, pair.backward].into_iter().flatten() {
            prop_assert!((s.i_left + s.i_right).abs() <= 1e-10 * s.i_left.abs().max(s.i_right.abs()));
        }
        if !psme {
            prop_assert!(pair.i_forward > 0.0 && pair.i_backward < 0.0);
        }
    }

    #[test]
    fn fsme_current_proportional_to_alpha(p in junction(), t in 0.1..2.0f64, c in 0.1..10.0f64) {
        let run = |alpha: f64| {
            let setup = BathSetup::symmetric(alpha);
            let es = build_eigensystem(&p, &setup, &TruncationConfig::default(), false).unwrap();
            forward_backward_eigsys(&es, &setup, t, 0.5 * t, &SolverOptions::default()).unwrap().i_forward
        };
        // decoupled subsystems (g = 0) carry only roundoff, ~1e-18 α
        let (scaled, base) = (run(c * 1e-3) / c, run(1e-3));
        prop_assert!((scaled - base).abs() <= 1e-12 * scaled.abs().max(base.abs()) + 1e-15 * 1e-3);
    }

    #[test]
    fn config_round_trip(
        t in 0.1..2.0f64, frac in 0.0..1.9f64, g in 0.0..0.5f64, alpha in 1e-5..0.1f64,
        points in 1usize..30, psme in any::<bool>(), eta in proptest::option::of(0.0..1e-3f64),
        format in prop_oneof![Just(OutputFormat::Csv), Just(OutputFormat::Json), Just(OutputFormat::Gnuplot)],
    ) {
        let mut cfg = RunConfig {
            temperature: t,
            delta_t: frac * t,
            eta,
            format,
            mode: if psme { SolverMode::Psme } else { SolverMode::Fsme },
            ..RunConfig::default()
        };
        cfg.junction.g = g;
        cfg.baths = BathSetup::symmetric(alpha);
        cfg.sweep = AxisGrid::new(SweepAxis::Epsilon, (0..points).map(|k| -1.0 + 0.1 * k as f64 / 3.0).collect());
        cfg.series = Some(AxisGrid::new(SweepAxis::Alpha, vec![alpha, 2.0 * alpha]));
        prop_assert_eq!(parse_config(&cfg.to_toml().unwrap()).unwrap(), cfg);
    }
}

#[test]
fn psme_current_per_alpha_depends_on_alpha() {
    let p = JunctionParams::new(1.0, 0.0, 0.01).unwrap();
    let run = |alpha: f64| {
        let setup = BathSetup::symmetric(alpha);
        let es = build_eigensystem(&p, &setup, &TruncationConfig::default(), true).unwrap();
        let solver = SolverOptions::new(SolverMode::Psme);
        forward_backward_eigsys(&es, &setup, 0.25, 0.1, &solver).unwrap().i_forward / alpha
    };
    assert!(rel(run(1e-2), run(1e-3)) > 0.01);
}

#[test]
fn rectification_non_positive_at_resonance() {
    for k in 0..50 {
        let g = 0.01 + 0.01 * k as f64;
        let setup = BathSetup::symmetric(1e-2);
        let es = build_eigensystem(&JunctionParams::new(1.0, 0.0, g).unwrap(), &setup, &TruncationConfig::default(), false)
            .unwrap();
        let pair = forward_backward_eigsys(&es, &setup, 0.25, 0.1, &SolverOptions::default()).unwrap();
        let r = qrm_heat::transport::rectification(pair.i_forward, pair.i_backward, 1e-7).unwrap();
        assert!(r <= 0.0, "g = {g}: 𝓡 = {r}");
    }
}
