//! Property tests over random baths, states and configurations.

use nalgebra::DVector;
use proptest::prelude::*;
use qutrit_dd::evolve::{magnus1, propagate, IntegratorConfig};
use qutrit_dd::experiment::{ExperimentConfig, PulseSetting};
use qutrit_dd::linalg::{commutator, kron, Operator, C64};
use qutrit_dd::metrics::{partial_trace, state_fidelity, DensityMatrix, OutputState};
use qutrit_dd::noise::{build_hil, build_hip, NoiseModel, QuantumBath};
use qutrit_dd::sequence::{memory_dd_first_order, memory_dd_second_order, parse_schedule_text, PulseMode};
use qutrit_dd::system::{DdSet, QutritState, QUTRIT};

fn bath() -> impl Strategy<Value = QuantumBath> {
    (1usize..=4, any::<u64>(), 0.1..5.0f64, 0.0..6.3f64, 0.0..6.3f64).prop_map(|(dim, seed, scale, phi0, phi1)| {
        QuantumBath::seeded(dim, scale, seed).unwrap().with_phases(phi0, phi1)
    })
}

fn state(dims: &'static [usize]) -> impl Strategy<Value = QutritState> {
    let n: usize = dims.iter().product();
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), n)
        .prop_filter("nonzero", |v| v.iter().map(|(a, b)| a * a + b * b).sum::<f64>() > 1e-3)
        .prop_map(move |v| {
            let amps = DVector::from_iterator(v.len(), v.iter().map(|&(a, b)| C64::new(a, b)));
            let norm = amps.norm();
            QutritState::new(dims, amps.unscale(norm)).unwrap()
        })
}

fn density(dims: &'static [usize]) -> impl Strategy<Value = DensityMatrix> {
    let n: usize = dims.iter().product();
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), n * n)
        .prop_filter("nonzero", |v| v.iter().any(|(a, b)| a.abs() + b.abs() > 1e-2))
        .prop_map(move |v| {
            let a = Operator::from_fn(dims, |r, c| C64::new(v[r * n + c].0, v[r * n + c].1));
            let rho = &a * &a.adjoint();
            let tr = rho.trace().re;
            DensityMatrix::new(rho.scale_re(1.0 / tr)).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dephasing_averages_out(b in bath()) {
        let dd = DdSet::standard();
        let dims = [QUTRIT, b.dim_e()];
        let hip = build_hip(&b);
        let mut sum = Operator::zeros(&dims);
        for k in 1..=3 {
            sum += &hip.toggled_by(&dd.p(k).lift_to(&dims).unwrap());
        }
        prop_assert!(sum.max_abs() < 1e-12);
    }

    #[test]
    fn relaxation_flips_under_p4(b in bath()) {
        let dims = [QUTRIT, b.dim_e()];
        let p4 = DdSet::standard().p(4).lift_to(&dims).unwrap();
        let hil = build_hil(&b);
        prop_assert!((&hil.toggled_by(&p4) + &hil).max_abs() < 1e-12);
        let cross = commutator(&build_hip(&b), &hil).unwrap();
        prop_assert!((&cross.toggled_by(&p4) + &cross).max_abs() < 1e-12);
    }

    #[test]
    fn first_order_sequence_averages_interaction(b in bath(), tau in 0.01..10.0f64) {
        let s = memory_dd_first_order(tau, PulseMode::Instantaneous).unwrap();
        let h_i = b.interaction();
        let m1 = magnus1(&s, &h_i).unwrap();
        prop_assert!(m1.max_abs() < 1e-12 * (1.0 + h_i.max_abs() * tau));
    }

    #[test]
    fn sequence_bookkeeping(tau in 1e-3..10.0f64) {
        let id = Operator::identity(&[QUTRIT]);
        let s1 = memory_dd_first_order(tau, PulseMode::Instantaneous).unwrap();
        prop_assert_eq!(s1.pulse_count(), 12);
        prop_assert!((s1.free_duration() - 6.0 * tau).abs() < 1e-12 * tau);
        prop_assert!((&s1.pulse_product() - &id).max_abs() < 1e-12);
        let s2 = memory_dd_second_order(tau, PulseMode::Instantaneous).unwrap();
        prop_assert!((s2.free_duration() - 36.0 * tau).abs() < 1e-11 * tau);
        prop_assert!((&s2.pulse_product() - &id).max_abs() < 1e-12);
    }

    #[test]
    fn schedule_text_round_trips(tau in 1e-3..10.0f64, finite in any::<bool>()) {
        let mode = if finite { PulseMode::finite(628.0).unwrap() } else { PulseMode::Instantaneous };
        let s = memory_dd_first_order(tau, mode).unwrap();
        let parsed = parse_schedule_text(&s.to_text()).unwrap();
        let described = s.describe();
        prop_assert_eq!(parsed.len(), described.len());
        for (p, d) in parsed.iter().zip(&described) {
            prop_assert_eq!(p.tag, d.tag);
            prop_assert_eq!(&p.params, &d.params);
            prop_assert_eq!(&p.label, &d.label);
            prop_assert!((p.duration - d.duration).abs() <= 1e-11 * d.duration.abs().max(1e-300));
        }
    }

    #[test]
    fn propagation_is_unitary(b in bath(), tau in 0.01..2.0f64) {
        let s = memory_dd_first_order(tau, PulseMode::Instantaneous).unwrap();
        let u = propagate(&s, Some(&NoiseModel::Bath(b)), &IntegratorConfig::exact()).unwrap();
        prop_assert!(u.unitarity_deviation() < 1e-9);
    }

    #[test]
    fn partial_trace_preserves_trace_and_positivity(rho in density(&[3, 2])) {
        for keep in [[0usize], [1]] {
            let reduced = partial_trace(&rho, &keep).unwrap();
            prop_assert!((reduced.operator().trace() - C64::new(1.0, 0.0)).norm() < 1e-12);
            // Constructor rejects anything non-Hermitian or negative.
            prop_assert!(DensityMatrix::new(reduced.operator().clone()).is_ok());
        }
    }

    #[test]
    fn partial_trace_of_product_recovers_factor(a in density(&[3]), b in density(&[2])) {
        let joint = DensityMatrix::new(kron(a.operator(), b.operator())).unwrap();
        let left = partial_trace(&joint, &[0]).unwrap();
        prop_assert!((left.operator() - a.operator()).max_abs() < 1e-12);
    }

    #[test]
    fn fidelity_ignores_global_phase(psi in state(&[3, 3]), target in state(&[3, 3]), phase in 0.0..6.3f64) {
        let f = state_fidelity(&OutputState::Pure(psi.clone()), &target).unwrap();
        let rotated = QutritState::new(&[3, 3], psi.amplitudes() * C64::from_polar(1.0, phase)).unwrap();
        let g = state_fidelity(&OutputState::Pure(rotated), &target).unwrap();
        prop_assert!((f - g).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&f));
        let mixed = state_fidelity(&OutputState::Mixed(DensityMatrix::pure(&psi)), &target).unwrap();
        prop_assert!((f - mixed).abs() < 1e-12);
    }

    #[test]
    fn config_round_trips(
        omega_gate in 0.1..100.0f64,
        dt in 1e-6..1e-2f64,
        seed in any::<u64>(),
        cutoff in 0.1..10.0f64,
        eps in prop::collection::vec(0.0..0.5f64, 1..8),
        finite in any::<bool>(),
        bath_dim in 1usize..=8,
    ) {
        let cfg = ExperimentConfig {
            omega_gate,
            dt,
            seed,
            spectral_cutoff: cutoff,
            epsilon_grid: eps,
            pulse_mode: if finite { PulseSetting::Finite } else { PulseSetting::Instant },
            bath_dim,
            ..ExperimentConfig::default()
        };
        let back = ExperimentConfig::parse(&cfg.to_text()).unwrap();
        prop_assert_eq!(back, cfg);
    }
}
