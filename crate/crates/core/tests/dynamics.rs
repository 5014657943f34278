//! Integrator convergence, toggling frames, finite pulses and scaling laws.

use std::f64::consts::{PI, TAU};
use std::path::PathBuf;

use qutrit_dd::evolve::{magnus2, nontrivial_part, propagate, toggling_hamiltonian, IntegratorConfig, Method};
use qutrit_dd::experiment::sweep::{memory_sweep, pool, protected_gate_fidelity};
use qutrit_dd::experiment::ExperimentConfig;
use qutrit_dd::linalg::{frobenius_norm, phase_insensitive_distance, Operator};
use qutrit_dd::noise::{ClassicalNoise, NoiseModel, QuantumBath};
use qutrit_dd::sequence::{
    gate_protection_schedule, memory_dd_first_order, ms_effective_rabi, parse_schedule_text, pulse_realization,
    Envelope, GateTiming, Generator, MsParams, PulseMode, Schedule, Segment, SegmentKind,
};
use qutrit_dd::system::{DdSet, EXC, G0, QUTRIT};

fn midpoint(dt: f64) -> IntegratorConfig {
    IntegratorConfig {
        dt,
        method: Method::MidpointExponential,
        tolerance: 1e-9,
    }
}

fn observed_order(schedule: &Schedule, noise: &NoiseModel, coarse: f64) -> f64 {
    let reference = propagate(schedule, Some(noise), &midpoint(coarse / 256.0)).unwrap();
    let err = |dt: f64| frobenius_norm(&(&propagate(schedule, Some(noise), &midpoint(dt)).unwrap() - &reference));
    (err(coarse) / err(coarse / 2.0)).log2()
}

#[test]
fn midpoint_is_second_order_on_ramp() {
    let flip = &Operator::ket_bra(3, G0, EXC) + &Operator::ket_bra(3, EXC, G0);
    let mut s = Schedule::new(&[QUTRIT], PulseMode::Instantaneous);
    s.push_segment(Segment {
        duration: 0.5,
        generator: Generator::driven(Envelope::Ramp { start: 0.0, end: 8.0 }, flip, "flip").unwrap(),
        label: "ramp".into(),
        kind: SegmentKind::Free,
    })
    .unwrap();
    let noise = NoiseModel::Classical(ClassicalNoise::new(3.0, PI / 2.0).unwrap());
    let order = observed_order(&s, &noise, 0.05);
    assert!((1.8..=2.2).contains(&order), "order {order}");
}

#[test]
fn midpoint_is_second_order_on_gate() {
    let s = gate_protection_schedule(GateTiming::from_omega(TAU), PulseMode::Instantaneous).unwrap();
    let noise = NoiseModel::Classical(ClassicalNoise::relative(0.1, TAU).unwrap());
    let order = observed_order(&s, &noise, 0.125 / 4.0);
    assert!((1.8..=2.2).contains(&order), "order {order}");
}

#[test]
fn toggling_frame_follows_blocks() {
    let tau = 0.3;
    let s = memory_dd_first_order(tau, PulseMode::Instantaneous).unwrap();
    let bath = QuantumBath::seeded(2, 1.0, 11).unwrap();
    let h = bath.interaction();
    let dd = DdSet::standard();
    let lift = |k: usize| dd.p(k).lift_to(h.dims()).unwrap();
    for k in 1..=3 {
        let start = 2.0 * (k - 1) as f64 * tau;
        let first = toggling_hamiltonian(&s, &h, start + 0.5 * tau).unwrap();
        assert!((&first - &h.toggled_by(&lift(k))).max_abs() < 1e-13);
        let second = toggling_hamiltonian(&s, &h, start + 1.5 * tau).unwrap();
        let want = h.toggled_by(&(&lift(4) * &lift(k)));
        assert!((&second - &want).max_abs() < 1e-13);
    }
    assert!(toggling_hamiltonian(&s, &h, 7.0 * tau).is_err());
}

#[test]
fn first_order_leaves_second_order_term() {
    let tau = 1.0;
    let s = memory_dd_first_order(tau, PulseMode::Instantaneous).unwrap();
    for seed in 0..5 {
        let bath = QuantumBath::seeded(2, 1.0, seed).unwrap();
        let m2 = magnus2(&s, &bath.interaction(), &bath.environment()).unwrap();
        let size = frobenius_norm(&nontrivial_part(&m2).unwrap());
        assert!(size > 1e-2, "seed {seed}: {size}");
    }
}

#[test]
fn finite_pulses_realize_ideal_operators() {
    let dd = DdSet::standard();
    for k in 1..=4 {
        let s = pulse_realization(k, TAU * 100.0).unwrap();
        let u = propagate(&s, None, &IntegratorConfig::exact()).unwrap();
        assert!(phase_insensitive_distance(&u, dd.p(k)) < 1e-10, "p{k}");
    }
}

#[test]
fn finite_pulses_approach_instantaneous_limit() {
    let cfg = ExperimentConfig::default();
    let ideal = protected_gate_fidelity(&cfg, 0.05, PulseMode::Instantaneous).unwrap();
    let gaps: Vec<f64> = [25.0, 100.0, 400.0, 1600.0]
        .iter()
        .map(|m| {
            let f = protected_gate_fidelity(&cfg, 0.05, PulseMode::finite(TAU * m).unwrap()).unwrap();
            (f - ideal).abs()
        })
        .collect();
    assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
    assert!(gaps[3] < 1e-4, "{gaps:?}");
}

#[test]
fn first_order_scaling_law() {
    let sweep = memory_sweep(&ExperimentConfig::default(), 1, &pool(0).unwrap()).unwrap();
    let within = |v: Option<f64>, want: f64| (v.unwrap() - want).abs() <= 0.3;
    assert!(within(sweep.infidelity_slope_bare, 2.0), "{}", sweep.summary());
    assert!(within(sweep.infidelity_slope_dd, 4.0), "{}", sweep.summary());
    assert!(within(sweep.residual_slope_bare, 1.0), "{}", sweep.summary());
    assert!(within(sweep.residual_slope_dd, 2.0), "{}", sweep.summary());
}

#[test]
fn gate_schedule_matches_golden_text() {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden/gate_finite_2pi100.txt");
    let s = gate_protection_schedule(GateTiming::from_omega(TAU), PulseMode::finite(TAU * 100.0).unwrap()).unwrap();
    let text = s.to_text();
    if std::env::var_os("BLESS").is_some() {
        std::fs::write(&path, &text).unwrap();
    }
    let golden = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text, golden);
    let lines = parse_schedule_text(&golden).unwrap();
    let total: f64 = lines.iter().map(|l| l.duration).sum();
    assert!((total - s.total_duration()).abs() < 1e-12);
}

#[test]
fn ms_reduction_examples() {
    let ok = ms_effective_rabi(MsParams {
        eta: 0.1,
        omega1: 100.0,
        omega2: 100.0,
        delta: 200.0,
        phonon_number: 0.0,
    })
    .unwrap();
    assert!((ok.omega - 1.0).abs() < 1e-12);
    assert!((ok.detuning_ratio - 20.0).abs() < 1e-12);
    assert!((ok.lamb_dicke - 0.01).abs() < 1e-15);
    assert!(ok.warnings.is_empty());

    let close = ms_effective_rabi(MsParams {
        delta: 20.0,
        ..ok_params()
    })
    .unwrap();
    assert!((close.omega - 10.0).abs() < 1e-12);
    assert_eq!(close.warnings.len(), 1);

    let hot = ms_effective_rabi(MsParams {
        phonon_number: 10.0,
        ..ok_params()
    })
    .unwrap();
    assert!((hot.lamb_dicke - 0.11).abs() < 1e-12);
    assert_eq!(hot.warnings.len(), 1);

    assert!(ms_effective_rabi(MsParams {
        delta: 0.0,
        ..ok_params()
    })
    .is_err());
}

fn ok_params() -> MsParams {
    MsParams {
        eta: 0.1,
        omega1: 100.0,
        omega2: 100.0,
        delta: 200.0,
        phonon_number: 0.0,
    }
}
