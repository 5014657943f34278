//! Algebraic decoupling identities checked over seeded random baths.

use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::evolve::magnus1;
use crate::linalg::{commutator, frobenius_norm, Operator};
use crate::noise::{
    build_hil, build_hip, commutator_hip_hil, commutator_hip_hil_expanded, commutators_he, commutators_he_expanded,
    error_sum, QuantumBath,
};
use crate::sequence::memory_dd_first_order_with;
use crate::system::{DdSet, G0, G1, QUTRIT};

/// Entrywise bound for exact identities.
pub const IDENTITY_TOL: f64 = 1e-12;
/// Bound on the normalized first-order average.
pub const MAGNUS_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub residual: f64,
    pub tolerance: f64,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.residual < self.tolerance
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:<44} max residual {:.3e} (tol {:.0e})",
            if self.passed() { "PASS" } else { "FAIL" },
            self.name,
            self.residual,
            self.tolerance
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub baths: usize,
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{c}")?;
        }
        let failed = self.checks.iter().filter(|c| !c.passed()).count();
        write!(
            f,
            "{} checks over {} baths, {} failed",
            self.checks.len(),
            self.baths,
            failed
        )
    }
}

pub const PULSES_HERMITIAN_UNITARY: &str = "p_k Hermitian, unitary, involutory";
pub const DEPHASING_CANCELS: &str = "sum_k p_k H_IP p_k = 0";
pub const RELAXATION_FLIPS: &str = "p4 H_IL p4 + H_IL = 0";
pub const COMBINED_CANCELS: &str = "sum_k p_k (p4 H_I p4 + H_I) p_k = 0";
pub const CROSS_COMMUTATOR_FLIPS: &str = "p4 [H_IP,H_IL] p4 + [H_IP,H_IL] = 0";
pub const CROSS_COMMUTATOR_EXPANSION: &str = "[H_IP,H_IL] expansion matches";
pub const ENVIRONMENT_EXPANSION: &str = "[H_E,H_IP], [H_E,H_IL] expansions match";
pub const COUPLINGS_HERMITIAN: &str = "H_IP, H_IL Hermitian";
pub const PULSE_CYCLE: &str = "first-order pulse product = I";
pub const FIRST_ORDER_AVERAGE: &str = "first-order average vanishes";
pub const ERROR_GENERATOR_STRUCTURE: &str = "error generator spares ground coherence";

/// Run every identity over `n_baths` random baths of dimension 2, 3, 4 in
/// turn, with random phases. `dd` supplies the pulse operators under test.
pub fn run_suite(dd: &DdSet, n_baths: usize, seed: u64) -> Result<VerifyReport> {
    if n_baths == 0 {
        return Err(Error::InvalidParameter("verify needs at least one bath".into()));
    }
    let mut worst = [0.0f64; 11];
    let p = |k: usize| dd.p(k);

    let id = Operator::identity(&[QUTRIT]);
    for k in 1..=4 {
        let pk = p(k);
        worst[0] = worst[0]
            .max(pk.hermiticity_deviation())
            .max(pk.unitarity_deviation())
            .max((&(pk * pk) - &id).max_abs());
    }
    let schedule = memory_dd_first_order_with(dd, 1.0)?;
    let cycle = schedule.pulse_product();
    worst[8] = (&cycle - &id).max_abs();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..n_baths {
        let dim_e = 2 + i % 3;
        let phi0 = rand::Rng::random::<f64>(&mut rng) * std::f64::consts::TAU;
        let phi1 = rand::Rng::random::<f64>(&mut rng) * std::f64::consts::TAU;
        let bath = QuantumBath::random(dim_e, 1.0, &mut rng)?.with_phases(phi0, phi1);
        let dims = [QUTRIT, dim_e];
        let lift = |k: usize| p(k).lift_to(&dims);
        let p4 = lift(4)?;
        let hip = build_hip(&bath);
        let hil = build_hil(&bath);
        let h_i = &hip + &hil;

        let mut dephasing = Operator::zeros(&dims);
        let mut combined = Operator::zeros(&dims);
        let flipped = &h_i.toggled_by(&p4) + &h_i;
        for k in 1..=3 {
            let pk = lift(k)?;
            dephasing += &hip.toggled_by(&pk);
            combined += &flipped.toggled_by(&pk);
        }
        worst[1] = worst[1].max(dephasing.max_abs());
        worst[2] = worst[2].max((&hil.toggled_by(&p4) + &hil).max_abs());
        worst[3] = worst[3].max(combined.max_abs());

        let cross = commutator(&hip, &hil)?;
        worst[4] = worst[4].max((&cross.toggled_by(&p4) + &cross).max_abs());
        worst[5] = worst[5].max((&commutator_hip_hil(&bath) - &commutator_hip_hil_expanded(&bath)).max_abs());
        let (a, b) = commutators_he(&bath);
        let (c, d) = commutators_he_expanded(&bath);
        worst[6] = worst[6].max((&a - &c).max_abs()).max((&b - &d).max_abs());
        worst[7] = worst[7]
            .max(hip.hermiticity_deviation())
            .max(hil.hermiticity_deviation());

        let scale = frobenius_norm(&h_i) * schedule.total_duration();
        let m1 = frobenius_norm(&magnus1(&schedule, &h_i)?);
        worst[9] = worst[9].max(if scale > 0.0 { m1 / scale } else { m1 });
    }

    for n in 1..=2 {
        let g = error_sum(n)?;
        let mut leak: f64 = 0.0;
        for q in 0..n {
            for rest in 0..QUTRIT.pow(n as u32 - 1) {
                let index = |level: usize| -> usize {
                    let mut digits = Vec::with_capacity(n);
                    let mut r = rest;
                    for pos in 0..n {
                        if pos == q {
                            digits.push(level);
                        } else {
                            digits.push(r % QUTRIT);
                            r /= QUTRIT;
                        }
                    }
                    digits.iter().fold(0, |acc, d| acc * QUTRIT + d)
                };
                leak = leak
                    .max(g.get(index(G0), index(G1)).norm())
                    .max(g.get(index(G1), index(G0)).norm());
            }
        }
        worst[10] = worst[10].max(leak);
    }

    let names = [
        PULSES_HERMITIAN_UNITARY,
        DEPHASING_CANCELS,
        RELAXATION_FLIPS,
        COMBINED_CANCELS,
        CROSS_COMMUTATOR_FLIPS,
        CROSS_COMMUTATOR_EXPANSION,
        ENVIRONMENT_EXPANSION,
        COUPLINGS_HERMITIAN,
        PULSE_CYCLE,
        FIRST_ORDER_AVERAGE,
        ERROR_GENERATOR_STRUCTURE,
    ];
    let checks = names
        .iter()
        .zip(worst)
        .map(|(name, residual)| Check {
            name,
            residual,
            tolerance: if *name == FIRST_ORDER_AVERAGE {
                MAGNUS_TOL
            } else {
                IDENTITY_TOL
            },
        })
        .collect();
    Ok(VerifyReport { baths: n_baths, checks })
}
