//! Parameter sweeps behind the experiment commands. Every grid point is an
//! independent pure computation; rows are sorted by their parameter before
//! output so the worker count never changes the bytes written.

use rayon::prelude::*;
use rayon::ThreadPool;

use super::config::{ExperimentConfig, PulseSetting};
use super::output::{loglog_slope, Table};
use crate::error::{Error, Result};
use crate::evolve::{propagate, IntegratorConfig};
use crate::metrics::{gate_fidelity, memory_infidelity, memory_residual};
use crate::noise::{kappa, ClassicalNoise, NoiseModel, QuantumBath, SpectralPhases};
use crate::sequence::{
    bare_gate_schedule, bare_memory, gate_protection_schedule, memory_dd_first_order, memory_dd_second_order,
    omega_dd_for_tau_dd, GateTiming, PulseMode,
};
use crate::system::QutritState;

/// Worker pool with exactly `jobs` threads (0 means one per core).
pub fn pool(jobs: usize) -> Result<ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))
}

fn run_grid<F>(pool: &ThreadPool, grid: &[f64], f: F) -> Result<Vec<Vec<f64>>>
where
    F: Fn(f64) -> Result<Vec<f64>> + Sync,
{
    if grid.is_empty() {
        return Err(Error::InvalidParameter("empty sweep grid".into()));
    }
    let mut rows = pool.install(|| grid.par_iter().map(|&x| f(x)).collect::<Result<Vec<_>>>())?;
    rows.sort_by(|a, b| a[0].total_cmp(&b[0]));
    Ok(rows)
}

fn table(header: Vec<&'static str>, rows: Vec<Vec<f64>>) -> Table {
    let mut t = Table::new(header);
    for r in rows {
        t.push(r);
    }
    t
}

#[derive(Debug, Clone, PartialEq)]
pub struct MemorySweep {
    pub order: u8,
    /// `lambda_tau, residual_bare, residual_dd, infidelity_bare, infidelity_dd`.
    pub table: Table,
    pub residual_slope_bare: Option<f64>,
    pub residual_slope_dd: Option<f64>,
    pub infidelity_slope_bare: Option<f64>,
    pub infidelity_slope_dd: Option<f64>,
}

impl MemorySweep {
    pub fn summary(&self) -> String {
        let s = |v: Option<f64>| v.map_or("n/a".to_string(), |x| format!("{x:.4}"));
        format!(
            "order {} log-log slopes: residual bare {} dd {}; infidelity bare {} dd {}",
            self.order,
            s(self.residual_slope_bare),
            s(self.residual_slope_dd),
            s(self.infidelity_slope_bare),
            s(self.infidelity_slope_dd)
        )
    }
}

/// Memory protection versus coupling: for each λτ, a seeded bath scaled to
/// spectral norm λ, the order-`order` sequence with interval τ, and bare
/// evolution over the same free time. Pulses are instantaneous.
pub fn memory_sweep(cfg: &ExperimentConfig, order: u8, pool: &ThreadPool) -> Result<MemorySweep> {
    let builder = match order {
        1 => memory_dd_first_order,
        2 => memory_dd_second_order,
        other => return Err(Error::InvalidParameter(format!("memory order {other} not in {{1, 2}}"))),
    };
    let base = QuantumBath::seeded(cfg.bath_dim, 1.0, cfg.seed)?;
    let tau = cfg.memory_tau;
    let integrator = IntegratorConfig::exact();
    let rows = run_grid(pool, &cfg.lambda_tau_grid, |lambda_tau| {
        let noise = NoiseModel::Bath(base.scaled(lambda_tau / tau));
        let dd = builder(tau, PulseMode::Instantaneous)?;
        let bare = bare_memory(dd.free_duration())?;
        let u_dd = propagate(&dd, Some(&noise), &integrator)?;
        let u_bare = propagate(&bare, Some(&noise), &integrator)?;
        Ok(vec![
            lambda_tau,
            memory_residual(&u_bare)?,
            memory_residual(&u_dd)?,
            memory_infidelity(&u_bare)?,
            memory_infidelity(&u_dd)?,
        ])
    })?;
    let t = table(
        vec![
            "lambda_tau",
            "residual_bare",
            "residual_dd",
            "infidelity_bare",
            "infidelity_dd",
        ],
        rows,
    );
    let x = t.column("lambda_tau").expect("column");
    let slope = |name: &str| loglog_slope(&x, &t.column(name).expect("column"));
    Ok(MemorySweep {
        order,
        residual_slope_bare: slope("residual_bare"),
        residual_slope_dd: slope("residual_dd"),
        infidelity_slope_bare: slope("infidelity_bare"),
        infidelity_slope_dd: slope("infidelity_dd"),
        table: t,
    })
}

fn classical_noise(cfg: &ExperimentConfig, ratio: f64) -> Result<ClassicalNoise> {
    let noise = ClassicalNoise::new(ratio * cfg.omega_gate, cfg.spectral_cutoff)?;
    if cfg.noise_phases == 0 {
        return Ok(noise);
    }
    noise.with_random_phases(SpectralPhases {
        seed: cfg.seed,
        components: cfg.noise_phases,
    })
}

fn integrator(cfg: &ExperimentConfig) -> IntegratorConfig {
    IntegratorConfig::default().with_dt(cfg.dt)
}

fn bell_fidelity(u: &crate::linalg::Operator) -> Result<f64> {
    gate_fidelity(u, &QutritState::bell_input(), &QutritState::bell_target())
}

/// Bell-state fidelity of the protected gate at noise ratio ε/Ω.
pub fn protected_gate_fidelity(cfg: &ExperimentConfig, ratio: f64, mode: PulseMode) -> Result<f64> {
    let noise = NoiseModel::Classical(classical_noise(cfg, ratio)?);
    let schedule = gate_protection_schedule(GateTiming::from_omega(cfg.omega_gate), mode)?;
    bell_fidelity(&propagate(&schedule, Some(&noise), &integrator(cfg))?)
}

/// Bell-state fidelity of the unprotected gate at noise ratio ε/Ω.
pub fn bare_gate_fidelity(cfg: &ExperimentConfig, ratio: f64) -> Result<f64> {
    let noise = NoiseModel::Classical(classical_noise(cfg, ratio)?);
    let schedule = bare_gate_schedule(GateTiming::from_omega(cfg.omega_gate))?;
    bell_fidelity(&propagate(&schedule, Some(&noise), &integrator(cfg))?)
}

fn configured_mode(cfg: &ExperimentConfig) -> Result<PulseMode> {
    match cfg.pulse_mode {
        PulseSetting::Instant => Ok(PulseMode::Instantaneous),
        PulseSetting::Finite => PulseMode::finite(cfg.omega_dd),
    }
}

/// `epsilon_over_omega, fidelity_bare, fidelity_dd` over the ε grid.
pub fn gate_epsilon_sweep(cfg: &ExperimentConfig, pool: &ThreadPool) -> Result<Table> {
    let mode = configured_mode(cfg)?;
    let rows = run_grid(pool, &cfg.epsilon_grid, |ratio| {
        Ok(vec![
            ratio,
            bare_gate_fidelity(cfg, ratio)?,
            protected_gate_fidelity(cfg, ratio, mode)?,
        ])
    })?;
    Ok(table(vec!["epsilon_over_omega", "fidelity_bare", "fidelity_dd"], rows))
}

/// `tau_dd_us, fidelity_dd` at fixed ε/Ω, with finite pulses whose strength
/// gives each DD operation the listed duration.
pub fn gate_tau_dd_sweep(cfg: &ExperimentConfig, pool: &ThreadPool) -> Result<Table> {
    let rows = run_grid(pool, &cfg.tau_dd_grid, |tau_dd_us| {
        let mode = PulseMode::finite(omega_dd_for_tau_dd(tau_dd_us * 1e-3)?)?;
        Ok(vec![tau_dd_us, protected_gate_fidelity(cfg, cfg.tau_dd_epsilon, mode)?])
    })?;
    Ok(table(vec!["tau_dd_us", "fidelity_dd"], rows))
}

/// `t_ms, kappa` on `kappa_steps + 1` evenly spaced times from 0.
pub fn kappa_trace(cfg: &ExperimentConfig) -> Result<Table> {
    let noise = classical_noise(cfg, cfg.kappa_epsilon)?;
    let mut t = Table::new(vec!["t_ms", "kappa"]);
    for i in 0..=cfg.kappa_steps {
        let time = cfg.kappa_t_max * i as f64 / cfg.kappa_steps as f64;
        t.push(vec![time, kappa(time, &noise)]);
    }
    Ok(t)
}
