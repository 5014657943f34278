//! `key = value` experiment configuration.

use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::noise::DEFAULT_CUTOFF;

/// DD pulse model used by the gate sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PulseSetting {
    Instant,
    Finite,
}

impl PulseSetting {
    pub fn as_str(self) -> &'static str {
        match self {
            PulseSetting::Instant => "instant",
            PulseSetting::Finite => "finite",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "instant" => Some(PulseSetting::Instant),
            "finite" => Some(PulseSetting::Finite),
            _ => None,
        }
    }
}

/// Every tunable of the experiment runner. Times in ms, frequencies in rad/ms.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    /// Gate drive amplitude Ω.
    pub omega_gate: f64,
    /// DD drive strength for finite pulses.
    pub omega_dd: f64,
    /// ε/Ω values of the gate sweep.
    pub epsilon_grid: Vec<f64>,
    /// Durations of one DD operation, μs.
    pub tau_dd_grid: Vec<f64>,
    /// ε/Ω held fixed during the τ_DD sweep.
    pub tau_dd_epsilon: f64,
    pub pulse_mode: PulseSetting,
    pub dt: f64,
    pub seed: u64,
    pub time_unit: String,
    /// Cutoff `a` of `S(ω) = ω Θ(a − ω)`.
    pub spectral_cutoff: f64,
    /// Seeded random spectral phases for κ(t); 0 disables.
    pub noise_phases: usize,
    /// Dimensionless λτ values of the memory sweep.
    pub lambda_tau_grid: Vec<f64>,
    /// Free interval τ of the memory sequences.
    pub memory_tau: f64,
    pub bath_dim: usize,
    pub verify_baths: usize,
    /// ε/Ω of the κ(t) trace.
    pub kappa_epsilon: f64,
    pub kappa_t_max: f64,
    pub kappa_steps: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            omega_gate: TAU,
            omega_dd: TAU * 100.0,
            epsilon_grid: (0..=20).map(|i| i as f64 * 0.005).collect(),
            tau_dd_grid: (1..=10).map(|i| i as f64 * 2.5).collect(),
            tau_dd_epsilon: 0.05,
            pulse_mode: PulseSetting::Finite,
            dt: 1e-4,
            seed: 0,
            time_unit: "ms".into(),
            spectral_cutoff: DEFAULT_CUTOFF,
            noise_phases: 0,
            lambda_tau_grid: (0..=5).map(|i| 10f64.powf(-3.0 + 0.2 * i as f64)).collect(),
            memory_tau: 1.0,
            bath_dim: 2,
            verify_baths: 100,
            kappa_epsilon: 0.05,
            kappa_t_max: 10.0,
            kappa_steps: 100,
        }
    }
}

/// `(key, description)` for every recognized key, in serialization order.
pub const KEYS: &[(&str, &str)] = &[
    ("omega_gate", "gate drive amplitude, rad/ms (2π·1)"),
    ("omega_dd", "finite DD pulse strength, rad/ms (2π·100)"),
    ("epsilon_grid", "ε/Ω values of gate-eps (0 to 0.1 step 0.005)"),
    (
        "tau_dd_grid",
        "DD operation durations of gate-taudd, μs (2.5 to 25 step 2.5)",
    ),
    ("tau_dd_epsilon", "ε/Ω held fixed in gate-taudd (0.05)"),
    ("pulse_mode", "instant | finite, gate sweeps only (finite)"),
    ("dt", "integrator step, ms (1e-4)"),
    ("seed", "seed for random baths and spectral phases (0)"),
    ("time_unit", "must be ms"),
    ("spectral_cutoff", "noise spectrum cutoff a, rad/ms (π/2)"),
    ("noise_phases", "random spectral lines in κ(t), 0 = closed form (0)"),
    (
        "lambda_tau_grid",
        "λτ values of the memory sweep (1e-3 to 1e-2, 6 log points)",
    ),
    ("memory_tau", "free interval of the memory sequences, ms (1)"),
    ("bath_dim", "bath dimension of the memory sweep (2)"),
    ("verify_baths", "random baths per verify identity (100)"),
    ("kappa_epsilon", "ε/Ω of the κ(t) trace (0.05)"),
    ("kappa_t_max", "end time of the κ(t) trace, ms (10)"),
    ("kappa_steps", "intervals of the κ(t) trace (100)"),
];

fn list(values: &[f64]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", ")
}

/// Accepts a plain number or a multiple of `pi` such as `2pi`, `0.5*pi`, `pi/2`.
fn parse_number(s: &str) -> Option<f64> {
    let s = s.trim();
    if let Ok(v) = s.parse::<f64>() {
        return Some(v);
    }
    let idx = s.find("pi")?;
    let (coef, rest) = (&s[..idx], &s[idx + 2..]);
    let coef = coef.trim().trim_end_matches('*').trim();
    let mut value = if coef.is_empty() {
        PI
    } else {
        coef.parse::<f64>().ok()? * PI
    };
    let rest = rest.trim();
    if let Some(div) = rest.strip_prefix('/') {
        value /= div.trim().parse::<f64>().ok()?;
    } else if let Some(mul) = rest.strip_prefix('*') {
        value *= mul.trim().parse::<f64>().ok()?;
    } else if !rest.is_empty() {
        return None;
    }
    Some(value)
}

impl ExperimentConfig {
    /// Parse `key = value` lines; `#` starts a comment. Unset keys keep
    /// their defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let err = |message: String| Error::Config { line, message };
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| err(format!("expected key = value, got '{content}'")))?;
            cfg.set(key.trim(), value.trim()).map_err(err)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Set one key from its text value.
    pub fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        let number = || parse_number(value).ok_or_else(|| format!("{key}: '{value}' is not a number"));
        let integer = || {
            value
                .parse::<u64>()
                .map_err(|_| format!("{key}: '{value}' is not a nonnegative integer"))
        };
        let grid = || -> std::result::Result<Vec<f64>, String> {
            value
                .split(',')
                .map(|item| parse_number(item).ok_or_else(|| format!("{key}: '{}' is not a number", item.trim())))
                .collect()
        };
        match key {
            "omega_gate" => self.omega_gate = number()?,
            "omega_dd" => self.omega_dd = number()?,
            "epsilon_grid" => self.epsilon_grid = grid()?,
            "tau_dd_grid" => self.tau_dd_grid = grid()?,
            "tau_dd_epsilon" => self.tau_dd_epsilon = number()?,
            "pulse_mode" => {
                self.pulse_mode = PulseSetting::parse(value)
                    .ok_or_else(|| format!("pulse_mode: '{value}' is not instant or finite"))?
            }
            "dt" => self.dt = number()?,
            "seed" => self.seed = integer()?,
            "time_unit" => self.time_unit = value.to_string(),
            "spectral_cutoff" => self.spectral_cutoff = number()?,
            "noise_phases" => self.noise_phases = integer()? as usize,
            "lambda_tau_grid" => self.lambda_tau_grid = grid()?,
            "memory_tau" => self.memory_tau = number()?,
            "bath_dim" => self.bath_dim = integer()? as usize,
            "verify_baths" => self.verify_baths = integer()? as usize,
            "kappa_epsilon" => self.kappa_epsilon = number()?,
            "kappa_t_max" => self.kappa_t_max = number()?,
            "kappa_steps" => self.kappa_steps = integer()? as usize,
            other => return Err(format!("unknown key '{other}'")),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        for (name, v) in [
            ("omega_gate", self.omega_gate),
            ("omega_dd", self.omega_dd),
            ("dt", self.dt),
            ("spectral_cutoff", self.spectral_cutoff),
            ("memory_tau", self.memory_tau),
            ("kappa_t_max", self.kappa_t_max),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return bad(format!("{name} must be positive, got {v}"));
            }
        }
        for (name, v) in [
            ("tau_dd_epsilon", self.tau_dd_epsilon),
            ("kappa_epsilon", self.kappa_epsilon),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return bad(format!("{name} must be nonnegative, got {v}"));
            }
        }
        for (name, g) in [
            ("epsilon_grid", &self.epsilon_grid),
            ("tau_dd_grid", &self.tau_dd_grid),
            ("lambda_tau_grid", &self.lambda_tau_grid),
        ] {
            if g.is_empty() {
                return bad(format!("{name} is empty"));
            }
            if let Some(v) = g.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
                return bad(format!("{name} contains {v}"));
            }
        }
        if let Some(v) = self.tau_dd_grid.iter().find(|v| **v == 0.0) {
            return bad(format!("tau_dd_grid contains {v}"));
        }
        if self.time_unit != "ms" {
            return bad(format!("time_unit '{}' unsupported, use ms", self.time_unit));
        }
        if !(1..=8).contains(&self.bath_dim) {
            return bad(format!("bath_dim {} outside 1..=8", self.bath_dim));
        }
        if self.verify_baths == 0 {
            return bad("verify_baths must be at least 1".into());
        }
        if self.kappa_steps == 0 {
            return bad("kappa_steps must be at least 1".into());
        }
        Ok(())
    }

    /// Text form accepted by [`ExperimentConfig::parse`]; numbers are written
    /// in shortest round-trip form so parsing it back is exact.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (key, help) in KEYS {
            let value = match *key {
                "omega_gate" => self.omega_gate.to_string(),
                "omega_dd" => self.omega_dd.to_string(),
                "epsilon_grid" => list(&self.epsilon_grid),
                "tau_dd_grid" => list(&self.tau_dd_grid),
                "tau_dd_epsilon" => self.tau_dd_epsilon.to_string(),
                "pulse_mode" => self.pulse_mode.as_str().to_string(),
                "dt" => self.dt.to_string(),
                "seed" => self.seed.to_string(),
                "time_unit" => self.time_unit.clone(),
                "spectral_cutoff" => self.spectral_cutoff.to_string(),
                "noise_phases" => self.noise_phases.to_string(),
                "lambda_tau_grid" => list(&self.lambda_tau_grid),
                "memory_tau" => self.memory_tau.to_string(),
                "bath_dim" => self.bath_dim.to_string(),
                "verify_baths" => self.verify_baths.to_string(),
                "kappa_epsilon" => self.kappa_epsilon.to_string(),
                "kappa_t_max" => self.kappa_t_max.to_string(),
                "kappa_steps" => self.kappa_steps.to_string(),
                other => unreachable!("key {other} missing from serializer"),
            };
            writeln!(out, "# {help}\n{key} = {value}").expect("write to string");
        }
        out
    }
}
