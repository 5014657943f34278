//! Time-ordered propagation of schedules, toggling-frame transforms and
//! the first two Magnus terms.

use crate::error::{Error, Result};
use crate::linalg::{commutator, expm_propagator, kron, partial_trace, Operator, C64};
use crate::noise::{error_sum, kappa, NoiseModel};
use crate::sequence::{Schedule, Segment, Step};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Exact exponential for constant generators, midpoint steps otherwise.
    PiecewiseExact,
    /// `exp(−i H(t_mid) h)` on substeps no longer than `dt`.
    MidpointExponential,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    /// Maximum substep, ms.
    pub dt: f64,
    pub method: Method,
    /// Allowed unitarity drift of a result is ten times this.
    pub tolerance: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            dt: 1e-4,
            method: Method::MidpointExponential,
            tolerance: 1e-9,
        }
    }
}

impl IntegratorConfig {
    pub fn exact() -> Self {
        Self {
            method: Method::PiecewiseExact,
            ..Self::default()
        }
    }

    pub fn with_dt(self, dt: f64) -> Self {
        Self { dt, ..self }
    }
}

/// Everything that adds to the schedule's own generators.
enum Background<'a> {
    None,
    Static(Operator),
    Drift(&'a crate::noise::ClassicalNoise, Operator),
}

impl Background<'_> {
    fn is_time_dependent(&self) -> bool {
        matches!(self, Background::Drift(noise, _) if !noise.is_silent())
    }
}

/// Propagator of `schedule` under optional noise.
///
/// A [`NoiseModel::Bath`] extends the space to system ⊗ bath and returns the
/// joint propagator; the schedule must then act on a single qutrit.
pub fn propagate(schedule: &Schedule, noise: Option<&NoiseModel>, cfg: &IntegratorConfig) -> Result<Operator> {
    if !(cfg.dt > 0.0) || !cfg.dt.is_finite() {
        return Err(Error::InvalidParameter(format!("dt must be positive, got {}", cfg.dt)));
    }
    if !(cfg.tolerance > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tolerance must be positive, got {}",
            cfg.tolerance
        )));
    }
    let (dims, background) = match noise {
        None => (schedule.dims().to_vec(), Background::None),
        Some(NoiseModel::Bath(bath)) => {
            if schedule.dims() != [crate::system::QUTRIT] {
                return Err(Error::DimensionMismatch(format!(
                    "bath coupling needs a single-qutrit schedule, got {:?}",
                    schedule.dims()
                )));
            }
            let h = bath.static_hamiltonian();
            (h.dims().to_vec(), Background::Static(h))
        }
        Some(NoiseModel::Classical(classical)) => {
            let generator = error_sum(schedule.dims().len())?;
            (schedule.dims().to_vec(), Background::Drift(classical, generator))
        }
    };

    let mut u = Operator::identity(&dims);
    let mut t0 = 0.0;
    for step in schedule.steps() {
        match step {
            Step::Pulse(p) => u = &p.op.lift_to(&dims)? * &u,
            Step::Evolve(seg) => {
                let step_u = propagate_segment(seg, t0, &dims, &background, cfg)?;
                u = &step_u * &u;
                t0 += seg.duration;
            }
        }
    }
    let deviation = u.unitarity_deviation();
    if deviation > 10.0 * cfg.tolerance {
        return Err(Error::NotUnitary { deviation });
    }
    Ok(u)
}

fn propagate_segment(
    seg: &Segment,
    t0: f64,
    dims: &[usize],
    background: &Background,
    cfg: &IntegratorConfig,
) -> Result<Operator> {
    if seg.duration == 0.0 {
        return Ok(Operator::identity(dims));
    }
    let at = |local: f64| -> Result<Operator> {
        let mut h = seg.generator.at(local, seg.duration).lift_to(dims)?;
        match background {
            Background::None => {}
            Background::Static(op) => h += op,
            Background::Drift(noise, generator) => h += &generator.scale_re(kappa(t0 + local, noise)),
        }
        Ok(h)
    };
    let constant = seg.generator.is_constant() && !background.is_time_dependent();
    if cfg.method == Method::PiecewiseExact && constant {
        return expm_propagator(&at(0.0)?, seg.duration);
    }
    if cfg.dt > seg.duration {
        return Err(Error::InvalidParameter(format!(
            "dt = {} ms exceeds segment '{}' of {} ms",
            cfg.dt, seg.label, seg.duration
        )));
    }
    let n = (seg.duration / cfg.dt).ceil() as usize;
    let h_step = seg.duration / n as f64;
    let mut u = Operator::identity(dims);
    if constant {
        let step = expm_propagator(&at(0.0)?, h_step)?;
        for _ in 0..n {
            u = &step * &u;
        }
        return Ok(u);
    }
    for i in 0..n {
        let mid = (i as f64 + 0.5) * h_step;
        u = &expm_propagator(&at(mid)?, h_step)? * &u;
    }
    Ok(u)
}

fn require_instantaneous(schedule: &Schedule) -> Result<()> {
    if !schedule.mode().is_instantaneous() {
        return Err(Error::RequiresInstantaneous);
    }
    Ok(())
}

/// `(duration, U_C)` per segment, `U_C` being the product of all pulses
/// applied before the segment, lifted to `dims`.
fn segment_frames(schedule: &Schedule, dims: &[usize]) -> Result<Vec<(f64, Operator)>> {
    require_instantaneous(schedule)?;
    let mut frame = Operator::identity(dims);
    let mut out = Vec::new();
    for step in schedule.steps() {
        match step {
            Step::Pulse(p) => frame = &p.op.lift_to(dims)? * &frame,
            Step::Evolve(seg) => out.push((seg.duration, frame.clone())),
        }
    }
    Ok(out)
}

/// `U_C†(t) h_i U_C(t)` with `U_C` the pulse frame; left-continuous in `t`,
/// so pulses at time `t` itself are not yet applied at `t = 0`.
pub fn toggling_hamiltonian(schedule: &Schedule, h_i: &Operator, t: f64) -> Result<Operator> {
    let total = schedule.total_duration();
    if !(t >= 0.0 && t <= total) {
        return Err(Error::TimeOutOfRange { t, duration: total });
    }
    let mut elapsed = 0.0;
    let frames = segment_frames(schedule, h_i.dims())?;
    for (duration, frame) in &frames {
        if t <= elapsed + duration && (t > elapsed || t == 0.0) {
            return Ok(h_i.toggled_by(frame));
        }
        elapsed += duration;
    }
    Ok(match frames.last() {
        Some((_, frame)) => h_i.toggled_by(frame),
        None => h_i.clone(),
    })
}

/// `∫ U_C† h_i U_C dt` over the schedule.
pub fn magnus1(schedule: &Schedule, h_i: &Operator) -> Result<Operator> {
    let mut sum = Operator::zeros(h_i.dims());
    for (duration, frame) in segment_frames(schedule, h_i.dims())? {
        sum += &h_i.toggled_by(&frame).scale_re(duration);
    }
    Ok(sum)
}

/// `−(i/2) ∫dt₁ ∫^{t₁}dt₂ [H̃(t₁), H̃(t₂)]` with `H̃ = U_C† h_i U_C + h_e`.
pub fn magnus2(schedule: &Schedule, h_i: &Operator, h_e: &Operator) -> Result<Operator> {
    if h_i.dims() != h_e.dims() {
        return Err(Error::DimensionMismatch(format!(
            "h_i {:?} vs h_e {:?}",
            h_i.dims(),
            h_e.dims()
        )));
    }
    let mut earlier = Operator::zeros(h_i.dims());
    let mut acc = Operator::zeros(h_i.dims());
    for (duration, frame) in segment_frames(schedule, h_i.dims())? {
        let h = &h_i.toggled_by(&frame) + h_e;
        acc += &commutator(&h, &earlier)?.scale_re(duration);
        earlier += &h.scale_re(duration);
    }
    Ok(acc.scale(C64::new(0.0, -0.5)))
}

/// `X − I_S ⊗ Tr_S(X)/d_S` with the system as the leading factor.
pub fn nontrivial_part(x: &Operator) -> Result<Operator> {
    let dims = x.dims();
    if dims.len() < 2 {
        return Ok(x - &Operator::identity(dims).scale(x.trace() / x.dim() as f64));
    }
    let d_s = dims[0];
    let keep: Vec<usize> = (1..dims.len()).collect();
    let reduced = partial_trace(x, &keep)?.scale_re(1.0 / d_s as f64);
    Ok(x - &kron(&Operator::identity(&dims[..1]), &reduced))
}
