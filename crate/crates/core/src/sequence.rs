//! Pulse schedules: memory decoupling sequences, the protected two-qutrit
//! gate, finite-duration pulse realizations and the Mølmer–Sørensen
//! effective coupling.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::format::g12;
use crate::linalg::{kron, Operator, ALG_TOL};
use crate::system::{pair_index, DdSet, EXC, G0, G1, QUTRIT};

/// How DD operators are applied.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PulseMode {
    /// Zero-duration unitaries between segments.
    Instantaneous,
    /// Square drives of strength `omega_dd` (rad/ms) that take time and see noise.
    FiniteTime { omega_dd: f64 },
}

impl PulseMode {
    pub fn finite(omega_dd: f64) -> Result<Self> {
        check_positive("omega_dd", omega_dd)?;
        Ok(PulseMode::FiniteTime { omega_dd })
    }

    pub fn is_instantaneous(&self) -> bool {
        matches!(self, PulseMode::Instantaneous)
    }
}

/// Real amplitude profile multiplying a fixed operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Envelope {
    Square {
        amplitude: f64,
    },
    /// Linear from `start` to `end` across the segment.
    Ramp {
        start: f64,
        end: f64,
    },
}

impl Envelope {
    /// Amplitude at local time `t` into a segment of length `duration`.
    pub fn at(&self, t: f64, duration: f64) -> f64 {
        match *self {
            Envelope::Square { amplitude } => amplitude,
            Envelope::Ramp { start, end } => {
                if duration == 0.0 {
                    start
                } else {
                    start + (end - start) * (t / duration)
                }
            }
        }
    }

    /// `∫ amplitude dt` over a segment of length `duration`.
    pub fn area(&self, duration: f64) -> f64 {
        match *self {
            Envelope::Square { amplitude } => amplitude * duration,
            Envelope::Ramp { start, end } => 0.5 * (start + end) * duration,
        }
    }
}

/// Hamiltonian of one segment. `name` identifies the operator in text output.
#[derive(Debug, Clone, PartialEq)]
pub enum Generator {
    Constant {
        op: Operator,
        name: String,
    },
    Driven {
        envelope: Envelope,
        op: Operator,
        name: String,
    },
}

impl Generator {
    pub fn idle(dims: &[usize]) -> Self {
        Generator::Constant {
            op: Operator::zeros(dims),
            name: "0".into(),
        }
    }

    pub fn constant(op: Operator, name: impl Into<String>) -> Result<Self> {
        check_hermitian(&op)?;
        Ok(Generator::Constant { op, name: name.into() })
    }

    pub fn driven(envelope: Envelope, op: Operator, name: impl Into<String>) -> Result<Self> {
        check_hermitian(&op)?;
        Ok(Generator::Driven {
            envelope,
            op,
            name: name.into(),
        })
    }

    pub fn dims(&self) -> &[usize] {
        self.operator().dims()
    }

    /// The fixed operator part.
    pub fn operator(&self) -> &Operator {
        match self {
            Generator::Constant { op, .. } | Generator::Driven { op, .. } => op,
        }
    }

    /// Generator at local time `t` in a segment of length `duration`.
    pub fn at(&self, t: f64, duration: f64) -> Operator {
        match self {
            Generator::Constant { op, .. } => op.clone(),
            Generator::Driven { envelope, op, .. } => op.scale_re(envelope.at(t, duration)),
        }
    }

    pub fn is_constant(&self) -> bool {
        match self {
            Generator::Constant { .. } => true,
            Generator::Driven { envelope, .. } => match envelope {
                Envelope::Square { .. } => true,
                Envelope::Ramp { start, end } => start == end,
            },
        }
    }

    pub fn is_idle(&self) -> bool {
        self.operator().max_abs() == 0.0
    }
}

/// What a segment physically is.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SegmentKind {
    /// Free evolution or an engineered gate drive.
    Free,
    /// Part of a finite-duration DD pulse.
    Pulse,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub duration: f64,
    pub generator: Generator,
    pub label: String,
    pub kind: SegmentKind,
}

/// Instantaneous unitary between segments.
#[derive(Debug, Clone, PartialEq)]
pub struct Pulse {
    pub op: Operator,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Step {
    Evolve(Segment),
    Pulse(Pulse),
}

/// Ordered list of segments and pulses, first applied first.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    dims: Vec<usize>,
    steps: Vec<Step>,
    mode: PulseMode,
}

impl Schedule {
    pub fn new(dims: &[usize], mode: PulseMode) -> Self {
        Self {
            dims: dims.to_vec(),
            steps: Vec::new(),
            mode,
        }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn mode(&self) -> PulseMode {
        self.mode
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn segments(&self) -> impl Iterator<Item = &Segment> {
        self.steps.iter().filter_map(|s| match s {
            Step::Evolve(seg) => Some(seg),
            Step::Pulse(_) => None,
        })
    }

    pub fn pulses(&self) -> impl Iterator<Item = &Pulse> {
        self.steps.iter().filter_map(|s| match s {
            Step::Pulse(p) => Some(p),
            Step::Evolve(_) => None,
        })
    }

    pub fn push_segment(&mut self, segment: Segment) -> Result<()> {
        if !(segment.duration >= 0.0) || !segment.duration.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "segment '{}' has invalid duration {}",
                segment.label, segment.duration
            )));
        }
        self.check_dims(segment.generator.dims())?;
        check_hermitian(segment.generator.operator())?;
        self.steps.push(Step::Evolve(segment));
        Ok(())
    }

    pub fn push_pulse(&mut self, pulse: Pulse) -> Result<()> {
        if !self.mode.is_instantaneous() {
            return Err(Error::RequiresInstantaneous);
        }
        self.check_dims(pulse.op.dims())?;
        let deviation = pulse.op.unitarity_deviation();
        if deviation > ALG_TOL {
            return Err(Error::NotUnitary { deviation });
        }
        self.steps.push(Step::Pulse(pulse));
        Ok(())
    }

    fn check_dims(&self, dims: &[usize]) -> Result<()> {
        if dims != self.dims.as_slice() {
            return Err(Error::DimensionMismatch(format!(
                "schedule dims {:?}, step dims {:?}",
                self.dims, dims
            )));
        }
        Ok(())
    }

    /// Sum of all segment durations.
    pub fn total_duration(&self) -> f64 {
        self.segments().map(|s| s.duration).sum()
    }

    /// Time spent in `Free` segments.
    pub fn free_duration(&self) -> f64 {
        self.segments()
            .filter(|s| s.kind == SegmentKind::Free)
            .map(|s| s.duration)
            .sum()
    }

    pub fn pulse_count(&self) -> usize {
        self.pulses().count()
    }

    /// Ordered product of the instantaneous pulses alone.
    pub fn pulse_product(&self) -> Operator {
        self.pulses()
            .fold(Operator::identity(&self.dims), |acc, p| &p.op * &acc)
    }

    /// Multiply runs of consecutive instantaneous pulses into one, dropping
    /// runs whose product is exactly the identity.
    pub fn merge_adjacent_pulses(&self) -> Schedule {
        let mut out = Schedule::new(&self.dims, self.mode);
        let mut pending: Option<Pulse> = None;
        let flush = |out: &mut Schedule, pending: &mut Option<Pulse>| {
            if let Some(p) = pending.take() {
                let id = Operator::identity(p.op.dims());
                if (&p.op - &id).max_abs() > ALG_TOL {
                    out.steps.push(Step::Pulse(p));
                }
            }
        };
        for step in &self.steps {
            match step {
                Step::Pulse(p) => {
                    pending = Some(match pending.take() {
                        None => p.clone(),
                        Some(prev) => Pulse {
                            op: &p.op * &prev.op,
                            name: format!("{}*{}", p.name, prev.name),
                        },
                    });
                }
                Step::Evolve(seg) => {
                    flush(&mut out, &mut pending);
                    out.steps.push(Step::Evolve(seg.clone()));
                }
            }
        }
        flush(&mut out, &mut pending);
        out
    }

    /// One [`ScheduleLine`] per step.
    pub fn describe(&self) -> Vec<ScheduleLine> {
        self.steps.iter().map(ScheduleLine::from_step).collect()
    }

    /// Line-oriented text form, `duration_ms | tag | params | label`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for line in self.describe() {
            writeln!(out, "{line}").expect("write to string");
        }
        out
    }
}

/// Kind tag of a text line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LineTag {
    Idle,
    Const,
    Square,
    Ramp,
    Pulse,
}

impl LineTag {
    fn as_str(self) -> &'static str {
        match self {
            LineTag::Idle => "idle",
            LineTag::Const => "const",
            LineTag::Square => "square",
            LineTag::Ramp => "ramp",
            LineTag::Pulse => "pulse",
        }
    }
}

impl FromStr for LineTag {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Ok(match s {
            "idle" => LineTag::Idle,
            "const" => LineTag::Const,
            "square" => LineTag::Square,
            "ramp" => LineTag::Ramp,
            "pulse" => LineTag::Pulse,
            other => return Err(format!("unknown tag '{other}'")),
        })
    }
}

/// One line of the text form. Operators are referenced by name only.
#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleLine {
    pub duration: f64,
    pub tag: LineTag,
    pub params: Vec<(String, String)>,
    pub label: String,
}

impl ScheduleLine {
    fn from_step(step: &Step) -> Self {
        match step {
            Step::Pulse(p) => ScheduleLine {
                duration: 0.0,
                tag: LineTag::Pulse,
                params: vec![("op".into(), p.name.clone())],
                label: p.name.clone(),
            },
            Step::Evolve(seg) => {
                let kind = match seg.kind {
                    SegmentKind::Free => "free",
                    SegmentKind::Pulse => "pulse",
                };
                let mut params = Vec::new();
                let tag = match &seg.generator {
                    g if g.is_idle() => LineTag::Idle,
                    Generator::Constant { name, .. } => {
                        params.push(("op".into(), name.clone()));
                        LineTag::Const
                    }
                    Generator::Driven { envelope, name, .. } => {
                        let tag = match *envelope {
                            Envelope::Square { amplitude } => {
                                params.push(("amplitude".into(), g12(amplitude)));
                                LineTag::Square
                            }
                            Envelope::Ramp { start, end } => {
                                params.push(("start".into(), g12(start)));
                                params.push(("end".into(), g12(end)));
                                LineTag::Ramp
                            }
                        };
                        params.push(("op".into(), name.clone()));
                        tag
                    }
                };
                params.push(("kind".into(), kind.into()));
                ScheduleLine {
                    duration: seg.duration,
                    tag,
                    params,
                    label: seg.label.clone(),
                }
            }
        }
    }

    pub fn param(&self, key: &str) -> Option<&str> {
        self.params.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

impl std::fmt::Display for ScheduleLine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let params = if self.params.is_empty() {
            "-".to_string()
        } else {
            self.params
                .iter()
                .map(|(k, v)| format!("{k}={v}"))
                .collect::<Vec<_>>()
                .join(" ")
        };
        write!(
            f,
            "{} | {} | {} | {}",
            g12(self.duration),
            self.tag.as_str(),
            params,
            self.label
        )
    }
}

/// Parse the text form. Blank lines and `#` comments are skipped.
pub fn parse_schedule_text(text: &str) -> Result<Vec<ScheduleLine>> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let err = |message: String| Error::Config { line: line_no, message };
        let fields: Vec<&str> = content.split('|').map(str::trim).collect();
        if fields.len() != 4 {
            return Err(err(format!("expected 4 fields, found {}", fields.len())));
        }
        let duration: f64 = fields[0]
            .parse()
            .map_err(|_| err(format!("bad duration '{}'", fields[0])))?;
        if !(duration >= 0.0) {
            return Err(err(format!("negative duration {duration}")));
        }
        let tag: LineTag = fields[1].parse().map_err(err)?;
        let params = if fields[2] == "-" {
            Vec::new()
        } else {
            fields[2]
                .split_whitespace()
                .map(|kv| {
                    kv.split_once('=')
                        .map(|(k, v)| (k.to_string(), v.to_string()))
                        .ok_or_else(|| err(format!("parameter '{kv}' is not key=value")))
                })
                .collect::<Result<Vec<_>>>()?
        };
        out.push(ScheduleLine {
            duration,
            tag,
            params,
            label: fields[3].to_string(),
        });
    }
    Ok(out)
}

fn check_positive(name: &str, x: f64) -> Result<()> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::InvalidParameter(format!("{name} must be positive, got {x}")));
    }
    Ok(())
}

fn check_hermitian(op: &Operator) -> Result<()> {
    let deviation = op.hermiticity_deviation();
    if deviation > ALG_TOL * op.max_abs().max(1.0) {
        return Err(Error::NotHermitian { deviation });
    }
    Ok(())
}

/// `|a><b| + |b><a|` on one qutrit.
fn flip(a: usize, b: usize) -> Operator {
    &Operator::ket_bra(QUTRIT, a, b) + &Operator::ket_bra(QUTRIT, b, a)
}

/// `(generator, duration)` pieces realizing `p_k` up to global phase on one qutrit.
fn realization_pieces(k: usize, omega_dd: f64) -> Result<Vec<(Operator, f64)>> {
    check_positive("omega_dd", omega_dd)?;
    let half_pi = PI / (2.0 * omega_dd);
    let pi = PI / omega_dd;
    Ok(match k {
        1 => vec![((&flip(EXC, G0) + &flip(EXC, G1)).scale_re(omega_dd * FRAC_1_SQRT_2), pi)],
        2 => vec![(
            (&flip(EXC, G0) + &Operator::ket_bra(QUTRIT, G1, G1)).scale_re(omega_dd),
            half_pi,
        )],
        3 => vec![(
            (&flip(EXC, G1) + &Operator::ket_bra(QUTRIT, G0, G0)).scale_re(omega_dd),
            half_pi,
        )],
        4 => vec![
            (flip(EXC, G0).scale_re(omega_dd), pi),
            (flip(EXC, G1).scale_re(omega_dd), pi),
        ],
        other => return Err(Error::DdIndexOutOfRange(other)),
    })
}

/// Duration of the finite realization of `p_k` at drive strength `omega_dd`.
pub fn pulse_duration(k: usize, omega_dd: f64) -> Result<f64> {
    Ok(realization_pieces(k, omega_dd)?.iter().map(|(_, d)| d).sum())
}

/// Drive strength at which one DD operation lasts `tau_dd` ms. The reference
/// operation is the single quarter-period pulse (`p2`, `p3`).
pub fn omega_dd_for_tau_dd(tau_dd: f64) -> Result<f64> {
    check_positive("tau_dd", tau_dd)?;
    Ok(PI / (2.0 * tau_dd))
}

/// Finite-time schedule on one qutrit whose noise-free propagator is `p_k`
/// up to a global phase.
pub fn pulse_realization(k: usize, omega_dd: f64) -> Result<Schedule> {
    let mut s = Schedule::new(&[QUTRIT], PulseMode::finite(omega_dd)?);
    push_realization(&mut s, k, 1)?;
    Ok(s)
}

fn push_realization(s: &mut Schedule, k: usize, num_qutrits: usize) -> Result<()> {
    let omega_dd = match s.mode {
        PulseMode::FiniteTime { omega_dd } => omega_dd,
        PulseMode::Instantaneous => {
            return Err(Error::InvalidParameter(
                "pulse realization needs a drive strength".into(),
            ))
        }
    };
    let pieces = realization_pieces(k, omega_dd)?;
    let count = pieces.len();
    for (i, (h, duration)) in pieces.into_iter().enumerate() {
        let op = local_sum(&h, num_qutrits);
        let label = if count == 1 {
            format!("p{k}")
        } else {
            format!("p{k}.{}", i + 1)
        };
        s.push_segment(Segment {
            duration,
            generator: Generator::constant(op, format!("drive_p{k}.{}", i + 1))?,
            label,
            kind: SegmentKind::Pulse,
        })?;
    }
    Ok(())
}

/// `h ⊗ I + I ⊗ h` (or `h` for one qutrit).
fn local_sum(h: &Operator, num_qutrits: usize) -> Operator {
    match num_qutrits {
        1 => h.clone(),
        _ => {
            let id = Operator::identity(&[QUTRIT]);
            &kron(h, &id) + &kron(&id, h)
        }
    }
}

/// Building blocks of a schedule before the pulse mode is chosen.
#[derive(Debug, Clone)]
enum Item {
    Dd(usize),
    Free(f64),
    Drive {
        duration: f64,
        generator: Generator,
        label: String,
    },
}

fn assemble(num_qutrits: usize, items: &[Item], mode: PulseMode) -> Result<Schedule> {
    assemble_with(&DdSet::standard(), num_qutrits, items, mode)
}

fn assemble_with(dd: &DdSet, num_qutrits: usize, items: &[Item], mode: PulseMode) -> Result<Schedule> {
    let dims = vec![QUTRIT; num_qutrits];
    let mut s = Schedule::new(&dims, mode);
    for item in items {
        match item {
            Item::Dd(k) => match mode {
                PulseMode::Instantaneous => {
                    let (op, name) = match num_qutrits {
                        1 => (dd.p(*k).clone(), format!("p{k}")),
                        _ => (dd.pair(*k), format!("p{k}p{k}")),
                    };
                    s.push_pulse(Pulse { op, name })?;
                }
                PulseMode::FiniteTime { .. } => push_realization(&mut s, *k, num_qutrits)?,
            },
            Item::Free(duration) => s.push_segment(Segment {
                duration: *duration,
                generator: Generator::idle(&dims),
                label: "f".into(),
                kind: SegmentKind::Free,
            })?,
            Item::Drive {
                duration,
                generator,
                label,
            } => s.push_segment(Segment {
                duration: *duration,
                generator: generator.clone(),
                label: label.clone(),
                kind: SegmentKind::Free,
            })?,
        }
    }
    Ok(s)
}

fn wrap(k: usize, inner: &[Item]) -> Vec<Item> {
    let mut out = Vec::with_capacity(inner.len() + 2);
    out.push(Item::Dd(k));
    out.extend_from_slice(inner);
    out.push(Item::Dd(k));
    out
}

/// `p1 X p1, p2 X p2, p3 X p3` in time order.
fn three_fold(inner: &[Item]) -> Vec<Item> {
    (1..=3).flat_map(|k| wrap(k, inner)).collect()
}

fn relaxation_layer(tau: f64) -> Vec<Item> {
    vec![Item::Free(tau), Item::Dd(4), Item::Free(tau), Item::Dd(4)]
}

fn first_order_items(tau: f64) -> Vec<Item> {
    three_fold(&relaxation_layer(tau))
}

/// First-order memory protection: free time `6 tau`, 12 DD operations.
pub fn memory_dd_first_order(tau: f64, mode: PulseMode) -> Result<Schedule> {
    check_positive("tau", tau)?;
    assemble(1, &first_order_items(tau), mode)
}

/// [`memory_dd_first_order`] with instantaneous pulses drawn from `dd`.
pub fn memory_dd_first_order_with(dd: &DdSet, tau: f64) -> Result<Schedule> {
    check_positive("tau", tau)?;
    assemble_with(dd, 1, &first_order_items(tau), PulseMode::Instantaneous)
}

/// Concatenated second-order memory protection: `W, p4, W, p4` with `W` the
/// three-fold wrap of the first-order sequence. Free time `36 tau`.
pub fn memory_dd_second_order(tau: f64, mode: PulseMode) -> Result<Schedule> {
    check_positive("tau", tau)?;
    let w = three_fold(&first_order_items(tau));
    let mut items = w.clone();
    items.push(Item::Dd(4));
    items.extend(w);
    items.push(Item::Dd(4));
    assemble(1, &items, mode)
}

/// Unprotected single-qutrit memory of the given free time.
pub fn bare_memory(free_time: f64) -> Result<Schedule> {
    check_positive("free_time", free_time)?;
    assemble(1, &[Item::Free(free_time)], PulseMode::Instantaneous)
}

/// Interval length and drive amplitude of the protected gate. Supply either
/// or both; when both are given they must satisfy `4 omega tau = π`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct GateTiming {
    pub tau: Option<f64>,
    pub omega: Option<f64>,
}

impl GateTiming {
    pub fn from_omega(omega: f64) -> Self {
        Self {
            tau: None,
            omega: Some(omega),
        }
    }

    pub fn from_tau(tau: f64) -> Self {
        Self {
            tau: Some(tau),
            omega: None,
        }
    }

    /// `(tau, omega)` with total drive area π over the four active intervals.
    pub fn resolve(&self) -> Result<(f64, f64)> {
        match (self.tau, self.omega) {
            (Some(tau), Some(omega)) => {
                check_positive("tau", tau)?;
                check_positive("omega", omega)?;
                let area = 4.0 * omega * tau;
                if (area - PI).abs() > 1e-9 * PI {
                    return Err(Error::InvalidParameter(format!(
                        "tau = {tau} ms and omega = {omega} rad/ms give drive area {area}, expected π"
                    )));
                }
                Ok((tau, omega))
            }
            (Some(tau), None) => {
                check_positive("tau", tau)?;
                Ok((tau, PI / (4.0 * tau)))
            }
            (None, Some(omega)) => {
                check_positive("omega", omega)?;
                Ok((PI / (4.0 * omega), omega))
            }
            (None, None) => Err(Error::InvalidParameter("gate timing needs tau or omega".into())),
        }
    }
}

/// `|ab><cd| + h.c.` on two qutrits.
fn two_qutrit_flip(ab: (usize, usize), cd: (usize, usize)) -> Operator {
    let dim = QUTRIT * QUTRIT;
    let i = pair_index(ab.0, ab.1);
    let j = pair_index(cd.0, cd.1);
    let mut op = &Operator::ket_bra(dim, i, j) + &Operator::ket_bra(dim, j, i);
    op = op.with_dims(vec![QUTRIT, QUTRIT]).expect("9 = 3·3");
    op
}

fn drive(duration: f64, omega: f64, op: Operator, name: &str, label: String) -> Result<Item> {
    Ok(Item::Drive {
        duration,
        generator: Generator::driven(Envelope::Square { amplitude: omega }, op, name)?,
        label,
    })
}

/// Protected controlled-phase gate: for `k = 1, 2, 3` the pair of intervals
/// `2k−1, 2k` is wrapped by `p_k⊗p_k` and split by `p4⊗p4`. Drives
/// `|ee><00|` on intervals 1–2, nothing on 3–4, `|11><ee|` on 5–6.
pub fn gate_protection_schedule(timing: GateTiming, mode: PulseMode) -> Result<Schedule> {
    let (tau, omega) = timing.resolve()?;
    let ee = (EXC, EXC);
    let lower = two_qutrit_flip(ee, (G0, G0));
    let upper = two_qutrit_flip((G1, G1), ee);
    let mut items = Vec::new();
    for k in 1..=3 {
        let pair: [Item; 2] = match k {
            1 => [
                drive(tau, omega, lower.clone(), "ee<>00", "H1".into())?,
                drive(tau, omega, lower.clone(), "ee<>00", "H2".into())?,
            ],
            2 => [
                Item::Drive {
                    duration: tau,
                    generator: Generator::idle(&[QUTRIT, QUTRIT]),
                    label: "H3".into(),
                },
                Item::Drive {
                    duration: tau,
                    generator: Generator::idle(&[QUTRIT, QUTRIT]),
                    label: "H4".into(),
                },
            ],
            _ => [
                drive(tau, omega, upper.clone(), "11<>ee", "H5".into())?,
                drive(tau, omega, upper.clone(), "11<>ee", "H6".into())?,
            ],
        };
        let [first, second] = pair;
        items.extend(wrap(k, &[first, Item::Dd(4), second, Item::Dd(4)]));
    }
    assemble(2, &items, mode)
}

/// Unprotected reference gate on the same `6 tau` timeline: `|ee><11|`
/// driven on intervals 1, 2, 5, 6 and idle on 3, 4.
pub fn bare_gate_schedule(timing: GateTiming) -> Result<Schedule> {
    let (tau, omega) = timing.resolve()?;
    let op = two_qutrit_flip((EXC, EXC), (G1, G1));
    let mut items = Vec::new();
    for interval in 1..=6 {
        let label = format!("H{interval}");
        items.push(if (3..=4).contains(&interval) {
            Item::Drive {
                duration: tau,
                generator: Generator::idle(&[QUTRIT, QUTRIT]),
                label,
            }
        } else {
            drive(tau, omega, op.clone(), "ee<>11", label)?
        });
    }
    assemble(2, &items, PulseMode::Instantaneous)
}

/// Inputs of the Mølmer–Sørensen effective coupling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MsParams {
    pub eta: f64,
    pub omega1: f64,
    pub omega2: f64,
    pub delta: f64,
    pub phonon_number: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MsReduction {
    /// `2 η² Ω1 Ω2 / δ`, rad/ms.
    pub omega: f64,
    /// `|δ| / max(|η Ω1|, |η Ω2|)`; infinite when `η = 0`.
    pub detuning_ratio: f64,
    /// `η² (n + 1)`.
    pub lamb_dicke: f64,
    pub warnings: Vec<String>,
}

/// Effective two-ion coupling strength with validity diagnostics.
pub fn ms_effective_rabi(p: MsParams) -> Result<MsReduction> {
    if p.delta == 0.0 || !p.delta.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "detuning must be nonzero and finite, got {}",
            p.delta
        )));
    }
    if !(p.phonon_number >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "phonon number must be nonnegative, got {}",
            p.phonon_number
        )));
    }
    let omega = 2.0 * p.eta * p.eta * p.omega1 * p.omega2 / p.delta;
    let coupling = (p.eta * p.omega1).abs().max((p.eta * p.omega2).abs());
    let detuning_ratio = if coupling == 0.0 {
        f64::INFINITY
    } else {
        p.delta.abs() / coupling
    };
    let lamb_dicke = p.eta * p.eta * (p.phonon_number + 1.0);
    let mut warnings = Vec::new();
    if detuning_ratio < 10.0 {
        warnings.push(format!("detuning only {detuning_ratio:.3}x the sideband coupling"));
    }
    if lamb_dicke >= 0.1 {
        warnings.push(format!("eta^2 (n+1) = {lamb_dicke:.3} is not small"));
    }
    Ok(MsReduction {
        omega,
        detuning_ratio,
        lamb_dicke,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::phase_insensitive_distance;
    use crate::system::dd_operator;

    #[test]
    fn first_order_bookkeeping() {
        let s = memory_dd_first_order(0.1, PulseMode::Instantaneous).unwrap();
        assert_eq!(s.pulse_count(), 12);
        assert_eq!(s.segments().count(), 6);
        assert!((s.total_duration() - 0.6).abs() < 1e-15);
        let names: Vec<_> = s.pulses().map(|p| p.name.as_str()).collect();
        assert_eq!(&names[..4], ["p1", "p4", "p4", "p1"]);
    }

    #[test]
    fn second_order_bookkeeping() {
        let s = memory_dd_second_order(1.0, PulseMode::Instantaneous).unwrap();
        assert_eq!(s.segments().count(), 36);
        assert_eq!(s.total_duration(), 36.0);
        assert_eq!(s.pulse_count(), 2 * 3 * (2 + 12) + 2);
    }

    #[test]
    fn pulse_products_are_identity() {
        for s in [
            memory_dd_first_order(0.1, PulseMode::Instantaneous).unwrap(),
            memory_dd_second_order(0.1, PulseMode::Instantaneous).unwrap(),
            gate_protection_schedule(GateTiming::from_tau(0.125), PulseMode::Instantaneous).unwrap(),
        ] {
            assert!(phase_insensitive_distance(&s.pulse_product(), &Operator::identity(s.dims())) < 1e-14);
        }
    }

    #[test]
    fn merge_removes_cancelling_pairs() {
        let s = memory_dd_first_order(0.1, PulseMode::Instantaneous).unwrap();
        let merged = s.merge_adjacent_pulses();
        assert_eq!(merged.total_duration(), s.total_duration());
        assert!(merged.pulse_count() < s.pulse_count());
        assert!((&merged.pulse_product() - &s.pulse_product()).max_abs() < 1e-14);
    }

    #[test]
    fn finite_mode_rejects_instant_pulses() {
        let mut s = Schedule::new(&[3], PulseMode::finite(1.0).unwrap());
        let err = s.push_pulse(Pulse {
            op: dd_operator(1).unwrap(),
            name: "p1".into(),
        });
        assert_eq!(err, Err(Error::RequiresInstantaneous));
    }

    #[test]
    fn non_unitary_pulse_rejected() {
        let mut s = Schedule::new(&[3], PulseMode::Instantaneous);
        let bad = Pulse {
            op: Operator::diagonal(&[1.0, 1.0, 0.5]),
            name: "bad".into(),
        };
        assert!(matches!(s.push_pulse(bad), Err(Error::NotUnitary { .. })));
    }

    #[test]
    fn p1_realization_lasts_five_microseconds() {
        let s = pulse_realization(1, 2.0 * PI * 100.0).unwrap();
        assert!((s.total_duration() - 0.005).abs() < 1e-15);
        assert!(s.segments().all(|seg| seg.kind == SegmentKind::Pulse));
        assert!(pulse_realization(1, 0.0).is_err());
        assert!(pulse_realization(5, 1.0).is_err());
    }

    #[test]
    fn tau_dd_mapping() {
        let omega = omega_dd_for_tau_dd(0.0025).unwrap();
        assert!((omega - 2.0 * PI * 100.0).abs() < 1e-9);
        assert!((pulse_duration(2, omega).unwrap() - 0.0025).abs() < 1e-15);
    }

    #[test]
    fn gate_timing_resolution() {
        let omega = 2.0 * PI;
        let (tau, w) = GateTiming::from_omega(omega).resolve().unwrap();
        assert!((tau - 0.125).abs() < 1e-15);
        assert_eq!(w, omega);
        let both = GateTiming {
            tau: Some(0.125),
            omega: Some(omega),
        };
        assert!(both.resolve().is_ok());
        let clash = GateTiming {
            tau: Some(0.2),
            omega: Some(omega),
        };
        assert!(clash.resolve().is_err());
        assert!(GateTiming::default().resolve().is_err());
    }

    #[test]
    fn gate_schedule_shape() {
        let s = gate_protection_schedule(GateTiming::from_tau(0.125), PulseMode::Instantaneous).unwrap();
        assert_eq!(s.segments().count(), 6);
        assert_eq!(s.pulse_count(), 12);
        assert!((s.total_duration() - 0.75).abs() < 1e-15);
        let area: f64 = s
            .segments()
            .map(|seg| match &seg.generator {
                Generator::Driven { envelope, .. } => envelope.area(seg.duration),
                _ => 0.0,
            })
            .sum();
        assert!((area - PI).abs() < 1e-12);

        let finite = gate_protection_schedule(GateTiming::from_tau(0.125), PulseMode::finite(100.0).unwrap()).unwrap();
        assert_eq!(finite.pulse_count(), 0);
        assert!((finite.free_duration() - 0.75).abs() < 1e-15);
        assert!(finite.total_duration() > 0.75);
    }

    #[test]
    fn envelope_values() {
        let ramp = Envelope::Ramp { start: 1.0, end: 3.0 };
        assert_eq!(ramp.at(0.5, 1.0), 2.0);
        assert_eq!(ramp.area(2.0), 4.0);
        assert_eq!(Envelope::Square { amplitude: 2.0 }.area(0.5), 1.0);
    }

    #[test]
    fn text_round_trip() {
        let s = gate_protection_schedule(GateTiming::from_tau(0.125), PulseMode::finite(100.0).unwrap()).unwrap();
        let text = s.to_text();
        let parsed = parse_schedule_text(&text).unwrap();
        assert_eq!(parsed.len(), s.steps().len());
        let again: String = parsed.iter().map(|l| format!("{l}\n")).collect();
        assert_eq!(again, text);
    }

    #[test]
    fn text_parse_errors() {
        assert!(parse_schedule_text("1 | idle | -").is_err());
        assert!(parse_schedule_text("x | idle | - | f").is_err());
        assert!(parse_schedule_text("1 | wobble | - | f").is_err());
        assert!(parse_schedule_text("1 | square | amplitude | f").is_err());
        assert_eq!(parse_schedule_text("# only a comment\n\n").unwrap(), vec![]);
    }

    #[test]
    fn ms_formula() {
        let base = MsParams {
            eta: 0.1,
            omega1: 2.0 * PI * 50.0,
            omega2: 2.0 * PI * 50.0,
            delta: 2.0 * PI * 5.0,
            phonon_number: 0.0,
        };
        let r = ms_effective_rabi(base).unwrap();
        assert!((r.omega - 2.0 * PI * 10.0).abs() < 1e-9);
        assert!(!r.warnings.is_empty());
        let doubled = ms_effective_rabi(MsParams {
            delta: 2.0 * base.delta,
            ..base
        })
        .unwrap();
        assert!((doubled.omega - r.omega / 2.0).abs() < 1e-12);
        let zero = ms_effective_rabi(MsParams { eta: 0.0, ..base }).unwrap();
        assert_eq!(zero.omega, 0.0);
        assert!(ms_effective_rabi(MsParams { delta: 0.0, ..base }).is_err());
        let quiet = ms_effective_rabi(MsParams {
            eta: 0.05,
            omega1: 1.0,
            omega2: 1.0,
            delta: 100.0,
            phonon_number: 1.0,
        })
        .unwrap();
        assert!(quiet.warnings.is_empty());
    }
}
