//! Noise models: a finite-dimensional quantum bath coupled through transverse
//! dephasing and longitudinal relaxation, and the deterministic classical
//! drift `κ(t)` that drives the gate error Hamiltonian.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{commutator, hermitian_spectral_norm, kron, Operator, ALG_TOL, C64};
use crate::system::{embed_single, ErrorAxis, EXC, G0, G1, QUTRIT};

/// Default spectral cutoff of `S(ω) = ω Θ(a − ω)`, in rad/ms.
pub const DEFAULT_CUTOFF: f64 = PI / 2.0;

fn ket_bra(row: usize, col: usize) -> Operator {
    Operator::ket_bra(QUTRIT, row, col)
}

/// `|e><e| − |g><g|`.
fn dephasing_part(g: usize) -> Operator {
    &ket_bra(EXC, EXC) - &ket_bra(g, g)
}

/// `e^{−iφ}|g><e| + e^{iφ}|e><g|`.
fn relaxation_part(g: usize, phi: f64) -> Operator {
    &ket_bra(g, EXC).scale(C64::from_polar(1.0, -phi)) + &ket_bra(EXC, g).scale(C64::from_polar(1.0, phi))
}

/// `e^{iφ}|e><g| − e^{−iφ}|g><e|`, the anti-Hermitian system factor that
/// appears in `[H_IP, H_IL]`.
fn skew_part(g: usize, phi: f64) -> Operator {
    &ket_bra(EXC, g).scale(C64::from_polar(1.0, phi)) - &ket_bra(g, EXC).scale(C64::from_polar(1.0, -phi))
}

/// A qutrit coupled to a `dim_e`-level environment.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumBath {
    pub b0: Operator,
    pub b1: Operator,
    pub e0: Operator,
    pub e1: Operator,
    pub h_e: Operator,
    pub phi0: f64,
    pub phi1: f64,
}

impl QuantumBath {
    pub fn new(
        b0: Operator,
        b1: Operator,
        e0: Operator,
        e1: Operator,
        h_e: Operator,
        phi0: f64,
        phi1: f64,
    ) -> Result<Self> {
        let dim_e = b0.dim();
        for op in [&b0, &b1, &e0, &e1, &h_e] {
            if op.dims() != [dim_e] {
                return Err(Error::DimensionMismatch(format!(
                    "bath operators must all have dims [{dim_e}], got {:?}",
                    op.dims()
                )));
            }
            let deviation = op.hermiticity_deviation();
            if deviation > ALG_TOL * op.max_abs().max(1.0) {
                return Err(Error::NotHermitian { deviation });
            }
        }
        Ok(Self {
            b0,
            b1,
            e0,
            e1,
            h_e,
            phi0,
            phi1,
        })
    }

    /// Random Hermitian bath operators, each with spectral norm
    /// `coupling_scale`, and phases `φ0 = φ1 = 0`.
    pub fn random<R: Rng + ?Sized>(dim_e: usize, coupling_scale: f64, rng: &mut R) -> Result<Self> {
        if !(1..=8).contains(&dim_e) {
            return Err(Error::InvalidParameter(format!("bath dimension {dim_e} outside 1..=8")));
        }
        if !(coupling_scale >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "coupling scale {coupling_scale} must be nonnegative"
            )));
        }
        let mut draw = || random_hermitian(dim_e, coupling_scale, rng);
        let (b0, b1, e0, e1, h_e) = (draw()?, draw()?, draw()?, draw()?, draw()?);
        Self::new(b0, b1, e0, e1, h_e, 0.0, 0.0)
    }

    pub fn seeded(dim_e: usize, coupling_scale: f64, seed: u64) -> Result<Self> {
        Self::random(dim_e, coupling_scale, &mut ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn dim_e(&self) -> usize {
        self.b0.dim()
    }

    /// Largest spectral norm among the five bath operators.
    pub fn coupling_scale(&self) -> f64 {
        [&self.b0, &self.b1, &self.e0, &self.e1, &self.h_e]
            .iter()
            .map(|op| hermitian_spectral_norm(op).expect("validated Hermitian"))
            .fold(0.0, f64::max)
    }

    /// Every bath operator multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            b0: self.b0.scale_re(factor),
            b1: self.b1.scale_re(factor),
            e0: self.e0.scale_re(factor),
            e1: self.e1.scale_re(factor),
            h_e: self.h_e.scale_re(factor),
            phi0: self.phi0,
            phi1: self.phi1,
        }
    }

    pub fn with_phases(mut self, phi0: f64, phi1: f64) -> Self {
        self.phi0 = phi0;
        self.phi1 = phi1;
        self
    }

    /// Drop the relaxation couplings `E0, E1`.
    pub fn dephasing_only(mut self) -> Self {
        self.e0 = Operator::zeros(self.e0.dims());
        self.e1 = Operator::zeros(self.e1.dims());
        self
    }

    /// Drop the dephasing couplings `B0, B1`.
    pub fn relaxation_only(mut self) -> Self {
        self.b0 = Operator::zeros(self.b0.dims());
        self.b1 = Operator::zeros(self.b1.dims());
        self
    }

    /// Drop the free environment Hamiltonian.
    pub fn without_environment(mut self) -> Self {
        self.h_e = Operator::zeros(self.h_e.dims());
        self
    }

    /// `I_S ⊗ H_E`.
    pub fn environment(&self) -> Operator {
        kron(&Operator::identity(&[QUTRIT]), &self.h_e)
    }

    /// `H_IP + H_IL`.
    pub fn interaction(&self) -> Operator {
        &build_hip(self) + &build_hil(self)
    }

    /// `H_IP + H_IL + I ⊗ H_E`.
    pub fn static_hamiltonian(&self) -> Operator {
        &self.interaction() + &self.environment()
    }
}

fn random_hermitian<R: Rng + ?Sized>(dim: usize, norm: f64, rng: &mut R) -> Result<Operator> {
    let raw = Operator::from_fn(&[dim], |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let h = (&raw + &raw.adjoint()).scale_re(0.5);
    let current = hermitian_spectral_norm(&h)?;
    if current == 0.0 {
        return Ok(h);
    }
    Ok(h.scale_re(norm / current))
}

/// Transverse dephasing `(|e><e|−|0><0|)⊗B0 + (|e><e|−|1><1|)⊗B1`.
pub fn build_hip(bath: &QuantumBath) -> Operator {
    &kron(&dephasing_part(G0), &bath.b0) + &kron(&dephasing_part(G1), &bath.b1)
}

/// Longitudinal relaxation `(e^{−iφ0}|0><e| + h.c.)⊗E0 + (e^{−iφ1}|1><e| + h.c.)⊗E1`.
pub fn build_hil(bath: &QuantumBath) -> Operator {
    &kron(&relaxation_part(G0, bath.phi0), &bath.e0) + &kron(&relaxation_part(G1, bath.phi1), &bath.e1)
}

/// `[H_IP, H_IL]` evaluated directly.
pub fn commutator_hip_hil(bath: &QuantumBath) -> Operator {
    commutator(&build_hip(bath), &build_hil(bath)).expect("same dims")
}

/// `[H_IP, H_IL]` from its closed-form expansion in system ⊗ bath products.
pub fn commutator_hip_hil_expanded(bath: &QuantumBath) -> Operator {
    let (b0, b1, e0, e1) = (&bath.b0, &bath.b1, &bath.e0, &bath.e1);
    let anti = |x: &Operator, y: &Operator| &(x * y) + &(y * x);
    let s0 = skew_part(G0, bath.phi0);
    let s1 = skew_part(G1, bath.phi1);
    let up0 = ket_bra(EXC, G0).scale(C64::from_polar(1.0, bath.phi0));
    let down0 = ket_bra(G0, EXC).scale(C64::from_polar(1.0, -bath.phi0));
    let up1 = ket_bra(EXC, G1).scale(C64::from_polar(1.0, bath.phi1));
    let down1 = ket_bra(G1, EXC).scale(C64::from_polar(1.0, -bath.phi1));

    let mut out = kron(&s0, &anti(b0, e0));
    out += &kron(&s1, &anti(b1, e1));
    out += &(&kron(&up0, &(b1 * e0)) - &kron(&down0, &(e0 * b1)));
    out += &(&kron(&up1, &(b0 * e1)) - &kron(&down1, &(e1 * b0)));
    out
}

/// `([H_E, H_IP], [H_E, H_IL])` evaluated directly on the joint space.
pub fn commutators_he(bath: &QuantumBath) -> (Operator, Operator) {
    let env = bath.environment();
    (
        commutator(&env, &build_hip(bath)).expect("same dims"),
        commutator(&env, &build_hil(bath)).expect("same dims"),
    )
}

/// Same pair, assembled from bath-only commutators `[H_E, B_g]`, `[H_E, E_g]`.
pub fn commutators_he_expanded(bath: &QuantumBath) -> (Operator, Operator) {
    let c = |x: &Operator| commutator(&bath.h_e, x).expect("same dims");
    let with_hip = &kron(&dephasing_part(G0), &c(&bath.b0)) + &kron(&dephasing_part(G1), &c(&bath.b1));
    let with_hil =
        &kron(&relaxation_part(G0, bath.phi0), &c(&bath.e0)) + &kron(&relaxation_part(G1, bath.phi1), &c(&bath.e1));
    (with_hip, with_hil)
}

/// Optional extension: replace the continuum integral by `components`
/// equally spaced spectral lines with seeded random phases.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralPhases {
    pub seed: u64,
    pub components: usize,
}

/// Classical drift `κ(t) = ε ∫ S(ω) cos(ωt) dω / π` with `S(ω) = ω Θ(a − ω)`.
///
/// Time in ms, `epsilon` and `cutoff` in rad/ms.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalNoise {
    epsilon: f64,
    cutoff: f64,
    phases: Option<Vec<f64>>,
}

impl ClassicalNoise {
    pub fn new(epsilon: f64, cutoff: f64) -> Result<Self> {
        if !(epsilon >= 0.0) || !epsilon.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "noise amplitude {epsilon} must be finite and nonnegative"
            )));
        }
        if !(cutoff > 0.0) || !cutoff.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "spectral cutoff {cutoff} must be positive"
            )));
        }
        Ok(Self {
            epsilon,
            cutoff,
            phases: None,
        })
    }

    /// `ε = ratio · omega_gate` with the default cutoff.
    pub fn relative(ratio: f64, omega_gate: f64) -> Result<Self> {
        Self::new(ratio * omega_gate, DEFAULT_CUTOFF)
    }

    pub fn with_cutoff(self, cutoff: f64) -> Result<Self> {
        let mut out = Self::new(self.epsilon, cutoff)?;
        out.phases = self.phases;
        Ok(out)
    }

    pub fn with_random_phases(mut self, lines: SpectralPhases) -> Result<Self> {
        if lines.components == 0 {
            return Err(Error::InvalidParameter(
                "random-phase expansion needs at least one component".into(),
            ));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(lines.seed);
        self.phases = Some((0..lines.components).map(|_| rng.random::<f64>() * TAU).collect());
        Ok(self)
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn is_silent(&self) -> bool {
        self.epsilon == 0.0
    }
}

/// Evaluate `κ(t)` (rad/ms). `t` must be nonnegative.
pub fn kappa(t: f64, noise: &ClassicalNoise) -> f64 {
    debug_assert!(t >= 0.0, "kappa: negative time {t}");
    if noise.epsilon == 0.0 {
        return 0.0;
    }
    let a = noise.cutoff;
    let integral = match &noise.phases {
        None => cosine_moment(a, t),
        Some(phases) => {
            let n = phases.len();
            let dw = a / n as f64;
            phases
                .iter()
                .enumerate()
                .map(|(j, theta)| {
                    let w = (j as f64 + 0.5) * dw;
                    w * (w * t + theta).cos() * dw
                })
                .sum()
        }
    };
    noise.epsilon * integral / PI
}

/// `∫₀^a ω cos(ωt) dω = a sin(at)/t + (cos(at) − 1)/t²`, with a power series
/// near `at = 0` where the closed form cancels catastrophically.
fn cosine_moment(a: f64, t: f64) -> f64 {
    let x = a * t;
    if x.abs() < 0.5 {
        // a² Σ_n (−1)^n x^{2n} / ((2n)! (2n + 2))
        let mut term = 1.0; // (−1)^n x^{2n} / (2n)!
        let mut sum = 0.0;
        for n in 0..12 {
            sum += term / (2 * n + 2) as f64;
            let k = (2 * n + 1) as f64;
            term *= -x * x / (k * (k + 1.0));
        }
        a * a * sum
    } else {
        a * x.sin() / t + (x.cos() - 1.0) / (t * t)
    }
}

/// `Σ_qutrits Σ_axes G_axis`, the error generator with all coefficients equal.
pub fn error_sum(num_qutrits: usize) -> Result<Operator> {
    if !(1..=2).contains(&num_qutrits) {
        return Err(Error::InvalidParameter(format!(
            "error Hamiltonian defined for 1 or 2 qutrits, got {num_qutrits}"
        )));
    }
    let single = ErrorAxis::ALL
        .iter()
        .map(|axis| axis.single_qutrit())
        .reduce(|acc, g| &acc + &g)
        .expect("six axes");
    let mut total = embed_single(&single, 0, num_qutrits)?;
    for q in 1..num_qutrits {
        total += &embed_single(&single, q, num_qutrits)?;
    }
    Ok(total)
}

/// `H_e(t) = κ(t) Σ_k Σ_axes G_axis^(k)`.
pub fn classical_error_hamiltonian(t: f64, noise: &ClassicalNoise, num_qutrits: usize) -> Result<Operator> {
    Ok(error_sum(num_qutrits)?.scale_re(kappa(t, noise)))
}

/// Noise seen by a propagation.
#[allow(clippy::large_enum_variant)]
#[derive(Debug, Clone, PartialEq)]
pub enum NoiseModel {
    /// Joint system–bath evolution; only valid for single-qutrit schedules.
    Bath(QuantumBath),
    /// `H_e(t)` added to every segment generator.
    Classical(ClassicalNoise),
}
