//! Fidelities, reduced states and decoupling diagnostics.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::evolve::{magnus1, magnus2, nontrivial_part};
use crate::linalg::{self, frobenius_norm, hermitian_eigen, Operator, C64};
use crate::sequence::Schedule;
use crate::system::{QutritState, COMPUTATIONAL};

/// Slack allowed when clamping a computed fidelity into `[0, 1]`.
pub const FIDELITY_SLOP: f64 = 1e-12;

/// Hermitian, unit-trace, positive semidefinite operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    op: Operator,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity to 1e−10.
    pub fn new(op: Operator) -> Result<Self> {
        const TOL: f64 = 1e-10;
        let eig = hermitian_eigen(&op)?;
        let trace = op.trace();
        if (trace - C64::new(1.0, 0.0)).norm() > TOL {
            return Err(Error::InvalidParameter(format!("density matrix trace {trace}")));
        }
        let min = eig.values.iter().cloned().fold(f64::INFINITY, f64::min);
        if min < -TOL {
            return Err(Error::InvalidParameter(format!(
                "density matrix has negative eigenvalue {min:e}"
            )));
        }
        Ok(Self { op })
    }

    pub fn pure(state: &QutritState) -> Self {
        Self { op: state.projector() }
    }

    pub fn operator(&self) -> &Operator {
        &self.op
    }

    pub fn dims(&self) -> &[usize] {
        self.op.dims()
    }

    /// `ρ → U ρ U†`.
    pub fn evolve(&self, u: &Operator) -> Result<Self> {
        if u.dims() != self.dims() {
            return Err(Error::DimensionMismatch(format!(
                "state {:?}, propagator {:?}",
                self.dims(),
                u.dims()
            )));
        }
        Ok(Self {
            op: &(u * &self.op) * &u.adjoint(),
        })
    }
}

/// Either kind of output state.
#[derive(Debug, Clone, PartialEq)]
pub enum OutputState {
    Pure(QutritState),
    Mixed(DensityMatrix),
}

impl From<QutritState> for OutputState {
    fn from(s: QutritState) -> Self {
        OutputState::Pure(s)
    }
}

impl From<DensityMatrix> for OutputState {
    fn from(r: DensityMatrix) -> Self {
        OutputState::Mixed(r)
    }
}

/// `<φ|ρ|φ>`, or `|<φ|ψ>|²` for a pure output.
pub fn state_fidelity(output: &OutputState, target: &QutritState) -> Result<f64> {
    let raw = match output {
        OutputState::Pure(psi) => {
            check_dims(psi.dims(), target.dims())?;
            target.inner(psi).norm_sqr()
        }
        OutputState::Mixed(rho) => {
            check_dims(rho.dims(), target.dims())?;
            let phi = target.amplitudes();
            (phi.adjoint() * rho.op.matrix() * phi)[(0, 0)].re
        }
    };
    clamp_fidelity(raw)
}

fn check_dims(a: &[usize], b: &[usize]) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch(format!("output {a:?}, target {b:?}")));
    }
    Ok(())
}

/// Clamp into `[0, 1]` if within [`FIDELITY_SLOP`], otherwise an error.
pub fn clamp_fidelity(raw: f64) -> Result<f64> {
    if !(-FIDELITY_SLOP..=1.0 + FIDELITY_SLOP).contains(&raw) {
        return Err(Error::InvalidParameter(format!("fidelity {raw} outside [0, 1]")));
    }
    Ok(raw.clamp(0.0, 1.0))
}

/// Reduced state on the subsystems in `keep`.
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    Ok(DensityMatrix {
        op: linalg::partial_trace(&rho.op, keep)?,
    })
}

/// Normalized first- or second-order decoupling residual.
///
/// Order 1: `‖M1(h_i)‖ / (‖h_i‖ T)`. Order 2: `‖M2(h_i, h_e)‖ / ((‖h_i‖ + ‖h_e‖) T)²`
/// keeping only the part of `M2` that acts nontrivially on the system.
/// Norms are Frobenius; `h_e` defaults to zero.
pub fn decoupling_residual(schedule: &Schedule, h_i: &Operator, h_e: Option<&Operator>, order: u8) -> Result<f64> {
    let total = schedule.total_duration();
    let zero = Operator::zeros(h_i.dims());
    let h_e = h_e.unwrap_or(&zero);
    match order {
        1 => {
            let scale = frobenius_norm(h_i) * total;
            let m = frobenius_norm(&magnus1(schedule, h_i)?);
            Ok(if scale == 0.0 { m } else { m / scale })
        }
        2 => {
            let scale = (frobenius_norm(h_i) + frobenius_norm(h_e)) * total;
            let m = frobenius_norm(&nontrivial_part(&magnus2(schedule, h_i, h_e)?)?);
            Ok(if scale == 0.0 { m } else { m / (scale * scale) })
        }
        other => Err(Error::InvalidParameter(format!(
            "decoupling order {other} not in {{1, 2}}"
        ))),
    }
}

fn bath_dim(u: &Operator) -> Result<usize> {
    match u.dims() {
        [3] => Ok(1),
        [3, d] => Ok(*d),
        other => Err(Error::DimensionMismatch(format!(
            "expected qutrit or qutrit ⊗ bath, got {other:?}"
        ))),
    }
}

/// Distance of a joint propagator from a pure-bath operator,
/// `‖U − I ⊗ Tr_S(U)/3‖ / √(3 d_E)`.
pub fn memory_residual(u: &Operator) -> Result<f64> {
    let d_e = bath_dim(u)?;
    let u = u.clone().with_dims(vec![3, d_e])?;
    Ok(frobenius_norm(&nontrivial_part(&u)?) / ((3 * d_e) as f64).sqrt())
}

/// `1 − F_e` with `F_e = Σ_{ab} |Tr_S <a|U|b>_E|² / (9 d_E)`, the entanglement
/// infidelity of the memory channel for a maximally mixed bath.
pub fn memory_infidelity(u: &Operator) -> Result<f64> {
    let d_e = bath_dim(u)?;
    let m = u.matrix();
    let mut sum = 0.0;
    for a in 0..d_e {
        for b in 0..d_e {
            let tr: C64 = (0..3).map(|s| m[(s * d_e + a, s * d_e + b)]).sum();
            sum += tr.norm_sqr();
        }
    }
    Ok(1.0 - clamp_fidelity(sum / (9 * d_e) as f64)?)
}

/// `|<target|U|input>|²`.
pub fn gate_fidelity(u: &Operator, input: &QutritState, target: &QutritState) -> Result<f64> {
    let out = input.evolve(u)?;
    state_fidelity(&OutputState::Pure(out), target)
}

/// `|Tr(P V† U P)|² / 16` on the two-qutrit computational subspace.
pub fn process_fidelity(u: &Operator, target: &Operator) -> Result<f64> {
    if u.dims() != [3, 3] || target.dims() != [3, 3] {
        return Err(Error::DimensionMismatch(format!(
            "process fidelity needs two qutrits, got {:?} and {:?}",
            u.dims(),
            target.dims()
        )));
    }
    let overlap: C64 = COMPUTATIONAL
        .iter()
        .flat_map(|&r| COMPUTATIONAL.iter().map(move |&c| (r, c)))
        .map(|(r, c)| target.get(r, c).conj() * u.get(r, c))
        .sum();
    clamp_fidelity(overlap.norm_sqr() / 16.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FidelityReport {
    pub fidelity: f64,
    pub bare_fidelity: Option<f64>,
    pub residual_norms: BTreeMap<String, f64>,
}

impl FidelityReport {
    pub fn new(fidelity: f64) -> Result<Self> {
        Ok(Self {
            fidelity: clamp_fidelity(fidelity)?,
            bare_fidelity: None,
            residual_norms: BTreeMap::new(),
        })
    }

    pub fn with_bare(mut self, bare: f64) -> Result<Self> {
        self.bare_fidelity = Some(clamp_fidelity(bare)?);
        Ok(self)
    }

    pub fn with_residual(mut self, name: impl Into<String>, value: f64) -> Self {
        self.residual_norms.insert(name.into(), value);
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::kron;
    use crate::noise::QuantumBath;
    use crate::sequence::{bare_memory, memory_dd_first_order, PulseMode};
    use nalgebra::DVector;

    fn ket(dims: &[usize], amps: &[C64]) -> QutritState {
        QutritState::new(dims, DVector::from_column_slice(amps)).unwrap()
    }

    #[test]
    fn fidelity_of_pure_states() {
        let a = QutritState::basis(&[3], 0).unwrap();
        let b = QutritState::basis(&[3], 2).unwrap();
        assert_eq!(state_fidelity(&a.clone().into(), &a).unwrap(), 1.0);
        assert_eq!(state_fidelity(&b.into(), &a).unwrap(), 0.0);
        let phased = ket(&[3], &[C64::new(0.0, 1.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)]);
        assert!((state_fidelity(&phased.into(), &a).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn fidelity_of_mixture() {
        let phi = QutritState::basis(&[3], 1).unwrap();
        let perp = QutritState::basis(&[3], 2).unwrap();
        let rho = (&phi.projector() + &perp.projector()).scale_re(0.5);
        let rho = DensityMatrix::new(rho).unwrap();
        assert!((state_fidelity(&rho.into(), &phi).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn fidelity_dimension_mismatch() {
        let a = QutritState::basis(&[3], 0).unwrap();
        let b = QutritState::basis(&[3, 3], 0).unwrap();
        assert!(state_fidelity(&a.into(), &b).is_err());
    }

    #[test]
    fn density_validation() {
        assert!(DensityMatrix::new(Operator::identity(&[3])).is_err());
        assert!(DensityMatrix::new(Operator::diagonal(&[1.5, -0.5])).is_err());
        assert!(DensityMatrix::new(Operator::diagonal(&[0.25, 0.75])).is_ok());
    }

    #[test]
    fn partial_trace_examples() {
        let rho_s = DensityMatrix::new(Operator::diagonal(&[0.5, 0.3, 0.2])).unwrap();
        let rho_e = DensityMatrix::new(Operator::diagonal(&[0.6, 0.4])).unwrap();
        let joint = DensityMatrix::new(kron(rho_s.operator(), rho_e.operator())).unwrap();
        let kept = partial_trace(&joint, &[0]).unwrap();
        assert!((kept.operator() - rho_s.operator()).max_abs() < 1e-15);

        let w = C64::new(1.0 / 3f64.sqrt(), 0.0);
        let zero = C64::new(0.0, 0.0);
        let bell = ket(&[3, 3], &[w, zero, zero, zero, w, zero, zero, zero, w]);
        let half = partial_trace(&DensityMatrix::pure(&bell), &[1]).unwrap();
        assert!((half.operator() - &Operator::identity(&[3]).scale_re(1.0 / 3.0)).max_abs() < 1e-15);
    }

    #[test]
    fn residual_normalization() {
        let bath = QuantumBath::seeded(2, 1.0, 3).unwrap();
        let h = bath.interaction();
        let plain = decoupling_residual(&bare_memory(0.6).unwrap(), &h, None, 1).unwrap();
        assert!((plain - 1.0).abs() < 1e-14);
        let dd = memory_dd_first_order(0.1, PulseMode::Instantaneous).unwrap();
        assert!(decoupling_residual(&dd, &h, None, 1).unwrap() < 1e-12);
        assert!(decoupling_residual(&dd, &h, None, 3).is_err());
        let zero = Operator::zeros(&[3, 2]);
        assert_eq!(decoupling_residual(&dd, &zero, None, 1).unwrap(), 0.0);
    }

    #[test]
    fn memory_metrics_vanish_for_pure_bath_unitaries() {
        let v = crate::linalg::expm_propagator(&Operator::diagonal(&[0.3, -1.0]), 2.0).unwrap();
        let u = kron(&Operator::identity(&[3]), &v);
        assert!(memory_residual(&u).unwrap() < 1e-15);
        assert!(memory_infidelity(&u).unwrap().abs() < 1e-15);
        let flip = kron(&crate::system::dd_operator(1).unwrap(), &Operator::identity(&[2]));
        assert!((memory_infidelity(&flip).unwrap() - (1.0 - 1.0 / 9.0)).abs() < 1e-15);
        assert!(memory_residual(&flip).unwrap() > 0.5);
    }

    #[test]
    fn report_rejects_out_of_range() {
        assert!(FidelityReport::new(1.0 + 1e-13).is_ok());
        assert_eq!(FidelityReport::new(-1e-13).unwrap().fidelity, 0.0);
        assert!(FidelityReport::new(1.001).is_err());
        let r = FidelityReport::new(0.9)
            .unwrap()
            .with_bare(0.8)
            .unwrap()
            .with_residual("m1", 1e-12);
        assert_eq!(r.residual_norms["m1"], 1e-12);
    }
}
