//! Dense complex operators with subsystem-dimension metadata.
//!
//! All operators in the crate (Hamiltonians, propagators, DD pulses, density
//! matrices) are [`Operator`]s. Storage is a row-major-agnostic
//! `nalgebra::DMatrix`; the `dims` vector records how the Hilbert space
//! factorizes so that `kron`, partial traces and pulse lifting can reason
//! about subsystems. Basis ordering is fixed: `|0>, |1>, |e>` map to indices
//! 0, 1, 2 and `|ab>` is `|a> ⊗ |b>`.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Tolerance for exact algebraic identities.
pub const ALG_TOL: f64 = 1e-10;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

#[derive(Clone, PartialEq)]
pub struct Operator {
    dims: Vec<usize>,
    mat: DMatrix<C64>,
}

impl fmt::Debug for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Operator dims={:?}", self.dims)?;
        for r in 0..self.dim() {
            let row: Vec<String> = (0..self.dim())
                .map(|c| {
                    let z = self.mat[(r, c)];
                    format!("{:+.4}{:+.4}i", z.re, z.im)
                })
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl Operator {
    pub fn new(dims: Vec<usize>, mat: DMatrix<C64>) -> Result<Self> {
        let n: usize = dims.iter().product();
        if dims.is_empty() || mat.nrows() != n || mat.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "dims {:?} imply side {}, matrix is {}x{}",
                dims,
                n,
                mat.nrows(),
                mat.ncols()
            )));
        }
        Ok(Self { dims, mat })
    }

    pub fn from_fn(dims: &[usize], f: impl FnMut(usize, usize) -> C64) -> Self {
        let n = dims.iter().product();
        Self {
            dims: dims.to_vec(),
            mat: DMatrix::from_fn(n, n, f),
        }
    }

    pub fn zeros(dims: &[usize]) -> Self {
        let n = dims.iter().product();
        Self {
            dims: dims.to_vec(),
            mat: DMatrix::zeros(n, n),
        }
    }

    pub fn identity(dims: &[usize]) -> Self {
        let n = dims.iter().product();
        Self {
            dims: dims.to_vec(),
            mat: DMatrix::identity(n, n),
        }
    }

    /// `|row><col|` on a single subsystem of dimension `dim`.
    pub fn ket_bra(dim: usize, row: usize, col: usize) -> Self {
        let mut op = Self::zeros(&[dim]);
        op.mat[(row, col)] = ONE;
        op
    }

    /// Real diagonal operator on a single subsystem.
    pub fn diagonal(values: &[f64]) -> Self {
        let mut op = Self::zeros(&[values.len()]);
        for (i, &v) in values.iter().enumerate() {
            op.mat[(i, i)] = C64::new(v, 0.0);
        }
        op
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Total Hilbert-space dimension.
    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.mat
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.mat
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.mat[(row, col)]
    }

    pub fn set(&mut self, row: usize, col: usize, value: C64) {
        self.mat[(row, col)] = value;
    }

    pub fn adjoint(&self) -> Self {
        Self {
            dims: self.dims.clone(),
            mat: self.mat.adjoint(),
        }
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self {
            dims: self.dims.clone(),
            mat: &self.mat * factor,
        }
    }

    pub fn scale_re(&self, factor: f64) -> Self {
        self.scale(C64::new(factor, 0.0))
    }

    pub fn trace(&self) -> C64 {
        self.mat.trace()
    }

    /// Relabel the subsystem factorization without touching entries.
    pub fn with_dims(mut self, dims: Vec<usize>) -> Result<Self> {
        if dims.iter().product::<usize>() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "cannot relabel side {} as {:?}",
                self.dim(),
                dims
            )));
        }
        self.dims = dims;
        Ok(self)
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.mat.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    /// Largest entrywise deviation from Hermiticity.
    pub fn hermiticity_deviation(&self) -> f64 {
        let n = self.dim();
        let mut dev: f64 = 0.0;
        for r in 0..n {
            for c in r..n {
                dev = dev.max((self.mat[(r, c)] - self.mat[(c, r)].conj()).norm());
            }
        }
        dev
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_deviation() <= tol
    }

    /// Frobenius distance of `U†U` from the identity.
    pub fn unitarity_deviation(&self) -> f64 {
        let n = self.dim();
        (self.mat.adjoint() * &self.mat - DMatrix::<C64>::identity(n, n)).norm()
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_deviation() <= tol
    }

    /// `u† · self · u`, the toggling-frame transform by `u`.
    pub fn toggled_by(&self, u: &Operator) -> Operator {
        assert_eq!(self.dim(), u.dim(), "toggled_by: dimension mismatch");
        Operator {
            dims: self.dims.clone(),
            mat: u.mat.adjoint() * &self.mat * &u.mat,
        }
    }

    pub fn apply(&self, v: &DVector<C64>) -> DVector<C64> {
        &self.mat * v
    }

    /// Embed `self` (acting on the leading subsystems) into `dims` by padding
    /// the trailing subsystems with identity.
    pub fn lift_to(&self, dims: &[usize]) -> Result<Operator> {
        if dims == self.dims.as_slice() {
            return Ok(self.clone());
        }
        if dims.len() <= self.dims.len() || dims[..self.dims.len()] != self.dims[..] {
            return Err(Error::DimensionMismatch(format!(
                "cannot lift {:?} into {:?}",
                self.dims, dims
            )));
        }
        Ok(kron(self, &Operator::identity(&dims[self.dims.len()..])))
    }
}

impl Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        assert_eq!(self.dims, rhs.dims, "add: dims mismatch");
        Operator {
            dims: self.dims.clone(),
            mat: &self.mat + &rhs.mat,
        }
    }
}

impl Add for Operator {
    type Output = Operator;
    fn add(self, rhs: Operator) -> Operator {
        &self + &rhs
    }
}

impl AddAssign<&Operator> for Operator {
    fn add_assign(&mut self, rhs: &Operator) {
        assert_eq!(self.dims, rhs.dims, "add_assign: dims mismatch");
        self.mat += &rhs.mat;
    }
}

impl Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        assert_eq!(self.dims, rhs.dims, "sub: dims mismatch");
        Operator {
            dims: self.dims.clone(),
            mat: &self.mat - &rhs.mat,
        }
    }
}

impl Sub for Operator {
    type Output = Operator;
    fn sub(self, rhs: Operator) -> Operator {
        &self - &rhs
    }
}

impl Neg for &Operator {
    type Output = Operator;
    fn neg(self) -> Operator {
        Operator {
            dims: self.dims.clone(),
            mat: -&self.mat,
        }
    }
}

impl Mul for &Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        assert_eq!(self.dim(), rhs.dim(), "mul: dimension mismatch");
        Operator {
            dims: self.dims.clone(),
            mat: &self.mat * &rhs.mat,
        }
    }
}

impl Mul for Operator {
    type Output = Operator;
    fn mul(self, rhs: Operator) -> Operator {
        &self * &rhs
    }
}

/// Tensor product; `dims` of the result is the concatenation.
pub fn kron(a: &Operator, b: &Operator) -> Operator {
    let mut dims = a.dims.clone();
    dims.extend_from_slice(&b.dims);
    Operator {
        dims,
        mat: a.mat.kronecker(&b.mat),
    }
}

/// `ab − ba`.
pub fn commutator(a: &Operator, b: &Operator) -> Result<Operator> {
    if a.dims != b.dims {
        return Err(Error::DimensionMismatch(format!(
            "commutator of {:?} and {:?}",
            a.dims, b.dims
        )));
    }
    Ok(Operator {
        dims: a.dims.clone(),
        mat: &a.mat * &b.mat - &b.mat * &a.mat,
    })
}

pub fn frobenius_norm(a: &Operator) -> f64 {
    a.mat.norm()
}

/// Eigendecomposition `h = V diag(λ) V†` of a Hermitian operator.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: DVector<f64>,
    pub vectors: DMatrix<C64>,
}

pub fn hermitian_eigen(h: &Operator) -> Result<HermitianEigen> {
    check_hermitian(h)?;
    let eig = h.mat.clone().symmetric_eigen();
    Ok(HermitianEigen {
        values: eig.eigenvalues,
        vectors: eig.eigenvectors,
    })
}

/// Spectral norm of a Hermitian operator (largest |eigenvalue|).
pub fn hermitian_spectral_norm(h: &Operator) -> Result<f64> {
    let eig = hermitian_eigen(h)?;
    Ok(eig.values.iter().fold(0.0, |m: f64, v| m.max(v.abs())))
}

fn check_hermitian(h: &Operator) -> Result<()> {
    let deviation = h.hermiticity_deviation();
    if deviation > ALG_TOL * h.max_abs().max(1.0) {
        return Err(Error::NotHermitian { deviation });
    }
    Ok(())
}

/// `exp(−i·h·duration)` for a time-independent Hermitian `h`.
///
/// Computed from the eigenbasis of `h`, so the result is unitary to machine
/// precision regardless of `‖h‖·duration`.
pub fn expm_propagator(h: &Operator, duration: f64) -> Result<Operator> {
    if h.mat.iter().all(|z| *z == ZERO) {
        return Ok(Operator::identity(&h.dims));
    }
    let HermitianEigen { values, vectors } = hermitian_eigen(h)?;
    let phases = DVector::from_iterator(
        values.len(),
        values.iter().map(|&w| C64::from_polar(1.0, -w * duration)),
    );
    let mut scaled = vectors.clone();
    for (mut col, phase) in scaled.column_iter_mut().zip(phases.iter()) {
        col *= *phase;
    }
    Ok(Operator {
        dims: h.dims.clone(),
        mat: scaled * vectors.adjoint(),
    })
}

/// `1 − |Tr(a†b)|² / (‖a‖²‖b‖²)`: zero iff `b` is a global-phase multiple of `a`.
pub fn phase_insensitive_distance(a: &Operator, b: &Operator) -> f64 {
    assert_eq!(a.dim(), b.dim(), "phase_insensitive_distance: dims");
    let overlap = (a.mat.adjoint() * &b.mat).trace().norm_sqr();
    let norms = a.mat.norm_squared() * b.mat.norm_squared();
    if norms == 0.0 {
        return 0.0;
    }
    (1.0 - overlap / norms).max(0.0)
}

/// Trace out every subsystem not listed in `keep` (ascending, distinct).
pub fn partial_trace(op: &Operator, keep: &[usize]) -> Result<Operator> {
    let n = op.dims.len();
    if keep.is_empty() || keep.windows(2).any(|w| w[0] >= w[1]) || keep.iter().any(|&k| k >= n) {
        return Err(Error::DimensionMismatch(format!(
            "keep {:?} invalid for dims {:?}",
            keep, op.dims
        )));
    }
    let traced: Vec<usize> = (0..n).filter(|i| !keep.contains(i)).collect();
    let kept_dims: Vec<usize> = keep.iter().map(|&k| op.dims[k]).collect();
    let traced_dims: Vec<usize> = traced.iter().map(|&k| op.dims[k]).collect();
    let strides: Vec<usize> = (0..n).map(|i| op.dims[i + 1..].iter().product()).collect();
    let offset = |sub: &[usize], dims: &[usize], mut index: usize| -> usize {
        let mut full = 0;
        for (pos, &d) in sub.iter().zip(dims).rev() {
            full += (index % d) * strides[*pos];
            index /= d;
        }
        full
    };
    let kept_side: usize = kept_dims.iter().product();
    let traced_side: usize = traced_dims.iter().product();
    let mut out = DMatrix::<C64>::zeros(kept_side, kept_side);
    for t in 0..traced_side {
        let base = offset(&traced, &traced_dims, t);
        for r in 0..kept_side {
            let row = base + offset(keep, &kept_dims, r);
            for c in 0..kept_side {
                out[(r, c)] += op.mat[(row, base + offset(keep, &kept_dims, c))];
            }
        }
    }
    Ok(Operator {
        dims: kept_dims,
        mat: out,
    })
}
