//! Qutrit basis, the four DD operators, the controlled-phase target and the
//! elementary error generators.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::linalg::{kron, Operator, C64, I, ONE, ZERO};

/// Ground level `|0>`.
pub const G0: usize = 0;
/// Ground level `|1>`.
pub const G1: usize = 1;
/// Excited level `|e>`.
pub const EXC: usize = 2;

pub const QUTRIT: usize = 3;

/// Index of `|ab>` in the two-qutrit basis.
pub const fn pair_index(a: usize, b: usize) -> usize {
    QUTRIT * a + b
}

fn ket_bra(row: usize, col: usize) -> Operator {
    Operator::ket_bra(QUTRIT, row, col)
}

/// The DD operators `p1..p4` (each Hermitian, unitary and involutory).
///
/// * `p1` swaps `|0> ↔ |1>` and fixes `|e>`
/// * `p2` swaps `|0> ↔ |e>` and fixes `|1>`
/// * `p3` swaps `|1> ↔ |e>` and fixes `|0>`
/// * `p4 = |e><e| − |0><0| − |1><1|`
pub fn dd_operator(k: usize) -> Result<Operator> {
    let op = match k {
        1 => &(&ket_bra(EXC, EXC) + &ket_bra(G0, G1)) + &ket_bra(G1, G0),
        2 => &(&ket_bra(G1, G1) + &ket_bra(EXC, G0)) + &ket_bra(G0, EXC),
        3 => &(&ket_bra(G0, G0) + &ket_bra(EXC, G1)) + &ket_bra(G1, EXC),
        4 => Operator::diagonal(&[-1.0, -1.0, 1.0]),
        _ => return Err(Error::DdIndexOutOfRange(k)),
    };
    Ok(op)
}

/// A complete set `[p1, p2, p3, p4]`. Kept as a value so the verification
/// suite can be run against a deliberately corrupted set.
#[derive(Debug, Clone, PartialEq)]
pub struct DdSet {
    ops: [Operator; 4],
}

impl DdSet {
    pub fn standard() -> Self {
        Self {
            ops: [1, 2, 3, 4].map(|k| dd_operator(k).expect("k in range")),
        }
    }

    pub fn from_operators(ops: [Operator; 4]) -> Result<Self> {
        for op in &ops {
            if op.dims() != [QUTRIT] {
                return Err(Error::DimensionMismatch(format!(
                    "DD operator must act on one qutrit, got {:?}",
                    op.dims()
                )));
            }
        }
        Ok(Self { ops })
    }

    /// `p_k` for `k` in `1..=4`.
    pub fn get(&self, k: usize) -> Result<&Operator> {
        if !(1..=4).contains(&k) {
            return Err(Error::DdIndexOutOfRange(k));
        }
        Ok(&self.ops[k - 1])
    }

    pub fn p(&self, k: usize) -> &Operator {
        self.get(k).expect("DD index in 1..=4")
    }

    /// `p_k ⊗ p_k`.
    pub fn pair(&self, k: usize) -> Operator {
        let p = self.p(k);
        kron(p, p)
    }
}

/// Controlled-phase target `|00><00| + |01><01| + |10><10| − |11><11|`,
/// extended by identity on every basis state containing `|e>`.
pub fn target_gate() -> Operator {
    let mut u = Operator::identity(&[QUTRIT, QUTRIT]);
    let k = pair_index(G1, G1);
    u.set(k, k, -ONE);
    u
}

/// Indices of the computational states `|00>, |01>, |10>, |11>`.
pub const COMPUTATIONAL: [usize; 4] = [
    pair_index(G0, G0),
    pair_index(G0, G1),
    pair_index(G1, G0),
    pair_index(G1, G1),
];

/// Error axis: Z/X/Y-type coupling between `|e>` and one ground level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ErrorAxis {
    Z0,
    Z1,
    X0,
    X1,
    Y0,
    Y1,
}

impl ErrorAxis {
    pub const ALL: [ErrorAxis; 6] = [
        ErrorAxis::Z0,
        ErrorAxis::Z1,
        ErrorAxis::X0,
        ErrorAxis::X1,
        ErrorAxis::Y0,
        ErrorAxis::Y1,
    ];

    /// The ground level paired with `|e>`.
    pub fn ground(self) -> usize {
        match self {
            ErrorAxis::Z0 | ErrorAxis::X0 | ErrorAxis::Y0 => G0,
            ErrorAxis::Z1 | ErrorAxis::X1 | ErrorAxis::Y1 => G1,
        }
    }

    /// Single-qutrit generator for this axis.
    pub fn single_qutrit(self) -> Operator {
        let g = self.ground();
        match self {
            ErrorAxis::Z0 | ErrorAxis::Z1 => &ket_bra(EXC, EXC) - &ket_bra(g, g),
            ErrorAxis::X0 | ErrorAxis::X1 => &ket_bra(EXC, g) + &ket_bra(g, EXC),
            ErrorAxis::Y0 | ErrorAxis::Y1 => &ket_bra(EXC, g).scale(-I) + &ket_bra(g, EXC).scale(I),
        }
    }
}

/// Single-qutrit generator for `axis`, placed at `qutrit_index` among
/// `num_qutrits` qutrits with identity on the others.
pub fn error_generator(axis: ErrorAxis, qutrit_index: usize, num_qutrits: usize) -> Result<Operator> {
    embed_single(&axis.single_qutrit(), qutrit_index, num_qutrits)
}

/// Place a one-qutrit operator at slot `index` of an `n`-qutrit register.
pub fn embed_single(op: &Operator, index: usize, num_qutrits: usize) -> Result<Operator> {
    if index >= num_qutrits {
        return Err(Error::QutritIndexOutOfRange { index, num_qutrits });
    }
    let id = Operator::identity(&[QUTRIT]);
    let mut out: Option<Operator> = None;
    for slot in 0..num_qutrits {
        let factor = if slot == index { op } else { &id };
        out = Some(match out {
            None => factor.clone(),
            Some(acc) => kron(&acc, factor),
        });
    }
    Ok(out.expect("num_qutrits > index >= 0"))
}

/// A normalized pure state of one or two qutrits.
#[derive(Debug, Clone, PartialEq)]
pub struct QutritState {
    dims: Vec<usize>,
    amplitudes: DVector<C64>,
}

impl QutritState {
    /// Normalizes `amplitudes`; rejects the zero vector and size mismatches.
    pub fn new(dims: &[usize], amplitudes: DVector<C64>) -> Result<Self> {
        let n: usize = dims.iter().product();
        if amplitudes.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "{} amplitudes for dims {:?}",
                amplitudes.len(),
                dims
            )));
        }
        let norm = amplitudes.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidParameter("state has zero norm".into()));
        }
        Ok(Self {
            dims: dims.to_vec(),
            amplitudes: amplitudes / C64::new(norm, 0.0),
        })
    }

    pub fn basis(dims: &[usize], index: usize) -> Result<Self> {
        let n: usize = dims.iter().product();
        if index >= n {
            return Err(Error::InvalidParameter(format!("basis index {index} >= dimension {n}")));
        }
        let mut v = DVector::from_element(n, ZERO);
        v[index] = ONE;
        Self::new(dims, v)
    }

    /// Normalized superposition of two-qutrit basis states with real weights.
    pub fn two_qutrit(terms: &[((usize, usize), f64)]) -> Result<Self> {
        let mut v = DVector::from_element(QUTRIT * QUTRIT, ZERO);
        for &((a, b), w) in terms {
            v[pair_index(a, b)] += C64::new(w, 0.0);
        }
        Self::new(&[QUTRIT, QUTRIT], v)
    }

    /// `(|00> + |11>)/√2`, the gate benchmark input.
    pub fn bell_input() -> Self {
        Self::two_qutrit(&[((G0, G0), 1.0), ((G1, G1), 1.0)]).expect("valid")
    }

    /// `(|00> − |11>)/√2`, the controlled-phase image of [`Self::bell_input`].
    pub fn bell_target() -> Self {
        Self::two_qutrit(&[((G0, G0), 1.0), ((G1, G1), -1.0)]).expect("valid")
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    /// Apply a unitary; the result is renormalized only within rounding.
    pub fn evolve(&self, u: &Operator) -> Result<Self> {
        if u.dim() != self.amplitudes.len() {
            return Err(Error::DimensionMismatch(format!(
                "operator side {} vs state length {}",
                u.dim(),
                self.amplitudes.len()
            )));
        }
        Self::new(&self.dims, u.apply(&self.amplitudes))
    }

    pub fn inner(&self, other: &QutritState) -> C64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    /// `|ψ><ψ|`.
    pub fn projector(&self) -> Operator {
        let m = &self.amplitudes * self.amplitudes.adjoint();
        Operator::new(self.dims.clone(), m).expect("square by construction")
    }
}
