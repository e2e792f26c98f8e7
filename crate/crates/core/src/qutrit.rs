//! Qutrit wires: a qubit plus the vacuum state.
//!
//! The basis is `|0⟩ = (1,0,0)`, `|1⟩ = (0,1,0)` and `|v⟩ = (0,0,1)`; the
//! vacuum carries index 2 in every sum.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;


use num_traits::Float;

use crate::linalg::{c64, Matrix, C64, ONE, ZERO};
use crate::tensor::{LabeledKet, LabeledOperator, SpaceLabel, TensorError};

/// One of the three qutrit basis states.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum QutritBasisIndex {
    Zero,
    One,
    Vacuum,
}

impl QutritBasisIndex {
    pub const ALL: [Self; 3] = [Self::Zero, Self::One, Self::Vacuum];

    pub const fn index(self) -> usize {
        match self {
            Self::Zero => 0,
            Self::One => 1,
            Self::Vacuum => 2,
        }
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub const fn symbol(self) -> &'static str {
        match self {
            Self::Zero => "0",
            Self::One => "1",
            Self::Vacuum => "v",
        }
    }
}

impl fmt::Display for QutritBasisIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

impl FromStr for QutritBasisIndex {
    type Err = TensorError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "0" => Ok(Self::Zero),
            "1" => Ok(Self::One),
            "v" | "2" => Ok(Self::Vacuum),
            other => Err(TensorError::LabelMismatch(format!("unknown qutrit basis symbol `{other}`"))),
        }
    }
}

fn require_dim(label: &SpaceLabel, dim: usize) -> Result<(), TensorError> {
    if label.dim() != dim {
        return Err(TensorError::DimMismatch(format!("`{}` must have dimension {dim}", label.name())));
    }
    Ok(())
}

/// `|i⟩` on a qutrit label.
pub fn basis_ket(i: QutritBasisIndex, label: SpaceLabel) -> Result<LabeledKet, TensorError> {
    require_dim(&label, 3)?;
    LabeledKet::basis(vec![label], &[i.index()])
}

/// A qubit state `a|0⟩ + b|1⟩` on a qutrit wire (no vacuum component).
pub fn qubit_on_qutrit(psi: [C64; 2], label: SpaceLabel) -> Result<LabeledKet, TensorError> {
    require_dim(&label, 3)?;
    LabeledKet::on(label, &[psi[0], psi[1], ZERO])
}

/// Which correlated vector to build.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TransportKind {
    /// `|00⟩ + |11⟩ + |vv⟩` on two qutrits.
    Qutrit,
    /// `|00⟩ + |11⟩`, on two qubits or on the qubit block of two qutrits.
    Qubit,
}

/// Unnormalized maximally correlated vector `Σ|i⟩|i⟩` between two labels.
///
/// For [`TransportKind::Qubit`] the labels may be qubits, or qutrits, in which
/// case the vacuum term is omitted.
pub fn transport_vector(a: SpaceLabel, b: SpaceLabel, kind: TransportKind) -> Result<LabeledKet, TensorError> {
    if a.dim() != b.dim() {
        return Err(TensorError::DimMismatch(format!("transport between `{}` and `{}`", a.name(), b.name())));
    }
    let limit = match kind {
        TransportKind::Qutrit => {
            require_dim(&a, 3)?;
            3
        }
        TransportKind::Qubit => {
            if !(a.dim() == 2 || a.dim() == 3) {
                return Err(TensorError::DimMismatch("qubit transport needs dimension 2 or 3".into()));
            }
            2
        }
    };
    LabeledKet::from_fn(vec![a, b], |i| if i[0] == i[1] && i[0] < limit { ONE } else { ZERO })
}

/// Identity wire `Σ|i⟩|i⟩` over labels of any (equal) dimension.
pub fn wire(a: SpaceLabel, b: SpaceLabel) -> Result<LabeledKet, TensorError> {
    if a.dim() != b.dim() {
        return Err(TensorError::DimMismatch(format!("wire between `{}` and `{}`", a.name(), b.name())));
    }
    LabeledKet::from_fn(vec![a, b], |i| if i[0] == i[1] { ONE } else { ZERO })
}

/// Four-term transport vector on the single-particle sector of two qutrit
/// pairs: `|0v⟩|0v⟩ + |1v⟩|1v⟩ + |v0⟩|v0⟩ + |v1⟩|v1⟩`, where the first pair is
/// `(a1, b1)` and the second `(a2, b2)`.
pub fn single_particle_transport(
    a1: SpaceLabel,
    b1: SpaceLabel,
    a2: SpaceLabel,
    b2: SpaceLabel,
) -> Result<LabeledKet, TensorError> {
    for l in [&a1, &b1, &a2, &b2] {
        require_dim(l, 3)?;
    }
    LabeledKet::from_fn(vec![a1, b1, a2, b2], |i| {
        let first = (i[0], i[1]);
        if first == (i[2], i[3]) && is_single_particle(first) {
            ONE
        } else {
            ZERO
        }
    })
}

/// True for `|0v⟩, |1v⟩, |v0⟩, |v1⟩`.
pub fn is_single_particle((a, b): (usize, usize)) -> bool {
    (a < 2 && b == 2) || (a == 2 && b < 2)
}

/// The nine operators `λ_0 … λ_8` with the `√(3/2)` normalization, so that
/// `Tr(λ_i† λ_j) = 3 δ_ij`. `λ_0` is the identity.
pub fn gell_mann_matrix(k: usize) -> Result<Matrix, TensorError> {
    let s = Float::sqrt(1.5f64);
    let r = |re: f64| c64(re * s, 0.0);
    let i = |im: f64| c64(0.0, im * s);
    let z = ZERO;
    let m = match k {
        0 => Matrix::identity(3),
        1 => Matrix::from_rows(&[&[z, r(1.0), z], &[r(1.0), z, z], &[z, z, z]]),
        2 => Matrix::from_rows(&[&[z, z, r(1.0)], &[z, z, z], &[r(1.0), z, z]]),
        3 => Matrix::from_rows(&[&[z, z, z], &[z, z, r(1.0)], &[z, r(1.0), z]]),
        4 => Matrix::from_rows(&[&[z, i(-1.0), z], &[i(1.0), z, z], &[z, z, z]]),
        5 => Matrix::from_rows(&[&[z, z, i(-1.0)], &[z, z, z], &[i(1.0), z, z]]),
        6 => Matrix::from_rows(&[&[z, z, z], &[z, z, i(-1.0)], &[z, i(1.0), z]]),
        7 => Matrix::from_rows(&[&[r(1.0), z, z], &[z, r(-1.0), z], &[z, z, z]]),
        8 => {
            let h = core::f64::consts::FRAC_1_SQRT_2;
            Matrix::from_rows(&[&[c64(h, 0.0), z, z], &[z, c64(h, 0.0), z], &[z, z, c64(-2.0 * h, 0.0)]])
        }
        _ => return Err(TensorError::IndexOutOfRange { index: k, limit: 9 }),
    };
    Ok(m)
}

/// `λ_k` as an operator on a qutrit label.
pub fn gell_mann(k: usize, label: SpaceLabel) -> Result<LabeledOperator, TensorError> {
    require_dim(&label, 3)?;
    LabeledOperator::from_matrix(vec![label.clone()], vec![label], &gell_mann_matrix(k)?)
}

/// Expansion coefficients `c_k = Tr(λ_k† m) / 3`, so `m = Σ c_k λ_k`.
pub fn gell_mann_coefficients(m: &Matrix) -> [C64; 9] {
    let mut out = [ZERO; 9];
    for (k, c) in out.iter_mut().enumerate() {
        let lk = gell_mann_matrix(k).expect("index in range");
        *c = (&lk.adjoint() * m).trace() / 3.0;
    }
    out
}

/// How a qubit operator acts on the vacuum once lifted to a qutrit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VacuumMode {
    /// `q ⊕ [1]`: the vacuum passes through untouched.
    Fixing,
    /// `q ⊕ [0]`: the vacuum is annihilated.
    Annihilating,
}

/// Lifts a 2×2 matrix to the 3×3 block form `q ⊕ [1]` or `q ⊕ [0]`.
pub fn embed_qubit_matrix(q: &Matrix, mode: VacuumMode) -> Result<Matrix, TensorError> {
    if q.rows() != 2 || q.cols() != 2 {
        return Err(TensorError::DimMismatch(format!("expected 2x2, got {}x{}", q.rows(), q.cols())));
    }
    let corner = match mode {
        VacuumMode::Fixing => ONE,
        VacuumMode::Annihilating => ZERO,
    };
    Ok(Matrix::from_fn(3, 3, |i, j| match (i, j) {
        (2, 2) => corner,
        (2, _) | (_, 2) => ZERO,
        _ => q[(i, j)],
    }))
}

/// Operator form of [`embed_qubit_matrix`], mapping `input` to `output`.
pub fn embed_qubit_operator(
    q: &Matrix,
    mode: VacuumMode,
    input: SpaceLabel,
    output: SpaceLabel,
) -> Result<LabeledOperator, TensorError> {
    require_dim(&input, 3)?;
    require_dim(&output, 3)?;
    LabeledOperator::from_matrix(vec![input], vec![output], &embed_qubit_matrix(q, mode)?)
}

/// Projector onto the qubit block, `P_01 = |0⟩⟨0| + |1⟩⟨1|`.
pub fn qubit_projector() -> Matrix {
    embed_qubit_matrix(&Matrix::identity(2), VacuumMode::Annihilating).expect("2x2 input")
}

/// Projector onto the vacuum, `P_v = |v⟩⟨v|`.
pub fn vacuum_projector() -> Matrix {
    Matrix::from_fn(3, 3, |i, j| if i == 2 && j == 2 { ONE } else { ZERO })
}

/// The qutrit amplitudes of a qubit vector, `(a, b, 0)`.
pub fn lift(psi: &[C64; 2]) -> Vec<C64> {
    vec![psi[0], psi[1], ZERO]
}
