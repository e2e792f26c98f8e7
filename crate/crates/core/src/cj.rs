//! Choi–Jamiołkowski vectors for the gates of a switch circuit.
//!
//! A gate `X` from input space `I` to output space `O` is represented by
//! `|X*⟩⟩ = Σ_k |k⟩^I ⊗ X*|k⟩^O`. Contracting it against a process vector
//! conjugates it again, so the process sees `X` itself. [`GateCJ::vector`]
//! stores `|X*⟩⟩`; [`crate::tensor::LabeledKet::contract`] does the
//! conjugation.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;


use num_traits::Float;

use crate::linalg::{c64, Matrix, C64, ONE, ZERO};
use crate::qutrit::{embed_qubit_matrix, is_single_particle, QutritBasisIndex, VacuumMode};
use crate::tensor::{LabeledKet, LabeledOperator, SpaceLabel, TensorError};
use crate::{TAU_AGG, TAU_EQ};

/// A named gate in CJ form.
#[derive(Clone, Debug, PartialEq)]
pub struct GateCJ {
    name: String,
    vector: LabeledKet,
}

impl GateCJ {
    pub fn new(name: impl Into<String>, vector: LabeledKet) -> Self {
        Self { name: name.into(), vector }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// The CJ vector `|X*⟩⟩`; contraction conjugates it.
    pub fn vector(&self) -> &LabeledKet {
        &self.vector
    }

    /// Labels this gate consumes when contracted.
    pub fn labels(&self) -> &[SpaceLabel] {
        self.vector.factors()
    }
}

/// Preparation of `state` on `out_label` (trivial input): `|state*⟩`.
pub fn preparation_cj(name: impl Into<String>, state: &[C64], out_label: SpaceLabel) -> Result<GateCJ, TensorError> {
    if state.len() != out_label.dim() {
        return Err(TensorError::DimMismatch(format!(
            "{}-component state prepared on `{}`",
            state.len(),
            out_label.name()
        )));
    }
    Ok(GateCJ::new(name, LabeledKet::on(out_label, state)?.conj()))
}

/// Readout of the qutrit basis outcome `outcome` on `in_label`: `|outcome⟩`.
pub fn measurement_cj(name: impl Into<String>, outcome: QutritBasisIndex, in_label: SpaceLabel) -> Result<GateCJ, TensorError> {
    if in_label.dim() != 3 {
        return Err(TensorError::DimMismatch(format!("`{}` must be a qutrit", in_label.name())));
    }
    Ok(GateCJ::new(name, LabeledKet::basis(vec![in_label], &[outcome.index()])?))
}

/// Post-selection on an arbitrary effect `⟨effect|` on `in_label`.
pub fn effect_cj(name: impl Into<String>, effect: &[C64], in_label: SpaceLabel) -> Result<GateCJ, TensorError> {
    if effect.len() != in_label.dim() {
        return Err(TensorError::DimMismatch(format!("effect on `{}`", in_label.name())));
    }
    Ok(GateCJ::new(name, LabeledKet::on(in_label, effect)?))
}

/// Predicate on input basis coordinates.
pub type Domain<'a> = &'a dyn Fn(&[usize]) -> bool;

/// CJ vector of an arbitrary operator, summing the transport index only over
/// input basis states accepted by `domain` (all of them when `None`).
pub fn operator_cj(
    name: impl Into<String>,
    op: &LabeledOperator,
    domain: Option<Domain<'_>>,
) -> Result<GateCJ, TensorError> {
    let ins = op.inputs().to_vec();
    let outs = op.outputs().to_vec();
    if let Some(l) = ins.iter().find(|l| outs.iter().any(|o| o.name() == l.name())) {
        return Err(TensorError::DuplicateLabel(l.name().into()));
    }
    let din: Vec<usize> = ins.iter().map(SpaceLabel::dim).collect();
    let dout: Vec<usize> = outs.iter().map(SpaceLabel::dim).collect();
    let n_in = ins.len();
    let mut labels = ins;
    labels.extend(outs);
    let linear = |coords: &[usize], dims: &[usize]| coords.iter().zip(dims).fold(0, |acc, (c, d)| acc * d + c);
    let m = op.matrix();
    let vector = LabeledKet::from_fn(labels, |idx| {
        let (i, o) = idx.split_at(n_in);
        if domain.is_some_and(|d| !d(i)) {
            return ZERO;
        }
        m[(linear(o, &dout), linear(i, &din))].conj()
    })?;
    Ok(GateCJ::new(name, vector))
}

/// `|Ũ*⟩⟩ = (I ⊗ Ũ*)|𝟙⟩⟩` for `Ũ = U P_01 + I P_v`, on qutrit labels.
pub fn unitary_cj(name: impl Into<String>, u2: &Matrix, input: SpaceLabel, output: SpaceLabel) -> Result<GateCJ, TensorError> {
    let defect = u2.unitarity_defect();
    if defect > TAU_AGG {
        return Err(TensorError::NotUnitary { defect });
    }
    if input.dim() != 3 || output.dim() != 3 {
        return Err(TensorError::DimMismatch("vacuum-fixing gates act on qutrits".into()));
    }
    let lifted = embed_qubit_matrix(u2, VacuumMode::Fixing)?;
    operator_cj(name, &LabeledOperator::from_matrix(vec![input], vec![output], &lifted)?, None)
}

/// Transport bra `⟨⟨𝟙|` between two labels of equal dimension: the identity gate.
pub fn identity_cj(name: impl Into<String>, input: SpaceLabel, output: SpaceLabel) -> Result<GateCJ, TensorError> {
    let id = Matrix::identity(input.dim());
    operator_cj(name, &LabeledOperator::from_matrix(vec![input], vec![output], &id)?, None)
}

/// The balanced beam splitter between Alice's and Bob's arms.
///
/// On the single-particle sector a particle entering on Alice's side leaves
/// in `(|Alice⟩ + |Bob⟩)/√2` and one entering on Bob's side in
/// `(|Alice⟩ − |Bob⟩)/√2`. The empty input `|vv⟩` passes through unchanged.
/// Two-particle inputs are outside the modelled domain.
#[derive(Clone, Debug, PartialEq)]
pub struct BeamSplitter {
    in_a: SpaceLabel,
    in_b: SpaceLabel,
    out_a: SpaceLabel,
    out_b: SpaceLabel,
}

/// Sector basis order used by [`BeamSplitter::sector_matrix`].
pub const SECTOR_BASIS: [(usize, usize); 4] = [(0, 2), (1, 2), (2, 0), (2, 1)];

/// `⟨out|H|in⟩` over two-wire qutrit indices `(alice, bob)`.
fn hadamard_entry(out: (usize, usize), input: (usize, usize)) -> f64 {
    let h = core::f64::consts::FRAC_1_SQRT_2;
    match input {
        (i, 2) if i < 2 => {
            if out == (i, 2) || out == (2, i) {
                h
            } else {
                0.0
            }
        }
        (2, i) if i < 2 => {
            if out == (i, 2) {
                h
            } else if out == (2, i) {
                -h
            } else {
                0.0
            }
        }
        (2, 2) => f64::from(u8::from(out == (2, 2))),
        _ => 0.0,
    }
}

impl BeamSplitter {
    pub fn new(in_a: SpaceLabel, in_b: SpaceLabel, out_a: SpaceLabel, out_b: SpaceLabel) -> Result<Self, TensorError> {
        for l in [&in_a, &in_b, &out_a, &out_b] {
            if l.dim() != 3 {
                return Err(TensorError::DimMismatch(format!("beam splitter port `{}` must be a qutrit", l.name())));
            }
        }
        Ok(Self { in_a, in_b, out_a, out_b })
    }

    /// Full 9×9 operator (zero on two-particle inputs).
    pub fn operator(&self) -> LabeledOperator {
        LabeledOperator::from_fn(
            vec![self.in_a.clone(), self.in_b.clone()],
            vec![self.out_a.clone(), self.out_b.clone()],
            |o, i| c64(hadamard_entry((o[0], o[1]), (i[0], i[1])), 0.0),
        )
        .expect("distinct qutrit labels")
    }

    /// The 4×4 block on `{|0v⟩, |1v⟩, |v0⟩, |v1⟩}`.
    pub fn sector_matrix() -> Matrix {
        Matrix::from_fn(4, 4, |r, c| c64(hadamard_entry(SECTOR_BASIS[r], SECTOR_BASIS[c]), 0.0))
    }

    /// Applies `H`, refusing states with two-particle support.
    pub fn apply(&self, ket: &LabeledKet) -> Result<LabeledKet, TensorError> {
        let probe = LabeledKet::from_fn(vec![self.in_a.clone(), self.in_b.clone()], |i| {
            if i[0] < 2 && i[1] < 2 {
                ONE
            } else {
                ZERO
            }
        })?;
        // Weight on |00⟩, |01⟩, |10⟩, |11⟩ summed over spectators.
        let mut weight = 0.0;
        for (k, b) in probe.amplitudes().iter().enumerate() {
            if *b == ZERO {
                continue;
            }
            let mut amps = vec![ZERO; 9];
            amps[k] = ONE;
            let basis = LabeledKet::new(probe.factors().to_vec(), amps)?;
            weight += ket.contract(&basis)?.norm_sqr();
        }
        if Float::sqrt(weight) > TAU_EQ {
            return Err(TensorError::OutOfSector);
        }
        self.operator().apply(ket)
    }

    /// CJ vector `(I ⊗ H*)|𝟙⟩⟩` with the four-term single-particle transport.
    pub fn cj(&self, name: impl Into<String>) -> GateCJ {
        operator_cj(name, &self.operator(), Some(&|i: &[usize]| is_single_particle((i[0], i[1]))))
            .expect("beam splitter labels are distinct")
    }
}

/// Convenience wrapper for [`BeamSplitter::operator`].
pub fn beam_splitter_operator(
    in_a: SpaceLabel,
    in_b: SpaceLabel,
    out_a: SpaceLabel,
    out_b: SpaceLabel,
) -> Result<LabeledOperator, TensorError> {
    Ok(BeamSplitter::new(in_a, in_b, out_a, out_b)?.operator())
}

/// Convenience wrapper for [`BeamSplitter::cj`].
pub fn beam_splitter_cj(
    name: impl Into<String>,
    in_a: SpaceLabel,
    in_b: SpaceLabel,
    out_a: SpaceLabel,
    out_b: SpaceLabel,
) -> Result<GateCJ, TensorError> {
    Ok(BeamSplitter::new(in_a, in_b, out_a, out_b)?.cj(name))
}
