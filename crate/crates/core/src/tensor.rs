//! Label-indexed dense tensors.
//!
//! A [`LabeledKet`] is a vector on a tensor product of named Hilbert-space
//! factors. Factors are always stored sorted by label name, so two kets over
//! the same label set share one amplitude layout regardless of the order in
//! which they were written down. The first factor is the most significant
//! index of the flat amplitude array.
//!
//! A ket with no factors holds a single amplitude and plays the role of a
//! scalar; full contractions return one.

use alloc::borrow::ToOwned;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use num_traits::Float;

use crate::linalg::{c64, Matrix, C64, ONE, ZERO};

/// Largest amplitude count a single dense ket may hold (3^13).
pub const MAX_DENSE_LEN: usize = 1_594_323;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TensorError {
    #[error("label `{0}` appears more than once")]
    DuplicateLabel(String),
    #[error("label mismatch: {0}")]
    LabelMismatch(String),
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),
    #[error("index {index} out of range (limit {limit})")]
    IndexOutOfRange { index: usize, limit: usize },
    #[error("operator is not unitary (defect {defect:e})")]
    NotUnitary { defect: f64 },
    #[error("state has support outside the single-particle sector")]
    OutOfSector,
    #[error("dense tensor of {0} amplitudes exceeds the size limit")]
    TooLarge(usize),
}

/// A named Hilbert-space factor.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SpaceLabel {
    name: String,
    dim: usize,
}

impl SpaceLabel {
    /// Panics if `dim` is zero.
    pub fn new(name: impl Into<String>, dim: usize) -> Self {
        assert!(dim >= 1, "space dimension must be positive");
        Self { name: name.into(), dim }
    }

    pub fn qutrit(name: impl Into<String>) -> Self {
        Self::new(name, 3)
    }

    pub fn qubit(name: impl Into<String>) -> Self {
        Self::new(name, 2)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn renamed(&self, name: impl Into<String>) -> Self {
        Self { name: name.into(), dim: self.dim }
    }
}

impl fmt::Display for SpaceLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{}]", self.name, self.dim)
    }
}

fn check_unique(labels: &[SpaceLabel]) -> Result<(), TensorError> {
    for (i, a) in labels.iter().enumerate() {
        if labels[i + 1..].iter().any(|b| b.name == a.name) {
            return Err(TensorError::DuplicateLabel(a.name.clone()));
        }
    }
    Ok(())
}

fn product_len(labels: &[SpaceLabel]) -> Result<usize, TensorError> {
    let len = labels.iter().fold(1usize, |acc, l| acc.saturating_mul(l.dim));
    if len > MAX_DENSE_LEN {
        return Err(TensorError::TooLarge(len));
    }
    Ok(len)
}

/// Row-major strides for the given dimensions.
fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * dims[k + 1];
    }
    s
}

/// Walks every multi-index of `dims` in row-major order, tracking two linear
/// offsets computed with the supplied per-axis strides.
fn walk2(dims: &[usize], sa: &[usize], sb: &[usize], mut f: impl FnMut(usize, usize, usize)) {
    let total: usize = dims.iter().product();
    let mut idx = vec![0usize; dims.len()];
    let (mut a, mut b) = (0usize, 0usize);
    for lin in 0..total {
        f(lin, a, b);
        for k in (0..dims.len()).rev() {
            idx[k] += 1;
            a += sa[k];
            b += sb[k];
            if idx[k] < dims[k] {
                break;
            }
            a -= sa[k] * dims[k];
            b -= sb[k] * dims[k];
            idx[k] = 0;
        }
    }
}

/// Canonical order of `labels`: a permutation `perm` with `labels[perm[k]]`
/// the k-th smallest name.
fn canonical_perm(labels: &[SpaceLabel]) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..labels.len()).collect();
    perm.sort_by(|&i, &j| labels[i].name.cmp(&labels[j].name));
    perm
}

/// Reorders the axes of `amps` (laid out over `dims`) so that output axis `k`
/// is input axis `perm[k]`.
fn permute_axes(amps: &[C64], dims: &[usize], perm: &[usize]) -> Vec<C64> {
    if perm.iter().enumerate().all(|(k, &p)| k == p) {
        return amps.to_vec();
    }
    let in_strides = strides(dims);
    let out_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
    let src: Vec<usize> = perm.iter().map(|&p| in_strides[p]).collect();
    let mut out = vec![ZERO; amps.len()];
    walk2(&out_dims, &src, &src, |lin, s, _| out[lin] = amps[s]);
    out
}

/// Complex vector over a set of labelled factors, in canonical label order.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledKet {
    factors: Vec<SpaceLabel>,
    amps: Vec<C64>,
}

impl LabeledKet {
    /// Builds a ket from amplitudes laid out in the order of `factors` (first
    /// factor most significant). The result is stored in canonical order.
    pub fn new(factors: Vec<SpaceLabel>, amps: Vec<C64>) -> Result<Self, TensorError> {
        check_unique(&factors)?;
        let len = product_len(&factors)?;
        if amps.len() != len {
            return Err(TensorError::DimMismatch(alloc::format!(
                "{} amplitudes for factor space of dimension {len}",
                amps.len()
            )));
        }
        let perm = canonical_perm(&factors);
        let dims: Vec<usize> = factors.iter().map(|l| l.dim).collect();
        let amps = permute_axes(&amps, &dims, &perm);
        let factors = perm.iter().map(|&p| factors[p].clone()).collect();
        Ok(Self { factors, amps })
    }

    /// Builds a ket by evaluating `f` on every multi-index, given in the order
    /// of `factors`.
    pub fn from_fn(factors: Vec<SpaceLabel>, mut f: impl FnMut(&[usize]) -> C64) -> Result<Self, TensorError> {
        check_unique(&factors)?;
        let len = product_len(&factors)?;
        let dims: Vec<usize> = factors.iter().map(|l| l.dim).collect();
        let mut idx = vec![0usize; dims.len()];
        let mut amps = Vec::with_capacity(len);
        for _ in 0..len {
            amps.push(f(&idx));
            for k in (0..dims.len()).rev() {
                idx[k] += 1;
                if idx[k] < dims[k] {
                    break;
                }
                idx[k] = 0;
            }
        }
        Self::new(factors, amps)
    }

    /// The zero-factor ket holding a single amplitude.
    pub fn scalar(value: C64) -> Self {
        Self { factors: Vec::new(), amps: vec![value] }
    }

    /// Computational basis state with the given index on every factor.
    pub fn basis(factors: Vec<SpaceLabel>, indices: &[usize]) -> Result<Self, TensorError> {
        if indices.len() != factors.len() {
            return Err(TensorError::DimMismatch("one index per factor required".to_owned()));
        }
        for (l, &i) in factors.iter().zip(indices) {
            if i >= l.dim {
                return Err(TensorError::IndexOutOfRange { index: i, limit: l.dim });
            }
        }
        Self::from_fn(factors, |idx| if idx == indices { ONE } else { ZERO })
    }

    /// A single-factor ket from its amplitudes.
    pub fn on(label: SpaceLabel, amps: &[C64]) -> Result<Self, TensorError> {
        Self::new(vec![label], amps.to_vec())
    }

    pub fn factors(&self) -> &[SpaceLabel] {
        &self.factors
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn is_scalar(&self) -> bool {
        self.factors.is_empty()
    }

    /// The amplitude of a zero-factor ket.
    pub fn scalar_value(&self) -> Option<C64> {
        self.is_scalar().then(|| self.amps[0])
    }

    pub fn has_label(&self, name: &str) -> bool {
        self.factors.iter().any(|l| l.name == name)
    }

    pub fn label(&self, name: &str) -> Option<&SpaceLabel> {
        self.factors.iter().find(|l| l.name == name)
    }

    /// Amplitude at a multi-index given as `(label name, basis index)` pairs,
    /// which must name every factor exactly once.
    pub fn amplitude_at(&self, coords: &[(&str, usize)]) -> Result<C64, TensorError> {
        if coords.len() != self.factors.len() {
            return Err(TensorError::LabelMismatch("coordinates must cover every factor".to_owned()));
        }
        let st = strides(&self.dims());
        let mut lin = 0;
        for (k, l) in self.factors.iter().enumerate() {
            let &(_, i) = coords
                .iter()
                .find(|(n, _)| *n == l.name)
                .ok_or_else(|| TensorError::LabelMismatch(alloc::format!("missing coordinate for `{}`", l.name)))?;
            if i >= l.dim {
                return Err(TensorError::IndexOutOfRange { index: i, limit: l.dim });
            }
            lin += i * st[k];
        }
        Ok(self.amps[lin])
    }

    fn dims(&self) -> Vec<usize> {
        self.factors.iter().map(|l| l.dim).collect()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        Float::sqrt(self.norm_sqr())
    }

    /// Entrywise complex conjugate.
    pub fn conj(&self) -> Self {
        Self { factors: self.factors.clone(), amps: self.amps.iter().map(|z| z.conj()).collect() }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { factors: self.factors.clone(), amps: self.amps.iter().map(|z| z * s).collect() }
    }

    /// `self + other`; both kets must live on the same labelled space.
    pub fn add(&self, other: &Self) -> Result<Self, TensorError> {
        if self.factors != other.factors {
            return Err(TensorError::LabelMismatch("sum of kets over different spaces".to_owned()));
        }
        Ok(Self { factors: self.factors.clone(), amps: self.amps.iter().zip(&other.amps).map(|(a, b)| a + b).collect() })
    }

    /// Returns `self / ‖self‖`, or `None` for a (numerically) zero ket.
    pub fn normalized(&self, tol: f64) -> Option<Self> {
        let n = self.norm();
        (n > tol).then(|| self.scale(c64(1.0 / n, 0.0)))
    }

    /// Largest entrywise difference, or `None` when the label sets differ.
    pub fn max_abs_diff(&self, other: &Self) -> Option<f64> {
        (self.factors == other.factors)
            .then(|| crate::linalg::max_abs_diff(&self.amps, &other.amps))
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.max_abs_diff(other).is_some_and(|d| d <= tol)
    }

    /// Renames factors through `rename`; labels it maps to `None` keep their name.
    pub fn relabel(&self, mut rename: impl FnMut(&str) -> Option<String>) -> Result<Self, TensorError> {
        let factors = self
            .factors
            .iter()
            .map(|l| rename(&l.name).map_or_else(|| l.clone(), |n| l.renamed(n)))
            .collect();
        Self::new(factors, self.amps.clone())
    }

    /// `a ⊗ b` over the disjoint union of their labels.
    pub fn tensor_product(&self, other: &Self) -> Result<Self, TensorError> {
        let mut factors = self.factors.clone();
        factors.extend(other.factors.iter().cloned());
        check_unique(&factors)?;
        product_len(&factors)?;
        let mut amps = Vec::with_capacity(self.amps.len() * other.amps.len());
        for a in &self.amps {
            for b in &other.amps {
                amps.push(a * b);
            }
        }
        Self::new(factors, amps)
    }

    /// Contracts `conj(bra)` against `self` over the bra's labels, which must
    /// all be present in `self` with matching dimensions. The result lives on
    /// the remaining labels (a scalar when none remain).
    pub fn contract(&self, bra: &Self) -> Result<Self, TensorError> {
        let mut bra_axis = vec![None; self.factors.len()];
        for (j, bl) in bra.factors.iter().enumerate() {
            let k = self
                .factors
                .iter()
                .position(|l| l.name == bl.name)
                .ok_or_else(|| TensorError::LabelMismatch(alloc::format!("bra label `{}` not in ket", bl.name)))?;
            if self.factors[k].dim != bl.dim {
                return Err(TensorError::LabelMismatch(alloc::format!(
                    "label `{}` has dimension {} in bra but {} in ket",
                    bl.name, bl.dim, self.factors[k].dim
                )));
            }
            bra_axis[k] = Some(j);
        }
        let bra_strides = strides(&bra.dims());
        let rest: Vec<SpaceLabel> =
            self.factors.iter().zip(&bra_axis).filter(|(_, b)| b.is_none()).map(|(l, _)| l.clone()).collect();
        let rest_strides = strides(&rest.iter().map(|l| l.dim).collect::<Vec<_>>());
        let mut sa = Vec::with_capacity(self.factors.len());
        let mut sb = Vec::with_capacity(self.factors.len());
        let mut r = 0;
        for b in &bra_axis {
            match b {
                Some(j) => {
                    sa.push(bra_strides[*j]);
                    sb.push(0);
                }
                None => {
                    sa.push(0);
                    sb.push(rest_strides[r]);
                    r += 1;
                }
            }
        }
        let bra_conj: Vec<C64> = bra.amps.iter().map(|z| z.conj()).collect();
        let mut out = vec![ZERO; rest.iter().map(|l| l.dim).product()];
        walk2(&self.dims(), &sa, &sb, |lin, bi, ri| {
            let a = self.amps[lin];
            if a != ZERO {
                out[ri] += bra_conj[bi] * a;
            }
        });
        Ok(Self { factors: rest, amps: out })
    }

    /// `⟨self|other⟩` for kets on the same labelled space.
    pub fn inner(&self, other: &Self) -> Result<C64, TensorError> {
        if self.factors != other.factors {
            return Err(TensorError::LabelMismatch("inner product of kets over different spaces".to_owned()));
        }
        Ok(crate::linalg::inner(&self.amps, &other.amps))
    }
}

/// `partial_contract(bra, ket)`: contracts the conjugate of `bra` against `ket`.
pub fn partial_contract(bra: &LabeledKet, ket: &LabeledKet) -> Result<LabeledKet, TensorError> {
    ket.contract(bra)
}

/// Linear map between labelled factor sets, stored in canonical order on both
/// sides (rows index outputs, columns index inputs).
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledOperator {
    inputs: Vec<SpaceLabel>,
    outputs: Vec<SpaceLabel>,
    matrix: Matrix,
}

fn to_coords(mut lin: usize, dims: &[usize], out: &mut [usize]) {
    for k in (0..dims.len()).rev() {
        out[k] = lin % dims[k];
        lin /= dims[k];
    }
}

impl LabeledOperator {
    /// Builds an operator from `f(out_index, in_index)`, both multi-indices in
    /// the order the labels are given here.
    pub fn from_fn(
        inputs: Vec<SpaceLabel>,
        outputs: Vec<SpaceLabel>,
        mut f: impl FnMut(&[usize], &[usize]) -> C64,
    ) -> Result<Self, TensorError> {
        check_unique(&inputs)?;
        check_unique(&outputs)?;
        let (n_in, n_out) = (product_len(&inputs)?, product_len(&outputs)?);
        let pin = canonical_perm(&inputs);
        let pout = canonical_perm(&outputs);
        let cin: Vec<SpaceLabel> = pin.iter().map(|&p| inputs[p].clone()).collect();
        let cout: Vec<SpaceLabel> = pout.iter().map(|&p| outputs[p].clone()).collect();
        let din: Vec<usize> = cin.iter().map(|l| l.dim).collect();
        let dout: Vec<usize> = cout.iter().map(|l| l.dim).collect();
        let (mut ci, mut co) = (vec![0; din.len()], vec![0; dout.len()]);
        let (mut gi, mut go) = (vec![0; din.len()], vec![0; dout.len()]);
        let matrix = Matrix::from_fn(n_out, n_in, |r, c| {
            to_coords(r, &dout, &mut co);
            to_coords(c, &din, &mut ci);
            for (k, &p) in pout.iter().enumerate() {
                go[p] = co[k];
            }
            for (k, &p) in pin.iter().enumerate() {
                gi[p] = ci[k];
            }
            f(&go, &gi)
        });
        Ok(Self { inputs: cin, outputs: cout, matrix })
    }

    /// Wraps a matrix whose rows and columns follow the given label orders.
    pub fn from_matrix(inputs: Vec<SpaceLabel>, outputs: Vec<SpaceLabel>, matrix: &Matrix) -> Result<Self, TensorError> {
        let (n_in, n_out) = (product_len(&inputs)?, product_len(&outputs)?);
        if matrix.rows() != n_out || matrix.cols() != n_in {
            return Err(TensorError::DimMismatch(alloc::format!(
                "{}x{} matrix for a {n_out}x{n_in} operator",
                matrix.rows(),
                matrix.cols()
            )));
        }
        let din: Vec<usize> = inputs.iter().map(|l| l.dim).collect();
        let dout: Vec<usize> = outputs.iter().map(|l| l.dim).collect();
        let (sin, sout) = (strides(&din), strides(&dout));
        Self::from_fn(inputs, outputs, |o, i| {
            let r: usize = o.iter().zip(&sout).map(|(a, b)| a * b).sum();
            let c: usize = i.iter().zip(&sin).map(|(a, b)| a * b).sum();
            matrix[(r, c)]
        })
    }

    /// Identity map from `inputs` to the same labels.
    pub fn identity(labels: Vec<SpaceLabel>) -> Result<Self, TensorError> {
        Self::from_fn(labels.clone(), labels, |o, i| if o == i { ONE } else { ZERO })
    }

    pub fn inputs(&self) -> &[SpaceLabel] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[SpaceLabel] {
        &self.outputs
    }

    /// Matrix in canonical label order.
    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn adjoint(&self) -> Self {
        Self { inputs: self.outputs.clone(), outputs: self.inputs.clone(), matrix: self.matrix.adjoint() }
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.inputs == other.inputs && self.outputs == other.outputs && self.matrix.approx_eq(&other.matrix, tol)
    }

    /// `self ∘ rhs`; `rhs` outputs must equal `self` inputs.
    pub fn compose(&self, rhs: &Self) -> Result<Self, TensorError> {
        if rhs.outputs != self.inputs {
            return Err(TensorError::LabelMismatch("composition of operators over different spaces".to_owned()));
        }
        Ok(Self { inputs: rhs.inputs.clone(), outputs: self.outputs.clone(), matrix: &self.matrix * &rhs.matrix })
    }

    /// Applies the operator to the matching factors of `ket`, leaving the
    /// other factors untouched. Input factors are replaced by output factors.
    pub fn apply(&self, ket: &LabeledKet) -> Result<LabeledKet, TensorError> {
        let mut in_axis = vec![None; ket.factors.len()];
        for (j, il) in self.inputs.iter().enumerate() {
            let k = ket
                .factors
                .iter()
                .position(|l| l.name == il.name)
                .ok_or_else(|| TensorError::LabelMismatch(alloc::format!("operator input `{}` not in ket", il.name)))?;
            if ket.factors[k].dim != il.dim {
                return Err(TensorError::LabelMismatch(alloc::format!("dimension conflict on `{}`", il.name)));
            }
            in_axis[k] = Some(j);
        }
        let spectators: Vec<SpaceLabel> =
            ket.factors.iter().zip(&in_axis).filter(|(_, a)| a.is_none()).map(|(l, _)| l.clone()).collect();
        if let Some(clash) = self.outputs.iter().find(|o| spectators.iter().any(|s| s.name == o.name)) {
            return Err(TensorError::DuplicateLabel(clash.name.clone()));
        }
        let in_strides = strides(&self.inputs.iter().map(|l| l.dim).collect::<Vec<_>>());
        let spec_dims: Vec<usize> = spectators.iter().map(|l| l.dim).collect();
        let spec_strides = strides(&spec_dims);
        let spec_len: usize = spec_dims.iter().product();
        let (mut sa, mut sb) = (Vec::new(), Vec::new());
        let mut r = 0;
        for a in &in_axis {
            match a {
                Some(j) => {
                    sa.push(in_strides[*j]);
                    sb.push(0);
                }
                None => {
                    sa.push(0);
                    sb.push(spec_strides[r]);
                    r += 1;
                }
            }
        }
        let n_out = self.matrix.rows();
        let mut out = vec![ZERO; n_out * spec_len];
        walk2(&ket.dims(), &sa, &sb, |lin, i, s| {
            let a = ket.amps[lin];
            if a == ZERO {
                return;
            }
            for o in 0..n_out {
                out[o * spec_len + s] += self.matrix[(o, i)] * a;
            }
        });
        let mut factors = self.outputs.clone();
        factors.extend(spectators);
        LabeledKet::new(factors, out)
    }
}
