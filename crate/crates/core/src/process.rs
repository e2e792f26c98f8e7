//! Process vectors stored as a product of factors.
//!
//! A full switch process vector lives on twenty qutrit wires, far beyond what
//! a dense array can hold. It is however a tensor product of small pieces
//! (transport vectors, the initial control superposition), so it is kept as a
//! list of factors with pairwise disjoint labels. Contracting a gate merges
//! only the factors it touches.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::cj::GateCJ;
use crate::linalg::{c64, C64};
use crate::qutrit::{transport_vector, TransportKind};
use crate::tensor::{LabeledKet, SpaceLabel, TensorError};

/// One wire of the circuit: the output label of one gate joined to the input
/// label of the next by a transport vector.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Wire {
    pub from: String,
    pub to: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProcessVector {
    factors: Vec<LabeledKet>,
    wiring: Vec<Wire>,
}

impl ProcessVector {
    /// Product of `factors`, which must have pairwise disjoint labels.
    pub fn from_factors(factors: Vec<LabeledKet>) -> Result<Self, TensorError> {
        let pv = Self { factors, wiring: Vec::new() };
        pv.check_disjoint()?;
        Ok(pv)
    }

    /// Product of qutrit transport vectors for each `(from, to)` pair, times `extra`.
    pub fn from_wiring(pairs: &[(&str, &str)], extra: Vec<LabeledKet>) -> Result<Self, TensorError> {
        let mut factors = extra;
        let mut wiring = Vec::with_capacity(pairs.len());
        for &(a, b) in pairs {
            factors.push(transport_vector(SpaceLabel::qutrit(a), SpaceLabel::qutrit(b), TransportKind::Qutrit)?);
            wiring.push(Wire { from: a.to_string(), to: b.to_string() });
        }
        let pv = Self { factors, wiring };
        pv.check_disjoint()?;
        Ok(pv)
    }

    fn check_disjoint(&self) -> Result<(), TensorError> {
        let mut seen: Vec<&str> = Vec::new();
        for l in self.factors.iter().flat_map(|f| f.factors()) {
            if seen.contains(&l.name()) {
                return Err(TensorError::DuplicateLabel(l.name().into()));
            }
            seen.push(l.name());
        }
        Ok(())
    }

    pub fn factors(&self) -> &[LabeledKet] {
        &self.factors
    }

    /// Transport pairs this vector was assembled from.
    pub fn wiring(&self) -> &[Wire] {
        &self.wiring
    }

    /// All open labels, sorted by name.
    pub fn labels(&self) -> Vec<SpaceLabel> {
        let mut out: Vec<SpaceLabel> = self.factors.iter().flat_map(|f| f.factors().iter().cloned()).collect();
        out.sort_by(|a, b| a.name().cmp(b.name()));
        out
    }

    pub fn has_label(&self, name: &str) -> bool {
        self.factors.iter().any(|f| f.has_label(name))
    }

    /// The factor carrying `name`, if any.
    pub fn factor_containing(&self, name: &str) -> Option<&LabeledKet> {
        self.factors.iter().find(|f| f.has_label(name))
    }

    /// Contracts the conjugate of `bra` over its labels, merging the factors
    /// it touches first.
    pub fn contract(&self, bra: &LabeledKet) -> Result<Self, TensorError> {
        for l in bra.factors() {
            if !self.has_label(l.name()) {
                return Err(TensorError::LabelMismatch(format!("label `{}` is not open in the process vector", l.name())));
            }
        }
        let (touched, mut rest): (Vec<&LabeledKet>, Vec<&LabeledKet>) =
            self.factors.iter().partition(|f| f.factors().iter().any(|l| bra.has_label(l.name())));
        let mut merged = LabeledKet::scalar(c64(1.0, 0.0));
        for f in touched {
            merged = merged.tensor_product(f)?;
        }
        let result = merged.contract(bra)?;
        let mut factors: Vec<LabeledKet> = Vec::with_capacity(rest.len() + 1);
        if result.is_scalar() && !rest.is_empty() {
            // Fold the scalar into the smallest remaining factor.
            let k = (0..rest.len()).min_by_key(|&i| rest[i].len()).expect("non-empty");
            let s = result.scalar_value().expect("scalar");
            let scaled = rest[k].scale(s);
            rest.remove(k);
            factors.extend(rest.into_iter().cloned());
            factors.push(scaled);
        } else {
            factors.extend(rest.into_iter().cloned());
            factors.push(result);
        }
        Ok(Self { factors, wiring: self.wiring.clone() })
    }

    pub fn contract_gate(&self, gate: &GateCJ) -> Result<Self, TensorError> {
        self.contract(gate.vector())
    }

    /// Value of a fully contracted vector.
    pub fn scalar(&self) -> Option<C64> {
        self.factors.iter().try_fold(c64(1.0, 0.0), |acc, f| f.scalar_value().map(|s| acc * s))
    }

    /// Dense ket over all open labels; fails with `TooLarge` past the dense limit.
    pub fn to_ket(&self) -> Result<LabeledKet, TensorError> {
        self.factors.iter().try_fold(LabeledKet::scalar(c64(1.0, 0.0)), |acc, f| acc.tensor_product(f))
    }

    /// Renames labels in every factor and in the wiring.
    pub fn relabel(&self, rename: impl Fn(&str) -> Option<String>) -> Result<Self, TensorError> {
        let factors = self.factors.iter().map(|f| f.relabel(&rename)).collect::<Result<Vec<_>, _>>()?;
        let wiring = self
            .wiring
            .iter()
            .map(|w| Wire {
                from: rename(&w.from).unwrap_or_else(|| w.from.clone()),
                to: rename(&w.to).unwrap_or_else(|| w.to.clone()),
            })
            .collect();
        let pv = Self { factors, wiring };
        pv.check_disjoint()?;
        Ok(pv)
    }

    /// Factor-wise comparison of two product vectors.
    ///
    /// Both must split their labels into the same groups. Each pair of
    /// factors may differ by a scalar, and the product of those scalars must
    /// be 1. Scalar factors are absorbed into that product.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        let split = |pv: &Self| -> (Vec<LabeledKet>, C64) {
            let mut s = c64(1.0, 0.0);
            let mut fs = Vec::new();
            for f in &pv.factors {
                match f.scalar_value() {
                    Some(v) => s *= v,
                    None => fs.push(f.clone()),
                }
            }
            (fs, s)
        };
        let (a, sa) = split(self);
        let (b, sb) = split(other);
        if a.len() != b.len() {
            return false;
        }
        let mut ratio = sa / sb;
        if !ratio.is_finite() {
            return false;
        }
        for fa in &a {
            let Some(fb) = b.iter().find(|fb| fb.factors() == fa.factors()) else {
                return false;
            };
            let nb = fb.norm_sqr();
            if nb == 0.0 {
                if fa.norm() > tol {
                    return false;
                }
                continue;
            }
            let c = fb.inner(fa).expect("same labels") / nb;
            if !fa.approx_eq(&fb.scale(c), tol * (1.0 + fa.norm())) {
                return false;
            }
            ratio *= c;
        }
        (ratio - c64(1.0, 0.0)).norm() <= tol
    }
}

/// Contracts every gate against `pv`. The gates' labels must partition the
/// open labels of `pv`, and the result is the scalar amplitude.
pub fn amplitude(pv: &ProcessVector, gates: &[GateCJ]) -> Result<C64, TensorError> {
    let mut seen: Vec<&str> = Vec::new();
    for l in gates.iter().flat_map(|g| g.labels()) {
        if seen.contains(&l.name()) {
            return Err(TensorError::LabelMismatch(format!("label `{}` consumed by two gates", l.name())));
        }
        seen.push(l.name());
    }
    let mut acc = pv.clone();
    for g in gates {
        acc = acc.contract_gate(g)?;
    }
    acc.scalar().ok_or_else(|| {
        let open: Vec<String> = acc.labels().iter().map(|l| l.name().to_string()).collect();
        TensorError::LabelMismatch(format!("labels left uncontracted: {}", open.join(", ")))
    })
}
