//! The quantum-switch realizations and their outcome tables.
//!
//! Four kinds are modelled:
//!
//! - `four_event`: an optical switch in which Alice and Bob each act at two
//!   distinct spacetime points, with an initial and a final beam splitter.
//! - `three_event`: the same circuit with Bob's two gates identified, which
//!   only renames Bob's wires.
//! - `two_event_norec`: a gravitational switch where a gravity qubit `G`
//!   controls the order and is finally measured in the `|±⟩` basis.
//! - `two_event_rec`: as above, but a delocalised beam splitter `U_BS` first
//!   recombines gravity and particle into a product state.
//!
//! Every process vector is a product of transport vectors (and, for the
//! gravitational kinds, one control factor). Probabilities are squared
//! moduli of full contractions with gate CJ vectors.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::Rng;
use thiserror::Error;

use crate::cj::{beam_splitter_cj, effect_cj, identity_cj, measurement_cj, operator_cj, preparation_cj, unitary_cj, GateCJ};
use crate::linalg::{c64, inner, norm, Matrix, C64, ONE, ZERO};
use crate::process::{amplitude, ProcessVector};
use crate::qutrit::{lift, transport_vector, wire, QutritBasisIndex, TransportKind};
use crate::random::{haar_unitary, random_state};
use crate::tensor::{LabeledKet, LabeledOperator, SpaceLabel, TensorError};
use crate::{TAU_AGG, TAU_DEG};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error("`{which}` is not unitary (defect {defect:e})")]
    NotUnitary { which: &'static str, defect: f64 },
    #[error("`{which}` is not normalized (norm {norm})")]
    NotNormalized { which: &'static str, norm: f64 },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("target particle state (αUV + βVU)|Ψ⟩ is degenerate (norm {norm:e})")]
    DegenerateTarget { norm: f64 },
    #[error("probability {value:e} for {key} is negative beyond tolerance")]
    NegativeProbability { key: String, value: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ScenarioKind {
    FourEvent,
    ThreeEvent,
    TwoEventNorec,
    TwoEventRec,
}

impl ScenarioKind {
    pub const ALL: [Self; 4] = [Self::FourEvent, Self::ThreeEvent, Self::TwoEventNorec, Self::TwoEventRec];

    pub const fn as_str(self) -> &'static str {
        match self {
            Self::FourEvent => "four_event",
            Self::ThreeEvent => "three_event",
            Self::TwoEventNorec => "two_event_norec",
            Self::TwoEventRec => "two_event_rec",
        }
    }

    pub const fn is_gravitational(self) -> bool {
        matches!(self, Self::TwoEventNorec | Self::TwoEventRec)
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScenarioKind {
    type Err = ScenarioError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| ScenarioError::InvalidConfig(format!("unknown scenario `{s}`")))
    }
}

/// Inputs of a switch run.
#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    pub kind: ScenarioKind,
    pub u: Matrix,
    pub v: Matrix,
    pub psi: [C64; 2],
    /// Branch weights `(α, β)` of the recombined particle; `two_event_rec` only.
    pub alpha_beta: Option<(C64, C64)>,
    /// Gravity state after recombination; `two_event_rec` only.
    pub gamma: Option<[C64; 2]>,
}

impl ScenarioConfig {
    pub fn new(kind: ScenarioKind, u: Matrix, v: Matrix, psi: [C64; 2]) -> Self {
        Self { kind, u, v, psi, alpha_beta: None, gamma: None }
    }

    /// Haar-random `U`, `V` and a uniformly random `Ψ`.
    pub fn random<R: Rng + ?Sized>(kind: ScenarioKind, rng: &mut R) -> Self {
        let u = haar_unitary(2, rng);
        let v = haar_unitary(2, rng);
        let p = random_state(2, rng);
        Self::new(kind, u, v, [p[0], p[1]])
    }

    /// `(α, β)`, defaulting to `(1/√2, 1/√2)`.
    pub fn alpha_beta(&self) -> (C64, C64) {
        let h = c64(core::f64::consts::FRAC_1_SQRT_2, 0.0);
        self.alpha_beta.unwrap_or((h, h))
    }

    /// `|Γ⟩`, defaulting to `|0⟩`.
    pub fn gamma(&self) -> [C64; 2] {
        self.gamma.unwrap_or([ONE, ZERO])
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        for (which, m) in [("u", &self.u), ("v", &self.v)] {
            if m.rows() != 2 || m.cols() != 2 {
                return Err(ScenarioError::InvalidConfig(format!("`{which}` must be 2x2")));
            }
            let defect = m.unitarity_defect();
            if !(defect <= TAU_AGG) {
                return Err(ScenarioError::NotUnitary { which, defect });
            }
        }
        let n = norm(&self.psi);
        if !((n - 1.0).abs() <= TAU_AGG) {
            return Err(ScenarioError::NotNormalized { which: "psi", norm: n });
        }
        if self.kind != ScenarioKind::TwoEventRec {
            if self.alpha_beta.is_some() || self.gamma.is_some() {
                return Err(ScenarioError::InvalidConfig(
                    "alpha_beta and gamma only apply to two_event_rec".into(),
                ));
            }
            return Ok(());
        }
        let g = norm(&self.gamma());
        if !((g - 1.0).abs() <= TAU_AGG) {
            return Err(ScenarioError::NotNormalized { which: "gamma", norm: g });
        }
        target_particle(self).map(|_| ())
    }
}

/// A single measurement outcome: a qutrit basis state or a `|±⟩` result.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Outcome {
    Zero,
    One,
    Vacuum,
    Plus,
    Minus,
}

impl Outcome {
    pub const QUTRIT: [Self; 3] = [Self::Zero, Self::One, Self::Vacuum];
    pub const SIGN: [Self; 2] = [Self::Plus, Self::Minus];

    pub const fn symbol(self) -> &'static str {
        match self {
            Self::Zero => "0",
            Self::One => "1",
            Self::Vacuum => "v",
            Self::Plus => "+",
            Self::Minus => "\u{2212}",
        }
    }

    pub fn qutrit(self) -> Option<QutritBasisIndex> {
        match self {
            Self::Zero => Some(QutritBasisIndex::Zero),
            Self::One => Some(QutritBasisIndex::One),
            Self::Vacuum => Some(QutritBasisIndex::Vacuum),
            Self::Plus | Self::Minus => None,
        }
    }

    fn is_particle(self) -> bool {
        matches!(self, Self::Zero | Self::One)
    }
}

impl From<QutritBasisIndex> for Outcome {
    fn from(i: QutritBasisIndex) -> Self {
        match i {
            QutritBasisIndex::Zero => Self::Zero,
            QutritBasisIndex::One => Self::One,
            QutritBasisIndex::Vacuum => Self::Vacuum,
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

impl FromStr for Outcome {
    type Err = ScenarioError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "0" => Ok(Self::Zero),
            "1" => Ok(Self::One),
            "v" | "2" => Ok(Self::Vacuum),
            "+" => Ok(Self::Plus),
            "-" | "\u{2212}" => Ok(Self::Minus),
            other => Err(ScenarioError::InvalidConfig(format!("unknown outcome `{other}`"))),
        }
    }
}

/// Outcome pairs measured by each kind, in table order.
///
/// Optical kinds read out `(Alice, Bob)` in the qutrit basis; gravitational
/// kinds read out `(gravity ±, particle)`.
pub fn outcome_pairs(kind: ScenarioKind) -> Vec<(Outcome, Outcome)> {
    let firsts: &[Outcome] = if kind.is_gravitational() { &Outcome::SIGN } else { &Outcome::QUTRIT };
    firsts.iter().flat_map(|&a| Outcome::QUTRIT.into_iter().map(move |b| (a, b))).collect()
}

/// Probabilities over outcome pairs, with the Alice/Bob marginals.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbabilityTable {
    entries: Vec<(Outcome, Outcome, f64)>,
}

impl ProbabilityTable {
    /// Checks every entry is `≥ −τ_agg`, then clips to `≥ 0`.
    pub fn from_entries(entries: Vec<(Outcome, Outcome, f64)>) -> Result<Self, ScenarioError> {
        let mut out = Vec::with_capacity(entries.len());
        for (a, b, p) in entries {
            if !(p >= -TAU_AGG) {
                return Err(ScenarioError::NegativeProbability { key: pair_key(a, b), value: p });
            }
            out.push((a, b, p.max(0.0)));
        }
        Ok(Self { entries: out })
    }

    pub fn entries(&self) -> &[(Outcome, Outcome, f64)] {
        &self.entries
    }

    /// Probability of `(a, b)`; zero for pairs outside the table.
    pub fn get(&self, a: Outcome, b: Outcome) -> f64 {
        self.entries.iter().find(|e| e.0 == a && e.1 == b).map_or(0.0, |e| e.2)
    }

    pub fn sum(&self) -> f64 {
        self.entries.iter().map(|e| e.2).sum()
    }

    /// Probability that Alice detects the particle (gravity `+` for the
    /// gravitational kinds).
    pub fn p_a(&self) -> f64 {
        self.entries.iter().filter(|e| e.0.is_particle() || e.0 == Outcome::Plus).map(|e| e.2).sum()
    }

    /// Probability that Bob detects the particle (gravity `−`).
    pub fn p_b(&self) -> f64 {
        self.entries
            .iter()
            .filter(|e| e.0 == Outcome::Minus || (e.0.qutrit().is_some() && e.1.is_particle()))
            .map(|e| e.2)
            .sum()
    }

    /// Re-expresses a `(±, i)` table on the optical outcome pairs via
    /// `(+, i) → (i, v)` and `(−, i) → (v, i)`. Optical tables are returned
    /// unchanged.
    pub fn as_switch_table(&self) -> Self {
        if self.entries.iter().all(|e| e.0.qutrit().is_some()) {
            return self.clone();
        }
        let mut entries: Vec<(Outcome, Outcome, f64)> =
            outcome_pairs(ScenarioKind::FourEvent).into_iter().map(|(a, b)| (a, b, 0.0)).collect();
        for &(g, i, p) in &self.entries {
            let (a, b) = match g {
                Outcome::Plus => (i, Outcome::Vacuum),
                _ => (Outcome::Vacuum, i),
            };
            if let Some(e) = entries.iter_mut().find(|e| e.0 == a && e.1 == b) {
                e.2 += p;
            }
        }
        Self { entries }
    }

    /// Largest entrywise difference over the union of both key sets.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mine = self.entries.iter().map(|e| (self.get(e.0, e.1) - other.get(e.0, e.1)).abs());
        let theirs = other.entries.iter().map(|e| (self.get(e.0, e.1) - other.get(e.0, e.1)).abs());
        mine.chain(theirs).fold(0.0, f64::max)
    }
}

/// Table key of an outcome pair, e.g. `(0,v)`.
pub fn pair_key(a: Outcome, b: Outcome) -> String {
    format!("({a},{b})")
}

fn q(name: &str) -> SpaceLabel {
    SpaceLabel::qutrit(name)
}

fn g2(name: &str) -> SpaceLabel {
    SpaceLabel::qubit(name)
}

/// Wires of the four-event circuit, source output to target input.
pub const FOUR_EVENT_WIRING: [(&str, &str); 10] = [
    ("P_A_O", "Si_A_I"),
    ("P_B_O", "Si_B_I"),
    ("Si_A_O", "A_I"),
    ("A_O", "B'_I"),
    ("B'_O", "Sf_B_I"),
    ("Si_B_O", "B_I"),
    ("B_O", "A'_I"),
    ("A'_O", "Sf_A_I"),
    ("Sf_A_O", "T_A_I"),
    ("Sf_B_O", "T_B_I"),
];

/// Renaming that turns the four-event circuit into the three-event one,
/// where Bob's two gates share a location and differ only by time slot.
pub fn three_event_label(name: &str) -> Option<String> {
    let to = match name {
        "B_I" => "B_I1",
        "B_O" => "B_O1",
        "B'_I" => "B_I2",
        "B'_O" => "B_O2",
        _ => return None,
    };
    Some(to.to_string())
}

/// `(|0⟩^G |Ψ⟩^{A_I} |𝟙⟩⟩^{A_O B_I} |𝟙⟩⟩^{B_O P} + |1⟩^G |Ψ⟩^{B_I} |𝟙⟩⟩^{B_O A_I} |𝟙⟩⟩^{A_O P}) / √2`
/// with `P = particle_out`.
fn gravity_control_factor(psi: &[C64; 2], particle_out: &str) -> Result<LabeledKet, TensorError> {
    let labels = vec![g2("G"), q("A_I"), q("A_O"), q("B_I"), q("B_O"), q(particle_out)];
    let p = lift(psi);
    let h = core::f64::consts::FRAC_1_SQRT_2;
    LabeledKet::from_fn(labels, |i| {
        let (g, ai, ao, bi, bo, t) = (i[0], i[1], i[2], i[3], i[4], i[5]);
        let amp = if g == 0 {
            if ao == bi && bo == t {
                p[ai]
            } else {
                ZERO
            }
        } else if bo == ai && ao == t {
            p[bi]
        } else {
            ZERO
        };
        amp * h
    })
}

/// Process vector of a kind. For the gravitational kinds `psi` is part of
/// the control factor, so it is required there and ignored otherwise.
pub fn build_process_vector(kind: ScenarioKind, psi: &[C64; 2]) -> Result<ProcessVector, ScenarioError> {
    let pv = match kind {
        ScenarioKind::FourEvent => ProcessVector::from_wiring(&FOUR_EVENT_WIRING, vec![])?,
        ScenarioKind::ThreeEvent => build_process_vector(ScenarioKind::FourEvent, psi)?.relabel(three_event_label)?,
        ScenarioKind::TwoEventNorec => ProcessVector::from_factors(vec![
            gravity_control_factor(psi, "T_P_I")?,
            wire(g2("G_O"), g2("T_G_I"))?,
        ])?,
        ScenarioKind::TwoEventRec => ProcessVector::from_factors(vec![
            gravity_control_factor(psi, "S_P_I")?,
            wire(g2("G_O"), g2("S_G_I"))?,
            wire(g2("S_G_O"), g2("T_G_I"))?,
            transport_vector(q("S_P_O"), q("T_P_I"), TransportKind::Qutrit)?,
        ])?,
    };
    Ok(pv)
}

/// Which tail the reduced four-event process vector carries.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReducedVariant {
    /// Final beam splitter followed by detectors.
    WithFinalSplitter,
    /// Detectors directly after Alice's and Bob's second gates.
    LocalMeasurement,
}

/// The four-event process after preparation and the initial beam splitter:
/// `(|Ψ⟩^{A_I}|v⟩^{B_I} + |v⟩^{A_I}|Ψ⟩^{B_I})/√2` times the remaining wires.
pub fn reduced_process_vector_4event(psi: &[C64; 2], variant: ReducedVariant) -> Result<ProcessVector, ScenarioError> {
    let p = lift(psi);
    let h = core::f64::consts::FRAC_1_SQRT_2;
    let control = LabeledKet::from_fn(vec![q("A_I"), q("B_I")], |i| match (i[0], i[1]) {
        (a, 2) if a < 2 => p[a] * h,
        (2, b) if b < 2 => p[b] * h,
        _ => ZERO,
    })?;
    let tail: &[(&str, &str)] = match variant {
        ReducedVariant::WithFinalSplitter => &[
            ("A_O", "B'_I"),
            ("B'_O", "Sf_B_I"),
            ("B_O", "A'_I"),
            ("A'_O", "Sf_A_I"),
            ("Sf_A_O", "T_A_I"),
            ("Sf_B_O", "T_B_I"),
        ],
        ReducedVariant::LocalMeasurement => &[("A_O", "B'_I"), ("B_O", "A'_I"), ("A'_O", "T_A_I"), ("B'_O", "T_B_I")],
    };
    Ok(ProcessVector::from_wiring(tail, vec![control])?)
}

fn relabel_gate(g: &GateCJ, rename: impl Fn(&str) -> Option<String>) -> Result<GateCJ, TensorError> {
    Ok(GateCJ::new(g.name(), g.vector().relabel(rename)?))
}

fn four_event_gates(cfg: &ScenarioConfig) -> Result<Vec<GateCJ>, ScenarioError> {
    Ok(vec![
        preparation_cj("P_A", &lift(&cfg.psi), q("P_A_O"))?,
        preparation_cj("P_B", &[ZERO, ZERO, ONE], q("P_B_O"))?,
        beam_splitter_cj("S^i", q("Si_A_I"), q("Si_B_I"), q("Si_A_O"), q("Si_B_O"))?,
        unitary_cj("A", &cfg.u, q("A_I"), q("A_O"))?,
        unitary_cj("B", &cfg.v, q("B_I"), q("B_O"))?,
        unitary_cj("A'", &cfg.u, q("A'_I"), q("A'_O"))?,
        unitary_cj("B'", &cfg.v, q("B'_I"), q("B'_O"))?,
        beam_splitter_cj("S^f", q("Sf_A_I"), q("Sf_B_I"), q("Sf_A_O"), q("Sf_B_O"))?,
    ])
}

/// `(αUV + βVU)|Ψ⟩` and its norm, failing when the norm is at most `τ_deg`.
fn target_particle(cfg: &ScenarioConfig) -> Result<([C64; 2], f64), ScenarioError> {
    let (alpha, beta) = cfg.alpha_beta();
    let uv = (&cfg.u * &cfg.v).mul_vec(&cfg.psi);
    let vu = (&cfg.v * &cfg.u).mul_vec(&cfg.psi);
    let t = [alpha * uv[0] + beta * vu[0], alpha * uv[1] + beta * vu[1]];
    let n = norm(&t);
    if !(n > TAU_DEG) {
        return Err(ScenarioError::DegenerateTarget { norm: n });
    }
    Ok(([t[0] / n, t[1] / n], n))
}

/// Unitary taking the unit vector `a` to the unit vector `b`: a rotation in
/// `span{a, b}`, identity on its orthogonal complement.
pub fn rotation_between(a: &[C64], b: &[C64]) -> Matrix {
    let n = a.len();
    let c = inner(a, b);
    let r: Vec<C64> = b.iter().zip(a).map(|(bi, ai)| bi - c * ai).collect();
    let s = norm(&r);
    let outer = |x: &[C64], y: &[C64]| Matrix::from_fn(n, n, |i, j| x[i] * y[j].conj());
    let paa = outer(a, a);
    if s <= TAU_DEG * TAU_DEG {
        // b is a phase times a.
        return paa.scale(c).add(&Matrix::identity(n).sub(&paa));
    }
    let e: Vec<C64> = r.iter().map(|z| z / s).collect();
    let sc = c64(s, 0.0);
    let pee = outer(&e, &e);
    paa.scale(c)
        .add(&outer(&e, a).scale(sc))
        .sub(&outer(a, &e).scale(sc))
        .add(&pee.scale(c.conj()))
        .add(&Matrix::identity(n).sub(&paa).sub(&pee))
}

/// The recombining beam splitter of the gravitational switch.
#[derive(Clone, Debug, PartialEq)]
pub struct Ubs {
    /// `U_BS` on `S_G_I ⊗ S_P_I → S_G_O ⊗ S_P_O` (gravity qubit, particle qutrit).
    pub operator: LabeledOperator,
    /// `(|0⟩ UV|Ψ⟩ + |1⟩ VU|Ψ⟩)/√2`, gravity-major over 2×3 indices.
    pub input: Vec<C64>,
    /// `|Γ⟩ ⊗ (αUV + βVU)|Ψ⟩` after normalization.
    pub target: Vec<C64>,
    /// `‖(αUV + βVU)|Ψ⟩‖` before normalization.
    pub prenorm: f64,
    /// Normalized particle state `(αUV + βVU)|Ψ⟩ / ‖·‖`.
    pub particle: [C64; 2],
}

/// Builds `U_BS` for `cfg`, mapping the entangled gravity–particle state
/// `(|0⟩UV|Ψ⟩ + |1⟩VU|Ψ⟩)/√2` to `|Γ⟩ ⊗ (αUV + βVU)|Ψ⟩/‖·‖`.
pub fn build_ubs(cfg: &ScenarioConfig) -> Result<Ubs, ScenarioError> {
    let (particle, prenorm) = target_particle(cfg)?;
    let uv = lift(&to2(&(&cfg.u * &cfg.v).mul_vec(&cfg.psi)));
    let vu = lift(&to2(&(&cfg.v * &cfg.u).mul_vec(&cfg.psi)));
    let h = core::f64::consts::FRAC_1_SQRT_2;
    let input: Vec<C64> = uv.iter().chain(&vu).map(|z| z * h).collect();
    let gamma = cfg.gamma();
    let p = lift(&particle);
    let target: Vec<C64> = gamma.iter().flat_map(|g| p.iter().map(move |z| g * z)).collect();
    let m = rotation_between(&input, &target);
    let operator = LabeledOperator::from_matrix(vec![g2("S_G_I"), q("S_P_I")], vec![g2("S_G_O"), q("S_P_O")], &m)?;
    Ok(Ubs { operator, input, target, prenorm, particle })
}

fn to2(v: &[C64]) -> [C64; 2] {
    [v[0], v[1]]
}

/// All gates of `cfg` except the final readout.
pub fn scenario_gates(cfg: &ScenarioConfig) -> Result<Vec<GateCJ>, ScenarioError> {
    match cfg.kind {
        ScenarioKind::FourEvent => four_event_gates(cfg),
        ScenarioKind::ThreeEvent => {
            let gates = four_event_gates(cfg)?;
            Ok(gates.iter().map(|g| relabel_gate(g, three_event_label)).collect::<Result<_, _>>()?)
        }
        ScenarioKind::TwoEventNorec | ScenarioKind::TwoEventRec => {
            let mut gates = vec![
                unitary_cj("A", &cfg.u, q("A_I"), q("A_O"))?,
                unitary_cj("B", &cfg.v, q("B_I"), q("B_O"))?,
                identity_cj("G", g2("G"), g2("G_O"))?,
            ];
            if cfg.kind == ScenarioKind::TwoEventRec {
                // The control factor carries VU|Ψ⟩ on G = 0, the opposite of
                // the branch order U_BS is defined on, hence the X on gravity.
                let ubs = build_ubs(cfg)?;
                let flip = LabeledOperator::from_matrix(
                    vec![g2("S_G_I"), q("S_P_I")],
                    vec![g2("S_G_I"), q("S_P_I")],
                    &Matrix::pauli_x().kron(&Matrix::identity(3)),
                )?;
                gates.push(operator_cj("U_BS", &ubs.operator.compose(&flip)?, None)?);
            }
            Ok(gates)
        }
    }
}

/// `|+⟩` or `|−⟩`.
pub fn sign_state(o: Outcome) -> Option<[C64; 2]> {
    let h = c64(core::f64::consts::FRAC_1_SQRT_2, 0.0);
    match o {
        Outcome::Plus => Some([h, h]),
        Outcome::Minus => Some([h, -h]),
        _ => None,
    }
}

/// Readout gates for the outcome pair `(a, b)`.
pub fn readout_gates(kind: ScenarioKind, a: Outcome, b: Outcome) -> Result<Vec<GateCJ>, ScenarioError> {
    let bad = || ScenarioError::InvalidConfig(format!("outcome {} is not measured by {kind}", pair_key(a, b)));
    let (first, second) = match kind {
        ScenarioKind::FourEvent | ScenarioKind::ThreeEvent => {
            let qa = a.qutrit().ok_or_else(bad)?;
            (measurement_cj("T_A", qa, q("T_A_I"))?, measurement_cj("T_B", b.qutrit().ok_or_else(bad)?, q("T_B_I"))?)
        }
        ScenarioKind::TwoEventNorec | ScenarioKind::TwoEventRec => {
            let s = sign_state(a).ok_or_else(bad)?;
            (effect_cj("T_G", &s, g2("T_G_I"))?, measurement_cj("T_P", b.qutrit().ok_or_else(bad)?, q("T_P_I"))?)
        }
    };
    Ok(vec![first, second])
}

/// `M(a, b)`: the full contraction of the process vector with every gate.
pub fn amplitude_for(cfg: &ScenarioConfig, a: Outcome, b: Outcome) -> Result<C64, ScenarioError> {
    let pv = build_process_vector(cfg.kind, &cfg.psi)?;
    let mut gates = scenario_gates(cfg)?;
    gates.extend(readout_gates(cfg.kind, a, b)?);
    Ok(amplitude(&pv, &gates)?)
}

/// Final state on the readout wires.
#[derive(Clone, Debug, PartialEq)]
pub struct OutputState {
    /// On `(T_A_I, T_B_I)` for optical kinds, `(T_G_I, T_P_I)` otherwise.
    pub ket: LabeledKet,
    /// `‖(αUV + βVU)|Ψ⟩‖` for `two_event_rec`.
    pub prenorm: Option<f64>,
}

/// Contracts every non-readout gate, leaving the pre-measurement state.
pub fn output_state(cfg: &ScenarioConfig) -> Result<OutputState, ScenarioError> {
    cfg.validate()?;
    let mut pv = build_process_vector(cfg.kind, &cfg.psi)?;
    for g in scenario_gates(cfg)? {
        pv = pv.contract_gate(&g)?;
    }
    let prenorm = match cfg.kind {
        ScenarioKind::TwoEventRec => Some(target_particle(cfg)?.1),
        _ => None,
    };
    Ok(OutputState { ket: pv.to_ket()?, prenorm })
}

pub fn probability_distribution(cfg: &ScenarioConfig) -> Result<ProbabilityTable, ScenarioError> {
    let out = output_state(cfg)?;
    let mut entries = Vec::new();
    for (a, b) in outcome_pairs(cfg.kind) {
        let mut m = out.ket.clone();
        for g in readout_gates(cfg.kind, a, b)? {
            m = m.contract(g.vector())?;
        }
        let amp = m.scalar_value().expect("readout consumes every open label");
        entries.push((a, b, amp.norm_sqr()));
    }
    ProbabilityTable::from_entries(entries)
}

/// Gravity measured in `|±⟩` without recombination.
#[derive(Clone, Debug, PartialEq)]
pub struct NorecDistribution {
    /// Joint table over `(±, particle)`.
    pub table: ProbabilityTable,
    /// Particle state given `+`, proportional to `{U,V}|Ψ⟩`; `None` when that branch has zero weight.
    pub plus_state: Option<[C64; 2]>,
    /// Particle state given `−`, proportional to `[V,U]|Ψ⟩`; `None` when that branch has zero weight.
    pub minus_state: Option<[C64; 2]>,
}

pub fn two_event_norec_distribution(cfg: &ScenarioConfig) -> Result<NorecDistribution, ScenarioError> {
    if cfg.kind != ScenarioKind::TwoEventNorec {
        return Err(ScenarioError::InvalidConfig(format!("expected two_event_norec, got {}", cfg.kind)));
    }
    let table = probability_distribution(cfg)?;
    let out = output_state(cfg)?;
    let branch = |o: Outcome| -> Result<Option<[C64; 2]>, ScenarioError> {
        let s = sign_state(o).expect("sign outcome");
        let post = out.ket.contract(&LabeledKet::on(g2("T_G_I"), &s)?)?;
        let amps = post.amplitudes();
        let n = norm(&amps[..2]);
        Ok((n > TAU_DEG).then(|| [amps[0] / n, amps[1] / n]))
    };
    Ok(NorecDistribution { plus_state: branch(Outcome::Plus)?, minus_state: branch(Outcome::Minus)?, table })
}

/// Analytic four-event table: `p(i,v) = ¼|⟨i|{U,V}|Ψ⟩|²`, `p(v,i) = ¼|⟨i|[U,V]|Ψ⟩|²`.
pub fn closed_form_table(u: &Matrix, v: &Matrix, psi: &[C64; 2]) -> ProbabilityTable {
    let uv = (u * v).mul_vec(psi);
    let vu = (v * u).mul_vec(psi);
    let entries = outcome_pairs(ScenarioKind::FourEvent)
        .into_iter()
        .map(|(a, b)| {
            let p = match (a, b) {
                (Outcome::Vacuum, Outcome::Vacuum) => 0.0,
                (i, Outcome::Vacuum) => 0.25 * (uv[i.qutrit().unwrap().index()] + vu[i.qutrit().unwrap().index()]).norm_sqr(),
                (Outcome::Vacuum, i) => 0.25 * (uv[i.qutrit().unwrap().index()] - vu[i.qutrit().unwrap().index()]).norm_sqr(),
                _ => 0.0,
            };
            (a, b, p)
        })
        .collect();
    ProbabilityTable { entries }
}

/// `½(1 + Re⟨Ψ|U†V†UV|Ψ⟩)`.
pub fn closed_form_p_a(u: &Matrix, v: &Matrix, psi: &[C64; 2]) -> f64 {
    let uv = (u * v).mul_vec(psi);
    let vu = (v * u).mul_vec(psi);
    0.5 * (1.0 + inner(&vu, &uv).re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::equal_up_to_phase;
    use crate::{TAU_AGG, TAU_EQ};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const Z: Outcome = Outcome::Zero;
    const O: Outcome = Outcome::One;
    const V: Outcome = Outcome::Vacuum;

    fn ket0() -> [C64; 2] {
        [ONE, ZERO]
    }

    fn cfg(kind: ScenarioKind, u: Matrix, v: Matrix) -> ScenarioConfig {
        ScenarioConfig::new(kind, u, v, ket0())
    }

    fn only(table: &ProbabilityTable, a: Outcome, b: Outcome) {
        for &(x, y, p) in table.entries() {
            let expect = if (x, y) == (a, b) { 1.0 } else { 0.0 };
            assert!((p - expect).abs() < TAU_EQ, "{} = {p}", pair_key(x, y));
        }
    }

    #[test]
    fn kind_names_round_trip() {
        for k in ScenarioKind::ALL {
            assert_eq!(k.as_str().parse::<ScenarioKind>().unwrap(), k);
        }
        assert!("five_event".parse::<ScenarioKind>().is_err());
        assert_eq!(Outcome::Minus.to_string(), "\u{2212}");
        assert_eq!("-".parse::<Outcome>().unwrap(), Outcome::Minus);
    }

    #[test]
    fn validation() {
        let bad = cfg(ScenarioKind::FourEvent, Matrix::from_rows(&[&[ONE, ZERO], &[ZERO, ZERO]]), Matrix::identity(2));
        assert!(matches!(bad.validate(), Err(ScenarioError::NotUnitary { which: "u", .. })));
        assert!(bad.validate().unwrap_err().to_string().contains("not unitary"));
        let mut c = cfg(ScenarioKind::FourEvent, Matrix::identity(2), Matrix::identity(2));
        c.psi = [ONE, ONE];
        assert!(matches!(c.validate(), Err(ScenarioError::NotNormalized { .. })));
        let mut c = cfg(ScenarioKind::FourEvent, Matrix::identity(2), Matrix::identity(2));
        c.alpha_beta = Some((ONE, ZERO));
        assert!(matches!(c.validate(), Err(ScenarioError::InvalidConfig(_))));
    }

    #[test]
    fn four_event_wiring_has_ten_transports() {
        let pv = build_process_vector(ScenarioKind::FourEvent, &ket0()).unwrap();
        assert_eq!(pv.wiring().len(), 10);
        assert_eq!(pv.factors().len(), 10);
        assert_eq!(pv.labels().len(), 20);
    }

    #[test]
    fn gates_partition_the_process_labels() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for kind in ScenarioKind::ALL {
            let c = ScenarioConfig::random(kind, &mut rng);
            let pv = build_process_vector(kind, &c.psi).unwrap();
            let mut gates = scenario_gates(&c).unwrap();
            let (a, b) = outcome_pairs(kind)[0];
            gates.extend(readout_gates(kind, a, b).unwrap());
            let mut consumed: Vec<String> = gates.iter().flat_map(|g| g.labels().iter().map(|l| l.name().to_string())).collect();
            consumed.sort();
            let open: Vec<String> = pv.labels().iter().map(|l| l.name().to_string()).collect();
            assert_eq!(consumed, open, "{kind}");
        }
    }

    #[test]
    fn identity_landmark() {
        let c = cfg(ScenarioKind::FourEvent, Matrix::identity(2), Matrix::identity(2));
        assert!((amplitude_for(&c, Z, V).unwrap() - ONE).norm() < TAU_EQ);
        assert!(amplitude_for(&c, V, Z).unwrap().norm() < TAU_EQ);
        only(&probability_distribution(&c).unwrap(), Z, V);
    }

    #[test]
    fn anticommuting_paulis_landmark() {
        let c = cfg(ScenarioKind::FourEvent, Matrix::pauli_x(), Matrix::pauli_z());
        assert!((amplitude_for(&c, V, O).unwrap().norm_sqr() - 1.0).abs() < TAU_EQ);
        only(&probability_distribution(&c).unwrap(), V, O);
    }

    #[test]
    fn hadamard_z_landmark() {
        let c = cfg(ScenarioKind::FourEvent, Matrix::hadamard(), Matrix::pauli_z());
        let t = probability_distribution(&c).unwrap();
        assert!((t.get(Z, V) - 0.5).abs() < TAU_EQ);
        assert!((t.get(V, O) - 0.5).abs() < TAU_EQ);
        assert!((t.sum() - 1.0).abs() < TAU_EQ);
    }

    #[test]
    fn closed_form_and_marginals() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..40 {
            let c = ScenarioConfig::random(ScenarioKind::FourEvent, &mut rng);
            let t = probability_distribution(&c).unwrap();
            assert!(t.max_abs_diff(&closed_form_table(&c.u, &c.v, &c.psi)) < TAU_AGG);
            assert!((t.sum() - 1.0).abs() < TAU_AGG);
            assert!((t.p_a() - closed_form_p_a(&c.u, &c.v, &c.psi)).abs() < TAU_AGG);
            assert!((t.p_a() + t.p_b() - 1.0).abs() < TAU_AGG);
        }
    }

    #[test]
    fn three_event_equals_four_event() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..10 {
            let mut c = ScenarioConfig::random(ScenarioKind::FourEvent, &mut rng);
            let four = probability_distribution(&c).unwrap();
            c.kind = ScenarioKind::ThreeEvent;
            assert!(four.max_abs_diff(&probability_distribution(&c).unwrap()) <= TAU_EQ);
        }
        let pv3 = build_process_vector(ScenarioKind::ThreeEvent, &ket0()).unwrap();
        assert!(pv3.has_label("B_I2") && !pv3.has_label("B'_I"));
        let back = pv3
            .relabel(|n| match n {
                "B_I1" => Some("B_I".into()),
                "B_O1" => Some("B_O".into()),
                "B_I2" => Some("B'_I".into()),
                "B_O2" => Some("B'_O".into()),
                _ => None,
            })
            .unwrap();
        assert!(back.approx_eq(&build_process_vector(ScenarioKind::FourEvent, &ket0()).unwrap(), 0.0));
    }

    #[test]
    fn reduced_vector_matches_contracted_prefix() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let c = ScenarioConfig::random(ScenarioKind::FourEvent, &mut rng);
        let mut pv = build_process_vector(ScenarioKind::FourEvent, &c.psi).unwrap();
        for g in &scenario_gates(&c).unwrap()[..3] {
            pv = pv.contract_gate(g).unwrap();
        }
        let reduced = reduced_process_vector_4event(&c.psi, ReducedVariant::WithFinalSplitter).unwrap();
        assert!(pv.approx_eq(&reduced, TAU_AGG));
        let control = reduced.factor_containing("A_I").unwrap();
        assert!((control.norm_sqr() - 1.0).abs() < TAU_EQ);

        // Both reduced forms give the same result as the full vector once the rest is contracted.
        let mut full = reduced;
        for g in &scenario_gates(&c).unwrap()[3..] {
            full = full.contract_gate(g).unwrap();
        }
        let expected = output_state(&c).unwrap().ket;
        assert!(full.to_ket().unwrap().approx_eq(&expected, TAU_AGG));

        let local = reduced_process_vector_4event(&c.psi, ReducedVariant::LocalMeasurement).unwrap();
        assert!(local.has_label("T_A_I") && !local.has_label("Sf_A_I"));
        assert!(local.wiring().iter().any(|w| w.from == "A'_O" && w.to == "T_A_I"));
        assert!(local.wiring().iter().any(|w| w.from == "B'_O" && w.to == "T_B_I"));
    }

    #[test]
    fn intermediate_state_before_final_splitter() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let c = ScenarioConfig::random(ScenarioKind::FourEvent, &mut rng);
        let mut pv = build_process_vector(ScenarioKind::FourEvent, &c.psi).unwrap();
        for g in &scenario_gates(&c).unwrap()[..7] {
            pv = pv.contract_gate(g).unwrap();
        }
        let uv = (&c.u * &c.v).mul_vec(&c.psi);
        let vu = (&c.v * &c.u).mul_vec(&c.psi);
        let vac = LabeledKet::basis(vec![q("Sf_A_I")], &[2]).unwrap();
        let red = LabeledKet::on(q("Sf_A_I"), &lift(&to2(&uv))).unwrap().tensor_product(&LabeledKet::basis(vec![q("Sf_B_I")], &[2]).unwrap()).unwrap();
        let blue = vac.tensor_product(&LabeledKet::on(q("Sf_B_I"), &lift(&to2(&vu))).unwrap()).unwrap();
        let expected = red.add(&blue).unwrap().scale(c64(core::f64::consts::FRAC_1_SQRT_2, 0.0));
        // The final transports are untouched; the particle factor is the checkpoint state.
        assert_eq!(pv.factors().len(), 3);
        let residual = pv.factor_containing("Sf_A_I").unwrap();
        assert!(residual.approx_eq(&expected, TAU_AGG));
    }

    #[test]
    fn output_state_matches_printed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let c = ScenarioConfig::random(ScenarioKind::FourEvent, &mut rng);
        let out = output_state(&c).unwrap().ket;
        assert!((out.norm() - 1.0).abs() < TAU_AGG);
        let uv = (&c.u * &c.v).mul_vec(&c.psi);
        let vu = (&c.v * &c.u).mul_vec(&c.psi);
        for i in 0..2 {
            let anti = (uv[i] + vu[i]) * 0.5;
            let comm = (uv[i] - vu[i]) * 0.5;
            assert!((out.amplitude_at(&[("T_A_I", i), ("T_B_I", 2)]).unwrap() - anti).norm() < TAU_AGG);
            assert!((out.amplitude_at(&[("T_A_I", 2), ("T_B_I", i)]).unwrap() - comm).norm() < TAU_AGG);
        }
    }

    #[test]
    fn swapping_u_and_v() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..10 {
            let c = ScenarioConfig::random(ScenarioKind::FourEvent, &mut rng);
            let mut swapped = c.clone();
            core::mem::swap(&mut swapped.u, &mut swapped.v);
            let a = probability_distribution(&c).unwrap();
            assert!(a.max_abs_diff(&probability_distribution(&swapped).unwrap()) < TAU_AGG);
        }
    }

    #[test]
    fn norec_landmarks_and_states() {
        let id = ScenarioConfig::new(ScenarioKind::TwoEventNorec, Matrix::identity(2), Matrix::identity(2), ket0());
        let d = two_event_norec_distribution(&id).unwrap();
        assert!((d.table.get(Outcome::Plus, Z) - 1.0).abs() < TAU_EQ);
        assert!(d.minus_state.is_none());
        assert!(equal_up_to_phase(&d.plus_state.unwrap(), &ket0(), TAU_EQ));

        let xz = ScenarioConfig::new(ScenarioKind::TwoEventNorec, Matrix::pauli_x(), Matrix::pauli_z(), ket0());
        let d = two_event_norec_distribution(&xz).unwrap();
        assert!((d.table.get(Outcome::Minus, O) - 1.0).abs() < TAU_EQ);
        assert!(d.plus_state.is_none());
        assert!(equal_up_to_phase(&d.minus_state.unwrap(), &[ZERO, ONE], TAU_EQ));
    }

    #[test]
    fn norec_marginal_matches_four_event() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..30 {
            let mut c = ScenarioConfig::random(ScenarioKind::TwoEventNorec, &mut rng);
            let d = two_event_norec_distribution(&c).unwrap();
            c.kind = ScenarioKind::FourEvent;
            let four = probability_distribution(&c).unwrap();
            assert!(d.table.as_switch_table().max_abs_diff(&four) < TAU_AGG);
            assert!((d.table.p_a() - four.p_a()).abs() < TAU_AGG);
            let uv = (&c.u * &c.v).mul_vec(&c.psi);
            let vu = (&c.v * &c.u).mul_vec(&c.psi);
            let anti = [uv[0] + vu[0], uv[1] + vu[1]];
            if let Some(s) = d.plus_state {
                assert!(equal_up_to_phase(&s, &crate::linalg::normalized(&anti, 0.0).unwrap(), TAU_AGG));
            }
        }
    }

    #[test]
    fn ubs_identity_example() {
        let mut c = ScenarioConfig::new(ScenarioKind::TwoEventRec, Matrix::identity(2), Matrix::identity(2), [c64(0.6, 0.0), c64(0.0, 0.8)]);
        c.alpha_beta = Some((ONE, ZERO));
        let ubs = build_ubs(&c).unwrap();
        let h = core::f64::consts::FRAC_1_SQRT_2;
        let psi = lift(&c.psi);
        let input: Vec<C64> = psi.iter().chain(&psi).map(|z| z * h).collect();
        let out = ubs.operator.matrix().mul_vec(&input);
        let expected: Vec<C64> = psi.iter().copied().chain([ZERO; 3]).collect();
        assert!(crate::linalg::max_abs_diff(&out, &expected) < TAU_AGG);
    }

    #[test]
    fn ubs_is_unitary_and_maps_input_to_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for _ in 0..100 {
            let mut c = ScenarioConfig::random(ScenarioKind::TwoEventRec, &mut rng);
            let ab = random_state(2, &mut rng);
            c.alpha_beta = Some((ab[0], ab[1]));
            let g = random_state(2, &mut rng);
            c.gamma = Some([g[0], g[1]]);
            let ubs = build_ubs(&c).unwrap();
            let m = ubs.operator.matrix();
            assert!(m.is_unitary(TAU_AGG));
            let out = m.mul_vec(&ubs.input);
            assert!(crate::linalg::max_abs_diff(&out, &ubs.target) < TAU_AGG);
            // Product structure: the 2×3 coefficient matrix has rank one.
            let rho = Matrix::from_fn(2, 2, |i, j| (0..3).map(|k| out[i * 3 + k] * out[j * 3 + k].conj()).sum());
            let purity = (&rho * &rho).trace().re;
            assert!((purity - 1.0).abs() < TAU_AGG);
        }
    }

    #[test]
    fn ubs_degenerate_target() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let u = haar_unitary(2, &mut rng);
        let mut c = ScenarioConfig::new(ScenarioKind::TwoEventRec, u.clone(), u, ket0());
        let h = c64(core::f64::consts::FRAC_1_SQRT_2, 0.0);
        c.alpha_beta = Some((h, -h));
        assert!(matches!(build_ubs(&c), Err(ScenarioError::DegenerateTarget { .. })));
        assert!(matches!(probability_distribution(&c), Err(ScenarioError::DegenerateTarget { .. })));
    }

    #[test]
    fn rec_output_is_commutator_for_antisymmetric_weights() {
        let mut c = ScenarioConfig::new(ScenarioKind::TwoEventRec, Matrix::pauli_x(), Matrix::pauli_z(), ket0());
        let h = c64(core::f64::consts::FRAC_1_SQRT_2, 0.0);
        c.alpha_beta = Some((h, -h));
        let out = output_state(&c).unwrap();
        let particle = out.ket.contract(&LabeledKet::on(g2("T_G_I"), &[ONE, ZERO]).unwrap()).unwrap();
        assert!(equal_up_to_phase(&particle.amplitudes()[..2], &[ZERO, c64(-1.0, 0.0)], TAU_AGG));
        assert!((out.prenorm.unwrap() - 2f64.sqrt()).abs() < TAU_EQ);
    }

    #[test]
    fn rec_output_with_equal_gates() {
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        for _ in 0..10 {
            let u = haar_unitary(2, &mut rng);
            let p = random_state(2, &mut rng);
            let mut c = ScenarioConfig::new(ScenarioKind::TwoEventRec, u.clone(), u.clone(), [p[0], p[1]]);
            let ab = random_state(2, &mut rng);
            c.alpha_beta = Some((ab[0], ab[1]));
            let out = output_state(&c).unwrap();
            let expected = (&u * &u).mul_vec(&c.psi);
            let particle = out.ket.contract(&LabeledKet::on(g2("T_G_I"), &[ONE, ZERO]).unwrap()).unwrap();
            assert!(equal_up_to_phase(&particle.amplitudes()[..2], &expected, TAU_AGG));
        }
    }

    #[test]
    fn rec_table_is_gamma_times_particle() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..20 {
            let c = ScenarioConfig::random(ScenarioKind::TwoEventRec, &mut rng);
            let t = probability_distribution(&c).unwrap();
            let ubs = build_ubs(&c).unwrap();
            for &(g, i, p) in t.entries() {
                let s = sign_state(g).unwrap();
                let pg = inner(&s, &c.gamma()).norm_sqr();
                let pi = i.qutrit().unwrap().index();
                let pp = if pi < 2 { ubs.particle[pi].norm_sqr() } else { 0.0 };
                assert!((p - pg * pp).abs() < TAU_AGG);
            }
            assert!((t.sum() - 1.0).abs() < TAU_AGG);
        }
    }

    #[test]
    fn clipping_and_negative_probabilities() {
        let t = ProbabilityTable::from_entries(vec![(Z, V, -1e-14), (V, Z, 1.0)]).unwrap();
        assert_eq!(t.get(Z, V), 0.0);
        assert!(ProbabilityTable::from_entries(vec![(Z, V, -1e-6)]).is_err());
    }

    #[test]
    fn rotation_handles_parallel_vectors() {
        let a = [c64(0.6, 0.0), c64(0.8, 0.0)];
        let b = [c64(0.0, 0.6), c64(0.0, 0.8)];
        let m = rotation_between(&a, &b);
        assert!(m.is_unitary(TAU_EQ));
        assert!(crate::linalg::max_abs_diff(&m.mul_vec(&a), &b) < TAU_EQ);
    }
}
