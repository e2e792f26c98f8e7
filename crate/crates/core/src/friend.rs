//! Photon records seen by the Friend, with the non-demolition observable `M`
//! and quantum erasure.
//!
//! The particle's two histories are the branch states `|R⟩` (red: Bob acts
//! first) and `|B⟩` (blue: Alice acts first). Photons emitted at each gate
//! reach the Friend at distinct arrival times, recorded as orthonormal
//! record states labelled by the arrival events. A record seen only on the
//! blue branch lies in `P_<`, one seen only on the red branch in `P_>`, and a
//! record shared by both branches in `P_=`. `M = P_< + P_>` with eigenvalue 1
//! and `P_=` with eigenvalue 0.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use num_traits::Float;
use rand::Rng;
use thiserror::Error;

use crate::cj::BeamSplitter;
use crate::linalg::{c64, Matrix, C64, ZERO};
use crate::qutrit::lift;
use crate::scenario::ScenarioConfig;
use crate::tensor::{LabeledKet, SpaceLabel, TensorError};
use crate::{TAU_AGG, TAU_DEG};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FriendError {
    #[error("unknown switch variant `{0}`")]
    UnknownVariant(String),
    #[error("record state has weight {weight:e} outside the M decomposition")]
    UnknownRecordSupport { weight: f64 },
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error(transparent)]
    Tensor(#[from] TensorError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum VariantKind {
    Optical4Event,
    Optical3Event,
    Grav2Event,
    Grav2EventNomeet,
    Grav2EventNorecomb,
    Grav4Event,
}

impl VariantKind {
    pub const ALL: [Self; 6] = [
        Self::Optical4Event,
        Self::Optical3Event,
        Self::Grav2Event,
        Self::Grav2EventNomeet,
        Self::Grav2EventNorecomb,
        Self::Grav4Event,
    ];

    pub const fn as_str(self) -> &'static str {
        match self {
            Self::Optical4Event => "optical_4event",
            Self::Optical3Event => "optical_3event",
            Self::Grav2Event => "grav_2event",
            Self::Grav2EventNomeet => "grav_2event_nomeet",
            Self::Grav2EventNorecomb => "grav_2event_norecomb",
            Self::Grav4Event => "grav_4event",
        }
    }
}

impl fmt::Display for VariantKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for VariantKind {
    type Err = FriendError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL.into_iter().find(|k| k.as_str() == s).ok_or_else(|| FriendError::UnknownVariant(s.into()))
    }
}

/// A switch realization seen through the Friend's photon records.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SwitchVariant {
    pub kind: VariantKind,
    /// The photons of the red and blue histories meet at the Friend's boundary.
    pub meets_boundary: bool,
    /// From that point on they recombine.
    pub recombines: bool,
}

impl SwitchVariant {
    pub const fn new(kind: VariantKind) -> Self {
        let (meets_boundary, recombines) = match kind {
            VariantKind::Optical4Event | VariantKind::Optical3Event | VariantKind::Grav2EventNomeet => (false, false),
            VariantKind::Grav2EventNorecomb => (true, false),
            VariantKind::Grav2Event | VariantKind::Grav4Event => (true, true),
        };
        Self { kind, meets_boundary, recombines }
    }
}

impl From<VariantKind> for SwitchVariant {
    fn from(kind: VariantKind) -> Self {
        Self::new(kind)
    }
}

/// Which part of the `M` decomposition a record state belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RecordClass {
    /// Seen only on the blue branch (`P_<`).
    BlueOnly,
    /// Seen only on the red branch (`P_>`).
    RedOnly,
    /// Identical on both branches (`P_=`).
    Shared,
    /// Outside the decomposition.
    Unclassified,
}

/// One record basis state: the photon arrival events the Friend registers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Record {
    pub arrivals: Vec<String>,
    pub class: RecordClass,
}

impl Record {
    pub fn new(arrivals: &[&str], class: RecordClass) -> Self {
        Self { arrivals: arrivals.iter().map(|s| s.to_string()).collect(), class }
    }
}

/// Particle branch ⊗ photon records.
///
/// The ket lives on `particle` (dim 2, `|R⟩ = 0`, `|B⟩ = 1`) and `records`
/// (one dimension per entry of [`JointState::records`]).
#[derive(Clone, Debug, PartialEq)]
pub struct JointState {
    pub ket: LabeledKet,
    pub records: Vec<Record>,
}

pub const RED: usize = 0;
pub const BLUE: usize = 1;

impl JointState {
    /// `amps[branch][record]`.
    pub fn from_amplitudes(records: Vec<Record>, amps: [Vec<C64>; 2]) -> Result<Self, FriendError> {
        let n = records.len();
        if amps.iter().any(|a| a.len() != n) {
            return Err(TensorError::DimMismatch(format!("expected {n} record amplitudes per branch")).into());
        }
        let labels = vec![SpaceLabel::qubit("particle"), SpaceLabel::new("records", n)];
        let ket = LabeledKet::from_fn(labels, |i| amps[i[0]][i[1]])?;
        Ok(Self { ket, records })
    }

    pub fn amplitude(&self, branch: usize, record: usize) -> C64 {
        self.ket.amplitudes()[branch * self.records.len() + record]
    }

    fn map_amplitudes(&self, f: impl Fn(usize, usize, C64) -> C64) -> Self {
        let n = self.records.len();
        let amps = [0, 1].map(|b| (0..n).map(|r| f(b, r, self.amplitude(b, r))).collect::<Vec<_>>());
        Self::from_amplitudes(self.records.clone(), amps).expect("same shape")
    }

    pub fn norm(&self) -> f64 {
        self.ket.norm()
    }

    /// 2×2 reduced state of the particle branch.
    pub fn particle_density(&self) -> Matrix {
        let n = self.records.len();
        Matrix::from_fn(2, 2, |i, j| (0..n).map(|r| self.amplitude(i, r) * self.amplitude(j, r).conj()).sum())
    }

    /// `Tr ρ²` of the particle branch state.
    pub fn purity(&self) -> f64 {
        let rho = self.particle_density();
        (&rho * &rho).trace().re
    }

    fn weight_where(&self, keep: impl Fn(&Record) -> bool) -> f64 {
        let n = self.records.len();
        (0..n)
            .filter(|&r| keep(&self.records[r]))
            .map(|r| self.amplitude(RED, r).norm_sqr() + self.amplitude(BLUE, r).norm_sqr())
            .fold(0.0, |a, b| a + b)
    }
}

/// Records of each variant and the joint state they form with the particle.
pub fn build_joint_state(variant: SwitchVariant) -> JointState {
    let h = c64(core::f64::consts::FRAC_1_SQRT_2, 0.0);
    let split = |red: &[&str], blue: &[&str]| {
        JointState::from_amplitudes(
            vec![Record::new(red, RecordClass::RedOnly), Record::new(blue, RecordClass::BlueOnly)],
            [vec![h, ZERO], vec![ZERO, h]],
        )
        .expect("two records")
    };
    let shared = |labels: &[&str]| {
        JointState::from_amplitudes(vec![Record::new(labels, RecordClass::Shared)], [vec![h], vec![h]]).expect("one record")
    };
    match variant.kind {
        VariantKind::Optical4Event => split(&["F_A'", "F_B"], &["F_A", "F_B'"]),
        VariantKind::Optical3Event => split(&["F_A'", "F_B"], &["F_A", "F_B"]),
        VariantKind::Grav2Event => shared(&["F~_A", "F~_B"]),
        VariantKind::Grav2EventNomeet => split(&["F~_A[R]", "F~_B[R]"], &["F~_A[B]", "F~_B[B]"]),
        VariantKind::Grav2EventNorecomb => split(&["F~_A[R]", "F~_B[R]"], &["F~_A[B]", "F~_B[B]"]),
        VariantKind::Grav4Event => shared(&["F~_AA'", "F~_BB'"]),
    }
}

/// One outcome of `M` with its Born weight and normalized post-state.
#[derive(Clone, Debug, PartialEq)]
pub struct MBranch {
    pub outcome: u8,
    pub probability: f64,
    /// `None` when the outcome has zero probability.
    pub post: Option<JointState>,
}

/// Distribution of `M` over `{0, 1}`.
pub fn measure_m(js: &JointState) -> Result<[MBranch; 2], FriendError> {
    let stray = js.weight_where(|r| r.class == RecordClass::Unclassified);
    if stray > TAU_AGG {
        return Err(FriendError::UnknownRecordSupport { weight: stray });
    }
    let total = js.weight_where(|_| true);
    let branch = |outcome: u8| {
        let in_range = |r: &Record| match outcome {
            0 => r.class == RecordClass::Shared,
            _ => matches!(r.class, RecordClass::BlueOnly | RecordClass::RedOnly),
        };
        let w = js.weight_where(in_range);
        let post = (w > TAU_DEG * TAU_DEG).then(|| {
            let s = c64(1.0 / Float::sqrt(w), 0.0);
            js.map_amplitudes(|_, r, a| if in_range(&js.records[r]) { a * s } else { ZERO })
        });
        MBranch { outcome, probability: w / total, post }
    };
    Ok([branch(0), branch(1)])
}

/// Draws an `M` outcome with `rng`.
pub fn sample_m<R: Rng + ?Sized>(js: &JointState, rng: &mut R) -> Result<MBranch, FriendError> {
    let [zero, one] = measure_m(js)?;
    let x: f64 = rng.random();
    Ok(if x < zero.probability { zero } else { one })
}

/// One erasure outcome `±`.
#[derive(Clone, Debug, PartialEq)]
pub struct EraseBranch {
    /// `+1` or `−1`.
    pub sign: i8,
    pub probability: f64,
    pub post: Option<JointState>,
}

/// Measures the records in `|±⟩ = (|red⟩ ± |blue⟩)/√2`, erasing which-way
/// information. Requires branch-dependent records only: exactly one
/// red-only and one blue-only record with no shared support.
pub fn erase(js: &JointState) -> Result<[EraseBranch; 2], FriendError> {
    let shared = js.weight_where(|r| r.class == RecordClass::Shared);
    if shared > TAU_AGG {
        return Err(FriendError::PreconditionViolated("records are branch-independent; M did not return 1".into()));
    }
    let find = |c: RecordClass| {
        let mut it = js.records.iter().enumerate().filter(|(_, r)| r.class == c).map(|(i, _)| i);
        match (it.next(), it.next()) {
            (Some(i), None) => Ok(i),
            _ => Err(FriendError::PreconditionViolated("erasure needs one red and one blue record".into())),
        }
    };
    let (red, blue) = (find(RecordClass::RedOnly)?, find(RecordClass::BlueOnly)?);
    let h = core::f64::consts::FRAC_1_SQRT_2;
    let projected = |sign: i8| -> [C64; 2] {
        let sg = f64::from(sign);
        [0, 1].map(|b| (js.amplitude(b, red) + js.amplitude(b, blue) * sg) * h)
    };
    let weight = |p: &[C64; 2]| p[0].norm_sqr() + p[1].norm_sqr();
    let total = weight(&projected(1)) + weight(&projected(-1));
    let branch = |sign: i8| {
        let sg = f64::from(sign);
        // Particle amplitudes after projecting the records on |±⟩.
        let p = projected(sign);
        let w = weight(&p);
        let post = (w > TAU_DEG * TAU_DEG).then(|| {
            let s = 1.0 / Float::sqrt(w);
            js.map_amplitudes(|b, r, _| {
                let rec = if r == red {
                    h
                } else if r == blue {
                    h * sg
                } else {
                    0.0
                };
                p[b] * s * rec
            })
        });
        EraseBranch { sign, probability: w / total, post }
    };
    Ok([branch(1), branch(-1)])
}

/// Particle branch amplitudes `(red, blue)` of a state whose records are a
/// single product factor; `None` when the particle is entangled with them.
pub fn particle_state(js: &JointState) -> Option<[C64; 2]> {
    if (js.purity() - 1.0).abs() > TAU_AGG {
        return None;
    }
    let n = js.records.len();
    let r = (0..n).max_by(|&a, &b| {
        let wa = js.amplitude(RED, a).norm_sqr() + js.amplitude(BLUE, a).norm_sqr();
        let wb = js.amplitude(RED, b).norm_sqr() + js.amplitude(BLUE, b).norm_sqr();
        wa.total_cmp(&wb)
    })?;
    let v = [js.amplitude(RED, r), js.amplitude(BLUE, r)];
    crate::linalg::normalized(&v, TAU_DEG).map(|x| [x[0], x[1]])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Classification {
    DistinguishableAs2Event,
    IndistinguishableFromClassical,
}

impl Classification {
    pub const fn as_str(self) -> &'static str {
        match self {
            Self::DistinguishableAs2Event => "distinguishable_as_2event",
            Self::IndistinguishableFromClassical => "indistinguishable_from_classical",
        }
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// `M` certifies a 2-event realization exactly when the photons meet and recombine.
pub fn classify(variant: SwitchVariant) -> Classification {
    if variant.meets_boundary && variant.recombines {
        Classification::DistinguishableAs2Event
    } else {
        Classification::IndistinguishableFromClassical
    }
}

/// Arrival-event counts over `runs` decohered runs: each run the particle
/// takes one branch at random and the Friend logs that branch's arrivals.
pub fn decohered_run_distribution<R: Rng + ?Sized>(variant: SwitchVariant, runs: usize, rng: &mut R) -> BTreeMap<String, usize> {
    let js = build_joint_state(variant);
    let rho = js.particle_density();
    let p_red = rho[(RED, RED)].re / rho.trace().re;
    let mut counts = BTreeMap::new();
    for _ in 0..runs {
        let branch = if rng.random::<f64>() < p_red { RED } else { BLUE };
        let weights: Vec<f64> = (0..js.records.len()).map(|r| js.amplitude(branch, r).norm_sqr()).collect();
        let total: f64 = weights.iter().sum();
        let mut x = rng.random::<f64>() * total;
        let mut pick = weights.len() - 1;
        for (r, w) in weights.iter().enumerate() {
            if x < *w {
                pick = r;
                break;
            }
            x -= w;
        }
        for a in &js.records[pick].arrivals {
            *counts.entry(a.clone()).or_insert(0) += 1;
        }
    }
    counts
}

/// Distinct arrival events with support in the variant's joint state.
pub fn distinct_arrival_labels(variant: SwitchVariant) -> usize {
    let js = build_joint_state(variant);
    let mut seen: Vec<&str> = Vec::new();
    for (r, rec) in js.records.iter().enumerate() {
        if js.amplitude(RED, r).norm_sqr() + js.amplitude(BLUE, r).norm_sqr() <= TAU_DEG {
            continue;
        }
        for a in &rec.arrivals {
            if !seen.contains(&a.as_str()) {
                seen.push(a);
            }
        }
    }
    seen.len()
}

/// Sends a branch superposition `red |UVΨ⟩_A|v⟩_B + blue |v⟩_A|VUΨ⟩_B`
/// through the final beam splitter. The result lives on `(T_A_I, T_B_I)`.
pub fn recombine(branch: [C64; 2], cfg: &ScenarioConfig) -> Result<LabeledKet, FriendError> {
    let uv = (&cfg.u * &cfg.v).mul_vec(&cfg.psi);
    let vu = (&cfg.v * &cfg.u).mul_vec(&cfg.psi);
    let (ua, ub) = (lift(&[uv[0], uv[1]]), lift(&[vu[0], vu[1]]));
    let labels = vec![SpaceLabel::qutrit("Sf_A_I"), SpaceLabel::qutrit("Sf_B_I")];
    let ket = LabeledKet::from_fn(labels, |i| match (i[0], i[1]) {
        (a, 2) if a < 2 => branch[RED] * ua[a],
        (2, b) if b < 2 => branch[BLUE] * ub[b],
        _ => ZERO,
    })?;
    let bs = BeamSplitter::new(
        SpaceLabel::qutrit("Sf_A_I"),
        SpaceLabel::qutrit("Sf_B_I"),
        SpaceLabel::qutrit("T_A_I"),
        SpaceLabel::qutrit("T_B_I"),
    )?;
    Ok(bs.apply(&ket)?)
}

/// Summary used by the `friend` command.
#[derive(Clone, Debug, PartialEq)]
pub struct FriendReport {
    pub variant: SwitchVariant,
    /// `P(M = 0)`, `P(M = 1)`.
    pub m: [f64; 2],
    /// `P(+)`, `P(−)` when erasure applies.
    pub erase: Option<[f64; 2]>,
    /// Particle purity after the Friend's measurements.
    pub post_state_purity: f64,
    pub purity_before: f64,
    pub classification: Classification,
    pub distinct_arrival_labels: usize,
}

pub fn friend_report(variant: SwitchVariant) -> Result<FriendReport, FriendError> {
    let js = build_joint_state(variant);
    let [m0, m1] = measure_m(&js)?;
    let (erase_probs, post_state_purity) = if m1.probability > 1.0 - TAU_AGG {
        let [plus, minus] = erase(&js)?;
        let purity = plus.post.as_ref().map_or(0.0, JointState::purity);
        (Some([plus.probability, minus.probability]), purity)
    } else {
        (None, m0.post.as_ref().map_or(js.purity(), JointState::purity))
    };
    Ok(FriendReport {
        variant,
        m: [m0.probability, m1.probability],
        erase: erase_probs,
        post_state_purity,
        purity_before: js.purity(),
        classification: classify(variant),
        distinct_arrival_labels: distinct_arrival_labels(variant),
    })
}
