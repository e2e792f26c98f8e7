//! Brute-force wire-register simulation of every switch kind.
//!
//! The particle is tracked on explicit qutrit wires (Alice's and Bob's arms,
//! plus a spare arm for the three-event routing) and, for gravitational
//! kinds, a gravity qubit. Gates are applied as plain matrices in temporal
//! order. Nothing from the CJ or process-vector layers is used here.

use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::{c64, inner, norm, Matrix, C64};
use crate::scenario::{outcome_pairs, Outcome, ProbabilityTable, ScenarioConfig, ScenarioError, ScenarioKind};

const VAC: usize = 2;

/// Register contents: one digit per wire, first wire most significant.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleState {
    pub wires: Vec<&'static str>,
    pub dims: Vec<usize>,
    pub amps: Vec<C64>,
}

impl OracleState {
    fn new(wires: Vec<(&'static str, usize)>, product: Vec<Vec<C64>>) -> Self {
        let (names, dims): (Vec<_>, Vec<_>) = wires.into_iter().unzip();
        let mut amps = vec![c64(1.0, 0.0)];
        for f in &product {
            amps = amps.iter().flat_map(|a| f.iter().map(move |b| a * b)).collect();
        }
        Self { wires: names, dims, amps }
    }

    pub fn norm(&self) -> f64 {
        norm(&self.amps)
    }

    fn wire(&self, name: &str) -> usize {
        self.wires.iter().position(|w| *w == name).expect("known wire")
    }

    fn digits(&self, mut idx: usize) -> Vec<usize> {
        let mut d = vec![0; self.dims.len()];
        for k in (0..self.dims.len()).rev() {
            d[k] = idx % self.dims[k];
            idx /= self.dims[k];
        }
        d
    }

    fn index(&self, d: &[usize]) -> usize {
        d.iter().zip(&self.dims).fold(0, |acc, (x, n)| acc * n + x)
    }

    /// Amplitude of the basis state given per wire.
    pub fn amplitude(&self, digits: &[(&str, usize)]) -> C64 {
        let mut d = vec![0; self.dims.len()];
        for &(w, x) in digits {
            d[self.wire(w)] = x;
        }
        self.amps[self.index(&d)]
    }

    /// Applies `m` to the listed wires; rows and columns enumerate their
    /// joint digits with the first listed wire most significant.
    fn apply(&mut self, targets: &[&str], m: &Matrix) {
        let pos: Vec<usize> = targets.iter().map(|t| self.wire(t)).collect();
        let tdims: Vec<usize> = pos.iter().map(|&p| self.dims[p]).collect();
        let mut out = vec![c64(0.0, 0.0); self.amps.len()];
        for (idx, &a) in self.amps.iter().enumerate() {
            if a == c64(0.0, 0.0) {
                continue;
            }
            let mut d = self.digits(idx);
            let col = pos.iter().zip(&tdims).fold(0, |acc, (&p, n)| acc * n + d[p]);
            for row in 0..m.rows() {
                let f = m[(row, col)];
                if f == c64(0.0, 0.0) {
                    continue;
                }
                let mut r = row;
                for k in (0..pos.len()).rev() {
                    d[pos[k]] = r % tdims[k];
                    r /= tdims[k];
                }
                out[self.index(&d)] += f * a;
            }
        }
        self.amps = out;
    }

    /// Exchanges the contents of two wires, optionally only where `control` is `|1⟩`.
    fn swap(&mut self, a: &str, b: &str, control: Option<&str>) {
        let (pa, pb) = (self.wire(a), self.wire(b));
        let pc = control.map(|c| self.wire(c));
        let mut out = vec![c64(0.0, 0.0); self.amps.len()];
        for (idx, &amp) in self.amps.iter().enumerate() {
            let mut d = self.digits(idx);
            if pc.is_none_or(|c| d[c] == 1) {
                d.swap(pa, pb);
            }
            out[self.index(&d)] += amp;
        }
        self.amps = out;
    }
}

/// Vacuum-fixing lift of a qubit gate, written out entry by entry.
fn lifted(u: &Matrix) -> Matrix {
    Matrix::from_fn(3, 3, |i, j| match (i, j) {
        (2, 2) => c64(1.0, 0.0),
        (i, j) if i < 2 && j < 2 => u[(i, j)],
        _ => c64(0.0, 0.0),
    })
}

/// Balanced beam splitter on two qutrit wires (9×9, `(alice, bob)` digits).
fn splitter() -> Matrix {
    let h = core::f64::consts::FRAC_1_SQRT_2;
    let mut m = Matrix::zeros(9, 9);
    let at = |a: usize, b: usize| a * 3 + b;
    for p in 0..2 {
        // Particle arriving on Alice's side.
        m[(at(p, VAC), at(p, VAC))] = c64(h, 0.0);
        m[(at(VAC, p), at(p, VAC))] = c64(h, 0.0);
        // Particle arriving on Bob's side.
        m[(at(p, VAC), at(VAC, p))] = c64(h, 0.0);
        m[(at(VAC, p), at(VAC, p))] = c64(-h, 0.0);
    }
    m[(at(VAC, VAC), at(VAC, VAC))] = c64(1.0, 0.0);
    m
}

/// A register snapshot after a named stage.
#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub stage: &'static str,
    pub state: OracleState,
}

fn qutrit_of(psi: &[C64; 2]) -> Vec<C64> {
    vec![psi[0], psi[1], c64(0.0, 0.0)]
}

fn vacuum() -> Vec<C64> {
    vec![c64(0.0, 0.0), c64(0.0, 0.0), c64(1.0, 0.0)]
}

/// Householder reflection times a phase, taking the gravity–particle state
/// `(|0⟩UV|Ψ⟩ + |1⟩VU|Ψ⟩)/√2` to `|Γ⟩ ⊗ (αUV + βVU)|Ψ⟩/‖·‖` on `(G, B)`.
///
/// Only its action on that one input reaches the readout, so it may differ
/// from the rotation used by the process-vector model elsewhere.
fn recombiner(cfg: &ScenarioConfig) -> Result<Matrix, ScenarioError> {
    let uv = (&cfg.u * &cfg.v).mul_vec(&cfg.psi);
    let vu = (&cfg.v * &cfg.u).mul_vec(&cfg.psi);
    let (alpha, beta) = cfg.alpha_beta();
    let t: Vec<C64> = uv.iter().zip(&vu).map(|(a, b)| alpha * a + beta * b).collect();
    let n = norm(&t);
    if !(n > crate::TAU_DEG) {
        return Err(ScenarioError::DegenerateTarget { norm: n });
    }
    let h = core::f64::consts::FRAC_1_SQRT_2;
    let zero = c64(0.0, 0.0);
    let x: Vec<C64> = [uv, vu].iter().flat_map(|b| [b[0] * h, b[1] * h, zero]).collect();
    let gamma = cfg.gamma();
    let y: Vec<C64> = gamma.iter().flat_map(|g| [g * t[0] / n, g * t[1] / n, zero]).collect();
    // Reflect x onto the copy of y whose overlap with x is real, then remove that phase.
    let overlap = inner(&y, &x);
    let phase = if overlap.norm() > 0.0 { overlap / overlap.norm() } else { c64(1.0, 0.0) };
    let w: Vec<C64> = x.iter().zip(&y).map(|(a, b)| a - phase * b).collect();
    let ww = inner(&w, &w).re;
    let reflect = Matrix::from_fn(6, 6, |i, j| {
        let id = if i == j { c64(1.0, 0.0) } else { zero };
        if ww > 0.0 {
            id - w[i] * w[j].conj() * (2.0 / ww)
        } else {
            id
        }
    });
    Ok(reflect.scale(phase.conj()))
}

/// Runs `cfg` stage by stage, recording the register after each stage.
pub fn step_trace(cfg: &ScenarioConfig) -> Result<Vec<Snapshot>, ScenarioError> {
    cfg.validate()?;
    let (u, v) = (lifted(&cfg.u), lifted(&cfg.v));
    let bs = splitter();
    let mut trace = Vec::new();
    let mut snap = |stage, s: &OracleState| trace.push(Snapshot { stage, state: s.clone() });
    match cfg.kind {
        ScenarioKind::FourEvent => {
            let mut s = OracleState::new(vec![("A", 3), ("B", 3)], vec![qutrit_of(&cfg.psi), vacuum()]);
            snap("prepare", &s);
            s.apply(&["A", "B"], &bs);
            snap("initial splitter", &s);
            s.apply(&["A"], &u);
            s.apply(&["B"], &v);
            snap("first gates", &s);
            s.swap("A", "B", None);
            snap("exchange", &s);
            s.apply(&["A"], &u);
            s.apply(&["B"], &v);
            snap("second gates", &s);
            s.apply(&["A", "B"], &bs);
            snap("final splitter", &s);
        }
        ScenarioKind::ThreeEvent => {
            // Bob's single location hosts both of his gates; `B2` carries
            // the particle that reaches him second.
            let mut s = OracleState::new(
                vec![("A", 3), ("B1", 3), ("B2", 3)],
                vec![qutrit_of(&cfg.psi), vacuum(), vacuum()],
            );
            snap("prepare", &s);
            s.apply(&["A", "B1"], &bs);
            snap("initial splitter", &s);
            s.apply(&["A"], &u);
            snap("alice first", &s);
            s.swap("A", "B2", None);
            snap("route to bob", &s);
            s.apply(&["B1"], &v);
            s.apply(&["B2"], &v);
            snap("bob", &s);
            s.swap("B1", "A", None);
            snap("route to alice", &s);
            s.apply(&["A"], &u);
            snap("alice second", &s);
            s.apply(&["A", "B2"], &bs);
            snap("final splitter", &s);
        }
        ScenarioKind::TwoEventNorec | ScenarioKind::TwoEventRec => {
            let h = c64(core::f64::consts::FRAC_1_SQRT_2, 0.0);
            let mut s = OracleState::new(
                vec![("G", 2), ("A", 3), ("B", 3)],
                vec![vec![h, h], qutrit_of(&cfg.psi), vacuum()],
            );
            snap("prepare", &s);
            s.swap("A", "B", Some("G"));
            snap("gravity routes particle", &s);
            s.apply(&["A"], &u);
            s.apply(&["B"], &v);
            snap("first gates", &s);
            s.swap("A", "B", None);
            snap("exchange", &s);
            s.apply(&["A"], &u);
            s.apply(&["B"], &v);
            snap("second gates", &s);
            s.swap("A", "B", Some("G"));
            snap("merge onto bob", &s);
            if cfg.kind == ScenarioKind::TwoEventRec {
                s.apply(&["G"], &Matrix::pauli_x());
                s.apply(&["G", "B"], &recombiner(cfg)?);
                snap("recombine", &s);
            }
            s.apply(&["G"], &Matrix::hadamard());
            snap("gravity readout basis", &s);
        }
    }
    Ok(trace)
}

/// Outcome table computed from the final register.
pub fn simulate(cfg: &ScenarioConfig) -> Result<ProbabilityTable, ScenarioError> {
    let trace = step_trace(cfg)?;
    let s = &trace.last().expect("non-empty trace").state;
    let idx = |o: Outcome| match o {
        Outcome::Zero | Outcome::Plus => 0,
        Outcome::One | Outcome::Minus => 1,
        Outcome::Vacuum => VAC,
    };
    let entries = outcome_pairs(cfg.kind)
        .into_iter()
        .map(|(a, b)| {
            // Wires not read out must be empty; summing over them keeps any leak visible.
            let p: f64 = match cfg.kind {
                ScenarioKind::FourEvent => s.amplitude(&[("A", idx(a)), ("B", idx(b))]).norm_sqr(),
                ScenarioKind::ThreeEvent => {
                    (0..3).map(|k| s.amplitude(&[("A", idx(a)), ("B1", k), ("B2", idx(b))]).norm_sqr()).sum()
                }
                _ => (0..3).map(|k| s.amplitude(&[("G", idx(a)), ("A", k), ("B", idx(b))]).norm_sqr()).sum(),
            };
            (a, b, p)
        })
        .collect();
    ProbabilityTable::from_entries(entries)
}
