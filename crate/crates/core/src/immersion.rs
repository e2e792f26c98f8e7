//! Immersing a circuit DAG into flat Minkowski spacetime.
//!
//! The graph is peeled into layers of minimal nodes. Layer `k` is placed on
//! the hyperplane `t = t_k`, spread along the x-axis, and each hyperplane is
//! pushed far enough into the future that every point of the next layer lies
//! strictly inside the light cone of every point of the current one. The
//! light-cone order then contains the circuit order.

use alloc::collections::VecDeque;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use num_traits::Float;
use rand::Rng;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ImmersionError {
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("node `{0}` listed twice")]
    DuplicateNode(String),
    #[error("graph has a directed cycle through {}", .0.join(", "))]
    CyclicGraph(Vec<String>),
    #[error("event map has no point for node `{0}`")]
    IncompleteMap(String),
}

/// Orders node ids so that embedded numbers compare numerically (`n2 < n10`).
pub fn natural_cmp(a: &str, b: &str) -> Ordering {
    let (mut x, mut y) = (a.as_bytes(), b.as_bytes());
    loop {
        match (x.first(), y.first()) {
            (None, None) => return a.cmp(b),
            (None, _) => return Ordering::Less,
            (_, None) => return Ordering::Greater,
            (Some(p), Some(q)) if p.is_ascii_digit() && q.is_ascii_digit() => {
                let lx = x.iter().take_while(|c| c.is_ascii_digit()).count();
                let ly = y.iter().take_while(|c| c.is_ascii_digit()).count();
                let (nx, ny) = (trim_zeros(&x[..lx]), trim_zeros(&y[..ly]));
                let ord = nx.len().cmp(&ny.len()).then_with(|| nx.cmp(ny));
                if ord != Ordering::Equal {
                    return ord;
                }
                x = &x[lx..];
                y = &y[ly..];
            }
            (Some(p), Some(q)) => {
                if p != q {
                    return p.cmp(q);
                }
                x = &x[1..];
                y = &y[1..];
            }
        }
    }
}

fn trim_zeros(d: &[u8]) -> &[u8] {
    let k = d.iter().take_while(|&&c| c == b'0').count();
    &d[k.min(d.len().saturating_sub(1))..]
}

/// Directed graph of gates. Construction accepts cycles so that they can be
/// reported; every order-dependent operation rejects them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CausalGraph {
    nodes: Vec<String>,
    edges: Vec<(usize, usize)>,
    succ: Vec<Vec<usize>>,
}

impl CausalGraph {
    pub fn new<S: AsRef<str>>(nodes: &[S], edges: &[(S, S)]) -> Result<Self, ImmersionError> {
        let mut names: Vec<String> = nodes.iter().map(|s| s.as_ref().to_string()).collect();
        names.sort_by(|a, b| natural_cmp(a, b));
        if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
            return Err(ImmersionError::DuplicateNode(w[0].clone()));
        }
        let mut g = Self { succ: vec![Vec::new(); names.len()], nodes: names, edges: Vec::new() };
        for (u, v) in edges {
            let (a, b) = (g.index(u.as_ref())?, g.index(v.as_ref())?);
            if !g.edges.contains(&(a, b)) {
                g.edges.push((a, b));
                g.succ[a].push(b);
            }
        }
        Ok(g)
    }

    /// Nodes in natural id order.
    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn edges(&self) -> impl Iterator<Item = (&str, &str)> {
        self.edges.iter().map(|&(a, b)| (self.nodes[a].as_str(), self.nodes[b].as_str()))
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn index(&self, name: &str) -> Result<usize, ImmersionError> {
        self.nodes
            .binary_search_by(|n| natural_cmp(n, name))
            .map_err(|_| ImmersionError::UnknownNode(name.to_string()))
    }

    fn reachable_from(&self, start: usize) -> Vec<bool> {
        let mut seen = vec![false; self.nodes.len()];
        let mut queue: VecDeque<usize> = self.succ[start].iter().copied().collect();
        while let Some(n) = queue.pop_front() {
            if !seen[n] {
                seen[n] = true;
                queue.extend(self.succ[n].iter().copied());
            }
        }
        seen
    }

    /// `reach[u][v]`: a directed path of length ≥ 1 leads from `u` to `v`.
    pub fn reachability(&self) -> Vec<Vec<bool>> {
        (0..self.nodes.len()).map(|u| self.reachable_from(u)).collect()
    }

    /// The circuit order `u ≺ v`: a directed path from `u` to `v` exists.
    pub fn precedes(&self, u: &str, v: &str) -> Result<bool, ImmersionError> {
        let (a, b) = (self.index(u)?, self.index(v)?);
        Ok(self.reachable_from(a)[b])
    }

    /// Minimal-node layers `M_1, …, M_m`, each in natural id order.
    pub fn layer_partition(&self) -> Result<Vec<Vec<String>>, ImmersionError> {
        let n = self.nodes.len();
        let mut indeg = vec![0usize; n];
        for &(_, b) in &self.edges {
            indeg[b] += 1;
        }
        let mut removed = vec![false; n];
        let mut left = n;
        let mut layers = Vec::new();
        while left > 0 {
            let layer: Vec<usize> = (0..n).filter(|&i| !removed[i] && indeg[i] == 0).collect();
            if layer.is_empty() {
                let residual = (0..n).filter(|&i| !removed[i]).map(|i| self.nodes[i].clone()).collect();
                return Err(ImmersionError::CyclicGraph(residual));
            }
            for &i in &layer {
                removed[i] = true;
                for &j in &self.succ[i] {
                    indeg[j] -= 1;
                }
            }
            left -= layer.len();
            layers.push(layer.into_iter().map(|i| self.nodes[i].clone()).collect());
        }
        Ok(layers)
    }

    /// Identifies each group of nodes into one node named after its first
    /// member. The result keeps every edge between different classes and
    /// turns edges inside a class into self-loops.
    pub fn quotient(&self, classes: &[&[&str]]) -> Result<Self, ImmersionError> {
        let mut rep: Vec<String> = self.nodes.clone();
        for class in classes {
            let Some(first) = class.first() else { continue };
            self.index(first)?;
            for member in *class {
                rep[self.index(member)?] = first.to_string();
            }
        }
        let mut nodes: Vec<String> = rep.clone();
        nodes.sort_by(|a, b| natural_cmp(a, b));
        nodes.dedup();
        let edges: Vec<(String, String)> = self.edges.iter().map(|&(a, b)| (rep[a].clone(), rep[b].clone())).collect();
        Self::new(&nodes, &edges)
    }

    /// Checks acyclicity (self-loops count as cycles).
    pub fn check_acyclic(&self) -> Result<(), ImmersionError> {
        self.layer_partition().map(|_| ())
    }
}

/// The four-event switch circuit. Alice and Bob each act twice between the
/// two splitters.
pub fn switch_circuit_4event() -> CausalGraph {
    let nodes = ["P_A", "P_B", "S^i", "A", "B", "A'", "B'", "S^f", "T_A", "T_B"];
    let edges = [
        ("P_A", "S^i"),
        ("P_B", "S^i"),
        ("S^i", "A"),
        ("S^i", "B"),
        ("A", "B'"),
        ("B", "A'"),
        ("A'", "S^f"),
        ("B'", "S^f"),
        ("S^f", "T_A"),
        ("S^f", "T_B"),
    ];
    CausalGraph::new(&nodes, &edges).expect("well-formed circuit")
}

/// Random DAG on nodes `0..n` with each forward edge `i → j` (`i < j`)
/// present with probability `p`.
pub fn random_dag<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> CausalGraph {
    let names: Vec<String> = (0..n).map(|i| i.to_string()).collect();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random::<f64>() < p {
                edges.push((names[i].clone(), names[j].clone()));
            }
        }
    }
    CausalGraph::new(&names, &edges).expect("fresh node names")
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpacetimePoint {
    pub t: f64,
    pub x: [f64; 3],
}

impl SpacetimePoint {
    pub fn spatial_distance(&self, other: &Self) -> f64 {
        let d: f64 = self.x.iter().zip(&other.x).map(|(a, b)| (a - b) * (a - b)).sum();
        Float::sqrt(d)
    }
}

/// `q` lies strictly inside the future light cone of `p` (`c = 1`).
pub fn lightcone_precedes(p: &SpacetimePoint, q: &SpacetimePoint) -> bool {
    q.t - p.t > p.spatial_distance(q)
}

/// Knobs of the layer placement.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlacementParams {
    /// Time of the first layer.
    pub t0: f64,
    /// Distance between neighbouring nodes of one layer.
    pub spacing: f64,
    /// Extra time added on top of the largest spatial gap between layers.
    pub margin: f64,
}

impl Default for PlacementParams {
    fn default() -> Self {
        Self { t0: 0.0, spacing: 1.0, margin: 1.0 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EventMap {
    pub layers: Vec<Vec<String>>,
    /// One point per node, in layer order.
    pub assignment: Vec<(String, SpacetimePoint)>,
}

impl EventMap {
    pub fn point(&self, node: &str) -> Option<&SpacetimePoint> {
        self.assignment.iter().find(|(n, _)| n == node).map(|(_, p)| p)
    }

    /// Number of distinct time slices used.
    pub fn time_slices(&self) -> usize {
        let mut ts: Vec<f64> = self.assignment.iter().map(|(_, p)| p.t).collect();
        ts.sort_by(f64::total_cmp);
        ts.dedup();
        ts.len()
    }
}

/// Places each layer on its own hyperplane so that the light-cone order
/// contains the circuit order.
pub fn immerse(g: &CausalGraph, params: PlacementParams) -> Result<EventMap, ImmersionError> {
    let layers = g.layer_partition()?;
    let mut assignment = Vec::with_capacity(g.len());
    let mut t = params.t0;
    let mut prev: Vec<SpacetimePoint> = Vec::new();
    for layer in &layers {
        let centre = (layer.len() as f64 - 1.0) / 2.0;
        let xs: Vec<f64> = (0..layer.len()).map(|j| (j as f64 - centre) * params.spacing).collect();
        if !prev.is_empty() {
            let gap = prev
                .iter()
                .flat_map(|p| xs.iter().map(move |x| (p.x[0] - x).abs()))
                .fold(0.0, f64::max);
            t += gap + params.margin;
        }
        prev = xs.iter().map(|&x| SpacetimePoint { t, x: [x, 0.0, 0.0] }).collect();
        assignment.extend(layer.iter().cloned().zip(prev.iter().copied()));
    }
    Ok(EventMap { layers, assignment })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ImmersionReport {
    /// Every circuit relation holds in the light-cone order.
    pub order_preserved: bool,
    /// Circuit relations missing from the light-cone order.
    pub violations: usize,
    /// Light-cone relations between nodes the circuit leaves unordered.
    pub extra_relations: usize,
    /// No violations and no extra relations.
    pub is_embedding: bool,
}

pub fn verify_immersion(g: &CausalGraph, em: &EventMap) -> Result<ImmersionReport, ImmersionError> {
    let pts: Vec<&SpacetimePoint> = g
        .nodes()
        .iter()
        .map(|n| em.point(n).ok_or_else(|| ImmersionError::IncompleteMap(n.clone())))
        .collect::<Result<_, _>>()?;
    let reach = g.reachability();
    let (mut violations, mut extra) = (0, 0);
    for (u, row) in reach.iter().enumerate() {
        for (v, &related) in row.iter().enumerate() {
            let cone = lightcone_precedes(pts[u], pts[v]);
            match (related, cone) {
                (true, false) => violations += 1,
                (false, true) => extra += 1,
                _ => {}
            }
        }
    }
    Ok(ImmersionReport {
        order_preserved: violations == 0,
        violations,
        extra_relations: extra,
        is_embedding: violations == 0 && extra == 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::{any, prop_assert, proptest};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn diamond() -> CausalGraph {
        CausalGraph::new(&["s", "a", "b", "t"], &[("s", "a"), ("s", "b"), ("a", "t"), ("b", "t")]).unwrap()
    }

    fn pt(t: f64, x: f64) -> SpacetimePoint {
        SpacetimePoint { t, x: [x, 0.0, 0.0] }
    }

    #[test]
    fn natural_order() {
        let mut v = ["n10", "n2", "n1", "a", "n02"];
        v.sort_by(|a, b| natural_cmp(a, b));
        assert_eq!(v, ["a", "n1", "n02", "n2", "n10"]);
    }

    #[test]
    fn precedence_basics() {
        let chain = CausalGraph::new(&["a", "b", "c"], &[("a", "b"), ("b", "c")]).unwrap();
        assert!(chain.precedes("a", "c").unwrap());
        assert!(!chain.precedes("a", "a").unwrap());
        assert!(!chain.precedes("c", "a").unwrap());
        let d = diamond();
        assert!(!d.precedes("a", "b").unwrap() && !d.precedes("b", "a").unwrap());
        assert_eq!(d.precedes("a", "zz"), Err(ImmersionError::UnknownNode("zz".into())));
        assert!(CausalGraph::new(&["a", "a"], &[]).is_err());
    }

    #[test]
    fn layers() {
        let edgeless = CausalGraph::new::<&str>(&["x", "y", "z"], &[]).unwrap();
        assert_eq!(edgeless.layer_partition().unwrap(), [["x", "y", "z"]]);
        assert_eq!(diamond().layer_partition().unwrap(), vec![vec!["s"], vec!["a", "b"], vec!["t"]]);
        let sw = switch_circuit_4event().layer_partition().unwrap();
        let expected: Vec<Vec<&str>> =
            vec![vec!["P_A", "P_B"], vec!["S^i"], vec!["A", "B"], vec!["A'", "B'"], vec!["S^f"], vec!["T_A", "T_B"]];
        assert_eq!(sw, expected);
    }

    #[test]
    fn cycles_are_rejected() {
        let c = CausalGraph::new(&["a", "b"], &[("a", "b"), ("b", "a")]).unwrap();
        assert!(matches!(c.layer_partition(), Err(ImmersionError::CyclicGraph(_))));
        assert!(matches!(immerse(&c, PlacementParams::default()), Err(ImmersionError::CyclicGraph(_))));
        let selfloop = CausalGraph::new(&["a"], &[("a", "a")]).unwrap();
        assert!(selfloop.check_acyclic().is_err());
    }

    #[test]
    fn identifying_both_pairs_creates_a_cycle() {
        let g = switch_circuit_4event();
        let q = g.quotient(&[&["A", "A'"], &["B", "B'"]]).unwrap();
        assert!(q.precedes("A", "B").unwrap() && q.precedes("B", "A").unwrap());
        assert!(matches!(q.check_acyclic(), Err(ImmersionError::CyclicGraph(_))));
        // Identifying only Bob's gates is consistent.
        let three = g.quotient(&[&["B", "B'"]]).unwrap();
        assert_eq!(three.len(), 9);
        three.check_acyclic().unwrap();
    }

    #[test]
    fn lightcone_examples() {
        assert!(lightcone_precedes(&pt(0.0, 0.0), &pt(2.0, 1.0)));
        assert!(!lightcone_precedes(&pt(0.0, 0.0), &pt(1.0, 2.0)));
        assert!(!lightcone_precedes(&pt(0.0, 0.0), &pt(1.0, 1.0)));
    }

    #[test]
    fn placements() {
        let single = CausalGraph::new::<&str>(&["n"], &[]).unwrap();
        assert_eq!(immerse(&single, PlacementParams::default()).unwrap().assignment, [("n".to_string(), pt(0.0, 0.0))]);
        let pair = CausalGraph::new::<&str>(&["a", "b"], &[]).unwrap();
        let em = immerse(&pair, PlacementParams::default()).unwrap();
        let (pa, pb) = (em.point("a").unwrap(), em.point("b").unwrap());
        assert_eq!(pa.t, pb.t);
        assert_ne!(pa.x, pb.x);
        assert!(!lightcone_precedes(pa, pb) && !lightcone_precedes(pb, pa));
        let chain = CausalGraph::new(&["a", "b", "c"], &[("a", "b"), ("b", "c")]).unwrap();
        let em = immerse(&chain, PlacementParams::default()).unwrap();
        let p: Vec<_> = ["a", "b", "c"].iter().map(|n| *em.point(n).unwrap()).collect();
        assert!(lightcone_precedes(&p[0], &p[1]) && lightcone_precedes(&p[1], &p[2]) && lightcone_precedes(&p[0], &p[2]));
    }

    #[test]
    fn diamond_and_switch_circuit_placements() {
        let d = diamond();
        let em = immerse(&d, PlacementParams::default()).unwrap();
        assert_eq!(em.time_slices(), 3);
        assert_eq!(*em.point("a").unwrap(), pt(1.5, -0.5));
        assert_eq!(*em.point("t").unwrap(), pt(3.0, 0.0));
        let r = verify_immersion(&d, &em).unwrap();
        assert!(r.order_preserved);
        // Every later-layer node of the diamond is already a graph successor.
        assert_eq!(r.extra_relations, 0);
        let sw = switch_circuit_4event();
        let em = immerse(&sw, PlacementParams::default()).unwrap();
        assert_eq!(em.time_slices(), 6);
        let r = verify_immersion(&sw, &em).unwrap();
        assert!(r.order_preserved && !r.is_embedding);
    }

    #[test]
    fn layering_adds_relations_between_unrelated_nodes() {
        let g = CausalGraph::new::<&str>(&["a", "b", "c"], &[("a", "b")]).unwrap();
        let r = verify_immersion(&g, &immerse(&g, PlacementParams::default()).unwrap()).unwrap();
        assert!(r.order_preserved);
        assert_eq!(r.extra_relations, 1);
        assert!(!r.is_embedding);
    }

    #[test]
    fn incomplete_maps_are_reported() {
        let d = diamond();
        let mut em = immerse(&d, PlacementParams::default()).unwrap();
        em.assignment.pop();
        assert_eq!(verify_immersion(&d, &em), Err(ImmersionError::IncompleteMap("t".into())));
    }

    fn floyd_warshall(g: &CausalGraph) -> Vec<Vec<bool>> {
        let n = g.len();
        let mut r = vec![vec![false; n]; n];
        let idx = |s: &str| g.nodes().iter().position(|x| x == s).unwrap();
        for (a, b) in g.edges() {
            r[idx(a)][idx(b)] = true;
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    r[i][j] = r[i][j] || (r[i][k] && r[k][j]);
                }
            }
        }
        r
    }

    #[test]
    fn random_dags_layers_and_immersion() {
        for seed in 0..50u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = rng.random_range(1..=200);
            let g = random_dag(n, 0.1, &mut rng);
            let layers = g.layer_partition().unwrap();
            let mut seen: Vec<&String> = layers.iter().flatten().collect();
            assert_eq!(seen.len(), n);
            seen.sort();
            seen.dedup();
            assert_eq!(seen.len(), n);
            let layer_of = |s: &str| layers.iter().position(|l| l.iter().any(|x| x == s)).unwrap();
            for (a, b) in g.edges() {
                assert!(layer_of(a) < layer_of(b));
            }
            let em = immerse(&g, PlacementParams::default()).unwrap();
            assert!(verify_immersion(&g, &em).unwrap().order_preserved);
            assert_eq!(em, immerse(&g, PlacementParams::default()).unwrap());
        }
    }

    #[test]
    fn precedes_matches_independent_closure() {
        for seed in 0..20u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
            let n = rng.random_range(1..=50);
            let g = random_dag(n, 0.1, &mut rng);
            assert_eq!(g.reachability(), floyd_warshall(&g));
        }
    }

    proptest! {
        #[test]
        fn lightcone_order_is_strict_partial_order(n in 1usize..30, p in 0.0f64..0.4, seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g = random_dag(n, p, &mut rng);
            let em = immerse(&g, PlacementParams::default()).unwrap();
            let pts: Vec<SpacetimePoint> = em.assignment.iter().map(|(_, q)| *q).collect();
            for a in &pts {
                prop_assert!(!lightcone_precedes(a, a));
                for b in &pts {
                    prop_assert!(!(lightcone_precedes(a, b) && lightcone_precedes(b, a)));
                    for c in &pts {
                        if lightcone_precedes(a, b) && lightcone_precedes(b, c) {
                            prop_assert!(lightcone_precedes(a, c));
                        }
                    }
                }
            }
        }
    }
}
