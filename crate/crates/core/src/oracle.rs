//! Brute-force ground truth on small graphs: every perfect matching,
//! enumerated explicitly.

use std::collections::{BTreeMap, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::arith::{ArithError, Backend, Rational};
use crate::diamond::{all_edges, aztec_vertices, edge_vertices, CellGrid, CellWeights, EdgeRef, Vertex};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::probs::{prob_sweep_any, AnyProbs};
use crate::reduce::{build_trace, AnyTrace};

/// Largest graph the enumerator accepts.
pub const MAX_ORACLE_VERTICES: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct SmallEdge {
    pub u: usize,
    pub v: usize,
    pub weight: Rational,
}

/// A simple undirected graph on vertices `0..n` with rational edge weights.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SmallGraph {
    edges: Vec<SmallEdge>,
    adjacency: Vec<Vec<(usize, usize)>>,
}

impl SmallGraph {
    pub fn new(vertex_count: usize) -> Self {
        SmallGraph { edges: Vec::new(), adjacency: vec![Vec::new(); vertex_count] }
    }

    pub fn vertex_count(&self) -> usize {
        self.adjacency.len()
    }

    /// Adds an edge and returns its index.
    pub fn add_edge(&mut self, u: usize, v: usize, weight: Rational) -> Result<usize> {
        let n = self.vertex_count();
        if u >= n || v >= n || u == v {
            return Err(Error::InvalidInput(format!("bad edge {u}-{v} in a graph of {n} vertices")));
        }
        if weight.is_negative() {
            return Err(Error::InvalidInput(format!("negative weight {weight} on edge {u}-{v}")));
        }
        if self.find_edge(u, v).is_some() {
            return Err(Error::InvalidInput(format!("duplicate edge {u}-{v}")));
        }
        let idx = self.edges.len();
        self.edges.push(SmallEdge { u, v, weight });
        for (a, b) in [(u, v), (v, u)] {
            let adj = &mut self.adjacency[a];
            let at = adj.partition_point(|&(w, _)| w < b);
            adj.insert(at, (b, idx));
        }
        Ok(idx)
    }

    pub fn edges(&self) -> &[SmallEdge] {
        &self.edges
    }

    pub fn find_edge(&self, u: usize, v: usize) -> Option<usize> {
        self.adjacency.get(u)?.iter().find(|&&(w, _)| w == v).map(|&(_, e)| e)
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.adjacency[v].iter().map(|&(w, _)| w)
    }

    /// The graph with the given vertices and their edges removed; remaining
    /// vertices are renumbered in order.
    pub fn without_vertices(&self, removed: &[usize]) -> SmallGraph {
        let mut index = vec![None; self.vertex_count()];
        let mut next = 0;
        for (v, slot) in index.iter_mut().enumerate() {
            if !removed.contains(&v) {
                *slot = Some(next);
                next += 1;
            }
        }
        let mut g = SmallGraph::new(next);
        for e in &self.edges {
            if let (Some(u), Some(v)) = (index[e.u], index[e.v]) {
                g.add_edge(u, v, e.weight.clone()).expect("subgraph of a simple graph");
            }
        }
        g
    }
}

/// One perfect matching: edge indices in the order chosen, and the product
/// of their weights.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleMatching {
    pub edges: Vec<usize>,
    pub weight: Rational,
}

fn check_size(g: &SmallGraph) -> Result<()> {
    if g.vertex_count() > MAX_ORACLE_VERTICES {
        return Err(Error::TooLarge { vertices: g.vertex_count(), limit: MAX_ORACLE_VERTICES });
    }
    Ok(())
}

fn recurse(
    g: &SmallGraph,
    covered: &mut [bool],
    chosen: &mut Vec<usize>,
    weight: &Rational,
    visit: &mut dyn FnMut(&[usize], &Rational),
) {
    let Some(v) = covered.iter().position(|&c| !c) else {
        visit(chosen, weight);
        return;
    };
    covered[v] = true;
    for &(u, e) in &g.adjacency[v] {
        if covered[u] {
            continue;
        }
        covered[u] = true;
        chosen.push(e);
        recurse(g, covered, chosen, &(weight * &g.edges[e].weight), visit);
        chosen.pop();
        covered[u] = false;
    }
    covered[v] = false;
}

/// Calls `visit` on every perfect matching, including those of weight zero,
/// in a fixed order: the lowest uncovered vertex is matched first, to its
/// neighbors in increasing order.
pub fn for_each_matching(g: &SmallGraph, mut visit: impl FnMut(&[usize], &Rational)) -> Result<()> {
    check_size(g)?;
    let mut covered = vec![false; g.vertex_count()];
    recurse(g, &mut covered, &mut Vec::new(), &Rational::one(), &mut visit);
    Ok(())
}

pub fn enumerate_matchings(g: &SmallGraph) -> Result<Vec<OracleMatching>> {
    let mut out = Vec::new();
    for_each_matching(g, |edges, w| out.push(OracleMatching { edges: edges.to_vec(), weight: w.clone() }))?;
    Ok(out)
}

/// Sum of the weights of all perfect matchings.
pub fn oracle_count(g: &SmallGraph) -> Result<Rational> {
    let mut total = Rational::zero();
    for_each_matching(g, |_, w| total = &total + w)?;
    Ok(total)
}

/// Inclusion probability of every edge, by edge index.
pub fn oracle_edge_probs(g: &SmallGraph) -> Result<Vec<Rational>> {
    let mut total = Rational::zero();
    let mut mass = vec![Rational::zero(); g.edges.len()];
    for_each_matching(g, |edges, w| {
        total = &total + w;
        for &e in edges {
            mass[e] = &mass[e] + w;
        }
    })?;
    if total.is_zero() {
        return Err(Error::NoMatching);
    }
    Ok(mass.iter().map(|m| m / &total).collect())
}

/// Distribution of which of the four `ports` are matched to one another.
/// Keys are bitmasks with bit `i` set when `ports[i]` is matched to another
/// port.
pub fn oracle_pattern_freq(g: &SmallGraph, ports: [usize; 4]) -> Result<BTreeMap<u8, Rational>> {
    let mut total = Rational::zero();
    let mut freq: BTreeMap<u8, Rational> = BTreeMap::new();
    for_each_matching(g, |edges, w| {
        total = &total + w;
        let mut mask = 0u8;
        for &e in edges {
            let SmallEdge { u, v, .. } = g.edges[e];
            if let (Some(a), Some(b)) = (ports.iter().position(|&p| p == u), ports.iter().position(|&p| p == v)) {
                mask |= 1 << a | 1 << b;
            }
        }
        let slot = freq.entry(mask).or_insert_with(Rational::zero);
        *slot = &*slot + w;
    })?;
    if total.is_zero() {
        return Err(Error::NoMatching);
    }
    Ok(freq.into_iter().map(|(k, m)| (k, &m / &total)).collect())
}

/// Compares `M(G) M(G-ABCD)` with `M(G-AB) M(G-CD) + M(G-AC) M(G-BD)` for a
/// face whose boundary runs `A, B, D, C`.
pub fn check_condensation(g: &SmallGraph, face: [usize; 4]) -> Result<bool> {
    let [a, b, c, d] = face;
    let m = |removed: &[usize]| oracle_count(&g.without_vertices(removed));
    let lhs = m(&[])? * m(&[a, b, c, d])?;
    let rhs = m(&[a, b])? * m(&[c, d])? + m(&[a, c])? * m(&[b, d])?;
    Ok(lhs == rhs)
}

/// An Aztec diamond as a [`SmallGraph`], with the lattice position of each
/// vertex and the diamond edge behind each graph edge.
#[derive(Debug, Clone)]
pub struct AztecGraph {
    pub graph: SmallGraph,
    pub vertices: Vec<Vertex>,
    pub edges: Vec<EdgeRef>,
}

impl AztecGraph {
    pub fn new(grid: &CellGrid<Rational>) -> Self {
        let n = grid.order();
        let vertices = aztec_vertices(n);
        let index: HashMap<Vertex, usize> = vertices.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let mut graph = SmallGraph::new(vertices.len());
        let mut edges = Vec::new();
        for e in all_edges(n) {
            let (p, q) = edge_vertices(n, e).expect("edge of the diamond");
            graph.add_edge(index[&p], index[&q], grid.weight(e).clone()).expect("diamond is simple");
            edges.push(e);
        }
        AztecGraph { graph, vertices, edges }
    }

    pub fn vertex(&self, v: Vertex) -> Option<usize> {
        self.vertices.binary_search(&v).ok()
    }

    /// Inclusion probability of each diamond edge.
    pub fn edge_probs(&self) -> Result<BTreeMap<EdgeRef, Rational>> {
        Ok(self.edges.iter().copied().zip(oracle_edge_probs(&self.graph)?).collect())
    }
}

/// Random rational weighting of an order-`n` diamond: weights `a/b` with
/// `1 <= a <= 5`, `1 <= b <= 3`, each zero with probability `zero_fraction`.
pub fn random_weighting(rng: &mut impl Rng, n: usize, zero_fraction: f64) -> CellGrid<Rational> {
    CellGrid::from_fn(n, |_, _| {
        CellWeights::from_fn(|_| {
            if rng.gen_bool(zero_fraction) {
                Rational::zero()
            } else {
                Rational::ratio(rng.gen_range(1..=5), rng.gen_range(1..=3))
            }
        })
    })
}

/// Compares the reduction count and edge probabilities of `grid` with brute
/// force; returns a description of the first disagreement.
pub fn compare_with_oracle(grid: &CellGrid<Rational>, exec: Exec) -> Result<Option<String>> {
    let oracle = AztecGraph::new(grid);
    let expected = oracle_count(&oracle.graph)?;
    let trace = build_trace(grid, Backend::ExactRational, exec)?;
    let count = trace.with_refinement(exec, AnyTrace::exact_count);
    match (&count, expected.is_zero()) {
        (Err(Error::Arith(ArithError::PoleAtZero)), true) => return Ok(None),
        (Ok(c), false) if *c == expected => {}
        _ => return Ok(Some(format!("count {count:?}, brute force {expected}"))),
    }
    let probs = match prob_sweep_any(&trace, exec)? {
        AnyProbs::Exact(p) => p,
        AnyProbs::Float(_) => unreachable!("exact backends only"),
    };
    for (e, want) in oracle.edge_probs()? {
        let got = probs.get(e.r, e.c, e.slot);
        if *got != want {
            return Ok(Some(format!("edge ({},{},{}): {got}, brute force {want}", e.r, e.c, e.slot)));
        }
    }
    Ok(None)
}

/// Outcome of [`equivalence_suite`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub seed: u64,
    pub cases: usize,
    pub passed: usize,
    pub failures: Vec<String>,
}

/// `cases` random weightings of orders 1 to `max_order`, every other one
/// with a quarter of its weights zero, each compared with brute force.
pub fn equivalence_suite(seed: u64, cases: usize, max_order: usize, exec: Exec) -> Result<CheckReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = CheckReport { seed, cases, passed: 0, failures: Vec::new() };
    for case in 0..cases {
        let n = rng.gen_range(1..=max_order.max(1));
        let zeros = if case % 2 == 0 { 0.25 } else { 0.0 };
        let grid = random_weighting(&mut rng, n, zeros);
        match compare_with_oracle(&grid, exec)? {
            None => report.passed += 1,
            Some(msg) => report.failures.push(format!("case {case} (order {n}): {msg}")),
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diamond::CellSlot;

    fn r(n: i64, d: i64) -> Rational {
        Rational::ratio(n, d)
    }

    fn four_cycle(w: Rational, x: Rational, y: Rational, z: Rational) -> SmallGraph {
        // Vertices A, B, C, D with face A-B-D-C.
        let mut g = SmallGraph::new(4);
        g.add_edge(0, 1, w).unwrap();
        g.add_edge(0, 2, x).unwrap();
        g.add_edge(1, 3, y).unwrap();
        g.add_edge(2, 3, z).unwrap();
        g
    }

    #[test]
    fn small_suite_passes() {
        let report = equivalence_suite(11, 12, 3, Exec::Sequential).unwrap();
        assert_eq!(report.passed, 12, "{:?}", report.failures);
    }

    #[test]
    fn lone_cycle() {
        let g = four_cycle(r(2, 1), r(3, 1), r(5, 1), r(7, 1));
        let all = enumerate_matchings(&g).unwrap();
        let weights: Vec<Rational> = all.iter().map(|m| m.weight.clone()).collect();
        assert_eq!(weights, vec![r(14, 1), r(15, 1)]);
        assert_eq!(oracle_edge_probs(&g).unwrap()[0], r(14, 29));
        assert!(check_condensation(&g, [0, 1, 2, 3]).unwrap());
    }

    #[test]
    fn unweighted_diamonds() {
        for n in 1..=4 {
            let a = AztecGraph::new(&CellGrid::uniform(n, r(1, 1)));
            let all = enumerate_matchings(&a.graph).unwrap();
            assert_eq!(all.len(), 1 << (n * (n + 1) / 2));
            assert!(all.iter().all(|m| m.weight.is_one()));
        }
    }

    #[test]
    fn four_by_four_grid() {
        let mut g = SmallGraph::new(16);
        for i in 0..4 {
            for j in 0..4 {
                let v = 4 * i + j;
                if j < 3 {
                    g.add_edge(v, v + 1, r(1, 1)).unwrap();
                }
                if i < 3 {
                    g.add_edge(v, v + 4, r(1, 1)).unwrap();
                }
            }
        }
        assert_eq!(oracle_count(&g).unwrap(), r(36, 1));
    }

    #[test]
    fn zero_weights_are_enumerated() {
        let g = four_cycle(r(0, 1), r(1, 1), r(1, 1), r(0, 1));
        assert_eq!(enumerate_matchings(&g).unwrap().len(), 2);
        assert_eq!(oracle_count(&g).unwrap(), r(1, 1));
        let dead = four_cycle(r(0, 1), r(0, 1), r(1, 1), r(1, 1));
        assert_eq!(oracle_edge_probs(&dead), Err(Error::NoMatching));
    }

    #[test]
    fn size_bound() {
        let g = SmallGraph::new(MAX_ORACLE_VERTICES + 2);
        assert!(matches!(oracle_count(&g), Err(Error::TooLarge { .. })));
        let odd = SmallGraph::new(3);
        assert!(oracle_count(&odd).unwrap().is_zero());
    }

    #[test]
    fn rejects_bad_edges() {
        let mut g = SmallGraph::new(3);
        assert!(g.add_edge(0, 0, r(1, 1)).is_err());
        assert!(g.add_edge(0, 5, r(1, 1)).is_err());
        g.add_edge(0, 1, r(1, 1)).unwrap();
        assert!(g.add_edge(1, 0, r(1, 1)).is_err());
        assert!(g.add_edge(1, 2, r(-1, 1)).is_err());
    }

    #[test]
    fn pattern_frequencies_of_lone_cycle() {
        let g = four_cycle(r(1, 1), r(1, 1), r(1, 1), r(1, 1));
        let f = oracle_pattern_freq(&g, [0, 1, 2, 3]).unwrap();
        assert_eq!(f.into_iter().collect::<Vec<_>>(), vec![(0b1111, r(1, 1))]);
    }

    #[test]
    fn aztec_lookup() {
        let a = AztecGraph::new(&CellGrid::from_fn(2, |r_, c| {
            CellWeights::new(r(r_ as i64, 1), r(c as i64, 1), r(1, 1), r(1, 1))
        }));
        assert_eq!(a.graph.vertex_count(), 12);
        assert_eq!(a.graph.edges().len(), 16);
        let e = EdgeRef::new(2, 1, CellSlot::NW);
        let (p, q) = edge_vertices(2, e).unwrap();
        let idx = a.graph.find_edge(a.vertex(p).unwrap(), a.vertex(q).unwrap()).unwrap();
        assert_eq!(a.edges[idx], e);
        assert_eq!(a.graph.edges()[idx].weight, r(2, 1));
    }
}
