//! Regions whose tilings are matchings of weighted Aztec diamonds: square
//! grids, hexagons and fortresses, plus lifting Aztec matchings back.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::arith::{Probability, Rational};
use crate::diamond::{
    aztec_vertices, edge_between, edge_vertices, CellGrid, CellSlot, CellWeights, EdgeRef, Matching, Vertex,
};
use crate::error::{Error, Result};
use crate::oracle::SmallGraph;
use crate::reduce::count_matchings;
use crate::shuffle::RandomSource;

pub type Point = (f64, f64);

/// Which region to build.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RegionSpec {
    /// The whole order-`n` diamond with unit weights.
    Aztec { n: usize },
    /// The `m x m` square grid, `m` even.
    Grid { m: usize },
    /// The honeycomb dual to the `a, b, c, a, b, c` hexagon.
    Hexagon { a: usize, b: usize, c: usize },
    /// The order-`n` fortress; `t` weights the renewed cells, `phase`
    /// picks the triangle coloring.
    Fortress { n: usize, t: Rational, phase: u8 },
}

impl RegionSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidInput(msg));
        match self {
            RegionSpec::Aztec { .. } => Ok(()),
            RegionSpec::Grid { m } if *m < 2 || m % 2 == 1 => bad(format!("grid side {m} must be even and at least 2")),
            RegionSpec::Hexagon { a, b, c } if *a == 0 || *b == 0 || *c == 0 => {
                bad(format!("hexagon sides {a},{b},{c} must be positive"))
            }
            RegionSpec::Fortress { n, .. } if *n < 2 => bad(format!("fortress order {n} must be at least 2")),
            RegionSpec::Fortress { t, .. } if t.is_zero() || t.is_negative() => {
                bad(format!("fortress weight {t} must be positive"))
            }
            RegionSpec::Fortress { phase, .. } if *phase > 1 => bad(format!("fortress phase {phase} must be 0 or 1")),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for RegionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RegionSpec::Aztec { n } => write!(f, "aztec:{n}"),
            RegionSpec::Grid { m } => write!(f, "grid:{m}"),
            RegionSpec::Hexagon { a, b, c } => write!(f, "hex:{a},{b},{c}"),
            RegionSpec::Fortress { n, t, phase } => write!(f, "fortress:{n}:t={t}:phase={phase}"),
        }
    }
}

impl FromStr for RegionSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidInput(format!("unrecognized region {s:?}"));
        let int = |v: &str| v.trim().parse::<usize>().map_err(|_| bad());
        let mut parts = s.trim().split(':');
        let kind = parts.next().ok_or_else(bad)?.to_ascii_lowercase();
        let spec = match kind.as_str() {
            "aztec" => RegionSpec::Aztec { n: int(parts.next().ok_or_else(bad)?)? },
            "grid" => RegionSpec::Grid { m: int(parts.next().ok_or_else(bad)?)? },
            "hex" | "hexagon" => {
                let sides: Vec<usize> = parts.next().ok_or_else(bad)?.split(',').map(int).collect::<Result<_>>()?;
                let [a, b, c] = sides[..] else { return Err(bad()) };
                RegionSpec::Hexagon { a, b, c }
            }
            "fortress" => {
                let n = int(parts.next().ok_or_else(bad)?)?;
                let (mut t, mut phase) = (Rational::ratio(1, 2), 0u8);
                for opt in parts.by_ref() {
                    match opt.split_once('=') {
                        Some(("t", v)) => t = v.parse().map_err(|_| bad())?,
                        Some(("phase", v)) => phase = v.parse().map_err(|_| bad())?,
                        _ => return Err(bad()),
                    }
                }
                RegionSpec::Fortress { n, t, phase }
            }
            _ => return Err(bad()),
        };
        if parts.next().is_some() {
            return Err(bad());
        }
        spec.validate()?;
        Ok(spec)
    }
}

impl Serialize for RegionSpec {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for RegionSpec {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        String::deserialize(deserializer)?.parse().map_err(serde::de::Error::custom)
    }
}

/// How two adjacent tiles combine when matched.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TileKind {
    /// A domino or a lozenge.
    Plain,
    /// A square diabolo.
    Square,
    /// A triangular diabolo.
    Triangle,
}

/// The graph whose perfect matchings are the region's tilings, with a
/// polygon for each vertex's tile.
#[derive(Debug, Clone)]
pub struct RegionGraph {
    pub graph: SmallGraph,
    pub tiles: Vec<Vec<Point>>,
    pub kinds: Vec<TileKind>,
}

/// A tiling, as the sorted indices of matched region edges.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RegionTiling {
    pub edges: Vec<usize>,
}

impl RegionGraph {
    pub fn is_tiling(&self, t: &RegionTiling) -> bool {
        let mut seen = vec![0u8; self.graph.vertex_count()];
        for &e in &t.edges {
            let edge = &self.graph.edges()[e];
            seen[edge.u] += 1;
            seen[edge.v] += 1;
        }
        seen.iter().all(|&k| k == 1)
    }
}

#[derive(Debug, Clone)]
enum Lift {
    /// Aztec edges that are region edges, and the forced edges to drop.
    Direct {
        region_edge: HashMap<EdgeRef, usize>,
        forced: HashSet<EdgeRef>,
    },
    Cities(Vec<City>),
}

/// Lift data for one cell of a fortress embedding.
#[derive(Debug, Clone)]
enum City {
    /// An unrenewed city: diamond slot to region edge.
    Kept([usize; 4]),
    /// A renewed city: connector behind each corner (top, left, right,
    /// bottom; `None` for a pendant), inner edge behind each slot, and the
    /// inner weights.
    Renewed { connectors: [Option<usize>; 4], inner: [Option<usize>; 4], weights: Box<CellWeights<Rational>> },
}

/// A region realized as a weighted Aztec diamond.
#[derive(Debug, Clone)]
pub struct Embedding {
    pub spec: RegionSpec,
    pub target: CellGrid<Rational>,
    pub prefactor: Rational,
    pub region: RegionGraph,
    lift: Lift,
}

impl Embedding {
    /// Weighted tiling count of the region.
    pub fn count(&self) -> Result<Rational> {
        Ok(&self.prefactor * &count_matchings(&self.target)?)
    }
}

pub fn embed(spec: &RegionSpec) -> Result<Embedding> {
    spec.validate()?;
    match spec {
        RegionSpec::Aztec { n } => Ok(embed_aztec(*n)),
        RegionSpec::Grid { m } => Ok(embed_grid(*m)),
        RegionSpec::Hexagon { a, b, c } => embed_hexagon(*a, *b, *c),
        RegionSpec::Fortress { n, t, phase } => Ok(embed_fortress(*n, t, *phase)),
    }
}

fn diamond_tile((x, y): Vertex) -> Vec<Point> {
    let (x, y) = (x as f64, y as f64);
    vec![(x - 1.0, y), (x, y + 1.0), (x + 1.0, y), (x, y - 1.0)]
}

/// A perfect matching of the listed lattice points using diagonal steps.
fn lattice_matching(points: &[Vertex]) -> Option<Vec<(Vertex, Vertex)>> {
    let index: HashMap<Vertex, usize> = points.iter().enumerate().map(|(i, &p)| (p, i)).collect();
    let left: Vec<usize> = (0..points.len()).filter(|&i| points[i].0.rem_euclid(2) == 0).collect();
    if 2 * left.len() != points.len() {
        return None;
    }
    let neighbors = |i: usize| {
        let (x, y) = points[i];
        [(x - 1, y - 1), (x - 1, y + 1), (x + 1, y - 1), (x + 1, y + 1)]
            .into_iter()
            .filter_map(|q| index.get(&q).copied())
    };
    let mut partner: Vec<Option<usize>> = vec![None; points.len()];
    fn augment(
        u: usize,
        seen: &mut [bool],
        partner: &mut [Option<usize>],
        neighbors: &dyn Fn(usize) -> Vec<usize>,
    ) -> bool {
        for v in neighbors(u) {
            if seen[v] {
                continue;
            }
            seen[v] = true;
            if partner[v].is_none_or(|w| augment(w, seen, partner, neighbors)) {
                partner[v] = Some(u);
                return true;
            }
        }
        false
    }
    let nb = |i: usize| neighbors(i).collect::<Vec<_>>();
    for &u in &left {
        let mut seen = vec![false; points.len()];
        if !augment(u, &mut seen, &mut partner, &nb) {
            return None;
        }
    }
    Some((0..points.len()).filter_map(|v| partner[v].map(|u| (points[u], points[v]))).collect())
}

/// Region vertices placed on diamond lattice points; edges between them
/// get weight 1, the rest of the diamond is matched up by forced edges.
fn direct_embedding(
    spec: RegionSpec,
    order: usize,
    positions: Vec<Vertex>,
    region_edges: &[(usize, usize)],
    tiles: Vec<Vec<Point>>,
) -> Option<Embedding> {
    let placed: HashSet<Vertex> = positions.iter().copied().collect();
    let rest: Vec<Vertex> = aztec_vertices(order).into_iter().filter(|v| !placed.contains(v)).collect();
    let forced_pairs = lattice_matching(&rest)?;
    let mut graph = SmallGraph::new(positions.len());
    let mut region_edge = HashMap::new();
    for &(u, v) in region_edges {
        let e = edge_between(order, positions[u], positions[v])?;
        let idx = graph.add_edge(u, v, Rational::one()).ok()?;
        region_edge.insert(e, idx);
    }
    let forced: HashSet<EdgeRef> =
        forced_pairs.iter().map(|&(p, q)| edge_between(order, p, q)).collect::<Option<_>>()?;
    let target = CellGrid::from_fn(order, |r, c| {
        CellWeights::from_fn(|slot| {
            let e = EdgeRef::new(r, c, slot);
            if region_edge.contains_key(&e) || forced.contains(&e) {
                Rational::one()
            } else {
                Rational::zero()
            }
        })
    });
    let kinds = vec![TileKind::Plain; graph.edges().len()];
    Some(Embedding {
        spec,
        target,
        prefactor: Rational::one(),
        region: RegionGraph { graph, tiles, kinds },
        lift: Lift::Direct { region_edge, forced },
    })
}

/// Region edges between every pair of diamond-adjacent positions.
fn induced_edges(positions: &[Vertex]) -> Vec<(usize, usize)> {
    let index: HashMap<Vertex, usize> = positions.iter().enumerate().map(|(i, &p)| (p, i)).collect();
    let mut out = Vec::new();
    for (i, &(x, y)) in positions.iter().enumerate() {
        for q in [(x + 1, y + 1), (x + 1, y - 1)] {
            if let Some(&j) = index.get(&q) {
                out.push((i, j));
            }
        }
    }
    out
}

pub fn embed_aztec(n: usize) -> Embedding {
    let positions = aztec_vertices(n);
    let edges = induced_edges(&positions);
    let tiles = positions.iter().copied().map(diamond_tile).collect();
    direct_embedding(RegionSpec::Aztec { n }, n, positions, &edges, tiles).expect("the full diamond embeds")
}

/// The `m x m` grid inside the diamond of order `m - 1`, as the lattice
/// points with `|x| + |y| <= m - 1`.
pub fn embed_grid(m: usize) -> Embedding {
    let order = m - 1;
    let positions: Vec<Vertex> =
        aztec_vertices(order).into_iter().filter(|&(x, y)| (x.abs() + y.abs()) as usize <= order).collect();
    let edges = induced_edges(&positions);
    let tiles = positions.iter().copied().map(diamond_tile).collect();
    direct_embedding(RegionSpec::Grid { m }, order, positions, &edges, tiles).expect("grid complements are staircases")
}

/// Triangles of the `a, b, c` hexagon, as `(row, h, up)`; `h` is twice the
/// horizontal position of the triangle's axis, rows count down from 1.
fn hexagon_triangles(a: usize, b: usize, c: usize) -> Vec<(i32, i32, bool)> {
    let (a, b, c) = (a as i32, b as i32, c as i32);
    let left = |l: i32| if l <= c { -l } else { -2 * c + l };
    let right = |l: i32| if l <= b { 2 * a + l } else { 2 * a + 2 * b - l };
    let mut out = Vec::new();
    for k in 1..=b + c {
        for h in left(k - 1).min(left(k)) + 1..right(k - 1).max(right(k)) {
            out.push((k, h, (h - k + 1).rem_euclid(2) == 0));
        }
    }
    out
}

fn triangle_tile(k: i32, h: i32, up: bool) -> Vec<Point> {
    let height = 3f64.sqrt() / 2.0;
    let at = |hh: i32, line: i32| (hh as f64 / 2.0, -(line as f64) * height);
    if up {
        vec![at(h, k - 1), at(h + 1, k), at(h - 1, k)]
    } else {
        vec![at(h - 1, k - 1), at(h + 1, k - 1), at(h, k)]
    }
}

/// The honeycomb of the `a, b, c` hexagon inside the diamond of order
/// `a + b + c - 1`. Triangle `(k, h)` sits at `x + y = 2h + s0`,
/// `y - x = d0 - 2k`; the first offset pair (by `s0`, then `d0`) that fits
/// and leaves a perfectly matchable complement is used.
pub fn embed_hexagon(a: usize, b: usize, c: usize) -> Result<Embedding> {
    let order = a + b + c - 1;
    let tris = hexagon_triangles(a, b, c);
    let index: HashMap<(i32, i32), usize> = tris.iter().enumerate().map(|(i, &(k, h, _))| ((k, h), i)).collect();
    let mut edges = Vec::new();
    for (i, &(k, h, up)) in tris.iter().enumerate() {
        if let Some(&j) = index.get(&(k, h + 1)) {
            edges.push((i, j));
        }
        if up {
            if let Some(&j) = index.get(&(k + 1, h)) {
                edges.push((i, j));
            }
        }
    }
    let tiles: Vec<Vec<Point>> = tris.iter().map(|&(k, h, up)| triangle_tile(k, h, up)).collect();
    let n = order as i32;
    let reach = 4 * n + 1;
    for s0 in (-reach..=reach).filter(|s| s.rem_euclid(2) == 1) {
        for d0 in (-reach..=reach).filter(|d| d.rem_euclid(2) == 1) {
            let positions: Vec<Vertex> = tris
                .iter()
                .map(|&(k, h, _)| {
                    let (s, d) = (2 * h + s0, d0 - 2 * k);
                    ((s - d) / 2, (s + d) / 2)
                })
                .collect();
            if positions.iter().any(|&(x, y)| x.abs() > n || y.abs() > n) {
                continue;
            }
            let spec = RegionSpec::Hexagon { a, b, c };
            if let Some(emb) = direct_embedding(spec, order, positions, &edges, tiles.clone()) {
                return Ok(emb);
            }
        }
    }
    Err(Error::InvalidInput(format!("no placement of hexagon {a},{b},{c} in order {order}")))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    N,
    E,
    S,
    W,
}

/// The order-`n` fortress: square `(r, c)` is renewed when `r + c + phase`
/// is even, and renewed squares lose their triangles on the boundary.
/// Unrenewed cities keep unit weights; renewed ones carry `1 / (2t)` so that
/// renewal leaves cells of weight `t`.
pub fn embed_fortress(n: usize, t: &Rational, phase: u8) -> Embedding {
    let renewed = |r: usize, c: usize| (r + c + phase as usize).is_multiple_of(2);
    let on_boundary = |r: usize, c: usize, side: Side| match side {
        Side::N => r == 1,
        Side::S => r == n,
        Side::W => c == 1,
        Side::E => c == n,
    };
    let sides = [Side::N, Side::E, Side::S, Side::W];
    let mut tri: HashMap<(usize, usize, usize), usize> = HashMap::new();
    let mut tiles = Vec::new();
    let half = n as f64 / 2.0;
    for r in 1..=n {
        for c in 1..=n {
            let (x0, x1) = (c as f64 - 1.0 - half, c as f64 - half);
            let (y0, y1) = (half - r as f64, half - r as f64 + 1.0);
            let mid = ((x0 + x1) / 2.0, (y0 + y1) / 2.0);
            for (si, &side) in sides.iter().enumerate() {
                if renewed(r, c) && on_boundary(r, c, side) {
                    continue;
                }
                tri.insert((r, c, si), tiles.len());
                tiles.push(match side {
                    Side::N => vec![(x0, y1), (x1, y1), mid],
                    Side::E => vec![(x1, y1), (x1, y0), mid],
                    Side::S => vec![(x1, y0), (x0, y0), mid],
                    Side::W => vec![(x0, y0), (x0, y1), mid],
                });
            }
        }
    }
    let city_weight = &Rational::one() / &(Rational::integer(2) * t);
    let mut graph = SmallGraph::new(tiles.len());
    let mut kinds = Vec::new();
    let mut link = |graph: &mut SmallGraph, a: Option<&usize>, b: Option<&usize>, w: &Rational, kind: TileKind| {
        let (a, b) = (*a?, *b?);
        kinds.push(kind);
        Some(graph.add_edge(a, b, w.clone()).expect("fortress dual is simple"))
    };
    // Inner edges in slot order NW, NE, SW, SE: N-W, N-E, W-S, E-S.
    let slot_sides = [(0, 3), (0, 1), (3, 2), (1, 2)];
    let mut cities = Vec::with_capacity(n * n);
    let mut city_edges = Vec::with_capacity(n * n);
    for r in 1..=n {
        for c in 1..=n {
            let w = if renewed(r, c) { city_weight.clone() } else { Rational::one() };
            let inner = slot_sides
                .map(|(p, q)| link(&mut graph, tri.get(&(r, c, p)), tri.get(&(r, c, q)), &w, TileKind::Triangle));
            city_edges.push(inner);
        }
    }
    let mut below = HashMap::new();
    let mut beside = HashMap::new();
    for r in 1..=n {
        for c in 1..=n {
            if r < n {
                let e =
                    link(&mut graph, tri.get(&(r, c, 2)), tri.get(&(r + 1, c, 0)), &Rational::one(), TileKind::Square);
                below.insert((r, c), e.expect("interior triangles exist"));
            }
            if c < n {
                let e =
                    link(&mut graph, tri.get(&(r, c, 1)), tri.get(&(r, c + 1, 3)), &Rational::one(), TileKind::Square);
                beside.insert((r, c), e.expect("interior triangles exist"));
            }
        }
    }
    let mut k = 0;
    for r in 1..=n {
        for c in 1..=n {
            let inner = city_edges[(r - 1) * n + (c - 1)];
            if renewed(r, c) {
                k += 1;
                let connectors = [
                    (r > 1).then(|| below[&(r - 1, c)]),
                    (c > 1).then(|| beside[&(r, c - 1)]),
                    (c < n).then(|| beside[&(r, c)]),
                    (r < n).then(|| below[&(r, c)]),
                ];
                cities.push(City::Renewed {
                    connectors,
                    inner,
                    weights: Box::new(CellWeights::uniform(city_weight.clone())),
                });
            } else {
                cities.push(City::Kept(inner.map(|e| e.expect("unrenewed cities are complete"))));
            }
        }
    }
    let target =
        CellGrid::from_fn(n, |r, c| CellWeights::uniform(if renewed(r, c) { t.clone() } else { Rational::one() }));
    let factor = Rational::integer(2) * city_weight.clone() * city_weight;
    Embedding {
        spec: RegionSpec::Fortress { n, t: t.clone(), phase },
        target,
        prefactor: factor.pow(k).expect("positive base"),
        region: RegionGraph { graph, tiles, kinds },
        lift: Lift::Cities(cities),
    }
}

/// The fortress weighting in the frame where diamond edges are horizontal
/// and vertical: each edge's weight is `t` or 1 by the parity of its
/// coordinate across its direction, phased by `n mod 4`.
pub fn rotated_fortress_weighting(n: usize, t: &Rational) -> CellGrid<Rational> {
    let extreme_t = matches!(n % 4, 1 | 2);
    CellGrid::from_fn(n, |r, c| {
        CellWeights::from_fn(|slot| {
            let (p, q) = edge_vertices(n, EdgeRef::new(r, c, slot)).expect("edge of the diamond");
            let (i1, j1) = rotate(p);
            let (i2, j2) = rotate(q);
            let coord = if j1 == j2 { i1.max(i2) } else { j1.max(j2) };
            if (coord.rem_euclid(2) == 0) == extreme_t {
                t.clone()
            } else {
                Rational::one()
            }
        })
    })
}

/// Canonical lattice point to the rotated integer frame.
pub fn rotate((a, b): Vertex) -> (i32, i32) {
    ((a - b - 1).div_euclid(2), (a + b - 1).div_euclid(2))
}

/// Region tiling corresponding to a perfect matching of the embedding's
/// target. Renewed fortress cities with no inward edges are resolved at
/// random with the city's own bias.
pub fn lift_matching(m: &Matching, emb: &Embedding, rng: &mut RandomSource) -> Result<RegionTiling> {
    if m.order() != emb.target.order() || !m.is_perfect() {
        return Err(Error::InvalidMatching("not a perfect matching of the target diamond".into()));
    }
    let mut edges = Vec::new();
    match &emb.lift {
        Lift::Direct { region_edge, forced } => {
            for e in m.edges() {
                if let Some(&idx) = region_edge.get(&e) {
                    edges.push(idx);
                } else if !forced.contains(&e) {
                    return Err(Error::InvalidMatching(format!("edge ({},{},{}) has weight zero", e.r, e.c, e.slot)));
                }
            }
        }
        Lift::Cities(cities) => {
            let n = m.order();
            for (idx, city) in cities.iter().enumerate() {
                let bits = m.cell_bits(idx / n + 1, idx % n + 1);
                match city {
                    City::Kept(slots) => {
                        edges.extend(CellSlot::ALL.iter().filter(|s| bits & s.bit() != 0).map(|s| slots[s.index()]));
                    }
                    City::Renewed { connectors, inner, weights } => {
                        let mut inward = [false; 4];
                        for slot in CellSlot::ALL.into_iter().filter(|s| bits & s.bit() != 0) {
                            let (p, q) = slot.corners();
                            inward[p as usize] = true;
                            inward[q as usize] = true;
                        }
                        edges.extend((0..4).filter(|&i| inward[i]).filter_map(|i| connectors[i]));
                        let pick = |slot: CellSlot| {
                            inner[slot.index()]
                                .ok_or_else(|| Error::InvalidMatching("pendant corner left unmatched".into()))
                        };
                        match bits.count_ones() {
                            1 => {
                                let slot = CellSlot::ALL.into_iter().find(|s| bits & s.bit() != 0).expect("one bit");
                                edges.push(pick(slot.opposite())?);
                            }
                            0 => {
                                let wz = &weights.w * &weights.z;
                                let bias = &wz / &(&wz + &(&weights.x * &weights.y));
                                let pair = if bias.admits(rng.next_variate()) {
                                    [CellSlot::NW, CellSlot::SE]
                                } else {
                                    [CellSlot::NE, CellSlot::SW]
                                };
                                for slot in pair {
                                    edges.push(pick(slot)?);
                                }
                            }
                            _ => {}
                        }
                    }
                }
            }
        }
    }
    edges.sort_unstable();
    let tiling = RegionTiling { edges };
    if !emb.region.is_tiling(&tiling) {
        return Err(Error::InvalidMatching("lifted edges do not tile the region".into()));
    }
    Ok(tiling)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::Exec;
    use crate::oracle::oracle_count;
    use crate::probs::{prob_sweep, ProbGrid};
    use crate::reduce::{epsilonize, reduce_trace};
    use crate::shuffle::{sample, Sampler};

    fn r(n: i64, d: i64) -> Rational {
        Rational::ratio(n, d)
    }

    #[test]
    fn parse_and_display() {
        for text in ["grid:4", "hex:2,2,2", "fortress:3:t=1/2:phase=1", "aztec:3"] {
            let spec: RegionSpec = text.parse().unwrap();
            assert_eq!(spec.to_string(), text);
        }
        assert_eq!("fortress:5".parse::<RegionSpec>().unwrap(), RegionSpec::Fortress { n: 5, t: r(1, 2), phase: 0 });
        for bad in [
            "grid:3",
            "hex:1,1",
            "hex:0,1,1",
            "fortress:1",
            "fortress:3:t=0",
            "fortress:3:phase=2",
            "disk:3",
            "grid:4:5",
        ] {
            assert!(bad.parse::<RegionSpec>().is_err(), "{bad}");
        }
    }

    #[test]
    fn grid_four_matches_worked_weighting() {
        let emb = embed_grid(4);
        let want = CellGrid::from_fn(3, |a, b| match (a, b) {
            (1, 1) | (3, 3) => CellWeights::new(r(1, 1), r(0, 1), r(0, 1), r(1, 1)),
            (1, 3) | (3, 1) => CellWeights::new(r(0, 1), r(1, 1), r(1, 1), r(0, 1)),
            _ => CellWeights::uniform(r(1, 1)),
        });
        assert_eq!(emb.target, want);
        assert_eq!(emb.count().unwrap(), r(36, 1));
        assert_eq!(embed_grid(2).count().unwrap(), r(2, 1));
    }

    #[test]
    fn grid_six_forced_edges() {
        let emb = embed_grid(6);
        let Lift::Direct { forced, .. } = &emb.lift else { panic!() };
        let corner = [((-5, -4), (-4, -5)), ((-5, -2), (-4, -3)), ((-3, -4), (-2, -5))];
        let mut want = HashSet::new();
        for ((a, b), (c, d)) in corner {
            for (sx, sy) in [(1, 1), (1, -1), (-1, 1), (-1, -1)] {
                want.insert(edge_between(5, (sx * a, sy * b), (sx * c, sy * d)).unwrap());
            }
        }
        assert_eq!(forced, &want);
    }

    #[test]
    fn hexagon_figure_placement() {
        let emb = embed_hexagon(2, 2, 2).unwrap();
        let lines: [((i32, i32), (i32, i32)); 32] = [
            ((-5, 4), (-4, 5)),
            ((-3, 4), (-2, 5)),
            ((-1, 4), (0, 5)),
            ((0, 3), (1, 4)),
            ((2, 5), (3, 4)),
            ((4, 5), (5, 4)),
            ((-5, 2), (-4, 3)),
            ((-3, 2), (-2, 3)),
            ((2, 3), (3, 2)),
            ((4, 3), (5, 2)),
            ((-5, 0), (-4, 1)),
            ((3, 0), (4, 1)),
            ((4, -1), (5, 0)),
            ((2, -3), (3, -2)),
            ((4, -3), (5, -2)),
            ((0, -5), (1, -4)),
            ((2, -5), (3, -4)),
            ((4, -5), (5, -4)),
            ((-5, -2), (-4, -3)),
            ((-3, 0), (-2, -1)),
            ((-1, 2), (0, 1)),
            ((-5, -4), (-4, -5)),
            ((-3, -2), (-2, -3)),
            ((-1, 0), (0, -1)),
            ((1, 2), (2, 1)),
            ((-3, -4), (-2, -5)),
            ((-1, -2), (0, -3)),
            ((1, 0), (2, -1)),
            ((-5, -2), (-1, 2)),
            ((-5, -4), (1, 2)),
            ((-4, -5), (2, 1)),
            ((-2, -5), (2, -1)),
        ];
        let mut want = HashSet::new();
        for ((x0, y0), (x1, y1)) in lines {
            let steps = (x1 - x0).abs();
            let (dx, dy) = ((x1 - x0).signum(), (y1 - y0).signum());
            for s in 0..steps {
                let p = (x0 + s * dx, y0 + s * dy);
                want.insert(edge_between(5, p, (p.0 + dx, p.1 + dy)).unwrap());
            }
        }
        let got: HashSet<EdgeRef> = crate::diamond::all_edges(5).filter(|&e| emb.target.weight(e).is_one()).collect();
        assert_eq!(got, want);
        assert_eq!(emb.count().unwrap(), r(20, 1));
        assert_eq!(embed_hexagon(1, 1, 1).unwrap().count().unwrap(), r(2, 1));
    }

    #[test]
    fn fortress_counts_match_oracle() {
        for n in 2..=3 {
            for phase in 0..=1 {
                for t in [r(1, 2), r(2, 3)] {
                    let emb = embed_fortress(n, &t, phase);
                    assert_eq!(
                        emb.count().unwrap(),
                        oracle_count(&emb.region.graph).unwrap(),
                        "n={n} phase={phase} t={t}"
                    );
                }
            }
        }
    }

    #[test]
    fn fortress_counts_are_powers_of_five() {
        use num_bigint::BigInt;
        for n in 2..=8 {
            for phase in 0..=1 {
                let c = embed_fortress(n, &r(1, 2), phase).count().unwrap();
                assert!(c.denom() == &BigInt::from(1), "{c}");
                let mut v = c.numer().clone();
                if &v % 2 == BigInt::from(0) {
                    v /= 2;
                }
                while &v % 5 == BigInt::from(0) {
                    v /= 5;
                }
                assert_eq!(v, BigInt::from(1), "n={n} phase={phase} count={c}");
            }
        }
    }

    #[test]
    fn renewed_weighting_agrees_with_rotated_frame() {
        for n in [3usize, 5, 7] {
            for t in [r(1, 2), r(2, 3)] {
                let phase = if n % 4 == 1 { 0 } else { 1 };
                let a: ProbGrid<Rational> =
                    prob_sweep(&reduce_trace(&embed_fortress(n, &t, phase).target).unwrap(), Exec::Sequential).unwrap();
                let b: ProbGrid<Rational> =
                    prob_sweep(&reduce_trace(&rotated_fortress_weighting(n, &t)).unwrap(), Exec::Sequential).unwrap();
                assert_eq!(a, b, "n={n} t={t}");
            }
        }
    }

    #[test]
    fn lifted_samples_are_tilings() {
        let specs = ["grid:6", "hex:2,2,2", "fortress:3:phase=0", "fortress:3:phase=1", "fortress:4:t=2/3", "aztec:3"];
        for text in specs {
            let emb = embed(&text.parse().unwrap()).unwrap();
            let sampler = Sampler::new(&reduce_trace(&epsilonize(&emb.target)).unwrap()).unwrap();
            let mut rng = RandomSource::new(7);
            for _ in 0..20 {
                let m = sample(&sampler, &mut rng);
                let t = lift_matching(&m, &emb, &mut rng).unwrap();
                assert!(emb.region.is_tiling(&t), "{text}");
            }
        }
    }

    #[test]
    fn lift_rejects_zero_weight_edges() {
        let emb = embed_grid(4);
        let all_nw = Matching::from_edges(
            3,
            (1..=3)
                .flat_map(|a| (1..=3).map(move |b| (a, b)))
                .flat_map(|(a, b)| [EdgeRef::new(a, b, CellSlot::NW), EdgeRef::new(a, b, CellSlot::SE)]),
        );
        if let Ok(m) = all_nw {
            assert!(lift_matching(&m, &emb, &mut RandomSource::new(0)).is_err());
        }
        assert!(lift_matching(&Matching::empty(3), &emb, &mut RandomSource::new(0)).is_err());
    }
}
