//! Weighted Aztec diamond graphs: cells, slots, edges and matchings.
//!
//! Vertices of the order-`n` diamond are the lattice points `(i, j)` with
//! `i + j` odd and `|i|, |j| <= n`. The edges split into `n^2` four-cycles
//! ("cells"); cell `(r, c)` (1-based, row 1 at the top) is centered at
//! `(2c - n - 1, n + 1 - 2r)`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::arith::{ArithError, Scalar};
use crate::error::{Error, Result};

pub type Vertex = (i32, i32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CellSlot {
    NW,
    NE,
    SW,
    SE,
}

impl CellSlot {
    pub const ALL: [CellSlot; 4] = [CellSlot::NW, CellSlot::NE, CellSlot::SW, CellSlot::SE];

    pub fn opposite(self) -> CellSlot {
        match self {
            CellSlot::NW => CellSlot::SE,
            CellSlot::NE => CellSlot::SW,
            CellSlot::SW => CellSlot::NE,
            CellSlot::SE => CellSlot::NW,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn bit(self) -> u8 {
        1 << self.index()
    }

    pub fn from_index(i: usize) -> CellSlot {
        CellSlot::ALL[i]
    }

    /// The two cell corners this slot's edge joins.
    pub fn corners(self) -> (Corner, Corner) {
        match self {
            CellSlot::NW => (Corner::Left, Corner::Top),
            CellSlot::NE => (Corner::Top, Corner::Right),
            CellSlot::SW => (Corner::Left, Corner::Bottom),
            CellSlot::SE => (Corner::Bottom, Corner::Right),
        }
    }
}

impl fmt::Display for CellSlot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl FromStr for CellSlot {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "NW" => Ok(CellSlot::NW),
            "NE" => Ok(CellSlot::NE),
            "SW" => Ok(CellSlot::SW),
            "SE" => Ok(CellSlot::SE),
            _ => Err(ArithError::Parse(format!("unknown slot {s:?}")).into()),
        }
    }
}

/// The four vertices of a cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Corner {
    Top,
    Left,
    Right,
    Bottom,
}

impl Corner {
    pub const ALL: [Corner; 4] = [Corner::Top, Corner::Left, Corner::Right, Corner::Bottom];
}

/// Edge weights of one cell, one per slot.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CellWeights<S> {
    pub w: S,
    pub x: S,
    pub y: S,
    pub z: S,
}

impl<S> CellWeights<S> {
    pub fn new(w: S, x: S, y: S, z: S) -> Self {
        CellWeights { w, x, y, z }
    }

    pub fn get(&self, slot: CellSlot) -> &S {
        match slot {
            CellSlot::NW => &self.w,
            CellSlot::NE => &self.x,
            CellSlot::SW => &self.y,
            CellSlot::SE => &self.z,
        }
    }

    pub fn get_mut(&mut self, slot: CellSlot) -> &mut S {
        match slot {
            CellSlot::NW => &mut self.w,
            CellSlot::NE => &mut self.x,
            CellSlot::SW => &mut self.y,
            CellSlot::SE => &mut self.z,
        }
    }

    pub fn from_fn(mut f: impl FnMut(CellSlot) -> S) -> Self {
        CellWeights { w: f(CellSlot::NW), x: f(CellSlot::NE), y: f(CellSlot::SW), z: f(CellSlot::SE) }
    }

    pub fn map<T>(&self, mut f: impl FnMut(&S) -> T) -> CellWeights<T> {
        CellWeights { w: f(&self.w), x: f(&self.x), y: f(&self.y), z: f(&self.z) }
    }

    pub fn try_map<T, E>(&self, mut f: impl FnMut(&S) -> Result<T, E>) -> Result<CellWeights<T>, E> {
        Ok(CellWeights { w: f(&self.w)?, x: f(&self.x)?, y: f(&self.y)?, z: f(&self.z)? })
    }

    pub fn iter(&self) -> impl Iterator<Item = (CellSlot, &S)> {
        CellSlot::ALL.into_iter().map(move |s| (s, self.get(s)))
    }
}

impl<S: Scalar> CellWeights<S> {
    pub fn uniform(v: S) -> Self {
        CellWeights::new(v.clone(), v.clone(), v.clone(), v)
    }
}

/// `wz + xy`.
pub fn cell_factor<S: Scalar>(cw: &CellWeights<S>) -> S {
    cw.w.times(&cw.z).plus(&cw.x.times(&cw.y))
}

/// `(w, x, y, z) -> (z, y, x, w) / (wz + xy)`. A zero factor is reported as a
/// lone order-1 cell.
pub fn urban_renewal_transform<S: Scalar>(cw: &CellWeights<S>) -> Result<CellWeights<S>> {
    let d = cell_factor(cw);
    if d.is_zero() {
        return Err(Error::ZeroCellFactor { level: 1, r: 1, c: 1 });
    }
    Ok(CellWeights::new(cw.z.over(&d)?, cw.y.over(&d)?, cw.x.over(&d)?, cw.w.over(&d)?))
}

/// An `n x n` array of cell weights, row-major from the top-left.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CellGrid<S> {
    order: usize,
    cells: Vec<CellWeights<S>>,
}

impl<S> CellGrid<S> {
    pub fn from_cells(order: usize, cells: Vec<CellWeights<S>>) -> Result<Self> {
        if cells.len() != order * order {
            return Err(Error::InvalidInput(format!(
                "order {order} needs {} cells, got {}",
                order * order,
                cells.len()
            )));
        }
        Ok(CellGrid { order, cells })
    }

    /// Build from a function of the 1-based cell position.
    pub fn from_fn(order: usize, mut f: impl FnMut(usize, usize) -> CellWeights<S>) -> Self {
        let mut cells = Vec::with_capacity(order * order);
        for r in 1..=order {
            for c in 1..=order {
                cells.push(f(r, c));
            }
        }
        CellGrid { order, cells }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn cell(&self, r: usize, c: usize) -> &CellWeights<S> {
        debug_assert!((1..=self.order).contains(&r) && (1..=self.order).contains(&c));
        &self.cells[(r - 1) * self.order + (c - 1)]
    }

    pub fn cell_mut(&mut self, r: usize, c: usize) -> &mut CellWeights<S> {
        &mut self.cells[(r - 1) * self.order + (c - 1)]
    }

    pub fn weight(&self, e: EdgeRef) -> &S {
        self.cell(e.r, e.c).get(e.slot)
    }

    /// Cells in row-major order.
    pub fn cells(&self) -> &[CellWeights<S>] {
        &self.cells
    }

    pub fn rows(&self) -> impl Iterator<Item = &[CellWeights<S>]> {
        self.cells.chunks(self.order.max(1)).take(self.order)
    }

    pub fn map<T>(&self, f: impl FnMut(&S) -> T + Clone) -> CellGrid<T> {
        CellGrid { order: self.order, cells: self.cells.iter().map(|cw| cw.map(f.clone())).collect() }
    }

    pub fn try_map<T, E>(&self, f: impl FnMut(&S) -> Result<T, E> + Clone) -> Result<CellGrid<T>, E> {
        let cells = self.cells.iter().map(|cw| cw.try_map(f.clone())).collect::<Result<_, E>>()?;
        Ok(CellGrid { order: self.order, cells })
    }
}

impl<S: Scalar> CellGrid<S> {
    pub fn uniform(order: usize, v: S) -> Self {
        CellGrid::from_fn(order, |_, _| CellWeights::uniform(v.clone()))
    }

    /// Weight of a matching: product of its edge weights.
    pub fn matching_weight(&self, m: &Matching) -> S {
        m.edges().iter().fold(S::one(), |acc, &e| acc.times(self.weight(e)))
    }
}

#[derive(Serialize, Deserialize)]
struct GridFile<S> {
    order: usize,
    cells: Vec<Vec<CellWeights<S>>>,
}

impl<S: Serialize + Clone> Serialize for CellGrid<S> {
    fn serialize<Ser: serde::Serializer>(&self, serializer: Ser) -> Result<Ser::Ok, Ser::Error> {
        GridFile { order: self.order, cells: self.rows().map(<[_]>::to_vec).collect() }.serialize(serializer)
    }
}

impl<'de, S: Deserialize<'de>> Deserialize<'de> for CellGrid<S> {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let file = GridFile::<S>::deserialize(deserializer)?;
        if file.cells.len() != file.order || file.cells.iter().any(|row| row.len() != file.order) {
            return Err(serde::de::Error::custom(format!("cells must form a {0}x{0} array", file.order)));
        }
        let order = file.order;
        let cells = file.cells.into_iter().flatten().collect();
        CellGrid::from_cells(order, cells).map_err(serde::de::Error::custom)
    }
}

/// One edge, named by its cell and slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeRef {
    pub r: usize,
    pub c: usize,
    pub slot: CellSlot,
}

impl EdgeRef {
    pub fn new(r: usize, c: usize, slot: CellSlot) -> Self {
        EdgeRef { r, c, slot }
    }

    pub fn check(self, order: usize) -> Result<Self> {
        if (1..=order).contains(&self.r) && (1..=order).contains(&self.c) {
            Ok(self)
        } else {
            Err(Error::InvalidEdge { order, r: self.r, c: self.c })
        }
    }
}

impl Serialize for EdgeRef {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        (self.r, self.c, self.slot).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for EdgeRef {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let (r, c, slot) = <(usize, usize, CellSlot)>::deserialize(deserializer)?;
        Ok(EdgeRef { r, c, slot })
    }
}

/// Every edge of the order-`n` diamond, row-major by cell, slots in
/// `NW, NE, SW, SE` order.
pub fn all_edges(n: usize) -> impl Iterator<Item = EdgeRef> {
    (1..=n).flat_map(move |r| (1..=n).flat_map(move |c| CellSlot::ALL.into_iter().map(move |s| EdgeRef::new(r, c, s))))
}

pub fn cell_center(n: usize, r: usize, c: usize) -> Vertex {
    let (n, r, c) = (n as i32, r as i32, c as i32);
    (2 * c - n - 1, n + 1 - 2 * r)
}

pub fn corner_vertex(center: Vertex, corner: Corner) -> Vertex {
    let (cx, cy) = center;
    match corner {
        Corner::Top => (cx, cy + 1),
        Corner::Left => (cx - 1, cy),
        Corner::Right => (cx + 1, cy),
        Corner::Bottom => (cx, cy - 1),
    }
}

/// Lattice endpoints of an edge.
pub fn edge_vertices(n: usize, e: EdgeRef) -> Result<(Vertex, Vertex)> {
    let e = e.check(n)?;
    let center = cell_center(n, e.r, e.c);
    let (a, b) = e.slot.corners();
    Ok((corner_vertex(center, a), corner_vertex(center, b)))
}

/// The edge joining two lattice points, if they are adjacent in the
/// order-`n` diamond.
pub fn edge_between(n: usize, a: Vertex, b: Vertex) -> Option<EdgeRef> {
    if (a.0 - b.0).abs() != 1 || (a.1 - b.1).abs() != 1 {
        return None;
    }
    let m = n as i32;
    // Cell centers have both coordinates of the parity of n + 1.
    let center = [(a.0, b.1), (b.0, a.1)]
        .into_iter()
        .find(|&(x, y)| (x + m + 1).rem_euclid(2) == 0 && (y + m + 1).rem_euclid(2) == 0)?;
    if center.0.abs() >= m || center.1.abs() >= m {
        return None;
    }
    let c = ((center.0 + m + 1) / 2) as usize;
    let r = ((m + 1 - center.1) / 2) as usize;
    CellSlot::ALL.into_iter().find_map(|slot| {
        let (p, q) = slot.corners();
        let (p, q) = (corner_vertex(center, p), corner_vertex(center, q));
        ((p, q) == (a, b) || (p, q) == (b, a)).then_some(EdgeRef::new(r, c, slot))
    })
}

/// All `2n(n+1)` vertices, sorted.
pub fn aztec_vertices(n: usize) -> Vec<Vertex> {
    let m = n as i32;
    let mut out = Vec::with_capacity(2 * n * (n + 1));
    for i in -m..=m {
        for j in -m..=m {
            if (i + j).rem_euclid(2) == 1 {
                out.push((i, j));
            }
        }
    }
    out
}

/// The order-`n` edge occupying the same lattice segment as edge `(r, c, slot)`
/// of the concentric order-`(n-1)` diamond.
pub fn slot_map_small_to_large(r: usize, c: usize, slot: CellSlot) -> EdgeRef {
    match slot {
        CellSlot::NW => EdgeRef::new(r, c, CellSlot::SE),
        CellSlot::NE => EdgeRef::new(r, c + 1, CellSlot::SW),
        CellSlot::SW => EdgeRef::new(r + 1, c, CellSlot::NE),
        CellSlot::SE => EdgeRef::new(r + 1, c + 1, CellSlot::NW),
    }
}

/// Dense vertex numbering for an order-`k` diamond: the top/bottom corners
/// come first (`(k+1) x k`), then the left/right corners (`k x (k+1)`).
pub fn corner_id(k: usize, r: usize, c: usize, corner: Corner) -> usize {
    let vertical = (k + 1) * k;
    match corner {
        Corner::Top => (r - 1) * k + (c - 1),
        Corner::Bottom => r * k + (c - 1),
        Corner::Left => vertical + (r - 1) * (k + 1) + (c - 1),
        Corner::Right => vertical + (r - 1) * (k + 1) + c,
    }
}

pub fn vertex_count(k: usize) -> usize {
    2 * k * (k + 1)
}

/// A set of edges of an order-`n` diamond, stored as one slot bitmask per cell.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Matching {
    order: usize,
    cells: Vec<u8>,
}

impl Matching {
    pub fn empty(order: usize) -> Self {
        Matching { order, cells: vec![0; order * order] }
    }

    /// Builds a matching, rejecting out-of-range edges and shared vertices.
    pub fn from_edges(order: usize, edges: impl IntoIterator<Item = EdgeRef>) -> Result<Self> {
        let mut m = Matching::empty(order);
        for e in edges {
            let e = e.check(order)?;
            m.cells[(e.r - 1) * order + (e.c - 1)] |= e.slot.bit();
        }
        if let Some(v) = m.coverage().iter().position(|&k| k > 1) {
            return Err(Error::InvalidMatching(format!("vertex {v} is covered twice")));
        }
        Ok(m)
    }

    pub(crate) fn from_bits(order: usize, cells: Vec<u8>) -> Self {
        debug_assert_eq!(cells.len(), order * order);
        Matching { order, cells }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn cell_bits(&self, r: usize, c: usize) -> u8 {
        self.cells[(r - 1) * self.order + (c - 1)]
    }

    pub(crate) fn bits(&self) -> &[u8] {
        &self.cells
    }

    pub fn contains(&self, e: EdgeRef) -> bool {
        self.cell_bits(e.r, e.c) & e.slot.bit() != 0
    }

    pub fn len(&self) -> usize {
        self.cells.iter().map(|b| b.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Matched edges in row-major cell order.
    pub fn edges(&self) -> Vec<EdgeRef> {
        let n = self.order;
        let mut out = Vec::with_capacity(n * (n + 1));
        for (idx, &bits) in self.cells.iter().enumerate() {
            for slot in CellSlot::ALL {
                if bits & slot.bit() != 0 {
                    out.push(EdgeRef::new(idx / n + 1, idx % n + 1, slot));
                }
            }
        }
        out
    }

    /// How many matched edges touch each vertex (indexed by [`corner_id`]).
    pub fn coverage(&self) -> Vec<u8> {
        coverage_of(self.order, &self.cells)
    }

    pub fn is_perfect(&self) -> bool {
        self.coverage().iter().all(|&k| k == 1)
    }
}

pub(crate) fn coverage_of(k: usize, cells: &[u8]) -> Vec<u8> {
    let mut cov = vec![0u8; vertex_count(k)];
    for r in 1..=k {
        for c in 1..=k {
            let bits = cells[(r - 1) * k + (c - 1)];
            for slot in CellSlot::ALL {
                if bits & slot.bit() != 0 {
                    let (a, b) = slot.corners();
                    cov[corner_id(k, r, c, a)] += 1;
                    cov[corner_id(k, r, c, b)] += 1;
                }
            }
        }
    }
    cov
}

#[derive(Serialize, Deserialize)]
struct MatchingFile {
    order: usize,
    edges: Vec<EdgeRef>,
}

impl Serialize for Matching {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        MatchingFile { order: self.order, edges: self.edges() }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Matching {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let file = MatchingFile::deserialize(deserializer)?;
        Matching::from_edges(file.order, file.edges).map_err(serde::de::Error::custom)
    }
}
