//! Generalized domino shuffling: destruction, sliding and biased creation,
//! one order at a time, plus the alternating-sign matrix of a matching.

use std::collections::BTreeMap;
use std::fmt;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::arith::{Probability, Rational, Scalar};
use crate::diamond::{corner_id, coverage_of, Corner, Matching};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::reduce::{AnyTrace, ReductionTrace};

const NW: u8 = 1;
const NE: u8 = 2;
const SW: u8 = 4;
const SE: u8 = 8;

/// Deterministic stream of uniform 64-bit variates.
#[derive(Debug, Clone)]
pub struct RandomSource {
    seed: u64,
    rng: ChaCha8Rng,
}

impl RandomSource {
    pub fn new(seed: u64) -> Self {
        RandomSource { seed, rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    /// A fresh seed from the OS.
    pub fn from_entropy() -> Self {
        RandomSource::new(rand::random())
    }

    /// Independent stream number `index` under the same seed, for the
    /// `index`-th of several draws.
    pub fn for_draw(seed: u64, index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        RandomSource { seed, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn next_variate(&mut self) -> u64 {
        self.rng.next_u64()
    }
}

/// Per-level creation biases `wz / (wz + xy)`, read off a reduction trace.
#[derive(Debug, Clone, PartialEq)]
pub struct Sampler<V> {
    /// `levels[k - 1]` holds the row-major biases of order `k`.
    levels: Vec<Vec<V>>,
}

impl<V: Probability> Sampler<V> {
    pub fn new<S: Scalar<Value = V>>(trace: &ReductionTrace<S>) -> Result<Self> {
        let levels = (1..=trace.order())
            .map(|k| {
                trace
                    .grid(k)
                    .cells()
                    .iter()
                    .zip(trace.factors(k))
                    .map(|(cw, d)| Ok(cw.w.times(&cw.z).over(d)?.limit()?))
                    .collect::<Result<Vec<V>>>()
            })
            .collect::<Result<_>>()?;
        Ok(Sampler { levels })
    }

    pub fn order(&self) -> usize {
        self.levels.len()
    }

    /// Probability that cell `(r, c)` of order `k` is created as `{NW, SE}`.
    pub fn bias(&self, k: usize, r: usize, c: usize) -> &V {
        &self.levels[k - 1][(r - 1) * k + (c - 1)]
    }
}

/// A sampler over exact or floating-point biases.
#[derive(Debug, Clone, PartialEq)]
pub enum AnySampler {
    Exact(Sampler<Rational>),
    Float(Sampler<f64>),
}

impl AnySampler {
    pub fn new(trace: &AnyTrace) -> Result<Self> {
        trace.with_refinement(Exec::default(), |t| {
            Ok(match t {
                AnyTrace::Exact(t) => AnySampler::Exact(Sampler::new(t)?),
                AnyTrace::Eps(t) => AnySampler::Exact(Sampler::new(t)?),
                AnyTrace::Float(t) => AnySampler::Float(Sampler::new(t)?),
            })
        })
    }

    pub fn order(&self) -> usize {
        match self {
            AnySampler::Exact(s) => s.order(),
            AnySampler::Float(s) => s.order(),
        }
    }

    pub fn sample(&self, rng: &mut RandomSource) -> Matching {
        match self {
            AnySampler::Exact(s) => sample(s, rng),
            AnySampler::Float(s) => sample(s, rng),
        }
    }

    pub fn sample_many(&self, seed: u64, count: usize, exec: Exec) -> Vec<Matching> {
        match self {
            AnySampler::Exact(s) => sample_many(s, seed, count, exec),
            AnySampler::Float(s) => sample_many(s, seed, count, exec),
        }
    }
}

/// The partial matching of order `k` left after destruction and sliding,
/// with the cells that creation must fill.
#[derive(Debug, Clone, PartialEq)]
pub struct Creation {
    partial: Matching,
    fillable: Vec<usize>,
}

impl Creation {
    pub fn partial(&self) -> &Matching {
        &self.partial
    }

    /// Cells to be created, row-major.
    pub fn fillable(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let k = self.partial.order();
        self.fillable.iter().map(move |&i| (i / k + 1, i % k + 1))
    }

    pub fn fillable_count(&self) -> usize {
        self.fillable.len()
    }

    /// Completes the matching: `choices[i]` picks `{NW, SE}` for the `i`-th
    /// fillable cell, `{NE, SW}` otherwise.
    pub fn fill(&self, choices: &[bool]) -> Matching {
        assert_eq!(choices.len(), self.fillable.len(), "one choice per fillable cell");
        let mut bits = self.partial.bits().to_vec();
        for (&idx, &diag) in self.fillable.iter().zip(choices) {
            bits[idx] = if diag { NW | SE } else { NE | SW };
        }
        Matching::from_bits(self.partial.order(), bits)
    }
}

fn slide(bits: u8) -> u8 {
    ((bits & NW) << 3) | ((bits & SE) >> 3) | ((bits & NE) << 1) | ((bits & SW) >> 1)
}

fn creation_of(m: &Matching) -> Creation {
    let small = m.order();
    let k = small + 1;
    let mut bits = vec![0u8; k * k];
    for r in 1..=small {
        for c in 1..=small {
            let b = m.cell_bits(r, c);
            let at = |rr: usize, cc: usize| (rr - 1) * k + (cc - 1);
            if b & NW != 0 {
                bits[at(r, c)] |= SE;
            }
            if b & NE != 0 {
                bits[at(r, c + 1)] |= SW;
            }
            if b & SW != 0 {
                bits[at(r + 1, c)] |= NE;
            }
            if b & SE != 0 {
                bits[at(r + 1, c + 1)] |= NW;
            }
        }
    }
    for b in bits.iter_mut() {
        *b = if b.count_ones() == 2 { 0 } else { slide(*b) };
    }
    // Row by row, an unclaimed top corner can only be covered by its own cell.
    let mut claimed = coverage_of(k, &bits);
    let mut fillable = Vec::new();
    for r in 1..=k {
        for c in 1..=k {
            let corners = Corner::ALL.map(|corner| corner_id(k, r, c, corner));
            if claimed[corners[0]] == 0 && corners.iter().all(|&v| claimed[v] == 0) {
                for v in corners {
                    claimed[v] = 1;
                }
                fillable.push((r - 1) * k + (c - 1));
            }
        }
    }
    assert!(claimed.iter().all(|&x| x == 1), "unmatched vertices admit no cover by cells");
    Creation { partial: Matching::from_bits(k, bits), fillable }
}

/// Destruction and sliding of a perfect matching of order `k - 1`.
pub fn destroy_and_slide(m: &Matching) -> Result<Creation> {
    if !m.is_perfect() {
        return Err(Error::InvalidInput(format!("matching of order {} is not perfect", m.order())));
    }
    Ok(creation_of(m))
}

fn step<V: Probability>(m: &Matching, sampler: &Sampler<V>, rng: &mut RandomSource) -> Matching {
    let creation = creation_of(m);
    let k = creation.partial.order();
    let biases = &sampler.levels[k - 1];
    let choices: Vec<bool> = creation.fillable.iter().map(|&i| biases[i].admits(rng.next_variate())).collect();
    creation.fill(&choices)
}

/// One shuffling step from a perfect matching of order `k - 1` to one of
/// order `k`, using the order-`k` biases.
pub fn shuffle_step<V: Probability>(m: &Matching, sampler: &Sampler<V>, rng: &mut RandomSource) -> Result<Matching> {
    if m.order() >= sampler.order() {
        return Err(Error::InvalidInput(format!(
            "no order-{} level in a sampler of order {}",
            m.order() + 1,
            sampler.order()
        )));
    }
    if !m.is_perfect() {
        return Err(Error::InvalidInput(format!("matching of order {} is not perfect", m.order())));
    }
    Ok(step(m, sampler, rng))
}

/// A random perfect matching of the top order, drawn with probability
/// proportional to its weight.
pub fn sample<V: Probability>(sampler: &Sampler<V>, rng: &mut RandomSource) -> Matching {
    let mut m = Matching::empty(0);
    for _ in 0..sampler.order() {
        m = step(&m, sampler, rng);
    }
    m
}

/// `count` independent draws; draw `i` uses stream `i` of `seed`.
pub fn sample_many<V: Probability>(sampler: &Sampler<V>, seed: u64, count: usize, exec: Exec) -> Vec<Matching> {
    exec.map_range(count, |i| sample(sampler, &mut RandomSource::for_draw(seed, i as u64)))
}

/// Most creation cells explored per level by [`exact_distribution`].
pub const MAX_ENUMERATED_CREATIONS: usize = 16;

/// The exact output distribution of the sampler, found by following every
/// creation decision; matchings of probability zero are omitted.
pub fn exact_distribution(sampler: &Sampler<Rational>) -> Result<BTreeMap<Matching, Rational>> {
    let mut dist = BTreeMap::from([(Matching::empty(0), Rational::one())]);
    for k in 1..=sampler.order() {
        let mut next = BTreeMap::new();
        for (m, p) in &dist {
            let creation = creation_of(m);
            let f = creation.fillable.len();
            if f > MAX_ENUMERATED_CREATIONS {
                return Err(Error::InvalidInput(format!("{f} creation cells at order {k} are too many to enumerate")));
            }
            let biases: Vec<&Rational> = creation.fillable.iter().map(|&i| &sampler.levels[k - 1][i]).collect();
            for mask in 0..1u32 << f {
                let choices: Vec<bool> = (0..f).map(|i| mask >> i & 1 == 1).collect();
                let prob = choices.iter().zip(&biases).fold(p.clone(), |acc, (&diag, &b)| {
                    acc * if diag { b.clone() } else { Rational::one() - b.clone() }
                });
                if prob.is_zero() {
                    continue;
                }
                let entry = next.entry(creation.fill(&choices)).or_insert_with(Rational::zero);
                *entry = entry.clone() + prob;
            }
        }
        dist = next;
    }
    Ok(dist)
}

/// An alternating-sign matrix.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ASMatrix {
    order: usize,
    entries: Vec<i8>,
}

impl ASMatrix {
    pub fn from_rows(rows: Vec<Vec<i8>>) -> Result<Self> {
        let order = rows.len();
        if rows.iter().any(|r| r.len() != order) {
            return Err(Error::InvalidInput("matrix is not square".into()));
        }
        let m = ASMatrix { order, entries: rows.concat() };
        if !m.is_valid() {
            return Err(Error::InvalidInput("not an alternating-sign matrix".into()));
        }
        Ok(m)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn get(&self, r: usize, c: usize) -> i8 {
        self.entries[(r - 1) * self.order + (c - 1)]
    }

    pub fn rows(&self) -> Vec<Vec<i8>> {
        self.entries.chunks(self.order.max(1)).map(<[i8]>::to_vec).take(self.order).collect()
    }

    /// Entries in `{-1, 0, 1}`, every row and column summing to 1 with
    /// nonzero entries alternating in sign.
    pub fn is_valid(&self) -> bool {
        let n = self.order;
        let line_ok = |line: &mut dyn Iterator<Item = i8>| {
            let mut sum = 0i32;
            for v in line {
                if !(-1..=1).contains(&v) {
                    return false;
                }
                sum += v as i32;
                if !(0..=1).contains(&sum) {
                    return false;
                }
            }
            sum == 1
        };
        (1..=n).all(|r| line_ok(&mut (1..=n).map(|c| self.get(r, c))))
            && (1..=n).all(|c| line_ok(&mut (1..=n).map(|r| self.get(r, c))))
    }
}

impl fmt::Display for ASMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in self.rows() {
            let line: Vec<String> = row.iter().map(|v| format!("{v:>2}")).collect();
            writeln!(f, "{}", line.join(" "))?;
        }
        Ok(())
    }
}

impl Serialize for ASMatrix {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.rows().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ASMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        ASMatrix::from_rows(Vec::deserialize(deserializer)?).map_err(serde::de::Error::custom)
    }
}

/// Matched edges per cell, minus one. Meaningful for perfect matchings.
pub fn asm_of_matching(m: &Matching) -> ASMatrix {
    let entries = m.bits().iter().map(|b| b.count_ones() as i8 - 1).collect();
    let a = ASMatrix { order: m.order(), entries };
    debug_assert!(!m.is_perfect() || a.is_valid());
    a
}
