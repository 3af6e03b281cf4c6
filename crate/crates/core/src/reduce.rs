//! Forward reduction: one urban-renewal sweep per order, down to order 0.

use serde::{Deserialize, Serialize};

use crate::arith::{ArithError, Backend, EpsScalar, Rational, Scalar, DEFAULT_PRECISION};
use crate::diamond::{cell_factor, CellGrid, CellWeights};
use crate::error::{Error, Result};
use crate::exec::Exec;

/// Weights and cell factors at every order from `n` down to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct ReductionTrace<S> {
    /// `levels[k - 1]` holds order `k`.
    levels: Vec<Level<S>>,
}

#[derive(Debug, Clone, PartialEq)]
struct Level<S> {
    grid: CellGrid<S>,
    factors: Vec<S>,
}

impl<S: Scalar> ReductionTrace<S> {
    pub fn order(&self) -> usize {
        self.levels.len()
    }

    /// Weights at order `k`, `1 <= k <= n`.
    pub fn grid(&self, k: usize) -> &CellGrid<S> {
        &self.levels[k - 1].grid
    }

    /// Row-major cell factors at order `k`.
    pub fn factors(&self, k: usize) -> &[S] {
        &self.levels[k - 1].factors
    }

    pub fn factor(&self, k: usize, r: usize, c: usize) -> &S {
        &self.levels[k - 1].factors[(r - 1) * k + (c - 1)]
    }

    /// Product of every cell factor at every order: the weighted matching count.
    pub fn count(&self) -> S {
        self.levels.iter().flat_map(|l| l.factors.iter()).fold(S::one(), |acc, f| acc.times(f))
    }

    /// Recomputes every level from the top grid and compares.
    pub fn verify(&self, exec: Exec) -> Result<()> {
        if self.levels.is_empty() {
            return Ok(());
        }
        let fresh = reduce_trace_with(self.grid(self.order()), exec)?;
        if &fresh == self {
            Ok(())
        } else {
            Err(Error::InvalidInput("trace levels are not successive reductions".into()))
        }
    }
}

/// Cell factors of `g` and the reduced grid of order `n - 1`.
fn reduce_level<S: Scalar>(g: &CellGrid<S>, exec: Exec) -> Result<(Vec<S>, CellGrid<S>)> {
    let n = g.order();
    let factors = exec.map_range(n * n, |idx| cell_factor(&g.cells()[idx]));
    if let Some(idx) = factors.iter().position(Scalar::is_zero) {
        return Err(Error::ZeroCellFactor { level: n, r: idx / n + 1, c: idx % n + 1 });
    }
    let m = n.saturating_sub(1);
    let delta = |r: usize, c: usize| &factors[(r - 1) * n + (c - 1)];
    let cells = exec.try_map_range(m * m, |idx| -> Result<CellWeights<S>, ArithError> {
        let (r, c) = (idx / m + 1, idx % m + 1);
        Ok(CellWeights::new(
            g.cell(r, c).w.over(delta(r, c))?,
            g.cell(r, c + 1).x.over(delta(r, c + 1))?,
            g.cell(r + 1, c).y.over(delta(r + 1, c))?,
            g.cell(r + 1, c + 1).z.over(delta(r + 1, c + 1))?,
        ))
    })?;
    Ok((factors, CellGrid::from_cells(m, cells)?))
}

/// One reduction step: order `n` to order `n - 1`.
pub fn reduce_once<S: Scalar>(g: &CellGrid<S>) -> Result<CellGrid<S>> {
    if g.order() == 0 {
        return Err(Error::InvalidInput("cannot reduce an order-0 grid".into()));
    }
    Ok(reduce_level(g, Exec::Sequential)?.1)
}

pub fn reduce_trace<S: Scalar>(g: &CellGrid<S>) -> Result<ReductionTrace<S>> {
    reduce_trace_with(g, Exec::default())
}

pub fn reduce_trace_with<S: Scalar>(g: &CellGrid<S>, exec: Exec) -> Result<ReductionTrace<S>> {
    let mut levels = Vec::with_capacity(g.order());
    let mut current = g.clone();
    while current.order() > 0 {
        let (factors, next) = reduce_level(&current, exec)?;
        levels.push(Level { grid: current, factors });
        current = next;
    }
    levels.reverse();
    Ok(ReductionTrace { levels })
}

/// Largest series budget tried before giving up on an ε computation.
pub const MAX_EPS_PRECISION: u32 = 768;

/// Replaces every zero weight by the same formal ε.
pub fn epsilonize(g: &CellGrid<Rational>) -> CellGrid<EpsScalar> {
    epsilonize_with(g, DEFAULT_PRECISION)
}

/// Like [`epsilonize`], carrying `precision` series terms through later
/// arithmetic.
pub fn epsilonize_with(g: &CellGrid<Rational>, precision: u32) -> CellGrid<EpsScalar> {
    g.map(|w| {
        let v = if w.is_zero() { EpsScalar::eps() } else { EpsScalar::from_rational(w.clone()) };
        v.with_precision(precision)
    })
}

fn is_exhausted<T>(r: &Result<T>) -> bool {
    matches!(r, Err(Error::Arith(ArithError::PrecisionExhausted)))
}

/// ε reduction, doubling the series budget until the count's limit is known.
fn eps_trace(g: &CellGrid<Rational>, exec: Exec) -> Result<AnyTrace> {
    let mut precision = DEFAULT_PRECISION;
    loop {
        let attempt = reduce_trace_with(&epsilonize_with(g, precision), exec).and_then(|t| {
            t.count().limit0()?;
            Ok(t)
        });
        if is_exhausted(&attempt) && precision < MAX_EPS_PRECISION {
            precision *= 2;
            continue;
        }
        return attempt.map(AnyTrace::Eps);
    }
}

/// A reduction trace on whichever backend the computation ended up using.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "backend", content = "levels")]
pub enum AnyTrace {
    #[serde(rename = "exact")]
    Exact(ReductionTrace<Rational>),
    #[serde(rename = "eps")]
    Eps(ReductionTrace<EpsScalar>),
    #[serde(rename = "float64")]
    Float(ReductionTrace<f64>),
}

impl AnyTrace {
    pub fn order(&self) -> usize {
        match self {
            AnyTrace::Exact(t) => t.order(),
            AnyTrace::Eps(t) => t.order(),
            AnyTrace::Float(t) => t.order(),
        }
    }

    pub fn backend(&self) -> Backend {
        match self {
            AnyTrace::Exact(_) => Backend::ExactRational,
            AnyTrace::Eps(_) => Backend::ExactEps,
            AnyTrace::Float(_) => Backend::Float64,
        }
    }

    /// The same ε reduction with twice the series budget; `None` for other
    /// backends or once the budget is at its maximum.
    pub fn refined(&self, exec: Exec) -> Option<Result<AnyTrace>> {
        let AnyTrace::Eps(t) = self else { return None };
        let top = t.grid(t.order());
        let precision = top.cells().first()?.w.precision();
        if precision >= MAX_EPS_PRECISION {
            return None;
        }
        let original = top.try_map(|w| w.limit0());
        Some(match original {
            Ok(g) => reduce_trace_with(&epsilonize_with(&g, 2 * precision), exec).map(AnyTrace::Eps),
            Err(e) => Err(e.into()),
        })
    }

    /// Runs `f`, refining ε precision for as long as `f` runs out of it.
    pub fn with_refinement<T>(&self, exec: Exec, f: impl Fn(&AnyTrace) -> Result<T>) -> Result<T> {
        let mut owned: Option<AnyTrace> = None;
        loop {
            let current = owned.as_ref().unwrap_or(self);
            let out = f(current);
            if !is_exhausted(&out) {
                return out;
            }
            match current.refined(exec) {
                Some(next) => owned = Some(next?),
                None => return out,
            }
        }
    }

    /// Exact weighted count; fails for float traces and for weightings with
    /// no positive matching.
    pub fn exact_count(&self) -> Result<Rational> {
        let count = match self {
            AnyTrace::Exact(t) => t.count(),
            AnyTrace::Eps(t) => t.count().limit0()?,
            AnyTrace::Float(_) => return Err(Error::InvalidInput("exact count needs an exact backend".into())),
        };
        if count.is_zero() {
            return Err(ArithError::PoleAtZero.into());
        }
        Ok(count)
    }
}

impl<S: Scalar + Serialize> Serialize for ReductionTrace<S> {
    fn serialize<Ser: serde::Serializer>(&self, serializer: Ser) -> Result<Ser::Ok, Ser::Error> {
        use serde::ser::SerializeSeq;
        let mut seq = serializer.serialize_seq(Some(self.levels.len()))?;
        for level in self.levels.iter().rev() {
            let k = level.grid.order();
            let rows: Vec<&[S]> = level.factors.chunks(k).collect();
            seq.serialize_element(&serde_json::json!({
                "order": k,
                "cells": serde_json::to_value(&level.grid).map_err(serde::ser::Error::custom)?["cells"],
                "factors": serde_json::to_value(rows).map_err(serde::ser::Error::custom)?,
            }))?;
        }
        seq.end()
    }
}

impl<'de, S: Scalar + Deserialize<'de>> Deserialize<'de> for ReductionTrace<S> {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct LevelFile<S> {
            order: usize,
            cells: Vec<Vec<CellWeights<S>>>,
            factors: Vec<Vec<S>>,
        }
        use serde::de::Error as _;
        let files = Vec::<LevelFile<S>>::deserialize(deserializer)?;
        let top = files.len();
        let mut levels = Vec::with_capacity(top);
        for (idx, file) in files.into_iter().rev().enumerate() {
            let k = idx + 1;
            let square = |lens: Vec<usize>| lens.len() == k && lens.iter().all(|&l| l == k);
            if file.order != k
                || !square(file.cells.iter().map(Vec::len).collect())
                || !square(file.factors.iter().map(Vec::len).collect())
            {
                return Err(D::Error::custom(format!("malformed trace level for order {k}")));
            }
            let grid = CellGrid::from_cells(k, file.cells.into_iter().flatten().collect()).map_err(D::Error::custom)?;
            levels.push(Level { grid, factors: file.factors.into_iter().flatten().collect() });
        }
        Ok(ReductionTrace { levels })
    }
}

/// Builds the trace for `g` on the requested backend.
///
/// The exact backend escalates to ε-fractions when a zero cell factor shows
/// up; the float backend refuses zero weights outright.
pub fn build_trace(g: &CellGrid<Rational>, backend: Backend, exec: Exec) -> Result<AnyTrace> {
    match backend {
        Backend::ExactRational => match reduce_trace_with(g, exec) {
            Ok(t) => Ok(AnyTrace::Exact(t)),
            Err(Error::ZeroCellFactor { .. }) => eps_trace(g, exec),
            Err(e) => Err(e),
        },
        Backend::ExactEps => eps_trace(g, exec),
        Backend::Float64 => {
            if let Some(idx) = g.cells().iter().position(|cw| cw.iter().any(|(_, w)| w.is_zero())) {
                let n = g.order();
                return Err(Error::ZeroWeight(format!(
                    "cell ({},{}) has a zero weight, which the float64 backend cannot handle",
                    idx / n + 1,
                    idx % n + 1
                )));
            }
            Ok(AnyTrace::Float(reduce_trace_with(&g.map(Rational::to_f64), exec)?))
        }
    }
}

/// Sum over perfect matchings of the product of edge weights.
///
/// Zero cell factors trigger a transparent rerun with every zero weight
/// replaced by ε. A weighting with no positive-weight matching yields
/// [`ArithError::PoleAtZero`].
pub fn count_matchings(g: &CellGrid<Rational>) -> Result<Rational> {
    let exec = Exec::default();
    build_trace(g, Backend::ExactRational, exec)?.with_refinement(exec, AnyTrace::exact_count)
}
