//! Edge-inclusion probabilities by the backward sweep over a reduction trace.

use serde::ser::SerializeStruct;
use serde::Serialize;

use crate::arith::{Rational, Scalar};
use crate::diamond::{CellSlot, CellWeights};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::reduce::{AnyTrace, ReductionTrace};

/// Per-slot probabilities for every cell of one order, slots indexed
/// `NW, NE, SW, SE`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbGrid<V> {
    order: usize,
    values: Vec<[V; 4]>,
}

impl<V: Clone> ProbGrid<V> {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn cell(&self, r: usize, c: usize) -> &[V; 4] {
        &self.values[(r - 1) * self.order + (c - 1)]
    }

    pub fn get(&self, r: usize, c: usize, slot: CellSlot) -> &V {
        &self.cell(r, c)[slot.index()]
    }

    /// `(r, c, slot, value)` in row-major cell order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, CellSlot, &V)> {
        let n = self.order;
        self.values.iter().enumerate().flat_map(move |(idx, vals)| {
            CellSlot::ALL.into_iter().map(move |s| (idx / n + 1, idx % n + 1, s, &vals[s.index()]))
        })
    }

    pub fn try_map<T, E>(&self, mut f: impl FnMut(&V) -> Result<T, E>) -> Result<ProbGrid<T>, E> {
        let values =
            self.values.iter().map(|[a, b, c, d]| Ok([f(a)?, f(b)?, f(c)?, f(d)?])).collect::<Result<_, E>>()?;
        Ok(ProbGrid { order: self.order, values })
    }
}

impl<V: Clone + std::fmt::Display> ProbGrid<V> {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("r,c,slot,p\n");
        for (r, c, s, p) in self.entries() {
            out.push_str(&format!("{r},{c},{s},{p}\n"));
        }
        out
    }
}

impl<V: Clone + Serialize> Serialize for ProbGrid<V> {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Entry<'a, V> {
            r: usize,
            c: usize,
            slot: CellSlot,
            p: &'a V,
        }
        let entries: Vec<Entry<V>> = self.entries().map(|(r, c, slot, p)| Entry { r, c, slot, p }).collect();
        let mut st = serializer.serialize_struct("ProbGrid", 2)?;
        st.serialize_field("order", &self.order)?;
        st.serialize_field("probabilities", &entries)?;
        st.end()
    }
}

/// Placed (pre-swap) values on the order-`k` cell `(r, c)`, read from the
/// order-`(k-1)` probabilities; cells outside the smaller diamond give 0.
fn placed<S: Scalar>(small: Option<&ProbGrid<S>>, r: usize, c: usize) -> [S; 4] {
    let Some(small) = small else {
        return [S::zero(), S::zero(), S::zero(), S::zero()];
    };
    let m = small.order;
    let at = |rr: usize, cc: usize, slot: CellSlot| {
        if (1..=m).contains(&rr) && (1..=m).contains(&cc) {
            small.get(rr, cc, slot).clone()
        } else {
            S::zero()
        }
    };
    [
        at(r.wrapping_sub(1), c.wrapping_sub(1), CellSlot::SE),
        at(r.wrapping_sub(1), c, CellSlot::SW),
        at(r, c.wrapping_sub(1), CellSlot::NE),
        at(r, c, CellSlot::NW),
    ]
}

/// Exact values for one cell: each slot takes the placed value from the
/// opposite slot plus deficit times creation bias.
fn correct_cell<S: Scalar>(pre: &[S; 4], cw: &CellWeights<S>, factor: &S) -> Result<[S; 4]> {
    let deficit = pre.iter().fold(S::one(), |acc, p| acc.minus(p));
    let wz = cw.w.times(&cw.z).over(factor)?.times(&deficit);
    let xy = cw.x.times(&cw.y).over(factor)?.times(&deficit);
    Ok([pre[3].plus(&wz), pre[2].plus(&xy), pre[1].plus(&xy), pre[0].plus(&wz)])
}

fn sweep_step<S: Scalar>(
    trace: &ReductionTrace<S>,
    small: Option<&ProbGrid<S>>,
    k: usize,
    exec: Exec,
) -> Result<ProbGrid<S>> {
    let grid = trace.grid(k);
    let values = exec.try_map_range(k * k, |idx| {
        let (r, c) = (idx / k + 1, idx % k + 1);
        correct_cell(&placed(small, r, c), grid.cell(r, c), trace.factor(k, r, c))
    })?;
    Ok(ProbGrid { order: k, values })
}

/// Probabilities at every order `1..=n`, still in the trace's scalar type.
pub fn prob_levels<S: Scalar>(trace: &ReductionTrace<S>, exec: Exec) -> Result<Vec<ProbGrid<S>>> {
    let mut out: Vec<ProbGrid<S>> = Vec::with_capacity(trace.order());
    for k in 1..=trace.order() {
        let next = sweep_step(trace, out.last(), k, exec)?;
        out.push(next);
    }
    Ok(out)
}

/// Edge-inclusion probabilities of the top-order graph, after ε-limits.
pub fn prob_sweep<S: Scalar>(trace: &ReductionTrace<S>, exec: Exec) -> Result<ProbGrid<S::Value>> {
    let mut current: Option<ProbGrid<S>> = None;
    for k in 1..=trace.order() {
        current = Some(sweep_step(trace, current.as_ref(), k, exec)?);
    }
    match current {
        Some(top) => Ok(top.try_map(|v| v.limit())?),
        None => Ok(ProbGrid { order: 0, values: Vec::new() }),
    }
}

/// Probabilities on an exact or a float backend.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum AnyProbs {
    Exact(ProbGrid<Rational>),
    Float(ProbGrid<f64>),
}

impl AnyProbs {
    pub fn to_csv(&self) -> String {
        match self {
            AnyProbs::Exact(p) => p.to_csv(),
            AnyProbs::Float(p) => p.to_csv(),
        }
    }

    pub fn as_f64(&self) -> ProbGrid<f64> {
        match self {
            AnyProbs::Exact(p) => p.try_map(|v| Ok::<_, Error>(v.to_f64())).expect("infallible"),
            AnyProbs::Float(p) => p.clone(),
        }
    }
}

/// Edge probabilities on the trace's backend; ε traces are refined as
/// needed until every limit is known.
pub fn prob_sweep_any(trace: &AnyTrace, exec: Exec) -> Result<AnyProbs> {
    trace.with_refinement(exec, |t| {
        Ok(match t {
            AnyTrace::Exact(t) => AnyProbs::Exact(prob_sweep(t, exec)?),
            AnyTrace::Eps(t) => AnyProbs::Exact(prob_sweep(t, exec)?),
            AnyTrace::Float(t) => AnyProbs::Float(prob_sweep(t, exec)?),
        })
    })
}

/// Which of the four ports of a renewed city are matched into the city.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PatternClass {
    All,
    AB,
    AC,
    BD,
    CD,
    Empty,
}

impl PatternClass {
    pub const ALL: [PatternClass; 6] = [
        PatternClass::All,
        PatternClass::AB,
        PatternClass::AC,
        PatternClass::BD,
        PatternClass::CD,
        PatternClass::Empty,
    ];
}

/// Probabilities of the six possible inward-matching patterns of a city.
#[derive(Debug, Clone, PartialEq)]
pub struct CellLocalPattern<S> {
    pub all: S,
    pub ab: S,
    pub ac: S,
    pub bd: S,
    pub cd: S,
    pub empty: S,
}

impl<S: Scalar> CellLocalPattern<S> {
    pub fn get(&self, class: PatternClass) -> &S {
        match class {
            PatternClass::All => &self.all,
            PatternClass::AB => &self.ab,
            PatternClass::AC => &self.ac,
            PatternClass::BD => &self.bd,
            PatternClass::CD => &self.cd,
            PatternClass::Empty => &self.empty,
        }
    }

    pub fn total(&self) -> S {
        PatternClass::ALL.iter().fold(S::zero(), |acc, &c| acc.plus(self.get(c)))
    }
}

fn require_nonzero<S: Scalar>(cw: &CellWeights<S>) -> Result<()> {
    match cw.iter().find(|(_, w)| w.is_zero()) {
        Some((slot, _)) => Err(Error::ZeroWeight(format!("city weight {slot} is zero"))),
        None => Ok(()),
    }
}

/// Local pattern probabilities of a renewed city from its edge probabilities
/// `[P, Q, R, S]` and weights `W, X, Y, Z` (slots `NW, NE, SW, SE`).
pub fn renewal_local_patterns<S: Scalar>(probs: &[S; 4], weights: &CellWeights<S>) -> Result<CellLocalPattern<S>> {
    require_nonzero(weights)?;
    let [p, q, r, s] = probs;
    let xy = weights.x.times(&weights.y);
    let wz = weights.w.times(&weights.z);
    let delta = xy.times(&p.times(s)).plus(&wz.times(&q.times(r)));
    let all = wz.plus(&xy).times(&delta).over(&wz.times(&xy))?;
    let by_xy = delta.over(&xy)?;
    let by_wz = delta.over(&wz)?;
    let empty = S::one().minus(p).minus(q).minus(r).minus(s).plus(&all);
    Ok(CellLocalPattern {
        all,
        ab: p.minus(&by_xy),
        ac: q.minus(&by_wz),
        bd: r.minus(&by_wz),
        cd: s.minus(&by_xy),
        empty,
    })
}

/// Edge probabilities `[p, q, r, s]` of a city before renewal, given the
/// pattern probabilities after renewal and the original city weights.
pub fn transfer_probability_through_renewal<S: Scalar>(
    pattern: &CellLocalPattern<S>,
    city: &CellWeights<S>,
) -> Result<[S; 4]> {
    require_nonzero(city)?;
    let wz = city.w.times(&city.z);
    let xy = city.x.times(&city.y);
    let factor = wz.plus(&xy);
    let bias_wz = wz.over(&factor)?.times(&pattern.empty);
    let bias_xy = xy.over(&factor)?.times(&pattern.empty);
    Ok([pattern.cd.plus(&bias_wz), pattern.bd.plus(&bias_xy), pattern.ac.plus(&bias_xy), pattern.ab.plus(&bias_wz)])
}
