//! Generating functions for north-going bond probabilities of fortress-weighted
//! diamonds, as truncated series in `z` with Laurent coefficients in `x, y`.

use std::collections::BTreeMap;

use crate::arith::Rational;
use crate::diamond::{edge_vertices, CellSlot, EdgeRef};
use crate::error::{Error, Result};
use crate::probs::ProbGrid;
use crate::regions::rotate;

/// Sparse Laurent polynomial in `x, y`, keyed by exponent pair.
pub type Laurent = BTreeMap<(i32, i32), Rational>;

/// Series in `z` truncated after `z^max_z`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SeriesTable {
    slices: Vec<Laurent>,
}

impl SeriesTable {
    pub fn new(max_z: usize) -> Self {
        SeriesTable { slices: vec![Laurent::new(); max_z + 1] }
    }

    pub fn max_z(&self) -> usize {
        self.slices.len() - 1
    }

    /// Coefficient of `z^m`, empty past the truncation.
    pub fn slice(&self, m: usize) -> &Laurent {
        static EMPTY: Laurent = BTreeMap::new();
        self.slices.get(m).unwrap_or(&EMPTY)
    }

    pub fn coeff(&self, i: i32, j: i32, m: usize) -> Rational {
        self.slice(m).get(&(i, j)).cloned().unwrap_or_else(Rational::zero)
    }

    /// Nonzero terms as `(i, j, m, coefficient)`, by degree then exponents.
    pub fn terms(&self) -> impl Iterator<Item = (i32, i32, usize, &Rational)> {
        self.slices.iter().enumerate().flat_map(|(m, s)| s.iter().map(move |(&(i, j), c)| (i, j, m, c)))
    }

    /// Whether every term of `z^m` has `|i| + |j| <= m`.
    pub fn support_within_degree(&self) -> bool {
        self.terms().all(|(i, j, m, _)| (i.unsigned_abs() + j.unsigned_abs()) as usize <= m)
    }
}

fn accumulate(into: &mut Laurent, from: &Laurent, scale: &Rational, shift: (i32, i32)) {
    for (&(i, j), c) in from {
        let key = (i + shift.0, j + shift.1);
        let v = into.get(&key).cloned().unwrap_or_else(Rational::zero) + &(c * scale);
        if v.is_zero() {
            into.remove(&key);
        } else {
            into.insert(key, v);
        }
    }
}

/// `scale * (x + 1/x) * a` added into `into`.
fn add_x_pair(into: &mut Laurent, a: &Laurent, scale: &Rational) {
    accumulate(into, a, scale, (1, 0));
    accumulate(into, a, scale, (-1, 0));
}

fn add_y_pair(into: &mut Laurent, a: &Laurent, scale: &Rational) {
    accumulate(into, a, scale, (0, 1));
    accumulate(into, a, scale, (0, -1));
}

/// Net creation rates of the four cell classes.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassRates {
    pub e: SeriesTable,
    pub f: SeriesTable,
    pub g: SeriesTable,
    pub h: SeriesTable,
}

/// North-going bond series of the four cell classes.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassBonds {
    pub e: SeriesTable,
    pub f: SeriesTable,
    pub g: SeriesTable,
    pub h: SeriesTable,
}

fn check_t(t: &Rational) -> Result<()> {
    if t.is_zero() || t.is_negative() {
        return Err(Error::InvalidInput(format!("weight {t} must be positive")));
    }
    Ok(())
}

fn class_weights(t: &Rational) -> (Rational, Rational) {
    let t2 = t * t;
    let total = &t2 + &Rational::one();
    (&t2 / &total, &Rational::one() / &total)
}

/// Solves the rate recurrences through `z^n` by forward substitution.
pub fn solve_rates(t: &Rational, n: usize) -> Result<ClassRates> {
    check_t(t)?;
    let (heavy, light) = class_weights(t);
    let half = Rational::ratio(1, 2);
    let minus_one = Rational::integer(-1);
    let mut r =
        ClassRates { e: SeriesTable::new(n), f: SeriesTable::new(n), g: SeriesTable::new(n), h: SeriesTable::new(n) };
    let empty = Laurent::new();
    for m in 0..=n {
        let prev = |s: &SeriesTable| if m >= 1 { s.slices[m - 1].clone() } else { empty.clone() };
        let back = |s: &SeriesTable| if m >= 2 { s.slices[m - 2].clone() } else { empty.clone() };
        let (e1, f1, g1, h1) = (prev(&r.e), prev(&r.f), prev(&r.g), prev(&r.h));

        let mut e = Laurent::new();
        if m == 0 {
            e.insert((0, 0), Rational::one());
        }
        add_x_pair(&mut e, &g1, &heavy);
        add_y_pair(&mut e, &h1, &heavy);
        accumulate(&mut e, &back(&r.f), &minus_one, (0, 0));

        let mut f = Laurent::new();
        add_x_pair(&mut f, &h1, &light);
        add_y_pair(&mut f, &g1, &light);
        accumulate(&mut f, &back(&r.e), &minus_one, (0, 0));

        let mut g = Laurent::new();
        add_x_pair(&mut g, &f1, &half);
        add_y_pair(&mut g, &e1, &half);
        accumulate(&mut g, &back(&r.h), &minus_one, (0, 0));

        let mut h = Laurent::new();
        add_x_pair(&mut h, &e1, &half);
        add_y_pair(&mut h, &f1, &half);
        accumulate(&mut h, &back(&r.g), &minus_one, (0, 0));

        r.e.slices[m] = e;
        r.f.slices[m] = f;
        r.g.slices[m] = g;
        r.h.slices[m] = h;
    }
    Ok(r)
}

/// Solves the bond recurrences through the rates' truncation.
pub fn solve_bonds(rates: &ClassRates, t: &Rational) -> Result<ClassBonds> {
    check_t(t)?;
    let n = rates.e.max_z();
    let (heavy, light) = class_weights(t);
    let half = Rational::ratio(1, 2);
    let one = Rational::one();
    let mut b =
        ClassBonds { e: SeriesTable::new(n), f: SeriesTable::new(n), g: SeriesTable::new(n), h: SeriesTable::new(n) };
    for m in 1..=n {
        let mut e = Laurent::new();
        accumulate(&mut e, &b.h.slices[m - 1], &one, (0, 1));
        accumulate(&mut e, &rates.e.slices[m - 1], &half, (0, 0));
        let mut f = Laurent::new();
        accumulate(&mut f, &b.g.slices[m - 1], &one, (0, 1));
        accumulate(&mut f, &rates.f.slices[m - 1], &half, (0, 0));
        let mut g = Laurent::new();
        accumulate(&mut g, &b.e.slices[m - 1], &one, (0, 1));
        accumulate(&mut g, &rates.g.slices[m - 1], &heavy, (0, 0));
        let mut h = Laurent::new();
        accumulate(&mut h, &b.f.slices[m - 1], &one, (0, 1));
        accumulate(&mut h, &rates.h.slices[m - 1], &light, (0, 0));
        b.e.slices[m] = e;
        b.f.slices[m] = f;
        b.g.slices[m] = g;
        b.h.slices[m] = h;
    }
    Ok(b)
}

/// `z (E + F + G + H)`, truncated after `z^(n + 1)`.
pub fn assemble(bonds: &ClassBonds) -> SeriesTable {
    let n = bonds.e.max_z();
    let mut p = SeriesTable::new(n + 1);
    let one = Rational::one();
    for m in 0..=n {
        for s in [&bonds.e, &bonds.f, &bonds.g, &bonds.h] {
            accumulate(&mut p.slices[m + 1], &s.slices[m], &one, (0, 0));
        }
    }
    p
}

/// The bond generating function for weight `t`, through the order-`n`
/// diamond.
pub fn generating_function(t: &Rational, n: usize) -> Result<SeriesTable> {
    Ok(assemble(&solve_bonds(&solve_rates(t, n)?, t)?))
}

/// The slice of the generating function holding the order-`n` diamond.
pub fn diamond_slice(p: &SeriesTable, n: usize) -> &Laurent {
    p.slice(n + 1)
}

/// North-going horizontal bonds of an order-`n` diamond in the rotated
/// frame, keyed by the bond's right endpoint; only bonds with `i + j + n`
/// odd are included.
pub fn north_bonds(n: usize) -> Vec<((i32, i32), EdgeRef)> {
    let mut out = Vec::new();
    for r in 1..=n {
        for c in 1..=n {
            for slot in CellSlot::ALL {
                let e = EdgeRef::new(r, c, slot);
                let (p, q) = edge_vertices(n, e).expect("edge of the diamond");
                let ((i1, j1), (i2, j2)) = (rotate(p), rotate(q));
                if j1 == j2 && (i1.max(i2) + j1 + n as i32).rem_euclid(2) == 1 {
                    out.push(((i1.max(i2), j1), e));
                }
            }
        }
    }
    out.sort_unstable();
    out
}

/// North-going bond probabilities read off an edge probability grid, with
/// zero entries dropped to match the sparse series.
pub fn north_bond_probabilities(probs: &ProbGrid<Rational>) -> Laurent {
    north_bonds(probs.order())
        .into_iter()
        .map(|(key, e)| (key, probs.get(e.r, e.c, e.slot).clone()))
        .filter(|(_, p)| !p.is_zero())
        .collect()
}
