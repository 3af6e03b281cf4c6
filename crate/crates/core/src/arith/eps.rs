use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{ArithError, Poly, Rational};

/// Relative precision, in terms, used when no operand asks for more.
pub const DEFAULT_PRECISION: u32 = 12;

/// A quantity in the formal infinitesimal ε, kept as a truncated Laurent
/// series with tracked precision.
///
/// The value is `Σ terms[i] ε^(low + i)` plus an unknown remainder of order
/// `ε^known_to`; `known_to = None` means the series is exact. Results keep at
/// most `precision` terms past their leading one. Precision lost to
/// cancellation is tracked, so a limit is either exact or refused with
/// [`ArithError::PrecisionExhausted`], never guessed.
#[derive(Clone)]
pub struct EpsScalar {
    low: i64,
    terms: Vec<Rational>,
    known_to: Option<i64>,
    precision: u32,
}

fn min_known(a: Option<i64>, b: Option<i64>) -> Option<i64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

fn effective(precision: u32) -> u32 {
    if precision == 0 {
        DEFAULT_PRECISION
    } else {
        precision
    }
}

impl EpsScalar {
    fn make(low: i64, mut terms: Vec<Rational>, mut known_to: Option<i64>, precision: u32) -> Self {
        if let Some(k) = known_to {
            terms.truncate((k - low).clamp(0, terms.len() as i64) as usize);
        }
        let lead = terms.iter().position(|c| !c.is_zero()).unwrap_or(terms.len());
        terms.drain(..lead);
        while terms.last().is_some_and(Rational::is_zero) {
            terms.pop();
        }
        let low = if terms.is_empty() { 0 } else { low + lead as i64 };
        let budget = effective(precision) as usize;
        if terms.len() > budget {
            terms.truncate(budget);
            known_to = min_known(known_to, Some(low + budget as i64));
        }
        EpsScalar { low, terms, known_to, precision }
    }

    fn budget(&self, rhs: &Self) -> u32 {
        self.precision.max(rhs.precision)
    }

    pub fn zero() -> Self {
        EpsScalar { low: 0, terms: Vec::new(), known_to: None, precision: 0 }
    }

    pub fn one() -> Self {
        EpsScalar::from_rational(Rational::one())
    }

    /// The infinitesimal itself.
    pub fn eps() -> Self {
        EpsScalar::make(1, vec![Rational::one()], None, 0)
    }

    pub fn from_rational(r: Rational) -> Self {
        EpsScalar::make(0, vec![r], None, 0)
    }

    pub fn from_poly(p: Poly) -> Self {
        EpsScalar::make(0, p.coeffs().to_vec(), None, 0)
    }

    pub fn from_parts(num: Poly, den: Poly) -> Result<Self, ArithError> {
        EpsScalar::from_poly(num).div(&EpsScalar::from_poly(den))
    }

    /// The same value with a different term budget for later results.
    pub fn with_precision(mut self, precision: u32) -> Self {
        self.precision = precision;
        self
    }

    pub fn precision(&self) -> u32 {
        effective(self.precision)
    }

    /// Exponent below which every coefficient is known; `None` when exact.
    pub fn known_to(&self) -> Option<i64> {
        self.known_to
    }

    /// Exponent of the leading known term.
    pub fn valuation(&self) -> Option<i64> {
        (!self.terms.is_empty()).then_some(self.low)
    }

    /// Coefficient of `ε^k`, if known.
    pub fn coeff(&self, k: i64) -> Option<Rational> {
        if self.known_to.is_some_and(|m| k >= m) {
            return None;
        }
        let i = k - self.low;
        Some(if (0..self.terms.len() as i64).contains(&i) { self.terms[i as usize].clone() } else { Rational::zero() })
    }

    /// True only for an exact zero.
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty() && self.known_to.is_none()
    }

    /// Returns the plain rational value when the series is exact and has no ε.
    pub fn as_rational(&self) -> Option<Rational> {
        match (self.known_to, self.terms.len(), self.low) {
            (None, 0, _) => Some(Rational::zero()),
            (None, 1, 0) => Some(self.terms[0].clone()),
            _ => None,
        }
    }

    /// Leading order: the valuation, or the precision bound of an unknown
    /// value, or `None` for an exact zero.
    fn order(&self) -> Option<i64> {
        self.valuation().or(self.known_to)
    }

    pub fn add(&self, rhs: &Self) -> Self {
        if self.is_zero() {
            return rhs.clone().with_precision(self.budget(rhs));
        }
        if rhs.is_zero() {
            return self.clone().with_precision(self.budget(rhs));
        }
        let known_to = min_known(self.known_to, rhs.known_to);
        let low = match (self.valuation(), rhs.valuation()) {
            (Some(a), Some(b)) => a.min(b),
            (a, b) => a.or(b).unwrap_or(0),
        };
        let high = (self.low + self.terms.len() as i64).max(rhs.low + rhs.terms.len() as i64);
        let mut terms = vec![Rational::zero(); (high - low).max(0) as usize];
        for s in [self, rhs] {
            for (i, c) in s.terms.iter().enumerate() {
                let at = (s.low + i as i64 - low) as usize;
                terms[at] = &terms[at] + c;
            }
        }
        EpsScalar::make(low, terms, known_to, self.budget(rhs))
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.neg())
    }

    pub fn neg(&self) -> Self {
        EpsScalar { terms: self.terms.iter().map(|c| -c.clone()).collect(), ..self.clone() }
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        let budget = self.budget(rhs);
        let (Some(va), Some(vb)) = (self.order(), rhs.order()) else {
            return EpsScalar::zero().with_precision(budget);
        };
        let known_to = min_known(self.known_to.map(|k| k + vb), rhs.known_to.map(|k| k + va));
        if self.terms.is_empty() || rhs.terms.is_empty() {
            return EpsScalar::make(0, Vec::new(), known_to, budget);
        }
        let cap = self.terms.len() + rhs.terms.len() - 1;
        let keep = cap.min(effective(budget) as usize);
        let mut terms = vec![Rational::zero(); keep];
        for (i, a) in self.terms.iter().enumerate().take(keep) {
            for (j, b) in rhs.terms.iter().enumerate().take(keep - i) {
                terms[i + j] = &terms[i + j] + &(a * b);
            }
        }
        let known_to = if keep < cap { min_known(known_to, Some(self.low + rhs.low + keep as i64)) } else { known_to };
        EpsScalar::make(self.low + rhs.low, terms, known_to, budget)
    }

    pub fn div(&self, rhs: &Self) -> Result<Self, ArithError> {
        if rhs.is_zero() {
            return Err(ArithError::DivisionByZero);
        }
        let Some(vb) = rhs.valuation() else {
            return Err(ArithError::PrecisionExhausted);
        };
        let budget = self.budget(rhs);
        if self.is_zero() {
            return Ok(EpsScalar::zero().with_precision(budget));
        }
        let Some(va) = self.valuation() else {
            return Ok(EpsScalar::make(0, Vec::new(), self.known_to.map(|k| k - vb), budget));
        };
        let rel_b = rhs.known_to.map(|k| k - vb);
        let rel_a = self.known_to.map(|k| k - va);
        let lead = &rhs.terms[0];
        if rhs.terms.len() == 1 && rel_b.is_none() {
            let terms = self.terms.iter().map(|c| c / lead).collect();
            return Ok(EpsScalar::make(va - vb, terms, self.known_to.map(|k| k - vb), budget));
        }
        let rel = min_known(min_known(rel_a, rel_b), Some(effective(budget) as i64)).expect("bounded").max(0);
        let mut q: Vec<Rational> = Vec::with_capacity(rel as usize);
        for k in 0..rel as usize {
            let mut acc = self.terms.get(k).cloned().unwrap_or_else(Rational::zero);
            for j in 1..=k.min(rhs.terms.len() - 1) {
                acc = acc - &(&rhs.terms[j] * &q[k - j]);
            }
            q.push(&acc / lead);
        }
        Ok(EpsScalar::make(va - vb, q, Some(va - vb + rel), budget))
    }

    /// Value at ε → 0.
    pub fn limit0(&self) -> Result<Rational, ArithError> {
        if self.valuation().is_some_and(|v| v < 0) {
            return Err(ArithError::PoleAtZero);
        }
        self.coeff(0).ok_or(ArithError::PrecisionExhausted)
    }
}

impl PartialEq for EpsScalar {
    /// Agreement on every coefficient both sides know.
    fn eq(&self, other: &Self) -> bool {
        let bound = min_known(self.known_to, other.known_to);
        let from = self.low.min(other.low);
        let to = (self.low + self.terms.len() as i64).max(other.low + other.terms.len() as i64);
        let to = bound.map_or(to, |b| b.min(to));
        (from..to).all(|k| self.coeff(k) == other.coeff(k))
    }
}

impl fmt::Display for EpsScalar {
    /// Ascending terms such as `1/2 - 3*e + e^2`, with a trailing `O(e^k)`
    /// when the series is truncated.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in self.terms.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let k = self.low + i as i64;
            let negative = c.is_negative();
            let mag = c.abs();
            match (first, negative) {
                (true, true) => write!(f, "-")?,
                (false, true) => write!(f, " - ")?,
                (false, false) => write!(f, " + ")?,
                (true, false) => {}
            }
            first = false;
            let var = match k {
                0 => String::new(),
                1 => "e".to_string(),
                k => format!("e^{k}"),
            };
            match (var.is_empty(), mag.is_one()) {
                (true, _) => write!(f, "{mag}")?,
                (false, true) => write!(f, "{var}")?,
                (false, false) => write!(f, "{mag}*{var}")?,
            }
        }
        match (self.known_to, first) {
            (Some(k), true) => write!(f, "O(e^{k})"),
            (Some(k), false) => write!(f, " + O(e^{k})"),
            (None, true) => write!(f, "0"),
            (None, false) => Ok(()),
        }
    }
}

impl fmt::Debug for EpsScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

fn parse_term(term: &str) -> Option<(Rational, i64)> {
    let (coeff, var) = match term.find('e') {
        Some(pos) => {
            let (c, v) = term.split_at(pos);
            let c = match c.strip_suffix('*') {
                Some(c) if !c.is_empty() => c,
                Some(_) => return None,
                None if c.is_empty() => "1",
                None => return None,
            };
            (c, Some(v))
        }
        None => (term, None),
    };
    let power = match var {
        None => 0,
        Some("e") => 1,
        Some(v) => v.strip_prefix("e^")?.parse().ok()?,
    };
    Some((coeff.parse().ok()?, power))
}

impl FromStr for EpsScalar {
    type Err = ArithError;

    /// Accepts the display form, and `(p)/(q)` for polynomials `p`, `q`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ArithError::Parse(format!("not a series in e: {s:?}"));
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if let Some(rest) = compact.strip_prefix('(') {
            let (num, rest) = rest.split_once(')').ok_or_else(bad)?;
            let den = rest.strip_prefix("/(").and_then(|d| d.strip_suffix(')')).ok_or_else(bad)?;
            return EpsScalar::from_parts(num.parse()?, den.parse()?);
        }
        let mut pieces: Vec<(bool, String)> = Vec::new();
        let mut current = String::new();
        let mut negative = false;
        for (idx, ch) in compact.char_indices() {
            if (ch == '+' || ch == '-') && !compact[..idx].ends_with('^') && idx > 0 {
                if current.is_empty() {
                    return Err(bad());
                }
                pieces.push((negative, std::mem::take(&mut current)));
                negative = ch == '-';
            } else if ch == '-' && idx == 0 {
                negative = true;
            } else {
                current.push(ch);
            }
        }
        if current.is_empty() {
            return Err(bad());
        }
        pieces.push((negative, current));
        let mut known_to = None;
        let mut parsed = Vec::new();
        for (negative, piece) in pieces {
            if let Some(inner) = piece.strip_prefix("O(").and_then(|p| p.strip_suffix(')')) {
                let k: i64 = inner.strip_prefix("e^").and_then(|k| k.parse().ok()).ok_or_else(bad)?;
                known_to = min_known(known_to, Some(k));
                continue;
            }
            let (c, k) = parse_term(&piece).ok_or_else(bad)?;
            parsed.push((if negative { -c } else { c }, k));
        }
        let low = parsed.iter().map(|&(_, k)| k).min().unwrap_or(0);
        let high = parsed.iter().map(|&(_, k)| k).max().unwrap_or(0);
        let mut terms = vec![Rational::zero(); (high - low + 1) as usize];
        for (c, k) in parsed {
            let at = (k - low) as usize;
            terms[at] = &terms[at] + &c;
        }
        let width = (terms.len() as u32).max(known_to.map_or(0, |k| (k - low).max(0) as u32));
        let precision = if width > DEFAULT_PRECISION { width } else { 0 };
        Ok(EpsScalar::make(low, terms, known_to, precision))
    }
}

impl Serialize for EpsScalar {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for EpsScalar {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(s: &str) -> EpsScalar {
        s.parse().unwrap()
    }

    #[test]
    fn limit_examples() {
        assert_eq!(e("(2*e + e^2)/(e)").limit0().unwrap(), Rational::integer(2));
        assert_eq!(e("(e^2)/(3 + e)").limit0().unwrap(), Rational::zero());
        assert_eq!(e("(1 + e)/(e)").limit0(), Err(ArithError::PoleAtZero));
    }

    #[test]
    fn cancellation_and_identity() {
        let sum = e("1 + e").add(&EpsScalar::from_rational(Rational::integer(-1)));
        assert_eq!(sum, EpsScalar::eps());
        assert_eq!(sum.to_string(), "e");
        assert_eq!(sum.known_to(), None);
        let eps = EpsScalar::eps();
        assert_eq!(eps.div(&eps).unwrap(), EpsScalar::one());
        assert!(eps.div(&eps).unwrap().known_to().is_none());
        assert!(eps.div(&EpsScalar::zero()).is_err());
    }

    #[test]
    fn text_round_trip() {
        for s in
            ["0", "3/4", "e", "1 - e^2", "-2*e^-1 + 3", "(1)/(1 + e)", "(2 + e)/(3 + 2*e)", "O(e^3)", "1/2 + O(e^2)"]
        {
            let x = e(s);
            let back = e(&x.to_string());
            assert_eq!(back, x, "{s}");
            assert_eq!(back.known_to(), x.known_to(), "{s}");
        }
        assert_eq!(e("(e)/(2*e)").to_string(), "1/2");
        assert_eq!(
            e("(1)/(1 - e)").to_string(),
            format!("1 + e + e^2 + e^3 + e^4 + e^5 + e^6 + e^7 + e^8 + e^9 + e^10 + e^11 + O(e^12)")
        );
        assert!("(1)/(0)".parse::<EpsScalar>().is_err());
        assert!("(1/(2)".parse::<EpsScalar>().is_err());
        assert!("1 +".parse::<EpsScalar>().is_err());
    }

    #[test]
    fn cancellation_consumes_precision() {
        let a = e("(1)/(1 - e)");
        let b = e("1 + e");
        let d = a.sub(&b);
        assert_eq!(d.valuation(), Some(2));
        assert_eq!(d.known_to(), Some(DEFAULT_PRECISION as i64));
        let scaled = d.div(&EpsScalar::eps().mul(&EpsScalar::eps())).unwrap();
        assert_eq!(scaled.limit0().unwrap(), Rational::one());
        let far =
            EpsScalar::make(0, Vec::new(), Some(2), 0).div(&EpsScalar::from_poly("e^3".parse().unwrap())).unwrap();
        assert_eq!(far.limit0(), Err(ArithError::PrecisionExhausted));
    }

    #[test]
    fn budget_propagates() {
        let wide = EpsScalar::from_rational(Rational::one()).with_precision(40);
        let x = wide.div(&e("1 - e")).unwrap();
        assert_eq!(x.known_to(), Some(40));
        assert_eq!(x.mul(&EpsScalar::eps()).known_to(), Some(41));
    }
}
