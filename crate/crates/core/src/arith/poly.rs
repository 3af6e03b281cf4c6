use std::fmt;

use super::{ArithError, Rational};

/// Dense univariate polynomial in ε with rational coefficients, lowest degree
/// first. The coefficient vector never has trailing zeros, so the zero
/// polynomial is the empty vector.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    coeffs: Vec<Rational>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn constant(c: Rational) -> Self {
        Poly::from_coeffs(vec![c])
    }

    /// The monomial `c * e^k`.
    pub fn monomial(c: Rational, k: usize) -> Self {
        let mut coeffs = vec![Rational::zero(); k];
        coeffs.push(c);
        Poly::from_coeffs(coeffs)
    }

    pub fn from_coeffs(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(Rational::is_zero) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> Rational {
        self.coeffs.get(k).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree of the polynomial; `None` for zero.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Index of the lowest nonzero coefficient; `None` for zero.
    pub fn valuation(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    pub fn lowest_coeff(&self) -> Option<&Rational> {
        self.valuation().map(|v| &self.coeffs[v])
    }

    pub fn leading_coeff(&self) -> Option<&Rational> {
        self.coeffs.last()
    }

    pub fn add(&self, rhs: &Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poly::from_coeffs((0..n).map(|k| self.coeff(k) + rhs.coeff(k)).collect())
    }

    pub fn sub(&self, rhs: &Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poly::from_coeffs((0..n).map(|k| self.coeff(k) - rhs.coeff(k)).collect())
    }

    pub fn neg(&self) -> Poly {
        Poly { coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }

    pub fn mul(&self, rhs: &Poly) -> Poly {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![Rational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] = &out[i + j] + &(a * b);
            }
        }
        Poly::from_coeffs(out)
    }

    pub fn scale(&self, c: &Rational) -> Poly {
        Poly::from_coeffs(self.coeffs.iter().map(|a| a * c).collect())
    }

    /// Drop the lowest `k` coefficients, i.e. divide by `e^k`. The caller
    /// guarantees they are zero.
    pub fn shift_down(&self, k: usize) -> Poly {
        debug_assert!(self.coeffs.iter().take(k).all(Rational::is_zero));
        Poly::from_coeffs(self.coeffs.iter().skip(k).cloned().collect())
    }

    /// Euclidean division: returns `(q, r)` with `self = q * rhs + r` and
    /// `deg r < deg rhs`.
    pub fn div_rem(&self, rhs: &Poly) -> Result<(Poly, Poly), ArithError> {
        let d = rhs.degree().ok_or(ArithError::DivisionByZero)?;
        let lead = rhs.coeffs[d].clone();
        let mut rem = self.coeffs.clone();
        let mut quot = vec![Rational::zero(); self.coeffs.len().saturating_sub(d)];
        while rem.len() > d {
            let top = rem.len() - 1;
            let c = rem[top].checked_div(&lead)?;
            let shift = top - d;
            if !c.is_zero() {
                for (k, b) in rhs.coeffs.iter().enumerate() {
                    rem[shift + k] = &rem[shift + k] - &(&c * b);
                }
            }
            quot[shift] = c;
            rem.pop();
            while rem.last().is_some_and(Rational::is_zero) {
                rem.pop();
            }
        }
        Ok((Poly::from_coeffs(quot), Poly::from_coeffs(rem)))
    }

    /// Monic greatest common divisor. `gcd(0, 0) = 0`.
    pub fn gcd(&self, rhs: &Poly) -> Poly {
        let (mut a, mut b) = (self.monic(), rhs.monic());
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b).expect("nonzero divisor");
            a = b;
            b = r.monic();
        }
        match a.leading_coeff() {
            Some(lead) => {
                let inv = lead.recip().expect("nonzero leading coefficient");
                a.scale(&inv)
            }
            None => a,
        }
    }

    fn monic(&self) -> Poly {
        match self.leading_coeff() {
            Some(lead) if !lead.is_one() => self.scale(&lead.recip().expect("nonzero leading coefficient")),
            _ => self.clone(),
        }
    }

    pub fn eval(&self, at: &Rational) -> Rational {
        self.coeffs.iter().rev().fold(Rational::zero(), |acc, c| acc * at + c)
    }
}

impl fmt::Display for Poly {
    /// Ascending-degree text, e.g. `1/2 - 3*e + e^2`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else if c.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            first = false;
            match (k, mag.is_one()) {
                (0, _) => write!(f, "{mag}")?,
                (1, true) => write!(f, "e")?,
                (1, false) => write!(f, "{mag}*e")?,
                (_, true) => write!(f, "e^{k}")?,
                (_, false) => write!(f, "{mag}*e^{k}")?,
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl std::str::FromStr for Poly {
    type Err = ArithError;

    /// Parses sums of terms `c`, `c*e`, `c*e^k`, `e`, `e^k`, each with an
    /// optional sign. Coefficients are rationals `p` or `p/q`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ArithError::Parse(format!("not a polynomial in e: {s:?}"));
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() {
            return Err(bad());
        }
        let mut terms: Vec<(bool, String)> = Vec::new();
        let mut current = String::new();
        let mut negative = false;
        for (idx, ch) in compact.char_indices() {
            if (ch == '+' || ch == '-') && !compact[..idx].ends_with('^') {
                if idx > 0 {
                    if current.is_empty() {
                        return Err(bad());
                    }
                    terms.push((negative, std::mem::take(&mut current)));
                }
                negative = ch == '-';
            } else {
                current.push(ch);
            }
        }
        if current.is_empty() {
            return Err(bad());
        }
        terms.push((negative, current));

        let mut out = Poly::zero();
        for (negative, term) in terms {
            let (coeff, power) = parse_term(&term).ok_or_else(bad)?;
            let coeff = if negative { -coeff } else { coeff };
            out = out.add(&Poly::monomial(coeff, power));
        }
        Ok(out)
    }
}

fn parse_term(term: &str) -> Option<(Rational, usize)> {
    let (coeff_text, var_text) = match term.find('e') {
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
    let coeff: Rational = coeff_text.parse().ok()?;
    let power = match var_text {
        None => 0,
        Some("e") => 1,
        Some(v) => v.strip_prefix("e^")?.parse::<usize>().ok()?,
    };
    Some((coeff, power))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Poly {
        s.parse().unwrap()
    }

    #[test]
    fn text_round_trip() {
        for s in ["0", "1", "-1/2", "e", "-e", "1 + e", "3 - 2*e + 1/3*e^4", "e^2"] {
            let q = p(s);
            assert_eq!(p(&q.to_string()), q, "{s}");
        }
        assert_eq!(p("1+e").to_string(), "1 + e");
        assert_eq!(p("2*e - 3").to_string(), "-3 + 2*e");
        assert!("1 + ".parse::<Poly>().is_err());
        assert!("x".parse::<Poly>().is_err());
        assert!("*e".parse::<Poly>().is_err());
    }

    #[test]
    fn division_and_gcd() {
        // (e+1)(e+2) and (e+1)(e-3)
        let a = p("2 + 3*e + e^2");
        let b = p("-3 - 2*e + e^2");
        assert_eq!(a.gcd(&b), p("1 + e"));
        let (q, r) = a.div_rem(&p("1 + e")).unwrap();
        assert_eq!(q, p("2 + e"));
        assert!(r.is_zero());
        assert!(a.div_rem(&Poly::zero()).is_err());
    }

    #[test]
    fn valuation_and_eval() {
        let a = p("e^2 + 3*e^5");
        assert_eq!(a.valuation(), Some(2));
        assert_eq!(a.degree(), Some(5));
        assert_eq!(a.eval(&Rational::integer(1)), Rational::integer(4));
        assert_eq!(Poly::zero().valuation(), None);
    }
}
