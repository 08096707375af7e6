//! Sparse multivariate polynomials under the graded reverse lexicographic order.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{Field, FieldElement, FieldKind, Value};

/// Name of the monomial order, recorded alongside serialized certificates.
pub const ORDER_NAME: &str = "grevlex";

/// An exponent vector.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Monomial(Box<[u16]>);

impl Monomial {
    pub fn one(n: usize) -> Monomial {
        Monomial(vec![0; n].into_boxed_slice())
    }

    pub fn var(n: usize, i: usize) -> Monomial {
        let mut e = vec![0; n];
        e[i] = 1;
        Monomial(e.into_boxed_slice())
    }

    pub fn from_exponents(e: Vec<u16>) -> Monomial {
        Monomial(e.into_boxed_slice())
    }

    pub fn exponents(&self) -> &[u16] {
        &self.0
    }

    pub fn nvars(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&e| e as u32).sum()
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn mul(&self, o: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(o.0.iter()).map(|(a, b)| a + b).collect())
    }

    pub fn mul_var(&self, i: usize) -> Monomial {
        let mut e = self.0.clone();
        e[i] += 1;
        Monomial(e)
    }

    pub fn divides(&self, o: &Monomial) -> bool {
        self.0.iter().zip(o.0.iter()).all(|(a, b)| a <= b)
    }

    /// Index of the last variable with a positive exponent.
    pub fn max_var(&self) -> Option<usize> {
        self.0.iter().rposition(|&e| e > 0)
    }

    pub fn format(&self, names: &[String]) -> String {
        let parts: Vec<String> = self
            .0
            .iter()
            .enumerate()
            .filter(|(_, &e)| e > 0)
            .map(|(i, &e)| if e == 1 { names[i].clone() } else { format!("{}^{}", names[i], e) })
            .collect();
        if parts.is_empty() {
            "1".into()
        } else {
            parts.join("*")
        }
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        match self.degree().cmp(&other.degree()) {
            Ordering::Equal => {
                for (a, b) in self.0.iter().zip(other.0.iter()).rev() {
                    if a != b {
                        // Smaller exponent in the last differing variable wins.
                        return b.cmp(a);
                    }
                }
                Ordering::Equal
            }
            o => o,
        }
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut r: u128 = 1;
    for i in 0..k {
        r = r * (n - i) as u128 / (i + 1) as u128;
    }
    r
}

/// Bijection between monomials in `n` variables and their position in the
/// ascending grevlex enumeration (so the constant monomial has rank 0).
#[derive(Clone, Debug)]
pub struct MonomialRanker {
    n: usize,
    /// `binom[a][b] = C(a, b)` for `a < rows`, `b <= n`.
    binom: Vec<Vec<u64>>,
    /// `cum[d]` = number of monomials of degree at most `d`.
    cum: Vec<u64>,
}

const RANKER_MAX_DEGREE: usize = 250;

impl MonomialRanker {
    pub fn new(n: usize) -> MonomialRanker {
        let rows = n + RANKER_MAX_DEGREE + 2;
        let mut binom = vec![vec![0u64; n + 1]; rows];
        for a in 0..rows {
            binom[a][0] = 1;
            for b in 1..=n.min(a) {
                binom[a][b] = binom[a - 1][b - 1].saturating_add(binom[a - 1][b]);
            }
        }
        let mut cum = Vec::with_capacity(RANKER_MAX_DEGREE + 1);
        for d in 0..=RANKER_MAX_DEGREE {
            cum.push(binom[n + d][n]);
        }
        MonomialRanker { n, binom, cum }
    }

    pub fn nvars(&self) -> usize {
        self.n
    }

    fn c(&self, a: i64, b: i64) -> u64 {
        if a < 0 || b < 0 || b > a {
            return 0;
        }
        self.binom[a as usize][b as usize]
    }

    /// Number of monomials of degree at most `d`.
    pub fn count_up_to(&self, d: i64) -> u64 {
        if d < 0 {
            0
        } else {
            self.cum[d as usize]
        }
    }

    pub fn rank_exps(&self, e: &[u16]) -> u64 {
        let n = self.n;
        let k: i64 = e.iter().map(|&x| x as i64).sum();
        let mut r = self.count_up_to(k - 1);
        let mut rem = k;
        for j in (1..n).rev() {
            let m = (j + 1) as i64;
            rem -= e[j] as i64;
            r += self.c(m - 2 + rem, m - 1);
        }
        r
    }

    pub fn rank(&self, m: &Monomial) -> u64 {
        self.rank_exps(&m.0)
    }

    pub fn degree_of(&self, r: u64) -> u32 {
        self.cum.partition_point(|&c| c <= r) as u32
    }

    pub fn unrank_into(&self, r: u64, e: &mut [u16]) {
        let n = self.n;
        let k = self.degree_of(r) as i64;
        let mut within = r - self.count_up_to(k - 1);
        let mut rem = k;
        for j in (1..n).rev() {
            let m = (j + 1) as i64;
            let mut x = 0i64;
            loop {
                let before = self.c(m - 2 + rem - x, m - 1);
                if before <= within {
                    within -= before;
                    break;
                }
                x += 1;
            }
            e[j] = x as u16;
            rem -= x;
        }
        e[0] = rem as u16;
    }

    pub fn unrank(&self, r: u64) -> Monomial {
        let mut e = vec![0u16; self.n];
        self.unrank_into(r, &mut e);
        Monomial(e.into_boxed_slice())
    }

    /// Rank of `x_i` times the monomial of rank `r`.
    pub fn mul_var(&self, r: u64, i: usize, scratch: &mut [u16]) -> u64 {
        self.unrank_into(r, scratch);
        scratch[i] += 1;
        self.rank_exps(scratch)
    }
}

/// All monomials of degree at most `d` in ascending grevlex order.
pub fn monomials_up_to(n: usize, d: u32) -> Vec<Monomial> {
    let r = MonomialRanker::new(n);
    (0..r.count_up_to(d as i64)).map(|i| r.unrank(i)).collect()
}

/// A sparse polynomial; zero coefficients are never stored.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Polynomial {
    field: Field,
    nvars: usize,
    terms: BTreeMap<Monomial, Value>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct TermJson {
    pub coeff: String,
    pub monomial: Vec<u16>,
}

impl Polynomial {
    pub fn zero(field: &Field, nvars: usize) -> Polynomial {
        Polynomial { field: field.clone(), nvars, terms: BTreeMap::new() }
    }

    pub fn constant(field: &Field, nvars: usize, c: Value) -> Polynomial {
        let mut p = Polynomial::zero(field, nvars);
        if !field.is_zero(&c) {
            p.terms.insert(Monomial::one(nvars), c);
        }
        p
    }

    pub fn one(field: &Field, nvars: usize) -> Polynomial {
        Polynomial::constant(field, nvars, field.one())
    }

    pub fn var(field: &Field, nvars: usize, i: usize) -> Polynomial {
        Polynomial::monomial(field, Monomial::var(nvars, i), field.one())
    }

    pub fn monomial(field: &Field, m: Monomial, c: Value) -> Polynomial {
        let mut p = Polynomial::zero(field, m.nvars());
        if !field.is_zero(&c) {
            p.terms.insert(m, c);
        }
        p
    }

    /// Builds a polynomial from terms, combining repeated monomials.
    pub fn from_terms<I: IntoIterator<Item = (Monomial, Value)>>(field: &Field, nvars: usize, terms: I) -> Polynomial {
        let mut p = Polynomial::zero(field, nvars);
        for (m, c) in terms {
            debug_assert_eq!(m.nvars(), nvars);
            p.add_term(m, c);
        }
        p
    }

    pub fn add_term(&mut self, m: Monomial, c: Value) {
        if self.field.is_zero(&c) {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(v) => {
                let s = self.field.add(v, &c);
                if self.field.is_zero(&s) {
                    self.terms.remove(&m);
                } else {
                    *v = s;
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree; -1 for the zero polynomial.
    pub fn degree(&self) -> i64 {
        self.terms.keys().next_back().map(|m| m.degree() as i64).unwrap_or(-1)
    }

    /// Terms in descending grevlex order.
    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Value)> {
        self.terms.iter().rev()
    }

    pub fn leading(&self) -> Option<(&Monomial, &Value)> {
        self.terms.iter().next_back()
    }

    pub fn coeff(&self, m: &Monomial) -> Value {
        self.terms.get(m).cloned().unwrap_or_else(|| self.field.zero())
    }

    fn compatible(&self, o: &Polynomial) -> Result<()> {
        if self.field != o.field {
            return Err(Error::FieldMismatch);
        }
        if self.nvars != o.nvars {
            return Err(Error::Arity(format!("{} vs {} variables", self.nvars, o.nvars)));
        }
        Ok(())
    }

    pub fn add(&self, o: &Polynomial) -> Result<Polynomial> {
        self.compatible(o)?;
        let mut r = self.clone();
        for (m, c) in &o.terms {
            r.add_term(m.clone(), c.clone());
        }
        Ok(r)
    }

    pub fn sub(&self, o: &Polynomial) -> Result<Polynomial> {
        self.compatible(o)?;
        let mut r = self.clone();
        for (m, c) in &o.terms {
            r.add_term(m.clone(), self.field.neg(c));
        }
        Ok(r)
    }

    pub fn neg(&self) -> Polynomial {
        let f = &self.field;
        Polynomial {
            field: f.clone(),
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), f.neg(c))).collect(),
        }
    }

    pub fn mul(&self, o: &Polynomial) -> Result<Polynomial> {
        self.compatible(o)?;
        let mut r = Polynomial::zero(&self.field, self.nvars);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &o.terms {
                r.add_term(m1.mul(m2), self.field.mul(c1, c2));
            }
        }
        Ok(r)
    }

    pub fn scale(&self, c: &FieldElement) -> Result<Polynomial> {
        if c.field() != &self.field {
            return Err(Error::FieldMismatch);
        }
        Ok(self.scale_value(c.value()))
    }

    pub fn scale_value(&self, c: &Value) -> Polynomial {
        let f = &self.field;
        if f.is_zero(c) {
            return Polynomial::zero(f, self.nvars);
        }
        Polynomial {
            field: f.clone(),
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, v)| (m.clone(), f.mul(v, c))).collect(),
        }
    }

    pub fn mul_monomial(&self, mono: &Monomial) -> Polynomial {
        Polynomial {
            field: self.field.clone(),
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, v)| (m.mul(mono), v.clone())).collect(),
        }
    }

    pub fn multiply_by_variable(&self, i: usize) -> Result<Polynomial> {
        if i >= self.nvars {
            return Err(Error::InvalidArgument(format!("variable index {i} out of range for {} variables", self.nvars)));
        }
        Ok(Polynomial {
            field: self.field.clone(),
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, v)| (m.mul_var(i), v.clone())).collect(),
        })
    }

    pub fn pow(&self, e: u32) -> Polynomial {
        let mut r = Polynomial::one(&self.field, self.nvars);
        for _ in 0..e {
            r = r.mul(self).expect("same ring");
        }
        r
    }

    /// Evaluates at a point. The point may live in an extension of a prime
    /// coefficient field of the same characteristic.
    pub fn evaluate(&self, point: &[FieldElement]) -> Result<FieldElement> {
        if point.len() != self.nvars {
            return Err(Error::Arity(format!("point of length {} for {} variables", point.len(), self.nvars)));
        }
        let target = match point.first() {
            Some(e) => e.field().clone(),
            None => self.field.clone(),
        };
        if point.iter().any(|e| e.field() != &target) {
            return Err(Error::FieldMismatch);
        }
        let embeds = target == self.field
            || (self.field.kind() == FieldKind::Prime
                && target.kind() == FieldKind::Extension
                && target.characteristic() == self.field.characteristic());
        if !embeds {
            return Err(Error::FieldMismatch);
        }
        let vals: Vec<Value> = point.iter().map(|e| e.value().clone()).collect();
        Ok(FieldElement::new(&target, self.evaluate_values(&target, &vals)))
    }

    /// Evaluation on raw values of `target`, which must be this polynomial's
    /// field or an extension of its prime coefficient field.
    pub fn evaluate_values(&self, target: &Field, point: &[Value]) -> Value {
        let mut acc = target.zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (i, &e) in m.exponents().iter().enumerate() {
                if e > 0 {
                    t = target.mul(&t, &target.pow(&point[i], e as u64));
                }
            }
            acc = target.add(&acc, &t);
        }
        acc
    }

    pub fn to_json(&self) -> Vec<TermJson> {
        self.terms()
            .map(|(m, c)| TermJson { coeff: self.field.format(c), monomial: m.exponents().to_vec() })
            .collect()
    }

    pub fn from_json(field: &Field, nvars: usize, terms: &[TermJson]) -> Result<Polynomial> {
        let mut p = Polynomial::zero(field, nvars);
        for t in terms {
            if t.monomial.len() != nvars {
                return Err(Error::Arity(format!("monomial of length {} for {nvars} variables", t.monomial.len())));
            }
            p.add_term(Monomial::from_exponents(t.monomial.clone()), field.parse(&t.coeff)?);
        }
        Ok(p)
    }

    pub fn format(&self, names: &[String]) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut out = String::new();
        for (i, (m, c)) in self.terms().enumerate() {
            let mut cs = self.field.format(c);
            let neg = cs.starts_with('-');
            if neg {
                cs.remove(0);
            }
            if i == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            if m.is_one() {
                out.push_str(&cs);
            } else {
                if cs != "1" {
                    out.push_str(&cs);
                    out.push('*');
                }
                out.push_str(&m.format(names));
            }
        }
        out
    }

    /// Parses an expression such as `x1^2 - 1/3*x1*x2 + 2`.
    pub fn parse(field: &Field, names: &[String], text: &str) -> Result<Polynomial> {
        let mut p = Parser { field, names, s: text.as_bytes(), pos: 0 };
        let r = p.expr()?;
        p.skip_ws();
        if p.pos != p.s.len() {
            return Err(Error::Parse(format!("unexpected input at offset {} in '{text}'", p.pos)));
        }
        Ok(r)
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.format(&default_names(self.nvars)))
    }
}

/// Names `x1, .., xn`.
pub fn default_names(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("x{i}")).collect()
}

struct Parser<'a> {
    field: &'a Field,
    names: &'a [String],
    s: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.pos).copied()
    }

    fn err(&self, what: &str) -> Error {
        Error::Parse(format!("{what} at offset {}", self.pos))
    }

    fn expr(&mut self) -> Result<Polynomial> {
        let n = self.names.len();
        let mut acc = Polynomial::zero(self.field, n);
        let mut sign = match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                -1
            }
            Some(b'+') => {
                self.pos += 1;
                1
            }
            _ => 1,
        };
        loop {
            let t = self.term()?;
            acc = if sign < 0 { acc.sub(&t)? } else { acc.add(&t)? };
            match self.peek() {
                Some(b'+') => sign = 1,
                Some(b'-') => sign = -1,
                _ => return Ok(acc),
            }
            self.pos += 1;
        }
    }

    fn term(&mut self) -> Result<Polynomial> {
        let mut acc = self.power()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    let f = self.power()?;
                    acc = acc.mul(&f)?;
                }
                Some(b'/') => {
                    self.pos += 1;
                    let d = self.number()?;
                    let inv = self.field.inv(&d)?;
                    acc = acc.scale_value(&inv);
                }
                Some(c) if c == b'(' || c.is_ascii_alphabetic() => {
                    let f = self.power()?;
                    acc = acc.mul(&f)?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn power(&mut self) -> Result<Polynomial> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.skip_ws();
            let start = self.pos;
            while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            let e: u32 = std::str::from_utf8(&self.s[start..self.pos])
                .unwrap()
                .parse()
                .map_err(|_| self.err("expected exponent"))?;
            return Ok(base.pow(e));
        }
        Ok(base)
    }

    fn number(&mut self) -> Result<Value> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.s.len() && (self.s[self.pos].is_ascii_digit() || self.s[self.pos] == b'.') {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected number"));
        }
        let t = std::str::from_utf8(&self.s[start..self.pos]).unwrap();
        self.field.parse(t)
    }

    fn atom(&mut self) -> Result<Polynomial> {
        let n = self.names.len();
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.err("expected ')'"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => {
                let v = self.number()?;
                Ok(Polynomial::constant(self.field, n, v))
            }
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.pos;
                while self.pos < self.s.len() && (self.s[self.pos].is_ascii_alphanumeric() || self.s[self.pos] == b'_') {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.s[start..self.pos]).unwrap();
                let i = self
                    .names
                    .iter()
                    .position(|x| x == name)
                    .ok_or_else(|| Error::Parse(format!("unknown variable '{name}'")))?;
                Ok(Polynomial::var(self.field, n, i))
            }
            _ => Err(self.err("expected a term")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(n: usize) -> Vec<String> {
        default_names(n)
    }

    #[test]
    fn char2_square() {
        let f = Field::f2();
        let p = Polynomial::parse(&f, &names(2), "x1 + x2").unwrap();
        assert_eq!(p.mul(&p).unwrap().to_string(), "x1^2 + x2^2");
    }

    #[test]
    fn rational_ops() {
        let q = Field::rational();
        let n = names(2);
        let a = Polynomial::parse(&q, &n, "x1^2 - 1").unwrap();
        let b = Polynomial::parse(&q, &n, "x1 + x2").unwrap();
        assert_eq!(a.add(&b).unwrap().to_string(), "x1^2 + x1 + x2 - 1");
        let x1 = Polynomial::var(&q, 2, 0);
        assert_eq!(x1.mul(&b).unwrap().to_string(), "x1^2 + x1*x2");
        assert_eq!(b.multiply_by_variable(0).unwrap(), x1.mul(&b).unwrap());
        let x2f1 = a.multiply_by_variable(1).unwrap();
        assert_eq!(x2f1.to_string(), "x1^2*x2 - x2");
        assert!(a.multiply_by_variable(2).is_err());
    }

    #[test]
    fn evaluation() {
        let q = Field::rational();
        let f = Polynomial::parse(&q, &names(3), "2*x1*x2 + x3").unwrap();
        let pt: Vec<FieldElement> = [1, -1, 2].iter().map(|&v| FieldElement::from_i64(&q, v)).collect();
        assert!(f.evaluate(&pt).unwrap().is_zero());
        let g = Polynomial::parse(&q, &names(3), "x1 - 7").unwrap();
        let zero: Vec<FieldElement> = (0..3).map(|_| FieldElement::from_i64(&q, 0)).collect();
        assert_eq!(g.evaluate(&zero).unwrap().to_string(), "-7");
        assert!(g.evaluate(&zero[..2]).is_err());
    }

    #[test]
    fn evaluation_in_extension() {
        let f2 = Field::f2();
        let gf4 = Field::extension(2, vec![1, 1, 1]).unwrap();
        let p = Polynomial::parse(&f2, &names(1), "1 + x1 + x1^2").unwrap();
        let w = FieldElement::new(&gf4, gf4.generator());
        assert!(p.evaluate(&[w]).unwrap().is_zero());
    }

    #[test]
    fn monomial_listing() {
        let m = monomials_up_to(2, 1);
        let n = names(2);
        let s: Vec<String> = m.iter().map(|x| x.format(&n)).collect();
        assert_eq!(s, vec!["1", "x2", "x1"]);
        assert_eq!(monomials_up_to(3, 2).len(), 10);
        assert_eq!(monomials_up_to(1, 0).len(), 1);
        for n in 1..=6 {
            for d in 0..=6 {
                let ms = monomials_up_to(n, d);
                assert_eq!(ms.len() as u128, binomial((n as u64) + d as u64, d as u64));
                assert!(ms.windows(2).all(|w| w[0] < w[1]));
            }
        }
    }

    #[test]
    fn ranks_round_trip() {
        let r = MonomialRanker::new(4);
        let mut scratch = vec![0u16; 4];
        for i in 0..r.count_up_to(5) {
            let m = r.unrank(i);
            assert_eq!(r.rank(&m), i);
            assert_eq!(r.degree_of(i), m.degree());
            for v in 0..4 {
                assert_eq!(r.mul_var(i, v, &mut scratch), r.rank(&m.mul_var(v)));
            }
        }
    }

    #[test]
    fn zero_degree_sentinel() {
        assert_eq!(Polynomial::zero(&Field::rational(), 2).degree(), -1);
    }

    #[test]
    fn json_round_trip() {
        let q = Field::rational();
        let p = Polynomial::parse(&q, &names(2), "1/3*x1*x2 - 2 + x2^3").unwrap();
        let j = p.to_json();
        assert_eq!(j[0].monomial, vec![0, 3]);
        assert_eq!(Polynomial::from_json(&q, 2, &j).unwrap(), p);
    }
}
