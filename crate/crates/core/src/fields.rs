//! Exact coefficient fields.
//!
//! A [`Field`] is a cheap shared handle to a prime field `F_p`, an extension
//! `GF(p^k)` given by an explicit monic irreducible modulus, or the rationals.
//! Finite-field elements are stored as a single integer: the coordinate vector
//! `(c_0, .., c_{k-1})` over `F_p` packed as `sum c_i p^i`. In characteristic 2
//! this is the usual bit-packed polynomial representation, so multiplication is
//! a carry-less product followed by reduction.

use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap on the number of elements [`Field::enumerate`] will produce.
pub const DEFAULT_ENUM_CAP: u64 = 1 << 20;

/// Largest number of candidate divisors tried when validating a modulus.
const MAX_TRIAL_DIVISORS: u128 = 1 << 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldKind {
    Prime,
    Extension,
    Rational,
}

#[derive(Debug, PartialEq, Eq, Hash)]
struct Spec {
    kind: FieldKind,
    p: u64,
    k: u32,
    /// Monic modulus, low degree first, length `k + 1`; empty unless extension.
    modulus: Vec<u64>,
    /// `p^k`, or 0 for the rationals.
    size: u64,
}

/// Shared handle to a coefficient field.
#[derive(Clone)]
pub struct Field(Arc<Spec>);

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || *self.0 == *other.0
    }
}
impl Eq for Field {}

impl Hash for Field {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.hash(state)
    }
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())
    }
}

/// Raw coefficient representation. Its meaning depends on the owning field.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    /// Packed coordinates of a finite-field element.
    Fin(u64),
    /// A rational number in lowest terms.
    Rat(Box<BigRational>),
}

impl Value {
    pub fn fin(&self) -> u64 {
        match self {
            Value::Fin(v) => *v,
            Value::Rat(_) => panic!("rational value used as a finite-field element"),
        }
    }

    pub fn rat(&self) -> &BigRational {
        match self {
            Value::Rat(r) => r,
            Value::Fin(_) => panic!("finite-field value used as a rational"),
        }
    }
}

/// Serializable description of a field, as it appears in system headers.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldSpec {
    pub kind: FieldKind,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub p: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub k: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub modulus: Option<Vec<u64>>,
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let limit = 1u64 << 16;
    let mut d = 2u64;
    while d < limit && d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    if d * d > n {
        return true;
    }
    // Miller-Rabin with a base set that is deterministic on 64-bit inputs.
    let mut m = n - 1;
    let mut s = 0;
    while m % 2 == 0 {
        m /= 2;
        s += 1;
    }
    'bases: for &a in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a % n, m, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'bases;
            }
        }
        return false;
    }
    true
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut a: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, a, m);
        }
        a = mul_mod(a, a, m);
        e >>= 1;
    }
    r
}

fn inv_mod(a: u64, m: u64) -> Option<u64> {
    let (mut t, mut new_t) = (0i128, 1i128);
    let (mut r, mut new_r) = (m as i128, a as i128);
    while new_r != 0 {
        let q = r / new_r;
        (t, new_t) = (new_t, t - q * new_t);
        (r, new_r) = (new_r, r - q * new_r);
    }
    if r != 1 {
        return None;
    }
    if t < 0 {
        t += m as i128;
    }
    Some(t as u64)
}

// Dense polynomials over F_p, coefficient vectors low degree first.

fn trim(a: &mut Vec<u64>) {
    while a.last() == Some(&0) {
        a.pop();
    }
}

/// Remainder of `a` modulo a monic `m`.
fn poly_rem(a: &[u64], m: &[u64], p: u64) -> Vec<u64> {
    let mut r = a.to_vec();
    trim(&mut r);
    let dm = m.len() - 1;
    while r.len() > dm {
        let lead = *r.last().unwrap();
        let shift = r.len() - 1 - dm;
        for (i, &c) in m.iter().enumerate() {
            let sub = mul_mod(lead, c, p);
            r[shift + i] = (r[shift + i] + p - sub) % p;
        }
        trim(&mut r);
    }
    r
}

fn digits(mut v: u64, p: u64, k: usize) -> Vec<u64> {
    let mut out = vec![0; k];
    for d in out.iter_mut() {
        *d = v % p;
        v /= p;
    }
    out
}

fn pack(ds: &[u64], p: u64) -> u64 {
    ds.iter().rev().fold(0u64, |acc, &d| acc * p + d)
}

fn clmul(a: u64, b: u64) -> u128 {
    let mut r = 0u128;
    let a = a as u128;
    let mut b = b;
    let mut shift = 0;
    while b != 0 {
        let tz = b.trailing_zeros();
        shift += tz;
        b >>= tz;
        r ^= a << shift;
        b >>= 1;
        shift += 1;
    }
    r
}

fn is_irreducible(m: &[u64], p: u64) -> Result<bool> {
    let k = m.len() - 1;
    if k <= 1 {
        return Ok(k == 1);
    }
    let half = k / 2;
    let total: u128 = (1..=half).map(|j| (p as u128).pow(j as u32)).sum();
    if total > MAX_TRIAL_DIVISORS {
        return Err(Error::InvalidField(format!(
            "modulus of degree {k} over F_{p} is too large to validate by trial division"
        )));
    }
    for j in 1..=half {
        let count = p.pow(j as u32);
        for idx in 0..count {
            let mut cand = digits(idx, p, j);
            cand.push(1);
            if poly_rem(m, &cand, p).is_empty() {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Lexicographically least monic irreducible polynomial of degree `k` over
/// `F_p`, ordering candidates by their packed lower coefficients.
fn least_irreducible(p: u64, k: u32) -> Result<Vec<u64>> {
    let count = (p as u128).pow(k);
    let mut idx = 0u128;
    while idx < count {
        let mut cand = digits(idx as u64, p, k as usize);
        cand.push(1);
        if is_irreducible(&cand, p)? {
            return Ok(cand);
        }
        idx += 1;
    }
    Err(Error::InvalidField(format!("no irreducible of degree {k} over F_{p}")))
}

impl Field {
    pub fn rational() -> Field {
        Field(Arc::new(Spec { kind: FieldKind::Rational, p: 0, k: 1, modulus: vec![], size: 0 }))
    }

    pub fn prime(p: u64) -> Result<Field> {
        if !is_prime(p) {
            return Err(Error::InvalidField(format!("{p} is not prime")));
        }
        Ok(Field(Arc::new(Spec { kind: FieldKind::Prime, p, k: 1, modulus: vec![], size: p })))
    }

    pub fn f2() -> Field {
        Field::prime(2).expect("2 is prime")
    }

    /// `GF(p^k)` with the given monic modulus (low degree first).
    /// A degree-one modulus yields the prime field itself.
    pub fn extension(p: u64, modulus: Vec<u64>) -> Result<Field> {
        if !is_prime(p) {
            return Err(Error::InvalidField(format!("{p} is not prime")));
        }
        if modulus.len() < 2 || *modulus.last().unwrap() != 1 {
            return Err(Error::InvalidField("modulus must be monic of degree at least 1".into()));
        }
        if modulus.iter().any(|&c| c >= p) {
            return Err(Error::InvalidField("modulus coefficients must lie in [0, p)".into()));
        }
        let k = (modulus.len() - 1) as u32;
        if k == 1 {
            return Field::prime(p);
        }
        let size = (p as u128).pow(k);
        if size >= 1u128 << 63 {
            return Err(Error::InvalidField(format!("GF({p}^{k}) is too large")));
        }
        if !is_irreducible(&modulus, p)? {
            return Err(Error::InvalidField("modulus is reducible".into()));
        }
        Ok(Field(Arc::new(Spec { kind: FieldKind::Extension, p, k, modulus, size: size as u64 })))
    }

    /// `GF(p^k)` with the lexicographically least irreducible modulus.
    pub fn galois(p: u64, k: u32) -> Result<Field> {
        if k == 0 {
            return Err(Error::InvalidField("extension degree must be at least 1".into()));
        }
        if !is_prime(p) {
            return Err(Error::InvalidField(format!("{p} is not prime")));
        }
        if k == 1 {
            return Field::prime(p);
        }
        let m = least_irreducible(p, k)?;
        Field::extension(p, m)
    }

    /// Parses the command-line field syntax `f2`, `fp:<p>`, `gf:<p>:<k>`, `q`.
    pub fn parse_flag(s: &str) -> Result<Field> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        let num = |t: &str| -> Result<u64> {
            t.parse().map_err(|_| Error::Parse(format!("bad number '{t}' in field '{s}'")))
        };
        match parts.as_slice() {
            ["f2"] => Ok(Field::f2()),
            ["q"] | ["Q"] => Ok(Field::rational()),
            ["fp", p] => Field::prime(num(p)?),
            ["gf", p, k] => Field::galois(num(p)?, num(k)? as u32),
            _ => Err(Error::Parse(format!("unknown field '{s}'"))),
        }
    }

    pub fn from_spec(spec: &FieldSpec) -> Result<Field> {
        match spec.kind {
            FieldKind::Rational => Ok(Field::rational()),
            FieldKind::Prime => Field::prime(spec.p.ok_or_else(|| Error::Parse("prime field needs p".into()))?),
            FieldKind::Extension => {
                let p = spec.p.ok_or_else(|| Error::Parse("extension field needs p".into()))?;
                match &spec.modulus {
                    Some(m) => {
                        if let Some(k) = spec.k {
                            if m.len() != k as usize + 1 {
                                return Err(Error::InvalidField("modulus degree disagrees with k".into()));
                            }
                        }
                        Field::extension(p, m.clone())
                    }
                    None => Field::galois(p, spec.k.ok_or_else(|| Error::Parse("extension field needs k".into()))?),
                }
            }
        }
    }

    pub fn spec(&self) -> FieldSpec {
        match self.0.kind {
            FieldKind::Rational => FieldSpec { kind: FieldKind::Rational, p: None, k: None, modulus: None },
            FieldKind::Prime => FieldSpec { kind: FieldKind::Prime, p: Some(self.0.p), k: None, modulus: None },
            FieldKind::Extension => FieldSpec {
                kind: FieldKind::Extension,
                p: Some(self.0.p),
                k: Some(self.0.k),
                modulus: Some(self.0.modulus.clone()),
            },
        }
    }

    pub fn kind(&self) -> FieldKind {
        self.0.kind
    }

    pub fn is_rational(&self) -> bool {
        self.0.kind == FieldKind::Rational
    }

    /// True for the two-element field.
    pub fn is_f2(&self) -> bool {
        self.0.kind == FieldKind::Prime && self.0.p == 2
    }

    /// Characteristic; 0 for the rationals.
    pub fn characteristic(&self) -> u64 {
        self.0.p
    }

    /// Degree over the prime field.
    pub fn degree(&self) -> u32 {
        self.0.k
    }

    /// Number of elements, or `None` for the rationals.
    pub fn size(&self) -> Option<u64> {
        if self.is_rational() {
            None
        } else {
            Some(self.0.size)
        }
    }

    pub fn modulus(&self) -> &[u64] {
        &self.0.modulus
    }

    pub fn name(&self) -> String {
        match self.0.kind {
            FieldKind::Rational => "Q".into(),
            FieldKind::Prime => format!("F_{}", self.0.p),
            FieldKind::Extension => format!("GF({}^{})", self.0.p, self.0.k),
        }
    }

    pub fn zero(&self) -> Value {
        if self.is_rational() {
            Value::Rat(Box::new(BigRational::zero()))
        } else {
            Value::Fin(0)
        }
    }

    pub fn one(&self) -> Value {
        if self.is_rational() {
            Value::Rat(Box::new(BigRational::one()))
        } else {
            Value::Fin(1)
        }
    }

    pub fn is_zero(&self, a: &Value) -> bool {
        match a {
            Value::Fin(v) => *v == 0,
            Value::Rat(r) => r.is_zero(),
        }
    }

    pub fn is_one(&self, a: &Value) -> bool {
        match a {
            Value::Fin(v) => *v == 1,
            Value::Rat(r) => r.is_one(),
        }
    }

    /// The distinguished generator `t` of an extension field.
    pub fn generator(&self) -> Value {
        match self.0.kind {
            FieldKind::Extension => Value::Fin(self.0.p),
            _ => self.one(),
        }
    }

    pub fn from_i64(&self, v: i64) -> Value {
        match self.0.kind {
            FieldKind::Rational => Value::Rat(Box::new(BigRational::from_integer(BigInt::from(v)))),
            _ => {
                let p = self.0.p as i128;
                Value::Fin((v as i128).rem_euclid(p) as u64)
            }
        }
    }

    pub fn from_bigint(&self, v: &BigInt) -> Value {
        match self.0.kind {
            FieldKind::Rational => Value::Rat(Box::new(BigRational::from_integer(v.clone()))),
            _ => {
                let p = BigInt::from(self.0.p);
                Value::Fin(v.mod_floor(&p).to_u64().unwrap())
            }
        }
    }

    /// Maps a rational into this field; fails when the denominator vanishes.
    pub fn from_rational(&self, r: &BigRational) -> Result<Value> {
        if self.is_rational() {
            return Ok(Value::Rat(Box::new(r.clone())));
        }
        let n = self.from_bigint(r.numer());
        let d = self.from_bigint(r.denom());
        self.div(&n, &d)
    }

    pub fn add(&self, a: &Value, b: &Value) -> Value {
        match (a, b) {
            (Value::Fin(x), Value::Fin(y)) => Value::Fin(self.fin_add(*x, *y)),
            (Value::Rat(x), Value::Rat(y)) => Value::Rat(Box::new(&**x + &**y)),
            _ => panic!("mixed value representations"),
        }
    }

    pub fn neg(&self, a: &Value) -> Value {
        match a {
            Value::Fin(x) => Value::Fin(self.fin_neg(*x)),
            Value::Rat(x) => Value::Rat(Box::new(-&**x)),
        }
    }

    pub fn sub(&self, a: &Value, b: &Value) -> Value {
        match (a, b) {
            (Value::Fin(x), Value::Fin(y)) => Value::Fin(self.fin_add(*x, self.fin_neg(*y))),
            (Value::Rat(x), Value::Rat(y)) => Value::Rat(Box::new(&**x - &**y)),
            _ => panic!("mixed value representations"),
        }
    }

    pub fn mul(&self, a: &Value, b: &Value) -> Value {
        match (a, b) {
            (Value::Fin(x), Value::Fin(y)) => Value::Fin(self.fin_mul(*x, *y)),
            (Value::Rat(x), Value::Rat(y)) => Value::Rat(Box::new(&**x * &**y)),
            _ => panic!("mixed value representations"),
        }
    }

    pub fn inv(&self, a: &Value) -> Result<Value> {
        if self.is_zero(a) {
            return Err(Error::DivisionByZero);
        }
        Ok(match a {
            Value::Rat(x) => Value::Rat(Box::new(x.recip())),
            Value::Fin(x) => Value::Fin(self.fin_inv(*x)),
        })
    }

    pub fn div(&self, a: &Value, b: &Value) -> Result<Value> {
        Ok(self.mul(a, &self.inv(b)?))
    }

    pub fn pow(&self, a: &Value, mut e: u64) -> Value {
        let mut base = a.clone();
        let mut r = self.one();
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(&r, &base);
            }
            e >>= 1;
            if e > 0 {
                base = self.mul(&base, &base);
            }
        }
        r
    }

    fn fin_add(&self, x: u64, y: u64) -> u64 {
        let s = &*self.0;
        match s.kind {
            FieldKind::Prime => {
                let r = x as u128 + y as u128;
                (r % s.p as u128) as u64
            }
            _ if s.p == 2 => x ^ y,
            _ => {
                let (a, b) = (digits(x, s.p, s.k as usize), digits(y, s.p, s.k as usize));
                let c: Vec<u64> = a.iter().zip(&b).map(|(u, v)| (u + v) % s.p).collect();
                pack(&c, s.p)
            }
        }
    }

    fn fin_neg(&self, x: u64) -> u64 {
        let s = &*self.0;
        match s.kind {
            FieldKind::Prime => {
                if x == 0 {
                    0
                } else {
                    s.p - x
                }
            }
            _ if s.p == 2 => x,
            _ => {
                let a = digits(x, s.p, s.k as usize);
                let c: Vec<u64> = a.iter().map(|u| (s.p - u) % s.p).collect();
                pack(&c, s.p)
            }
        }
    }

    fn fin_mul(&self, x: u64, y: u64) -> u64 {
        let s = &*self.0;
        match s.kind {
            FieldKind::Prime => {
                if s.p == 2 {
                    x & y
                } else {
                    mul_mod(x, y, s.p)
                }
            }
            _ if s.p == 2 => {
                let mut r = clmul(x, y);
                let k = s.k;
                let m: u128 = s.modulus.iter().enumerate().map(|(i, &c)| (c as u128) << i).sum();
                while r >> k != 0 {
                    let top = 127 - r.leading_zeros();
                    r ^= m << (top - k);
                }
                r as u64
            }
            _ => {
                let k = s.k as usize;
                let (a, b) = (digits(x, s.p, k), digits(y, s.p, k));
                let mut prod = vec![0u64; 2 * k - 1];
                for (i, &u) in a.iter().enumerate() {
                    if u == 0 {
                        continue;
                    }
                    for (j, &v) in b.iter().enumerate() {
                        prod[i + j] = (prod[i + j] + mul_mod(u, v, s.p)) % s.p;
                    }
                }
                let mut r = poly_rem(&prod, &s.modulus, s.p);
                r.resize(k, 0);
                pack(&r, s.p)
            }
        }
    }

    fn fin_inv(&self, x: u64) -> u64 {
        let s = &*self.0;
        match s.kind {
            FieldKind::Prime => inv_mod(x, s.p).expect("nonzero residue is invertible"),
            _ => self.pow(&Value::Fin(x), s.size - 2).fin(),
        }
    }

    /// Element with packed index `i` (finite fields only).
    pub fn element_at(&self, i: u64) -> Value {
        debug_assert!(!self.is_rational() && i < self.0.size);
        Value::Fin(i)
    }

    /// All elements, zero first, in packed-index order.
    pub fn enumerate(&self, cap: u64) -> Result<Vec<Value>> {
        if self.is_rational() {
            return Err(Error::InvalidArgument("the rationals cannot be enumerated".into()));
        }
        if self.0.size > cap {
            return Err(Error::CapExceeded { size: self.0.size as u128, cap });
        }
        Ok((0..self.0.size).map(Value::Fin).collect())
    }

    /// Coordinates over `F_p`, low degree first.
    pub fn coordinates(&self, a: &Value) -> Vec<u64> {
        digits(a.fin(), self.0.p, self.0.k as usize)
    }

    pub fn from_coordinates(&self, c: &[u64]) -> Result<Value> {
        if c.len() > self.0.k as usize || c.iter().any(|&x| x >= self.0.p) {
            return Err(Error::Parse("coordinate vector out of range".into()));
        }
        Ok(Value::Fin(pack(c, self.0.p)))
    }

    pub fn format(&self, a: &Value) -> String {
        match (self.0.kind, a) {
            (FieldKind::Rational, Value::Rat(r)) => {
                if r.is_integer() {
                    r.numer().to_string()
                } else {
                    format!("{}/{}", r.numer(), r.denom())
                }
            }
            (FieldKind::Prime, Value::Fin(x)) => x.to_string(),
            (FieldKind::Extension, _) => {
                let c = self.coordinates(a);
                let body: Vec<String> = c.iter().map(|x| x.to_string()).collect();
                format!("[{}]", body.join(","))
            }
            _ => panic!("value does not belong to {}", self.name()),
        }
    }

    /// Parses an element string: integers or fractions for any field, and
    /// coordinate lists `[c0,c1,..]` for extensions.
    pub fn parse(&self, s: &str) -> Result<Value> {
        let t = s.trim();
        if let Some(inner) = t.strip_prefix('[').and_then(|u| u.strip_suffix(']')) {
            if self.0.kind != FieldKind::Extension {
                return Err(Error::Parse(format!("coordinate vector '{t}' outside an extension field")));
            }
            let coords: Result<Vec<u64>> = inner
                .split(',')
                .filter(|x| !x.trim().is_empty())
                .map(|x| x.trim().parse::<u64>().map_err(|_| Error::Parse(format!("bad coordinate in '{t}'"))))
                .collect();
            return self.from_coordinates(&coords?);
        }
        let r = parse_rational(t)?;
        self.from_rational(&r)
    }
}

pub fn parse_rational(t: &str) -> Result<BigRational> {
    let bad = || Error::Parse(format!("bad number '{t}'"));
    if let Some((n, d)) = t.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(BigRational::new(n, d))
    } else if let Some((ip, fp)) = t.split_once('.') {
        let neg = ip.trim_start().starts_with('-');
        let ip = ip.trim().trim_start_matches(['-', '+']);
        let digits = format!("{}{}", if ip.is_empty() { "0" } else { ip }, fp);
        let n: BigInt = digits.parse().map_err(|_| bad())?;
        let d = num_traits::pow(BigInt::from(10), fp.len());
        let r = BigRational::new(n, d);
        Ok(if neg { -r } else { r })
    } else {
        let n: BigInt = t.parse().map_err(|_| bad())?;
        Ok(BigRational::from_integer(n))
    }
}

/// Embedding of a base field into one of its extensions.
#[derive(Clone, Debug)]
pub struct Embedding {
    pub base: Field,
    pub target: Field,
    /// Image of the base generator; the identity on prime fields.
    generator_image: Value,
}

impl Embedding {
    pub fn identity(f: &Field) -> Embedding {
        Embedding { base: f.clone(), target: f.clone(), generator_image: f.generator() }
    }

    pub fn apply(&self, a: &Value) -> Value {
        match self.base.kind() {
            FieldKind::Rational | FieldKind::Prime => a.clone(),
            FieldKind::Extension => {
                let c = self.base.coordinates(a);
                let t = &self.target;
                let mut acc = t.zero();
                for &ci in c.iter().rev() {
                    acc = t.add(&t.mul(&acc, &self.generator_image), &Value::Fin(ci));
                }
                acc
            }
        }
    }
}

/// Builds `GF(p^(k*degree))` over the base field with the least irreducible
/// modulus over `F_p`, together with the embedding of the base.
pub fn extend_field(base: &Field, degree: u32) -> Result<(Field, Embedding)> {
    if base.is_rational() {
        return Err(Error::InvalidArgument("cannot build a finite extension of the rationals".into()));
    }
    if degree == 0 {
        return Err(Error::InvalidArgument("extension degree must be at least 1".into()));
    }
    if degree == 1 {
        return Ok((base.clone(), Embedding::identity(base)));
    }
    let p = base.characteristic();
    let target = Field::galois(p, base.degree() * degree)?;
    if base.kind() == FieldKind::Prime {
        return Ok((target.clone(), Embedding { base: base.clone(), target, generator_image: Value::Fin(1) }));
    }
    // Locate the least root of the base modulus inside the target.
    let m = base.modulus();
    let mut image = None;
    for i in 0..target.size().unwrap() {
        let x = Value::Fin(i);
        let mut acc = target.zero();
        for &c in m.iter().rev() {
            acc = target.add(&target.mul(&acc, &x), &Value::Fin(c));
        }
        if target.is_zero(&acc) {
            image = Some(x);
            break;
        }
    }
    let generator_image = image.ok_or_else(|| Error::InvalidField("base modulus has no root in the extension".into()))?;
    Ok((target.clone(), Embedding { base: base.clone(), target, generator_image }))
}

/// An element together with its field.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FieldElement {
    field: Field,
    value: Value,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl FieldElement {
    pub fn new(field: &Field, value: Value) -> FieldElement {
        FieldElement { field: field.clone(), value }
    }

    pub fn from_i64(field: &Field, v: i64) -> FieldElement {
        FieldElement::new(field, field.from_i64(v))
    }

    pub fn parse(field: &Field, s: &str) -> Result<FieldElement> {
        Ok(FieldElement::new(field, field.parse(s)?))
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn value(&self) -> &Value {
        &self.value
    }

    pub fn into_value(self) -> Value {
        self.value
    }

    pub fn is_zero(&self) -> bool {
        self.field.is_zero(&self.value)
    }

    fn check(&self, other: &FieldElement) -> Result<()> {
        if self.field != other.field {
            return Err(Error::FieldMismatch);
        }
        Ok(())
    }

    pub fn add(&self, o: &FieldElement) -> Result<FieldElement> {
        self.check(o)?;
        Ok(FieldElement::new(&self.field, self.field.add(&self.value, &o.value)))
    }

    pub fn sub(&self, o: &FieldElement) -> Result<FieldElement> {
        self.check(o)?;
        Ok(FieldElement::new(&self.field, self.field.sub(&self.value, &o.value)))
    }

    pub fn mul(&self, o: &FieldElement) -> Result<FieldElement> {
        self.check(o)?;
        Ok(FieldElement::new(&self.field, self.field.mul(&self.value, &o.value)))
    }

    pub fn div(&self, o: &FieldElement) -> Result<FieldElement> {
        self.check(o)?;
        Ok(FieldElement::new(&self.field, self.field.div(&self.value, &o.value)?))
    }

    pub fn neg(&self) -> FieldElement {
        FieldElement::new(&self.field, self.field.neg(&self.value))
    }

    pub fn inv(&self) -> Result<FieldElement> {
        Ok(FieldElement::new(&self.field, self.field.inv(&self.value)?))
    }

    pub fn pow(&self, e: u64) -> FieldElement {
        FieldElement::new(&self.field, self.field.pow(&self.value, e))
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.field.format(&self.value))
    }
}

pub fn field_arith(a: &FieldElement, b: &FieldElement, op: ArithOp) -> Result<FieldElement> {
    match op {
        ArithOp::Add => a.add(b),
        ArithOp::Sub => a.sub(b),
        ArithOp::Mul => a.mul(b),
        ArithOp::Div => a.div(b),
    }
}

/// Rounds a float to the nearest fraction with denominator at most `max_den`
/// using continued fractions.
pub fn rationalize(x: f64, max_den: u64) -> BigRational {
    if !x.is_finite() {
        return BigRational::zero();
    }
    let (mut h0, mut h1) = (0i128, 1i128);
    let (mut k0, mut k1) = (1i128, 0i128);
    let mut r = x;
    for _ in 0..64 {
        let a = r.floor();
        if a.abs() > 1e15 {
            break;
        }
        let ai = a as i128;
        let h2 = ai * h1 + h0;
        let k2 = ai * k1 + k0;
        if k2 > max_den as i128 {
            break;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        let frac = r - a;
        if frac.abs() < 1e-12 {
            break;
        }
        r = 1.0 / frac;
    }
    if k1 == 0 {
        return BigRational::from_integer(BigInt::from(x.round() as i64));
    }
    BigRational::new(BigInt::from(h1), BigInt::from(k1))
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    let n = r.numer().to_f64().unwrap_or(f64::NAN);
    let d = r.denom().to_f64().unwrap_or(f64::NAN);
    if n.is_finite() && d.is_finite() {
        n / d
    } else {
        // Scale down huge fractions before converting.
        let shift = r.numer().bits().max(r.denom().bits()) as i64 - 900;
        let n2 = (r.numer().abs() >> shift.max(0) as usize).to_f64().unwrap();
        let d2 = (r.denom() >> shift.max(0) as usize).to_f64().unwrap();
        let v = n2 / d2;
        if r.is_negative() {
            -v
        } else {
            v
        }
    }
}
