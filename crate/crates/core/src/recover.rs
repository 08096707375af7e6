//! Root recovery from a counted fixed-point space.
//!
//! The standard monomials of the terminal space index a basis of the
//! quotient ring. Multiplication by each variable is a matrix on that basis;
//! the matrices commute and, for a radical ideal, share an eigenbasis whose
//! left eigenvectors are the evaluation functionals at the roots.
//!
//! Extraction draws a random combination `M = sum c_i M_i`, finds the
//! eigenvalues of `M` exactly, and expresses every variable as a polynomial
//! in `M` through the Krylov basis of the class of 1. The coordinates are
//! then checked against every `M_i` on the evaluation vectors before the
//! points are tested against the original generators.

use std::collections::HashMap;

use nalgebra::DMatrix;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactla::{FieldMatrix, PolySpace};
use crate::fields::{extend_field, rational_to_f64, rationalize, Embedding, Field, FieldElement, FieldKind, FieldSpec, Value, DEFAULT_ENUM_CAP};
use crate::fpnulla::{fpnulla_run_with, FpnullaOptions, FpnullaStatus};
use crate::nulla::PolySystem;
use crate::polys::{Monomial, Polynomial};

/// Number of fresh draws allowed when eigenvalues collide.
pub const REDRAWS: u32 = 8;

/// Standard-monomial basis of the quotient.
#[derive(Clone, Debug)]
pub struct QuotientBasis {
    pub monomials: Vec<Monomial>,
    pub terminal: PolySpace,
    index: HashMap<Monomial, usize>,
}

impl QuotientBasis {
    pub fn dim(&self) -> usize {
        self.monomials.len()
    }

    /// Coordinates of `f` in the basis after reduction by the terminal space.
    pub fn coords(&self, f: &Polynomial) -> Result<Vec<Value>> {
        let field = self.terminal.field();
        let nf = self.terminal.normal_form(f)?;
        let mut out = vec![field.zero(); self.dim()];
        for (m, c) in nf.terms() {
            match self.index.get(m) {
                Some(&j) => out[j] = c.clone(),
                None => {
                    return Err(Error::ReductionEscape(format!(
                        "monomial of degree {} survives reduction at degree {}",
                        m.degree(),
                        self.terminal.degree_bound()
                    )))
                }
            }
        }
        Ok(out)
    }
}

#[derive(Clone, Debug)]
pub struct MultiplicationMatrix {
    pub var: usize,
    pub matrix: FieldMatrix,
    cols: Vec<Vec<(usize, Value)>>,
}

impl MultiplicationMatrix {
    fn from_cols(field: &Field, var: usize, cols: Vec<Vec<Value>>) -> MultiplicationMatrix {
        let n = cols.len();
        let mut matrix = FieldMatrix::zeros(field, n, n);
        let mut sparse = Vec::with_capacity(n);
        for (j, col) in cols.into_iter().enumerate() {
            let mut s = Vec::new();
            for (i, v) in col.into_iter().enumerate() {
                if !field.is_zero(&v) {
                    matrix.set(i, j, v.clone());
                    s.push((i, v));
                }
            }
            sparse.push(s);
        }
        MultiplicationMatrix { var, matrix, cols: sparse }
    }
}

/// Builds the quotient basis and one multiplication matrix per variable.
pub fn build_quotient(f: &PolySpace) -> Result<(QuotientBasis, Vec<MultiplicationMatrix>)> {
    let d = f.degree_bound();
    let monomials = f.standard_monomials(d);
    let index = monomials.iter().cloned().enumerate().map(|(i, m)| (m, i)).collect();
    let basis = QuotientBasis { monomials, terminal: f.clone(), index };
    let field = f.field().clone();
    let n = f.nvars();
    let mut mats = Vec::with_capacity(n);
    for i in 0..n {
        let mut cols = Vec::with_capacity(basis.dim());
        for b in &basis.monomials {
            let prod = Polynomial::monomial(&field, b.mul_var(i), field.one());
            cols.push(basis.coords(&prod)?);
        }
        mats.push(MultiplicationMatrix::from_cols(&field, i, cols));
    }
    check_commuting(&field, &mats)?;
    Ok((basis, mats))
}

fn apply_sparse(field: &Field, m: &[Vec<(usize, Value)>], v: &[Value]) -> Vec<Value> {
    let mut out = vec![field.zero(); v.len()];
    for (j, col) in m.iter().enumerate() {
        if field.is_zero(&v[j]) {
            continue;
        }
        for (i, a) in col {
            out[*i] = field.add(&out[*i], &field.mul(a, &v[j]));
        }
    }
    out
}

fn check_commuting(field: &Field, mats: &[MultiplicationMatrix]) -> Result<()> {
    let n = mats.first().map(|m| m.cols.len()).unwrap_or(0);
    for a in 0..mats.len() {
        for b in a + 1..mats.len() {
            for k in 0..n {
                let mut e = vec![field.zero(); n];
                e[k] = field.one();
                let ab = apply_sparse(field, &mats[a].cols, &apply_sparse(field, &mats[b].cols, &e));
                let ba = apply_sparse(field, &mats[b].cols, &apply_sparse(field, &mats[a].cols, &e));
                if ab != ba {
                    return Err(Error::NonCommuting);
                }
            }
        }
    }
    Ok(())
}

/// Recovered points and the field they live in.
#[derive(Clone, Debug, PartialEq)]
pub struct RootSet {
    pub field: Field,
    pub roots: Vec<Vec<Value>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RootSetJson {
    pub extension: FieldSpec,
    pub roots: Vec<Vec<String>>,
}

impl RootSet {
    pub fn to_json(&self) -> RootSetJson {
        RootSetJson {
            extension: self.field.spec(),
            roots: self.roots.iter().map(|r| r.iter().map(|v| self.field.format(v)).collect()).collect(),
        }
    }

    pub fn from_json(j: &RootSetJson) -> Result<RootSet> {
        let field = Field::from_spec(&j.extension)?;
        let roots = j.roots.iter().map(|r| r.iter().map(|s| field.parse(s)).collect::<Result<Vec<_>>>()).collect::<Result<_>>()?;
        Ok(RootSet { field, roots })
    }

    pub fn points(&self) -> Vec<Vec<FieldElement>> {
        self.roots.iter().map(|r| r.iter().map(|v| FieldElement::new(&self.field, v.clone())).collect()).collect()
    }

    /// Rewrites every coordinate in `sub`, which must embed into the current
    /// field and contain all coordinates.
    pub fn descend(&self, sub: &Field) -> Result<RootSet> {
        if self.field.is_rational() || sub.is_rational() {
            if self.field == *sub {
                return Ok(self.clone());
            }
            return Err(Error::FieldMismatch);
        }
        if sub.characteristic() != self.field.characteristic() || self.field.degree() % sub.degree() != 0 {
            return Err(Error::FieldMismatch);
        }
        let (target, emb) = extend_field(sub, self.field.degree() / sub.degree())?;
        if target != self.field {
            return Err(Error::FieldMismatch);
        }
        let mut pre = HashMap::new();
        for v in sub.enumerate(DEFAULT_ENUM_CAP)? {
            pre.insert(emb.apply(&v), v);
        }
        let roots = self
            .roots
            .iter()
            .map(|r| {
                r.iter()
                    .map(|v| pre.get(v).cloned().ok_or_else(|| Error::RootOutsideExtension))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        Ok(RootSet { field: sub.clone(), roots })
    }

    /// Descends to the smallest subfield holding every coordinate.
    pub fn minimal(&self) -> Result<RootSet> {
        if self.field.is_rational() || self.field.kind() == FieldKind::Prime {
            return Ok(self.clone());
        }
        let p = self.field.characteristic();
        let m = self.field.degree();
        for j in (1..=m).filter(|j| m % j == 0) {
            let q = p.pow(j);
            let fixed = self.roots.iter().flatten().all(|v| self.field.pow(v, q) == *v);
            if fixed {
                let sub = Field::galois(p, j)?;
                return self.descend(&sub);
            }
        }
        Ok(self.clone())
    }

    /// Roots sorted by their formatted coordinates, for set comparisons.
    pub fn sorted(&self) -> Vec<Vec<String>> {
        let mut v: Vec<Vec<String>> = self.roots.iter().map(|r| r.iter().map(|x| self.field.format(x)).collect()).collect();
        v.sort();
        v
    }
}

// Dense univariate polynomials, constant term first.

fn upoly_trim(f: &Field, a: &mut Vec<Value>) {
    while a.last().is_some_and(|c| f.is_zero(c)) {
        a.pop();
    }
}

fn upoly_eval(f: &Field, a: &[Value], x: &Value) -> Value {
    let mut acc = f.zero();
    for c in a.iter().rev() {
        acc = f.add(&f.mul(&acc, x), c);
    }
    acc
}

fn upoly_rem(f: &Field, a: &[Value], b: &[Value]) -> Vec<Value> {
    let mut r = a.to_vec();
    upoly_trim(f, &mut r);
    let db = b.len() - 1;
    let lead_inv = f.inv(&b[db]).expect("trimmed divisor");
    while r.len() > db {
        let k = r.len() - 1 - db;
        let q = f.mul(r.last().unwrap(), &lead_inv);
        for (i, c) in b.iter().enumerate() {
            r[k + i] = f.sub(&r[k + i], &f.mul(&q, c));
        }
        upoly_trim(f, &mut r);
    }
    r
}

fn upoly_gcd(f: &Field, a: &[Value], b: &[Value]) -> Vec<Value> {
    let (mut x, mut y) = (a.to_vec(), b.to_vec());
    upoly_trim(f, &mut x);
    upoly_trim(f, &mut y);
    while !y.is_empty() {
        let r = upoly_rem(f, &x, &y);
        x = y;
        y = r;
    }
    x
}

fn upoly_derivative(f: &Field, a: &[Value]) -> Vec<Value> {
    let mut d: Vec<Value> = a.iter().enumerate().skip(1).map(|(i, c)| f.mul(&f.from_i64(i as i64), c)).collect();
    upoly_trim(f, &mut d);
    d
}

/// Divides by `x - r`, assuming `r` is a root.
fn upoly_deflate(f: &Field, a: &[Value], r: &Value) -> Vec<Value> {
    let n = a.len() - 1;
    let mut q = vec![f.zero(); n];
    let mut carry = f.zero();
    for i in (0..n).rev() {
        carry = f.add(&a[i + 1], &f.mul(&carry, r));
        q[i] = carry.clone();
    }
    q
}

fn upoly_mulmod(f: &Field, a: &[Value], b: &[Value], m: &[Value]) -> Vec<Value> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut prod = vec![f.zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if f.is_zero(x) {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            prod[i + j] = f.add(&prod[i + j], &f.mul(x, y));
        }
    }
    upoly_rem(f, &prod, m)
}

fn upoly_powmod(f: &Field, a: &[Value], mut e: u64, m: &[Value]) -> Vec<Value> {
    let mut base = upoly_rem(f, a, m);
    let mut acc = upoly_rem(f, &[f.one()], m);
    while e > 0 {
        if e & 1 == 1 {
            acc = upoly_mulmod(f, &acc, &base, m);
        }
        base = upoly_mulmod(f, &base, &base, m);
        e >>= 1;
    }
    acc
}

/// Whether a square-free `a` splits into linear factors over the finite
/// field `f`, tested as `x^q = x` modulo `a` by `k` successive `p`-th powers.
fn splits(f: &Field, a: &[Value]) -> bool {
    if a.len() <= 2 {
        return true;
    }
    let x = vec![f.zero(), f.one()];
    let mut h = upoly_rem(f, &x, a);
    for _ in 0..f.degree() {
        h = upoly_powmod(f, &h, f.characteristic(), a);
    }
    h == upoly_rem(f, &x, a)
}

fn squarefree(f: &Field, a: &[Value]) -> bool {
    let d = upoly_derivative(f, a);
    if d.is_empty() {
        return a.len() <= 1;
    }
    upoly_gcd(f, a, &d).len() == 1
}

/// Characteristic polynomial `det(xI - M)` by reduction to Hessenberg form.
pub fn charpoly(m: &FieldMatrix) -> Vec<Value> {
    let f = m.field().clone();
    let n = m.nrows();
    let mut h: Vec<Vec<Value>> = (0..n).map(|i| m.row(i).to_vec()).collect();
    for j in 0..n.saturating_sub(2) {
        let Some(piv) = (j + 1..n).find(|&i| !f.is_zero(&h[i][j])) else {
            continue;
        };
        if piv != j + 1 {
            h.swap(piv, j + 1);
            for row in h.iter_mut() {
                row.swap(piv, j + 1);
            }
        }
        let inv = f.inv(&h[j + 1][j]).expect("nonzero pivot");
        for i in j + 2..n {
            if f.is_zero(&h[i][j]) {
                continue;
            }
            let t = f.mul(&h[i][j], &inv);
            for k in j..n {
                let v = f.sub(&h[i][k], &f.mul(&t, &h[j + 1][k]));
                h[i][k] = v;
            }
            for row in h.iter_mut() {
                let v = f.add(&row[j + 1], &f.mul(&t, &row[i]));
                row[j + 1] = v;
            }
        }
    }
    // p_k(x) = (x - h_kk) p_{k-1} - sum_{i<k} h_ik (prod_{i<l<=k} h_{l,l-1}) p_{i-1}
    let mut ps: Vec<Vec<Value>> = vec![vec![f.one()]];
    for k in 0..n {
        let prev = &ps[k];
        let mut next = vec![f.zero(); k + 2];
        for (i, c) in prev.iter().enumerate() {
            next[i + 1] = f.add(&next[i + 1], c);
            next[i] = f.sub(&next[i], &f.mul(&h[k][k], c));
        }
        let mut prod = f.one();
        for i in (0..k).rev() {
            prod = f.mul(&prod, &h[i + 1][i]);
            if f.is_zero(&prod) {
                break;
            }
            let t = f.mul(&h[i][k], &prod);
            for (l, c) in ps[i].iter().enumerate() {
                next[l] = f.sub(&next[l], &f.mul(&t, c));
            }
        }
        ps.push(next);
    }
    ps.pop().unwrap()
}

/// Roots of a square-free `a` over a finite field by exhaustive evaluation,
/// or over the rationals from numeric eigenvalue candidates checked exactly.
fn find_roots(f: &Field, a: &[Value], m: &FieldMatrix) -> Result<Vec<Value>> {
    let mut rest = a.to_vec();
    let mut out = Vec::new();
    if f.is_rational() {
        let n = m.nrows();
        let dm = DMatrix::from_fn(n, n, |i, j| rational_to_f64(m.get(i, j).rat()));
        let scale = dm.iter().fold(1.0f64, |acc, x| acc.max(x.abs()));
        for ev in dm.complex_eigenvalues().iter() {
            if ev.im.abs() > 1e-6 * scale {
                continue;
            }
            for den in [1u64, 1 << 10, 1 << 20] {
                let cand = Value::Rat(Box::new(rationalize(ev.re, den)));
                if rest.len() > 1 && f.is_zero(&upoly_eval(f, &rest, &cand)) && !out.contains(&cand) {
                    rest = upoly_deflate(f, &rest, &cand);
                    out.push(cand);
                    break;
                }
            }
        }
    } else {
        if !splits(f, a) {
            return Err(Error::RootOutsideExtension);
        }
        for x in f.enumerate(DEFAULT_ENUM_CAP)? {
            if rest.len() <= 1 {
                break;
            }
            if f.is_zero(&upoly_eval(f, &rest, &x)) {
                rest = upoly_deflate(f, &rest, &x);
                out.push(x);
            }
        }
    }
    if rest.len() > 1 {
        return Err(Error::RootOutsideExtension);
    }
    out.sort_by_cached_key(|v| f.format(v));
    Ok(out)
}

/// Smallest total degree `m` with `p^m >= 4 N^2`, rounded up to a multiple of
/// the base degree.
fn working_degree(base: &Field, n: usize) -> u32 {
    let p = base.characteristic() as u128;
    let target = (4 * (n as u128) * (n as u128)).max(2);
    let mut m = 0u32;
    let mut q = 1u128;
    while q < target {
        q *= p;
        m += 1;
    }
    let k = base.degree();
    m.max(k).div_ceil(k) * k
}

fn embed_poly(g: &Polynomial, emb: &Embedding) -> Vec<(Vec<u16>, Value)> {
    g.terms().map(|(m, c)| (m.exponents().to_vec(), emb.apply(c))).collect()
}

fn eval_embedded(field: &Field, terms: &[(Vec<u16>, Value)], point: &[Value]) -> Value {
    let mut acc = field.zero();
    for (e, c) in terms {
        let mut t = c.clone();
        for (i, &k) in e.iter().enumerate() {
            if k > 0 {
                t = field.mul(&t, &field.pow(&point[i], k as u64));
            }
        }
        acc = field.add(&acc, &t);
    }
    acc
}

enum Attempt {
    Done(Vec<Vec<Value>>),
    Repeated,
    Split,
}

/// Recovers the roots of `sys` from its quotient data. `sys` supplies the
/// generators each candidate is checked against.
pub fn extract_roots(basis: &QuotientBasis, mats: &[MultiplicationMatrix], sys: &PolySystem, seed: u64) -> Result<RootSet> {
    let base = basis.terminal.field().clone();
    let n = basis.dim();
    if n == 0 {
        return Err(Error::InvalidArgument("empty quotient: the system has no roots".into()));
    }
    if basis.monomials[0].degree() != 0 {
        return Err(Error::InvalidArgument("the constant monomial is not standard".into()));
    }
    check_commuting(&base, mats)?;
    let mut degree = if base.is_rational() { 1 } else { working_degree(&base, n) / base.degree() };
    let mut draw = 0u32;
    loop {
        let (w, emb) = if base.is_rational() { (base.clone(), Embedding::identity(&base)) } else { extend_field(&base, degree)? };
        if w.size().is_some_and(|s| s > DEFAULT_ENUM_CAP) {
            return Err(if draw == 0 && degree == working_degree(&base, n) / base.degree() {
                Error::CapExceeded { size: w.size().unwrap() as u128, cap: DEFAULT_ENUM_CAP }
            } else {
                Error::RootOutsideExtension
            });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (draw as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
        match attempt(basis, mats, sys, &w, &emb, &mut rng)? {
            Attempt::Done(roots) => return Ok(RootSet { field: w, roots }),
            Attempt::Repeated => {
                draw += 1;
                if draw > REDRAWS {
                    return Err(Error::FailDegenerate);
                }
            }
            Attempt::Split => {
                if base.is_rational() {
                    return Err(Error::RootOutsideExtension);
                }
                degree += 1;
            }
        }
    }
}

fn attempt(
    basis: &QuotientBasis,
    mats: &[MultiplicationMatrix],
    sys: &PolySystem,
    w: &Field,
    emb: &Embedding,
    rng: &mut ChaCha8Rng,
) -> Result<Attempt> {
    let n = basis.dim();
    let nv = mats.len();
    let bound = 10 * (n as i64) * (n as i64);
    let coeffs: Vec<Value> = (0..nv)
        .map(|_| match w.size() {
            Some(q) => w.element_at(rng.gen_range(0..q)),
            None => w.from_i64(rng.gen_range(-bound..=bound)),
        })
        .collect();
    let cols: Vec<Vec<Vec<(usize, Value)>>> =
        mats.iter().map(|m| m.cols.iter().map(|c| c.iter().map(|(i, v)| (*i, emb.apply(v))).collect()).collect()).collect();
    let mut big = FieldMatrix::zeros(w, n, n);
    for (c, mc) in coeffs.iter().zip(&cols) {
        for (j, col) in mc.iter().enumerate() {
            for (i, v) in col {
                let cur = big.get(*i, j).clone();
                big.set(*i, j, w.add(&cur, &w.mul(c, v)));
            }
        }
    }
    let chi = charpoly(&big);
    if !squarefree(w, &chi) {
        return Ok(Attempt::Repeated);
    }
    let eig = match find_roots(w, &chi, &big) {
        Ok(e) => e,
        Err(Error::RootOutsideExtension) => return Ok(Attempt::Split),
        Err(e) => return Err(e),
    };
    // Krylov basis of the class of 1 under M, then x_i = h_i(M) on it.
    let mut kry = Vec::with_capacity(n);
    let mut v = vec![w.zero(); n];
    v[0] = w.one();
    for _ in 0..n {
        let mut next = vec![w.zero(); n];
        for (c, mc) in coeffs.iter().zip(&cols) {
            let part = apply_sparse(w, mc, &v);
            for (a, b) in next.iter_mut().zip(part) {
                *a = w.add(a, &w.mul(c, &b));
            }
        }
        kry.push(std::mem::replace(&mut v, next));
    }
    let targets: Vec<Vec<Value>> = (0..nv)
        .map(|i| {
            let x = Polynomial::var(basis.terminal.field(), sys.nvars(), i);
            basis.coords(&x).map(|c| c.iter().map(|t| emb.apply(t)).collect())
        })
        .collect::<Result<_>>()?;
    let mut aug = FieldMatrix::zeros(w, n, n + nv);
    for (j, col) in kry.iter().enumerate() {
        for (i, val) in col.iter().enumerate() {
            aug.set(i, j, val.clone());
        }
    }
    for (t, col) in targets.iter().enumerate() {
        for (i, val) in col.iter().enumerate() {
            aug.set(i, n + t, val.clone());
        }
    }
    let r = aug.rref();
    if r.rank != n || r.pivots.iter().any(|&p| p >= n) {
        return Ok(Attempt::Repeated);
    }
    let h: Vec<Vec<Value>> = (0..nv).map(|t| (0..n).map(|i| r.matrix.get(i, n + t).clone()).collect()).collect();
    let roots: Vec<Vec<Value>> = eig.iter().map(|lam| h.iter().map(|hi| upoly_eval(w, hi, lam)).collect()).collect();
    check_eigenbasis(basis, &cols, &roots, w)?;
    let gens: Vec<_> = sys.generators.iter().map(|g| embed_poly(g, emb)).collect();
    let mut kept: Vec<Vec<Value>> = roots.into_iter().filter(|r| gens.iter().all(|g| w.is_zero(&eval_embedded(w, g, r)))).collect();
    kept.sort_by_cached_key(|r| r.iter().map(|x| w.format(x)).collect::<Vec<_>>());
    Ok(Attempt::Done(kept))
}

/// Rows `V[r] = (b_j(r))_j` must be independent and satisfy
/// `V M_i = diag(r_i) V` for every variable, which is the statement that
/// `T^{-1} M_i T` is diagonal for `T = V^{-1}`.
fn check_eigenbasis(basis: &QuotientBasis, cols: &[Vec<Vec<(usize, Value)>>], roots: &[Vec<Value>], w: &Field) -> Result<()> {
    let n = basis.dim();
    let rows: Vec<Vec<Value>> = roots
        .iter()
        .map(|r| {
            basis
                .monomials
                .iter()
                .map(|m| {
                    let mut t = w.one();
                    for (i, &e) in m.exponents().iter().enumerate() {
                        if e > 0 {
                            t = w.mul(&t, &w.pow(&r[i], e as u64));
                        }
                    }
                    t
                })
                .collect()
        })
        .collect();
    for (i, mc) in cols.iter().enumerate() {
        for (r, row) in roots.iter().zip(&rows) {
            for (k, col) in mc.iter().enumerate() {
                let mut acc = w.zero();
                for (j, v) in col {
                    acc = w.add(&acc, &w.mul(&row[*j], v));
                }
                if acc != w.mul(&r[i], &row[k]) {
                    return Err(Error::InvalidCertificate(format!("conjugated multiplication matrix for variable {i} is not diagonal")));
                }
            }
        }
    }
    let v = FieldMatrix::from_rows(w, rows)?;
    if v.rank() != n {
        return Err(Error::InvalidCertificate("eigenvectors do not form a basis".into()));
    }
    Ok(())
}

/// Runs the fixed-point count and recovers every root.
pub fn solve(sys: &PolySystem, bound: u32, seed: u64) -> Result<Option<RootSet>> {
    let o = fpnulla_run_with(sys, bound, FpnullaOptions { certificate: false, budget: None })?;
    match o.status {
        FpnullaStatus::Infeasible => Ok(Some(RootSet { field: sys.field.clone(), roots: Vec::new() })),
        FpnullaStatus::BoundReached => Ok(None),
        FpnullaStatus::Counted => {
            let (basis, mats) = build_quotient(o.terminal.as_ref().expect("counted outcome keeps its space"))?;
            extract_roots(&basis, &mats, sys, seed).map(Some)
        }
    }
}

/// Exact rational value of a rational root coordinate.
pub fn as_rational(v: &Value) -> BigRational {
    match v {
        Value::Rat(r) => (**r).clone(),
        Value::Fin(x) => BigRational::from_integer((*x).into()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encodings::{encode_coloring, Graph};
    use crate::fpnulla::fpnulla_run;

    fn quotient(sys: &PolySystem, bound: u32) -> (QuotientBasis, Vec<MultiplicationMatrix>) {
        let o = fpnulla_run(sys, bound).unwrap();
        assert_eq!(o.status, FpnullaStatus::Counted);
        build_quotient(o.terminal.as_ref().unwrap()).unwrap()
    }

    #[test]
    fn square_roots_of_one() {
        let sys = PolySystem::parse(&Field::rational(), &["x"], &["x^2 - 1"]).unwrap();
        let (b, m) = quotient(&sys, 3);
        assert_eq!(b.dim(), 2);
        assert_eq!(m[0].matrix, FieldMatrix::from_i64(&Field::rational(), &[vec![0, 1], vec![1, 0]]));
        let r = extract_roots(&b, &m, &sys, 1).unwrap();
        assert_eq!(r.sorted(), vec![vec!["-1".to_string()], vec!["1".to_string()]]);
    }

    #[test]
    fn linear_system() {
        let sys = PolySystem::parse(&Field::rational(), &["x"], &["x - 3/2"]).unwrap();
        let (b, m) = quotient(&sys, 2);
        assert_eq!(b.dim(), 1);
        assert_eq!(m[0].matrix.get(0, 0), &Field::rational().parse("3/2").unwrap());
    }

    #[test]
    fn charpoly_companion() {
        let q = Field::rational();
        let m = FieldMatrix::from_i64(&q, &[vec![0, 0, 6], vec![1, 0, -11], vec![0, 1, 6]]);
        let c: Vec<String> = charpoly(&m).iter().map(|v| q.format(v)).collect();
        assert_eq!(c, vec!["-6", "11", "-6", "1"]);
    }

    #[test]
    fn triangle_over_gf4() {
        let sys = encode_coloring(&Graph::complete(3), 3, &Field::f2(), Some(0)).unwrap();
        let (b, m) = quotient(&sys, 8);
        assert_eq!(b.dim(), 2);
        let r = extract_roots(&b, &m, &sys, 7).unwrap().minimal().unwrap();
        assert_eq!(r.field, Field::galois(2, 2).unwrap());
        assert_eq!(r.sorted(), vec![vec!["[1,0]", "[0,1]", "[1,1]"], vec!["[1,0]", "[1,1]", "[0,1]"]]);
    }

    #[test]
    fn deterministic() {
        let g = Graph::cycle(4);
        let sys = encode_coloring(&g, 3, &Field::f2(), Some(0)).unwrap();
        let a = solve(&sys, 10, 3).unwrap().unwrap();
        let b = solve(&sys, 10, 3).unwrap().unwrap();
        assert_eq!(a, b);
        assert_eq!(a.roots.len(), 6);
    }

    #[test]
    fn non_radical_fails() {
        let sys = PolySystem::parse(&Field::rational(), &["x"], &["x^2"]).unwrap();
        let (b, m) = quotient(&sys, 3);
        assert!(matches!(extract_roots(&b, &m, &sys, 0), Err(Error::FailDegenerate)));
    }

    #[test]
    fn irrational_roots_reported() {
        let sys = PolySystem::parse(&Field::rational(), &["x"], &["x^2 - 2"]).unwrap();
        let (b, m) = quotient(&sys, 3);
        assert!(matches!(extract_roots(&b, &m, &sys, 0), Err(Error::RootOutsideExtension)));
    }
}
