//! Sparse semi-echelon elimination over monomial-rank columns.
//!
//! Rows are sorted by descending column, so the first entry is the leading
//! term. Every stored row is monic and owns a distinct leading column.
//! Inserted rows are only lead-reduced; full reduction happens on demand.
//! Each row can carry a companion row recording how it was formed from the
//! original generators, keyed by `(generator index, multiplier rank)`.

use std::fmt::Debug;

use rustc_hash::FxHashMap;

use crate::fields::{Field, Value};

/// Scalar arithmetic used in the elimination hot loop.
pub trait Scalars: Clone {
    type V: Clone + Debug + PartialEq + Send + Sync;
    fn one(&self) -> Self::V;
    fn is_one(&self, a: &Self::V) -> bool;
    fn neg(&self, a: &Self::V) -> Self::V;
    fn mul(&self, a: &Self::V, b: &Self::V) -> Self::V;
    fn inv(&self, a: &Self::V) -> Self::V;
    /// `a + f*b`, or `None` when the result vanishes.
    fn add_mul(&self, a: &Self::V, f: &Self::V, b: &Self::V) -> Option<Self::V>;
    fn from_value(&self, v: &Value) -> Self::V;
    fn to_value(&self, v: &Self::V) -> Value;
}

/// F_2: every stored coefficient is 1, so values carry no data.
#[derive(Clone, Copy, Debug)]
pub struct Gf2;

impl Scalars for Gf2 {
    type V = ();
    fn one(&self) {}
    fn is_one(&self, _: &()) -> bool {
        true
    }
    fn neg(&self, _: &()) {}
    fn mul(&self, _: &(), _: &()) {}
    fn inv(&self, _: &()) {}
    fn add_mul(&self, _: &(), _: &(), _: &()) -> Option<()> {
        None
    }
    fn from_value(&self, _: &Value) {}
    fn to_value(&self, _: &()) -> Value {
        Value::Fin(1)
    }
}

/// Any field through the dynamic [`Field`] handle.
#[derive(Clone, Debug)]
pub struct Dyn(pub Field);

impl Scalars for Dyn {
    type V = Value;
    fn one(&self) -> Value {
        self.0.one()
    }
    fn is_one(&self, a: &Value) -> bool {
        self.0.is_one(a)
    }
    fn neg(&self, a: &Value) -> Value {
        self.0.neg(a)
    }
    fn mul(&self, a: &Value, b: &Value) -> Value {
        self.0.mul(a, b)
    }
    fn inv(&self, a: &Value) -> Value {
        self.0.inv(a).expect("pivot is nonzero")
    }
    fn add_mul(&self, a: &Value, f: &Value, b: &Value) -> Option<Value> {
        let r = self.0.add(a, &self.0.mul(f, b));
        if self.0.is_zero(&r) {
            None
        } else {
            Some(r)
        }
    }
    fn from_value(&self, v: &Value) -> Value {
        v.clone()
    }
    fn to_value(&self, v: &Value) -> Value {
        v.clone()
    }
}

/// Provenance key: generator index and the rank of its monomial multiplier.
pub type ProvKey = (u32, u64);

pub type Row<V> = Vec<(u64, V)>;
pub type ProvRow<V> = Vec<(ProvKey, V)>;

/// `a + f*b` for sparse vectors sorted by descending key.
pub fn axpy<K: Ord + Copy, S: Scalars>(s: &S, a: &[(K, S::V)], f: &S::V, b: &[(K, S::V)]) -> Vec<(K, S::V)> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        let (ka, kb) = (a[i].0, b[j].0);
        if ka > kb {
            out.push(a[i].clone());
            i += 1;
        } else if kb > ka {
            out.push((kb, s.mul(f, &b[j].1)));
            j += 1;
        } else {
            if let Some(v) = s.add_mul(&a[i].1, f, &b[j].1) {
                out.push((ka, v));
            }
            i += 1;
            j += 1;
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend(b[j..].iter().map(|(k, v)| (*k, s.mul(f, v))));
    out
}

fn scale<K: Copy, S: Scalars>(s: &S, a: &mut [(K, S::V)], f: &S::V) {
    for t in a.iter_mut() {
        t.1 = s.mul(f, &t.1);
    }
}

#[derive(Clone, Debug)]
pub struct Echelon<S: Scalars> {
    s: S,
    rows: Vec<Row<S::V>>,
    prov: Vec<ProvRow<S::V>>,
    pivot: FxHashMap<u64, u32>,
    track: bool,
}

/// Outcome of inserting a row.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Inserted {
    New(usize),
    Dependent,
}

impl<S: Scalars> Echelon<S> {
    pub fn new(s: S, track: bool) -> Self {
        Echelon { s, rows: Vec::new(), prov: Vec::new(), pivot: FxHashMap::default(), track }
    }

    pub fn scalars(&self) -> &S {
        &self.s
    }

    pub fn tracking(&self) -> bool {
        self.track
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn row(&self, i: usize) -> &Row<S::V> {
        &self.rows[i]
    }

    pub fn prov(&self, i: usize) -> &ProvRow<S::V> {
        &self.prov[i]
    }

    pub fn lead(&self, i: usize) -> u64 {
        self.rows[i][0].0
    }

    pub fn pivot_row(&self, col: u64) -> Option<usize> {
        self.pivot.get(&col).map(|&i| i as usize)
    }

    /// True when the constant monomial (column 0) is a pivot, i.e. 1 is in the span.
    pub fn contains_one(&self) -> bool {
        self.pivot.contains_key(&0)
    }

    /// Lead-reduces `row` and stores it when independent.
    pub fn insert(&mut self, mut row: Row<S::V>, mut prov: ProvRow<S::V>) -> Inserted {
        while let Some((c, a)) = row.first() {
            let Some(&pi) = self.pivot.get(c) else { break };
            let f = self.s.neg(a);
            let pi = pi as usize;
            row = axpy(&self.s, &row, &f, &self.rows[pi]);
            if self.track {
                prov = axpy(&self.s, &prov, &f, &self.prov[pi]);
            }
        }
        let Some((lead, a)) = row.first() else { return Inserted::Dependent };
        let lead = *lead;
        if !self.s.is_one(a) {
            let inv = self.s.inv(a);
            scale(&self.s, &mut row, &inv);
            if self.track {
                scale(&self.s, &mut prov, &inv);
            }
        }
        let idx = self.rows.len();
        self.pivot.insert(lead, idx as u32);
        self.rows.push(row);
        self.prov.push(if self.track { prov } else { Vec::new() });
        Inserted::New(idx)
    }

    /// Fully reduces `v`; returns the remainder and the coefficients `c_r` with
    /// `v = sum c_r row_r + remainder`.
    pub fn reduce(&self, v: &[(u64, S::V)]) -> (Row<S::V>, Vec<(usize, S::V)>) {
        let mut rem = Vec::new();
        let mut coeffs = Vec::new();
        let mut w: Row<S::V> = v.to_vec();
        let mut pos = 0;
        while pos < w.len() {
            let (c, a) = w[pos].clone();
            match self.pivot.get(&c) {
                Some(&pi) => {
                    let pi = pi as usize;
                    let f = self.s.neg(&a);
                    w = axpy(&self.s, &w[pos..], &f, &self.rows[pi]);
                    pos = 0;
                    coeffs.push((pi, a));
                }
                None => {
                    rem.push((c, a));
                    pos += 1;
                }
            }
        }
        (rem, coeffs)
    }

    /// Brings the stored rows to reduced echelon form: no row contains another
    /// row's leading column. Leading columns and spans are unchanged.
    pub fn interreduce(&mut self) {
        let mut order: Vec<usize> = (0..self.rows.len()).collect();
        order.sort_by_key(|&i| self.rows[i][0].0);
        for &i in &order {
            let mut row = std::mem::take(&mut self.rows[i]);
            let mut prov = std::mem::take(&mut self.prov[i]);
            let mut pos = 1;
            while pos < row.len() {
                let c = row[pos].0;
                match self.pivot.get(&c) {
                    Some(&pi) => {
                        let pi = pi as usize;
                        let f = self.s.neg(&row[pos].1);
                        let tail = axpy(&self.s, &row[pos..], &f, &self.rows[pi]);
                        row.truncate(pos);
                        row.extend(tail);
                        if self.track {
                            prov = axpy(&self.s, &prov, &f, &self.prov[pi]);
                        }
                    }
                    None => pos += 1,
                }
            }
            self.rows[i] = row;
            self.prov[i] = prov;
        }
    }

    /// Keeps only rows whose leading column satisfies `keep`, preserving order.
    pub fn retain_leads<F: Fn(u64) -> bool>(&mut self, keep: F) {
        let mut rows = Vec::new();
        let mut prov = Vec::new();
        for (r, p) in std::mem::take(&mut self.rows).into_iter().zip(std::mem::take(&mut self.prov)) {
            if keep(r[0].0) {
                rows.push(r);
                prov.push(p);
            }
        }
        self.pivot = rows.iter().enumerate().map(|(i, r)| (r[0].0, i as u32)).collect();
        self.rows = rows;
        self.prov = prov;
    }

    /// Sorts rows by ascending leading column.
    pub fn sort_rows(&mut self) {
        let mut pairs: Vec<_> = std::mem::take(&mut self.rows).into_iter().zip(std::mem::take(&mut self.prov)).collect();
        pairs.sort_by_key(|(r, _)| r[0].0);
        let (rows, prov): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
        self.pivot = rows.iter().enumerate().map(|(i, r): (usize, &Row<S::V>)| (r[0].0, i as u32)).collect();
        self.rows = rows;
        self.prov = prov;
    }
}
