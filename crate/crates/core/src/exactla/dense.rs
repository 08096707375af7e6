//! Dense matrices over any field.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::gf2::BitMatrix;
use crate::error::{Error, Result};
use crate::fields::{Field, FieldElement, Value};

#[derive(Clone, Debug, PartialEq)]
pub struct FieldMatrix {
    field: Field,
    rows: usize,
    cols: usize,
    data: Vec<Value>,
}

/// Result of [`FieldMatrix::rref`].
#[derive(Clone, Debug, PartialEq)]
pub struct Rref {
    pub matrix: FieldMatrix,
    pub rank: usize,
    pub pivots: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LinearSolution {
    Solution(Vec<Value>),
    /// A left-nullspace vector `y` with `y^T M = 0` and `y^T b != 0`.
    Infeasible(Vec<Value>),
}

impl FieldMatrix {
    pub fn zeros(field: &Field, rows: usize, cols: usize) -> FieldMatrix {
        FieldMatrix { field: field.clone(), rows, cols, data: vec![field.zero(); rows * cols] }
    }

    pub fn identity(field: &Field, n: usize) -> FieldMatrix {
        let mut m = FieldMatrix::zeros(field, n, n);
        for i in 0..n {
            m.set(i, i, field.one());
        }
        m
    }

    pub fn from_rows(field: &Field, rows: Vec<Vec<Value>>) -> Result<FieldMatrix> {
        let r = rows.len();
        let c = rows.first().map(|x| x.len()).unwrap_or(0);
        if rows.iter().any(|x| x.len() != c) {
            return Err(Error::InvalidArgument("ragged matrix rows".into()));
        }
        Ok(FieldMatrix { field: field.clone(), rows: r, cols: c, data: rows.into_iter().flatten().collect() })
    }

    pub fn from_i64(field: &Field, rows: &[Vec<i64>]) -> FieldMatrix {
        let vals = rows.iter().map(|r| r.iter().map(|&x| field.from_i64(x)).collect()).collect();
        FieldMatrix::from_rows(field, vals).expect("rectangular input")
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Value {
        &self.data[i * self.cols + j]
    }

    pub fn element(&self, i: usize, j: usize) -> FieldElement {
        FieldElement::new(&self.field, self.get(i, j).clone())
    }

    pub fn set(&mut self, i: usize, j: usize, v: Value) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Value] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> FieldMatrix {
        let mut t = FieldMatrix::zeros(&self.field, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn mul(&self, o: &FieldMatrix) -> Result<FieldMatrix> {
        if self.field != o.field {
            return Err(Error::FieldMismatch);
        }
        if self.cols != o.rows {
            return Err(Error::Arity(format!("{}x{} times {}x{}", self.rows, self.cols, o.rows, o.cols)));
        }
        let f = &self.field;
        let mut r = FieldMatrix::zeros(f, self.rows, o.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if f.is_zero(a) {
                    continue;
                }
                for j in 0..o.cols {
                    let b = o.get(k, j);
                    if f.is_zero(b) {
                        continue;
                    }
                    let v = f.add(r.get(i, j), &f.mul(a, b));
                    r.set(i, j, v);
                }
            }
        }
        Ok(r)
    }

    pub fn mul_vec(&self, v: &[Value]) -> Vec<Value> {
        let f = &self.field;
        (0..self.rows)
            .map(|i| {
                let mut acc = f.zero();
                for (j, x) in v.iter().enumerate() {
                    acc = f.add(&acc, &f.mul(self.get(i, j), x));
                }
                acc
            })
            .collect()
    }

    pub fn add_scaled_identity(&self, c: &Value) -> FieldMatrix {
        let mut m = self.clone();
        for i in 0..self.rows.min(self.cols) {
            let v = self.field.add(m.get(i, i), c);
            m.set(i, i, v);
        }
        m
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|v| self.field.is_zero(v))
    }

    pub fn to_bits(&self) -> BitMatrix {
        let mut b = BitMatrix::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                if self.get(i, j).fin() == 1 {
                    b.set(i, j, true);
                }
            }
        }
        b
    }

    pub fn from_bits(b: &BitMatrix) -> FieldMatrix {
        let f = Field::f2();
        let mut m = FieldMatrix::zeros(&f, b.nrows(), b.ncols());
        for i in 0..b.nrows() {
            for j in 0..b.ncols() {
                if b.get(i, j) {
                    m.set(i, j, Value::Fin(1));
                }
            }
        }
        m
    }

    /// Reduced row echelon form. Dispatches to the bit-packed kernel over F_2
    /// and to fraction-free elimination over Q.
    pub fn rref(&self) -> Rref {
        if self.field.is_f2() {
            let (b, pivots) = self.to_bits().rref();
            return Rref { matrix: FieldMatrix::from_bits(&b), rank: pivots.len(), pivots };
        }
        if self.field.is_rational() {
            return self.rref_fraction_free();
        }
        self.rref_generic()
    }

    /// Plain Gauss-Jordan elimination over the field.
    pub fn rref_generic(&self) -> Rref {
        let f = self.field.clone();
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(p) = (r..m.rows).find(|&i| !f.is_zero(m.get(i, c))) else { continue };
            m.swap_rows(r, p);
            let inv = f.inv(m.get(r, c)).expect("pivot is nonzero");
            for j in c..m.cols {
                let v = f.mul(m.get(r, j), &inv);
                m.set(r, j, v);
            }
            for i in 0..m.rows {
                if i == r || f.is_zero(m.get(i, c)) {
                    continue;
                }
                let factor = m.get(i, c).clone();
                for j in c..m.cols {
                    let v = f.sub(m.get(i, j), &f.mul(&factor, m.get(r, j)));
                    m.set(i, j, v);
                }
            }
            pivots.push(c);
            r += 1;
        }
        Rref { matrix: m, rank: pivots.len(), pivots }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    /// Bareiss forward elimination on integer-scaled rows, then exact
    /// back-substitution and normalization over Q.
    fn rref_fraction_free(&self) -> Rref {
        let (rows, cols) = (self.rows, self.cols);
        let mut a: Vec<Vec<BigInt>> = (0..rows)
            .map(|i| {
                let row = self.row(i);
                let l = row.iter().fold(BigInt::one(), |acc, v| acc.lcm(v.rat().denom()));
                row.iter().map(|v| (v.rat() * BigRational::from_integer(l.clone())).to_integer()).collect()
            })
            .collect();
        let mut prev = BigInt::one();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..cols {
            if r == rows {
                break;
            }
            let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else { continue };
            a.swap(r, p);
            for i in r + 1..rows {
                for j in c + 1..cols {
                    let v = (&a[r][c] * &a[i][j] - &a[i][c] * &a[r][j]) / &prev;
                    a[i][j] = v;
                }
                a[i][c] = BigInt::zero();
            }
            prev = a[r][c].clone();
            pivots.push(c);
            r += 1;
        }
        let rank = pivots.len();
        let mut q: Vec<Vec<BigRational>> = a
            .into_iter()
            .map(|row| row.into_iter().map(BigRational::from_integer).collect())
            .collect();
        for (ri, &pc) in pivots.iter().enumerate().rev() {
            let inv = q[ri][pc].recip();
            for j in pc..cols {
                q[ri][j] = &q[ri][j] * &inv;
            }
            for i in 0..ri {
                if q[i][pc].is_zero() {
                    continue;
                }
                let factor = q[i][pc].clone();
                for j in pc..cols {
                    let v = &q[i][j] - &factor * &q[ri][j];
                    q[i][j] = v;
                }
            }
        }
        let data = q.into_iter().flatten().map(|x| Value::Rat(Box::new(x))).collect();
        Rref { matrix: FieldMatrix { field: self.field.clone(), rows, cols, data }, rank, pivots }
    }

    pub fn rank(&self) -> usize {
        self.rref().rank
    }

    /// Basis of the right nullspace, one vector per free column.
    pub fn nullspace(&self) -> Vec<Vec<Value>> {
        let r = self.rref();
        let f = &self.field;
        let mut free = vec![true; self.cols];
        for &p in &r.pivots {
            free[p] = false;
        }
        let mut out = Vec::new();
        for c in (0..self.cols).filter(|&c| free[c]) {
            let mut v = vec![f.zero(); self.cols];
            v[c] = f.one();
            for (ri, &pc) in r.pivots.iter().enumerate() {
                v[pc] = f.neg(r.matrix.get(ri, c));
            }
            out.push(v);
        }
        out
    }

    /// Solves `M x = b`, zeroing free variables, or returns a Fredholm witness.
    pub fn solve_linear(&self, b: &[Value]) -> Result<LinearSolution> {
        if b.len() != self.rows {
            return Err(Error::Arity(format!("right-hand side of length {} for {} rows", b.len(), self.rows)));
        }
        let f = &self.field;
        let (m, n) = (self.rows, self.cols);
        let mut aug = FieldMatrix::zeros(f, m, n + 1 + m);
        for i in 0..m {
            for j in 0..n {
                aug.set(i, j, self.get(i, j).clone());
            }
            aug.set(i, n, b[i].clone());
            aug.set(i, n + 1 + i, f.one());
        }
        let r = aug.rref();
        if let Some(ri) = r.pivots.iter().position(|&p| p == n) {
            let y = (0..m).map(|i| r.matrix.get(ri, n + 1 + i).clone()).collect();
            return Ok(LinearSolution::Infeasible(y));
        }
        let mut x = vec![f.zero(); n];
        for (ri, &pc) in r.pivots.iter().enumerate() {
            if pc < n {
                x[pc] = r.matrix.get(ri, n).clone();
            }
        }
        Ok(LinearSolution::Solution(x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_rref() {
        let q = Field::rational();
        let i = FieldMatrix::identity(&q, 3);
        let r = i.rref();
        assert_eq!(r.rank, 3);
        assert_eq!(r.matrix, i);
    }

    #[test]
    fn f2_rank_one() {
        let f = Field::f2();
        let m = FieldMatrix::from_i64(&f, &[vec![1, 1], vec![1, 1]]);
        let r = m.rref();
        assert_eq!(r.rank, 1);
        assert_eq!(r.matrix, FieldMatrix::from_i64(&f, &[vec![1, 1], vec![0, 0]]));
    }

    #[test]
    fn solve_identity() {
        let q = Field::rational();
        let m = FieldMatrix::identity(&q, 2);
        let b = vec![q.from_i64(1), q.from_i64(2)];
        assert_eq!(m.solve_linear(&b).unwrap(), LinearSolution::Solution(b.clone()));
    }

    #[test]
    fn fredholm_witness() {
        let q = Field::rational();
        let m = FieldMatrix::from_i64(&q, &[vec![1, 1], vec![2, 2]]);
        let b = vec![q.from_i64(1), q.from_i64(3)];
        let LinearSolution::Infeasible(y) = m.solve_linear(&b).unwrap() else { panic!("expected infeasible") };
        let yt = FieldMatrix::from_rows(&q, vec![y.clone()]).unwrap();
        assert!(yt.mul(&m).unwrap().is_zero());
        let yb = y.iter().zip(&b).fold(q.zero(), |acc, (u, v)| q.add(&acc, &q.mul(u, v)));
        assert!(!q.is_zero(&yb));
    }

    #[test]
    fn fraction_free_matches_generic() {
        let q = Field::rational();
        let m = FieldMatrix::from_i64(&q, &[vec![2, 4, 1, 3], vec![1, 2, 0, 1], vec![3, 6, 1, 4], vec![0, 0, 5, 7]]);
        assert_eq!(m.rref(), m.rref_generic());
    }
}
