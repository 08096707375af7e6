use std::sync::Arc;

use super::sparse::{Dyn, Echelon, Gf2, Inserted, ProvRow, Row, Scalars};
use crate::error::{Error, Result};
use crate::fields::{Field, FieldElement, Value};
use crate::polys::{Monomial, MonomialRanker, Polynomial};

/// Echelon engine specialised to the coefficient field.
#[derive(Clone, Debug)]
pub enum Engine {
    Gf2(Echelon<Gf2>),
    Dyn(Echelon<Dyn>),
}

macro_rules! with_engine {
    ($e:expr, $x:ident => $body:expr) => {
        match $e {
            Engine::Gf2($x) => $body,
            Engine::Dyn($x) => $body,
        }
    };
}
pub(crate) use with_engine;

impl Engine {
    pub fn new(field: &Field, track: bool) -> Engine {
        if field.is_f2() {
            Engine::Gf2(Echelon::new(Gf2, track))
        } else {
            Engine::Dyn(Echelon::new(Dyn(field.clone()), track))
        }
    }

    pub fn len(&self) -> usize {
        with_engine!(self, e => e.len())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains_one(&self) -> bool {
        with_engine!(self, e => e.contains_one())
    }

    pub fn lead(&self, i: usize) -> u64 {
        with_engine!(self, e => e.lead(i))
    }
}

pub fn poly_to_row<S: Scalars>(s: &S, ranker: &MonomialRanker, p: &Polynomial) -> Row<S::V> {
    p.terms().map(|(m, c)| (ranker.rank(m), s.from_value(c))).collect()
}

pub fn row_to_poly<S: Scalars>(s: &S, field: &Field, ranker: &MonomialRanker, row: &[(u64, S::V)]) -> Polynomial {
    Polynomial::from_terms(field, ranker.nvars(), row.iter().map(|(c, v)| (ranker.unrank(*c), s.to_value(v))))
}

/// Multiplies a row by `x_i`. Grevlex is multiplicative, so order is kept.
pub fn mul_row_var<V: Clone>(ranker: &MonomialRanker, row: &[(u64, V)], i: usize, scratch: &mut [u16]) -> Vec<(u64, V)> {
    row.iter().map(|(c, v)| (ranker.mul_var(*c, i, scratch), v.clone())).collect()
}

pub fn mul_prov_var<V: Clone>(ranker: &MonomialRanker, prov: &ProvRow<V>, i: usize, scratch: &mut [u16]) -> ProvRow<V> {
    prov.iter().map(|((g, r), v)| ((*g, ranker.mul_var(*r, i, scratch)), v.clone())).collect()
}

/// A finite-dimensional space of polynomials of degree at most `degree_bound`,
/// held as a reduced row echelon basis over grevlex monomial columns.
#[derive(Clone, Debug)]
pub struct PolySpace {
    field: Field,
    nvars: usize,
    degree_bound: u32,
    ranker: Arc<MonomialRanker>,
    eng: Engine,
}

fn insert_all<S: Scalars>(e: &mut Echelon<S>, ranker: &MonomialRanker, polys: &[Polynomial]) {
    for p in polys {
        let row = poly_to_row(e.scalars(), ranker, p);
        e.insert(row, Vec::new());
    }
}

fn finish<S: Scalars>(e: &mut Echelon<S>) {
    e.interreduce();
    e.sort_rows();
}

impl PolySpace {
    pub fn empty(field: &Field, nvars: usize, degree_bound: u32) -> PolySpace {
        PolySpace {
            field: field.clone(),
            nvars,
            degree_bound,
            ranker: Arc::new(MonomialRanker::new(nvars)),
            eng: Engine::new(field, false),
        }
    }

    /// Span of `polys`; the degree bound is their maximum degree (0 if empty).
    pub fn space_from(field: &Field, nvars: usize, polys: &[Polynomial]) -> Result<PolySpace> {
        for p in polys {
            if p.field() != field {
                return Err(Error::FieldMismatch);
            }
            if p.nvars() != nvars {
                return Err(Error::Arity(format!("polynomial in {} variables, space in {nvars}", p.nvars())));
            }
        }
        let d = polys.iter().map(|p| p.degree()).max().unwrap_or(0).max(0) as u32;
        let mut s = PolySpace::empty(field, nvars, d);
        with_engine!(&mut s.eng, e => { insert_all(e, &s.ranker, polys); finish(e); });
        Ok(s)
    }

    /// Wraps an engine built elsewhere, restricted to rows of degree at most `d`.
    pub(crate) fn from_engine(field: &Field, ranker: Arc<MonomialRanker>, mut eng: Engine, d: u32) -> PolySpace {
        let limit = ranker.count_up_to(d as i64);
        with_engine!(&mut eng, e => { e.retain_leads(|c| c < limit); finish(e); });
        PolySpace { field: field.clone(), nvars: ranker.nvars(), degree_bound: d, ranker, eng }
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn degree_bound(&self) -> u32 {
        self.degree_bound
    }

    pub fn dim(&self) -> usize {
        self.eng.len()
    }

    pub fn ranker(&self) -> &MonomialRanker {
        &self.ranker
    }

    pub fn contains_one(&self) -> bool {
        self.eng.contains_one()
    }

    /// Basis polynomials, ordered by ascending leading monomial.
    pub fn basis(&self) -> Vec<Polynomial> {
        with_engine!(&self.eng, e => (0..e.len()).map(|i| row_to_poly(e.scalars(), &self.field, &self.ranker, e.row(i))).collect())
    }

    pub fn leading_monomials(&self) -> Vec<Monomial> {
        (0..self.dim()).map(|i| self.ranker.unrank(self.eng.lead(i))).collect()
    }

    /// Number of basis rows whose leading monomial has degree at most `d`.
    pub fn dim_up_to(&self, d: i64) -> usize {
        let limit = self.ranker.count_up_to(d);
        (0..self.dim()).filter(|&i| self.eng.lead(i) < limit).count()
    }

    fn check(&self, f: &Polynomial) -> Result<()> {
        if f.field() != &self.field {
            return Err(Error::FieldMismatch);
        }
        if f.nvars() != self.nvars {
            return Err(Error::Arity(format!("polynomial in {} variables, space in {}", f.nvars(), self.nvars)));
        }
        Ok(())
    }

    /// Coefficients expressing `f` in [`PolySpace::basis`], or `None` when `f`
    /// is not a member.
    pub fn contains(&self, f: &Polynomial) -> Result<Option<Vec<FieldElement>>> {
        self.check(f)?;
        with_engine!(&self.eng, e => {
            let s = e.scalars();
            let (rem, coeffs) = e.reduce(&poly_to_row(s, &self.ranker, f));
            if !rem.is_empty() {
                return Ok(None);
            }
            let mut out = vec![self.field.zero(); e.len()];
            for (i, c) in coeffs {
                out[i] = self.field.add(&out[i], &s.to_value(&c));
            }
            Ok(Some(out.into_iter().map(|v| FieldElement::new(&self.field, v)).collect()))
        })
    }

    /// Remainder of `f` after full reduction against the basis.
    pub fn normal_form(&self, f: &Polynomial) -> Result<Polynomial> {
        self.check(f)?;
        Ok(with_engine!(&self.eng, e => {
            let (rem, _) = e.reduce(&poly_to_row(e.scalars(), &self.ranker, f));
            row_to_poly(e.scalars(), &self.field, &self.ranker, &rem)
        }))
    }

    /// `S + x_1 S + .. + x_n S`, with the degree bound raised by one.
    pub fn expand_once(&self) -> PolySpace {
        let mut out = self.clone();
        let n = self.nvars;
        with_engine!(&mut out.eng, e => {
            let base = e.len();
            let mut scratch = vec![0u16; n];
            for r in 0..base {
                for i in 0..n {
                    let row = mul_row_var(&self.ranker, e.row(r), i, &mut scratch);
                    e.insert(row, Vec::new());
                }
            }
            finish(e);
        });
        out.degree_bound += 1;
        out
    }

    /// Members of degree at most `d`.
    pub fn intersect_with_degree(&self, d: u32) -> PolySpace {
        let d = d.min(self.degree_bound);
        PolySpace::from_engine(&self.field, self.ranker.clone(), self.eng.clone(), d)
    }

    /// `dim R_d - dim(S ∩ R_d)`.
    pub fn codim_at(&self, d: u32) -> u64 {
        self.ranker.count_up_to(d as i64) - self.dim_up_to(d as i64) as u64
    }

    /// Repeats `S := S⁺ ∩ R_d` until the space stops growing or contains 1.
    pub fn fixed_point_close(&self) -> PolySpace {
        let d = self.degree_bound;
        let mut s = self.clone();
        loop {
            if s.contains_one() {
                return s;
            }
            let next = s.expand_once().intersect_with_degree(d);
            if next.dim() == s.dim() {
                return s;
            }
            s = next;
        }
    }

    /// Monomials of degree at most `d` that are not leading monomials.
    pub fn standard_monomials(&self, d: u32) -> Vec<Monomial> {
        let limit = self.ranker.count_up_to(d as i64);
        let leads: std::collections::HashSet<u64> = (0..self.dim()).map(|i| self.eng.lead(i)).collect();
        (0..limit).filter(|c| !leads.contains(c)).map(|c| self.ranker.unrank(c)).collect()
    }

    /// Inserts one more polynomial (degree must respect the bound).
    pub fn insert(&mut self, f: &Polynomial) -> Result<bool> {
        self.check(f)?;
        if f.degree() > self.degree_bound as i64 {
            return Err(Error::InvalidArgument("polynomial exceeds the degree bound".into()));
        }
        let ranker = self.ranker.clone();
        Ok(with_engine!(&mut self.eng, e => {
            let row = poly_to_row(e.scalars(), &ranker, f);
            let added = matches!(e.insert(row, Vec::new()), Inserted::New(_));
            finish(e);
            added
        }))
    }

    /// Raw coefficient of row `i` at monomial `m`.
    pub fn basis_coeff(&self, i: usize, m: &Monomial) -> Value {
        let c = self.ranker.rank(m);
        with_engine!(&self.eng, e => {
            let row = e.row(i);
            match row.binary_search_by(|t| c.cmp(&t.0)) {
                Ok(k) => e.scalars().to_value(&row[k].1),
                Err(_) => self.field.zero(),
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polys::default_names;

    fn p(f: &Field, n: usize, s: &str) -> Polynomial {
        Polynomial::parse(f, &default_names(n), s).unwrap()
    }

    #[test]
    fn span_basics() {
        let f = Field::f2();
        let s = PolySpace::space_from(&f, 2, &[p(&f, 2, "x1"), p(&f, 2, "x1"), p(&f, 2, "x1 + x2")]).unwrap();
        assert_eq!(s.dim(), 2);
        let b: Vec<String> = s.basis().iter().map(|x| x.to_string()).collect();
        assert_eq!(b, vec!["x2", "x1"]);
        assert_eq!(PolySpace::space_from(&f, 2, &[]).unwrap().dim(), 0);
    }

    #[test]
    fn membership_coefficients() {
        let q = Field::rational();
        let s = PolySpace::space_from(&q, 2, &[p(&q, 2, "x1"), p(&q, 2, "x2")]).unwrap();
        let c = s.contains(&p(&q, 2, "x1 + x2")).unwrap().unwrap();
        assert!(c.iter().all(|x| x.to_string() == "1"));
        assert!(s.contains(&p(&q, 2, "1")).unwrap().is_none());
    }

    #[test]
    fn degree_intersection() {
        let q = Field::rational();
        let s = PolySpace::space_from(&q, 1, &[p(&q, 1, "x1^2"), p(&q, 1, "x1 + 1")]).unwrap();
        let t = s.intersect_with_degree(1);
        assert_eq!(t.basis(), vec![p(&q, 1, "x1 + 1")]);
        assert_eq!(s.intersect_with_degree(2).dim(), 2);
    }

    #[test]
    fn expand_unit() {
        let q = Field::rational();
        let s = PolySpace::space_from(&q, 3, &[p(&q, 3, "1")]).unwrap().expand_once();
        assert_eq!(s.dim(), 4);
        assert_eq!(s.degree_bound(), 1);
        assert_eq!(PolySpace::empty(&q, 3, 0).expand_once().dim(), 0);
    }

    #[test]
    fn codim_of_empty() {
        let q = Field::rational();
        assert_eq!(PolySpace::empty(&q, 1, 1).codim_at(1), 2);
    }
}
