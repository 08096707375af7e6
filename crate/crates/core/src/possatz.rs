//! Real certificates: Gram-matrix sums of squares, bounded-degree
//! Positivstellensatz search, the matching moment relaxation, and the first
//! theta body of a stable-set ideal.
//!
//! Input polynomials have rational coefficients. The SDP works in floating
//! point; certificates are stored with rational entries so that both the
//! floating tolerance check and the exact check run on the same data.

use std::collections::{BTreeMap, HashMap};

use nalgebra::{DMatrix, SymmetricEigen};
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::encodings::Graph;
use crate::error::{Error, Result};
use crate::exactla::{FieldMatrix, LinearSolution};
use crate::fields::{rational_to_f64, rationalize, Field, Value};
use crate::polys::{monomials_up_to, Monomial, Polynomial, TermJson};
use crate::sdpcore::{psd_check, sdp_solve, verify_ray, SdpOptions, SdpProblem, SdpResult, SdpStatus, Sense};

pub const PSD_TOL: f64 = 1e-8;
pub const RES_TOL: f64 = 1e-7;
pub const CERT_TOL: f64 = 1e-6;
/// Largest number of inequalities accepted by the Psatz search.
pub const MAX_INEQS: usize = 12;

fn q() -> Field {
    Field::rational()
}

fn rat(v: f64) -> BigRational {
    BigRational::from_float(v).unwrap_or_else(BigRational::zero)
}

fn coef_f64(v: &Value) -> f64 {
    rational_to_f64(v.rat())
}

/// Exact constraint data: block entries, free coefficients, right-hand side.
type ExactRow = (Vec<(usize, usize, usize, BigRational)>, Vec<(usize, BigRational)>, BigRational);

/// Builds a constraint from accumulated entries.
#[derive(Default)]
struct Row {
    entries: BTreeMap<(usize, usize, usize), BigRational>,
    free: BTreeMap<usize, BigRational>,
}

impl Row {
    fn add_entry(&mut self, blk: usize, a: usize, b: usize, v: &BigRational) {
        let key = (blk, a.min(b), a.max(b));
        *self.entries.entry(key).or_insert_with(BigRational::zero) += v;
    }

    fn add_free(&mut self, k: usize, v: &BigRational) {
        *self.free.entry(k).or_insert_with(BigRational::zero) += v;
    }

    fn finish(self, b: BigRational) -> ExactRow {
        let e = self.entries.into_iter().filter(|(_, v)| !v.is_zero()).map(|((k, a, c), v)| (k, a, c, v)).collect();
        let f = self.free.into_iter().filter(|(_, v)| !v.is_zero()).collect();
        (e, f, b)
    }
}

fn push_exact(prob: &mut SdpProblem, row: &ExactRow) {
    let e = row.0.iter().map(|(k, a, b, v)| (*k, *a, *b, rational_to_f64(v))).collect();
    let f = row.1.iter().map(|(k, v)| (*k, rational_to_f64(v))).collect();
    prob.add_constraint(e, f, rational_to_f64(&row.2));
}

/// Rows keyed by monomial, created on first use, in a deterministic order.
#[derive(Default)]
struct Rows {
    index: BTreeMap<Monomial, usize>,
    rows: Vec<Row>,
}

impl Rows {
    fn at(&mut self, m: Monomial) -> &mut Row {
        let n = self.rows.len();
        let i = *self.index.entry(m).or_insert(n);
        if i == n {
            self.rows.push(Row::default());
        }
        &mut self.rows[i]
    }

    /// Rows in creation order with their monomials.
    fn drain(self) -> Vec<(Monomial, Row)> {
        let mut order: Vec<(Monomial, usize)> = self.index.into_iter().collect();
        order.sort_by_key(|x| x.1);
        let mut taken: Vec<Option<Row>> = self.rows.into_iter().map(Some).collect();
        order.into_iter().map(|(m, i)| (m, taken[i].take().expect("row used once"))).collect()
    }
}

/// A Gram matrix on a monomial vector, with the products that use it.
#[derive(Clone, Debug, PartialEq)]
pub struct SosBlock {
    /// Square-free product selector over the inequalities; empty for `s_0`.
    pub alpha: Vec<u8>,
    pub basis: Vec<Monomial>,
    pub q: Vec<Vec<BigRational>>,
}

impl SosBlock {
    pub fn gram_f64(&self) -> DMatrix<f64> {
        let n = self.basis.len();
        DMatrix::from_fn(n, n, |i, j| rational_to_f64(&self.q[i][j]))
    }

    /// `z^T Q z` as an exact polynomial.
    pub fn polynomial(&self, nvars: usize) -> Polynomial {
        let f = q();
        let mut p = Polynomial::zero(&f, nvars);
        for (i, a) in self.basis.iter().enumerate() {
            for (j, b) in self.basis.iter().enumerate() {
                if !self.q[i][j].is_zero() {
                    p.add_term(a.mul(b), Value::Rat(Box::new(self.q[i][j].clone())));
                }
            }
        }
        p
    }
}

/// Result of the SOS test.
#[derive(Clone, Debug)]
pub struct GramDecomposition {
    pub basis: Vec<Monomial>,
    pub q: DMatrix<f64>,
    pub min_eig: f64,
    /// Largest coefficient of `p - z^T Q z`.
    pub residual: f64,
    /// Coefficient vectors on `basis` of polynomials whose squares sum to `p`.
    pub squares: Vec<Vec<f64>>,
    /// Largest coefficient of `p - sum q_i^2`.
    pub square_residual: f64,
}

#[derive(Clone, Debug)]
pub enum SosOutcome {
    Sos(GramDecomposition),
    /// The separating functional, one value per monomial.
    NotSos { basis: Vec<Monomial>, best_margin: f64, functional: Vec<(Monomial, f64)> },
    Indeterminate(String),
}

/// Monomials of degree at most `deg(p)/2` whose doubles lie in the bounding
/// box and degree band of the support of `p`.
pub fn halved_box_basis(p: &Polynomial) -> Vec<Monomial> {
    let n = p.nvars();
    if p.is_zero() {
        return Vec::new();
    }
    let mut lo = vec![u16::MAX; n];
    let mut hi = vec![0u16; n];
    let (mut dlo, mut dhi) = (u32::MAX, 0u32);
    for (m, _) in p.terms() {
        for (i, &e) in m.exponents().iter().enumerate() {
            lo[i] = lo[i].min(e);
            hi[i] = hi[i].max(e);
        }
        dlo = dlo.min(m.degree());
        dhi = dhi.max(m.degree());
    }
    monomials_up_to(n, dhi / 2)
        .into_iter()
        .filter(|z| {
            z.exponents().iter().enumerate().all(|(i, &e)| 2 * e >= lo[i] && 2 * e <= hi[i]) && 2 * z.degree() >= dlo && 2 * z.degree() <= dhi
        })
        .collect()
}

fn gram_sdp(p: &Polynomial, basis: &[Monomial]) -> (SdpProblem, Vec<Monomial>) {
    // Q = X + t I with X PSD; maximise t.
    let nb = basis.len();
    let one = BigRational::from_integer(1.into());
    let mut rows = Rows::default();
    for (m, _) in p.terms() {
        let _ = rows.at(m.clone());
    }
    for a in 0..nb {
        for b in a..nb {
            let r = rows.at(basis[a].mul(&basis[b]));
            r.add_entry(0, a, b, &one);
            if a == b {
                r.add_free(0, &one);
            }
        }
    }
    let mut prob = SdpProblem::new(vec![nb], 1, Sense::Maximize);
    prob.cost_free.push((0, 1.0));
    let mut mons = Vec::new();
    for (m, row) in rows.drain() {
        let b = p.coeff(&m).rat().clone();
        push_exact(&mut prob, &row.finish(b));
        mons.push(m);
    }
    (prob, mons)
}

fn try_gram(p: &Polynomial, basis: &[Monomial], opts: &SdpOptions) -> Result<SosOutcome> {
    let products: std::collections::HashSet<Monomial> =
        basis.iter().flat_map(|a| basis.iter().map(move |b| a.mul(b))).collect();
    if let Some((m, _)) = p.terms().find(|(m, _)| !products.contains(*m)) {
        // Some monomial of p cannot be produced: the functional picking its
        // coefficient separates when it is nonzero.
        let c = coef_f64(&p.coeff(m));
        return Ok(SosOutcome::NotSos { basis: basis.to_vec(), best_margin: f64::NEG_INFINITY, functional: vec![(m.clone(), -c.signum())] });
    }
    if basis.is_empty() {
        return Ok(if p.is_zero() {
            SosOutcome::Sos(GramDecomposition {
                basis: Vec::new(),
                q: DMatrix::zeros(0, 0),
                min_eig: 0.0,
                residual: 0.0,
                squares: Vec::new(),
                square_residual: 0.0,
            })
        } else {
            SosOutcome::NotSos { basis: Vec::new(), best_margin: f64::NEG_INFINITY, functional: Vec::new() }
        });
    }
    let (prob, mons) = gram_sdp(p, basis);
    let r = sdp_solve(&prob, opts)?;
    if r.status != SdpStatus::Optimal {
        return Ok(SosOutcome::Indeterminate(format!("solver status {:?}", r.status)));
    }
    let t = r.x_free[0];
    let nb = basis.len();
    let qm = &r.x[0] + DMatrix::identity(nb, nb) * t;
    if t < -PSD_TOL {
        let functional = mons.iter().cloned().zip(r.y.iter().copied()).collect();
        return Ok(SosOutcome::NotSos { basis: basis.to_vec(), best_margin: t, functional });
    }
    let residual = poly_residual(p, basis, &qm);
    let eig = SymmetricEigen::new(qm.clone());
    let mut squares = Vec::new();
    let mut clipped = DMatrix::zeros(nb, nb);
    for k in 0..nb {
        let lam = eig.eigenvalues[k];
        if lam <= PSD_TOL {
            continue;
        }
        let v = eig.eigenvectors.column(k).into_owned();
        clipped += &v * v.transpose() * lam;
        squares.push(v.iter().map(|x| x * lam.sqrt()).collect());
    }
    let square_residual = poly_residual(p, basis, &clipped);
    let min_eig = eig.eigenvalues.min();
    Ok(SosOutcome::Sos(GramDecomposition { basis: basis.to_vec(), q: qm, min_eig, residual, squares, square_residual }))
}

fn poly_residual(p: &Polynomial, basis: &[Monomial], qm: &DMatrix<f64>) -> f64 {
    let mut acc: BTreeMap<Monomial, f64> = p.terms().map(|(m, c)| (m.clone(), coef_f64(c))).collect();
    for (i, a) in basis.iter().enumerate() {
        for (j, b) in basis.iter().enumerate() {
            *acc.entry(a.mul(b)).or_insert(0.0) -= qm[(i, j)];
        }
    }
    acc.values().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// Decides whether `p` is a sum of squares. Without a basis hint the pruned
/// basis is tried first and the full one of degree `deg(p)/2` on failure.
pub fn sos_check(p: &Polynomial, basis: Option<&[Monomial]>, opts: &SdpOptions) -> Result<SosOutcome> {
    if !p.field().is_rational() {
        return Err(Error::InvalidArgument("sum-of-squares checks need rational coefficients".into()));
    }
    if let Some(b) = basis {
        return try_gram(p, b, opts);
    }
    let pruned = halved_box_basis(p);
    let first = try_gram(p, &pruned, opts)?;
    if matches!(first, SosOutcome::Sos(_)) {
        return Ok(first);
    }
    let d = (p.degree().max(0) as u32) / 2;
    let full = monomials_up_to(p.nvars(), d);
    if full.len() == pruned.len() {
        return Ok(first);
    }
    try_gram(p, &full, opts)
}

/// Exact expansion of `z^T Q z`.
pub fn gram_expand_exact(basis: &[Monomial], qm: &[Vec<BigRational>], nvars: usize) -> Polynomial {
    SosBlock { alpha: Vec::new(), basis: basis.to_vec(), q: qm.to_vec() }.polynomial(nvars)
}

/// Exact positive semidefiniteness by symmetric elimination.
pub fn exact_psd(qm: &[Vec<BigRational>]) -> bool {
    let n = qm.len();
    let mut a: Vec<Vec<BigRational>> = qm.to_vec();
    for i in 0..n {
        for j in 0..i {
            if a[i][j] != a[j][i] {
                return false;
            }
        }
    }
    for k in 0..n {
        let d = a[k][k].clone();
        if d.is_negative() {
            return false;
        }
        if d.is_zero() {
            if (k + 1..n).any(|j| !a[k][j].is_zero()) {
                return false;
            }
            continue;
        }
        for i in k + 1..n {
            if a[i][k].is_zero() {
                continue;
            }
            let l = &a[i][k] / &d;
            for j in k + 1..n {
                let v = &a[i][j] - &l * &a[k][j];
                a[i][j] = v;
            }
        }
    }
    true
}

/// Equations `f_i = 0` and inequalities `g_j >= 0` over the reals.
#[derive(Clone, Debug)]
pub struct RealSystem {
    pub names: Vec<String>,
    pub eqs: Vec<Polynomial>,
    pub ineqs: Vec<Polynomial>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PolyRepr {
    Text(String),
    Terms(Vec<TermJson>),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RealSystemJson {
    pub variables: Vec<String>,
    #[serde(default)]
    pub equations: Vec<PolyRepr>,
    #[serde(default)]
    pub inequalities: Vec<PolyRepr>,
}

impl RealSystem {
    pub fn parse(names: &[&str], eqs: &[&str], ineqs: &[&str]) -> Result<RealSystem> {
        let names: Vec<String> = names.iter().map(|s| s.to_string()).collect();
        let f = q();
        let eqs = eqs.iter().map(|s| Polynomial::parse(&f, &names, s)).collect::<Result<_>>()?;
        let ineqs = ineqs.iter().map(|s| Polynomial::parse(&f, &names, s)).collect::<Result<_>>()?;
        Ok(RealSystem { names, eqs, ineqs })
    }

    pub fn nvars(&self) -> usize {
        self.names.len()
    }

    pub fn from_json(j: &RealSystemJson) -> Result<RealSystem> {
        let f = q();
        let n = j.variables.len();
        let conv = |p: &PolyRepr| match p {
            PolyRepr::Text(s) => Polynomial::parse(&f, &j.variables, s),
            PolyRepr::Terms(t) => Polynomial::from_json(&f, n, t),
        };
        Ok(RealSystem {
            names: j.variables.clone(),
            eqs: j.equations.iter().map(conv).collect::<Result<_>>()?,
            ineqs: j.inequalities.iter().map(conv).collect::<Result<_>>()?,
        })
    }

    pub fn to_json(&self) -> RealSystemJson {
        RealSystemJson {
            variables: self.names.clone(),
            equations: self.eqs.iter().map(|p| PolyRepr::Terms(p.to_json())).collect(),
            inequalities: self.ineqs.iter().map(|p| PolyRepr::Terms(p.to_json())).collect(),
        }
    }

    /// `prod_{j : alpha_j = 1} g_j`.
    pub fn product(&self, alpha: &[u8]) -> Polynomial {
        let mut p = Polynomial::one(&q(), self.nvars());
        for (j, &a) in alpha.iter().enumerate() {
            if a == 1 {
                p = p.mul(&self.ineqs[j]).expect("same ring");
            }
        }
        p
    }
}

fn alphas(k: usize) -> Vec<Vec<u8>> {
    (0..1u32 << k).map(|mask| (0..k).map(|j| ((mask >> j) & 1) as u8).collect()).collect()
}

/// `-1 = sum beta_i f_i + sum_alpha s_alpha g^alpha`.
#[derive(Clone, Debug, PartialEq)]
pub struct PsatzCertificate {
    pub degree: u32,
    pub beta: Vec<Polynomial>,
    pub blocks: Vec<SosBlock>,
    pub rationalized: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SosBlockJson {
    pub alpha: Vec<u8>,
    pub basis: Vec<Vec<u16>>,
    #[serde(rename = "Q")]
    pub q: Vec<Vec<String>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PsatzCertJson {
    #[serde(rename = "type")]
    pub kind: String,
    pub degree: u32,
    pub beta: Vec<Vec<TermJson>>,
    pub sos_blocks: Vec<SosBlockJson>,
    pub rationalized: bool,
}

fn fmt_rat(r: &BigRational) -> String {
    q().format(&Value::Rat(Box::new(r.clone())))
}

impl PsatzCertificate {
    pub fn to_json(&self) -> PsatzCertJson {
        PsatzCertJson {
            kind: "positivstellensatz".into(),
            degree: self.degree,
            beta: self.beta.iter().map(|b| b.to_json()).collect(),
            sos_blocks: self
                .blocks
                .iter()
                .map(|b| SosBlockJson {
                    alpha: b.alpha.clone(),
                    basis: b.basis.iter().map(|m| m.exponents().to_vec()).collect(),
                    q: b.q.iter().map(|r| r.iter().map(fmt_rat).collect()).collect(),
                })
                .collect(),
            rationalized: self.rationalized,
        }
    }

    pub fn from_json(j: &PsatzCertJson, nvars: usize) -> Result<PsatzCertificate> {
        if j.kind != "positivstellensatz" {
            return Err(Error::Parse(format!("expected a positivstellensatz certificate, found '{}'", j.kind)));
        }
        let f = q();
        let beta = j.beta.iter().map(|t| Polynomial::from_json(&f, nvars, t)).collect::<Result<_>>()?;
        let mut blocks = Vec::new();
        for b in &j.sos_blocks {
            if b.basis.iter().any(|m| m.len() != nvars) || b.q.len() != b.basis.len() || b.q.iter().any(|r| r.len() != b.basis.len()) {
                return Err(Error::Parse("malformed SOS block".into()));
            }
            let qm = b
                .q
                .iter()
                .map(|r| r.iter().map(|s| f.parse(s).map(|v| v.rat().clone())).collect::<Result<Vec<_>>>())
                .collect::<Result<Vec<_>>>()?;
            blocks.push(SosBlock { alpha: b.alpha.clone(), basis: b.basis.iter().map(|m| Monomial::from_exponents(m.clone())).collect(), q: qm });
        }
        Ok(PsatzCertificate { degree: j.degree, beta, blocks, rationalized: j.rationalized })
    }
}

/// Outcome of [`verify_psatz`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PsatzCheck {
    /// Largest coefficient of `sum beta_i f_i + sum s_alpha g^alpha + 1`.
    pub residual: f64,
    /// Smallest eigenvalue over all Gram blocks.
    pub min_eig: f64,
    /// The identity holds with zero residual and every block is exactly PSD.
    pub exact: bool,
}

impl PsatzCheck {
    pub fn passes(&self, cert_tol: f64) -> bool {
        self.exact || (self.residual <= cert_tol && self.min_eig >= -PSD_TOL)
    }
}

/// Exact residual polynomial of the identity.
pub fn psatz_residual(sys: &RealSystem, cert: &PsatzCertificate) -> Result<Polynomial> {
    let n = sys.nvars();
    if cert.beta.len() != sys.eqs.len() {
        return Err(Error::InvalidCertificate(format!("{} multipliers for {} equations", cert.beta.len(), sys.eqs.len())));
    }
    let mut acc = Polynomial::one(&q(), n);
    for (b, f) in cert.beta.iter().zip(&sys.eqs) {
        if b.nvars() != n {
            return Err(Error::Arity("multiplier arity".into()));
        }
        acc = acc.add(&b.mul(f)?)?;
    }
    for blk in &cert.blocks {
        if blk.alpha.len() != sys.ineqs.len() || blk.alpha.iter().any(|&a| a > 1) {
            return Err(Error::InvalidCertificate("block selector does not match the inequalities".into()));
        }
        acc = acc.add(&blk.polynomial(n).mul(&sys.product(&blk.alpha))?)?;
    }
    Ok(acc)
}

pub fn verify_psatz(sys: &RealSystem, cert: &PsatzCertificate) -> Result<PsatzCheck> {
    let r = psatz_residual(sys, cert)?;
    let residual = r.terms().fold(0.0f64, |m, (_, c)| m.max(coef_f64(c).abs()));
    let min_eig = cert.blocks.iter().map(|b| psd_check(&b.gram_f64(), PSD_TOL).min_eig).fold(f64::INFINITY, f64::min);
    let exact = r.is_zero() && cert.blocks.iter().all(|b| exact_psd(&b.q));
    Ok(PsatzCheck { residual, min_eig, exact })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum PsatzStatus {
    Found,
    BoundReached,
    Indeterminate,
}

#[derive(Clone, Debug)]
pub struct PsatzOutcome {
    pub status: PsatzStatus,
    pub certificate: Option<PsatzCertificate>,
    /// Exact certificate from the rounding pass, when it succeeds.
    pub exact: Option<PsatzCertificate>,
    pub check: Option<PsatzCheck>,
    pub degree: Option<u32>,
}

/// Layout of the unknowns of the degree-`d` Psatz SDP.
struct Layout {
    beta_basis: Vec<Vec<Monomial>>,
    beta_offset: Vec<usize>,
    blocks: Vec<(Vec<u8>, Vec<Monomial>)>,
}

fn layout(sys: &RealSystem, d: u32) -> Layout {
    let n = sys.nvars();
    let mut beta_basis = Vec::new();
    let mut beta_offset = Vec::new();
    let mut off = 0;
    for f in &sys.eqs {
        let df = f.degree();
        let b = if f.is_zero() || df > d as i64 { Vec::new() } else { monomials_up_to(n, d - df as u32) };
        beta_offset.push(off);
        off += b.len();
        beta_basis.push(b);
    }
    let mut blocks = Vec::new();
    for alpha in alphas(sys.ineqs.len()) {
        let g = sys.product(&alpha);
        let dg = g.degree();
        if g.is_zero() || dg > d as i64 {
            continue;
        }
        blocks.push((alpha, monomials_up_to(n, (d - dg as u32) / 2)));
    }
    Layout { beta_basis, beta_offset, blocks }
}

fn psatz_sdp(sys: &RealSystem, lay: &Layout) -> (SdpProblem, Vec<ExactRow>) {
    let n = sys.nvars();
    let mut rows = Rows::default();
    let _ = rows.at(Monomial::one(n));
    for (i, f) in sys.eqs.iter().enumerate() {
        for (k, mu) in lay.beta_basis[i].iter().enumerate() {
            for (t, c) in f.terms() {
                rows.at(mu.mul(t)).add_free(lay.beta_offset[i] + k, c.rat());
            }
        }
    }
    for (blk, (alpha, basis)) in lay.blocks.iter().enumerate() {
        let g = sys.product(alpha);
        for a in 0..basis.len() {
            for b in a..basis.len() {
                let ab = basis[a].mul(&basis[b]);
                for (t, c) in g.terms() {
                    rows.at(ab.mul(t)).add_entry(blk, a, b, c.rat());
                }
            }
        }
    }
    let nfree = lay.beta_basis.iter().map(|b| b.len()).sum();
    let mut prob = SdpProblem::new(lay.blocks.iter().map(|b| b.1.len()).collect(), nfree, Sense::Feasibility);
    let mut exact = Vec::new();
    for (m, row) in rows.drain() {
        let rhs = if m.is_one() { -BigRational::from_integer(1.into()) } else { BigRational::zero() };
        let r = row.finish(rhs);
        push_exact(&mut prob, &r);
        exact.push(r);
    }
    (prob, exact)
}

fn certificate_from(sys: &RealSystem, lay: &Layout, d: u32, xf: &[BigRational], grams: Vec<Vec<Vec<BigRational>>>, exact: bool) -> PsatzCertificate {
    let f = q();
    let n = sys.nvars();
    let beta = lay
        .beta_basis
        .iter()
        .enumerate()
        .map(|(i, b)| {
            Polynomial::from_terms(
                &f,
                n,
                b.iter().enumerate().map(|(k, m)| (m.clone(), Value::Rat(Box::new(xf[lay.beta_offset[i] + k].clone())))),
            )
        })
        .collect();
    let blocks = lay.blocks.iter().zip(grams).map(|((alpha, basis), qm)| SosBlock { alpha: alpha.clone(), basis: basis.clone(), q: qm }).collect();
    PsatzCertificate { degree: d, beta, blocks, rationalized: exact }
}

/// Searches for a Positivstellensatz certificate of degree `d = 0, 1, .., D`.
pub fn psatz_search(sys: &RealSystem, max_degree: u32, opts: &SdpOptions) -> Result<PsatzOutcome> {
    if sys.ineqs.len() > MAX_INEQS {
        return Err(Error::InvalidArgument(format!("at most {MAX_INEQS} inequalities are supported")));
    }
    let mut saw_indeterminate = false;
    for d in 0..=max_degree {
        let lay = layout(sys, d);
        if lay.blocks.is_empty() && lay.beta_basis.iter().all(|b| b.is_empty()) {
            continue;
        }
        let (prob, _) = psatz_sdp(sys, &lay);
        let r = sdp_solve(&prob, opts)?;
        match r.status {
            SdpStatus::Optimal => {
                let xf: Vec<BigRational> = r.x_free.iter().map(|&v| rat(v)).collect();
                let grams: Vec<Vec<Vec<BigRational>>> =
                    r.x.iter().map(|m| (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| rat(m[(i, j)])).collect()).collect()).collect();
                let cert = certificate_from(sys, &lay, d, &xf, grams, false);
                let check = verify_psatz(sys, &cert)?;
                if check.passes(CERT_TOL) {
                    let exact = rationalize_certificate(sys, &lay, d, &r);
                    return Ok(PsatzOutcome { status: PsatzStatus::Found, certificate: Some(cert), exact, check: Some(check), degree: Some(d) });
                }
                saw_indeterminate = true;
            }
            SdpStatus::PrimalInfeasible => {}
            _ => saw_indeterminate = true,
        }
    }
    Ok(PsatzOutcome {
        status: if saw_indeterminate { PsatzStatus::Indeterminate } else { PsatzStatus::BoundReached },
        certificate: None,
        exact: None,
        check: None,
        degree: None,
    })
}

/// Rounds the floating solution to small denominators, projects it exactly
/// onto the affine space of identities, and keeps it if every Gram block is
/// exactly PSD.
fn rationalize_certificate(sys: &RealSystem, lay: &Layout, d: u32, r: &SdpResult) -> Option<PsatzCertificate> {
    let (prob, rows) = psatz_sdp(sys, lay);
    // Unknowns: free variables, then the upper triangle of each block.
    let nfree = prob.nfree;
    let mut slot: HashMap<(usize, usize, usize), usize> = HashMap::new();
    let mut approx: Vec<f64> = r.x_free.clone();
    for (k, &s) in prob.blocks.iter().enumerate() {
        for a in 0..s {
            for b in a..s {
                slot.insert((k, a, b), nfree + slot.len());
                approx.push(r.x[k][(a, b)]);
            }
        }
    }
    let f = q();
    let val = |x: BigRational| Value::Rat(Box::new(x));
    let mut amat = vec![vec![f.zero(); approx.len()]; rows.len()];
    let mut rhs = Vec::with_capacity(rows.len());
    for (i, (entries, free, b)) in rows.into_iter().enumerate() {
        for (k, v) in free {
            amat[i][k] = val(v);
        }
        for (k, a, c, v) in entries {
            let w = if a == c { v } else { v * BigRational::from_integer(2.into()) };
            amat[i][slot[&(k, a, c)]] = val(w);
        }
        rhs.push(val(b));
    }
    let a = FieldMatrix::from_rows(&f, amat).ok()?;
    let at = a.transpose();
    let aat = a.mul(&at).ok()?;
    for den in [1u64, 2, 3, 4, 6, 12, 24, 60, 120, 360, 1000, 10_000, 100_000, 1_000_000] {
        let v: Vec<Value> = approx.iter().map(|&x| val(rationalize(x, den))).collect();
        let av = a.mul_vec(&v);
        let res: Vec<Value> = rhs.iter().zip(&av).map(|(b, x)| f.sub(b, x)).collect();
        let w = match aat.solve_linear(&res).ok()? {
            LinearSolution::Solution(w) => w,
            LinearSolution::Infeasible(_) => return None,
        };
        let corr = at.mul_vec(&w);
        let sol: Vec<BigRational> = v.iter().zip(&corr).map(|(x, c)| f.add(x, c).rat().clone()).collect();
        let grams: Vec<Vec<Vec<BigRational>>> = prob
            .blocks
            .iter()
            .enumerate()
            .map(|(k, &s)| (0..s).map(|i| (0..s).map(|j| sol[slot[&(k, i.min(j), i.max(j))]].clone()).collect()).collect())
            .collect();
        if !grams.iter().all(|g| exact_psd(g)) {
            continue;
        }
        let cert = certificate_from(sys, lay, d, &sol[..nfree], grams, true);
        if verify_psatz(sys, &cert).map(|c| c.exact).unwrap_or(false) {
            return Some(cert);
        }
    }
    None
}

/// The degree-`D` moment relaxation.
#[derive(Clone, Debug)]
pub struct MomentRelaxation {
    pub degree: u32,
    /// Moment variables `lambda_m`, one per monomial of degree at most `D`.
    pub monomials: Vec<Monomial>,
    /// Basis of the moment matrix.
    pub basis: Vec<Monomial>,
    /// Localizing blocks as (selector, basis).
    pub localizing: Vec<(Vec<u8>, Vec<Monomial>)>,
    pub problem: SdpProblem,
}

#[derive(Clone, Debug)]
pub enum MomentOutcome {
    Feasible(Vec<(Monomial, f64)>),
    /// Farkas ray of the relaxation's SDP.
    Infeasible(Vec<f64>),
    Indeterminate(String),
}

/// Entry weight that reads off `X_ab` from a symmetric pairing.
fn half(a: usize, b: usize) -> f64 {
    if a == b {
        1.0
    } else {
        0.5
    }
}

pub fn moment_relax(sys: &RealSystem, degree: u32) -> Result<MomentRelaxation> {
    let n = sys.nvars();
    let maxdeg = sys.eqs.iter().chain(&sys.ineqs).map(|p| p.degree()).max().unwrap_or(0);
    if (degree as i64) < maxdeg {
        return Err(Error::InvalidArgument(format!("degree {degree} is below the constraint degree {maxdeg}")));
    }
    if sys.ineqs.len() > MAX_INEQS {
        return Err(Error::InvalidArgument(format!("at most {MAX_INEQS} inequalities are supported")));
    }
    let monomials = monomials_up_to(n, degree);
    let var: HashMap<Monomial, usize> = monomials.iter().cloned().enumerate().map(|(i, m)| (m, i)).collect();
    let basis = monomials_up_to(n, degree / 2);
    let mut localizing = Vec::new();
    for alpha in alphas(sys.ineqs.len()).into_iter().skip(1) {
        let g = sys.product(&alpha);
        if g.is_zero() || g.degree() > degree as i64 {
            continue;
        }
        localizing.push((alpha, monomials_up_to(n, (degree - g.degree() as u32) / 2)));
    }
    let mut sizes = vec![basis.len()];
    sizes.extend(localizing.iter().map(|l| l.1.len()));
    let mut prob = SdpProblem::new(sizes, monomials.len(), Sense::Minimize);
    // Minimum trace of the moment matrix.
    for a in 0..basis.len() {
        prob.cost.push((0, a, a, 1.0));
    }
    for a in 0..basis.len() {
        for b in a..basis.len() {
            prob.add_constraint(vec![(0, a, b, half(a, b))], vec![(var[&basis[a].mul(&basis[b])], -1.0)], 0.0);
        }
    }
    for (k, (alpha, lb)) in localizing.iter().enumerate() {
        let g = sys.product(alpha);
        for a in 0..lb.len() {
            for b in a..lb.len() {
                let ab = lb[a].mul(&lb[b]);
                let mut free: BTreeMap<usize, f64> = BTreeMap::new();
                for (t, c) in g.terms() {
                    *free.entry(var[&ab.mul(t)]).or_insert(0.0) -= coef_f64(c);
                }
                prob.add_constraint(vec![(k + 1, a, b, half(a, b))], free.into_iter().collect(), 0.0);
            }
        }
    }
    for f in &sys.eqs {
        if f.is_zero() {
            continue;
        }
        for mu in monomials_up_to(n, degree - f.degree() as u32) {
            let mut free: BTreeMap<usize, f64> = BTreeMap::new();
            for (t, c) in f.terms() {
                *free.entry(var[&mu.mul(t)]).or_insert(0.0) += coef_f64(c);
            }
            prob.add_constraint(Vec::new(), free.into_iter().collect(), 0.0);
        }
    }
    prob.add_constraint(Vec::new(), vec![(var[&Monomial::one(n)], 1.0)], 1.0);
    Ok(MomentRelaxation { degree, monomials, basis, localizing, problem: prob })
}

pub fn moment_solve(rel: &MomentRelaxation, opts: &SdpOptions) -> Result<MomentOutcome> {
    let r = sdp_solve(&rel.problem, opts)?;
    Ok(match r.status {
        SdpStatus::Optimal => MomentOutcome::Feasible(rel.monomials.iter().cloned().zip(r.x_free.iter().copied()).collect()),
        SdpStatus::PrimalInfeasible => {
            let ray = r.ray.expect("infeasible status carries a ray");
            debug_assert!(verify_ray(&rel.problem, &ray, opts.ray_tol));
            MomentOutcome::Infeasible(ray)
        }
        s => MomentOutcome::Indeterminate(format!("solver status {s:?}")),
    })
}

/// Optimum of the first theta body of the stable-set ideal of `g`.
#[derive(Clone, Debug)]
pub struct ThetaResult {
    pub value: f64,
    pub matrix: DMatrix<f64>,
}

pub fn theta1_optimize(g: &Graph, weights: Option<&[f64]>, opts: &SdpOptions) -> Result<ThetaResult> {
    let n = g.n();
    let w: Vec<f64> = match weights {
        Some(w) if w.len() == n => w.to_vec(),
        Some(_) => return Err(Error::Arity("one weight per vertex is required".into())),
        None => vec![1.0; n],
    };
    let mut prob = SdpProblem::new(vec![n + 1], 0, Sense::Maximize);
    for (i, &wi) in w.iter().enumerate() {
        prob.cost.push((0, i + 1, i + 1, wi));
    }
    prob.add_constraint(vec![(0, 0, 0, 1.0)], vec![], 1.0);
    for i in 1..=n {
        prob.add_constraint(vec![(0, 0, i, 0.5), (0, i, i, -1.0)], vec![], 0.0);
    }
    for &(a, b) in g.edges() {
        prob.add_constraint(vec![(0, a + 1, b + 1, 1.0)], vec![], 0.0);
    }
    let r = sdp_solve(&prob, opts)?;
    if r.status != SdpStatus::Optimal {
        return Err(Error::Sdp(format!("theta body solve ended with {:?}", r.status)));
    }
    Ok(ThetaResult { value: r.objective, matrix: r.x[0].clone() })
}

/// Largest stable set size by exhaustive search (small graphs).
pub fn stability_number(g: &Graph) -> usize {
    let n = g.n();
    let adj: Vec<u64> = (0..n).map(|v| g.neighbors(v).fold(0u64, |m, u| m | (1 << u))).collect();
    fn go(cand: u64, size: usize, best: &mut usize, adj: &[u64]) {
        if cand == 0 {
            *best = (*best).max(size);
            return;
        }
        if size + cand.count_ones() as usize <= *best {
            return;
        }
        let v = cand.trailing_zeros() as usize;
        go(cand & !(1 << v) & !adj[v], size + 1, best, adj);
        go(cand & !(1 << v), size, best, adj);
    }
    assert!(n <= 64, "exhaustive stable-set search handles at most 64 vertices");
    let mut best = 0;
    let all = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    go(all, 0, &mut best, &adj);
    best
}
