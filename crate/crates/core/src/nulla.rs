//! Degree-by-degree Nullstellensatz certificate search.
//!
//! The span grows one multiplier degree at a time: layer `d` holds the rows
//! `x^b f_i` with `|b| = d`, each produced once by multiplying a layer `d-1`
//! row by a variable no smaller than the largest variable already in `b`.
//! Every row carries its expression in terms of the generators, so when the
//! constant 1 becomes a pivot the multipliers can be read off directly.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactla::sparse::{Echelon, ProvRow, Row, Scalars};
use crate::exactla::{mul_row_var, poly_to_row, with_engine, Engine};
use crate::fields::{Field, FieldSpec};
use crate::polys::{Monomial, MonomialRanker, Polynomial, TermJson, ORDER_NAME};

/// A system `f_1 = .. = f_m = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct PolySystem {
    pub field: Field,
    pub names: Vec<String>,
    pub generators: Vec<Polynomial>,
    pub provenance: Option<serde_json::Value>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SystemJson {
    pub field: FieldSpec,
    pub variables: Vec<String>,
    pub generators: Vec<Vec<TermJson>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub provenance: Option<serde_json::Value>,
}

impl PolySystem {
    pub fn new(field: &Field, names: Vec<String>, generators: Vec<Polynomial>) -> Result<PolySystem> {
        if generators.is_empty() {
            return Err(Error::InvalidArgument("a system needs at least one generator".into()));
        }
        for g in &generators {
            if g.field() != field {
                return Err(Error::FieldMismatch);
            }
            if g.nvars() != names.len() {
                return Err(Error::Arity(format!("generator in {} variables, system has {}", g.nvars(), names.len())));
            }
            if g.is_zero() {
                return Err(Error::InvalidArgument("zero generator".into()));
            }
        }
        Ok(PolySystem { field: field.clone(), names, generators, provenance: None })
    }

    /// Parses generators written as expressions over the given variable names.
    pub fn parse(field: &Field, names: &[&str], gens: &[&str]) -> Result<PolySystem> {
        let names: Vec<String> = names.iter().map(|s| s.to_string()).collect();
        let g = gens.iter().map(|s| Polynomial::parse(field, &names, s)).collect::<Result<Vec<_>>>()?;
        PolySystem::new(field, names, g)
    }

    pub fn nvars(&self) -> usize {
        self.names.len()
    }

    pub fn degree(&self) -> u32 {
        self.generators.iter().map(|g| g.degree()).max().unwrap_or(0).max(0) as u32
    }

    pub fn to_json(&self) -> SystemJson {
        SystemJson {
            field: self.field.spec(),
            variables: self.names.clone(),
            generators: self.generators.iter().map(|g| g.to_json()).collect(),
            provenance: self.provenance.clone(),
        }
    }

    pub fn from_json(j: &SystemJson) -> Result<PolySystem> {
        let field = Field::from_spec(&j.field)?;
        let n = j.variables.len();
        let gens = j.generators.iter().map(|g| Polynomial::from_json(&field, n, g)).collect::<Result<Vec<_>>>()?;
        let mut s = PolySystem::new(&field, j.variables.clone(), gens)?;
        s.provenance = j.provenance.clone();
        Ok(s)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("serializable")
    }

    pub fn from_json_str(s: &str) -> Result<PolySystem> {
        PolySystem::from_json(&serde_json::from_str(s)?)
    }
}

/// Multipliers `b_i` with `sum b_i f_i = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct NullCertificate {
    pub multipliers: Vec<Polynomial>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NullCertJson {
    #[serde(rename = "type")]
    pub kind: String,
    pub field: FieldSpec,
    #[serde(default = "default_order")]
    pub order: String,
    pub degree: i64,
    pub multipliers: Vec<Vec<TermJson>>,
}

fn default_order() -> String {
    ORDER_NAME.into()
}

impl NullCertificate {
    /// Largest multiplier degree.
    pub fn degree(&self) -> i64 {
        self.multipliers.iter().map(|b| b.degree()).max().unwrap_or(-1)
    }

    pub fn to_json(&self, field: &Field) -> NullCertJson {
        NullCertJson {
            kind: "nullstellensatz".into(),
            field: field.spec(),
            order: ORDER_NAME.into(),
            degree: self.degree(),
            multipliers: self.multipliers.iter().map(|b| b.to_json()).collect(),
        }
    }

    pub fn from_json(j: &NullCertJson, nvars: usize) -> Result<NullCertificate> {
        if j.kind != "nullstellensatz" {
            return Err(Error::Parse(format!("expected a nullstellensatz certificate, found '{}'", j.kind)));
        }
        let field = Field::from_spec(&j.field)?;
        let multipliers = j.multipliers.iter().map(|b| Polynomial::from_json(&field, nvars, b)).collect::<Result<_>>()?;
        Ok(NullCertificate { multipliers })
    }
}

/// `sum b_i f_i - 1`, computed exactly.
pub fn certificate_residual(sys: &PolySystem, cert: &NullCertificate) -> Result<Polynomial> {
    if cert.multipliers.len() != sys.generators.len() {
        return Err(Error::Arity(format!(
            "{} multipliers for {} generators",
            cert.multipliers.len(),
            sys.generators.len()
        )));
    }
    let mut acc = Polynomial::one(&sys.field, sys.nvars()).neg();
    for (b, f) in cert.multipliers.iter().zip(&sys.generators) {
        acc = acc.add(&b.mul(f)?)?;
    }
    Ok(acc)
}

pub fn verify_null_cert(sys: &PolySystem, cert: &NullCertificate) -> Result<bool> {
    Ok(certificate_residual(sys, cert)?.is_zero())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum NullaStatus {
    Infeasible,
    BoundReached,
}

#[derive(Clone, Debug)]
pub struct NullaOutcome {
    pub status: NullaStatus,
    pub certificate: Option<NullCertificate>,
    pub nulla_degree: Option<u32>,
    pub bound: u32,
}

#[derive(Clone, Copy, Debug)]
pub struct NullaOptions {
    /// Record provenance and return a verified certificate.
    pub certificate: bool,
}

impl Default for NullaOptions {
    fn default() -> Self {
        NullaOptions { certificate: true }
    }
}

/// Default bound: `2n` for colouring systems over F_2, 4 otherwise.
pub fn default_bound(sys: &PolySystem) -> u32 {
    let coloring = sys
        .provenance
        .as_ref()
        .and_then(|p| p.get("recipe"))
        .and_then(|r| r.as_str())
        .map(|r| r.starts_with("coloring"))
        .unwrap_or(false);
    if coloring && sys.field.is_f2() {
        2 * sys.nvars() as u32
    } else {
        4
    }
}

pub fn nulla_run(sys: &PolySystem, bound: u32) -> Result<NullaOutcome> {
    nulla_run_with(sys, bound, NullaOptions::default())
}

pub fn nulla_run_with(sys: &PolySystem, bound: u32, opts: NullaOptions) -> Result<NullaOutcome> {
    let ranker = Arc::new(MonomialRanker::new(sys.nvars()));
    let mut eng = Engine::new(&sys.field, opts.certificate);
    let found = with_engine!(&mut eng, e => run_layers(e, &ranker, sys, bound));
    match found {
        None => Ok(NullaOutcome { status: NullaStatus::BoundReached, certificate: None, nulla_degree: None, bound }),
        Some(d) => {
            let certificate = if opts.certificate {
                let cert = with_engine!(&eng, e => extract_certificate(e, &ranker, sys));
                if !verify_null_cert(sys, &cert)? {
                    return Err(Error::InvalidCertificate("extracted multipliers do not sum to 1".into()));
                }
                Some(cert)
            } else {
                None
            };
            Ok(NullaOutcome { status: NullaStatus::Infeasible, certificate, nulla_degree: Some(d), bound })
        }
    }
}

struct LayerItem<V> {
    gen: u32,
    mono: u64,
    max_var: usize,
    row: Row<V>,
}

/// Returns the multiplier degree at which 1 entered the span, if any.
fn run_layers<S: Scalars>(e: &mut Echelon<S>, ranker: &MonomialRanker, sys: &PolySystem, bound: u32) -> Option<u32> {
    let s = e.scalars().clone();
    let n = sys.nvars();
    let mut layer = Vec::new();
    for (g, f) in sys.generators.iter().enumerate() {
        let row = poly_to_row(&s, ranker, f);
        let prov: ProvRow<S::V> = vec![((g as u32, 0), s.one())];
        e.insert(row.clone(), prov);
        layer.push(LayerItem { gen: g as u32, mono: 0, max_var: 0, row });
    }
    if e.contains_one() {
        return Some(0);
    }
    let mut scratch = vec![0u16; n];
    for d in 1..=bound {
        let mut next = Vec::new();
        for item in &layer {
            for j in item.max_var..n {
                let row = mul_row_var(ranker, &item.row, j, &mut scratch);
                let mono = ranker.mul_var(item.mono, j, &mut scratch);
                let prov = if e.tracking() { vec![((item.gen, mono), s.one())] } else { Vec::new() };
                e.insert(row.clone(), prov);
                if e.contains_one() {
                    return Some(d);
                }
                next.push(LayerItem { gen: item.gen, mono, max_var: j, row });
            }
        }
        layer = next;
    }
    None
}

/// Reads multipliers from the provenance of the row whose lead is 1.
pub(crate) fn extract_certificate<S: Scalars>(e: &Echelon<S>, ranker: &MonomialRanker, sys: &PolySystem) -> NullCertificate {
    let idx = e.pivot_row(0).expect("1 is in the span");
    let row = e.row(idx);
    debug_assert_eq!(row.len(), 1);
    let s = e.scalars();
    let n = sys.nvars();
    let mut terms: Vec<Vec<(Monomial, crate::fields::Value)>> = vec![Vec::new(); sys.generators.len()];
    for ((g, r), v) in e.prov(idx) {
        terms[*g as usize].push((ranker.unrank(*r), s.to_value(v)));
    }
    let multipliers = terms.into_iter().map(|t| Polynomial::from_terms(&sys.field, n, t)).collect();
    NullCertificate { multipliers }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_linear_system() -> PolySystem {
        PolySystem::parse(
            &Field::rational(),
            &["x1", "x2", "x3"],
            &["x1^2 - 1", "2*x1*x2 + x3", "x1 + x2", "x1 + x3"],
        )
        .unwrap()
    }

    #[test]
    fn degree_zero_bound() {
        let o = nulla_run(&small_linear_system(), 0).unwrap();
        assert_eq!(o.status, NullaStatus::BoundReached);
        assert_eq!(o.bound, 0);
    }

    #[test]
    fn degree_one_certificate() {
        let sys = small_linear_system();
        let o = nulla_run(&sys, 1).unwrap();
        assert_eq!(o.status, NullaStatus::Infeasible);
        assert_eq!(o.nulla_degree, Some(1));
        let c = o.certificate.unwrap();
        assert_eq!(c.degree(), 1);
        assert!(verify_null_cert(&sys, &c).unwrap());
    }

    #[test]
    fn constant_system() {
        for f in [Field::f2(), Field::rational(), Field::prime(7).unwrap()] {
            let sys = PolySystem::parse(&f, &["x"], &["1"]).unwrap();
            let o = nulla_run(&sys, 0).unwrap();
            assert_eq!(o.nulla_degree, Some(0));
            assert_eq!(o.certificate.unwrap().multipliers[0].to_string(), "1");
        }
    }

    #[test]
    fn zero_and_permuted_certificates_fail() {
        let sys = small_linear_system();
        let zero = NullCertificate { multipliers: vec![Polynomial::zero(&sys.field, 3); 4] };
        assert!(!verify_null_cert(&sys, &zero).unwrap());
        let c = nulla_run(&sys, 1).unwrap().certificate.unwrap();
        let mut permuted = sys.clone();
        permuted.generators.swap(0, 1);
        assert!(!verify_null_cert(&permuted, &c).unwrap());
    }

    #[test]
    fn decide_only_matches() {
        let sys = small_linear_system();
        let o = nulla_run_with(&sys, 3, NullaOptions { certificate: false }).unwrap();
        assert_eq!(o.nulla_degree, Some(1));
        assert!(o.certificate.is_none());
    }

    #[test]
    fn json_round_trip() {
        let sys = small_linear_system();
        let back = PolySystem::from_json_str(&sys.to_json_string()).unwrap();
        assert_eq!(back, sys);
    }
}
