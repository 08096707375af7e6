//! Fixed-point refinement at bounded degree with solution counting.
//!
//! All work happens on one persistent echelon. A row whose leading monomial
//! has degree at most `d` is a member of `F`; every such row is multiplied by
//! each variable exactly once. When no unprocessed low rows remain, the span
//! of the low rows is the least fixed point of `F := F⁺ ∩ R_d`, and the span
//! of all rows is `F⁺`. Raising the degree then only needs the new rows of
//! degree `d + 1` to be queued. The test for 1 runs after every insertion.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactla::sparse::{Echelon, Inserted, ProvRow, Scalars};
use crate::exactla::{mul_prov_var, mul_row_var, poly_to_row, with_engine, Engine, PolySpace};
use crate::nulla::{extract_certificate, verify_null_cert, NullCertificate, PolySystem};
use crate::polys::MonomialRanker;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FpnullaStatus {
    Infeasible,
    Counted,
    BoundReached,
}

#[derive(Clone, Debug)]
pub struct FpnullaOutcome {
    pub status: FpnullaStatus,
    pub certificate: Option<NullCertificate>,
    /// Number of roots over the algebraic closure, counted with multiplicity.
    pub solution_count: Option<u64>,
    /// The count equals the number of distinct roots only for radical ideals.
    pub counts_multiplicity: bool,
    pub terminal: Option<PolySpace>,
    /// Degree `d` at which the run stopped.
    pub degree: u32,
    /// Number of outer degree-raising steps taken before the decision.
    pub fpnulla_degree: u32,
    /// True when a work budget cut the run short.
    pub budget_exhausted: bool,
}

#[derive(Clone, Copy, Debug)]
pub struct FpnullaOptions {
    pub certificate: bool,
    /// Maximum number of row insertions; `None` runs to completion.
    pub budget: Option<u64>,
}

impl Default for FpnullaOptions {
    fn default() -> Self {
        FpnullaOptions { certificate: true, budget: None }
    }
}

/// Default bound: the system degree plus 6.
pub fn default_bound(sys: &PolySystem) -> u32 {
    sys.degree() + 6
}

pub fn fpnulla_run(sys: &PolySystem, bound: u32) -> Result<FpnullaOutcome> {
    fpnulla_run_with(sys, bound, FpnullaOptions::default())
}

enum Stop {
    One,
    Counted(u64),
    Bound,
    Budget,
}

struct RunState {
    d: u32,
    outer: u32,
}

pub fn fpnulla_run_with(sys: &PolySystem, bound: u32, opts: FpnullaOptions) -> Result<FpnullaOutcome> {
    let d0 = sys.degree();
    if bound < d0 {
        return Err(Error::InvalidArgument(format!("bound {bound} is below the system degree {d0}")));
    }
    let ranker = Arc::new(MonomialRanker::new(sys.nvars()));
    let mut eng = Engine::new(&sys.field, opts.certificate);
    let mut st = RunState { d: d0, outer: 0 };
    let stop = with_engine!(&mut eng, e => close(e, &ranker, sys, bound, opts.budget, &mut st));
    let mut out = FpnullaOutcome {
        status: FpnullaStatus::BoundReached,
        certificate: None,
        solution_count: None,
        counts_multiplicity: true,
        terminal: None,
        degree: st.d,
        fpnulla_degree: st.outer,
        budget_exhausted: false,
    };
    match stop {
        Stop::One => {
            out.status = FpnullaStatus::Infeasible;
            if opts.certificate {
                let cert = with_engine!(&eng, e => extract_certificate(e, &ranker, sys));
                if !verify_null_cert(sys, &cert)? {
                    return Err(Error::InvalidCertificate("extracted multipliers do not sum to 1".into()));
                }
                out.certificate = Some(cert);
            }
        }
        Stop::Counted(c) => {
            out.status = FpnullaStatus::Counted;
            out.solution_count = Some(c);
            out.terminal = Some(PolySpace::from_engine(&sys.field, ranker, eng, st.d));
        }
        Stop::Bound => {}
        Stop::Budget => out.budget_exhausted = true,
    }
    Ok(out)
}

fn close<S: Scalars>(
    e: &mut Echelon<S>,
    ranker: &MonomialRanker,
    sys: &PolySystem,
    bound: u32,
    budget: Option<u64>,
    st: &mut RunState,
) -> Stop {
    let s = e.scalars().clone();
    let n = sys.nvars();
    // Queue of unprocessed low rows, lowest leading degree first.
    let mut queue: BinaryHeap<Reverse<(u32, usize)>> = BinaryHeap::new();
    let mut insertions = 0u64;
    for (g, f) in sys.generators.iter().enumerate() {
        let prov: ProvRow<S::V> = vec![((g as u32, 0), s.one())];
        if let Inserted::New(i) = e.insert(poly_to_row(&s, ranker, f), prov) {
            queue.push(Reverse((ranker.degree_of(e.lead(i)), i)));
        }
        insertions += 1;
    }
    if e.contains_one() {
        return Stop::One;
    }
    let mut scratch = vec![0u16; n];
    loop {
        let limit = ranker.count_up_to(st.d as i64);
        while let Some(Reverse((_, r))) = queue.pop() {
            for i in 0..n {
                if budget.is_some_and(|b| insertions >= b) {
                    return Stop::Budget;
                }
                let row = mul_row_var(ranker, e.row(r), i, &mut scratch);
                let prov = if e.tracking() { mul_prov_var(ranker, e.prov(r), i, &mut scratch) } else { Vec::new() };
                insertions += 1;
                if let Inserted::New(j) = e.insert(row, prov) {
                    if e.contains_one() {
                        return Stop::One;
                    }
                    let lead = e.lead(j);
                    if lead < limit {
                        queue.push(Reverse((ranker.degree_of(lead), j)));
                    }
                }
            }
        }
        let d = st.d as i64;
        let dim_d = (0..e.len()).filter(|&i| e.lead(i) < limit).count() as u64;
        let limit1 = ranker.count_up_to(d - 1);
        let dim_d1 = (0..e.len()).filter(|&i| e.lead(i) < limit1).count() as u64;
        let codim_d = limit - dim_d;
        let codim_d1 = limit1 - dim_d1;
        if codim_d == codim_d1 {
            return Stop::Counted(codim_d);
        }
        if st.d + 1 > bound {
            return Stop::Bound;
        }
        st.d += 1;
        st.outer += 1;
        let new_limit = ranker.count_up_to(st.d as i64);
        for i in 0..e.len() {
            let lead = e.lead(i);
            if lead >= limit && lead < new_limit {
                queue.push(Reverse((st.d, i)));
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::Field;

    #[test]
    fn two_point_system_counts_two() {
        let sys = PolySystem::parse(&Field::f2(), &["x", "y"], &["1 + x + x^2", "1 + y + y^2", "x^2 + x*y + y^2"]).unwrap();
        let o = fpnulla_run(&sys, 3).unwrap();
        assert_eq!(o.status, FpnullaStatus::Counted);
        assert_eq!(o.solution_count, Some(2));
        assert_eq!(o.degree, 2);
        assert_eq!(o.fpnulla_degree, 0);
        let t = o.terminal.unwrap();
        assert_eq!(t.dim(), 4);
        assert_eq!(t.codim_at(2), 2);
        assert_eq!(t.codim_at(1), 2);
    }

    #[test]
    fn quadratic_over_q() {
        let sys = PolySystem::parse(&Field::rational(), &["x"], &["x^2 - 1"]).unwrap();
        let o = fpnulla_run(&sys, 2).unwrap();
        assert_eq!(o.status, FpnullaStatus::Counted);
        assert_eq!(o.solution_count, Some(2));
    }

    #[test]
    fn small_linear_system_infeasible() {
        let sys = PolySystem::parse(
            &Field::rational(),
            &["x1", "x2", "x3"],
            &["x1^2 - 1", "2*x1*x2 + x3", "x1 + x2", "x1 + x3"],
        )
        .unwrap();
        let o = fpnulla_run(&sys, 2).unwrap();
        assert_eq!(o.status, FpnullaStatus::Infeasible);
        assert!(verify_null_cert(&sys, o.certificate.as_ref().unwrap()).unwrap());
    }

    #[test]
    fn bound_below_degree_rejected() {
        let sys = PolySystem::parse(&Field::rational(), &["x"], &["x^3"]).unwrap();
        assert!(fpnulla_run(&sys, 2).is_err());
    }
}
