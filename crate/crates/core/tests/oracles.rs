//! Library results compared against brute-force oracles on small instances.

mod common;

use common::*;
use polycert::encodings::{encode_coloring, encode_stable_set, Graph};
use polycert::exactla::{FieldMatrix, LinearSolution};
use polycert::fields::Field;
use polycert::fpnulla::{fpnulla_run, FpnullaStatus};
use polycert::nulla::{nulla_run, verify_null_cert, NullaStatus, PolySystem};
use polycert::possatz::theta1_optimize;
use polycert::recover;
use polycert::sdpcore::SdpOptions;
use rand::Rng;

#[test]
fn fixed_point_decides_small_colorings() {
    let mut r = rng(11);
    for _ in 0..25 {
        let n = r.gen_range(2..=6);
        let g = Graph::new(n, &random_edges(n, 0.6, &mut r)).unwrap();
        let sys = encode_coloring(&g, 3, &Field::f2(), Some(0)).unwrap();
        let o = fpnulla_run(&sys, sys.degree() + 6).unwrap();
        match o.status {
            FpnullaStatus::Infeasible => {
                assert!(!colorable3(&g));
                assert!(verify_null_cert(&sys, o.certificate.as_ref().unwrap()).unwrap());
            }
            FpnullaStatus::Counted => {
                assert_eq!(o.solution_count.unwrap() as usize, colorings_gf4(&g, &Field::galois(2, 2).unwrap()).len());
            }
            FpnullaStatus::BoundReached => panic!("undecided on {n} vertices"),
        }
    }
}

#[test]
fn recovered_colorings_match_enumeration() {
    let gf4 = Field::galois(2, 2).unwrap();
    let mut r = rng(12);
    for t in 0..12 {
        let n = r.gen_range(3..=6);
        let g = Graph::new(n, &random_edges(n, 0.5, &mut r)).unwrap();
        let sys = encode_coloring(&g, 3, &Field::f2(), Some(0)).unwrap();
        let want = colorings_gf4(&g, &gf4);
        let rs = recover::solve(&sys, sys.degree() + 6, t).unwrap().expect("decided");
        if want.is_empty() {
            assert!(rs.roots.is_empty());
            continue;
        }
        assert_eq!(rs.descend(&gf4).unwrap().sorted(), want);
    }
}

#[test]
fn stable_set_system_over_rationals() {
    // A triangle has a stable set of size 1 but none of size 2.
    let g = Graph::complete(3);
    let feasible = encode_stable_set(&g, 1).unwrap();
    let o = fpnulla_run(&feasible, 4).unwrap();
    assert_eq!(o.status, FpnullaStatus::Counted);
    assert_eq!(o.solution_count, Some(3));
    let infeasible = encode_stable_set(&g, 2).unwrap();
    let o = nulla_run(&infeasible, 2).unwrap();
    assert_eq!(o.status, NullaStatus::Infeasible);
    assert!(verify_null_cert(&infeasible, o.certificate.as_ref().unwrap()).unwrap());
}

#[test]
fn theta_sandwich_on_random_graphs() {
    let opts = SdpOptions::default();
    let mut r = rng(13);
    for _ in 0..10 {
        let n = r.gen_range(2..=7);
        let g = Graph::new(n, &random_edges(n, 0.4, &mut r)).unwrap();
        let a = stability(&g) as f64;
        let th = theta1_optimize(&g, None, &opts).unwrap().value;
        assert!(th >= a - 1e-4, "theta {th} below alpha {a}");
        // Lovasz: theta(G) * theta(complement) >= n, and theta <= n.
        assert!(th <= n as f64 + 1e-4);
    }
}

#[test]
fn fredholm_against_linear_solver() {
    let q = Field::rational();
    let mut r = rng(14);
    for t in 0..20 {
        let (a, b) = linear_system(&mut r, t % 2 == 1);
        let nv = a[0].len();
        let names: Vec<String> = (0..nv).map(|j| format!("x{j}")).collect();
        // A zero row with zero right-hand side is the trivial equation 0 = 0.
        let gens: Vec<String> = a
            .iter()
            .zip(&b)
            .filter(|(row, &bi)| bi != 0 || row.iter().any(|&c| c != 0))
            .map(|(row, &bi)| linear_text(row, bi))
            .collect();
        if gens.is_empty() {
            continue;
        }
        let names_ref: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
        let gens_ref: Vec<&str> = gens.iter().map(|s| s.as_str()).collect();
        let sys = PolySystem::parse(&q, &names_ref, &gens_ref).unwrap();
        let m = FieldMatrix::from_i64(&q, &a);
        let rhs: Vec<_> = b.iter().map(|&v| q.from_i64(v)).collect();
        let lin = m.solve_linear(&rhs).unwrap();
        let o = nulla_run(&sys, 0).unwrap();
        match lin {
            LinearSolution::Solution(_) => assert_eq!(o.status, NullaStatus::BoundReached),
            LinearSolution::Infeasible(_) => assert_eq!(o.status, NullaStatus::Infeasible),
        }
    }
}
