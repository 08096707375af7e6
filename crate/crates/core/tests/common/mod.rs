//! Brute-force oracles shared by the integration tests. None of them call the
//! library's own search or elimination code.
#![allow(dead_code)]

use polycert::encodings::Graph;
use polycert::fields::{Field, Value};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Every assignment of `k` colours, as colour-index vectors.
fn assignments(n: usize, k: usize) -> impl Iterator<Item = Vec<usize>> {
    let total = k.checked_pow(n as u32).expect("small instance");
    (0..total).map(move |mut code| {
        let mut c = vec![0; n];
        for slot in c.iter_mut() {
            *slot = code % k;
            code /= k;
        }
        c
    })
}

fn proper(g: &Graph, c: &[usize]) -> bool {
    g.edges().iter().all(|&(a, b)| c[a] != c[b])
}

pub fn colorable3(g: &Graph) -> bool {
    assignments(g.n(), 3).any(|c| proper(g, &c))
}

/// Proper 3-colourings with vertex 0 on the first colour, written as points
/// of `gf4` (colour `i` maps to the `i`-th nonzero element).
pub fn colorings_gf4(g: &Graph, gf4: &Field) -> Vec<Vec<String>> {
    let nonzero: Vec<Value> = gf4.enumerate(16).unwrap().into_iter().filter(|v| !gf4.is_zero(v)).collect();
    assert_eq!(nonzero.len(), 3);
    let one = gf4.one();
    let order: Vec<Value> = std::iter::once(one.clone()).chain(nonzero.into_iter().filter(|v| *v != one)).collect();
    let mut out: Vec<Vec<String>> = assignments(g.n(), 3)
        .filter(|c| c.first().map_or(true, |&c0| c0 == 0) && proper(g, c))
        .map(|c| c.iter().map(|&i| gf4.format(&order[i])).collect())
        .collect();
    out.sort();
    out
}

pub fn stability(g: &Graph) -> usize {
    let n = g.n();
    (0u32..1 << n)
        .filter(|&s| g.edges().iter().all(|&(a, b)| (s >> a) & 1 == 0 || (s >> b) & 1 == 0))
        .map(|s| s.count_ones() as usize)
        .max()
        .unwrap_or(0)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_edges(n: usize, p: f64, r: &mut ChaCha8Rng) -> Vec<(usize, usize)> {
    let mut e = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if r.gen_bool(p) {
                e.push((a, b));
            }
        }
    }
    e
}

pub fn bipartite(n: usize, p: f64, r: &mut ChaCha8Rng) -> Graph {
    let side: Vec<bool> = (0..n).map(|_| r.gen_bool(0.5)).collect();
    let edges: Vec<(usize, usize)> = random_edges(n, p, r).into_iter().filter(|&(a, b)| side[a] != side[b]).collect();
    Graph::new(n, &edges).unwrap()
}

/// Integer linear system `A x = b`; when `inconsistent`, one extra row is a
/// combination of the others with its right-hand side shifted by one.
pub fn linear_system(r: &mut ChaCha8Rng, inconsistent: bool) -> (Vec<Vec<i64>>, Vec<i64>) {
    let nv = r.gen_range(1..=4);
    let m = r.gen_range(1..=4);
    let x0: Vec<i64> = (0..nv).map(|_| r.gen_range(-3..=3)).collect();
    let mut a: Vec<Vec<i64>> = (0..m).map(|_| (0..nv).map(|_| r.gen_range(-4..=4)).collect()).collect();
    let mut b: Vec<i64> = a.iter().map(|row| row.iter().zip(&x0).map(|(u, v)| u * v).sum()).collect();
    if inconsistent {
        let w: Vec<i64> = (0..m).map(|_| r.gen_range(-2..=2)).collect();
        let row: Vec<i64> = (0..nv).map(|j| (0..m).map(|i| w[i] * a[i][j]).sum()).collect();
        let rhs: i64 = (0..m).map(|i| w[i] * b[i]).sum::<i64>() + 1;
        a.push(row);
        b.push(rhs);
    }
    (a, b)
}

/// Polynomial text for `sum a_j x_j - b`.
pub fn linear_text(row: &[i64], b: i64) -> String {
    let mut s = String::new();
    for (j, &c) in row.iter().enumerate() {
        if c != 0 {
            s.push_str(&format!(" + ({c})*x{j}"));
        }
    }
    s.push_str(&format!(" + ({})", -b));
    s
}
