//! Graphs, DIMACS input, random graphs, and polynomial encodings of stable
//! set, k-colouring and max-cut membership.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::fields::Field;
use crate::nulla::PolySystem;
use crate::polys::{Monomial, Polynomial};

/// Simple undirected graph with vertices `0..n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    adj: Vec<Vec<bool>>,
    pub labels: Option<Vec<String>>,
}

impl Graph {
    /// Builds a graph; edges are canonicalized to `i < j` and deduplicated.
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Result<Graph> {
        let mut set = BTreeSet::new();
        for &(a, b) in edges {
            if a >= n || b >= n {
                return Err(Error::InvalidArgument(format!("edge ({a},{b}) references a vertex outside 0..{n}")));
            }
            if a == b {
                return Err(Error::InvalidArgument(format!("loop at vertex {a}")));
            }
            set.insert((a.min(b), a.max(b)));
        }
        let mut adj = vec![vec![false; n]; n];
        for &(a, b) in &set {
            adj[a][b] = true;
            adj[b][a] = true;
        }
        Ok(Graph { n, edges: set.into_iter().collect(), adj, labels: None })
    }

    pub fn empty(n: usize) -> Graph {
        Graph::new(n, &[]).unwrap()
    }

    pub fn complete(n: usize) -> Graph {
        let e: Vec<_> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        Graph::new(n, &e).unwrap()
    }

    pub fn cycle(n: usize) -> Graph {
        let e: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Graph::new(n, &e).unwrap()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        a < self.n && b < self.n && self.adj[a][b]
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.adj[v].iter().enumerate().filter(|(_, &x)| x).map(|(i, _)| i)
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].iter().filter(|&&x| x).count()
    }

    pub fn complement(&self) -> Graph {
        let e: Vec<_> = (0..self.n)
            .flat_map(|i| (i + 1..self.n).map(move |j| (i, j)))
            .filter(|&(i, j)| !self.adj[i][j])
            .collect();
        Graph::new(self.n, &e).unwrap()
    }

    /// Index of edge `{a, b}` in [`Graph::edges`].
    pub fn edge_index(&self, a: usize, b: usize) -> Option<usize> {
        self.edges.binary_search(&(a.min(b), a.max(b))).ok()
    }

    /// SHA-256 of the canonical edge list, hex encoded.
    pub fn hash(&self) -> String {
        let mut s = format!("{};", self.n);
        for (a, b) in &self.edges {
            let _ = write!(s, "{a}-{b},");
        }
        hex::encode(Sha256::digest(s.as_bytes()))
    }

    pub fn to_dimacs(&self) -> String {
        let mut s = format!("p edge {} {}\n", self.n, self.edges.len());
        for (a, b) in &self.edges {
            let _ = writeln!(s, "e {} {}", a + 1, b + 1);
        }
        s
    }

    /// Exact k-colourability by backtracking, most constrained vertex first.
    pub fn is_k_colorable(&self, k: usize) -> bool {
        self.find_coloring(k).is_some()
    }

    pub fn find_coloring(&self, k: usize) -> Option<Vec<usize>> {
        let mut colors = vec![usize::MAX; self.n];
        if self.color_rec(k, &mut colors, 0) {
            Some(colors)
        } else {
            None
        }
    }

    fn color_rec(&self, k: usize, colors: &mut [usize], done: usize) -> bool {
        if done == self.n {
            return true;
        }
        // Pick the uncoloured vertex with the fewest available colours.
        let mut best = None;
        let mut best_free = usize::MAX;
        let mut best_deg = 0;
        for v in 0..self.n {
            if colors[v] != usize::MAX {
                continue;
            }
            let mut used = 0u64;
            for u in self.neighbors(v) {
                if colors[u] != usize::MAX {
                    used |= 1 << colors[u];
                }
            }
            let free = k - (used.count_ones() as usize).min(k);
            let deg = self.degree(v);
            if free < best_free || (free == best_free && deg > best_deg) {
                best = Some((v, used));
                best_free = free;
                best_deg = deg;
            }
        }
        let (v, used) = best.expect("an uncoloured vertex remains");
        // Colours beyond the largest one in use are interchangeable.
        let max_used = colors.iter().filter(|&&c| c != usize::MAX).max().map(|&c| c + 1).unwrap_or(0);
        for c in 0..k.min(max_used + 1) {
            if used >> c & 1 == 0 {
                colors[v] = c;
                if self.color_rec(k, colors, done + 1) {
                    return true;
                }
            }
        }
        colors[v] = usize::MAX;
        false
    }

    /// Disjoint union of copies: vertices of `other` are shifted by `self.n`.
    pub fn disjoint_union(&self, other: &Graph) -> Graph {
        let mut e = self.edges.clone();
        e.extend(other.edges.iter().map(|&(a, b)| (a + self.n, b + self.n)));
        Graph::new(self.n + other.n, &e).unwrap()
    }
}

pub fn parse_dimacs(text: &str) -> Result<Graph> {
    let mut n = None;
    let mut edges = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let t: Vec<&str> = line.split_whitespace().collect();
        match t.first().copied() {
            None | Some("c") => {}
            Some("p") => {
                if t.len() < 4 || !(t[1] == "edge" || t[1] == "col") {
                    return Err(Error::Parse(format!("line {}: malformed header", lineno + 1)));
                }
                n = Some(t[2].parse::<usize>().map_err(|_| Error::Parse(format!("line {}: bad vertex count", lineno + 1)))?);
            }
            Some("e") => {
                let nv = n.ok_or_else(|| Error::Parse(format!("line {}: edge before header", lineno + 1)))?;
                if t.len() < 3 {
                    return Err(Error::Parse(format!("line {}: malformed edge", lineno + 1)));
                }
                let a: usize = t[1].parse().map_err(|_| Error::Parse(format!("line {}: bad vertex", lineno + 1)))?;
                let b: usize = t[2].parse().map_err(|_| Error::Parse(format!("line {}: bad vertex", lineno + 1)))?;
                if a == 0 || b == 0 || a > nv || b > nv {
                    return Err(Error::Parse(format!("line {}: vertex out of range 1..{nv}", lineno + 1)));
                }
                if a != b {
                    edges.push((a - 1, b - 1));
                }
            }
            Some(other) => return Err(Error::Parse(format!("line {}: unknown record '{other}'", lineno + 1))),
        }
    }
    let n = n.ok_or_else(|| Error::Parse("missing 'p edge' header".into()))?;
    Graph::new(n, &edges)
}

/// G(n, p) from a seeded ChaCha8 stream, pairs visited in lexicographic order.
pub fn random_graph(n: usize, p: f64, seed: u64) -> Result<Graph> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!("edge probability {p} outside [0,1]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut e = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen::<f64>() < p {
                e.push((i, j));
            }
        }
    }
    Graph::new(n, &e)
}

fn vertex_names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("x{i}")).collect()
}

fn mono(n: usize, pairs: &[(usize, u16)]) -> Monomial {
    let mut e = vec![0u16; n];
    for &(i, k) in pairs {
        e[i] += k;
    }
    Monomial::from_exponents(e)
}

/// `x_i^2 - x_i`, `x_i x_j` on edges, and `sum x_i - k`, over Q.
pub fn encode_stable_set(g: &Graph, k: usize) -> Result<PolySystem> {
    if k == 0 || k > g.n() {
        return Err(Error::InvalidArgument(format!("stable set size {k} outside 1..={}", g.n())));
    }
    let q = Field::rational();
    let n = g.n();
    let mut gens = Vec::new();
    for i in 0..n {
        gens.push(Polynomial::from_terms(&q, n, [(mono(n, &[(i, 2)]), q.one()), (mono(n, &[(i, 1)]), q.from_i64(-1))]));
    }
    for &(a, b) in g.edges() {
        gens.push(Polynomial::monomial(&q, mono(n, &[(a, 1), (b, 1)]), q.one()));
    }
    let mut sum: Vec<(Monomial, _)> = (0..n).map(|i| (mono(n, &[(i, 1)]), q.one())).collect();
    sum.push((Monomial::one(n), q.from_i64(-(k as i64))));
    gens.push(Polynomial::from_terms(&q, n, sum));
    let mut sys = PolySystem::new(&q, vertex_names(n), gens)?;
    sys.provenance = Some(json!({"recipe": format!("stable-set-k{k}"), "graph_hash": g.hash(), "radical": true}));
    Ok(sys)
}

/// `x_i^k - 1` and `sum_s x_i^(k-1-s) x_j^s` on edges; optionally `x_anchor - 1`.
/// Over characteristic 2, `k` must be odd.
pub fn encode_coloring(g: &Graph, k: usize, field: &Field, anchor: Option<usize>) -> Result<PolySystem> {
    if k < 2 {
        return Err(Error::InvalidArgument("colouring needs k >= 2".into()));
    }
    let p = field.characteristic();
    if p != 0 && (k as u64) % p == 0 {
        return Err(Error::InvalidArgument(format!("k = {k} is divisible by the characteristic {p}")));
    }
    if let Some(a) = anchor {
        if a >= g.n() {
            return Err(Error::InvalidArgument(format!("anchor vertex {a} out of range")));
        }
    }
    let n = g.n();
    let minus_one = field.from_i64(-1);
    let mut gens = Vec::new();
    for i in 0..n {
        gens.push(Polynomial::from_terms(field, n, [(mono(n, &[(i, k as u16)]), field.one()), (Monomial::one(n), minus_one.clone())]));
    }
    for &(a, b) in g.edges() {
        let terms = (0..k).map(|s| (mono(n, &[(a, (k - 1 - s) as u16), (b, s as u16)]), field.one()));
        gens.push(Polynomial::from_terms(field, n, terms));
    }
    if let Some(a) = anchor {
        gens.push(Polynomial::from_terms(field, n, [(mono(n, &[(a, 1)]), field.one()), (Monomial::one(n), minus_one)]));
    }
    let mut sys = PolySystem::new(field, vertex_names(n), gens)?;
    let tag = if field.is_rational() { "q".to_string() } else { field.name().to_lowercase().replace(['_', '(', ')', '^'], "") };
    sys.provenance = Some(json!({
        "recipe": format!("coloring-k{k}-{tag}"),
        "graph_hash": g.hash(),
        "symmetry_anchor": anchor,
        "radical": true,
    }));
    Ok(sys)
}

/// Chordless cycles of odd length between 3 and `cap`; the flag is false when
/// a chordless path was cut off by the cap.
pub fn chordless_odd_cycles(g: &Graph, cap: usize) -> (Vec<Vec<usize>>, bool) {
    let mut out = Vec::new();
    let mut complete = true;
    for s in 0..g.n() {
        let mut path = vec![s];
        extend_chordless(g, cap, &mut path, &mut out, &mut complete);
    }
    (out, complete)
}

fn extend_chordless(g: &Graph, cap: usize, path: &mut Vec<usize>, out: &mut Vec<Vec<usize>>, complete: &mut bool) {
    let s = path[0];
    let last = *path.last().unwrap();
    let inner: Vec<usize> = if path.len() > 2 { path[1..path.len() - 1].to_vec() } else { Vec::new() };
    for w in g.neighbors(last) {
        if w <= s || path.contains(&w) {
            continue;
        }
        // w may only touch the path at `last`, and at s when it closes the cycle.
        if inner.iter().any(|&u| g.has_edge(u, w)) {
            continue;
        }
        if path.len() >= 2 && g.has_edge(w, s) {
            // Each cycle is reported once: its second vertex is below its last.
            let len = path.len() + 1;
            if w > path[1] && len % 2 == 1 {
                if len > cap {
                    *complete = false;
                } else {
                    let mut c = path.clone();
                    c.push(w);
                    out.push(c);
                }
            }
            continue;
        }
        if path.len() + 2 > cap {
            *complete = false;
            continue;
        }
        path.push(w);
        extend_chordless(g, cap, path, out, complete);
        path.pop();
    }
}

/// Edge variables `x_e^2 - x_e` and the product over every chordless odd cycle
/// up to `cap` vertices, over Q.
pub fn encode_maxcut_membership(g: &Graph, cap: usize) -> Result<PolySystem> {
    let q = Field::rational();
    let m = g.edges().len();
    if m == 0 {
        return Err(Error::InvalidArgument("max-cut encoding needs at least one edge".into()));
    }
    let mut gens = Vec::new();
    for e in 0..m {
        gens.push(Polynomial::from_terms(&q, m, [(mono(m, &[(e, 2)]), q.one()), (mono(m, &[(e, 1)]), q.from_i64(-1))]));
    }
    let (cycles, complete) = chordless_odd_cycles(g, cap);
    for c in &cycles {
        let pairs: Vec<(usize, u16)> = (0..c.len())
            .map(|i| (g.edge_index(c[i], c[(i + 1) % c.len()]).expect("cycle edge"), 1))
            .collect();
        gens.push(Polynomial::monomial(&q, mono(m, &pairs), q.one()));
    }
    let names = g.edges().iter().map(|(a, b)| format!("e{a}_{b}")).collect();
    let mut sys = PolySystem::new(&q, names, gens)?;
    sys.provenance = Some(json!({
        "recipe": "maxcut-membership",
        "graph_hash": g.hash(),
        "odd_cycles": cycles.len(),
        "cycles_complete": complete,
        "cycle_cap": cap,
        "radical": true,
    }));
    Ok(sys)
}

/// The Grötzsch graph with vertices 0..11 standing for the usual labels 1..11:
/// outer 5-cycle 1..5, shadows 6..10 with `i+5` adjacent to the neighbours of
/// `i`, and hub 11 adjacent to every shadow.
pub fn grotzsch() -> Graph {
    let mut e = Vec::new();
    for i in 1..=5usize {
        let j = i % 5 + 1;
        e.push((i, j));
        e.push((i + 5, j));
        e.push((j + 5, i));
        e.push((i + 5, 11));
    }
    let e: Vec<_> = e.into_iter().map(|(a, b)| (a - 1, b - 1)).collect();
    Graph::new(11, &e).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimacs_triangle() {
        let g = parse_dimacs("c tri\np edge 3 3\ne 1 2\ne 2 3\ne 1 3\n").unwrap();
        assert_eq!(g, Graph::complete(3));
        assert_eq!(parse_dimacs(&g.to_dimacs()).unwrap(), g);
        assert!(parse_dimacs("p edge 2 1\ne 1 3\n").is_err());
        assert!(parse_dimacs("e 1 2\n").is_err());
        assert!(parse_dimacs("p foo\n").is_err());
    }

    #[test]
    fn random_extremes() {
        assert_eq!(random_graph(7, 0.0, 3).unwrap().edges().len(), 0);
        assert_eq!(random_graph(7, 1.0, 3).unwrap(), Graph::complete(7));
        assert_eq!(random_graph(20, 0.3, 9).unwrap(), random_graph(20, 0.3, 9).unwrap());
        assert!(random_graph(3, 1.5, 0).is_err());
    }

    #[test]
    fn coloring_edge_equation() {
        let g = Graph::complete(2);
        let s = encode_coloring(&g, 3, &Field::f2(), None).unwrap();
        assert_eq!(s.generators[2].format(&s.names), "x0^2 + x0*x1 + x1^2");
        assert!(encode_coloring(&g, 2, &Field::f2(), None).is_err());
    }

    #[test]
    fn odd_cycles() {
        let (c, complete) = chordless_odd_cycles(&Graph::complete(3), 9);
        assert_eq!(c, vec![vec![0, 1, 2]]);
        assert!(complete);
        assert!(chordless_odd_cycles(&Graph::cycle(4), 9).0.is_empty());
        assert_eq!(chordless_odd_cycles(&Graph::cycle(5), 9).0.len(), 1);
        assert_eq!(chordless_odd_cycles(&Graph::cycle(7), 5), (vec![], false));
        // K4 has four triangles and no chordless longer cycle.
        assert_eq!(chordless_odd_cycles(&Graph::complete(4), 9).0.len(), 4);
    }

    #[test]
    fn grotzsch_shape() {
        let g = grotzsch();
        assert_eq!(g.edges().len(), 20);
        assert!(!g.is_k_colorable(3));
        assert!(g.is_k_colorable(4));
    }

    #[test]
    fn colorability() {
        assert!(!Graph::complete(4).is_k_colorable(3));
        assert!(Graph::cycle(5).is_k_colorable(3));
        assert!(!Graph::cycle(5).is_k_colorable(2));
    }
}
