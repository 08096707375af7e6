//! Dense block semidefinite programs.
//!
//! Problems are stated as
//!
//! ```text
//!   opt  <C, X> + c_f . x_f
//!   s.t. <A_i, X> + f_i . x_f = b_i,   X block-diagonal PSD,  x_f free
//! ```
//!
//! Free variables are removed before solving: constraints are projected onto
//! the left nullspace of their free-variable columns and the free cost is
//! folded into `C`. Linearly dependent rows are dropped, and an inconsistent
//! dependency is reported at once as a Farkas ray. The remaining standard
//! form is solved by a homogeneous self-dual interior-point method with the
//! HKM direction and a Mehrotra corrector.
//!
//! A primal infeasibility certificate is a vector `y` with
//! `-sum y_i A_i ⪰ 0`, `sum y_i f_i = 0` and `b^T y = 1`.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Sense {
    Minimize,
    Maximize,
    Feasibility,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SdpStatus {
    Optimal,
    PrimalInfeasible,
    DualInfeasibleOrUnbounded,
    Indeterminate,
}

/// Symmetric entry `(block, row, col, value)`; `(i, j)` and `(j, i)` name the
/// same entry and are both set.
pub type Entry = (usize, usize, usize, f64);

#[derive(Clone, Debug, Default)]
pub struct Constraint {
    pub entries: Vec<Entry>,
    pub free: Vec<(usize, f64)>,
    pub b: f64,
}

#[derive(Clone, Debug)]
pub struct SdpProblem {
    pub blocks: Vec<usize>,
    pub nfree: usize,
    pub sense: Sense,
    pub cost: Vec<Entry>,
    pub cost_free: Vec<(usize, f64)>,
    pub constraints: Vec<Constraint>,
}

#[derive(Clone, Copy, Debug)]
pub struct SdpOptions {
    pub gap_tol: f64,
    pub feas_tol: f64,
    pub ray_tol: f64,
    pub max_iter: usize,
    /// Largest total block dimension accepted.
    pub max_dim: usize,
}

impl Default for SdpOptions {
    fn default() -> Self {
        SdpOptions { gap_tol: 1e-8, feas_tol: 1e-8, ray_tol: 1e-7, max_iter: 200, max_dim: 2000 }
    }
}

#[derive(Clone, Debug)]
pub struct SdpResult {
    pub status: SdpStatus,
    pub x: Vec<DMatrix<f64>>,
    pub x_free: Vec<f64>,
    pub y: Vec<f64>,
    pub s: Vec<DMatrix<f64>>,
    pub objective: f64,
    pub gap: f64,
    /// Farkas ray when the status is `PrimalInfeasible`.
    pub ray: Option<Vec<f64>>,
    pub iterations: usize,
}

impl SdpProblem {
    pub fn new(blocks: Vec<usize>, nfree: usize, sense: Sense) -> SdpProblem {
        SdpProblem { blocks, nfree, sense, cost: Vec::new(), cost_free: Vec::new(), constraints: Vec::new() }
    }

    pub fn add_constraint(&mut self, entries: Vec<Entry>, free: Vec<(usize, f64)>, b: f64) -> usize {
        self.constraints.push(Constraint { entries, free, b });
        self.constraints.len() - 1
    }

    pub fn validate(&self) -> Result<()> {
        let check = |e: &Entry| -> Result<()> {
            let (k, i, j, v) = *e;
            if k >= self.blocks.len() || i >= self.blocks[k] || j >= self.blocks[k] || !v.is_finite() {
                return Err(Error::Sdp(format!("entry {e:?} outside the block structure")));
            }
            Ok(())
        };
        for e in &self.cost {
            check(e)?;
        }
        for c in &self.constraints {
            for e in &c.entries {
                check(e)?;
            }
            if c.free.iter().any(|&(k, v)| k >= self.nfree || !v.is_finite()) || !c.b.is_finite() {
                return Err(Error::Sdp("free-variable coefficient out of range".into()));
            }
        }
        if self.cost_free.iter().any(|&(k, _)| k >= self.nfree) {
            return Err(Error::Sdp("free cost index out of range".into()));
        }
        Ok(())
    }

    /// Dense block matrices of constraint `i`.
    pub fn constraint_matrices(&self, i: usize) -> Vec<DMatrix<f64>> {
        densify(&self.blocks, &self.constraints[i].entries)
    }

    /// Plain-text dump: a header with the block sizes, the free count and
    /// the right-hand side, then one line `constraint block row col value`
    /// per upper-triangular entry. Constraint 0 is the objective; data
    /// constraints are numbered from 1 and free-variable coefficients use
    /// block `F` with the variable index in the row column.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        let sense = match self.sense {
            Sense::Minimize => "min",
            Sense::Maximize => "max",
            Sense::Feasibility => "feas",
        };
        let _ = writeln!(s, "# sdp dump v1");
        let _ = writeln!(s, "sense {sense}");
        let sizes: Vec<String> = self.blocks.iter().map(|b| b.to_string()).collect();
        let _ = writeln!(s, "blocks {}", sizes.join(" "));
        let _ = writeln!(s, "free {}", self.nfree);
        let bs: Vec<String> = self.constraints.iter().map(|c| format!("{:e}", c.b)).collect();
        let _ = writeln!(s, "rhs {}", bs.join(" "));
        let mut emit = |idx: usize, entries: &[Entry], free: &[(usize, f64)]| {
            let mut acc = densify(&self.blocks, entries);
            for (k, m) in acc.iter_mut().enumerate() {
                for i in 0..m.nrows() {
                    for j in i..m.ncols() {
                        if m[(i, j)] != 0.0 {
                            let _ = writeln!(s, "{idx} {} {} {} {:e}", k + 1, i + 1, j + 1, m[(i, j)]);
                        }
                    }
                }
            }
            for &(k, v) in free {
                let _ = writeln!(s, "{idx} F {} 0 {v:e}", k + 1);
            }
        };
        emit(0, &self.cost, &self.cost_free);
        for (i, c) in self.constraints.iter().enumerate() {
            emit(i + 1, &c.entries, &c.free);
        }
        s
    }
}

fn densify(blocks: &[usize], entries: &[Entry]) -> Vec<DMatrix<f64>> {
    let mut out: Vec<DMatrix<f64>> = blocks.iter().map(|&n| DMatrix::zeros(n, n)).collect();
    for &(k, i, j, v) in entries {
        out[k][(i, j)] = v;
        out[k][(j, i)] = v;
    }
    out
}

fn inner(a: &[DMatrix<f64>], b: &[DMatrix<f64>]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.dot(y)).sum()
}

fn sym(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

fn min_eig(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return f64::INFINITY;
    }
    SymmetricEigen::new(sym(m)).eigenvalues.min()
}

/// Verdict of [`psd_check`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PsdReport {
    pub psd: bool,
    pub min_eig: f64,
}

/// Number of eigenvalues of symmetric `m` below `sigma`, from the signs of
/// the pivots of an unpivoted `LDL^T` factorization of `m - sigma I`.
fn count_below(m: &DMatrix<f64>, sigma: f64) -> usize {
    let n = m.nrows();
    let mut a = m.clone();
    for i in 0..n {
        a[(i, i)] -= sigma;
    }
    let tiny = f64::EPSILON * (1.0 + m.amax());
    let mut neg = 0;
    for k in 0..n {
        let mut d = a[(k, k)];
        if d.abs() < tiny {
            d = -tiny;
        }
        if d < 0.0 {
            neg += 1;
        }
        for i in k + 1..n {
            let l = a[(i, k)] / d;
            for j in k + 1..n {
                let v = a[(i, j)] - l * a[(k, j)];
                a[(i, j)] = v;
            }
        }
    }
    neg
}

/// Checks `m ⪰ -tol I` by an `LDL^T` factorization with pivot threshold
/// `-tol`, and estimates the smallest eigenvalue by bisection on inertia.
pub fn psd_check(m: &DMatrix<f64>, tol: f64) -> PsdReport {
    let n = m.nrows();
    if n == 0 {
        return PsdReport { psd: true, min_eig: f64::INFINITY };
    }
    let a = if (m - m.transpose()).amax() > 1e-12 { sym(m) } else { m.clone() };
    // Gershgorin interval.
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r: f64 = (0..n).filter(|&j| j != i).map(|j| a[(i, j)].abs()).sum();
        lo = lo.min(a[(i, i)] - r);
        hi = hi.max(a[(i, i)] + r);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= 1e-14 * (1.0 + lo.abs().max(hi.abs())) || mid == lo || mid == hi {
            break;
        }
        if count_below(&a, mid) >= 1 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let min_eig = 0.5 * (lo + hi);
    PsdReport { psd: count_below(&a, -tol) == 0, min_eig }
}

/// Standard form after preprocessing: `min <C,X>` with `A(X) = b`.
struct Reduced {
    c: Vec<DMatrix<f64>>,
    a: Vec<Vec<DMatrix<f64>>>,
    b: DVector<f64>,
    /// Original multipliers `y = t * y_reduced`.
    t: DMatrix<f64>,
    /// Objective constant and the free-variable solve data.
    offset: f64,
}

enum Prep {
    Ready(Reduced),
    Infeasible(DVector<f64>),
    Unbounded,
}

fn orthonormal_left_null(f: &DMatrix<f64>, m: usize) -> DMatrix<f64> {
    if f.ncols() == 0 || m == 0 {
        return DMatrix::identity(m, m);
    }
    // Eigenvectors of F F^T with (numerically) zero eigenvalue.
    let g = f * f.transpose();
    let e = SymmetricEigen::new(g);
    let scale = e.eigenvalues.amax().max(1.0);
    let keep: Vec<usize> = (0..m).filter(|&i| e.eigenvalues[i] <= 1e-12 * scale).collect();
    DMatrix::from_fn(m, keep.len(), |i, j| e.eigenvectors[(i, keep[j])])
}

fn preprocess(p: &SdpProblem) -> Prep {
    let m = p.constraints.len();
    let sign = if p.sense == Sense::Maximize { -1.0 } else { 0.0 };
    let sign = if p.sense == Sense::Minimize { 1.0 } else { sign };
    let mut fm = DMatrix::zeros(m, p.nfree);
    for (i, c) in p.constraints.iter().enumerate() {
        for &(k, v) in &c.free {
            fm[(i, k)] += v;
        }
    }
    let b0 = DVector::from_iterator(m, p.constraints.iter().map(|c| c.b));
    let a0: Vec<Vec<DMatrix<f64>>> = (0..m).map(|i| p.constraint_matrices(i)).collect();
    let mut c = densify(&p.blocks, &p.cost);
    for blk in c.iter_mut() {
        *blk *= sign;
    }
    let mut cf = DVector::zeros(p.nfree);
    for &(k, v) in &p.cost_free {
        cf[k] += sign * v;
    }
    let mut offset = 0.0;
    if p.nfree > 0 && cf.amax() > 0.0 {
        // c_f = F^T v makes c_f . x_f = v . (b - A(X)).
        let ft = fm.transpose();
        let svd = ft.clone().svd(true, true);
        let v = match svd.solve(&cf, 1e-12) {
            Ok(v) => v,
            Err(_) => return Prep::Unbounded,
        };
        if (&ft * &v - &cf).amax() > 1e-9 * (1.0 + cf.amax()) {
            return Prep::Unbounded;
        }
        offset = v.dot(&b0);
        for (i, ai) in a0.iter().enumerate() {
            for (blk, a) in c.iter_mut().zip(ai) {
                *blk -= a * v[i];
            }
        }
    }
    let n = orthonormal_left_null(&fm, m);
    let project = |t: &DMatrix<f64>| -> (Vec<Vec<DMatrix<f64>>>, DVector<f64>) {
        let a: Vec<Vec<DMatrix<f64>>> = (0..t.ncols())
            .map(|k| {
                let mut acc: Vec<DMatrix<f64>> = p.blocks.iter().map(|&s| DMatrix::zeros(s, s)).collect();
                for i in 0..m {
                    let w = t[(i, k)];
                    if w != 0.0 {
                        for (blk, ai) in acc.iter_mut().zip(&a0[i]) {
                            *blk += ai * w;
                        }
                    }
                }
                acc
            })
            .collect();
        (a, t.transpose() * &b0)
    };
    let (a1, b1) = project(&n);
    // Drop dependent rows through the Gram matrix of the projected data.
    let r = a1.len();
    if r == 0 {
        let t = n.clone();
        return Prep::Ready(Reduced { c, a: a1, b: b1, t, offset });
    }
    let gram = DMatrix::from_fn(r, r, |i, j| inner(&a1[i], &a1[j]));
    let e = SymmetricEigen::new(gram);
    let scale = e.eigenvalues.iter().fold(1e-300f64, |acc, x| acc.max(x.abs()));
    let mut keep = Vec::new();
    for i in 0..r {
        if e.eigenvalues[i] > 1e-10 * scale {
            keep.push(i);
        } else {
            let z = e.eigenvectors.column(i).into_owned();
            let bz = z.dot(&b1);
            if bz.abs() > 1e-8 * (1.0 + b1.amax()) {
                let y = &n * z / bz;
                return Prep::Infeasible(y);
            }
        }
    }
    let p_mat = DMatrix::from_fn(r, keep.len(), |i, j| e.eigenvectors[(i, keep[j])]);
    let t = &n * &p_mat;
    let (a, b) = project(&t);
    Prep::Ready(Reduced { c, a, b, t, offset })
}

fn apply_at(a: &[Vec<DMatrix<f64>>], y: &DVector<f64>, blocks: &[usize]) -> Vec<DMatrix<f64>> {
    let mut out: Vec<DMatrix<f64>> = blocks.iter().map(|&s| DMatrix::zeros(s, s)).collect();
    for (i, ai) in a.iter().enumerate() {
        if y[i] != 0.0 {
            for (o, blk) in out.iter_mut().zip(ai) {
                *o += blk * y[i];
            }
        }
    }
    out
}

fn apply_a(a: &[Vec<DMatrix<f64>>], x: &[DMatrix<f64>]) -> DVector<f64> {
    DVector::from_iterator(a.len(), a.iter().map(|ai| inner(ai, x)))
}

fn norm(x: &[DMatrix<f64>]) -> f64 {
    inner(x, x).sqrt()
}

fn axpy(x: &[DMatrix<f64>], alpha: f64, d: &[DMatrix<f64>]) -> Vec<DMatrix<f64>> {
    x.iter().zip(d).map(|(a, b)| a + b * alpha).collect()
}

/// Largest step keeping `x + alpha d` PSD, or infinity.
fn max_step(x: &[DMatrix<f64>], d: &[DMatrix<f64>]) -> f64 {
    let mut best = f64::INFINITY;
    for (xb, db) in x.iter().zip(d) {
        if xb.nrows() == 0 {
            continue;
        }
        let Some(ch) = xb.clone().cholesky() else {
            return 0.0;
        };
        let l = ch.l();
        let linv = l.clone().try_inverse().unwrap_or_else(|| DMatrix::zeros(l.nrows(), l.ncols()));
        let z = &linv * db * linv.transpose();
        let lam = min_eig(&z);
        if lam < 0.0 {
            best = best.min(-1.0 / lam);
        }
    }
    best
}

fn scalar_step(v: f64, d: f64) -> f64 {
    if d < 0.0 {
        -v / d
    } else {
        f64::INFINITY
    }
}

struct Dir {
    dx: Vec<DMatrix<f64>>,
    dy: DVector<f64>,
    ds: Vec<DMatrix<f64>>,
    dtau: f64,
    dkappa: f64,
}

pub fn sdp_solve(p: &SdpProblem, opts: &SdpOptions) -> Result<SdpResult> {
    p.validate()?;
    let total: usize = p.blocks.iter().sum();
    if total > opts.max_dim {
        return Err(Error::Sdp(format!("total block dimension {total} exceeds the cap {}", opts.max_dim)));
    }
    let zero_x: Vec<DMatrix<f64>> = p.blocks.iter().map(|&s| DMatrix::zeros(s, s)).collect();
    let blank = |status| SdpResult {
        status,
        x: zero_x.clone(),
        x_free: vec![0.0; p.nfree],
        y: vec![0.0; p.constraints.len()],
        s: zero_x.clone(),
        objective: f64::NAN,
        gap: f64::NAN,
        ray: None,
        iterations: 0,
    };
    let red = match preprocess(p) {
        Prep::Ready(r) => r,
        Prep::Unbounded => return Ok(blank(SdpStatus::DualInfeasibleOrUnbounded)),
        Prep::Infeasible(y) => {
            let mut out = blank(SdpStatus::PrimalInfeasible);
            let ray: Vec<f64> = y.iter().copied().collect();
            if verify_ray(p, &ray, opts.ray_tol) {
                out.ray = Some(ray);
            } else {
                out.status = SdpStatus::Indeterminate;
            }
            return Ok(out);
        }
    };
    let mut res = hsd(p, &red, opts);
    if res.status == SdpStatus::PrimalInfeasible && !res.ray.as_ref().is_some_and(|r| verify_ray(p, r, opts.ray_tol)) {
        res.status = SdpStatus::Indeterminate;
    }
    Ok(res)
}

/// Independent check of a Farkas ray against the original data.
pub fn verify_ray(p: &SdpProblem, y: &[f64], tol: f64) -> bool {
    if y.len() != p.constraints.len() {
        return false;
    }
    let by: f64 = p.constraints.iter().zip(y).map(|(c, v)| c.b * v).sum();
    if by <= 0.0 {
        return false;
    }
    let scale = 1.0 / by;
    let mut acc: Vec<DMatrix<f64>> = p.blocks.iter().map(|&s| DMatrix::zeros(s, s)).collect();
    let mut free = vec![0.0; p.nfree];
    for (i, c) in p.constraints.iter().enumerate() {
        let w = -y[i] * scale;
        for &(k, r, col, v) in &c.entries {
            acc[k][(r, col)] += w * v;
            if r != col {
                acc[k][(col, r)] += w * v;
            }
        }
        for &(k, v) in &c.free {
            free[k] += w * v;
        }
    }
    free.iter().all(|v| v.abs() <= tol) && acc.iter().all(|m| min_eig(m) >= -tol)
}

fn hsd(p: &SdpProblem, red: &Reduced, opts: &SdpOptions) -> SdpResult {
    let blocks = &p.blocks;
    let m = red.a.len();
    let nu = blocks.iter().sum::<usize>() as f64 + 1.0;
    let mut x: Vec<DMatrix<f64>> = blocks.iter().map(|&s| DMatrix::identity(s, s)).collect();
    let mut s = x.clone();
    let mut y = DVector::zeros(m);
    let (mut tau, mut kappa) = (1.0f64, 1.0f64);
    let bnorm = red.b.amax();
    let cnorm = red.c.iter().fold(0.0f64, |acc, c| acc.max(c.amax()));
    let nz: Vec<Vec<bool>> = red.a.iter().map(|ai| ai.iter().map(|blk| blk.amax() > 0.0).collect()).collect();
    let mut status = SdpStatus::Indeterminate;
    let mut ray = None;
    let mut iters = 0;
    for it in 0..=opts.max_iter {
        iters = it;
        let rp = apply_a(&red.a, &x) - &red.b * tau;
        let aty = apply_at(&red.a, &y, blocks);
        let rd: Vec<DMatrix<f64>> = aty.iter().zip(&s).zip(&red.c).map(|((a, sb), c)| a + sb - c * tau).collect();
        let cx = inner(&red.c, &x);
        let by = red.b.dot(&y);
        let rg = cx - by + kappa;
        let mu = (inner(&x, &s) + tau * kappa) / nu;

        let pres = rp.amax() / tau / (1.0 + bnorm);
        let dres = rd.iter().fold(0.0f64, |acc, r| acc.max(r.amax())) / tau / (1.0 + cnorm);
        let (pobj, dobj) = (cx / tau, by / tau);
        let gap = (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs());
        if pres <= opts.feas_tol && dres <= opts.feas_tol && gap <= opts.gap_tol {
            status = SdpStatus::Optimal;
            break;
        }
        if by > 0.0 {
            let yr = (&red.t * &y) / by;
            let cand: Vec<f64> = yr.iter().copied().collect();
            if verify_ray(p, &cand, opts.ray_tol) {
                status = SdpStatus::PrimalInfeasible;
                ray = Some(cand);
                break;
            }
        }
        if cx < 0.0 {
            let ax = apply_a(&red.a, &x);
            if ax.amax() / -cx <= opts.feas_tol && x.iter().all(|b| min_eig(b) >= -opts.feas_tol * norm(&x)) {
                status = SdpStatus::DualInfeasibleOrUnbounded;
                break;
            }
        }
        if it == opts.max_iter || !mu.is_finite() || mu < 1e-300 {
            break;
        }

        // With X = Lx Lx^T and S = Ls Ls^T, the Schur matrix
        // M_ij = tr(A_i X A_j S^-1) is the Gram matrix of G_i = Ls^-1 A_i Lx,
        // which keeps it symmetric positive semidefinite in floating point.
        let mut lx = Vec::with_capacity(blocks.len());
        let mut lsinv = Vec::with_capacity(blocks.len());
        for (xb, sb) in x.iter().zip(&s) {
            let (Some(cx_), Some(cs)) = (xb.clone().cholesky(), sb.clone().cholesky()) else {
                break;
            };
            let l = cs.l();
            let n = l.nrows();
            let Some(li) = l.solve_lower_triangular(&DMatrix::identity(n, n)) else {
                break;
            };
            lx.push(cx_.l());
            lsinv.push(li);
        }
        if lx.len() != blocks.len() {
            break;
        }
        let sinv: Vec<DMatrix<f64>> = lsinv.iter().map(|li| li.transpose() * li).collect();
        let mut schur = DMatrix::zeros(m, m);
        let mut u = DVector::zeros(m);
        let xc: Vec<DMatrix<f64>> = x.iter().zip(&red.c).zip(&sinv).map(|((xb, cb), si)| sym(&(xb * cb * si))).collect();
        let gs: Vec<Vec<DMatrix<f64>>> = (0..m)
            .map(|j| {
                (0..blocks.len())
                    .map(|k| if nz[j][k] { &lsinv[k] * &red.a[j][k] * &lx[k] } else { DMatrix::zeros(0, 0) })
                    .collect()
            })
            .collect();
        for j in 0..m {
            for i in 0..=j {
                let mut v = 0.0;
                for k in 0..blocks.len() {
                    if nz[i][k] && nz[j][k] {
                        v += gs[i][k].dot(&gs[j][k]);
                    }
                }
                schur[(i, j)] = v;
                schur[(j, i)] = v;
            }
            u[j] = inner(&red.a[j], &xc);
        }
        let w = inner(&red.c, &xc);
        let chol = schur.clone().cholesky().or_else(|| {
            let shift = 1e-14 * schur.diagonal().amax().max(1e-300);
            (schur.clone() + DMatrix::identity(m, m) * shift).cholesky()
        });
        let lu = schur.clone().lu();
        let solve = |r: &DVector<f64>| -> DVector<f64> {
            match &chol {
                Some(c) => c.solve(r),
                None => lu.solve(r).unwrap_or_else(|| DVector::zeros(r.len())),
            }
        };
        let direction = |sigma: f64, eta: f64, corr: Option<&Dir>| -> Dir {
            // Rc = sigma mu S^-1 - X - sym(dXa dSa S^-1)
            let rc: Vec<DMatrix<f64>> = (0..blocks.len())
                .map(|k| {
                    let mut r = &sinv[k] * (sigma * mu) - &x[k];
                    if let Some(d) = corr {
                        r -= sym(&(&d.dx[k] * &d.ds[k] * &sinv[k]));
                    }
                    r
                })
                .collect();
            let lrd: Vec<DMatrix<f64>> = (0..blocks.len()).map(|k| sym(&(&x[k] * &rd[k] * &sinv[k])) * eta).collect();
            let corr_t = corr.map(|d| d.dtau * d.dkappa).unwrap_or(0.0);
            let r1 = -&rp * eta - apply_a(&red.a, &rc) - apply_a(&red.a, &lrd);
            let r3 = -rg * eta - inner(&red.c, &rc) - inner(&red.c, &lrd) - (sigma * mu - tau * kappa - corr_t) / tau;
            let pv = solve(&r1);
            let ub = &u + &red.b;
            let qv = solve(&ub);
            let umb = &u - &red.b;
            let denom = umb.dot(&qv) - w - kappa / tau;
            let dtau = if denom.abs() > 1e-300 { (r3 - umb.dot(&pv)) / denom } else { 0.0 };
            let dy = pv + qv * dtau;
            let atdy = apply_at(&red.a, &dy, blocks);
            let ds: Vec<DMatrix<f64>> = (0..blocks.len()).map(|k| -&rd[k] * eta - &atdy[k] + &red.c[k] * dtau).collect();
            let dx: Vec<DMatrix<f64>> = (0..blocks.len()).map(|k| sym(&(&rc[k] - &x[k] * &ds[k] * &sinv[k]))).collect();
            let dkappa = (sigma * mu - tau * kappa - corr_t - kappa * dtau) / tau;
            Dir { dx, dy, ds, dtau, dkappa }
        };
        let step_to_boundary = |d: &Dir| -> f64 {
            max_step(&x, &d.dx).min(max_step(&s, &d.ds)).min(scalar_step(tau, d.dtau)).min(scalar_step(kappa, d.dkappa))
        };
        let aff = direction(0.0, 1.0, None);
        let a_aff = step_to_boundary(&aff).min(1.0);
        let xa = axpy(&x, a_aff, &aff.dx);
        let sa = axpy(&s, a_aff, &aff.ds);
        let mu_aff = (inner(&xa, &sa) + (tau + a_aff * aff.dtau) * (kappa + a_aff * aff.dkappa)) / nu;
        let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);
        let d = direction(sigma, 1.0 - sigma, Some(&aff));
        let amax = step_to_boundary(&d);
        let alpha = (0.95 * amax).min(1.0);
        if !(alpha > 1e-14) {
            break;
        }
        x = axpy(&x, alpha, &d.dx).iter().map(sym).collect();
        s = axpy(&s, alpha, &d.ds).iter().map(sym).collect();
        y += &d.dy * alpha;
        tau += alpha * d.dtau;
        kappa += alpha * d.dkappa;
        // Keep the iterate on a bounded scale.
        let sc = (inner(&x, &s) + tau * kappa).sqrt().max(tau);
        if sc > 1e8 {
            let f = 1.0 / sc.sqrt();
            x.iter_mut().for_each(|b| *b *= f);
            s.iter_mut().for_each(|b| *b *= f);
            y *= f;
            tau *= f;
            kappa *= f;
        }
    }
    finish(p, red, status, x, y, s, tau, ray, iters)
}

#[allow(clippy::too_many_arguments)]
fn finish(
    p: &SdpProblem,
    red: &Reduced,
    status: SdpStatus,
    x: Vec<DMatrix<f64>>,
    y: DVector<f64>,
    s: Vec<DMatrix<f64>>,
    tau: f64,
    ray: Option<Vec<f64>>,
    iterations: usize,
) -> SdpResult {
    let t = if tau > 0.0 { tau } else { 1.0 };
    let xs: Vec<DMatrix<f64>> = x.iter().map(|b| b / t).collect();
    let ss: Vec<DMatrix<f64>> = s.iter().map(|b| b / t).collect();
    let yo = &red.t * (&y / t);
    // Free variables by least squares on f . x_f = b - A(X).
    let m = p.constraints.len();
    let mut x_free = vec![0.0; p.nfree];
    if p.nfree > 0 {
        let mut fm = DMatrix::zeros(m, p.nfree);
        let mut rhs = DVector::zeros(m);
        for (i, c) in p.constraints.iter().enumerate() {
            for &(k, v) in &c.free {
                fm[(i, k)] += v;
            }
            rhs[i] = c.b - inner(&p.constraint_matrices(i), &xs);
        }
        if let Ok(v) = fm.svd(true, true).solve(&rhs, 1e-12) {
            x_free = v.iter().copied().collect();
        }
    }
    let c_user = densify(&p.blocks, &p.cost);
    let mut objective = inner(&c_user, &xs);
    for &(k, v) in &p.cost_free {
        objective += v * x_free[k];
    }
    let pobj = inner(&red.c, &xs) + red.offset;
    let dobj = red.b.dot(&(&y / t)) + red.offset;
    SdpResult {
        status,
        x: xs,
        x_free,
        y: yo.iter().copied().collect(),
        s: ss,
        objective: if p.sense == Sense::Feasibility { 0.0 } else { objective },
        gap: (pobj - dobj).abs(),
        ray,
        iterations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn correlation_bound() {
        let mut p = SdpProblem::new(vec![2], 0, Sense::Maximize);
        p.cost.push((0, 0, 1, 0.5));
        p.add_constraint(vec![(0, 0, 0, 1.0)], vec![], 1.0);
        p.add_constraint(vec![(0, 1, 1, 1.0)], vec![], 1.0);
        let r = sdp_solve(&p, &SdpOptions::default()).unwrap();
        assert_eq!(r.status, SdpStatus::Optimal);
        assert!((r.x[0][(0, 1)] - 1.0).abs() < 1e-6, "{}", r.x[0]);
    }

    #[test]
    fn negative_diagonal_infeasible() {
        let mut p = SdpProblem::new(vec![1], 0, Sense::Feasibility);
        p.add_constraint(vec![(0, 0, 0, 1.0)], vec![], -1.0);
        let r = sdp_solve(&p, &SdpOptions::default()).unwrap();
        assert_eq!(r.status, SdpStatus::PrimalInfeasible);
        let y = r.ray.unwrap();
        assert!((y[0] + 1.0).abs() < 1e-6);
    }

    #[test]
    fn free_variable_with_cost() {
        // max t  s.t.  X_11 + t = 1, X_22 - t = 0  (t <= 1, t >= 0 and X ⪰ 0)
        let mut p = SdpProblem::new(vec![2], 1, Sense::Maximize);
        p.cost_free.push((0, 1.0));
        p.add_constraint(vec![(0, 0, 0, 1.0)], vec![(0, 1.0)], 1.0);
        p.add_constraint(vec![(0, 1, 1, 1.0)], vec![(0, -1.0)], 0.0);
        let r = sdp_solve(&p, &SdpOptions::default()).unwrap();
        assert_eq!(r.status, SdpStatus::Optimal);
        assert!((r.objective - 1.0).abs() < 1e-6, "{}", r.objective);
    }

    #[test]
    fn dependent_rows() {
        let mut p = SdpProblem::new(vec![2], 0, Sense::Minimize);
        p.cost.push((0, 0, 0, 1.0));
        p.cost.push((0, 1, 1, 1.0));
        p.add_constraint(vec![(0, 0, 1, 0.5)], vec![], 1.0);
        p.add_constraint(vec![(0, 0, 1, 1.0)], vec![], 2.0);
        let r = sdp_solve(&p, &SdpOptions::default()).unwrap();
        assert_eq!(r.status, SdpStatus::Optimal);
        assert!((r.objective - 2.0).abs() < 1e-6);
        p.constraints[1].b = 3.0;
        let r = sdp_solve(&p, &SdpOptions::default()).unwrap();
        assert_eq!(r.status, SdpStatus::PrimalInfeasible);
    }

    #[test]
    fn unbounded() {
        let mut p = SdpProblem::new(vec![1], 0, Sense::Maximize);
        p.cost.push((0, 0, 0, 1.0));
        let r = sdp_solve(&p, &SdpOptions::default()).unwrap();
        assert_eq!(r.status, SdpStatus::DualInfeasibleOrUnbounded);
    }

    #[test]
    fn psd_checks() {
        assert!(psd_check(&DMatrix::identity(3, 3), 1e-8).psd);
        let r = psd_check(&DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]), 1e-8);
        assert!(!r.psd);
        assert!((r.min_eig + 1.0).abs() < 1e-9);
        let g = DMatrix::from_row_slice(4, 4, &[6.0, 0.0, -2.0, 0.0, 0.0, 4.0, 0.0, 0.0, -2.0, 0.0, 6.0, -3.0, 0.0, 0.0, -3.0, 6.0]) / 6.0;
        assert!(psd_check(&g, 1e-8).psd);
    }

    #[test]
    fn dump_lists_entries() {
        let mut p = SdpProblem::new(vec![2], 0, Sense::Feasibility);
        p.add_constraint(vec![(0, 0, 1, 2.0)], vec![], 1.0);
        let d = p.dump();
        assert!(d.contains("blocks 2"));
        assert!(d.contains("1 1 1 2 2e0"));
    }
}
