//! The averaging Laplacian `(Lu)(i) = -sum_j p_ij (u(j) - u(i))` and the
//! eigenpairs the bound checks consume.
//!
//! All eigensolves are power iterations on the lazy walk `(I + P) / 2`,
//! which maps the real spectrum of `P` monotonically into `[0, 1]`, so the
//! largest real eigenvalue of `P` becomes the dominant one. The trivial pair
//! (constant right vector, stationary left vector) is removed by oblique
//! projection.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{check_reachability, Graph, TransitionOperator, Vector};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITERS: usize = 2_000_000;

/// L1 tolerance on `pi P - pi` used when the stationary vector feeds a deflation.
pub const STATIONARY_TOL: f64 = 1e-13;

/// Iterations without a 1% residual improvement before giving up.
const STAGNATION_WINDOW: usize = 50_000;
/// How often the two-term recurrence probe for complex pairs runs.
const COMPLEX_PROBE_EVERY: usize = 256;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenPair {
    /// Eigenvalue of `L`.
    pub lambda: f64,
    /// Eigenvector with `max |u(i)| = 1`; the first extremal vertex is positive.
    pub u: Vector,
    /// `max |Lu - lambda u|`.
    pub residual: f64,
    pub iterations: usize,
}

/// Direct evaluation of `(Lu)(i) = -sum_j p_ij (u(j) - u(i))` in CSR order.
pub fn apply_laplacian(g: &Graph, u: &[f64]) -> Result<Vector> {
    g.check_vector(u)?;
    Ok((0..g.n())
        .map(|i| {
            let (cols, ws) = g.row(i);
            -cols.iter().zip(ws).map(|(&j, &w)| w * (u[j] - u[i])).sum::<f64>()
        })
        .collect())
}

/// `max |Lu - lambda u|` through the operator interface, using `L = I - P` on
/// interior rows and `L = 0` on sinks.
pub fn laplacian_residual<T: TransitionOperator + ?Sized>(op: &T, u: &[f64], lambda: f64) -> f64 {
    let mut pu = vec![0.0; u.len()];
    op.apply(u, &mut pu);
    (0..u.len())
        .map(|i| {
            let lu = if op.is_absorbing(i) { 0.0 } else { u[i] - pu[i] };
            (lu - lambda * u[i]).abs()
        })
        .fold(0.0, f64::max)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Entries within this relative distance of the sup-norm count as extremal
/// when fixing the sign, so that symmetric ties are not decided by rounding.
pub const SIGN_TIE_TOL: f64 = 1e-6;

/// Scales to sup-norm 1 and flips sign so the lowest-index extremal entry is
/// positive.
pub fn normalize_sup(v: &mut [f64]) {
    let m = sup_norm(v);
    if m == 0.0 {
        return;
    }
    let k = v.iter().position(|x| x.abs() >= m * (1.0 - SIGN_TIE_TOL)).unwrap();
    let s = if v[k] < 0.0 { -m } else { m };
    v.iter_mut().for_each(|x| *x /= s);
}

/// Deterministic start vector with entries in `[-1, 1]`.
fn start_vector(n: usize) -> Vec<f64> {
    (0..n as u64)
        .map(|i| {
            let mut z = i.wrapping_add(0x9e37_79b9_7f4a_7c15);
            z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
            z ^= z >> 31;
            (z >> 11) as f64 / (1u64 << 52) as f64 - 1.0
        })
        .collect()
}

/// Column-compressed copy of `P` so that `P^T v` can run row by row.
struct Transposed {
    offsets: Vec<usize>,
    rows: Vec<usize>,
    weights: Vec<f64>,
}

impl Transposed {
    fn new(g: &Graph) -> Self {
        let n = g.n();
        let mut counts = vec![0usize; n + 1];
        for &j in g.col_indices() {
            counts[j + 1] += 1;
        }
        for j in 0..n {
            counts[j + 1] += counts[j];
        }
        let mut fill = counts.clone();
        let mut rows = vec![0; g.nnz()];
        let mut weights = vec![0.0; g.nnz()];
        for i in 0..n {
            let (cols, ws) = g.row(i);
            for (&j, &w) in cols.iter().zip(ws) {
                rows[fill[j]] = i;
                weights[fill[j]] = w;
                fill[j] += 1;
            }
        }
        Self { offsets: counts, rows, weights }
    }

    fn apply(&self, v: &[f64], out: &mut [f64]) {
        for (j, o) in out.iter_mut().enumerate() {
            let (a, b) = (self.offsets[j], self.offsets[j + 1]);
            *o = self.rows[a..b].iter().zip(&self.weights[a..b]).map(|(&i, &w)| w * v[i]).sum();
        }
    }
}

/// Stationary distribution by power iteration of the lazy walk on `P^T`.
/// Stops once `||pi P - pi||_1 <= tol`.
pub fn stationary_distribution(g: &Graph, tol: f64, max_iters: usize) -> Result<Vector> {
    if g.has_absorbing() {
        return Err(Error::HasAbsorbingSet);
    }
    if !check_reachability(g) {
        return Err(Error::NotIrreducible);
    }
    let n = g.n();
    let t = Transposed::new(g);
    let mut pi = vec![1.0 / n as f64; n];
    let mut next = vec![0.0; n];
    for _ in 0..max_iters {
        t.apply(&pi, &mut next);
        let gap: f64 = pi.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        if gap <= tol {
            let s: f64 = next.iter().sum();
            next.iter_mut().for_each(|x| *x /= s);
            return Ok(next);
        }
        for (p, q) in pi.iter_mut().zip(&next) {
            *p = 0.5 * (*p + q);
        }
        let s: f64 = pi.iter().sum();
        pi.iter_mut().for_each(|x| *x /= s);
    }
    Err(Error::NoConvergence(max_iters))
}

/// Right/left eigenvector pairs already removed from the iteration space.
struct Deflation {
    right: Vec<Vec<f64>>,
    left: Vec<Vec<f64>>,
    inv_pairing: Vec<f64>,
}

impl Deflation {
    fn new() -> Self {
        Self { right: Vec::new(), left: Vec::new(), inv_pairing: Vec::new() }
    }

    fn push(&mut self, right: Vec<f64>, left: Vec<f64>) {
        let pairing = dot(&left, &right);
        self.inv_pairing.push(1.0 / pairing);
        self.right.push(right);
        self.left.push(left);
    }

    /// `v <- v - sum_k (w_k . v) / (w_k . r_k) r_k`
    fn project(&self, v: &mut [f64]) {
        for k in 0..self.right.len() {
            let c = dot(&self.left[k], v) * self.inv_pairing[k];
            v.iter_mut().zip(&self.right[k]).for_each(|(x, r)| *x -= c * r);
        }
    }

    /// Adjoint projection for left iterations.
    fn project_left(&self, w: &mut [f64]) {
        for k in 0..self.right.len() {
            let c = dot(&self.right[k], w) * self.inv_pairing[k];
            w.iter_mut().zip(&self.left[k]).for_each(|(x, l)| *x -= c * l);
        }
    }
}

struct PowerResult {
    mu: f64,
    v: Vec<f64>,
    iterations: usize,
}

/// Lazy power iteration `v <- (v + Av) / 2` followed by `project`.
/// Converged when `max |Av - mu v| <= tol` with `v` sup-normalized.
fn lazy_power<A, P>(apply: A, project: P, mut v: Vec<f64>, tol: f64, max_iters: usize) -> Result<PowerResult>
where
    A: Fn(&[f64], &mut [f64]),
    P: Fn(&mut [f64]),
{
    let n = v.len();
    let mut av = vec![0.0; n];
    let mut best = f64::INFINITY;
    let mut best_at = 0;
    project(&mut v);
    for it in 0..max_iters {
        let m = sup_norm(&v);
        if m == 0.0 || !m.is_finite() {
            return Err(Error::NoConvergence(it));
        }
        v.iter_mut().for_each(|x| *x /= m);
        apply(&v, &mut av);
        let mu = dot(&v, &av) / dot(&v, &v);
        let residual = v.iter().zip(&av).fold(0.0, |r: f64, (x, y)| r.max((y - mu * x).abs()));
        if residual <= tol {
            return Ok(PowerResult { mu, v, iterations: it + 1 });
        }
        if residual < 0.99 * best {
            best = residual;
            best_at = it;
        } else if it - best_at > STAGNATION_WINDOW {
            return Err(Error::NoConvergence(it + 1));
        }
        // a rotating iterate makes no progress, so only stalled runs are probed
        let stalled = it - best_at >= COMPLEX_PROBE_EVERY;
        if stalled && it % COMPLEX_PROBE_EVERY == 0 && complex_pair_detected(&apply, &project, &v) {
            return Err(Error::ComplexDominantPair);
        }
        for (x, y) in v.iter_mut().zip(&av) {
            *x = 0.5 * (*x + y);
        }
        project(&mut v);
    }
    Err(Error::NoConvergence(max_iters))
}

/// Fits `M^2 v = a M v + b v` for the projected lazy operator `M`. A tight fit
/// with `a^2 + 4b < 0` means the iterate is rotating inside the real
/// invariant plane of a complex conjugate pair.
fn complex_pair_detected<A, P>(apply: &A, project: &P, v: &[f64]) -> bool
where
    A: Fn(&[f64], &mut [f64]),
    P: Fn(&mut [f64]),
{
    let step = |x: &[f64]| {
        let mut ax = vec![0.0; x.len()];
        apply(x, &mut ax);
        let mut y: Vec<f64> = x.iter().zip(&ax).map(|(a, b)| 0.5 * (a + b)).collect();
        project(&mut y);
        y
    };
    let y1 = step(v);
    let y2 = step(&y1);
    let (g11, g10, g00) = (dot(&y1, &y1), dot(&y1, v), dot(v, v));
    let det = g11 * g00 - g10 * g10;
    if det <= 1e-6 * g11 * g00 {
        // y1 is nearly parallel to v: either a real eigenvector is forming or
        // the fit below would be too ill-conditioned to trust
        return false;
    }
    let (r1, r0) = (dot(&y2, &y1), dot(&y2, v));
    let a = (r1 * g00 - r0 * g10) / det;
    let b = (g11 * r0 - g10 * r1) / det;
    let misfit: f64 = y2
        .iter()
        .zip(&y1)
        .zip(v)
        .map(|((z, y), x)| (z - a * y - b * x).powi(2))
        .sum::<f64>()
        .sqrt();
    // rotations this slow are indistinguishable from two close real modes
    misfit <= 1e-6 * dot(&y2, &y2).sqrt() && a * a + 4.0 * b < -1e-8 * a * a
}

fn finish<T: TransitionOperator + ?Sized>(op: &T, mut v: Vec<f64>, mu: f64, iterations: usize) -> EigenPair {
    normalize_sup(&mut v);
    let lambda = 1.0 - mu;
    let residual = laplacian_residual(op, &v, lambda);
    EigenPair { lambda, u: v, residual, iterations }
}

/// Eigenpairs of `L` with the smallest nonzero eigenvalues, in increasing order.
///
/// Each pair is found by deflated lazy power iteration; for pairs after the
/// first, the matching left eigenvector is obtained by the same iteration on
/// `P^T`, started from `pi * u`.
pub fn leading_nontrivial_eigenpairs(g: &Graph, count: usize, tol: f64, max_iters: usize) -> Result<Vec<EigenPair>> {
    let n = g.n();
    if n < 2 {
        return Err(Error::SizeTooSmall { got: n, min: 2 });
    }
    let pi = stationary_distribution(g, STATIONARY_TOL, max_iters)?;
    let mut deflation = Deflation::new();
    deflation.push(vec![1.0; n], pi.clone());
    let transposed = Transposed::new(g);
    // inner iterations stop a little early so the final recomputed residual stays within tol
    let inner_tol = 0.5 * tol;
    let mut pairs = Vec::with_capacity(count);
    for k in 0..count {
        let right = lazy_power(|x, y| g.apply(x, y), |x| deflation.project(x), start_vector(n), inner_tol, max_iters)?;
        let pair = finish(g, right.v, right.mu, right.iterations);
        if k + 1 < count {
            let seed: Vec<f64> = pair.u.iter().zip(&pi).map(|(a, b)| a * b).collect();
            let left = lazy_power(
                |x, y| transposed.apply(x, y),
                |x| deflation.project_left(x),
                seed,
                inner_tol,
                max_iters,
            )?;
            if (left.mu - right.mu).abs() > 1e3 * tol {
                return Err(Error::NoConvergence(left.iterations));
            }
            deflation.push(pair.u.clone(), left.v);
        }
        pairs.push(pair);
    }
    Ok(pairs)
}

/// Eigenpair of `L` for the largest real eigenvalue of `P` other than 1.
pub fn first_nontrivial_eigenpair(g: &Graph, tol: f64, max_iters: usize) -> Result<EigenPair> {
    Ok(leading_nontrivial_eigenpairs(g, 1, tol, max_iters)?.remove(0))
}

/// Perron pair of the walk killed on the absorbing set, embedded with `u = 0`
/// on sinks. `lambda = 1 - rho(Q)` for the interior block `Q`.
pub fn absorbing_dominant_eigenpair<T: TransitionOperator + ?Sized>(op: &T, tol: f64, max_iters: usize) -> Result<EigenPair> {
    if !op.has_absorbing() {
        return Err(Error::NoAbsorbingSet);
    }
    let n = op.order();
    let start: Vec<f64> = (0..n).map(|i| if op.is_absorbing(i) { 0.0 } else { 1.0 }).collect();
    let run = lazy_power(|x, y| op.apply(x, y), |_| {}, start, 0.5 * tol, max_iters)?;
    let pair = finish(op, run.v, run.mu, run.iterations);
    Ok(pair)
}

/// Same as [`absorbing_dominant_eigenpair`] for a graph, after checking that
/// every vertex drains into the absorbing set.
pub fn absorbing_dominant_eigenpair_checked(g: &Graph, tol: f64, max_iters: usize) -> Result<EigenPair> {
    if !g.has_absorbing() {
        return Err(Error::NoAbsorbingSet);
    }
    if !check_reachability(g) {
        return Err(Error::UnreachableBoundary);
    }
    absorbing_dominant_eigenpair(g, tol, max_iters)
}

/// Perron pair of `Q + diag(w)` on the interior. Returns `u >= 0` (zero on
/// sinks) and the potential `w + sigma` for which `Lu = (w + sigma) u` holds.
pub fn schrodinger_ground_state(g: &Graph, w: &[f64], tol: f64, max_iters: usize) -> Result<(Vector, Vector)> {
    g.check_vector(w)?;
    if !g.has_absorbing() {
        return Err(Error::NoAbsorbingSet);
    }
    let n = g.n();
    let start: Vec<f64> = (0..n).map(|i| if g.is_absorbing(i) { 0.0 } else { 1.0 }).collect();
    let apply = |x: &[f64], y: &mut [f64]| {
        g.apply(x, y);
        for i in 0..n {
            if !g.is_absorbing(i) {
                y[i] += w[i] * x[i];
            }
        }
    };
    let run = lazy_power(apply, |_| {}, start, 0.5 * tol, max_iters)?;
    let mut u = run.v;
    normalize_sup(&mut u);
    let sigma = 1.0 - run.mu;
    let potential = (0..n).map(|i| if g.is_absorbing(i) { 0.0 } else { w[i] + sigma }).collect();
    Ok((u, potential))
}
