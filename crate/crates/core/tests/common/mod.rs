//! Reference computations shared by the integration tests. Nothing here uses
//! the library's iterative solvers or its hitting recursion.
#![allow(dead_code)]

use graph_diffusion::generators::*;
use graph_diffusion::{check_reachability, Graph, TransitionOperator};
use nalgebra::DMatrix;

pub fn dense(g: &Graph) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(g.n(), g.n());
    for (i, j, p) in g.edges() {
        m[(i, j)] = p;
    }
    m
}

/// Symmetrized interior block of a reversible chain.
pub struct SymmetricForm {
    /// Interior vertex ids, in order.
    pub interior: Vec<usize>,
    /// Detailed-balance weights on the interior.
    pub weights: Vec<f64>,
    pub eigenvalues: Vec<f64>,
    /// Columns are eigenvectors of the symmetric form.
    pub vectors: DMatrix<f64>,
}

/// Weights `w` with `w_i m_ij = w_j m_ji`, propagated along a spanning
/// forest of the support; `None` when detailed balance fails.
pub fn detailed_balance(m: &DMatrix<f64>) -> Option<Vec<f64>> {
    let n = m.nrows();
    let mut w = vec![0.0; n];
    for root in 0..n {
        if w[root] != 0.0 {
            continue;
        }
        w[root] = 1.0;
        let mut stack = vec![root];
        while let Some(i) = stack.pop() {
            for j in 0..n {
                if m[(i, j)] > 0.0 && w[j] == 0.0 {
                    if m[(j, i)] <= 0.0 {
                        return None;
                    }
                    w[j] = w[i] * m[(i, j)] / m[(j, i)];
                    stack.push(j);
                }
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            let (a, b) = (w[i] * m[(i, j)], w[j] * m[(j, i)]);
            if (a - b).abs() > 1e-12 * a.max(b).max(1e-300) {
                return None;
            }
        }
    }
    Some(w)
}

/// Dense symmetric eigen-decomposition of `P` (interior block `Q` when the
/// graph has sinks). Panics on non-reversible input.
pub fn symmetric_form(g: &Graph) -> SymmetricForm {
    let interior: Vec<usize> = (0..g.n()).filter(|&i| !g.is_absorbing(i)).collect();
    let full = dense(g);
    let m = DMatrix::from_fn(interior.len(), interior.len(), |a, b| full[(interior[a], interior[b])]);
    let weights = detailed_balance(&m).expect("reversible chain");
    let s = DMatrix::from_fn(m.nrows(), m.ncols(), |a, b| {
        let v = m[(a, b)] * (weights[a] / weights[b]).sqrt();
        let t = m[(b, a)] * (weights[b] / weights[a]).sqrt();
        0.5 * (v + t)
    });
    let eig = s.symmetric_eigen();
    SymmetricForm { interior, weights, eigenvalues: eig.eigenvalues.iter().copied().collect(), vectors: eig.eigenvectors }
}

/// `lambda_1` from the dense spectrum: `1 - rho(Q)` with an absorbing set,
/// else one minus the largest eigenvalue of `P` below the top eigenvalue 1.
/// `None` when 1 is repeated.
pub fn oracle_lambda(g: &Graph) -> Option<f64> {
    let f = symmetric_form(g);
    let mut mu = f.eigenvalues.clone();
    mu.sort_by(|a, b| b.total_cmp(a));
    if g.has_absorbing() {
        return Some(1.0 - mu[0]);
    }
    if mu.len() < 2 || (mu[1] - 1.0).abs() < 1e-9 {
        return None;
    }
    Some(1.0 - mu[1])
}

/// Whether `1 - lambda` is separated from the rest of the spectrum by `gap`.
pub fn is_simple(g: &Graph, lambda: f64, gap: f64) -> bool {
    let mu = 1.0 - lambda;
    symmetric_form(g).eigenvalues.iter().filter(|&&x| (x - mu).abs() < gap).count() == 1
}

/// Eigenvector for `lambda` (assumed simple), embedded with zeros on sinks,
/// sup-normalized with the library's sign rule.
pub fn oracle_vector(g: &Graph, lambda: f64) -> Vec<f64> {
    let f = symmetric_form(g);
    let mu = 1.0 - lambda;
    let k = (0..f.eigenvalues.len())
        .min_by(|&a, &b| (f.eigenvalues[a] - mu).abs().total_cmp(&(f.eigenvalues[b] - mu).abs()))
        .unwrap();
    let mut v = vec![0.0; g.n()];
    for (a, &i) in f.interior.iter().enumerate() {
        v[i] = f.vectors[(a, k)] / f.weights[a].sqrt();
    }
    let norm = v.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let lead = v.iter().position(|x| x.abs() >= norm * (1.0 - 1e-6)).unwrap();
    let s = if v[lead] < 0.0 { -1.0 } else { 1.0 };
    v.iter_mut().for_each(|x| *x *= s / norm);
    v
}

/// `P(hit B within k steps)` by listing every walk of length `<= k` from `i`.
pub fn enumerate_hit(g: &Graph, mask: &[bool], i: usize, k: usize) -> f64 {
    fn go(g: &Graph, mask: &[bool], v: usize, left: usize, prob: f64, acc: &mut f64) {
        if mask[v] {
            *acc += prob;
            return;
        }
        if left == 0 {
            return;
        }
        let (cols, ws) = g.row(v);
        for (&j, &w) in cols.iter().zip(ws) {
            go(g, mask, j, left - 1, prob * w, acc);
        }
    }
    let mut acc = 0.0;
    go(g, mask, i, k, 1.0, &mut acc);
    acc
}

/// Dense reference distances: `h <- P h` with `h = 1` on `B`, step by step.
pub fn dense_distance(g: &Graph, target: &[usize], p: f64, kmax: usize) -> Vec<Option<usize>> {
    let n = g.n();
    let m = dense(g);
    let mut mask = vec![false; n];
    for &b in target {
        mask[b] = true;
    }
    let mut h = nalgebra::DVector::from_fn(n, |i, _| if mask[i] { 1.0 } else { 0.0 });
    let mut d: Vec<Option<usize>> = (0..n).map(|i| if mask[i] { Some(0) } else { None }).collect();
    for k in 1..=kmax {
        h = &m * &h;
        for i in 0..n {
            if mask[i] {
                h[i] = 1.0;
            } else if d[i].is_none() && h[i] >= p {
                d[i] = Some(k);
            }
        }
        if d.iter().all(Option::is_some) {
            break;
        }
    }
    d
}

/// Every built-in family at `n <= 16`, labelled.
pub fn small_instances() -> Vec<(String, Graph)> {
    let mut out = Vec::new();
    for n in 3..=16 {
        out.push((format!("path({n})"), gen_path(n).unwrap()));
        out.push((format!("cycle({n})"), gen_cycle(n).unwrap()));
    }
    for n in 2..=16 {
        out.push((format!("complete_absorbing({n})"), gen_complete_absorbing(n).unwrap()));
    }
    for n in 3..=15 {
        for eps in [0.5, 0.1, 0.01] {
            out.push((format!("cycle_plus_boundary({n},{eps})"), gen_cycle_plus_boundary(n, eps).unwrap()));
        }
    }
    for n in 2..=7 {
        out.push((format!("two_complete_bridge({n})"), gen_two_complete_bridge(n).unwrap()));
    }
    for n in [8, 12, 16] {
        for (b, extra) in [(1, 0.0), (2, 4.0), (3, 10.0)] {
            for seed in 0..3 {
                out.push((
                    format!("small_world_ring({n},{b},{extra},{seed})"),
                    gen_small_world_ring(n, b, extra, seed).unwrap(),
                ));
            }
        }
    }
    for points in [12, 16] {
        for seed in 0..4 {
            let g = gen_knn_point_cloud(&sample_dumbbell(points, seed), 3).unwrap();
            if check_reachability(&g) {
                out.push((format!("knn_dumbbell({points},3,{seed})"), g));
            }
        }
    }
    out
}

/// Smallest `k` with `(1 - 1/n)^k <= 1/2`, by exact integer arithmetic:
/// `2 (n-1)^k <= n^k`.
pub fn complete_graph_distance(n: u64) -> usize {
    use num_bigint::BigUint;
    let mut num = BigUint::from(2u32);
    let mut den = BigUint::from(1u32);
    let mut k = 0;
    loop {
        k += 1;
        num *= n - 1;
        den *= n;
        if num <= den {
            return k;
        }
    }
}
