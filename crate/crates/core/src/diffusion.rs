//! Hitting probabilities and the diffusion distance `d_B^(p)`.
//!
//! `h_k(i)` is the probability that a walk from `i` has visited `B` at some
//! time `t <= k`. Members of `B` are at distance 0; every other vertex needs
//! `t >= 1`. The exact profile follows the recursion
//! `h_{k+1}(i) = 1` on `B`, `sum_j p_ij h_k(j)` elsewhere.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, TransitionOperator};
use crate::walk::{walker_rng, WalkSampler};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

pub fn default_kmax(n: usize) -> usize {
    50 * n
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HittingProfile {
    pub target: Vec<usize>,
    pub kmax: usize,
    /// `h[k][i]` for `k = 0..=kmax`.
    pub h: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiffusionField {
    pub target: Vec<usize>,
    pub p: f64,
    pub kmax: usize,
    /// Step counts; capped vertices report `kmax`.
    pub d: Vec<usize>,
    pub capped: Vec<bool>,
}

impl DiffusionField {
    pub fn any_capped(&self) -> bool {
        self.capped.iter().any(|&c| c)
    }

    pub fn max_distance(&self) -> usize {
        self.d.iter().copied().max().unwrap_or(0)
    }
}

/// Validated, sorted, deduplicated target with its membership mask.
pub fn target_mask(n: usize, target: &[usize]) -> Result<(Vec<usize>, Vec<bool>)> {
    if target.is_empty() {
        return Err(Error::EmptyTarget);
    }
    let mut mask = vec![false; n];
    for &b in target {
        if b >= n {
            return Err(Error::IndexOutOfRange { id: b, n });
        }
        mask[b] = true;
    }
    let sorted = (0..n).filter(|&i| mask[i]).collect();
    Ok((sorted, mask))
}

/// Runs the hitting recursion, calling `visit(k, h_k)` for `k = 0, 1, ...`
/// until `visit` returns `false` or `k = kmax`.
pub fn sweep_hitting<T, F>(op: &T, mask: &[bool], kmax: usize, mut visit: F)
where
    T: TransitionOperator + ?Sized,
    F: FnMut(usize, &[f64]) -> bool,
{
    let mut h: Vec<f64> = mask.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
    let mut next = vec![0.0; h.len()];
    if !visit(0, &h) {
        return;
    }
    for k in 1..=kmax {
        op.apply(&h, &mut next);
        for (x, &b) in next.iter_mut().zip(mask) {
            if b {
                *x = 1.0;
            } else {
                *x = x.min(1.0);
            }
        }
        std::mem::swap(&mut h, &mut next);
        if !visit(k, &h) {
            return;
        }
    }
}

/// Full cumulative hitting profile up to `kmax`.
pub fn hitting_profile<T: TransitionOperator + ?Sized>(op: &T, target: &[usize], kmax: usize) -> Result<HittingProfile> {
    if kmax == 0 {
        return Err(Error::BadHorizon);
    }
    let (target, mask) = target_mask(op.order(), target)?;
    let mut h = Vec::with_capacity(kmax + 1);
    sweep_hitting(op, &mask, kmax, |_, hk| {
        h.push(hk.to_vec());
        true
    });
    Ok(HittingProfile { target, kmax, h })
}

fn check_threshold(p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::BadThreshold(p))
    }
}

/// Smallest `k` with `h_k(i) >= p`, computed without storing the profile.
pub fn diffusion_distance<T: TransitionOperator + ?Sized>(op: &T, target: &[usize], p: f64, kmax: usize) -> Result<DiffusionField> {
    check_threshold(p)?;
    if kmax == 0 {
        return Err(Error::BadHorizon);
    }
    let n = op.order();
    let (target, mask) = target_mask(n, target)?;
    let mut d = vec![0usize; n];
    let mut done = mask.clone();
    let mut open = done.iter().filter(|&&x| !x).count();
    sweep_hitting(op, &mask, kmax, |k, h| {
        if k == 0 {
            return open > 0;
        }
        for i in 0..n {
            if !done[i] && h[i] >= p {
                d[i] = k;
                done[i] = true;
                open -= 1;
            }
        }
        open > 0
    });
    let capped: Vec<bool> = done.iter().map(|&x| !x).collect();
    for i in 0..n {
        if capped[i] {
            d[i] = kmax;
        }
    }
    Ok(DiffusionField { target, p, kmax, d, capped })
}

/// Wilson score interval for `successes` out of `trials`.
pub fn wilson_interval(successes: usize, trials: usize, z: f64) -> (f64, f64) {
    let n = trials as f64;
    let phat = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (phat + z2 / (2.0 * n)) / denom;
    let half = z * (phat * (1.0 - phat) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McDiffusionField {
    pub field: DiffusionField,
    pub walkers: usize,
    pub seed: u64,
    /// Wilson 95% interval on `h` at the reported step.
    pub ci: Vec<(f64, f64)>,
    /// The threshold lies inside the interval at the reported step or the one
    /// before it, so the estimate may be off by one step.
    pub near_threshold: Vec<bool>,
}

/// First-hit times in `1..=kmax` of `walkers` walks from `start`, sorted.
fn first_hits(sampler: &WalkSampler, mask: &[bool], start: usize, walkers: usize, kmax: usize, seed: u64) -> Vec<usize> {
    let mut times = Vec::with_capacity(walkers);
    for w in 0..walkers {
        let mut rng = walker_rng(seed, start, w);
        let mut x = start;
        for t in 1..=kmax {
            match sampler.step(x, &mut rng) {
                Some(y) => x = y,
                None => break,
            }
            if mask[x] {
                times.push(t);
                break;
            }
        }
    }
    times.sort_unstable();
    times
}

fn check_walkers(walkers: usize, kmax: usize) -> Result<()> {
    if walkers == 0 {
        return Err(Error::InvalidParameter("walkers must be at least 1".into()));
    }
    if kmax == 0 {
        return Err(Error::BadHorizon);
    }
    Ok(())
}

/// Empirical hitting profile from seeded walks, same layout as [`hitting_profile`].
pub fn mc_hitting_profile(g: &Graph, target: &[usize], walkers: usize, kmax: usize, seed: u64) -> Result<HittingProfile> {
    check_walkers(walkers, kmax)?;
    let n = g.n();
    let (target, mask) = target_mask(n, target)?;
    let sampler = WalkSampler::new(g);
    let columns: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            if mask[i] {
                return vec![1.0; kmax + 1];
            }
            let times = first_hits(&sampler, &mask, i, walkers, kmax, seed);
            (0..=kmax)
                .map(|k| times.partition_point(|&t| t <= k) as f64 / walkers as f64)
                .collect()
        })
        .collect();
    let h = (0..=kmax).map(|k| columns.iter().map(|c| c[k]).collect()).collect();
    Ok(HittingProfile { target, kmax, h })
}

/// Monte Carlo version of [`diffusion_distance`].
pub fn mc_diffusion_distance(
    g: &Graph,
    target: &[usize],
    p: f64,
    walkers: usize,
    kmax: usize,
    seed: u64,
) -> Result<McDiffusionField> {
    check_threshold(p)?;
    check_walkers(walkers, kmax)?;
    let n = g.n();
    let (target, mask) = target_mask(n, target)?;
    let sampler = WalkSampler::new(g);
    let frac = |count: usize| count as f64 / walkers as f64;
    let rows: Vec<(usize, bool, (f64, f64), bool)> = (0..n)
        .into_par_iter()
        .map(|i| {
            if mask[i] {
                return (0, false, (1.0, 1.0), false);
            }
            let times = first_hits(&sampler, &mask, i, walkers, kmax, seed);
            let cross = (1..=times.len()).find(|&m| frac(m) >= p);
            let (d, capped) = match cross {
                Some(m) => (times[m - 1], false),
                None => (kmax, true),
            };
            let hits_by = |k: usize| times.partition_point(|&t| t <= k);
            let ci = wilson_interval(hits_by(d), walkers, Z95);
            let mut near = ci.0 <= p && p <= ci.1;
            if d > 1 {
                let before = wilson_interval(hits_by(d - 1), walkers, Z95);
                near |= before.0 <= p && p <= before.1;
            }
            (d, capped, ci, near)
        })
        .collect();
    let field = DiffusionField {
        target,
        p,
        kmax,
        d: rows.iter().map(|r| r.0).collect(),
        capped: rows.iter().map(|r| r.1).collect(),
    };
    Ok(McDiffusionField {
        field,
        walkers,
        seed,
        ci: rows.iter().map(|r| r.2).collect(),
        near_threshold: rows.iter().map(|r| r.3).collect(),
    })
}
