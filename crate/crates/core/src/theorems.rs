//! Vertex-by-vertex evaluation of the eigenvector / diffusion-distance bounds.
//!
//! All three bounds compare `d(i) * rate` against a log-scale right-hand side:
//!
//! * nodal bound: `d_B(i) log(1/|1-lambda|) >= log(|u(i)|/|u|_inf) - log(1/2 + eps)`
//!   with `B = {|u| <= eps}`;
//! * Dirichlet bound: `d_dV(i) log(1/|1-lambda_1|) >= log(2|u(i)|/|u|_inf)` with `u = 0` on `dV`;
//! * potential bound: as the Dirichlet bound with `lambda_1` replaced by `|W|_inf`
//!   for `Lu = Wu`, `u >= 0`.
//!
//! A row holds when `lhs - rhs >= -SLACK_TOL`. Rows whose distance hit the
//! horizon understate `lhs`; if they fail they are inconclusive, not violations.

use std::f64::consts::LN_2;

use serde::Serialize;

use crate::diffusion::{default_kmax, diffusion_distance, DiffusionField};
use crate::error::{Error, Result};
use crate::generators::{CompleteAbsorbingOperator, GenSpec};
use crate::graph::{Graph, TransitionOperator};
use crate::spectral::{absorbing_dominant_eigenpair, laplacian_residual, EigenPair, DEFAULT_MAX_ITERS, DEFAULT_TOL};

pub const SLACK_TOL: f64 = 1e-9;
/// Largest eigen or equation residual accepted as input to a check.
pub const RESIDUAL_GATE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Theorem {
    Thm1,
    Thm2,
    Corollary1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RowStatus {
    Holds,
    /// Right-hand side is `<= 0`, so the row holds for any distance.
    Trivial,
    Violated,
    /// Failed with a capped distance.
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundRow {
    pub vertex: usize,
    pub d: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub holds: bool,
    pub status: RowStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundInputs {
    /// `lambda` for eigenpair bounds, `|W|_inf` for the potential bound.
    pub spectral_value: f64,
    /// `log(1/|1 - lambda|)` or `log(1/(1 - |W|_inf))`.
    pub rate: f64,
    pub eps: Option<f64>,
    pub p: f64,
    pub target: Vec<usize>,
    pub kmax: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundSummary {
    pub min_slack: f64,
    pub argmin: usize,
    /// Holding rows over all rows that are not inconclusive.
    pub fraction_holding: f64,
    pub violations: usize,
    pub inconclusive: usize,
    pub trivial: usize,
    pub capped: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub theorem: Theorem,
    pub inputs: BoundInputs,
    pub rows: Vec<BoundRow>,
    pub summary: BoundSummary,
}

impl BoundReport {
    pub fn all_hold(&self) -> bool {
        self.summary.violations == 0
    }
}

/// How to pick `eps` for the nodal bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EpsChoice {
    Value(f64),
    /// `min_i |u(i)|`, the smallest value with a non-empty sublevel set.
    Auto,
    /// Smallest `eps` whose sublevel set contains an endpoint of every edge
    /// across which `u` changes sign (falls back to `Auto` without sign changes).
    Nodal,
}

/// `{i : |u(i)| <= eps}`.
pub fn sublevel_set(u: &[f64], eps: f64) -> Result<Vec<usize>> {
    if !(eps >= 0.0) {
        return Err(Error::InvalidParameter(format!("eps must be nonnegative, got {eps}")));
    }
    let set: Vec<usize> = (0..u.len()).filter(|&i| u[i].abs() <= eps).collect();
    if set.is_empty() {
        return Err(Error::EmptySublevel(eps));
    }
    Ok(set)
}

pub fn auto_eps(u: &[f64]) -> f64 {
    u.iter().fold(f64::INFINITY, |m, x| m.min(x.abs()))
}

pub fn nodal_eps(g: &Graph, u: &[f64]) -> f64 {
    let mut eps: Option<f64> = None;
    for (i, j, _) in g.edges() {
        if u[i] * u[j] < 0.0 || (u[i] == 0.0) != (u[j] == 0.0) {
            let e = u[i].abs().min(u[j].abs());
            eps = Some(eps.map_or(e, |m| m.max(e)));
        }
    }
    eps.unwrap_or_else(|| auto_eps(u))
}

pub fn resolve_eps(g: &Graph, u: &[f64], choice: EpsChoice) -> f64 {
    match choice {
        EpsChoice::Value(e) => e,
        EpsChoice::Auto => auto_eps(u),
        EpsChoice::Nodal => nodal_eps(g, u),
    }
}

fn sup(u: &[f64]) -> f64 {
    u.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// `-log|mu|`, with `+inf` for `mu = 0`.
fn decay_rate(mu: f64) -> f64 {
    if mu == 0.0 {
        f64::INFINITY
    } else {
        -mu.abs().ln()
    }
}

fn lhs(d: usize, rate: f64) -> f64 {
    if d == 0 {
        0.0
    } else {
        d as f64 * rate
    }
}

fn assemble(theorem: Theorem, inputs: BoundInputs, field: &DiffusionField, rhs: &[f64]) -> BoundReport {
    let mut rows = Vec::with_capacity(rhs.len());
    for (i, &r) in rhs.iter().enumerate() {
        let l = lhs(field.d[i], inputs.rate);
        let slack = l - r;
        let holds = slack >= -SLACK_TOL;
        let status = if r <= 0.0 {
            RowStatus::Trivial
        } else if holds {
            RowStatus::Holds
        } else if field.capped[i] {
            RowStatus::Inconclusive
        } else {
            RowStatus::Violated
        };
        rows.push(BoundRow { vertex: i, d: field.d[i], lhs: l, rhs: r, slack, holds, status });
    }
    let count = |s: RowStatus| rows.iter().filter(|r| r.status == s).count();
    let inconclusive = count(RowStatus::Inconclusive);
    let held = rows.iter().filter(|r| r.holds).count();
    let decided = rows.len() - inconclusive;
    let (argmin, min_slack) = rows
        .iter()
        .map(|r| (r.vertex, r.slack))
        .fold((0, f64::INFINITY), |best, x| if x.1 < best.1 { x } else { best });
    let summary = BoundSummary {
        min_slack,
        argmin,
        fraction_holding: if decided == 0 { 1.0 } else { held as f64 / decided as f64 },
        violations: count(RowStatus::Violated),
        inconclusive,
        trivial: count(RowStatus::Trivial),
        capped: field.capped.iter().filter(|&&c| c).count(),
    };
    BoundReport { theorem, inputs, rows, summary }
}

fn gate_residual(residual: f64) -> Result<()> {
    if residual <= RESIDUAL_GATE {
        Ok(())
    } else {
        Err(Error::NotAnEquationSolution { residual, tol: RESIDUAL_GATE })
    }
}

/// Nodal bound for an eigenpair of `L` with `B = {|u| <= eps}`.
pub fn check_theorem1(g: &Graph, pair: &EigenPair, eps: EpsChoice, kmax: usize) -> Result<BoundReport> {
    g.check_vector(&pair.u)?;
    gate_residual(pair.residual)?;
    if pair.lambda == 0.0 {
        return Err(Error::TrivialEigenvalue);
    }
    let eps = resolve_eps(g, &pair.u, eps);
    let target = sublevel_set(&pair.u, eps)?;
    let field = diffusion_distance(g, &target, 0.5, kmax)?;
    let norm = sup(&pair.u);
    let offset = (0.5 + eps).ln();
    let rhs: Vec<f64> = pair.u.iter().map(|&x| (x.abs() / norm).ln() - offset).collect();
    let inputs = BoundInputs {
        spectral_value: pair.lambda,
        rate: decay_rate(1.0 - pair.lambda),
        eps: Some(eps),
        p: 0.5,
        target: field.target.clone(),
        kmax,
    };
    Ok(assemble(Theorem::Thm1, inputs, &field, &rhs))
}

fn absorbing_set<T: TransitionOperator + ?Sized>(op: &T) -> Vec<usize> {
    (0..op.order()).filter(|&i| op.is_absorbing(i)).collect()
}

fn dirichlet_rhs(u: &[f64]) -> Vec<f64> {
    let norm = sup(u);
    u.iter().map(|&x| (2.0 * x.abs() / norm).ln()).collect()
}

/// Dirichlet bound for an eigenpair vanishing on the absorbing set.
pub fn check_theorem2<T: TransitionOperator + ?Sized>(op: &T, pair: &EigenPair, kmax: usize) -> Result<BoundReport> {
    if pair.u.len() != op.order() {
        return Err(Error::DimensionMismatch { expected: op.order(), got: pair.u.len() });
    }
    if !op.has_absorbing() {
        return Err(Error::NoAbsorbingSet);
    }
    gate_residual(pair.residual)?;
    let boundary = absorbing_set(op);
    if let Some(&b) = boundary.iter().find(|&&b| pair.u[b] != 0.0) {
        return Err(Error::NonzeroOnBoundary(b));
    }
    let field = diffusion_distance(op, &boundary, 0.5, kmax)?;
    let inputs = BoundInputs {
        spectral_value: pair.lambda,
        rate: decay_rate(1.0 - pair.lambda),
        eps: None,
        p: 0.5,
        target: boundary,
        kmax,
    };
    Ok(assemble(Theorem::Thm2, inputs, &field, &dirichlet_rhs(&pair.u)))
}

/// Potential bound for `Lu = Wu`, `u >= 0`, `u = 0` on the absorbing set.
/// `|W|_inf` is taken over interior vertices, where `W` enters the equation.
pub fn check_corollary1<T: TransitionOperator + ?Sized>(op: &T, w: &[f64], u: &[f64], kmax: usize) -> Result<BoundReport> {
    let n = op.order();
    for v in [w, u] {
        if v.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: v.len() });
        }
    }
    if !op.has_absorbing() {
        return Err(Error::NoAbsorbingSet);
    }
    if let Some(i) = u.iter().position(|&x| x < 0.0) {
        return Err(Error::NegativeU(i));
    }
    let boundary = absorbing_set(op);
    if let Some(&b) = boundary.iter().find(|&&b| u[b] != 0.0) {
        return Err(Error::NonzeroOnBoundary(b));
    }
    let mut pu = vec![0.0; n];
    op.apply(u, &mut pu);
    let residual = (0..n)
        .filter(|&i| !op.is_absorbing(i))
        .map(|i| ((u[i] - pu[i]) - w[i] * u[i]).abs())
        .fold(0.0, f64::max);
    gate_residual(residual)?;
    let w_norm = (0..n).filter(|&i| !op.is_absorbing(i)).map(|i| w[i].abs()).fold(0.0, f64::max);
    if w_norm >= 1.0 {
        return Err(Error::PotentialTooLarge(w_norm));
    }
    let field = diffusion_distance(op, &boundary, 0.5, kmax)?;
    let inputs = BoundInputs {
        spectral_value: w_norm,
        rate: decay_rate(1.0 - w_norm),
        eps: None,
        p: 0.5,
        target: boundary,
        kmax,
    };
    Ok(assemble(Theorem::Corollary1, inputs, &field, &dirichlet_rhs(u)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub spec: GenSpec,
    pub vertices: usize,
    pub lambda: f64,
    pub residual: f64,
    pub max_d: usize,
    pub product: f64,
    pub ratio: f64,
}

fn sweep_point<T: TransitionOperator + ?Sized>(spec: &GenSpec, op: &T) -> Result<SweepRow> {
    let n = op.order();
    let pair = absorbing_dominant_eigenpair(op, DEFAULT_TOL, DEFAULT_MAX_ITERS)?;
    let boundary = absorbing_set(op);
    let kmax = default_kmax(n).max(1 << 20);
    let field = diffusion_distance(op, &boundary, 0.5, kmax)?;
    if field.any_capped() {
        return Err(Error::NoConvergence(kmax));
    }
    let max_d = field.max_distance();
    let product = max_d as f64 * decay_rate(1.0 - pair.lambda);
    Ok(SweepRow {
        spec: spec.clone(),
        vertices: n,
        lambda: pair.lambda,
        residual: laplacian_residual(op, &pair.u, pair.lambda),
        max_d,
        product,
        ratio: product / LN_2,
    })
}

/// Sharpness table of `d * log(1/(1 - lambda))` for families whose first
/// Dirichlet eigenvector is constant, so the maximum of `u` is attained on the
/// whole interior.
pub fn sharpness_sweep(specs: &[GenSpec]) -> Result<Vec<SweepRow>> {
    specs
        .iter()
        .map(|spec| match spec {
            GenSpec::CompleteAbsorbing { n } => sweep_point(spec, &CompleteAbsorbingOperator::new(*n)?),
            GenSpec::CyclePlusBoundary { .. } => sweep_point(spec, &spec.build()?),
            other => Err(Error::UnsupportedFamily(other.family_name().into())),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::*;
    use crate::spectral::{absorbing_dominant_eigenpair, first_nontrivial_eigenpair};

    #[test]
    fn sublevel_sets() {
        assert_eq!(sublevel_set(&[-1.0, 0.1, 1.0], 0.2).unwrap(), vec![1]);
        assert_eq!(sublevel_set(&[-1.0, 0.1, 1.0], 1.0).unwrap(), vec![0, 1, 2]);
        assert_eq!(sublevel_set(&[0.5, 1.0], 0.0), Err(Error::EmptySublevel(0.0)));
        assert!(sublevel_set(&[0.5], -1.0).is_err());
    }

    #[test]
    fn complete_absorbing_dirichlet() {
        let g = gen_complete_absorbing(100).unwrap();
        let pair = absorbing_dominant_eigenpair(&g, DEFAULT_TOL, DEFAULT_MAX_ITERS).unwrap();
        let rep = check_theorem2(&g, &pair, 10_000).unwrap();
        let row = &rep.rows[0];
        assert_eq!(row.d, 69);
        assert!((row.lhs - 69.0 * (100.0f64 / 99.0).ln()).abs() < 1e-12);
        assert!((row.rhs - LN_2).abs() < 1e-12);
        // 69 ln(100/99) - ln 2 from an exact-arithmetic oracle
        assert!((row.slack - 3.259933316586139e-4).abs() < 1e-12);
        assert!(rep.all_hold());
        assert_eq!(rep.rows[99].status, RowStatus::Trivial);
    }

    #[test]
    fn half_height_row_is_trivial() {
        let g = gen_complete_absorbing(5).unwrap();
        let pair = EigenPair { lambda: 0.2, u: vec![1.0, 0.5, 1.0, 1.0, 0.0], residual: 0.0, iterations: 0 };
        // not an eigenvector, so build the report directly
        let field = diffusion_distance(&g, &[4], 0.5, 100).unwrap();
        let inputs = BoundInputs { spectral_value: 0.2, rate: 0.2f64.ln().abs(), eps: None, p: 0.5, target: vec![4], kmax: 100 };
        let rep = assemble(Theorem::Thm2, inputs, &field, &dirichlet_rhs(&pair.u));
        assert_eq!(rep.rows[1].rhs, 0.0);
        assert!(rep.rows[1].holds);
    }

    #[test]
    fn corollary_reduces_to_dirichlet() {
        let g = gen_cycle_plus_boundary(12, 0.03).unwrap();
        let pair = absorbing_dominant_eigenpair(&g, DEFAULT_TOL, DEFAULT_MAX_ITERS).unwrap();
        let t2 = check_theorem2(&g, &pair, 10_000).unwrap();
        let mut w = vec![pair.lambda; g.n()];
        w[12] = 0.0;
        let c1 = check_corollary1(&g, &w, &pair.u, 10_000).unwrap();
        for (a, b) in t2.rows.iter().zip(&c1.rows) {
            assert_eq!(a.d, b.d);
            assert!((a.lhs - b.lhs).abs() <= 1e-12);
            assert!(a.rhs == b.rhs);
        }
    }

    #[test]
    fn corollary_errors() {
        let g = gen_complete_absorbing(4).unwrap();
        let w = vec![0.25; 4];
        assert_eq!(check_corollary1(&g, &w, &[1.0, -1.0, 1.0, 0.0], 100), Err(Error::NegativeU(1)));
        assert_eq!(check_corollary1(&g, &w, &[1.0, 1.0, 1.0, 1.0], 100), Err(Error::NonzeroOnBoundary(3)));
        assert!(matches!(
            check_corollary1(&g, &w, &[1.0, 0.5, 1.0, 0.0], 100),
            Err(Error::NotAnEquationSolution { .. })
        ));
        assert!(matches!(
            check_corollary1(&g, &vec![1.0; 4], &[1.0, 1.0, 1.0, 0.0], 100),
            Err(Error::NotAnEquationSolution { .. })
        ));
    }

    #[test]
    fn theorem1_on_target_rows() {
        let g = gen_path(12).unwrap();
        let pair = first_nontrivial_eigenpair(&g, DEFAULT_TOL, DEFAULT_MAX_ITERS).unwrap();
        let rep = check_theorem1(&g, &pair, EpsChoice::Value(0.3), 10_000).unwrap();
        for &b in &rep.inputs.target {
            assert_eq!(rep.rows[b].lhs, 0.0);
            assert!(rep.rows[b].holds);
        }
        assert!(rep.all_hold());
        assert_eq!(check_theorem1(&g, &pair, EpsChoice::Value(0.0), 100).err(), Some(Error::EmptySublevel(0.0)));
    }

    #[test]
    fn theorem1_rejects_zero_eigenvalue() {
        let g = gen_cycle(5).unwrap();
        let pair = EigenPair { lambda: 0.0, u: vec![1.0; 5], residual: 0.0, iterations: 0 };
        assert_eq!(check_theorem1(&g, &pair, EpsChoice::Auto, 10), Err(Error::TrivialEigenvalue));
    }

    #[test]
    fn capped_failures_are_inconclusive() {
        let g = gen_cycle_plus_boundary(6, 0.01).unwrap();
        let pair = absorbing_dominant_eigenpair(&g, DEFAULT_TOL, DEFAULT_MAX_ITERS).unwrap();
        let rep = check_theorem2(&g, &pair, 5).unwrap();
        assert_eq!(rep.summary.violations, 0);
        assert_eq!(rep.summary.inconclusive, 6);
        assert_eq!(rep.summary.fraction_holding, 1.0);
    }

    #[test]
    fn sweep_cycle_half() {
        let rows = sharpness_sweep(&[GenSpec::CyclePlusBoundary { n: 5, eps: 0.5 }]).unwrap();
        assert_eq!(rows[0].max_d, 1);
        assert!((rows[0].ratio - 1.0).abs() < 1e-15);
        assert!(matches!(sharpness_sweep(&[GenSpec::Path { n: 4 }]), Err(Error::UnsupportedFamily(_))));
    }

    #[test]
    fn sweep_complete_hundred() {
        let rows = sharpness_sweep(&[GenSpec::CompleteAbsorbing { n: 100 }]).unwrap();
        assert_eq!(rows[0].max_d, 69);
        assert!((rows[0].ratio - 1.000_470_308_962_946_8).abs() < 1e-12);
    }
}
