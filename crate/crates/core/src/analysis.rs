//! Spectral embedding, sign classification, correlation studies and the
//! preset experiments that tie the pipeline together.

use std::f64::consts::LN_2;
use std::fmt;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::diffusion::{default_kmax, diffusion_distance, mc_diffusion_distance, target_mask};
use crate::error::{Error, Result};
use crate::generators::{gen_knn_point_cloud, gen_path, gen_small_world, sample_dumbbell, GenSpec};
use crate::graph::{Graph, TransitionOperator};
use crate::spectral::{
    absorbing_dominant_eigenpair_checked, first_nontrivial_eigenpair, leading_nontrivial_eigenpairs, EigenPair,
    DEFAULT_MAX_ITERS, DEFAULT_TOL,
};
use crate::theorems::{check_theorem1, check_theorem2, sharpness_sweep, BoundReport, EpsChoice, SweepRow, Theorem};

pub const SCHEMA_VERSION: u32 = 1;
/// Tail mass below which a mean first-hit sum counts as complete.
pub const TAIL_TOL: f64 = 1e-12;
/// Vertex fields are embedded in the JSON report up to this size.
pub const INLINE_FIELD_LIMIT: usize = 256;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Embedding {
    pub dims: usize,
    pub eigenvalues: Vec<f64>,
    /// `coords[i][c]`: coordinate `c` of vertex `i`.
    pub coords: Vec<Vec<f64>>,
}

impl Embedding {
    pub fn column(&self, c: usize) -> Vec<f64> {
        self.coords.iter().map(|row| row[c]).collect()
    }
}

/// First `dims` nontrivial eigenvectors as coordinates, by increasing eigenvalue.
pub fn spectral_embedding(g: &Graph, dims: usize, tol: f64) -> Result<Embedding> {
    if !(1..=3).contains(&dims) {
        return Err(Error::BadDimension(dims));
    }
    if g.has_absorbing() {
        return Err(Error::HasAbsorbingSet);
    }
    let pairs = leading_nontrivial_eigenpairs(g, dims, tol, DEFAULT_MAX_ITERS)?;
    let coords = (0..g.n()).map(|i| pairs.iter().map(|p| p.u[i]).collect()).collect();
    Ok(Embedding { dims, eigenvalues: pairs.iter().map(|p| p.lambda).collect(), coords })
}

pub fn sign_classifier(u: &[f64]) -> Vec<i8> {
    u.iter()
        .map(|&x| {
            if x > 0.0 {
                1
            } else if x < 0.0 {
                -1
            } else {
                0
            }
        })
        .collect()
}

/// Pearson correlation, optionally over a subset of indices.
pub fn correlation(a: &[f64], b: &[f64], restrict: Option<&[usize]>) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch { expected: a.len(), got: b.len() });
    }
    let all: Vec<usize>;
    let idx = match restrict {
        Some(r) => {
            if let Some(&bad) = r.iter().find(|&&i| i >= a.len()) {
                return Err(Error::IndexOutOfRange { id: bad, n: a.len() });
            }
            r
        }
        None => {
            all = (0..a.len()).collect();
            &all
        }
    };
    if idx.len() < 2 {
        return Err(Error::DegenerateInput);
    }
    let m = idx.len() as f64;
    let ma = idx.iter().map(|&i| a[i]).sum::<f64>() / m;
    let mb = idx.iter().map(|&i| b[i]).sum::<f64>() / m;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for &i in idx {
        let (x, y) = (a[i] - ma, b[i] - mb);
        sab += x * y;
        saa += x * x;
        sbb += y * y;
    }
    if saa == 0.0 || sbb == 0.0 {
        return Err(Error::DegenerateInput);
    }
    Ok((sab / (saa.sqrt() * sbb.sqrt())).clamp(-1.0, 1.0))
}

/// Indices whose value is at least the (upper) median.
pub fn upper_half(values: &[f64]) -> Vec<usize> {
    if values.is_empty() {
        return Vec::new();
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let m = sorted[values.len() / 2];
    (0..values.len()).filter(|&i| values[i] >= m).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanFirstHit {
    pub kmax: usize,
    pub mean: Vec<f64>,
    /// Survival mass above [`TAIL_TOL`] remained at the horizon.
    pub truncated: Vec<bool>,
}

/// `E[first hit of B]` as `sum_{k>=0} P(not hit by k)`, truncated at `kmax`.
/// The survival vector is iterated directly so the tail does not stall at
/// rounding level the way `1 - h_k` does.
pub fn mean_first_hit<T: TransitionOperator + ?Sized>(op: &T, target: &[usize], kmax: usize) -> Result<MeanFirstHit> {
    if kmax == 0 {
        return Err(Error::BadHorizon);
    }
    let n = op.order();
    let (_, mask) = target_mask(n, target)?;
    let mut s: Vec<f64> = mask.iter().map(|&b| if b { 0.0 } else { 1.0 }).collect();
    let mut next = vec![0.0; n];
    let mut mean = vec![0.0; n];
    for _ in 0..kmax {
        for i in 0..n {
            mean[i] += s[i];
        }
        op.apply(&s, &mut next);
        for (x, &b) in next.iter_mut().zip(&mask) {
            if b {
                *x = 0.0;
            }
        }
        std::mem::swap(&mut s, &mut next);
        if s.iter().all(|&x| x <= TAIL_TOL * 1e-6) {
            break;
        }
    }
    let truncated = s.iter().map(|&x| x > TAIL_TOL).collect();
    Ok(MeanFirstHit { kmax, mean, truncated })
}

fn argmax_abs(u: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in u.iter().enumerate() {
        if x.abs() > u[best].abs() {
            best = i;
        }
    }
    best
}

// ---------------------------------------------------------------------------
// experiments

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    Fig1,
    SwSparse,
    SwDense,
    Dumbbell,
    KnSharpness,
    Prop1Sweep,
}

impl Preset {
    pub const ALL: [Preset; 6] =
        [Preset::Fig1, Preset::SwSparse, Preset::SwDense, Preset::Dumbbell, Preset::KnSharpness, Preset::Prop1Sweep];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Fig1 => "fig1",
            Preset::SwSparse => "sw-sparse",
            Preset::SwDense => "sw-dense",
            Preset::Dumbbell => "dumbbell",
            Preset::KnSharpness => "kn-sharpness",
            Preset::Prop1Sweep => "prop1-sweep",
        }
    }

    pub fn default_replicates(self) -> usize {
        match self {
            Preset::SwSparse | Preset::SwDense => 20,
            Preset::Dumbbell => 10,
            _ => 1,
        }
    }

    pub fn is_seeded(self) -> bool {
        matches!(self, Preset::SwSparse | Preset::SwDense | Preset::Dumbbell)
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown preset {s:?}")))
    }
}

pub const SW_VERTICES: usize = 128;
pub const SW_BOUNDARY: usize = 8;
pub const SW_SPARSE_EXTRA: f64 = 64.0;
pub const SW_DENSE_EXTRA: f64 = 512.0;
pub const DUMBBELL_POINTS: usize = 1000;
pub const DUMBBELL_K: usize = 10;
pub const KN_SIZES: [usize; 4] = [10, 100, 1000, 10_000];
pub const PROP1_CYCLE: usize = 128;
pub const PROP1_EPS: [f64; 4] = [0.2, 0.05, 0.01, 0.002];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub preset: Preset,
    /// Replicate `r` uses seed `seed + r`.
    pub seed: u64,
    pub replicates: usize,
    /// Optional Monte Carlo cross-check of the distance field.
    pub walkers: Option<usize>,
    pub tol: f64,
}

impl ExperimentConfig {
    pub fn new(preset: Preset) -> Self {
        Self { preset, seed: 0, replicates: preset.default_replicates(), walkers: None, tol: DEFAULT_TOL }
    }

    pub fn seeds(&self) -> Vec<u64> {
        (0..self.replicates as u64).map(|r| self.seed.wrapping_add(r)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GraphSummary {
    pub spec: GenSpec,
    pub n: usize,
    pub nnz: usize,
    pub absorbing: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub extra_edges: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenSummary {
    pub lambda: f64,
    pub residual: f64,
    pub iterations: usize,
    pub argmax: usize,
    /// `log(1/|1 - lambda|)`.
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiffusionSummary {
    pub target: Vec<usize>,
    pub p: f64,
    pub kmax: usize,
    pub max_d: usize,
    pub capped: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d_at_argmax: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundDigest {
    pub theorem: Theorem,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    pub min_slack: f64,
    pub argmin: usize,
    pub fraction_holding: f64,
    pub violations: usize,
    pub inconclusive: usize,
    /// Smallest distance the bound allows at the eigenvector maximum.
    pub predicted_min_d_at_argmax: f64,
    pub holds_at_argmax: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationSummary {
    /// `r(|u|, d)` over all vertices; absent when degenerate.
    pub global: Option<f64>,
    /// Same, over vertices with `d` at least its median.
    pub upper_half: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionSummary {
    /// `log 2 / log(1/|1 - lambda|)`.
    pub threshold: f64,
    pub size: usize,
    pub contains_argmax: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MedianMeanSummary {
    /// `max_i (d(i) - mean_first_hit(i))` over vertices outside the target.
    pub max_excess: f64,
    pub truncated: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonteCarloSummary {
    pub walkers: usize,
    pub seed: u64,
    pub agree: usize,
    pub near_threshold: usize,
    /// Disagreements at vertices not flagged as near the threshold.
    pub unexplained: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Failure {
    pub stage: String,
    pub error: String,
}

/// One row of the per-vertex CSV.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VertexRow {
    pub replicate: usize,
    pub vertex: usize,
    pub x: Option<f64>,
    pub y: Option<f64>,
    pub u: Option<f64>,
    pub d: Option<usize>,
    pub capped: Option<bool>,
    pub mean_hit: Option<f64>,
    pub in_region: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InstanceReport {
    pub replicate: usize,
    pub seed: Option<u64>,
    pub graph: Option<GraphSummary>,
    pub eigen: Option<EigenSummary>,
    pub diffusion: Option<DiffusionSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub distances: Option<Vec<usize>>,
    pub bound: Option<BoundDigest>,
    pub correlation: Option<CorrelationSummary>,
    pub region: Option<RegionSummary>,
    pub median_vs_mean: Option<MedianMeanSummary>,
    pub monte_carlo: Option<MonteCarloSummary>,
    pub failure: Option<Failure>,
    #[serde(skip)]
    pub vertices: Vec<VertexRow>,
    #[serde(skip)]
    stage: &'static str,
}

impl InstanceReport {
    fn new(replicate: usize, seed: Option<u64>) -> Self {
        Self {
            replicate,
            seed,
            graph: None,
            eigen: None,
            diffusion: None,
            distances: None,
            bound: None,
            correlation: None,
            region: None,
            median_vs_mean: None,
            monte_carlo: None,
            failure: None,
            vertices: Vec::new(),
            stage: "generate",
        }
    }
}

/// Flat sweep row for tables.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepEntry {
    pub family: String,
    pub vertices: usize,
    /// `n` for complete graphs, `eps` for the boundary cycle.
    pub parameter: f64,
    pub lambda: f64,
    pub residual: f64,
    pub max_d: usize,
    pub product: f64,
    pub ratio: f64,
}

impl From<&SweepRow> for SweepEntry {
    fn from(r: &SweepRow) -> Self {
        let parameter = match r.spec {
            GenSpec::CompleteAbsorbing { n } => n as f64,
            GenSpec::CyclePlusBoundary { eps, .. } => eps,
            _ => f64::NAN,
        };
        Self {
            family: r.spec.family_name().to_string(),
            vertices: r.vertices,
            parameter,
            lambda: r.lambda,
            residual: r.residual,
            max_d: r.max_d,
            product: r.product,
            ratio: r.ratio,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSummary {
    pub min_ratio: f64,
    pub final_ratio: f64,
    pub decreasing: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Aggregate {
    pub replicates: usize,
    pub failed: usize,
    pub correlation_at_least_090: usize,
    pub bound_holds_at_argmax: usize,
    pub argmax_in_region: usize,
    pub total_violations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Runtime {
    pub elapsed_ms: f64,
    pub threads: usize,
    pub finished_unix: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub schema: u32,
    pub config: ExperimentConfig,
    pub instances: Vec<InstanceReport>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub sweep: Vec<SweepEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep_summary: Option<SweepSummary>,
    pub aggregate: Aggregate,
    pub failures: Vec<Failure>,
    /// Wall-clock data; not covered by determinism guarantees.
    pub runtime: Runtime,
}

impl ExperimentReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// The JSON document without the `runtime` block.
    pub fn deterministic_json(&self) -> Result<String> {
        let mut v = serde_json::to_value(self)?;
        if let Some(obj) = v.as_object_mut() {
            obj.remove("runtime");
        }
        Ok(serde_json::to_string_pretty(&v)?)
    }

    /// Writes `<preset>.json`, `<preset>_vertices.csv` and, for sweeps,
    /// `<preset>_sweep.csv` into `dir`.
    pub fn write_outputs(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let stem = self.config.preset.name();
        let json = dir.join(format!("{stem}.json"));
        fs::write(&json, self.to_json()?)?;
        let mut out = vec![json];
        let vertices = dir.join(format!("{stem}_vertices.csv"));
        write_serialized(&vertices, self.instances.iter().flat_map(|i| i.vertices.iter()))?;
        out.push(vertices);
        if !self.sweep.is_empty() {
            let sweep = dir.join(format!("{stem}_sweep.csv"));
            write_serialized(&sweep, self.sweep.iter())?;
            out.push(sweep);
        }
        Ok(out)
    }
}

fn write_serialized<'a, T: Serialize + 'a>(path: &Path, rows: impl Iterator<Item = &'a T>) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
    for r in rows {
        wtr.serialize(r).map_err(|e| Error::Io(e.to_string()))?;
    }
    wtr.flush()?;
    Ok(())
}

fn summarize_graph(spec: GenSpec, g: &Graph, extra_edges: Option<usize>) -> GraphSummary {
    GraphSummary { spec, n: g.n(), nnz: g.nnz(), absorbing: g.absorbing().to_vec(), extra_edges }
}

fn summarize_eigen(pair: &EigenPair) -> EigenSummary {
    let mu = (1.0 - pair.lambda).abs();
    EigenSummary {
        lambda: pair.lambda,
        residual: pair.residual,
        iterations: pair.iterations,
        argmax: argmax_abs(&pair.u),
        rate: if mu == 0.0 { f64::INFINITY } else { -mu.ln() },
    }
}

fn correlate(u: &[f64], d: &[f64]) -> CorrelationSummary {
    let abs_u: Vec<f64> = u.iter().map(|x| x.abs()).collect();
    let upper = upper_half(d);
    CorrelationSummary {
        global: correlation(&abs_u, d, None).ok(),
        upper_half: correlation(&abs_u, d, Some(&upper)).ok(),
    }
}

fn digest(rep: &BoundReport, argmax: usize) -> BoundDigest {
    let row = &rep.rows[argmax];
    BoundDigest {
        theorem: rep.theorem,
        eps: rep.inputs.eps,
        min_slack: rep.summary.min_slack,
        argmin: rep.summary.argmin,
        fraction_holding: rep.summary.fraction_holding,
        violations: rep.summary.violations,
        inconclusive: rep.summary.inconclusive,
        predicted_min_d_at_argmax: row.rhs / rep.inputs.rate,
        holds_at_argmax: row.holds,
    }
}

fn diffusion_from_report(rep: &BoundReport, argmax: usize) -> DiffusionSummary {
    DiffusionSummary {
        target: rep.inputs.target.clone(),
        p: rep.inputs.p,
        kmax: rep.inputs.kmax,
        max_d: rep.rows.iter().map(|r| r.d).max().unwrap_or(0),
        capped: rep.summary.capped,
        d_at_argmax: Some(rep.rows[argmax].d),
    }
}

fn median_vs_mean(d: &[usize], hit: &crate::analysis::MeanFirstHit, target: &[usize]) -> MedianMeanSummary {
    let max_excess = (0..d.len())
        .filter(|i| !target.contains(i))
        .map(|i| d[i] as f64 - hit.mean[i])
        .fold(f64::NEG_INFINITY, f64::max);
    MedianMeanSummary { max_excess, truncated: hit.truncated.iter().filter(|&&t| t).count() }
}

fn monte_carlo(g: &Graph, target: &[usize], d: &[usize], walkers: usize, seed: u64, kmax: usize) -> Result<MonteCarloSummary> {
    let mc = mc_diffusion_distance(g, target, 0.5, walkers, kmax, seed)?;
    let mut agree = 0;
    let mut unexplained = 0;
    for i in 0..d.len() {
        if mc.field.d[i] == d[i] {
            agree += 1;
        } else if !mc.near_threshold[i] {
            unexplained += 1;
        }
    }
    Ok(MonteCarloSummary {
        walkers,
        seed,
        agree,
        near_threshold: mc.near_threshold.iter().filter(|&&x| x).count(),
        unexplained,
    })
}

fn run_fig1(cfg: &ExperimentConfig, inst: &mut InstanceReport) -> Result<()> {
    let g = gen_path(10)?;
    inst.graph = Some(summarize_graph(GenSpec::Path { n: 10 }, &g, None));
    inst.stage = "dist";
    let target = [0, 9];
    let kmax = default_kmax(g.n());
    let field = diffusion_distance(&g, &target, 0.5, kmax)?;
    let hit = mean_first_hit(&g, &target, kmax)?;
    inst.diffusion = Some(DiffusionSummary {
        target: field.target.clone(),
        p: 0.5,
        kmax,
        max_d: field.max_distance(),
        capped: field.capped.iter().filter(|&&c| c).count(),
        d_at_argmax: None,
    });
    inst.median_vs_mean = Some(median_vs_mean(&field.d, &hit, &field.target));
    if let Some(w) = cfg.walkers {
        inst.stage = "monte_carlo";
        inst.monte_carlo = Some(monte_carlo(&g, &target, &field.d, w, cfg.seed, kmax)?);
    }
    inst.vertices = (0..g.n())
        .map(|i| VertexRow {
            replicate: inst.replicate,
            vertex: i,
            x: None,
            y: None,
            u: None,
            d: Some(field.d[i]),
            capped: Some(field.capped[i]),
            mean_hit: Some(hit.mean[i]),
            in_region: None,
        })
        .collect();
    inst.distances = Some(field.d);
    Ok(())
}

fn run_small_world(cfg: &ExperimentConfig, extra: f64, seed: u64, inst: &mut InstanceReport) -> Result<()> {
    let sw = gen_small_world(SW_VERTICES, SW_BOUNDARY, extra, seed)?;
    let g = sw.graph;
    let spec = GenSpec::SmallWorldRing { n: SW_VERTICES, n_boundary: SW_BOUNDARY, expected_extra_edges: extra, seed };
    inst.graph = Some(summarize_graph(spec, &g, Some(sw.chords.len())));
    inst.stage = "eig";
    let pair = absorbing_dominant_eigenpair_checked(&g, cfg.tol, DEFAULT_MAX_ITERS)?;
    let eig = summarize_eigen(&pair);
    inst.stage = "check";
    let kmax = default_kmax(g.n());
    let rep = check_theorem2(&g, &pair, kmax)?;
    let d: Vec<usize> = rep.rows.iter().map(|r| r.d).collect();
    let df: Vec<f64> = d.iter().map(|&x| x as f64).collect();
    inst.diffusion = Some(diffusion_from_report(&rep, eig.argmax));
    inst.bound = Some(digest(&rep, eig.argmax));
    inst.correlation = Some(correlate(&pair.u, &df));
    inst.stage = "mean_hit";
    let hit = mean_first_hit(&g, g.absorbing(), kmax)?;
    inst.median_vs_mean = Some(median_vs_mean(&d, &hit, g.absorbing()));
    if let Some(w) = cfg.walkers {
        inst.stage = "monte_carlo";
        inst.monte_carlo = Some(monte_carlo(&g, g.absorbing(), &d, w, seed, kmax)?);
    }
    inst.vertices = (0..g.n())
        .map(|i| VertexRow {
            replicate: inst.replicate,
            vertex: i,
            x: None,
            y: None,
            u: Some(pair.u[i]),
            d: Some(d[i]),
            capped: Some(rep.rows[i].status == crate::theorems::RowStatus::Inconclusive),
            mean_hit: Some(hit.mean[i]),
            in_region: None,
        })
        .collect();
    inst.eigen = Some(eig);
    inst.distances = Some(d);
    Ok(())
}

fn run_dumbbell(cfg: &ExperimentConfig, seed: u64, inst: &mut InstanceReport) -> Result<()> {
    let points = sample_dumbbell(DUMBBELL_POINTS, seed);
    let g = gen_knn_point_cloud(&points, DUMBBELL_K)?;
    let spec = GenSpec::KnnDumbbell { points: DUMBBELL_POINTS, k: DUMBBELL_K, seed };
    inst.graph = Some(summarize_graph(spec, &g, None));
    inst.stage = "eig";
    let pair = first_nontrivial_eigenpair(&g, cfg.tol, DEFAULT_MAX_ITERS)?;
    let eig = summarize_eigen(&pair);
    inst.stage = "check";
    let kmax = default_kmax(g.n());
    let rep = check_theorem1(&g, &pair, EpsChoice::Nodal, kmax)?;
    let d: Vec<usize> = rep.rows.iter().map(|r| r.d).collect();
    let df: Vec<f64> = d.iter().map(|&x| x as f64).collect();
    let threshold = LN_2 / eig.rate;
    let in_region: Vec<bool> = df.iter().map(|&x| x >= threshold).collect();
    inst.region = Some(RegionSummary {
        threshold,
        size: in_region.iter().filter(|&&b| b).count(),
        contains_argmax: in_region[eig.argmax],
    });
    inst.diffusion = Some(diffusion_from_report(&rep, eig.argmax));
    inst.bound = Some(digest(&rep, eig.argmax));
    inst.correlation = Some(correlate(&pair.u, &df));
    inst.vertices = (0..g.n())
        .map(|i| VertexRow {
            replicate: inst.replicate,
            vertex: i,
            x: Some(points[i][0]),
            y: Some(points[i][1]),
            u: Some(pair.u[i]),
            d: Some(d[i]),
            capped: Some(rep.rows[i].status == crate::theorems::RowStatus::Inconclusive),
            mean_hit: None,
            in_region: Some(in_region[i]),
        })
        .collect();
    inst.eigen = Some(eig);
    Ok(())
}

fn run_instance(cfg: &ExperimentConfig, replicate: usize, seed: Option<u64>) -> InstanceReport {
    let mut inst = InstanceReport::new(replicate, seed);
    let s = seed.unwrap_or(cfg.seed);
    let outcome = match cfg.preset {
        Preset::Fig1 => run_fig1(cfg, &mut inst),
        Preset::SwSparse => run_small_world(cfg, SW_SPARSE_EXTRA, s, &mut inst),
        Preset::SwDense => run_small_world(cfg, SW_DENSE_EXTRA, s, &mut inst),
        Preset::Dumbbell => run_dumbbell(cfg, s, &mut inst),
        Preset::KnSharpness | Preset::Prop1Sweep => Ok(()),
    };
    if let Err(e) = outcome {
        inst.failure = Some(Failure { stage: inst.stage.to_string(), error: e.to_string() });
    }
    if inst.distances.as_ref().is_some_and(|d| d.len() > INLINE_FIELD_LIMIT) {
        inst.distances = None;
    }
    inst
}

fn sweep_specs(preset: Preset) -> Vec<GenSpec> {
    match preset {
        Preset::KnSharpness => KN_SIZES.iter().map(|&n| GenSpec::CompleteAbsorbing { n }).collect(),
        Preset::Prop1Sweep => PROP1_EPS.iter().map(|&eps| GenSpec::CyclePlusBoundary { n: PROP1_CYCLE, eps }).collect(),
        _ => Vec::new(),
    }
}

/// Runs a preset end to end. Stage errors are recorded per instance and do
/// not abort the remaining replicates.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    if cfg.replicates == 0 {
        return Err(Error::InvalidParameter("replicates must be positive".into()));
    }
    if !(cfg.tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {}", cfg.tol)));
    }
    let started = Instant::now();
    let mut instances = Vec::new();
    let mut failures = Vec::new();
    let mut sweep = Vec::new();
    let mut sweep_summary = None;
    if cfg.preset.is_seeded() {
        for (r, s) in cfg.seeds().into_iter().enumerate() {
            instances.push(run_instance(cfg, r, Some(s)));
        }
    } else if matches!(cfg.preset, Preset::Fig1) {
        instances.push(run_instance(cfg, 0, None));
    } else {
        match sharpness_sweep(&sweep_specs(cfg.preset)) {
            Ok(rows) => {
                sweep = rows.iter().map(SweepEntry::from).collect::<Vec<_>>();
                let ratios: Vec<f64> = sweep.iter().map(|r| r.ratio).collect();
                sweep_summary = Some(SweepSummary {
                    min_ratio: ratios.iter().copied().fold(f64::INFINITY, f64::min),
                    final_ratio: *ratios.last().unwrap_or(&f64::NAN),
                    decreasing: ratios.windows(2).all(|w| w[1] < w[0]),
                });
            }
            Err(e) => failures.push(Failure { stage: "sweep".into(), error: e.to_string() }),
        }
    }
    failures.extend(instances.iter().filter_map(|i| i.failure.clone()));
    let count = |f: &dyn Fn(&InstanceReport) -> bool| instances.iter().filter(|i| f(i)).count();
    let aggregate = Aggregate {
        replicates: instances.len(),
        failed: count(&|i| i.failure.is_some()),
        correlation_at_least_090: count(&|i| {
            i.correlation.as_ref().and_then(|c| c.global).is_some_and(|r| r >= 0.9)
        }),
        bound_holds_at_argmax: count(&|i| i.bound.as_ref().is_some_and(|b| b.holds_at_argmax)),
        argmax_in_region: count(&|i| i.region.as_ref().is_some_and(|r| r.contains_argmax)),
        total_violations: instances.iter().filter_map(|i| i.bound.as_ref()).map(|b| b.violations).sum(),
    };
    let runtime = Runtime {
        elapsed_ms: started.elapsed().as_secs_f64() * 1e3,
        threads: rayon::current_num_threads(),
        finished_unix: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
    };
    Ok(ExperimentReport {
        schema: SCHEMA_VERSION,
        config: cfg.clone(),
        instances,
        sweep,
        sweep_summary,
        aggregate,
        failures,
        runtime,
    })
}
