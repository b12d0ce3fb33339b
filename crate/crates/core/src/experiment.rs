//! Monte Carlo suites and replay experiments. Each returns a serializable
//! report with the measured statistics and a verdict.
//!
//! Trials are split into seeded chunks, so reports are identical whichever
//! [`Executor`] runs them.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::genmodels::{gen_communities, DegreeDistribution, GeneratedGraph};
use crate::graphstream::{CommunitySnapshot, Component, DcConfig, Edge, EdgeStreamState, SeriesPoint, StreamOutput};
use crate::ingest::{tweet_to_edges, FilterConfig, SynthTweets};
use crate::olap::{required_sample_size, DimensionSpec, Tuple};
use crate::reservoir::Reservoir;
use crate::rng::RngSeed;

pub const NAMES: &[&str] = &[
    "lemma1",
    "theorem1",
    "theorem2",
    "bookkeeping",
    "split-reservoir",
    "stability",
    "integrate-planted",
];

fn chunks(total: usize, parts: usize) -> Vec<usize> {
    let parts = parts.clamp(1, total.max(1));
    (0..parts)
        .map(|i| total / parts + usize::from(i < total % parts))
        .collect()
}

// ---------------------------------------------------------------- lemma 1

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Lemma1Params {
    pub items: usize,
    pub k: usize,
    pub trials: usize,
    /// Allowed deviation in binomial standard deviations.
    pub z_max: f64,
}

impl Default for Lemma1Params {
    fn default() -> Self {
        Lemma1Params {
            items: 100,
            k: 10,
            trials: 100_000,
            z_max: 4.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Lemma1Report {
    pub params: Lemma1Params,
    pub measures: Vec<f64>,
    pub expected: Vec<f64>,
    pub empirical: Vec<f64>,
    pub max_abs_deviation: f64,
    pub max_z: f64,
    pub passed: bool,
}

/// Measures of the test stream: the first `k` share measure 10 so that no
/// inclusion probability is clamped, the rest are uniform in `[1, 10]`.
pub fn lemma1_stream(items: usize, k: usize, seed: RngSeed) -> Vec<f64> {
    let mut rng = seed.rng();
    (0..items)
        .map(|i| if i < k { 10.0 } else { rng.random_range(1.0..=10.0) })
        .collect()
}

pub fn lemma1(params: &Lemma1Params, seed: RngSeed, exec: Executor) -> Result<Lemma1Report> {
    if params.items < params.k || params.k == 0 {
        return Err(Error::domain("items", "need at least k > 0 items"));
    }
    let measures = lemma1_stream(params.items, params.k, seed.derive(0));
    let total: f64 = measures.iter().sum();
    let expected: Vec<f64> = measures
        .iter()
        .map(|t| (params.k as f64 * t / total).min(1.0))
        .collect();

    let parts = chunks(params.trials, 64);
    let counts = exec.map(parts.len(), |c| -> Result<Vec<u64>> {
        let mut counts = vec![0u64; measures.len()];
        let root = seed.derive(1).derive(c as u64);
        for trial in 0..parts[c] {
            let mut r = Reservoir::new(params.k, root.derive(trial as u64))?;
            for (i, &m) in measures.iter().enumerate() {
                r.offer_weighted(i, m)?;
            }
            for &i in r.payloads() {
                counts[i] += 1;
            }
        }
        Ok(counts)
    });
    let mut hits = vec![0u64; measures.len()];
    for c in counts {
        for (h, x) in hits.iter_mut().zip(c?) {
            *h += x;
        }
    }
    let n = params.trials as f64;
    let empirical: Vec<f64> = hits.iter().map(|&h| h as f64 / n).collect();
    let mut max_abs_deviation = 0.0f64;
    let mut max_z = 0.0f64;
    for (&p, &q) in expected.iter().zip(&empirical) {
        let dev = (q - p).abs();
        max_abs_deviation = max_abs_deviation.max(dev);
        let sigma = (p * (1.0 - p) / n).sqrt();
        let z = if sigma > 0.0 {
            dev / sigma
        } else if dev == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        max_z = max_z.max(z);
    }
    Ok(Lemma1Report {
        params: params.clone(),
        measures,
        expected,
        empirical,
        max_abs_deviation,
        max_z,
        passed: max_z <= params.z_max,
    })
}

// ---------------------------------------------------------------- theorem 1

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Theorem1Params {
    pub epsilon: f64,
    pub delta: f64,
    pub tuples: usize,
    pub runs: usize,
    /// Share of tuples carrying the first value.
    pub first_share: f64,
    /// Allowance over `delta` for the failure fraction.
    pub margin: f64,
    /// Allowed gap between the mean estimate and the exact density.
    pub bias_tolerance: f64,
}

impl Default for Theorem1Params {
    fn default() -> Self {
        Theorem1Params {
            epsilon: 0.1,
            delta: 0.05,
            tuples: 10_000,
            runs: 1_000,
            first_share: 0.3,
            margin: 0.028,
            bias_tolerance: 0.01,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Theorem1Report {
    pub params: Theorem1Params,
    pub k: usize,
    pub exact: Vec<f64>,
    pub mean_estimate: Vec<f64>,
    pub failure_fraction: f64,
    pub max_l1_error: f64,
    pub passed: bool,
}

/// Two-valued stream; the first `k` tuples have measure 10, the rest integer
/// measures in `1..=10`.
pub fn theorem1_stream(tuples: usize, k: usize, first_share: f64, seed: RngSeed) -> Vec<Tuple> {
    let mut rng = seed.rng();
    (0..tuples)
        .map(|i| {
            let v = if rng.random_bool(first_share) { "a" } else { "b" };
            let m = if i < k { 10.0 } else { rng.random_range(1..=10) as f64 };
            Tuple::new([("C", v)], m)
        })
        .collect()
}

pub fn theorem1(params: &Theorem1Params, seed: RngSeed, exec: Executor) -> Result<Theorem1Report> {
    let dim = DimensionSpec::new("C", ["a", "b"])?;
    let k = required_sample_size(dim.cardinality(), params.epsilon, params.delta)?;
    let stream = theorem1_stream(params.tuples, k, params.first_share, seed.derive(0));
    let exact = crate::olap::exact_density(stream.iter().cloned(), &dim)?;
    let runs = exec.map(params.runs, |r| {
        crate::olap::estimate_density(stream.iter().cloned(), &dim, k, seed.derive(1).derive(r as u64))
    });
    let mut sums = vec![0.0; dim.cardinality()];
    let mut failures = 0usize;
    let mut max_l1_error = 0.0f64;
    for est in runs {
        let est = est?;
        let err = est.l1_distance(&exact);
        max_l1_error = max_l1_error.max(err);
        if err > params.epsilon {
            failures += 1;
        }
        for (s, d) in sums.iter_mut().zip(&est.densities) {
            *s += d;
        }
    }
    let mean_estimate: Vec<f64> = sums.iter().map(|s| s / params.runs as f64).collect();
    let failure_fraction = failures as f64 / params.runs as f64;
    let unbiased = mean_estimate
        .iter()
        .zip(&exact.densities)
        .all(|(m, e)| (m - e).abs() <= params.bias_tolerance);
    Ok(Theorem1Report {
        params: params.clone(),
        k,
        exact: exact.densities,
        mean_estimate,
        failure_fraction,
        max_l1_error,
        passed: unbiased && failure_fraction <= params.delta + params.margin,
    })
}

// ---------------------------------------------------------------- theorem 2

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Theorem2Params {
    pub seeds: usize,
    pub edges_per_community: u64,
    pub communities: usize,
    pub bridge_fraction: f64,
    pub dc: DcConfig,
    /// Required separation from the null, in standard deviations.
    pub z_min: f64,
}

impl Default for Theorem2Params {
    fn default() -> Self {
        Theorem2Params {
            seeds: 50,
            edges_per_community: 10_000,
            communities: 2,
            bridge_fraction: 0.01,
            dc: DcConfig::default(),
            z_min: 3.0,
        }
    }
}

/// One planted-model run. Overlaps are, per planted set, the largest number
/// of its nodes inside a single stored component.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlantedRun {
    pub seed: u64,
    pub edges: usize,
    pub nodes: usize,
    pub planted_sizes: Vec<usize>,
    /// Against global-reservoir components.
    pub overlap_global: Vec<usize>,
    /// Against every stored component, snapshots included.
    pub overlap_stored: Vec<usize>,
    /// Same, for the label-permuted null.
    pub null_overlap_global: Vec<usize>,
    pub null_overlap_stored: Vec<usize>,
    pub global_component_nodes: usize,
    pub stored_component_nodes: usize,
    pub snapshots: usize,
    pub max_retained: usize,
    pub retained_violations: usize,
}

/// Fraction of successes with an Agresti-smoothed binomial standard error.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Rate {
    pub successes: usize,
    pub trials: usize,
    pub rate: f64,
}

impl Rate {
    pub fn new(successes: usize, trials: usize) -> Self {
        Rate {
            successes,
            trials,
            rate: if trials == 0 { 0.0 } else { successes as f64 / trials as f64 },
        }
    }

    fn smoothed_variance(&self) -> f64 {
        let n = self.trials as f64 + 2.0;
        let p = (self.successes as f64 + 1.0) / n;
        p * (1.0 - p) / n
    }

    /// `(self − other) / σ` with `σ² = p̃₁(1−p̃₁)/ñ₁ + p̃₂(1−p̃₂)/ñ₂`.
    pub fn z_over(&self, other: &Rate) -> f64 {
        (self.rate - other.rate) / (self.smoothed_variance() + other.smoothed_variance()).sqrt()
    }
}

/// Detection against the null for one reading of "intersected".
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DetectionStat {
    /// Components considered: `global` or `stored`.
    pub components: String,
    /// Nodes a component must share with a planted set.
    pub min_overlap: usize,
    pub detection: Rate,
    pub null: Rate,
    pub z: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Theorem2Report {
    pub params: Theorem2Params,
    pub runs: Vec<PlantedRun>,
    /// Verdict statistic: every planted set shares at least `h` nodes with one
    /// global-reservoir component.
    pub primary: DetectionStat,
    /// The other readings, for reference.
    pub secondary: Vec<DetectionStat>,
    pub max_retained: usize,
    pub retained_violations: usize,
    pub passed: bool,
}

/// Streams `edges` through a fresh state, checking `retained ≤ 2k` after every edge.
pub fn run_checked(edges: &[Edge], config: DcConfig, seed: RngSeed) -> Result<(StreamOutput, usize)> {
    let bound = 2 * config.k;
    let mut state = EdgeStreamState::new(config, seed)?;
    let mut violations = 0;
    for e in edges {
        state.ingest(e)?;
        if state.retained_edge_count() > bound {
            violations += 1;
        }
    }
    Ok((state.finalize(), violations))
}

fn max_overlaps(planted: &[Vec<u32>], comps: &[&Component]) -> Vec<usize> {
    planted
        .iter()
        .map(|s| {
            let set: HashSet<String> = s.iter().map(u32::to_string).collect();
            comps
                .iter()
                .map(|c| c.nodes.iter().filter(|n| set.contains(*n)).count())
                .max()
                .unwrap_or(0)
        })
        .collect()
}

fn union_size<'a>(comps: impl Iterator<Item = &'a Component>) -> usize {
    comps.flat_map(|c| c.nodes.iter()).collect::<HashSet<_>>().len()
}

/// Planted graph of one theorem-2 seed and its random-order edge stream
/// (one edge per second).
pub fn planted_stream(params: &Theorem2Params, seed: RngSeed) -> Result<(GeneratedGraph, Vec<Edge>)> {
    let delta = DegreeDistribution::power_law(params.edges_per_community)?;
    let g = gen_communities(&delta, params.communities, params.bridge_fraction, &mut seed.substream(0))?;
    let stream = g.to_stream(&mut seed.substream(1), 0, g.edges.len() as i64);
    Ok((g, stream))
}

pub fn planted_run(params: &Theorem2Params, seed: RngSeed) -> Result<PlantedRun> {
    let (g, stream) = planted_stream(params, seed)?;
    let (out, retained_violations) = run_checked(&stream, params.dc, seed.derive(2))?;

    // Null: planted sets of the same sizes under a random relabelling of the nodes.
    let mut perm: Vec<u32> = (0..g.n as u32).collect();
    perm.shuffle(&mut seed.substream(3));
    let null: Vec<Vec<u32>> = g
        .planted
        .iter()
        .map(|s| s.iter().map(|&v| perm[v as usize]).collect())
        .collect();

    let global: Vec<&Component> = out.global_components.iter().collect();
    let stored: Vec<&Component> = out.stored_components().collect();
    Ok(PlantedRun {
        seed: seed.0,
        edges: g.edges.len(),
        nodes: g.n,
        planted_sizes: g.planted.iter().map(Vec::len).collect(),
        overlap_global: max_overlaps(&g.planted, &global),
        overlap_stored: max_overlaps(&g.planted, &stored),
        null_overlap_global: max_overlaps(&null, &global),
        null_overlap_stored: max_overlaps(&null, &stored),
        global_component_nodes: union_size(global.iter().copied()),
        stored_component_nodes: union_size(stored.iter().copied()),
        snapshots: out.snapshots.len(),
        max_retained: out.stats.max_retained,
        retained_violations,
    })
}

fn detection_stat(runs: &[PlantedRun], stored: bool, min_overlap: usize) -> DetectionStat {
    let all = |v: &[usize]| v.iter().all(|&o| o >= min_overlap);
    let count = |f: &dyn Fn(&PlantedRun) -> &[usize]| runs.iter().filter(|r| all(f(r))).count();
    let (detection, null) = if stored {
        (count(&|r| &r.overlap_stored), count(&|r| &r.null_overlap_stored))
    } else {
        (count(&|r| &r.overlap_global), count(&|r| &r.null_overlap_global))
    };
    let detection = Rate::new(detection, runs.len());
    let null = Rate::new(null, runs.len());
    DetectionStat {
        components: if stored { "stored" } else { "global" }.into(),
        min_overlap,
        z: detection.z_over(&null),
        detection,
        null,
    }
}

pub fn theorem2(params: &Theorem2Params, seed: RngSeed, exec: Executor) -> Result<Theorem2Report> {
    params.dc.validate()?;
    let runs = exec
        .map(params.seeds, |i| planted_run(params, seed.derive(i as u64)))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let h = params.dc.h;
    let primary = detection_stat(&runs, false, h);
    let secondary = vec![
        detection_stat(&runs, true, h),
        detection_stat(&runs, false, 1),
        detection_stat(&runs, true, 1),
    ];
    let max_retained = runs.iter().map(|r| r.max_retained).max().unwrap_or(0);
    let retained_violations = runs.iter().map(|r| r.retained_violations).sum();
    Ok(Theorem2Report {
        passed: primary.z >= params.z_min && retained_violations == 0,
        params: params.clone(),
        runs,
        primary,
        secondary,
        max_retained,
        retained_violations,
    })
}

// ---------------------------------------------------------------- bookkeeping

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BookkeepingParams {
    pub synth: SynthTweets,
    pub excluded_tag: String,
    pub dc: DcConfig,
    pub expected_edges: usize,
    pub edge_tolerance: usize,
    pub expected_snapshots: usize,
}

impl Default for BookkeepingParams {
    fn default() -> Self {
        BookkeepingParams {
            synth: SynthTweets::default(),
            excluded_tag: "#onpc".into(),
            dc: DcConfig::default(),
            expected_edges: 15_000,
            edge_tolerance: 500,
            expected_snapshots: 16,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BookkeepingReport {
    pub params: BookkeepingParams,
    pub records: usize,
    pub potential_edges: usize,
    pub edges: usize,
    pub nodes: usize,
    pub snapshots: usize,
    pub mean_components: f64,
    pub passed: bool,
}

pub fn bookkeeping_edges(params: &BookkeepingParams, seed: RngSeed) -> (usize, Vec<Edge>) {
    let records = params.synth.generate(seed.derive(0));
    let filter = FilterConfig::excluding([&params.excluded_tag]);
    let potential = records.iter().map(|r| r.tags.len()).sum();
    let edges = records.iter().flat_map(|r| tweet_to_edges(r, &filter)).collect();
    (potential, edges)
}

pub fn bookkeeping(params: &BookkeepingParams, seed: RngSeed) -> Result<BookkeepingReport> {
    let (potential_edges, edges) = bookkeeping_edges(params, seed);
    let n_edges = edges.len();
    let out = crate::graphstream::detect(edges, params.dc, seed.derive(1))?;
    let snapshots = out.snapshots.len();
    let mean_components = if snapshots == 0 {
        0.0
    } else {
        out.snapshots.iter().map(|s| s.components.len()).sum::<usize>() as f64 / snapshots as f64
    };
    Ok(BookkeepingReport {
        records: params.synth.records,
        potential_edges,
        edges: n_edges,
        nodes: out.nodes.len(),
        snapshots,
        mean_components,
        passed: n_edges.abs_diff(params.expected_edges) <= params.edge_tolerance
            && snapshots == params.expected_snapshots,
        params: params.clone(),
    })
}

// ---------------------------------------------------------------- split reservoir

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SplitReport {
    pub k_half: usize,
    /// One series per half-size reservoir.
    pub series: Vec<Vec<SeriesPoint>>,
    pub snapshots: Vec<usize>,
}

impl SplitReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("reservoir,time,lineage,component_id,size\n");
        for (r, series) in self.series.iter().enumerate() {
            for p in series {
                out.push_str(&format!("{r},{},{},{},{}\n", p.at, p.lineage, p.component_id, p.size));
            }
        }
        out
    }
}

/// Two independent detectors with `k/2` each over the same stream.
pub fn split_reservoir(edges: &[Edge], dc: &DcConfig, seed: RngSeed, exec: Executor) -> Result<SplitReport> {
    let k_half = (dc.k / 2).max(1);
    let config = DcConfig { k: k_half, ..*dc };
    let outs = exec
        .map(2, |i| {
            crate::graphstream::detect(edges.iter().cloned(), config, seed.derive(10 + i as u64))
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(SplitReport {
        k_half,
        snapshots: outs.iter().map(|o| o.snapshots.len()).collect(),
        series: outs.into_iter().map(|o| o.series).collect(),
    })
}

// ---------------------------------------------------------------- stability

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StabilityReport {
    pub snapshots: usize,
    pub lineages: usize,
    pub mean_components: f64,
    /// Lineages seen in one snapshot only.
    pub transient: usize,
    /// Lineages alive in the final snapshot.
    pub surviving: usize,
    /// New lineages sharing at least half their nodes with an ended one.
    pub reappearances: usize,
}

pub fn stability(snapshots: &[CommunitySnapshot], series: &[SeriesPoint]) -> StabilityReport {
    use std::collections::BTreeMap;
    let mut spans: BTreeMap<usize, Vec<i64>> = BTreeMap::new();
    for p in series {
        spans.entry(p.lineage).or_default().push(p.at);
    }
    let last_at = snapshots.last().map(|s| s.at);
    let surviving = series.iter().filter(|p| Some(p.at) == last_at).count();

    // Nodes of each lineage when last seen, and whether it has ended.
    let mut last_nodes: BTreeMap<usize, (i64, HashSet<&str>)> = BTreeMap::new();
    let mut reappearances = 0;
    let mut seen = HashSet::new();
    let mut point = series.iter();
    for (i, s) in snapshots.iter().enumerate() {
        for c in &s.components {
            let p = point.next().expect("one series point per component");
            let nodes: HashSet<&str> = c.nodes.iter().map(String::as_str).collect();
            if seen.insert(p.lineage) {
                let prev_at = i.checked_sub(1).map(|j| snapshots[j].at);
                let revived = last_nodes.iter().any(|(_, (at, old))| {
                    Some(*at) != prev_at && 2 * nodes.intersection(old).count() >= nodes.len()
                });
                if revived {
                    reappearances += 1;
                }
            }
            last_nodes.insert(p.lineage, (s.at, nodes));
        }
    }
    StabilityReport {
        snapshots: snapshots.len(),
        lineages: spans.len(),
        mean_components: if snapshots.is_empty() {
            0.0
        } else {
            series.len() as f64 / snapshots.len() as f64
        },
        transient: spans.values().filter(|v| v.len() == 1).count(),
        surviving,
        reappearances,
    }
}

// ---------------------------------------------------------------- integration on planted streams

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IntegratePlantedRun {
    pub seed: u64,
    pub planted_overlap: f64,
    pub rho_v: f64,
    pub rho_c: f64,
    pub rho_c_window: Option<f64>,
    /// `rho_c` with both community unions cut down to planted nodes.
    pub rho_c_on_planted: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IntegratePlantedReport {
    pub runs: Vec<IntegratePlantedRun>,
    pub mean_rho_c: f64,
    pub std_rho_c: f64,
    pub mean_rho_c_on_planted: f64,
    pub planted_overlap: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Two `D(δ)²` streams over node ranges that share block 0. With
/// `shared_graph` both streams carry the same block-0 edges; otherwise the
/// second stream's block 0 is an independent draw on the same ids.
pub fn integrate_planted(
    params: &Theorem2Params,
    shared_graph: bool,
    tolerance: f64,
    seed: RngSeed,
    exec: Executor,
) -> Result<IntegratePlantedReport> {
    use crate::integrate::{integrate, StreamSummary};
    let runs = exec
        .map(params.seeds, |i| -> Result<IntegratePlantedRun> {
            let s = seed.derive(i as u64);
            let (g1, e1) = planted_stream(params, s.derive(0))?;
            let (g2, _) = planted_stream(params, s.derive(1))?;
            let block = g2.blocks[0].end;
            let shift = g1.n as u32;
            let mut g2 = g2.relabel(|v| if v < block { v } else { v + shift });
            if shared_graph {
                let inside = |&(a, b): &(u32, u32)| a < block && b < block;
                g2.edges.retain(|e| !inside(e));
                g2.edges.extend(g1.edges.iter().filter(|e| inside(e)));
                g2.planted[0] = g1.planted[0].clone();
            }
            let e2 = g2.to_stream(&mut s.substream(2), 0, g2.edges.len() as i64);
            let o1 = crate::graphstream::detect(e1, params.dc, s.derive(3))?;
            let o2 = crate::graphstream::detect(e2, params.dc, s.derive(4))?;
            let names = |g: &GeneratedGraph| -> Vec<String> {
                g.planted.iter().flatten().map(|v| v.to_string()).collect()
            };
            let planted_overlap =
                crate::integrate::planted_overlap(&names(&g1), &names(&g2)).unwrap_or(0.0);
            let (s1, s2) = (StreamSummary::from_output(&o1), StreamSummary::from_output(&o2));
            let r = integrate(&s1, &s2)?;
            let planted: std::collections::BTreeSet<String> = names(&g1).into_iter().chain(names(&g2)).collect();
            let cut = |s: &StreamSummary| -> std::collections::BTreeSet<String> {
                s.community_union.intersection(&planted).cloned().collect()
            };
            let rho_c_on_planted = crate::integrate::overlap_ratio(&cut(&s1), &cut(&s2), "").ok();
            Ok(IntegratePlantedRun {
                seed: s.0,
                planted_overlap,
                rho_v: r.rho_v,
                rho_c: r.rho_c,
                rho_c_window: r.rho_c_window,
                rho_c_on_planted,
            })
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let n = runs.len().max(1) as f64;
    let mean_rho_c = runs.iter().map(|r| r.rho_c).sum::<f64>() / n;
    let std_rho_c = (runs.iter().map(|r| (r.rho_c - mean_rho_c).powi(2)).sum::<f64>() / n).sqrt();
    let planted_overlap = runs.iter().map(|r| r.planted_overlap).sum::<f64>() / n;
    let mean_rho_c_on_planted = runs.iter().filter_map(|r| r.rho_c_on_planted).sum::<f64>() / n;
    Ok(IntegratePlantedReport {
        mean_rho_c_on_planted,
        passed: runs.iter().all(|r| (r.rho_c - r.planted_overlap).abs() <= tolerance),
        runs,
        mean_rho_c,
        std_rho_c,
        planted_overlap,
        tolerance,
    })
}
