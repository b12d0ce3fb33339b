//! Random graph models for validating reservoir-based community detection.
//!
//! * `G(n, p)`: every unordered pair independently with probability `p`.
//! * Preferential attachment `PA(m)`: each arriving node links to `m`
//!   distinct existing nodes chosen proportionally to degree.
//! * `D(δ)`: configuration model over a degree distribution, optionally
//!   *concentrated* so that the `⌈√(m/2)⌉` highest-degree nodes (the core `S`)
//!   each have a strict majority of their neighbours inside `S`.
//! * `D(δ)^p`: `p` concentrated copies on disjoint node ranges, joined by a
//!   few bridge edges between degree-1 nodes.

use std::collections::HashSet;
use std::ops::Range;
use std::path::Path;

use rand::seq::{index, SliceRandom};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphstream::{group_components, Edge};

pub type Node = u32;

/// `counts[i - 1]` is the number of nodes of degree `i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeDistribution {
    counts: Vec<u64>,
}

impl DegreeDistribution {
    pub fn new(counts: Vec<u64>) -> Result<Self> {
        let d = DegreeDistribution { counts };
        if !d.half_edges().is_multiple_of(2) {
            return Err(Error::domain("delta", format!("degree sum {} is odd", d.half_edges())));
        }
        Ok(d)
    }

    /// Power law `D(i) = ⌈c/i²⌉` for `i ≤ ⌈√(2m)⌉`, with `c` the largest value
    /// keeping the edge count at most `target_edges`; `D(1)` is nudged by one
    /// when needed to make the degree sum even.
    pub fn power_law(target_edges: u64) -> Result<Self> {
        if target_edges == 0 {
            return Err(Error::domain("edges", "must be positive"));
        }
        let max_degree = ((2.0 * target_edges as f64).sqrt()).ceil() as u64;
        let build = |c: f64| -> Vec<u64> {
            (1..=max_degree)
                .map(|i| (c / (i * i) as f64).ceil().max(1.0) as u64)
                .collect()
        };
        let half_edges = |v: &[u64]| v.iter().enumerate().map(|(i, d)| (i as u64 + 1) * d).sum::<u64>();
        let (mut lo, mut hi) = (0.0f64, 2.0 * target_edges as f64);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if half_edges(&build(mid)) <= 2 * target_edges {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let mut counts = build(lo);
        if half_edges(&counts) % 2 == 1 {
            counts[0] += 1;
        }
        DegreeDistribution::new(counts)
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn half_edges(&self) -> u64 {
        self.counts
            .iter()
            .enumerate()
            .map(|(i, d)| (i as u64 + 1) * d)
            .sum()
    }

    pub fn edge_count(&self) -> usize {
        (self.half_edges() / 2) as usize
    }

    pub fn node_count(&self) -> usize {
        self.counts.iter().sum::<u64>() as usize
    }

    pub fn max_degree(&self) -> usize {
        self.counts.iter().rposition(|&d| d > 0).map_or(0, |i| i + 1)
    }

    /// Degrees in decreasing order; node `i` of a generated graph has degree `sequence[i]`.
    pub fn degree_sequence(&self) -> Vec<usize> {
        let mut seq = Vec::with_capacity(self.node_count());
        for (i, &d) in self.counts.iter().enumerate().rev() {
            seq.extend(std::iter::repeat_n(i + 1, d as usize));
        }
        seq
    }

    /// Size of the core: `⌈√(m/2)⌉`.
    pub fn core_size(&self) -> usize {
        ((self.edge_count() as f64 / 2.0).sqrt()).ceil() as usize
    }

    /// Max degree within `2·⌈√(2m)⌉`, the O(√m) bound of a power-law δ.
    pub fn check_power_law_bound(&self) -> Result<()> {
        let bound = 2 * ((2.0 * self.edge_count() as f64).sqrt()).ceil() as usize;
        if self.max_degree() > bound {
            return Err(Error::domain(
                "delta",
                format!("max degree {} exceeds O(sqrt m) bound {bound}", self.max_degree()),
            ));
        }
        Ok(())
    }
}

/// A concrete multigraph on nodes `0..n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratedGraph {
    pub n: usize,
    pub edges: Vec<(Node, Node)>,
    /// Planted communities (concentrated cores), disjoint.
    pub planted: Vec<Vec<Node>>,
    /// Node range of each composed copy; empty for single-block models.
    pub blocks: Vec<Range<Node>>,
}

impl GeneratedGraph {
    /// Degree of each node; a loop adds 2.
    pub fn degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.n];
        for &(a, b) in &self.edges {
            d[a as usize] += 1;
            d[b as usize] += 1;
        }
        d
    }

    pub fn degree_multiset(&self) -> Vec<usize> {
        let mut d = self.degrees();
        d.sort_unstable_by(|a, b| b.cmp(a));
        d
    }

    /// Edges in a random order, timestamped `start + ⌊i·span/m⌋`.
    pub fn to_stream<R: Rng + ?Sized>(&self, rng: &mut R, start: i64, span: i64) -> Vec<Edge> {
        let mut order: Vec<usize> = (0..self.edges.len()).collect();
        order.shuffle(rng);
        let m = self.edges.len().max(1) as i64;
        order
            .into_iter()
            .enumerate()
            .map(|(i, e)| {
                let (a, b) = self.edges[e];
                Edge::new(a.to_string(), b.to_string(), start + (i as i64 * span) / m)
            })
            .collect()
    }

    /// Renames nodes through `f`; `n` becomes one past the largest new id.
    pub fn relabel(&self, f: impl Fn(Node) -> Node) -> GeneratedGraph {
        let edges: Vec<(Node, Node)> = self.edges.iter().map(|&(a, b)| (f(a), f(b))).collect();
        let n = (0..self.n as Node).map(&f).max().map_or(0, |x| x as usize + 1);
        GeneratedGraph {
            n,
            edges,
            planted: self.planted.iter().map(|s| s.iter().map(|&x| f(x)).collect()).collect(),
            blocks: Vec::new(),
        }
    }

    pub fn write_planted(&self, path: &Path) -> Result<()> {
        #[derive(Serialize)]
        struct Rec<'a> {
            community_id: usize,
            nodes: Vec<String>,
            #[serde(skip_serializing_if = "Option::is_none")]
            block: Option<&'a Range<Node>>,
        }
        crate::graphstream::io::write_jsonl(
            path,
            self.planted.iter().enumerate().map(|(i, s)| Rec {
                community_id: i,
                nodes: s.iter().map(|x| x.to_string()).collect(),
                block: self.blocks.get(i),
            }),
        )
    }
}

/// Outcome of the concentration check and, once estimated, the empirical
/// constants: `alpha_hat` = P[edge internal to S], `beta_hat` = P[two
/// independent edges both internal and sharing a node], `gamma_hat` =
/// P[largest S-internal component of a k-edge sample has ≥ h nodes].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationReport {
    pub s_size: usize,
    pub satisfied: bool,
    pub failing_nodes: usize,
    pub attempts: usize,
    pub alpha_hat: Option<f64>,
    pub beta_hat: Option<f64>,
    pub gamma_hat: Option<f64>,
}

/// The `s` highest-degree nodes, ties to the smaller id.
pub fn top_degree_nodes(degrees: &[usize], s: usize) -> Vec<Node> {
    let mut ids: Vec<Node> = (0..degrees.len() as Node).collect();
    ids.sort_by(|&a, &b| degrees[b as usize].cmp(&degrees[a as usize]).then(a.cmp(&b)));
    ids.truncate(s);
    ids.sort_unstable();
    ids
}

/// Number of nodes of `core` without a strict majority of their (non-loop)
/// edge endpoints inside `core`. Parallel edges count with multiplicity.
pub fn majority_failures(n: usize, edges: &[(Node, Node)], core: &[Node]) -> usize {
    let mut in_core = vec![false; n];
    for &v in core {
        in_core[v as usize] = true;
    }
    let mut inside = vec![0usize; n];
    let mut total = vec![0usize; n];
    for &(a, b) in edges {
        if a == b {
            continue;
        }
        for (x, y) in [(a, b), (b, a)] {
            total[x as usize] += 1;
            if in_core[y as usize] {
                inside[x as usize] += 1;
            }
        }
    }
    core.iter()
        .filter(|&&v| 2 * inside[v as usize] <= total[v as usize])
        .count()
}

pub fn gen_gnp<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Result<GeneratedGraph> {
    if n == 0 {
        return Err(Error::domain("n", "must be at least 1"));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::domain("p", format!("must lie in [0, 1], got {p}")));
    }
    let mut edges = Vec::new();
    for i in 0..n as Node {
        for j in (i + 1)..n as Node {
            if rng.random_bool(p) {
                edges.push((i, j));
            }
        }
    }
    Ok(GeneratedGraph {
        n,
        edges,
        planted: Vec::new(),
        blocks: Vec::new(),
    })
}

/// Preferential attachment from a seed clique on `m + 1` nodes.
pub fn gen_pa<R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> Result<GeneratedGraph> {
    if m == 0 {
        return Err(Error::domain("m", "must be at least 1"));
    }
    if n <= m {
        return Err(Error::domain("n", format!("must exceed m = {m}")));
    }
    let seed_nodes = m + 1;
    let mut edges: Vec<(Node, Node)> = Vec::with_capacity(pa_edge_count(n, m));
    // Every edge endpoint, so a uniform pick is a degree-proportional node pick.
    let mut endpoints: Vec<Node> = Vec::with_capacity(2 * pa_edge_count(n, m));
    for i in 0..seed_nodes as Node {
        for j in (i + 1)..seed_nodes as Node {
            edges.push((i, j));
            endpoints.extend([i, j]);
        }
    }
    let mut targets: Vec<Node> = Vec::with_capacity(m);
    for v in seed_nodes as Node..n as Node {
        targets.clear();
        while targets.len() < m {
            let t = endpoints[rng.random_range(0..endpoints.len())];
            if !targets.contains(&t) {
                targets.push(t);
            }
        }
        for &t in &targets {
            edges.push((v, t));
            endpoints.extend([v, t]);
        }
    }
    Ok(GeneratedGraph {
        n,
        edges,
        planted: Vec::new(),
        blocks: Vec::new(),
    })
}

/// `m·(n − (m+1)) + m(m+1)/2`.
pub fn pa_edge_count(n: usize, m: usize) -> usize {
    m * (n - (m + 1)) + m * (m + 1) / 2
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationParams {
    /// Probability that a half-edge of the top `2·|S|` nodes is matched inside that pool.
    pub bias: f64,
    pub max_attempts: usize,
    /// Re-draws per self-loop before it is accepted.
    pub loop_redraws: usize,
}

impl Default for ConcentrationParams {
    fn default() -> Self {
        ConcentrationParams {
            bias: 0.9,
            max_attempts: 100,
            loop_redraws: 100,
        }
    }
}

fn pair_up(stubs: &[Node], out: &mut Vec<(Node, Node)>) {
    out.extend(stubs.chunks_exact(2).map(|p| (p[0], p[1])));
}

/// Rewires each loop `(a,a)` with a random other pair `(c,d)` into `(a,c),(a,d)`.
fn redraw_loops<R: Rng + ?Sized>(edges: &mut [(Node, Node)], cap: usize, rng: &mut R) {
    if edges.len() < 2 {
        return;
    }
    for i in 0..edges.len() {
        let (a, b) = edges[i];
        if a != b {
            continue;
        }
        for _ in 0..cap {
            let j = rng.random_range(0..edges.len());
            let (c, d) = edges[j];
            if j != i && c != a && d != a {
                edges[i] = (a, c);
                edges[j] = (a, d);
                break;
            }
        }
    }
}

pub fn gen_configuration<R: Rng + ?Sized>(
    delta: &DegreeDistribution,
    concentrated: bool,
    rng: &mut R,
) -> Result<(GeneratedGraph, ConcentrationReport)> {
    gen_configuration_with(delta, concentrated.then(ConcentrationParams::default), rng)
}

/// Configuration model realizing `delta` exactly. With `concentration`, the
/// matching favours the high-degree pool and is redrawn until every core node
/// passes the majority test, or the attempt cap is hit.
pub fn gen_configuration_with<R: Rng + ?Sized>(
    delta: &DegreeDistribution,
    concentration: Option<ConcentrationParams>,
    rng: &mut R,
) -> Result<(GeneratedGraph, ConcentrationReport)> {
    let seq = delta.degree_sequence();
    let n = seq.len();
    let s = delta.core_size().min(n);
    let core: Vec<Node> = (0..s as Node).collect();
    let stubs: Vec<Node> = seq
        .iter()
        .enumerate()
        .flat_map(|(v, &d)| std::iter::repeat_n(v as Node, d))
        .collect();

    let build = |edges: Vec<(Node, Node)>| GeneratedGraph {
        n,
        edges,
        planted: if s > 0 { vec![core.clone()] } else { Vec::new() },
        blocks: Vec::new(),
    };
    let report = |failing: usize, attempts: usize| ConcentrationReport {
        s_size: s,
        satisfied: failing == 0,
        failing_nodes: failing,
        attempts,
        alpha_hat: None,
        beta_hat: None,
        gamma_hat: None,
    };

    let Some(params) = concentration else {
        let mut shuffled = stubs;
        shuffled.shuffle(rng);
        let mut edges = Vec::with_capacity(shuffled.len() / 2);
        pair_up(&shuffled, &mut edges);
        redraw_loops(&mut edges, ConcentrationParams::default().loop_redraws, rng);
        let failing = majority_failures(n, &edges, &core);
        return Ok((build(edges), report(failing, 1)));
    };

    if !(0.0..=1.0).contains(&params.bias) {
        return Err(Error::domain("bias", "must lie in [0, 1]"));
    }
    delta.check_power_law_bound()?;
    let pool_nodes = (2 * s).min(n) as Node;
    let mut best: Option<ConcentrationReport> = None;
    for attempt in 1..=params.max_attempts.max(1) {
        let mut internal = Vec::new();
        let mut rest = Vec::new();
        for &v in &stubs {
            if v < pool_nodes && rng.random_bool(params.bias) {
                internal.push(v);
            } else {
                rest.push(v);
            }
        }
        if internal.len() % 2 == 1 {
            rest.push(internal.pop().expect("odd length is nonzero"));
        }
        internal.shuffle(rng);
        rest.shuffle(rng);
        let mut edges = Vec::with_capacity(stubs.len() / 2);
        pair_up(&internal, &mut edges);
        pair_up(&rest, &mut edges);
        redraw_loops(&mut edges, params.loop_redraws, rng);
        let failing = majority_failures(n, &edges, &core);
        if failing == 0 {
            return Ok((build(edges), report(0, attempt)));
        }
        if best.as_ref().is_none_or(|b| failing < b.failing_nodes) {
            best = Some(report(failing, attempt));
        }
    }
    Err(Error::Concentration {
        attempts: params.max_attempts,
        report: Box::new(best.expect("at least one attempt")),
    })
}

/// `p` concentrated `D(δ)` graphs on consecutive node ranges plus
/// `⌈bridge_fraction·m⌉` bridges between degree-1 nodes of distinct copies.
pub fn gen_communities<R: Rng + ?Sized>(
    delta: &DegreeDistribution,
    p: usize,
    bridge_fraction: f64,
    rng: &mut R,
) -> Result<GeneratedGraph> {
    if p == 0 {
        return Err(Error::domain("p", "need at least one community"));
    }
    if !(0.0..=1.0).contains(&bridge_fraction) {
        return Err(Error::domain("bridge_fraction", "must lie in [0, 1]"));
    }
    let block = delta.node_count();
    let mut edges = Vec::new();
    let mut planted = Vec::with_capacity(p);
    let mut blocks = Vec::with_capacity(p);
    for b in 0..p {
        let offset = (b * block) as Node;
        let (g, _) = gen_configuration(delta, true, rng)?;
        edges.extend(g.edges.iter().map(|&(x, y)| (x + offset, y + offset)));
        planted.extend(
            g.planted
                .into_iter()
                .map(|s| s.into_iter().map(|x| x + offset).collect::<Vec<_>>()),
        );
        blocks.push(offset..offset + block as Node);
    }
    let leaves = delta.counts().first().copied().unwrap_or(0) as usize;
    let bridges = if p >= 2 {
        (bridge_fraction * edges.len() as f64).ceil() as usize
    } else {
        0
    };
    if bridges > 0 && leaves == 0 {
        return Err(Error::domain("delta", "bridges need degree-1 nodes"));
    }
    for _ in 0..bridges {
        let b1 = rng.random_range(0..p);
        let mut b2 = rng.random_range(0..p - 1);
        if b2 >= b1 {
            b2 += 1;
        }
        // Degree-1 nodes are the last D(1) ids of each block.
        let pick = |b: usize, rng: &mut R| (b * block + block - leaves + rng.random_range(0..leaves)) as Node;
        let (x, y) = (pick(b1, rng), pick(b2, rng));
        edges.push((x, y));
    }
    Ok(GeneratedGraph {
        n: block * p,
        edges,
        planted,
        blocks,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateParams {
    /// Draws for `alpha_hat` and pairs for `beta_hat`.
    pub trials: usize,
    /// k-edge samples for `gamma_hat`.
    pub sample_draws: usize,
    pub k: usize,
    pub h: usize,
}

impl Default for EstimateParams {
    fn default() -> Self {
        EstimateParams {
            trials: 100_000,
            sample_draws: 1_000,
            k: 400,
            h: 3,
        }
    }
}

/// Monte Carlo estimates of the constants for planted community `community`.
pub fn estimate_constants<R: Rng + ?Sized>(
    g: &GeneratedGraph,
    community: usize,
    params: EstimateParams,
    rng: &mut R,
) -> Result<ConcentrationReport> {
    let core = g.planted.get(community).ok_or(Error::MissingPlanted)?;
    if g.edges.is_empty() {
        return Err(Error::EmptyInput("graph has no edges"));
    }
    let members: HashSet<Node> = core.iter().copied().collect();
    let internal = |&(a, b): &(Node, Node)| members.contains(&a) && members.contains(&b);
    let m = g.edges.len();
    let draw = |rng: &mut R| g.edges[rng.random_range(0..m)];

    let trials = params.trials.max(1);
    let mut alpha_hits = 0usize;
    let mut beta_hits = 0usize;
    for _ in 0..trials {
        if internal(&draw(rng)) {
            alpha_hits += 1;
        }
        let (e, f) = (draw(rng), draw(rng));
        if internal(&e) && internal(&f) && (e.0 == f.0 || e.0 == f.1 || e.1 == f.0 || e.1 == f.1) {
            beta_hits += 1;
        }
    }

    let draws = params.sample_draws.max(1);
    let k = params.k.min(m);
    let mut gamma_hits = 0usize;
    for _ in 0..draws {
        let sample: Vec<(Node, Node)> = index::sample(rng, m, k)
            .into_iter()
            .map(|i| g.edges[i])
            .filter(internal)
            .collect();
        let largest = group_components(&sample)
            .iter()
            .map(|(nodes, _)| nodes.len())
            .max()
            .unwrap_or(0);
        if largest >= params.h {
            gamma_hits += 1;
        }
    }

    let failing = majority_failures(g.n, &g.edges, core);
    Ok(ConcentrationReport {
        s_size: core.len(),
        satisfied: failing == 0,
        failing_nodes: failing,
        attempts: 0,
        alpha_hat: Some(alpha_hits as f64 / trials as f64),
        beta_hat: Some(beta_hits as f64 / trials as f64),
        gamma_hat: Some(gamma_hits as f64 / draws as f64),
    })
}
