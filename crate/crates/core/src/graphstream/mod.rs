//! Dynamic community detection over an edge stream.
//!
//! Every node is kept in a [`NodeRegistry`]; edges are not. Edges go into a
//! global uniform k-reservoir and into a k-sample of a sliding event-time
//! window. Every `c` accepted edges the connected components of the window
//! sample are recomputed; components with at least `h` nodes are the current
//! communities. Every `tau` of event time a [`CommunitySnapshot`] of them is
//! stored, and when the stream ends the components of the global reservoir are
//! stored as well.

mod components;
pub mod io;
mod lineage;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

pub use components::{group_components, recompute_components, Component, ComponentSet, UnionFind};
pub use lineage::{component_size_series, SeriesPoint};

use crate::error::{Error, Result};
use crate::reservoir::{LatePolicy, Reservoir, WeightedItem, WindowConfig, WindowMode, WindowSampler};
use crate::rng::RngSeed;

pub type NodeId = u32;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub src: String,
    pub dst: String,
    pub timestamp: i64,
}

impl Edge {
    pub fn new(src: impl Into<String>, dst: impl Into<String>, timestamp: i64) -> Self {
        Edge {
            src: src.into(),
            dst: dst.into(),
            timestamp,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeRecord {
    pub node: String,
    pub first_seen: i64,
    pub occurrences: u64,
}

/// Every node ever seen, with first-seen time and endpoint occurrence count.
#[derive(Debug, Clone, Default)]
pub struct NodeRegistry {
    index: HashMap<String, NodeId>,
    nodes: Vec<NodeRecord>,
}

impl NodeRegistry {
    pub fn observe(&mut self, name: &str, timestamp: i64) -> NodeId {
        if let Some(&id) = self.index.get(name) {
            self.nodes[id as usize].occurrences += 1;
            return id;
        }
        let id = self.nodes.len() as NodeId;
        self.index.insert(name.to_string(), id);
        self.nodes.push(NodeRecord {
            node: name.to_string(),
            first_seen: timestamp,
            occurrences: 1,
        });
        id
    }

    pub fn id(&self, name: &str) -> Option<NodeId> {
        self.index.get(name).copied()
    }

    pub fn name(&self, id: NodeId) -> &str {
        &self.nodes[id as usize].node
    }

    pub fn get(&self, name: &str) -> Option<&NodeRecord> {
        self.id(name).map(|id| &self.nodes[id as usize])
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Records sorted by node name.
    pub fn records(&self) -> Vec<NodeRecord> {
        let mut out = self.nodes.clone();
        out.sort_unstable_by(|a, b| a.node.cmp(&b.node));
        out
    }
}

/// Parameters of the dynamic detection run. Durations are seconds of event time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DcConfig {
    pub k: usize,
    pub h: usize,
    pub c: usize,
    pub tau: i64,
    pub window_length: i64,
    #[serde(default)]
    pub window_mode: WindowMode,
    #[serde(default)]
    pub late: LatePolicy,
}

impl Default for DcConfig {
    fn default() -> Self {
        DcConfig {
            k: 400,
            h: 3,
            c: 3,
            tau: 15 * 60,
            window_length: 15 * 60,
            window_mode: WindowMode::Exact,
            late: LatePolicy::Reject,
        }
    }
}

impl DcConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("k", self.k as i64),
            ("h", self.h as i64),
            ("c", self.c as i64),
            ("tau", self.tau),
            ("window_length", self.window_length),
        ];
        for (name, v) in positive {
            if v <= 0 {
                return Err(Error::domain(name, "must be positive"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommunitySnapshot {
    pub at: i64,
    /// Window components with at least `h` nodes, sorted by id.
    pub components: Vec<Component>,
}

impl CommunitySnapshot {
    pub fn stored_elements(&self) -> usize {
        self.components.iter().map(Component::size).sum()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StreamStats {
    pub accepted: u64,
    pub self_loops: u64,
    pub malformed: u64,
    pub clamped: u64,
    pub recomputations: u64,
    /// Largest global + window sample size observed after any edge.
    pub max_retained: usize,
    /// Largest exact-mode window buffer (sample plus pending candidates).
    pub max_window_buffer: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ingested {
    Accepted,
    SelfLoop,
    Malformed,
}

type EdgeKey = (NodeId, NodeId);

/// One stream's detection state. Single owner.
#[derive(Debug, Clone)]
pub struct EdgeStreamState {
    config: DcConfig,
    registry: NodeRegistry,
    global: Reservoir<EdgeKey>,
    window: WindowSampler<EdgeKey>,
    window_components: ComponentSet,
    since_recompute: usize,
    next_boundary: Option<i64>,
    newest: Option<i64>,
    since_snapshot: u64,
    snapshots: Vec<CommunitySnapshot>,
    stats: StreamStats,
}

impl EdgeStreamState {
    pub fn new(config: DcConfig, seed: RngSeed) -> Result<Self> {
        config.validate()?;
        let window_cfg = WindowConfig {
            capacity: config.k,
            window_length: config.window_length,
            mode: config.window_mode,
            late: config.late,
        };
        Ok(EdgeStreamState {
            config,
            registry: NodeRegistry::default(),
            global: Reservoir::new(config.k, seed.derive(1))?,
            window: WindowSampler::new(window_cfg, seed.derive(2))?,
            window_components: ComponentSet::default(),
            since_recompute: 0,
            next_boundary: None,
            newest: None,
            since_snapshot: 0,
            snapshots: Vec::new(),
            stats: StreamStats::default(),
        })
    }

    pub fn config(&self) -> &DcConfig {
        &self.config
    }

    pub fn registry(&self) -> &NodeRegistry {
        &self.registry
    }

    pub fn stats(&self) -> &StreamStats {
        &self.stats
    }

    pub fn snapshots(&self) -> &[CommunitySnapshot] {
        &self.snapshots
    }

    pub fn window_components(&self) -> &ComponentSet {
        &self.window_components
    }

    /// Edges currently held in the two samples.
    pub fn retained_edge_count(&self) -> usize {
        self.global.len() + self.window.len()
    }

    pub fn window_buffered(&self) -> usize {
        self.window.buffered()
    }

    pub fn global_edges(&self) -> Vec<(&str, &str)> {
        self.names(self.global.payloads())
    }

    pub fn window_edges(&self) -> Vec<(&str, &str)> {
        self.names(self.window.sample().into_iter())
    }

    fn names<'a>(&'a self, it: impl Iterator<Item = &'a EdgeKey>) -> Vec<(&'a str, &'a str)> {
        it.map(|&(a, b)| (self.registry.name(a), self.registry.name(b))).collect()
    }

    fn components_of<'a>(&self, keys: impl Iterator<Item = &'a EdgeKey>) -> ComponentSet {
        let keys: Vec<EdgeKey> = keys.copied().collect();
        ComponentSet::from_groups(group_components(&keys), |id| self.registry.name(id).to_string())
    }

    /// Components of the whole global reservoir, on demand.
    pub fn global_components(&self) -> ComponentSet {
        self.components_of(self.global.payloads())
    }

    pub fn recompute_window_components(&mut self) {
        self.window_components = self.components_of(self.window.sample().into_iter());
        self.since_recompute = 0;
        self.stats.recomputations += 1;
    }

    /// Feeds one edge. Snapshots whose boundary the edge's timestamp crosses are
    /// emitted before the edge enters the samples.
    pub fn ingest(&mut self, edge: &Edge) -> Result<Ingested> {
        if edge.src.is_empty() || edge.dst.is_empty() {
            self.stats.malformed += 1;
            return Ok(Ingested::Malformed);
        }
        if edge.src == edge.dst {
            self.stats.self_loops += 1;
            return Ok(Ingested::SelfLoop);
        }
        let mut ts = edge.timestamp;
        if let Some(newest) = self.newest {
            if ts < newest {
                match self.config.late {
                    LatePolicy::Reject => return Err(Error::Ordering { newest, got: ts }),
                    LatePolicy::Clamp => {
                        self.stats.clamped += 1;
                        ts = newest;
                    }
                }
            }
        }
        match self.next_boundary {
            None => self.next_boundary = Some(ts + self.config.tau),
            Some(_) => while self.tick(ts).is_some() {},
        }
        self.newest = Some(ts);

        let a = self.registry.observe(&edge.src, ts);
        let b = self.registry.observe(&edge.dst, ts);
        self.global.offer(WeightedItem::unit((a, b)));
        self.window.offer((a, b), ts)?;
        self.stats.accepted += 1;
        self.since_snapshot += 1;
        self.since_recompute += 1;
        if self.since_recompute >= self.config.c {
            self.recompute_window_components();
        }
        self.stats.max_retained = self.stats.max_retained.max(self.retained_edge_count());
        self.stats.max_window_buffer = self.stats.max_window_buffer.max(self.window.buffered());
        Ok(Ingested::Accepted)
    }

    /// Emits the snapshot for the next boundary if `now` has reached it. The
    /// window is advanced to the boundary and its components recomputed first.
    pub fn tick(&mut self, now: i64) -> Option<CommunitySnapshot> {
        let boundary = self.next_boundary?;
        if now < boundary {
            return None;
        }
        self.window.advance_to(boundary);
        self.recompute_window_components();
        let snap = CommunitySnapshot {
            at: boundary,
            components: self.window_components.at_least(self.config.h),
        };
        self.snapshots.push(snap.clone());
        self.next_boundary = Some(boundary + self.config.tau);
        self.since_snapshot = 0;
        Some(snap)
    }

    /// Ends the stream: a last snapshot for the open interval (if it saw edges)
    /// and the large components of the global reservoir.
    pub fn finalize(mut self) -> StreamOutput {
        if self.since_snapshot > 0 {
            self.recompute_window_components();
            self.snapshots.push(CommunitySnapshot {
                at: self.newest.unwrap_or_default(),
                components: self.window_components.at_least(self.config.h),
            });
        }
        let global_components = self.global_components().at_least(self.config.h);
        let series = component_size_series(&self.snapshots);
        StreamOutput {
            config: self.config,
            snapshots: self.snapshots,
            global_components,
            nodes: self.registry.records(),
            series,
            stats: self.stats,
        }
    }
}

/// Everything a finished stream leaves behind. No edges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StreamOutput {
    pub config: DcConfig,
    pub snapshots: Vec<CommunitySnapshot>,
    /// Global reservoir components with at least `h` nodes.
    pub global_components: Vec<Component>,
    pub nodes: Vec<NodeRecord>,
    pub series: Vec<SeriesPoint>,
    pub stats: StreamStats,
}

impl StreamOutput {
    pub fn stored_elements(&self) -> usize {
        self.snapshots.iter().map(CommunitySnapshot::stored_elements).sum()
    }

    /// Every stored component: window snapshots, then global components.
    pub fn stored_components(&self) -> impl Iterator<Item = &Component> {
        self.snapshots
            .iter()
            .flat_map(|s| s.components.iter())
            .chain(self.global_components.iter())
    }
}

/// Runs a whole stream through a fresh state.
pub fn detect<I>(edges: I, config: DcConfig, seed: RngSeed) -> Result<StreamOutput>
where
    I: IntoIterator<Item = Edge>,
{
    let mut state = EdgeStreamState::new(config, seed)?;
    for e in edges {
        state.ingest(&e)?;
    }
    Ok(state.finalize())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(k: usize, c: usize) -> DcConfig {
        DcConfig {
            k,
            c,
            ..DcConfig::default()
        }
    }

    #[test]
    fn small_exhaustive_case() {
        let mut s = EdgeStreamState::new(cfg(5, 1), RngSeed(1)).unwrap();
        for (a, b) in [("1", "2"), ("2", "3"), ("4", "5")] {
            s.ingest(&Edge::new(a, b, 0)).unwrap();
        }
        let ids: Vec<_> = s.window_components().iter().map(|c| c.nodes.clone()).collect();
        assert_eq!(ids, vec![vec!["1", "2", "3"], vec!["4", "5"]]);
        assert_eq!(s.global_components(), *s.window_components());
    }

    #[test]
    fn self_loops_and_malformed_are_counted() {
        let mut s = EdgeStreamState::new(cfg(5, 1), RngSeed(1)).unwrap();
        assert_eq!(s.ingest(&Edge::new("a", "a", 0)).unwrap(), Ingested::SelfLoop);
        assert_eq!(s.ingest(&Edge::new("", "a", 0)).unwrap(), Ingested::Malformed);
        assert_eq!(s.ingest(&Edge::new("a", "b", 0)).unwrap(), Ingested::Accepted);
        assert_eq!(s.stats().self_loops, 1);
        assert_eq!(s.stats().malformed, 1);
        assert_eq!(s.registry().len(), 2);
    }

    #[test]
    fn window_expiry_leaves_global_alone() {
        let mut s = EdgeStreamState::new(
            DcConfig {
                k: 10,
                c: 1,
                tau: 100,
                window_length: 50,
                ..DcConfig::default()
            },
            RngSeed(3),
        )
        .unwrap();
        for (a, b) in [("a", "b"), ("b", "c"), ("c", "d")] {
            s.ingest(&Edge::new(a, b, 0)).unwrap();
        }
        let global = s.global_components();
        let snap = s.tick(100).unwrap();
        assert!(snap.components.is_empty());
        assert!(s.window_components().is_empty());
        assert_eq!(s.global_components(), global);
    }

    #[test]
    fn snapshots_fire_on_boundaries() {
        let mut s = EdgeStreamState::new(
            DcConfig {
                k: 10,
                c: 1,
                h: 3,
                tau: 10,
                window_length: 12,
                ..DcConfig::default()
            },
            RngSeed(3),
        )
        .unwrap();
        s.ingest(&Edge::new("a", "b", 0)).unwrap();
        s.ingest(&Edge::new("b", "c", 5)).unwrap();
        assert!(s.snapshots().is_empty());
        // crosses boundaries 10 and 20 at once
        s.ingest(&Edge::new("x", "y", 23)).unwrap();
        let at: Vec<i64> = s.snapshots().iter().map(|x| x.at).collect();
        assert_eq!(at, vec![10, 20]);
        assert_eq!(s.snapshots()[0].components.len(), 1);
        assert!(s.snapshots()[1].components.is_empty());
        let out = s.finalize();
        assert_eq!(out.snapshots.len(), 3);
        assert_eq!(out.snapshots[2].at, 23);
    }

    #[test]
    fn late_edges() {
        let mut s = EdgeStreamState::new(cfg(4, 1), RngSeed(1)).unwrap();
        s.ingest(&Edge::new("a", "b", 10)).unwrap();
        assert!(matches!(s.ingest(&Edge::new("a", "c", 9)), Err(Error::Ordering { .. })));
        let mut s = EdgeStreamState::new(
            DcConfig {
                late: LatePolicy::Clamp,
                ..cfg(4, 1)
            },
            RngSeed(1),
        )
        .unwrap();
        s.ingest(&Edge::new("a", "b", 10)).unwrap();
        s.ingest(&Edge::new("a", "c", 9)).unwrap();
        assert_eq!(s.stats().clamped, 1);
        assert_eq!(s.registry().get("c").unwrap().first_seen, 10);
    }

    #[test]
    fn empty_stream_finalizes_empty() {
        let out = detect(Vec::new(), DcConfig::default(), RngSeed(0)).unwrap();
        assert!(out.snapshots.is_empty());
        assert!(out.global_components.is_empty());
        assert!(out.nodes.is_empty());
        assert!(out.series.is_empty());
    }

    #[test]
    fn registry_counts() {
        let mut r = NodeRegistry::default();
        r.observe("b", 5);
        r.observe("a", 7);
        r.observe("b", 9);
        let recs = r.records();
        assert_eq!(recs[0].node, "a");
        assert_eq!(recs[1], NodeRecord { node: "b".into(), first_seen: 5, occurrences: 2 });
    }

    #[test]
    fn invalid_config() {
        for bad in [
            DcConfig { k: 0, ..DcConfig::default() },
            DcConfig { c: 0, ..DcConfig::default() },
            DcConfig { tau: 0, ..DcConfig::default() },
            DcConfig { window_length: -1, ..DcConfig::default() },
        ] {
            assert!(EdgeStreamState::new(bad, RngSeed(0)).is_err());
        }
    }

    #[test]
    fn stored_elements_arithmetic() {
        let comp = |i: usize| Component {
            id: format!("{i}"),
            nodes: (0..8).map(|j| format!("{i}-{j}")).collect(),
            edge_count: 7,
        };
        let snaps: Vec<CommunitySnapshot> = (0..16)
            .map(|t| CommunitySnapshot {
                at: t * 900,
                components: (0..4).map(comp).collect(),
            })
            .collect();
        assert_eq!(snaps.iter().map(|s| s.stored_elements()).sum::<usize>(), 512);
    }
}
