//! Correlating finished streams from their stored summaries.
//!
//! `rho_v` compares node sets, `rho_c` compares the unions of all stored
//! community nodes. Neither needs edges; `edge_correlation_oracle` does and
//! exists for tests over fully stored streams only.

use std::collections::{BTreeSet, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphstream::io::StoredRun;
use crate::graphstream::{CommunitySnapshot, Component, StreamOutput};

/// Edge-free record of one finished stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StreamSummary {
    pub node_set: BTreeSet<String>,
    /// Nodes of every snapshot component and every large global component.
    pub community_union: BTreeSet<String>,
    /// Nodes of snapshot components only.
    pub window_union: BTreeSet<String>,
    pub snapshots: Vec<CommunitySnapshot>,
    pub global_components: Vec<Component>,
}

impl StreamSummary {
    pub fn new(
        node_set: BTreeSet<String>,
        snapshots: Vec<CommunitySnapshot>,
        global_components: Vec<Component>,
    ) -> Self {
        let window_union: BTreeSet<String> = snapshots
            .iter()
            .flat_map(|s| s.components.iter())
            .flat_map(|c| c.nodes.iter().cloned())
            .collect();
        let mut community_union = window_union.clone();
        community_union.extend(global_components.iter().flat_map(|c| c.nodes.iter().cloned()));
        StreamSummary {
            node_set,
            community_union,
            window_union,
            snapshots,
            global_components,
        }
    }

    pub fn from_output(out: &StreamOutput) -> Self {
        StreamSummary::new(
            out.nodes.iter().map(|n| n.node.clone()).collect(),
            out.snapshots.clone(),
            out.global_components.clone(),
        )
    }

    pub fn from_stored(run: StoredRun) -> Self {
        StreamSummary::new(
            run.nodes.into_iter().map(|n| n.node).collect(),
            run.snapshots,
            run.global_components,
        )
    }

    pub fn load(dir: &Path) -> Result<Self> {
        Ok(StreamSummary::from_stored(crate::graphstream::io::read_output(dir)?))
    }
}

/// `|A ∩ B| / max(|A|, |B|)`; undefined when both sets are empty.
pub fn overlap_ratio<T: Ord>(a: &BTreeSet<T>, b: &BTreeSet<T>, what: &'static str) -> Result<f64> {
    let denom = a.len().max(b.len());
    if denom == 0 {
        return Err(Error::UndefinedCorrelation(what));
    }
    Ok(a.intersection(b).count() as f64 / denom as f64)
}

pub fn node_correlation(s1: &StreamSummary, s2: &StreamSummary) -> Result<f64> {
    overlap_ratio(&s1.node_set, &s2.node_set, "both node sets are empty")
}

pub fn community_correlation(s1: &StreamSummary, s2: &StreamSummary) -> Result<f64> {
    overlap_ratio(&s1.community_union, &s2.community_union, "both community unions are empty")
}

/// Over distinct undirected edges. Test oracle: real runs never keep full edge lists.
pub fn edge_correlation_oracle<S: AsRef<str>>(e1: &[(S, S)], e2: &[(S, S)]) -> Result<f64> {
    let norm = |e: &[(S, S)]| -> BTreeSet<(String, String)> {
        e.iter()
            .map(|(a, b)| {
                let (a, b) = (a.as_ref(), b.as_ref());
                if a <= b {
                    (a.to_string(), b.to_string())
                } else {
                    (b.to_string(), a.to_string())
                }
            })
            .collect()
    };
    overlap_ratio(&norm(e1), &norm(e2), "both edge lists are empty")
}

/// The integration structure: both node sets' sizes and overlap, both
/// streams' communities, and the correlations. No edges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegrationResult {
    pub v1_size: usize,
    pub v2_size: usize,
    pub common_nodes: BTreeSet<String>,
    pub communities_1: Vec<CommunitySnapshot>,
    pub communities_2: Vec<CommunitySnapshot>,
    pub rho_v: f64,
    /// Over snapshot and global communities.
    pub rho_c: f64,
    /// Over snapshot communities only; `None` when neither stream has any.
    pub rho_c_window: Option<f64>,
    /// `|C̄1 ∩ C̄2| / |V1 ∩ V2|`; `None` when no node is shared.
    pub rho_c_common: Option<f64>,
}

pub fn integrate(s1: &StreamSummary, s2: &StreamSummary) -> Result<IntegrationResult> {
    let rho_v = node_correlation(s1, s2)?;
    let rho_c = community_correlation(s1, s2)?;
    let rho_c_window = overlap_ratio(&s1.window_union, &s2.window_union, "").ok();
    let common_nodes: BTreeSet<String> = s1.node_set.intersection(&s2.node_set).cloned().collect();
    let shared_communities = s1.community_union.intersection(&s2.community_union).count();
    let rho_c_common = (!common_nodes.is_empty()).then(|| shared_communities as f64 / common_nodes.len() as f64);
    Ok(IntegrationResult {
        v1_size: s1.node_set.len(),
        v2_size: s2.node_set.len(),
        common_nodes,
        communities_1: s1.snapshots.clone(),
        communities_2: s2.snapshots.clone(),
        rho_v,
        rho_c,
        rho_c_window,
        rho_c_common,
    })
}

/// Symmetric matrix of pairwise correlations with unit diagonal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    pub labels: Vec<String>,
    pub rho_v: Vec<Vec<f64>>,
    pub rho_c: Vec<Vec<Option<f64>>>,
}

impl CorrelationMatrix {
    /// One row per pair: `a,b,rho_v,rho_c` (empty `rho_c` when undefined).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("stream_a,stream_b,rho_v,rho_c\n");
        for (i, a) in self.labels.iter().enumerate() {
            for (j, b) in self.labels.iter().enumerate() {
                let c = self.rho_c[i][j].map(|v| v.to_string()).unwrap_or_default();
                out.push_str(&format!("{a},{b},{},{c}\n", self.rho_v[i][j]));
            }
        }
        out
    }
}

pub fn pairwise_matrix(labels: Vec<String>, summaries: &[StreamSummary]) -> Result<CorrelationMatrix> {
    let n = summaries.len();
    if labels.len() != n {
        return Err(Error::domain("labels", "one label per summary"));
    }
    let mut rho_v = vec![vec![1.0; n]; n];
    let mut rho_c = vec![vec![Some(1.0); n]; n];
    for i in 0..n {
        if summaries[i].community_union.is_empty() {
            rho_c[i][i] = None;
        }
        for j in (i + 1)..n {
            let v = node_correlation(&summaries[i], &summaries[j])?;
            let c = community_correlation(&summaries[i], &summaries[j]).ok();
            rho_v[i][j] = v;
            rho_v[j][i] = v;
            rho_c[i][j] = c;
            rho_c[j][i] = c;
        }
    }
    Ok(CorrelationMatrix { labels, rho_v, rho_c })
}

/// Node-set overlap ratio computed without the summaries, for oracles.
pub fn planted_overlap(a: &[String], b: &[String]) -> Option<f64> {
    let a: HashSet<&String> = a.iter().collect();
    let b: HashSet<&String> = b.iter().collect();
    let denom = a.len().max(b.len());
    (denom > 0).then(|| a.intersection(&b).count() as f64 / denom as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(v: &[&str]) -> BTreeSet<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    fn comp(nodes: &[&str]) -> Component {
        Component {
            id: nodes[0].to_string(),
            nodes: nodes.iter().map(|s| s.to_string()).collect(),
            edge_count: 0,
        }
    }

    fn summary(nodes: &[&str], window: &[&[&str]], global: &[&[&str]]) -> StreamSummary {
        StreamSummary::new(
            set(nodes),
            vec![CommunitySnapshot {
                at: 0,
                components: window.iter().map(|c| comp(c)).collect(),
            }],
            global.iter().map(|c| comp(c)).collect(),
        )
    }

    #[test]
    fn node_correlation_two_thirds() {
        let a = summary(&["a", "b", "c"], &[], &[]);
        let b = summary(&["b", "c", "d"], &[], &[]);
        assert!((node_correlation(&a, &b).unwrap() - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn empty_is_undefined_not_zero() {
        let e = summary(&[], &[], &[]);
        assert!(matches!(node_correlation(&e, &e), Err(Error::UndefinedCorrelation(_))));
        let a = summary(&["a"], &[], &[]);
        assert!(community_correlation(&a, &a).is_err());
        assert!(edge_correlation_oracle::<&str>(&[], &[]).is_err());
    }

    #[test]
    fn edge_oracle_half() {
        let r = edge_correlation_oracle(&[("a", "b"), ("b", "c")], &[("c", "b"), ("c", "d")]).unwrap();
        assert_eq!(r, 0.5);
    }

    #[test]
    fn integrate_identity_and_disjoint() {
        let a = summary(&["a", "b", "c", "x"], &[&["a", "b", "c"]], &[]);
        let r = integrate(&a, &a).unwrap();
        assert_eq!((r.rho_v, r.rho_c), (1.0, 1.0));
        assert_eq!(r.common_nodes, a.node_set);
        assert_eq!(r.rho_c_common, Some(0.75));

        let b = summary(&["p", "q", "r"], &[], &[&["p", "q", "r"]]);
        let r = integrate(&a, &b).unwrap();
        assert_eq!((r.rho_v, r.rho_c), (0.0, 0.0));
        assert!(r.common_nodes.is_empty());
        assert_eq!(r.rho_c_window, Some(0.0));
        assert_eq!(r.rho_c_common, None);
    }

    #[test]
    fn union_includes_global() {
        let a = summary(&["a", "b", "c", "d", "e", "f"], &[&["a", "b", "c"]], &[&["d", "e", "f"]]);
        assert_eq!(a.community_union.len(), 6);
        assert_eq!(a.window_union.len(), 3);
    }

    #[test]
    fn matrix_symmetric_unit_diagonal() {
        let s = vec![
            summary(&["a", "b", "c"], &[&["a", "b", "c"]], &[]),
            summary(&["b", "c", "d"], &[&["b", "c", "d"]], &[]),
            summary(&["x"], &[], &[]),
        ];
        let m = pairwise_matrix(vec!["s0".into(), "s1".into(), "s2".into()], &s).unwrap();
        for i in 0..3 {
            assert_eq!(m.rho_v[i][i], 1.0);
            for j in 0..3 {
                assert_eq!(m.rho_v[i][j], m.rho_v[j][i]);
                assert_eq!(m.rho_c[i][j], m.rho_c[j][i]);
            }
        }
        assert_eq!(m.rho_c[2][2], None);
        assert_eq!(m.rho_c[0][2], Some(0.0));
        assert!(m.to_csv().starts_with("stream_a,stream_b,rho_v,rho_c\ns0,s0,1,1\n"));
    }
}
