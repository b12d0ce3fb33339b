use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::CommunitySnapshot;

/// One point of a component-size time series.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeriesPoint {
    pub at: i64,
    pub lineage: usize,
    pub component_id: String,
    pub size: usize,
}

/// Links components across consecutive snapshots into lineages.
///
/// Matching is greedy and one-to-one: candidate (child, parent) pairs are
/// taken by decreasing node overlap, ties going to the smaller parent id and
/// then the smaller child id. A child left without a parent opens a new lineage.
pub fn component_size_series(snapshots: &[CommunitySnapshot]) -> Vec<SeriesPoint> {
    let mut out = Vec::new();
    let mut next_lineage = 0usize;
    let mut prev: Vec<(usize, HashSet<&str>, &str)> = Vec::new();

    for snap in snapshots {
        let children: Vec<(HashSet<&str>, &str)> = snap
            .components
            .iter()
            .map(|c| (c.nodes.iter().map(String::as_str).collect(), c.id.as_str()))
            .collect();

        let mut pairs: Vec<(usize, &str, &str, usize, usize)> = Vec::new();
        for (ci, (cnodes, cid)) in children.iter().enumerate() {
            for (pi, (_, pnodes, pid)) in prev.iter().enumerate() {
                let overlap = cnodes.intersection(pnodes).count();
                if overlap > 0 {
                    pairs.push((overlap, pid, cid, ci, pi));
                }
            }
        }
        pairs.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(b.1)).then(a.2.cmp(b.2)));

        let mut child_lineage: Vec<Option<usize>> = vec![None; children.len()];
        let mut parent_taken = vec![false; prev.len()];
        for &(_, _, _, ci, pi) in &pairs {
            if child_lineage[ci].is_none() && !parent_taken[pi] {
                child_lineage[ci] = Some(prev[pi].0);
                parent_taken[pi] = true;
            }
        }

        let mut current = Vec::with_capacity(children.len());
        for (ci, (nodes, id)) in children.into_iter().enumerate() {
            let lineage = child_lineage[ci].unwrap_or_else(|| {
                next_lineage += 1;
                next_lineage - 1
            });
            out.push(SeriesPoint {
                at: snap.at,
                lineage,
                component_id: id.to_string(),
                size: nodes.len(),
            });
            current.push((lineage, nodes, id));
        }
        prev = current;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphstream::Component;

    fn comp(nodes: &[&str]) -> Component {
        let mut nodes: Vec<String> = nodes.iter().map(|s| s.to_string()).collect();
        nodes.sort();
        Component {
            id: nodes[0].clone(),
            nodes,
            edge_count: 0,
        }
    }

    fn snap(at: i64, comps: &[&[&str]]) -> CommunitySnapshot {
        let mut components: Vec<Component> = comps.iter().map(|c| comp(c)).collect();
        components.sort_by(|a, b| a.id.cmp(&b.id));
        CommunitySnapshot { at, components }
    }

    #[test]
    fn single_snapshot_fresh_lineages() {
        let s = component_size_series(&[snap(0, &[&["a", "b", "c"], &["x", "y", "z", "w"]])]);
        assert_eq!(s.iter().map(|p| p.lineage).collect::<Vec<_>>(), vec![0, 1]);
        assert_eq!(s[1].size, 4);
    }

    #[test]
    fn identical_snapshots_continue() {
        let one = snap(0, &[&["a", "b", "c"], &["d", "e", "f"]]);
        let two = CommunitySnapshot { at: 900, ..one.clone() };
        let s = component_size_series(&[one, two]);
        assert_eq!(
            s.iter().map(|p| (p.at, p.lineage, p.size)).collect::<Vec<_>>(),
            vec![(0, 0, 3), (0, 1, 3), (900, 0, 3), (900, 1, 3)]
        );
    }

    #[test]
    fn merge_inherits_larger_overlap_parent() {
        // s0: {a,b,c} (lineage 0), {d,e,f,g} (lineage 1)
        // s1: {a..g} overlaps lineage 0 by 3 and lineage 1 by 4 -> lineage 1
        // s2: {a,b,c} splits back off; the big parent goes to the larger overlap {d..g}
        let s = component_size_series(&[
            snap(0, &[&["a", "b", "c"], &["d", "e", "f", "g"]]),
            snap(1, &[&["a", "b", "c", "d", "e", "f", "g"]]),
            snap(2, &[&["a", "b", "c"], &["d", "e", "f", "g"]]),
        ]);
        let got: Vec<_> = s.iter().map(|p| (p.at, p.component_id.as_str(), p.lineage, p.size)).collect();
        assert_eq!(
            got,
            vec![
                (0, "a", 0, 3),
                (0, "d", 1, 4),
                (1, "a", 1, 7),
                (2, "a", 2, 3),
                (2, "d", 1, 4),
            ]
        );
    }

    #[test]
    fn equal_overlap_ties_go_to_smaller_parent_id() {
        let s = component_size_series(&[
            snap(0, &[&["a", "b", "c"], &["d", "e", "f"]]),
            snap(1, &[&["a", "b", "c", "d", "e", "f"]]),
        ]);
        assert_eq!(s[2].lineage, 0);
    }

    #[test]
    fn disappearing_and_new_components() {
        let s = component_size_series(&[
            snap(0, &[&["a", "b", "c"]]),
            snap(1, &[]),
            snap(2, &[&["a", "b", "c"]]),
        ]);
        assert_eq!(s.len(), 2);
        assert_eq!(s[1].lineage, 1);
    }
}
