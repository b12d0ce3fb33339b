use std::collections::{HashMap, HashSet};
use std::hash::Hash;

use serde::{Deserialize, Serialize};

/// Disjoint-set forest with union by size and path halving.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false if `a` and `b` were already joined.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        true
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }
}

/// Connected components of the multigraph on `edges`: each group's nodes and
/// its number of distinct undirected edges. Loops count as edges of their node.
pub fn group_components<N>(edges: &[(N, N)]) -> Vec<(Vec<N>, usize)>
where
    N: Hash + Eq + Copy,
{
    let mut local: HashMap<N, usize> = HashMap::new();
    let mut nodes: Vec<N> = Vec::new();
    let mut idx = |n: N, nodes: &mut Vec<N>| {
        *local.entry(n).or_insert_with(|| {
            nodes.push(n);
            nodes.len() - 1
        })
    };
    let pairs: Vec<(usize, usize)> = edges
        .iter()
        .map(|&(a, b)| (idx(a, &mut nodes), idx(b, &mut nodes)))
        .collect();
    let mut uf = UnionFind::new(nodes.len());
    for &(a, b) in &pairs {
        uf.union(a, b);
    }
    let mut slot_of_root: HashMap<usize, usize> = HashMap::new();
    let mut groups: Vec<(Vec<N>, usize)> = Vec::new();
    for (i, &n) in nodes.iter().enumerate() {
        let root = uf.find(i);
        let slot = *slot_of_root.entry(root).or_insert_with(|| {
            groups.push((Vec::new(), 0));
            groups.len() - 1
        });
        groups[slot].0.push(n);
    }
    let mut distinct: HashSet<(usize, usize)> = HashSet::new();
    for &(a, b) in &pairs {
        if distinct.insert((a.min(b), a.max(b))) {
            let root = uf.find(a);
            groups[slot_of_root[&root]].1 += 1;
        }
    }
    groups
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Component {
    /// Lexicographically smallest member.
    pub id: String,
    /// Sorted.
    pub nodes: Vec<String>,
    pub edge_count: usize,
}

impl Component {
    pub fn size(&self) -> usize {
        self.nodes.len()
    }
}

/// Partition of the endpoints of a set of retained edges, sorted by component id.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentSet {
    pub components: Vec<Component>,
}

impl ComponentSet {
    pub fn from_groups<N, F>(groups: Vec<(Vec<N>, usize)>, mut name: F) -> Self
    where
        F: FnMut(N) -> String,
    {
        let mut components: Vec<Component> = groups
            .into_iter()
            .map(|(nodes, edge_count)| {
                let mut nodes: Vec<String> = nodes.into_iter().map(&mut name).collect();
                nodes.sort_unstable();
                Component {
                    id: nodes[0].clone(),
                    nodes,
                    edge_count,
                }
            })
            .collect();
        components.sort_unstable_by(|a, b| a.id.cmp(&b.id));
        ComponentSet { components }
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Component> {
        self.components.iter()
    }

    /// Components with at least `h` nodes.
    pub fn at_least(&self, h: usize) -> Vec<Component> {
        self.components.iter().filter(|c| c.size() >= h).cloned().collect()
    }

    pub fn node_count(&self) -> usize {
        self.components.iter().map(Component::size).sum()
    }
}

/// Exact connected components of the retained edges (duplicates collapse).
pub fn recompute_components<'a, I>(edges: I) -> ComponentSet
where
    I: IntoIterator<Item = (&'a str, &'a str)>,
{
    let edges: Vec<(&str, &str)> = edges.into_iter().collect();
    ComponentSet::from_groups(group_components(&edges), str::to_string)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangle_is_one_component() {
        let set = recompute_components([("a", "b"), ("b", "c"), ("c", "a")]);
        assert_eq!(set.len(), 1);
        assert_eq!(set.components[0].nodes, vec!["a", "b", "c"]);
        assert_eq!(set.components[0].edge_count, 3);
    }

    #[test]
    fn empty_and_split() {
        assert!(recompute_components(std::iter::empty()).is_empty());
        let set = recompute_components([("1", "2"), ("2", "3"), ("4", "5")]);
        let ids: Vec<_> = set.iter().map(|c| (c.id.as_str(), c.size())).collect();
        assert_eq!(ids, vec![("1", 3), ("4", 2)]);
    }

    #[test]
    fn duplicates_collapse() {
        let set = recompute_components([("x", "y"), ("y", "x"), ("x", "y")]);
        assert_eq!(set.components[0].edge_count, 1);
        assert_eq!(set.at_least(3).len(), 0);
        assert_eq!(set.at_least(2).len(), 1);
    }

    #[test]
    fn union_find_basics() {
        let mut uf = UnionFind::new(5);
        assert!(uf.union(0, 1));
        assert!(uf.union(3, 4));
        assert!(!uf.union(1, 0));
        assert_eq!(uf.find(0), uf.find(1));
        assert_ne!(uf.find(0), uf.find(3));
        assert!(uf.union(1, 4));
        assert_eq!(uf.find(0), uf.find(3));
        assert_eq!(uf.len(), 5);
    }
}
