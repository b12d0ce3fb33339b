use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};

use proptest::prelude::*;
use streamint::genmodels::{gen_configuration, gen_gnp, gen_pa, majority_failures, pa_edge_count, DegreeDistribution};
use streamint::graphstream::{component_size_series, recompute_components, CommunitySnapshot, DcConfig, Edge};
use streamint::ingest::{tweet_to_edges, FilterConfig, TweetRecord};
use streamint::integrate::{self, pairwise_matrix, StreamSummary};
use streamint::olap::{estimate_density, exact_density, required_sample_size, DimensionSpec, Tuple};
use streamint::reservoir::{WindowConfig, WindowMode, WindowSampler};
use streamint::{Reservoir, RngSeed};

fn bfs(edges: &[(u8, u8)]) -> BTreeSet<Vec<String>> {
    let mut adj: BTreeMap<u8, Vec<u8>> = BTreeMap::new();
    for &(a, b) in edges {
        adj.entry(a).or_default().push(b);
        adj.entry(b).or_default().push(a);
    }
    let mut seen = HashSet::new();
    let mut out = BTreeSet::new();
    for &s in adj.keys() {
        if !seen.insert(s) {
            continue;
        }
        let mut comp = vec![s];
        let mut q = VecDeque::from([s]);
        while let Some(v) = q.pop_front() {
            for &w in &adj[&v] {
                if seen.insert(w) {
                    comp.push(w);
                    q.push_back(w);
                }
            }
        }
        let mut names: Vec<String> = comp.iter().map(|v| format!("n{v:02}")).collect();
        names.sort();
        out.insert(names);
    }
    out
}

fn summary(nodes: &BTreeSet<u8>, community: &BTreeSet<u8>) -> StreamSummary {
    let name = |v: &u8| format!("v{v}");
    let mut s = StreamSummary::new(nodes.iter().map(name).collect(), Vec::new(), Vec::new());
    s.community_union = community.iter().map(name).collect();
    s
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn reservoir_size_and_weight(k in 1usize..20, measures in prop::collection::vec(0.1f64..50.0, 0..200), seed in any::<u64>()) {
        let mut r = Reservoir::new(k, RngSeed(seed)).unwrap();
        for (i, &m) in measures.iter().enumerate() {
            r.offer_weighted(i, m).unwrap();
            prop_assert_eq!(r.len(), (i + 1).min(k));
        }
        let total: f64 = measures.iter().sum();
        prop_assert!((r.total_weight() - total).abs() <= 1e-9 * total.max(1.0));
        prop_assert_eq!(r.count_seen(), measures.len() as u64);
        let distinct: HashSet<usize> = r.payloads().copied().collect();
        prop_assert_eq!(distinct.len(), r.len());
    }

    #[test]
    fn inclusion_probability_is_clamped(k in 1usize..20, measures in prop::collection::vec(0.1f64..50.0, 1..50), probe in 0.1f64..100.0) {
        let mut r = Reservoir::new(k, RngSeed(1)).unwrap();
        for m in measures {
            r.offer_weighted((), m).unwrap();
        }
        let p = r.inclusion_probability(probe).unwrap();
        prop_assert!(p > 0.0 && p <= 1.0);
    }

    #[test]
    fn exact_window_holds_min_k_live(k in 1usize..8, len in 1i64..20, gaps in prop::collection::vec(0i64..4, 1..120), seed in any::<u64>()) {
        let mut w = WindowSampler::new(WindowConfig::new(k, len), RngSeed(seed)).unwrap();
        let mut ts = 0;
        let mut history = Vec::new();
        for (i, g) in gaps.into_iter().enumerate() {
            ts += g;
            w.offer(i, ts).unwrap();
            history.push(ts);
            let live = history.iter().filter(|&&t| ts - t < len).count();
            prop_assert_eq!(w.len(), live.min(k));
            for e in w.entries() {
                prop_assert!(ts - e.timestamp < len);
            }
        }
    }

    #[test]
    fn compat_window_is_live_and_bounded(k in 1usize..8, len in 1i64..20, gaps in prop::collection::vec(0i64..4, 1..120), seed in any::<u64>()) {
        let mut cfg = WindowConfig::new(k, len);
        cfg.mode = WindowMode::Compat;
        let mut w = WindowSampler::new(cfg, RngSeed(seed)).unwrap();
        let mut ts = 0;
        for (i, g) in gaps.into_iter().enumerate() {
            ts += g;
            w.offer(i, ts).unwrap();
            prop_assert!(w.len() <= k);
            prop_assert!(w.entries().iter().all(|e| ts - e.timestamp < len));
        }
    }

    #[test]
    fn components_partition_matches_bfs(edges in prop::collection::vec((0u8..30, 0u8..30), 0..50)) {
        let named: Vec<(String, String)> = edges.iter().map(|(a, b)| (format!("n{a:02}"), format!("n{b:02}"))).collect();
        let set = recompute_components(named.iter().map(|(a, b)| (a.as_str(), b.as_str())));
        let got: BTreeSet<Vec<String>> = set.iter().map(|c| c.nodes.clone()).collect();
        prop_assert_eq!(&got, &bfs(&edges));
        let total: usize = set.iter().map(|c| c.size()).sum();
        let endpoints: HashSet<&String> = named.iter().flat_map(|(a, b)| [a, b]).collect();
        prop_assert_eq!(total, endpoints.len());
        for c in set.iter() {
            prop_assert_eq!(&c.id, &c.nodes[0]);
        }
    }

    #[test]
    fn configuration_model_is_exact(counts in prop::collection::vec(0u64..6, 1..8), seed in any::<u64>()) {
        let mut counts = counts;
        let half: u64 = counts.iter().enumerate().map(|(i, d)| (i as u64 + 1) * d).sum();
        if half % 2 == 1 {
            counts[0] += 1;
        }
        let delta = DegreeDistribution::new(counts).unwrap();
        let (g, _) = gen_configuration(&delta, false, &mut RngSeed(seed).rng()).unwrap();
        prop_assert_eq!(g.edges.len(), delta.edge_count());
        prop_assert_eq!(g.degree_multiset(), delta.degree_sequence());
    }

    #[test]
    fn concentrated_output_satisfies_majority(m in 20u64..1500, seed in any::<u64>()) {
        let delta = DegreeDistribution::power_law(m).unwrap();
        if let Ok((g, report)) = gen_configuration(&delta, true, &mut RngSeed(seed).rng()) {
            prop_assert!(report.satisfied);
            prop_assert_eq!(majority_failures(g.n, &g.edges, &g.planted[0]), 0);
            prop_assert_eq!(g.degree_multiset(), delta.degree_sequence());
        }
    }

    #[test]
    fn random_graph_counts(n in 2usize..40, m in 1usize..4, seed in any::<u64>()) {
        let g = gen_gnp(n, 1.0, &mut RngSeed(seed).rng()).unwrap();
        prop_assert_eq!(g.edges.len(), n * (n - 1) / 2);
        if n > m {
            let g = gen_pa(n, m, &mut RngSeed(seed).rng()).unwrap();
            prop_assert_eq!(g.edges.len(), pa_edge_count(n, m));
            let distinct: HashSet<(u32, u32)> = g.edges.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
            prop_assert_eq!(distinct.len(), g.edges.len());
        }
    }

    #[test]
    fn correlations_are_symmetric_and_bounded(
        a in prop::collection::btree_set(0u8..40, 1..30),
        b in prop::collection::btree_set(0u8..40, 1..30),
        ca in prop::collection::btree_set(0u8..40, 1..10),
        cb in prop::collection::btree_set(0u8..40, 1..10),
    ) {
        let (s1, s2) = (summary(&a, &ca), summary(&b, &cb));
        for (x, y) in [
            (integrate::node_correlation(&s1, &s2).unwrap(), integrate::node_correlation(&s2, &s1).unwrap()),
            (integrate::community_correlation(&s1, &s2).unwrap(), integrate::community_correlation(&s2, &s1).unwrap()),
        ] {
            prop_assert_eq!(x, y);
            prop_assert!((0.0..=1.0).contains(&x));
        }
        prop_assert_eq!(integrate::node_correlation(&s1, &s1).unwrap(), 1.0);
        let m = pairwise_matrix(vec!["a".into(), "b".into()], &[s1, s2]).unwrap();
        prop_assert_eq!(m.rho_v[0][1], m.rho_v[1][0]);
        prop_assert_eq!(m.rho_v[0][0], 1.0);
    }

    #[test]
    fn edge_oracle_collapses_direction(edges in prop::collection::vec((0u8..10, 0u8..10), 1..20)) {
        let fwd: Vec<(String, String)> = edges.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect();
        let rev: Vec<(String, String)> = edges.iter().map(|(a, b)| (b.to_string(), a.to_string())).collect();
        prop_assert_eq!(integrate::edge_correlation_oracle(&fwd, &rev).unwrap(), 1.0);
    }

    #[test]
    fn densities_sum_to_one(rows in prop::collection::vec((0usize..3, 0.5f64..10.0), 1..100), seed in any::<u64>()) {
        let dim = DimensionSpec::new("C", ["x", "y", "z"]).unwrap();
        let names = ["x", "y", "z"];
        let tuples: Vec<Tuple> = rows.iter().map(|&(v, m)| Tuple::new([("C", names[v])], m)).collect();
        let exact = exact_density(tuples.clone(), &dim).unwrap();
        prop_assert!((exact.densities.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        let est = estimate_density(tuples, &dim, 7, RngSeed(seed)).unwrap();
        prop_assert!((est.densities.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn unit_measures_with_large_k_are_exact(rows in prop::collection::vec(0usize..3, 1..60), seed in any::<u64>()) {
        let dim = DimensionSpec::new("C", ["x", "y", "z"]).unwrap();
        let names = ["x", "y", "z"];
        let tuples: Vec<Tuple> = rows.iter().map(|&v| Tuple::new([("C", names[v])], 1.0)).collect();
        let exact = exact_density(tuples.clone(), &dim).unwrap();
        let est = estimate_density(tuples, &dim, rows.len(), RngSeed(seed)).unwrap();
        prop_assert!(exact.l1_distance(&est) < 1e-12);
    }

    #[test]
    fn sample_size_grows_as_epsilon_shrinks(card in 1usize..10, e1 in 0.01f64..0.5, d in 0.001f64..0.5) {
        let e2 = e1 / 2.0;
        prop_assert!(required_sample_size(card, e2, d).unwrap() >= required_sample_size(card, e1, d).unwrap());
    }

    #[test]
    fn tweet_edge_count(sender in 0u8..5, tags in prop::collection::vec(0u8..8, 0..6), excluded in prop::collection::btree_set(0u8..8, 0..3)) {
        let name = |v: u8| if v < 5 { format!("@u{v}") } else { format!("#T{v}") };
        let r = TweetRecord { sender: name(sender), tags: tags.iter().map(|&t| name(t)).collect(), timestamp: 0 };
        let f = FilterConfig::excluding(excluded.iter().map(|&t| name(t)));
        let expected = tags.iter().filter(|&&t| t != sender && !excluded.contains(&t)).count();
        prop_assert_eq!(tweet_to_edges(&r, &f).len(), expected);
    }

    #[test]
    fn series_has_a_point_per_component(sizes in prop::collection::vec(prop::collection::vec(3usize..6, 0..4), 1..6)) {
        let snapshots: Vec<CommunitySnapshot> = sizes
            .iter()
            .enumerate()
            .map(|(t, comps)| {
                let mut next = 0;
                let components = comps
                    .iter()
                    .map(|&s| {
                        let nodes: Vec<String> = (next..next + s).map(|v| format!("v{v:03}")).collect();
                        next += s;
                        streamint::Component { id: nodes[0].clone(), nodes, edge_count: 0 }
                    })
                    .collect();
                CommunitySnapshot { at: t as i64, components }
            })
            .collect();
        let series = component_size_series(&snapshots);
        prop_assert_eq!(series.len(), sizes.iter().map(Vec::len).sum::<usize>());
    }

    #[test]
    fn detection_never_exceeds_two_k(k in 1usize..10, edges in prop::collection::vec((0u8..15, 0u8..15, 0i64..5), 1..150), seed in any::<u64>()) {
        let cfg = DcConfig { k, c: 1, tau: 10, window_length: 10, ..DcConfig::default() };
        let mut state = streamint::EdgeStreamState::new(cfg, RngSeed(seed)).unwrap();
        let mut ts = 0;
        for (a, b, gap) in edges {
            ts += gap;
            state.ingest(&Edge::new(a.to_string(), b.to_string(), ts)).unwrap();
            prop_assert!(state.retained_edge_count() <= 2 * k);
        }
        let out = state.finalize();
        for s in &out.snapshots {
            prop_assert!(s.components.iter().all(|c| c.size() >= 3));
        }
    }
}
