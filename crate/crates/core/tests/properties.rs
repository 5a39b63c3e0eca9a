use std::cmp::Ordering;

use proptest::prelude::*;

use subclique::baseline::{
    census_naive, clique_upper_bound, count_cliques_exact, enumerate_tuples, unassigned_clique_mass,
};
use subclique::params::factorial;
use subclique::sampler::AliasTable;
use subclique::{load_edge_list, Graph, LoopPolicy, Params, VertexId};

fn graph(max_n: usize) -> impl Strategy<Value = Graph> {
    (1..=max_n).prop_flat_map(|n| {
        let pairs = n * (n - 1) / 2;
        (Just(n), proptest::collection::vec(any::<bool>(), pairs))
    })
    .prop_map(|(n, mask)| {
        let mut edges = Vec::new();
        let mut i = 0;
        for u in 0..n as VertexId {
            for v in u + 1..n as VertexId {
                if mask[i] {
                    edges.push((u, v));
                }
                i += 1;
            }
        }
        Graph::from_edges(n, edges).unwrap()
    })
}

proptest! {
    #[test]
    fn degrees_sum_to_ordered_edges(g in graph(50)) {
        let total: usize = g.vertices().map(|v| g.degree(v)).sum();
        prop_assert_eq!(total, g.m());
        prop_assert_eq!(g.m(), 2 * g.undirected_edge_count());
    }

    #[test]
    fn adjacency_is_symmetric(g in graph(30)) {
        for u in g.vertices() {
            for v in g.vertices() {
                prop_assert_eq!(g.has_edge(u, v), g.has_edge(v, u));
            }
            for &w in g.neighbors(u) {
                prop_assert!(g.neighbors(w).contains(&u));
            }
        }
    }

    #[test]
    fn degree_order_is_total(g in graph(50)) {
        let mut sorted: Vec<VertexId> = g.vertices().collect();
        sorted.sort_by(|&a, &b| g.order_cmp(a, b));
        for w in sorted.windows(2) {
            prop_assert_eq!(g.order_cmp(w[0], w[1]), Ordering::Less);
            prop_assert_eq!(g.order_cmp(w[1], w[0]), Ordering::Greater);
            prop_assert!(g.degree(w[0]) <= g.degree(w[1]));
        }
        for v in g.vertices() {
            prop_assert_eq!(g.order_cmp(v, v), Ordering::Equal);
        }
    }

    #[test]
    fn exact_matches_brute_force(g in graph(13), k in 3usize..=5) {
        let fast = count_cliques_exact(&g, k).unwrap();
        prop_assert_eq!(&fast, &census_naive(&g, k).unwrap());
        prop_assert!(fast.total as f64 <= clique_upper_bound(g.m(), k) + 1e-9);
        prop_assert_eq!(fast.per_vertex.iter().sum::<u64>(), k as u64 * fast.total);
    }

    #[test]
    fn each_clique_yields_the_expected_tuples(g in graph(11), k in 3usize..=4) {
        let members: Vec<VertexId> = g.vertices().collect();
        let tuples = enumerate_tuples(&g, &members, k).unwrap();
        let census = count_cliques_exact(&g, k).unwrap();
        prop_assert_eq!(tuples.len() as f64, (k as u64 * census.total) as f64 * factorial(k - 2));
        for t in &tuples {
            for &w in &t.w {
                prop_assert_eq!(g.order_cmp(t.v, w), Ordering::Less);
            }
        }
    }

    #[test]
    fn assignment_partitions_the_cliques(g in graph(14), k in 3usize..=4, mask in any::<u16>()) {
        let popular = |u: VertexId| mask >> (u % 16) & 1 == 1;
        let census = unassigned_clique_mass(&g, k, popular).unwrap();
        let exact = count_cliques_exact(&g, k).unwrap();
        prop_assert_eq!(census.total, exact.total);
        prop_assert_eq!(census.assigned() + census.unassigned, exact.total);
        for u in g.vertices() {
            prop_assert!(census.per_vertex[u as usize] <= exact.per_vertex[u as usize]);
            if popular(u) {
                prop_assert_eq!(census.per_vertex[u as usize], 0);
            }
        }
        let none = unassigned_clique_mass(&g, k, |_| false).unwrap();
        prop_assert_eq!(none.unassigned, 0);
    }

    #[test]
    fn alias_probabilities_are_exact(weights in proptest::collection::vec(0u64..1000, 1..40)) {
        let total: u64 = weights.iter().sum();
        match AliasTable::new(&weights) {
            None => prop_assert_eq!(total, 0),
            Some(table) => {
                let mut sum = 0u128;
                for (i, &w) in weights.iter().enumerate() {
                    let (num, den) = table.probability(i);
                    prop_assert_eq!(num * total as u128, w as u128 * den);
                    sum += num;
                    prop_assert_eq!(den, weights.len() as u128 * total as u128);
                }
                prop_assert_eq!(sum, weights.len() as u128 * total as u128);
            }
        }
    }

    #[test]
    fn edge_list_round_trips(g in graph(40)) {
        let mut buf = Vec::new();
        g.write_edge_list(&mut buf).unwrap();
        let back = load_edge_list(buf.as_slice(), LoopPolicy::Reject).unwrap();
        prop_assert_eq!(back, g);
    }

    #[test]
    fn derived_parameters(
        n in 1usize..5000,
        k in 3usize..=6,
        m_bar in 1.0f64..1e6,
        guess_frac in 0.0f64..1.0,
        eps in 0.01f64..0.99,
        delta in 0.01f64..0.99,
    ) {
        let ck_bar = 1.0 + guess_frac * (m_bar.powf(k as f64 / 2.0) - 1.0);
        let p = Params::derive(n, k, m_bar, ck_bar, eps, delta, 0).unwrap();
        let kf = k as f64;
        prop_assert!((p.eps_bar - eps / 5.0).abs() < 1e-15);
        prop_assert!((p.delta_bar - delta / 4.0).abs() < 1e-15);
        prop_assert!((p.theta * p.theta / (4.0 * m_bar) - 1.0).abs() < 1e-12);
        let tau_c = 32.0 * kf * ck_bar.powf(1.0 - 1.0 / kf) / p.eps_bar.powf(1.0 / kf);
        prop_assert!((p.tau_c / tau_c - 1.0).abs() < 1e-12);
        let tau_d = 4.0 * m_bar / (p.eps_bar * ck_bar).powf(1.0 / kf);
        prop_assert!((p.tau_d / tau_d - 1.0).abs() < 1e-12);
        prop_assert!((1..=n).contains(&p.s));
        prop_assert!((1..=n).contains(&p.t));
        prop_assert!(p.gamma <= p.delta_bar && p.gamma > 0.0);
        prop_assert!(p.typical_attempts >= 1);
    }

    #[test]
    fn oversized_guess_is_rejected(m_bar in 1.0f64..1e4, k in 3usize..=5) {
        let limit = m_bar.powf(k as f64 / 2.0);
        prop_assert!(Params::derive(10, k, m_bar, limit * 1.01 + 1.0, 0.5, 0.1, 0).is_err());
    }
}
