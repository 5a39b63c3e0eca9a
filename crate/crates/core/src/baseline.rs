//! Exact clique counting, brute-force cross-checks, instance generators,
//! and full-access verification oracles for the sampled structures.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::clique_sampler::CliqueTuple;
use crate::graph::{Graph, VertexId};
use crate::params::Params;
use crate::typical::TypicalSet;

/// Default cap on search-tree nodes for the exact enumerator.
pub const DEFAULT_NODE_BUDGET: u64 = 2_000_000_000;

/// Largest `n` the brute-force subset counter accepts.
pub const NAIVE_MAX_N: usize = 30;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BaselineError {
    #[error("clique size must be at least 2 (got {0})")]
    CliqueSize(usize),
    #[error("brute force refused: n = {n} exceeds {limit}")]
    TooLarge { n: usize, limit: usize },
    #[error("enumeration exceeded the node budget of {0}")]
    Budget(u64),
    #[error("clique of size {t} does not fit in {n} vertices")]
    CliqueTooBig { t: usize, n: usize },
    #[error("{edges} edges requested but at most {max} fit in a simple graph")]
    Overfull { edges: usize, max: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CliqueCensus {
    pub k: usize,
    pub total: u64,
    /// `c_k(u)` for every vertex.
    pub per_vertex: Vec<u64>,
}

/// Degree-ordered enumeration: orient every edge from the ≺-smaller end,
/// then grow cliques inside intersected out-neighbor lists. Every clique is
/// reached exactly once, from its ≺-smallest vertex.
pub fn for_each_clique<F>(graph: &Graph, k: usize, node_budget: u64, mut visit: F) -> Result<u64, BaselineError>
where
    F: FnMut(&[VertexId]),
{
    if k < 2 {
        return Err(BaselineError::CliqueSize(k));
    }
    let out: Vec<Vec<VertexId>> = graph
        .vertices()
        .map(|v| {
            graph
                .neighbors(v)
                .iter()
                .copied()
                .filter(|&w| graph.order_cmp(v, w).is_lt())
                .collect()
        })
        .collect();

    struct Walk<'a, F> {
        out: &'a [Vec<VertexId>],
        stack: Vec<VertexId>,
        nodes: u64,
        budget: u64,
        found: u64,
        visit: F,
    }

    impl<F: FnMut(&[VertexId])> Walk<'_, F> {
        fn grow(&mut self, cand: &[VertexId], remaining: usize) -> Result<(), BaselineError> {
            self.nodes += 1;
            if self.nodes > self.budget {
                return Err(BaselineError::Budget(self.budget));
            }
            if remaining == 1 {
                for &c in cand {
                    self.stack.push(c);
                    (self.visit)(&self.stack);
                    self.stack.pop();
                    self.found += 1;
                }
                return Ok(());
            }
            if cand.len() < remaining {
                return Ok(());
            }
            let mut next = Vec::with_capacity(cand.len());
            for &c in cand {
                intersect_sorted(cand, &self.out[c as usize], &mut next);
                if next.len() + 1 >= remaining {
                    self.stack.push(c);
                    let owned = std::mem::take(&mut next);
                    self.grow(&owned, remaining - 1)?;
                    next = owned;
                    self.stack.pop();
                }
            }
            Ok(())
        }
    }

    let mut walk = Walk {
        out: &out,
        stack: Vec::with_capacity(k),
        nodes: 0,
        budget: node_budget,
        found: 0,
        visit: &mut visit,
    };
    for v in graph.vertices() {
        walk.stack.push(v);
        walk.grow(&out[v as usize], k - 1)?;
        walk.stack.pop();
    }
    Ok(walk.found)
}

fn intersect_sorted(a: &[VertexId], b: &[VertexId], into: &mut Vec<VertexId>) {
    into.clear();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                into.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
}

pub fn count_cliques_exact(graph: &Graph, k: usize) -> Result<CliqueCensus, BaselineError> {
    count_cliques_exact_with_budget(graph, k, DEFAULT_NODE_BUDGET)
}

pub fn count_cliques_exact_with_budget(
    graph: &Graph,
    k: usize,
    node_budget: u64,
) -> Result<CliqueCensus, BaselineError> {
    let mut per_vertex = vec![0u64; graph.n()];
    let total = for_each_clique(graph, k, node_budget, |clique| {
        for &x in clique {
            per_vertex[x as usize] += 1;
        }
    })?;
    Ok(CliqueCensus { k, total, per_vertex })
}

/// Every vertex subset of size `k`, checked pair by pair.
pub fn count_cliques_naive(graph: &Graph, k: usize) -> Result<u64, BaselineError> {
    Ok(list_cliques_naive(graph, k)?.len() as u64)
}

/// All k-cliques as ascending vertex lists, by exhaustive subset search.
pub fn list_cliques_naive(graph: &Graph, k: usize) -> Result<Vec<Vec<VertexId>>, BaselineError> {
    if k < 2 {
        return Err(BaselineError::CliqueSize(k));
    }
    if graph.n() > NAIVE_MAX_N {
        return Err(BaselineError::TooLarge {
            n: graph.n(),
            limit: NAIVE_MAX_N,
        });
    }
    fn choose(graph: &Graph, start: VertexId, k: usize, pick: &mut Vec<VertexId>, out: &mut Vec<Vec<VertexId>>) {
        if pick.len() == k {
            let clique = pick
                .iter()
                .enumerate()
                .all(|(i, &a)| pick[i + 1..].iter().all(|&b| graph.has_edge(a, b)));
            if clique {
                out.push(pick.clone());
            }
            return;
        }
        for v in start..graph.n() as VertexId {
            pick.push(v);
            choose(graph, v + 1, k, pick, out);
            pick.pop();
        }
    }
    let mut out = Vec::new();
    choose(graph, 0, k, &mut Vec::with_capacity(k), &mut out);
    Ok(out)
}

/// `c_k(u)` for every vertex by brute force.
pub fn census_naive(graph: &Graph, k: usize) -> Result<CliqueCensus, BaselineError> {
    let cliques = list_cliques_naive(graph, k)?;
    let mut per_vertex = vec![0u64; graph.n()];
    for c in &cliques {
        for &x in c {
            per_vertex[x as usize] += 1;
        }
    }
    Ok(CliqueCensus {
        k,
        total: cliques.len() as u64,
        per_vertex,
    })
}

/// `C(S)` for the distinct members of `members`, by brute force: for each
/// clique through `u`, `v` is the ≺-first of the other vertices and the
/// remaining `k-2` appear in every order.
pub fn enumerate_tuples(graph: &Graph, members: &[VertexId], k: usize) -> Result<Vec<CliqueTuple>, BaselineError> {
    let cliques = list_cliques_naive(graph, k)?;
    let mut distinct: Vec<VertexId> = members.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    let mut tuples = Vec::new();
    for &u in &distinct {
        for clique in cliques.iter().filter(|c| c.contains(&u)) {
            let mut rest: Vec<VertexId> = clique.iter().copied().filter(|&x| x != u).collect();
            rest.sort_by(|&a, &b| graph.order_cmp(a, b));
            let v = rest[0];
            for perm in permutations(&rest[1..]) {
                tuples.push(CliqueTuple { u, v, w: perm });
            }
        }
    }
    Ok(tuples)
}

fn permutations(items: &[VertexId]) -> Vec<Vec<VertexId>> {
    if items.is_empty() {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, head);
            out.push(tail);
        }
    }
    out
}

/// `m·binom(⌈√m⌉, k-2)`, an upper bound on `C_k` for `m` ordered edges.
pub fn clique_upper_bound(m: usize, k: usize) -> f64 {
    let root = (m as f64).sqrt().ceil();
    m as f64 * binomial(root, k.saturating_sub(2))
}

pub fn binomial(n: f64, r: usize) -> f64 {
    (0..r).map(|i| (n - i as f64) / (i + 1) as f64).product::<f64>().max(0.0)
}

/// A complete graph on vertices `0..t` and a path on `t..n`.
pub fn gen_path_plus_clique(n: usize, t: usize) -> Result<Graph, BaselineError> {
    if t > n {
        return Err(BaselineError::CliqueTooBig { t, n });
    }
    let t32 = t as VertexId;
    let mut edges = Vec::new();
    for a in 0..t32 {
        for b in a + 1..t32 {
            edges.push((a, b));
        }
    }
    for v in t32..(n as VertexId).saturating_sub(1) {
        edges.push((v, v + 1));
    }
    Ok(Graph::from_edges(n, edges).expect("generated edges are valid"))
}

/// Uniform simple graph with exactly `edges` undirected edges.
pub fn gen_gnm(n: usize, edges: usize, seed: u64) -> Result<Graph, BaselineError> {
    let max = n * n.saturating_sub(1) / 2;
    if edges > max {
        return Err(BaselineError::Overfull { edges, max });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Sample the sparser of the graph and its complement.
    let want = edges.min(max - edges);
    let mut chosen: HashSet<(VertexId, VertexId)> = HashSet::with_capacity(want);
    while chosen.len() < want {
        let a = rng.gen_range(0..n) as VertexId;
        let b = rng.gen_range(0..n) as VertexId;
        if a != b {
            chosen.insert((a.min(b), a.max(b)));
        }
    }
    let list: Vec<(VertexId, VertexId)> = if want == edges {
        chosen.into_iter().collect()
    } else {
        let mut all = Vec::with_capacity(edges);
        for a in 0..n as VertexId {
            for b in a + 1..n as VertexId {
                if !chosen.contains(&(a, b)) {
                    all.push((a, b));
                }
            }
        }
        all
    };
    Ok(Graph::from_edges(n, list).expect("generated edges are valid"))
}

/// Full-access check that `T` is degrees-typical: `m(T) ≤ (t/n)·4m̄` and
/// every `w` with `d(w) > θ` has `d_T(w)` within `(1 ± ε̄/k)·(t/n)·d(w)`.
pub fn verify_degrees_typical(graph: &Graph, typical: &TypicalSet, params: &Params) -> bool {
    let t = typical.size();
    let ratio = t as f64 / graph.n() as f64;
    if typical.m_of() as f64 > params.typical_edge_bound(t) {
        return false;
    }
    let mut mult = vec![0u64; graph.n()];
    for &x in typical.multiset().members() {
        mult[x as usize] += 1;
    }
    let slack = params.eps_bar / params.k as f64;
    graph.vertices().all(|w| {
        let d = graph.degree(w) as f64;
        if d <= params.theta {
            return true;
        }
        let d_t: u64 = graph.neighbors(w).iter().map(|&x| mult[x as usize]).sum();
        let expected = ratio * d;
        (d_t as f64 - expected).abs() <= slack * expected + 1e-9
    })
}

/// Clique assignment under a popular/unpopular split.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AssignmentCensus {
    pub total: u64,
    /// Cliques whose vertices are all popular.
    pub unassigned: u64,
    /// `α_P(u)`: cliques whose ≺-first unpopular vertex is `u`.
    pub per_vertex: Vec<u64>,
}

impl AssignmentCensus {
    pub fn assigned(&self) -> u64 {
        self.per_vertex.iter().sum()
    }

    /// `α_P(S)` with multiplicity.
    pub fn of_multiset(&self, members: &[VertexId]) -> u64 {
        members.iter().map(|&u| self.per_vertex[u as usize]).sum()
    }
}

/// Charges each clique to its ≺-first vertex that `popular` rejects.
pub fn unassigned_clique_mass<F>(graph: &Graph, k: usize, popular: F) -> Result<AssignmentCensus, BaselineError>
where
    F: Fn(VertexId) -> bool,
{
    let mut per_vertex = vec![0u64; graph.n()];
    let mut unassigned = 0u64;
    let total = for_each_clique(graph, k, DEFAULT_NODE_BUDGET, |clique| {
        let owner = clique
            .iter()
            .copied()
            .filter(|&x| !popular(x))
            .min_by(|&a, &b| graph.order_cmp(a, b));
        match owner {
            Some(u) => per_vertex[u as usize] += 1,
            None => unassigned += 1,
        }
    })?;
    Ok(AssignmentCensus {
        total,
        unassigned,
        per_vertex,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::VertexMultiset;

    fn complete(n: usize) -> Graph {
        gen_path_plus_clique(n, n).unwrap()
    }

    #[test]
    fn complete_graph_counts() {
        let k5 = complete(5);
        assert_eq!(count_cliques_exact(&k5, 3).unwrap().total, 10);
        let c5 = count_cliques_exact(&k5, 5).unwrap();
        assert_eq!(c5.total, 1);
        assert!(c5.per_vertex.iter().all(|&c| c == 1));
        let k4 = complete(4);
        assert_eq!(count_cliques_naive(&k4, 3).unwrap(), 4);
        assert_eq!(count_cliques_naive(&k4, 4).unwrap(), 1);
    }

    #[test]
    fn path_has_no_triangles() {
        let p = gen_path_plus_clique(10, 0).unwrap();
        assert_eq!(p.undirected_edge_count(), 9);
        assert_eq!(count_cliques_exact(&p, 3).unwrap().total, 0);
    }

    #[test]
    fn path_plus_clique_counts() {
        let g = gen_path_plus_clique(100, 8).unwrap();
        assert_eq!(count_cliques_exact(&g, 4).unwrap().total, 70);
        let g = gen_path_plus_clique(100, 3).unwrap();
        assert_eq!(count_cliques_exact(&g, 3).unwrap().total, 1);
        let g = gen_path_plus_clique(6, 6).unwrap();
        assert_eq!(g.m(), 30);
        assert_eq!(
            gen_path_plus_clique(5, 6).unwrap_err(),
            BaselineError::CliqueTooBig { t: 6, n: 5 }
        );
    }

    #[test]
    fn gnm_sizes() {
        assert_eq!(gen_gnm(10, 45, 1).unwrap(), complete(10));
        assert_eq!(gen_gnm(10, 0, 1).unwrap().m(), 0);
        for seed in 0..20 {
            let g = gen_gnm(30, 100, seed).unwrap();
            assert_eq!(g.m(), 200);
        }
        assert_eq!(gen_gnm(30, 400, 3).unwrap().m(), 800);
        assert!(matches!(gen_gnm(10, 46, 1), Err(BaselineError::Overfull { .. })));
    }

    #[test]
    fn naive_refuses_large_graphs() {
        let g = Graph::empty(31);
        assert!(matches!(count_cliques_naive(&g, 3), Err(BaselineError::TooLarge { .. })));
    }

    #[test]
    fn node_budget_aborts() {
        let g = complete(12);
        assert_eq!(count_cliques_exact_with_budget(&g, 4, 10), Err(BaselineError::Budget(10)));
    }

    #[test]
    fn tuples_of_k4_singleton() {
        let g = complete(4);
        let tuples = enumerate_tuples(&g, &[0], 3).unwrap();
        assert_eq!(tuples.len(), 3);
        let g5 = complete(5);
        // each clique through u gives (k-2)! tuples: binom(4,3) cliques × 2
        assert_eq!(enumerate_tuples(&g5, &[0], 4).unwrap().len(), 8);
    }

    #[test]
    fn assignment_extremes() {
        let g = gen_gnm(15, 50, 4).unwrap();
        let ck = count_cliques_exact(&g, 3).unwrap().total;
        let none = unassigned_clique_mass(&g, 3, |_| false).unwrap();
        assert_eq!(none.unassigned, 0);
        assert_eq!(none.assigned(), ck);
        let all = unassigned_clique_mass(&g, 3, |_| true).unwrap();
        assert_eq!(all.unassigned, ck);
        assert_eq!(all.assigned(), 0);
    }

    #[test]
    fn typical_verification() {
        let g = gen_gnm(50, 600, 2).unwrap();
        let p = Params::derive(50, 3, g.m() as f64, 1.0, 0.5, 0.1, 0).unwrap();
        let whole = TypicalSet::from_multiset(VertexMultiset::from_parts(
            g.vertices().collect(),
            g.vertices().map(|v| g.degree(v)).collect(),
        ), g.n());
        assert!(verify_degrees_typical(&g, &whole, &p));

        // t copies of one vertex that misses a high-degree hub
        let mut edges: Vec<(u32, u32)> = (1..40).map(|i| (0, i)).collect();
        edges.push((40, 41));
        let hub = Graph::from_edges(42, edges).unwrap();
        let p = Params::derive(42, 3, hub.m() as f64, 1.0, 0.5, 0.1, 0).unwrap();
        assert!(hub.degree(0) as f64 > p.theta);
        let lonely = TypicalSet::from_multiset(VertexMultiset::from_parts(vec![40; 42], vec![1; 42]), 42);
        assert!(!verify_degrees_typical(&hub, &lonely, &p));
    }

    #[test]
    fn upper_bound_values() {
        assert_eq!(clique_upper_bound(16, 3), 64.0);
        assert_eq!(clique_upper_bound(17, 4), 17.0 * 10.0);
        assert_eq!(binomial(3.0, 5), 0.0);
    }
}
