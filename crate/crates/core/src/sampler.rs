//! Degree-proportional member sampling over vertex multisets, giving
//! constant-time uniform draws of ordered edges from `E(S)`.

use rand::Rng;
use thiserror::Error;

use crate::graph::{Probe, VertexId};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SamplerError {
    #[error("edge sampler is empty: the multiset has no incident edges")]
    Empty,
}

/// A multiset of vertices with their degrees, queried once on construction.
#[derive(Clone, Debug)]
pub struct VertexMultiset {
    members: Vec<VertexId>,
    degrees: Vec<usize>,
    m_of: u64,
}

impl VertexMultiset {
    /// Queries the degree of each distinct member once.
    pub fn with_degrees<P: Probe>(probe: &P, members: Vec<VertexId>) -> Self {
        let mut seen: std::collections::HashMap<VertexId, usize> = Default::default();
        let degrees: Vec<usize> = members
            .iter()
            .map(|&u| *seen.entry(u).or_insert_with(|| probe.degree(u)))
            .collect();
        Self::from_parts(members, degrees)
    }

    /// The whole vertex set, each vertex once.
    pub fn all<P: Probe>(probe: &P) -> Self {
        let members = (0..probe.n() as VertexId).collect();
        Self::with_degrees(probe, members)
    }

    /// Uses degrees the caller already holds.
    pub fn from_parts(members: Vec<VertexId>, degrees: Vec<usize>) -> Self {
        assert_eq!(members.len(), degrees.len());
        let m_of = degrees.iter().map(|&d| d as u64).sum();
        Self {
            members,
            degrees,
            m_of,
        }
    }

    pub fn members(&self) -> &[VertexId] {
        &self.members
    }

    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }

    /// Size counted with multiplicity.
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// `m(S)`: sum of member degrees with multiplicity.
    pub fn m_of(&self) -> u64 {
        self.m_of
    }

    /// Number of members equal to `v` that are adjacent to `w`, i.e. `d_S(w)`
    /// when `v` ranges over neighbors. Used by verification code.
    pub fn multiplicity(&self, v: VertexId) -> usize {
        self.members.iter().filter(|&&x| x == v).count()
    }
}

/// Walker/Vose alias table over integer weights. Every probability is an
/// exact rational `numerator / (len * total)`, which lets tests check the
/// marginals analytically.
#[derive(Clone, Debug)]
pub struct AliasTable {
    cut: Vec<u64>,
    alias: Vec<u32>,
    total: u64,
}

impl AliasTable {
    /// Returns `None` when all weights are zero.
    pub fn new(weights: &[u64]) -> Option<Self> {
        let len = weights.len() as u64;
        let total: u64 = weights.iter().sum();
        if total == 0 {
            return None;
        }
        // Bucket capacity is `total`; scaled weights sum to `len * total`.
        let mut scaled: Vec<u128> = weights.iter().map(|&w| w as u128 * len as u128).collect();
        let cap = total as u128;
        let mut cut = vec![total; weights.len()];
        let mut alias: Vec<u32> = (0..weights.len() as u32).collect();
        let (mut small, mut large): (Vec<usize>, Vec<usize>) =
            (0..weights.len()).partition(|&i| scaled[i] < cap);
        while let (Some(&s), Some(&l)) = (small.last(), large.last()) {
            small.pop();
            cut[s] = scaled[s] as u64;
            alias[s] = l as u32;
            scaled[l] -= cap - scaled[s];
            if scaled[l] < cap {
                large.pop();
                small.push(l);
            }
        }
        // Leftovers are exactly full buckets.
        for i in small.into_iter().chain(large) {
            cut[i] = total;
        }
        Some(Self { cut, alias, total })
    }

    pub fn len(&self) -> usize {
        self.cut.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cut.is_empty()
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let bucket = rng.gen_range(0..self.cut.len());
        if rng.gen_range(0..self.total) < self.cut[bucket] {
            bucket
        } else {
            self.alias[bucket] as usize
        }
    }

    /// Exact selection probability of index `i` as `(numerator, denominator)`.
    pub fn probability(&self, i: usize) -> (u128, u128) {
        let mut num = self.cut[i] as u128;
        for (j, &a) in self.alias.iter().enumerate() {
            if a as usize == i && j != i {
                num += (self.total - self.cut[j]) as u128;
            }
        }
        (num, self.cut.len() as u128 * self.total as u128)
    }
}

/// `D(S)`: picks a member with probability `d(u) / m(S)`, then a uniform
/// neighbor of it, which yields each ordered edge of `E(S)` with
/// probability `1 / m(S)` (counting the multiplicity of `u` in `S`).
#[derive(Clone, Debug)]
pub struct EdgeSampler {
    multiset: VertexMultiset,
    table: Option<AliasTable>,
}

impl EdgeSampler {
    pub fn new(multiset: VertexMultiset) -> Self {
        let weights: Vec<u64> = multiset.degrees.iter().map(|&d| d as u64).collect();
        let table = AliasTable::new(&weights);
        Self { multiset, table }
    }

    pub fn multiset(&self) -> &VertexMultiset {
        &self.multiset
    }

    pub fn table(&self) -> Option<&AliasTable> {
        self.table.as_ref()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_none()
    }

    pub fn m_of(&self) -> u64 {
        self.multiset.m_of
    }

    /// Index into the member list, drawn proportionally to degree.
    #[inline]
    pub fn sample_member<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<usize, SamplerError> {
        self.table
            .as_ref()
            .map(|t| t.sample(rng))
            .ok_or(SamplerError::Empty)
    }

    /// A uniform ordered edge `(u, v)` of `E(S)`. Costs one neighbor query.
    #[inline]
    pub fn sample_edge<P: Probe, R: Rng + ?Sized>(
        &self,
        probe: &P,
        rng: &mut R,
    ) -> Result<(VertexId, VertexId), SamplerError> {
        let idx = self.sample_member(rng)?;
        let u = self.multiset.members[idx];
        let d = self.multiset.degrees[idx];
        let v = probe.neighbor_at(u, rng.gen_range(0..d));
        Ok((u, v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Graph, QueryOracle};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::HashMap;

    fn k3() -> Graph {
        Graph::from_edges(3, [(0, 1), (1, 2), (0, 2)]).unwrap()
    }

    #[test]
    fn proportional_member_selection() {
        let ms = VertexMultiset::from_parts(vec![0, 1], vec![1, 3]);
        let sampler = EdgeSampler::new(ms);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let trials = 100_000;
        let hits = (0..trials)
            .filter(|_| sampler.sample_member(&mut rng).unwrap() == 1)
            .count();
        assert!((hits as f64 / trials as f64 - 0.75).abs() < 0.01);
    }

    #[test]
    fn equal_degrees_give_uniform_table() {
        let table = AliasTable::new(&[4, 4, 4, 4, 4]).unwrap();
        for i in 0..5 {
            let (num, den) = table.probability(i);
            assert_eq!(num * 5, den);
        }
    }

    #[test]
    fn isolated_members_make_an_empty_sampler() {
        let g = Graph::empty(4);
        let o = QueryOracle::new(&g);
        let sampler = EdgeSampler::new(VertexMultiset::with_degrees(&o, vec![0, 2]));
        assert!(sampler.is_empty());
        assert_eq!(sampler.m_of(), 0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(sampler.sample_edge(&o, &mut rng), Err(SamplerError::Empty));
    }

    #[test]
    fn single_member_edges_are_uniform() {
        let g = k3();
        let o = QueryOracle::new(&g);
        let sampler = EdgeSampler::new(VertexMultiset::with_degrees(&o, vec![0]));
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let trials = 100_000;
        let to_one = (0..trials)
            .filter(|_| sampler.sample_edge(&o, &mut rng).unwrap() == (0, 1))
            .count();
        assert!((to_one as f64 / trials as f64 - 0.5).abs() < 0.01);
        // one degree query at build, one neighbor query per draw
        assert_eq!(o.counts().degree, 1);
        assert_eq!(o.counts().neighbor, trials as u64);
    }

    #[test]
    fn whole_vertex_set_gives_each_ordered_edge_one_sixth() {
        let g = k3();
        let o = QueryOracle::new(&g);
        let sampler = EdgeSampler::new(VertexMultiset::all(&o));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let trials = 120_000;
        let mut hist: HashMap<(u32, u32), usize> = HashMap::new();
        for _ in 0..trials {
            *hist.entry(sampler.sample_edge(&o, &mut rng).unwrap()).or_default() += 1;
        }
        assert_eq!(hist.len(), 6);
        for &c in hist.values() {
            assert!((c as f64 / trials as f64 - 1.0 / 6.0).abs() < 0.01);
        }
    }

    #[test]
    fn multiplicity_doubles_weight() {
        // path 0-1-2: members {0, 0, 2} -> edges from 0 twice as likely as from 2
        let g = Graph::from_edges(3, [(0, 1), (1, 2)]).unwrap();
        let o = QueryOracle::new(&g);
        let ms = VertexMultiset::with_degrees(&o, vec![0, 0, 2]);
        assert_eq!(ms.m_of(), 3);
        assert_eq!(o.counts().degree, 2);
        let sampler = EdgeSampler::new(ms);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let trials = 90_000;
        let from_zero = (0..trials)
            .filter(|_| sampler.sample_edge(&o, &mut rng).unwrap().0 == 0)
            .count();
        assert!((from_zero as f64 / trials as f64 - 2.0 / 3.0).abs() < 0.01);
    }
}
