//! Near-uniform sampling of k-tuples `(u, v, w_1, …, w_{k-2})` from `C(S)`:
//! `u ∈ S`, the k vertices form a clique, and `v ≺ w_j` for every `j`.
//!
//! One call returns any fixed tuple of `C(S)` with probability within
//! `(1 ± ε̄) / (m(S)·θ^{k-2})` when `T` is degrees-typical, and exactly
//! `1 / (m(S)·θ^{k-2})` when `T = V` and `m̄ = m`.

use std::cmp::Ordering;

use rand::Rng;
use rand_distr::{Distribution, Geometric, WeightedAliasIndex};
use serde::{Deserialize, Serialize};

use crate::graph::{Probe, VertexId};
use crate::params::Params;
use crate::sampler::EdgeSampler;
use crate::typical::TypicalSet;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CliqueTuple {
    pub u: VertexId,
    pub v: VertexId,
    pub w: Vec<VertexId>,
}

impl CliqueTuple {
    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        [self.u, self.v].into_iter().chain(self.w.iter().copied())
    }
}

/// Reusable buffers so the hot loop does not allocate.
#[derive(Default)]
struct Scratch {
    ws: Vec<VertexId>,
    degrees: Vec<usize>,
    nodes: Vec<VertexId>,
    pairs: Vec<(VertexId, VertexId, bool)>,
}

/// Binds a source sampler `D(S)` and typical set `D(T)` to the thresholds
/// of one run.
pub struct CliqueSampler<'a> {
    source: &'a EdgeSampler,
    typical: &'a TypicalSet,
    k: usize,
    theta: f64,
    t_over_n: f64,
}

impl<'a> CliqueSampler<'a> {
    pub fn new(source: &'a EdgeSampler, typical: &'a TypicalSet, params: &Params) -> Self {
        Self {
            source,
            typical,
            k: params.k,
            theta: params.theta,
            t_over_n: typical.size() as f64 / params.n as f64,
        }
    }

    pub fn source(&self) -> &EdgeSampler {
        self.source
    }

    /// One invocation of the sampling procedure. `None` is the fail
    /// outcome.
    pub fn sample<P: Probe, R: Rng + ?Sized>(&self, probe: &P, rng: &mut R) -> Option<CliqueTuple> {
        let mut scratch = Scratch::default();
        let (u, v) = self.source.sample_edge(probe, rng).ok()?;
        self.extend(probe, rng, u, v, &mut scratch).then(|| self.tuple(u, v, &scratch))
    }

    /// Runs `calls` independent invocations and hands every returned tuple
    /// to `on_hit`, in call order.
    ///
    /// With a [`SkipTable`] the calls that would stop at a low-degree
    /// rejection are not simulated one by one; their number is drawn from
    /// the matching geometric law instead. The table may only be built
    /// over a probe that answers `S` and `N(S)` without queries, so the
    /// skipped calls would not have been charged either.
    pub fn run<P, R, F>(&self, probe: &P, rng: &mut R, calls: u64, skip: Option<&SkipTable>, mut on_hit: F)
    where
        P: Probe,
        R: Rng + ?Sized,
        F: FnMut(&CliqueTuple),
    {
        let mut scratch = Scratch::default();
        match skip {
            None => {
                for _ in 0..calls {
                    let Ok((u, v)) = self.source.sample_edge(probe, rng) else {
                        return;
                    };
                    if self.extend(probe, rng, u, v, &mut scratch) {
                        on_hit(&self.tuple(u, v, &scratch));
                    }
                }
            }
            Some(table) => {
                if table.pass_probability <= 0.0 {
                    return;
                }
                let gaps = Geometric::new(table.pass_probability.min(1.0))
                    .expect("pass probability lies in (0, 1]");
                let mut done: u64 = 0;
                loop {
                    done = done.saturating_add(gaps.sample(rng)).saturating_add(1);
                    if done > calls {
                        break;
                    }
                    let (u, v) = table.edges[table.index.sample(rng)];
                    if self.extend_passed(probe, rng, u, v, &mut scratch) {
                        on_hit(&self.tuple(u, v, &scratch));
                    }
                }
            }
        }
    }

    /// Builds the per-edge pass weights for skip mode: a call that draws
    /// `(u, v)` with `v` low-degree survives all `k-2` keep decisions with
    /// probability `(d(v)/θ)^{k-2}`; high-degree `v` always proceeds.
    pub fn skip_table<P: Probe>(&self, probe: &P) -> SkipTable {
        let ms = self.source.multiset();
        let mut edges = Vec::with_capacity(ms.m_of() as usize);
        let mut weights = Vec::with_capacity(ms.m_of() as usize);
        let exp = self.k as i32 - 2;
        for (&u, &du) in ms.members().iter().zip(ms.degrees()) {
            for i in 0..du {
                let v = probe.neighbor_at(u, i);
                let dv = probe.degree(v) as f64;
                let h = if dv <= self.theta {
                    (dv / self.theta).powi(exp)
                } else {
                    1.0
                };
                edges.push((u, v));
                weights.push(h);
            }
        }
        let total: f64 = weights.iter().sum();
        let m_s = ms.m_of() as f64;
        let index = if total > 0.0 {
            Some(WeightedAliasIndex::new(weights).expect("finite non-negative weights"))
        } else {
            None
        };
        SkipTable {
            pass_probability: if m_s > 0.0 { total / m_s } else { 0.0 },
            edges,
            index: index.unwrap_or_else(|| WeightedAliasIndex::new(vec![1.0]).unwrap()),
        }
    }

    fn tuple(&self, u: VertexId, v: VertexId, scratch: &Scratch) -> CliqueTuple {
        CliqueTuple {
            u,
            v,
            w: scratch.ws.clone(),
        }
    }

    /// Steps 2-4 after the edge `(u, v)` was drawn.
    fn extend<P: Probe, R: Rng + ?Sized>(
        &self,
        probe: &P,
        rng: &mut R,
        u: VertexId,
        v: VertexId,
        scratch: &mut Scratch,
    ) -> bool {
        scratch.ws.clear();
        scratch.degrees.clear();
        let dv = probe.degree(v);
        if dv as f64 <= self.theta {
            for _ in 2..self.k {
                let w = probe.neighbor_at(v, rng.gen_range(0..dv));
                if !bernoulli(rng, dv as f64 / self.theta) {
                    return false;
                }
                scratch.ws.push(w);
                scratch.degrees.push(usize::MAX);
            }
        } else {
            for _ in 2..self.k {
                match self.high_step(probe, rng) {
                    Some((w, dw)) => {
                        scratch.ws.push(w);
                        scratch.degrees.push(dw);
                    }
                    None => return false,
                }
            }
        }
        self.verify(probe, u, v, dv, scratch)
    }

    /// Same as [`Self::extend`], conditioned on a low-degree `v` having
    /// kept all of its draws.
    fn extend_passed<P: Probe, R: Rng + ?Sized>(
        &self,
        probe: &P,
        rng: &mut R,
        u: VertexId,
        v: VertexId,
        scratch: &mut Scratch,
    ) -> bool {
        scratch.ws.clear();
        scratch.degrees.clear();
        let dv = probe.degree(v);
        if dv as f64 <= self.theta {
            for _ in 2..self.k {
                scratch.ws.push(probe.neighbor_at(v, rng.gen_range(0..dv)));
                scratch.degrees.push(usize::MAX);
            }
            self.verify(probe, u, v, dv, scratch)
        } else {
            self.extend(probe, rng, u, v, scratch)
        }
    }

    /// Draws `(x, y)` from `E(T)` and keeps `y` with probability
    /// `m(T) / (d(y)·(t/n)·θ)` if it is high-degree.
    fn high_step<P: Probe, R: Rng + ?Sized>(&self, probe: &P, rng: &mut R) -> Option<(VertexId, usize)> {
        let (_, y) = self.typical.sampler().sample_edge(probe, rng).ok()?;
        let dy = probe.degree(y);
        if dy as f64 <= self.theta {
            return None;
        }
        let keep = self.typical.m_of() as f64 / (dy as f64 * self.t_over_n * self.theta);
        assert!(
            keep <= 1.0 + 1e-9,
            "high-degree acceptance probability {keep} exceeds 1: T violates the m(T) bound"
        );
        bernoulli(rng, keep).then_some((y, dy))
    }

    /// Order check `v ≺ w_j`, then pair queries over all vertices,
    /// memoized per unordered pair and stopping at the first non-edge.
    fn verify<P: Probe>(&self, probe: &P, u: VertexId, v: VertexId, dv: usize, scratch: &mut Scratch) -> bool {
        for j in 0..scratch.ws.len() {
            let w = scratch.ws[j];
            if scratch.degrees[j] == usize::MAX {
                scratch.degrees[j] = lookup_degree(probe, &scratch.ws[..j], &scratch.degrees[..j], w);
            }
            if (dv, v).cmp(&(scratch.degrees[j], w)) != Ordering::Less {
                return false;
            }
        }
        scratch.nodes.clear();
        scratch.nodes.push(u);
        scratch.nodes.push(v);
        scratch.nodes.extend_from_slice(&scratch.ws);
        scratch.pairs.clear();
        let nodes = &scratch.nodes;
        for a in 0..nodes.len() {
            for b in a + 1..nodes.len() {
                let key = (nodes[a].min(nodes[b]), nodes[a].max(nodes[b]));
                let adjacent = match scratch.pairs.iter().find(|p| (p.0, p.1) == key) {
                    Some(p) => p.2,
                    None => {
                        let hit = probe.pair(key.0, key.1);
                        scratch.pairs.push((key.0, key.1, hit));
                        hit
                    }
                };
                if !adjacent {
                    return false;
                }
            }
        }
        true
    }
}

fn lookup_degree<P: Probe>(probe: &P, seen: &[VertexId], degrees: &[usize], w: VertexId) -> usize {
    seen.iter()
        .position(|&x| x == w)
        .map(|i| degrees[i])
        .unwrap_or_else(|| probe.degree(w))
}

#[inline]
fn bernoulli<R: Rng + ?Sized>(rng: &mut R, p: f64) -> bool {
    p >= 1.0 || rng.gen::<f64>() < p
}

/// Pass weights over `E(S)` for skip-mode batches.
pub struct SkipTable {
    /// Probability that a single call gets past its keep decisions.
    pub pass_probability: f64,
    edges: Vec<(VertexId, VertexId)>,
    index: WeightedAliasIndex<f64>,
}
