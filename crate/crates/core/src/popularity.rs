//! Popular / unpopular classification of single vertices by repeated
//! clique sampling from `S = {u}`.

use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::clique_sampler::CliqueSampler;
use crate::graph::{Probe, VertexId};
use crate::params::Params;
use crate::sampler::{EdgeSampler, VertexMultiset};
use crate::typical::TypicalSet;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Popular,
    Unpopular,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PopularityVerdict {
    pub vertex: VertexId,
    pub verdict: Verdict,
    /// `ĉ_k(u)`; absent when the degree check decided.
    pub estimate: Option<f64>,
    pub trials_used: u64,
}

/// Decides popularity of `u`. A degree above `τ_d` answers at once;
/// otherwise `r(u)` calls estimate
/// `ĉ_k(u) = d(u)·θ^{k-2}·hits / ((k-2)!·r)` and the vertex is popular iff
/// `ĉ_k(u) ≥ τ_c/2`.
pub fn is_popular<P: Probe, R: Rng + ?Sized>(
    u: VertexId,
    typical: &TypicalSet,
    probe: &P,
    params: &Params,
    rng: &mut R,
) -> PopularityVerdict {
    classify(u, typical, probe, params, rng, false)
}

/// [`is_popular`] with rejected calls skipped in bulk. The probe must
/// answer the neighbor list of `u` without charging (for instance a
/// [`LocalView`](crate::graph::LocalView) that fetched `u`), since the
/// skipped calls would have read it.
pub fn is_popular_batched<P: Probe, R: Rng + ?Sized>(
    u: VertexId,
    typical: &TypicalSet,
    probe: &P,
    params: &Params,
    rng: &mut R,
) -> PopularityVerdict {
    classify(u, typical, probe, params, rng, true)
}

fn classify<P: Probe, R: Rng + ?Sized>(
    u: VertexId,
    typical: &TypicalSet,
    probe: &P,
    params: &Params,
    rng: &mut R,
    batched: bool,
) -> PopularityVerdict {
    let d = probe.degree(u);
    if d as f64 > params.tau_d {
        return PopularityVerdict {
            vertex: u,
            verdict: Verdict::Popular,
            estimate: None,
            trials_used: 0,
        };
    }
    let r = params.r_for(d);
    let mut hits: u64 = 0;
    if r > 0 {
        let source = EdgeSampler::new(VertexMultiset::from_parts(vec![u], vec![d]));
        let sampler = CliqueSampler::new(&source, typical, params);
        let table = batched.then(|| sampler.skip_table(probe));
        sampler.run(probe, rng, r, table.as_ref(), |_| hits += 1);
    }
    let estimate = if r == 0 {
        0.0
    } else {
        d as f64 * params.theta_power() * hits as f64 / (params.tuple_multiplicity() * r as f64)
    };
    PopularityVerdict {
        vertex: u,
        verdict: if estimate >= params.tau_c / 2.0 {
            Verdict::Popular
        } else {
            Verdict::Unpopular
        },
        estimate: Some(estimate),
        trials_used: r,
    }
}

/// Write-once verdict memo for one run, so every vertex keeps the answer
/// it got the first time.
#[derive(Debug, Default)]
pub struct VerdictCache {
    verdicts: HashMap<VertexId, PopularityVerdict>,
    order: Vec<VertexId>,
}

impl VerdictCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get_or_decide(
        &mut self,
        u: VertexId,
        decide: impl FnOnce() -> PopularityVerdict,
    ) -> Verdict {
        if let Some(v) = self.verdicts.get(&u) {
            return v.verdict;
        }
        let verdict = decide();
        debug_assert_eq!(verdict.vertex, u);
        let answer = verdict.verdict;
        self.verdicts.insert(u, verdict);
        self.order.push(u);
        answer
    }

    pub fn get(&self, u: VertexId) -> Option<&PopularityVerdict> {
        self.verdicts.get(&u)
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// Verdicts in the order they were decided.
    pub fn iter(&self) -> impl Iterator<Item = &PopularityVerdict> {
        self.order.iter().map(|u| &self.verdicts[u])
    }

    pub fn total_trials(&self) -> u64 {
        self.verdicts.values().map(|v| v.trials_used).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Graph, QueryOracle};
    use crate::typical::sample_degrees_typical;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn hub_above_degree_threshold_short_circuits() {
        let n = 200u32;
        let g = Graph::from_edges(n as usize, (1..n).map(|i| (0, i))).unwrap();
        let o = QueryOracle::new(&g);
        // Big C̄ pushes τ_d under d(0).
        let p = Params::derive(g.n(), 3, g.m() as f64, 7900.0, 0.5, 0.1, 0).unwrap();
        assert!(g.degree(0) as f64 > p.tau_d);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let ts = sample_degrees_typical(&o, &p, &mut rng).unwrap();
        o.reset_counts();
        let v = is_popular(0, &ts, &o, &p, &mut rng);
        assert_eq!(v.verdict, Verdict::Popular);
        assert_eq!(v.trials_used, 0);
        assert!(v.estimate.is_none());
        let c = o.counts();
        assert_eq!((c.degree, c.pair, c.neighbor), (1, 0, 0));
    }

    #[test]
    fn isolated_vertex_is_unpopular() {
        let g = Graph::from_edges(5, [(0, 1), (1, 2), (0, 2)]).unwrap();
        let o = QueryOracle::new(&g);
        let p = Params::derive(g.n(), 3, g.m() as f64, 1.0, 0.5, 0.1, 0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let ts = sample_degrees_typical(&o, &p, &mut rng).unwrap();
        let v = is_popular(4, &ts, &o, &p, &mut rng);
        assert_eq!(v.verdict, Verdict::Unpopular);
        assert_eq!(v.estimate, Some(0.0));
    }

    #[test]
    fn cache_is_write_once() {
        let mut cache = VerdictCache::new();
        let first = cache.get_or_decide(3, || PopularityVerdict {
            vertex: 3,
            verdict: Verdict::Unpopular,
            estimate: Some(1.0),
            trials_used: 10,
        });
        let second = cache.get_or_decide(3, || panic!("must not re-decide"));
        assert_eq!(first, second);
        assert_eq!(cache.len(), 1);
        assert_eq!(cache.total_trials(), 10);
    }
}
