//! One estimator run for a fixed clique-count guess `C̄_k`.

use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::baseline::count_cliques_exact;
use crate::clique_sampler::CliqueSampler;
use crate::graph::{LocalView, Probe, QueryCounts, QueryOracle, VertexId};
use crate::params::Params;
use crate::popularity::{is_popular, is_popular_batched, Verdict, VerdictCache};
use crate::sampler::{EdgeSampler, VertexMultiset};
use crate::typical::{sample_degrees_typical, TypicalSet};

/// Independent random streams carved out of one seed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stream {
    Source = 1,
    Typical = 2,
    Cliques = 3,
    Popularity = 4,
    Search = 5,
}

pub fn stream_rng(seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Ok,
    Fail,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailReason {
    TypicalSet,
    Budget,
    Enumeration,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunFlags {
    /// `q > m̄`: the neighbor lists of `S` were read up front.
    pub local_mode: bool,
    /// `ε ≤ m̄^{-k/2}`: answered by exact enumeration.
    pub exact_fallback: bool,
    pub budget_exceeded: bool,
    /// Rejected calls were skipped in bulk instead of replayed one by one.
    pub batched: bool,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PopularityStats {
    pub checked: usize,
    pub popular: usize,
    pub trials: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub estimate: f64,
    pub outcome: Outcome,
    pub failure: Option<FailReason>,
    pub chi_sum: u64,
    /// Calls that returned a tuple.
    pub hits: u64,
    pub q_used: u64,
    pub s_used: usize,
    pub t_used: usize,
    pub m_s: u64,
    pub m_t: u64,
    pub typical_attempts: usize,
    pub popularity: PopularityStats,
    pub flags: RunFlags,
    pub queries: QueryCounts,
    #[serde(skip)]
    pub wallclock: Duration,
}

impl EstimateReport {
    fn blank() -> Self {
        Self {
            estimate: 0.0,
            outcome: Outcome::Ok,
            failure: None,
            chi_sum: 0,
            hits: 0,
            q_used: 0,
            s_used: 0,
            t_used: 0,
            m_s: 0,
            m_t: 0,
            typical_attempts: 0,
            popularity: PopularityStats::default(),
            flags: RunFlags::default(),
            queries: QueryCounts::default(),
            wallclock: Duration::ZERO,
        }
    }

    fn fail(&mut self, reason: FailReason) {
        self.outcome = Outcome::Fail;
        self.failure = Some(reason);
        self.estimate = 0.0;
    }

    pub fn is_ok(&self) -> bool {
        self.outcome == Outcome::Ok
    }

    /// `Ĉ_k`, or `None` on a fail outcome.
    pub fn value(&self) -> Option<f64> {
        self.is_ok().then_some(self.estimate)
    }
}

/// Runs the estimator once. Randomness comes from `params.seed`; all
/// queries go through `oracle` and are tallied in the report.
pub fn approximate_cliques(oracle: &QueryOracle, params: &Params) -> EstimateReport {
    let start = Instant::now();
    let before = oracle.counts();
    let mut report = EstimateReport::blank();
    if params.eps <= params.eps_floor() {
        exact_run(oracle, params, &mut report);
    } else {
        sampled_run(oracle, params, &mut report);
    }
    report.queries = oracle.counts().since(&before);
    report.wallclock = start.elapsed();
    report
}

fn exact_run(oracle: &QueryOracle, params: &Params, report: &mut EstimateReport) {
    report.flags.exact_fallback = true;
    let view = LocalView::new(oracle);
    for v in 0..params.n as VertexId {
        view.fetch(v);
    }
    match count_cliques_exact(oracle.graph(), params.k) {
        Ok(census) => report.estimate = census.total as f64,
        Err(_) => report.fail(FailReason::Enumeration),
    }
}

fn sampled_run(oracle: &QueryOracle, params: &Params, report: &mut EstimateReport) {
    let n = params.n;
    let source = if params.s >= n {
        VertexMultiset::all(oracle)
    } else {
        let mut rng = stream_rng(params.seed, Stream::Source);
        let members = (0..params.s).map(|_| oracle.uniform_vertex(&mut rng)).collect();
        VertexMultiset::with_degrees(oracle, members)
    };
    report.s_used = source.len();
    report.m_s = source.m_of();

    let typical = match sample_degrees_typical(oracle, params, &mut stream_rng(params.seed, Stream::Typical)) {
        Ok(t) => t,
        Err(e) => {
            report.typical_attempts = e.attempts;
            report.fail(FailReason::TypicalSet);
            return;
        }
    };
    report.typical_attempts = typical.attempts();
    report.t_used = typical.size();
    report.m_t = typical.m_of();

    let q = params.q_for(report.m_s, report.s_used);
    report.q_used = q;
    let source = EdgeSampler::new(source);
    let local = q as f64 > params.m_bar;
    let accelerate = params.constants.accelerate;
    report.flags.local_mode = local;

    let view = LocalView::new(oracle);
    if local {
        // Reading E(S) in full is cheaper than q sampled neighbor queries.
        // A known-edge count beyond m̄/(1-ε) proves m̄ too small.
        let cap = params.m_bar / (1.0 - params.eps);
        let mut distinct = source.multiset().members().to_vec();
        distinct.sort_unstable();
        distinct.dedup();
        for u in distinct {
            view.fetch(u);
            if view.known_edges() as f64 > cap {
                report.flags.budget_exceeded = true;
                report.fail(FailReason::Budget);
                return;
            }
        }
    }

    let stats = if local || accelerate {
        report.flags.batched = local && accelerate;
        let fetch = |x: VertexId| {
            view.fetch(x);
        };
        drive(&view, accelerate.then_some(&fetch as &dyn Fn(VertexId)), local && accelerate, &source, &typical, params, q)
    } else {
        drive(oracle, None, false, &source, &typical, params, q)
    };

    report.hits = stats.hits;
    report.chi_sum = stats.chi;
    report.popularity = stats.popularity;
    report.estimate = if q == 0 {
        0.0
    } else {
        let scale = report.m_s as f64 * params.theta_power()
            / (params.tuple_multiplicity() * (report.s_used as f64 / n as f64));
        scale * stats.chi as f64 / q as f64
    };
}

struct LoopStats {
    hits: u64,
    chi: u64,
    popularity: PopularityStats,
}

/// The `q`-call loop with lazy, run-wide popularity verdicts.
/// `prefetch`, when present, makes a vertex's neighbor list local so its
/// popularity test can run batched.
fn drive<P: Probe>(
    probe: &P,
    prefetch: Option<&dyn Fn(VertexId)>,
    skip: bool,
    source: &EdgeSampler,
    typical: &TypicalSet,
    params: &Params,
    q: u64,
) -> LoopStats {
    let sampler = CliqueSampler::new(source, typical, params);
    let table = skip.then(|| sampler.skip_table(probe));
    let mut rng_c = stream_rng(params.seed, Stream::Cliques);
    let mut rng_p = stream_rng(params.seed, Stream::Popularity);
    let mut cache = VerdictCache::new();
    let (mut hits, mut chi) = (0u64, 0u64);

    sampler.run(probe, &mut rng_c, q, table.as_ref(), |tuple| {
        hits += 1;
        let mut first: Option<(usize, VertexId)> = None;
        for x in tuple.vertices() {
            let key = (probe.degree(x), x);
            let verdict = cache.get_or_decide(x, || match prefetch {
                Some(fetch) => {
                    fetch(x);
                    is_popular_batched(x, typical, probe, params, &mut rng_p)
                }
                None => is_popular(x, typical, probe, params, &mut rng_p),
            });
            if verdict == Verdict::Unpopular && first.is_none_or(|f| key < f) {
                first = Some(key);
            }
        }
        if first.map(|f| f.1) == Some(tuple.u) {
            chi += 1;
        }
    });

    LoopStats {
        hits,
        chi,
        popularity: PopularityStats {
            checked: cache.len(),
            popular: cache.iter().filter(|v| v.verdict == Verdict::Popular).count(),
            trials: cache.total_trials(),
        },
    }
}
