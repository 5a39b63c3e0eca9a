//! Guess-free counting: a halving search over the clique-count guess that
//! stops once the estimator's answer is consistent with its own guess.

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::estimator::{approximate_cliques, stream_rng, Stream};
use crate::graph::{Graph, QueryCounts, QueryOracle};
use crate::params::{Constants, Params};

/// Largest ε used inside the search.
pub const EPS_CAP: f64 = 0.25;

/// An estimator parameterized by a guess. `None` is a fail outcome.
pub trait GuessEstimator {
    fn estimate(&mut self, guess: f64, eps: f64, delta: f64) -> Option<f64>;
}

impl<F> GuessEstimator for F
where
    F: FnMut(f64, f64, f64) -> Option<f64>,
{
    fn estimate(&mut self, guess: f64, eps: f64, delta: f64) -> Option<f64> {
        self(guess, eps, delta)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    /// Upper bound on the count, rounded up to a power of two.
    pub bound: f64,
    /// ε used by the search, at most [`EPS_CAP`].
    pub eps: f64,
    pub ell: u32,
    pub delta_prime: f64,
    pub r_search: u64,
    pub delta_inner: f64,
    /// Smallest outer guess tried before giving up.
    pub floor: f64,
    /// Stop a sweep step at the first run below `(1+ε)·ā`; such a step can
    /// no longer accept, so the search output is unchanged.
    pub short_circuit: bool,
}

impl SearchConfig {
    pub fn new(bound: f64, eps: f64, ell: u32) -> Self {
        let bound = if bound <= 1.0 { 1.0 } else { 2f64.powi(bound.log2().ceil() as i32) };
        let eps = eps.min(EPS_CAP);
        let delta_prime = 1.0 / (5.0 * 2f64.powi(ell as i32));
        let log_b = bound.log2().max(1.0);
        let r_search = ((4.0 / eps) * (2.0 * log_b * log_b / delta_prime).ln()).ceil() as u64;
        Self {
            bound,
            eps,
            ell,
            delta_prime,
            r_search,
            delta_inner: delta_prime / (2.0 * r_search as f64),
            floor: 1.0,
            short_circuit: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepStep {
    /// Outer guess `ã`.
    pub outer: f64,
    /// Inner guess `ā`.
    pub guess: f64,
    /// `X_ā`, the minimum over the runs that did not fail.
    pub min_value: Option<f64>,
    pub runs: u64,
    pub failed_runs: u64,
    pub delta_inner: f64,
    pub accepted: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    /// `X_ā` of the accepted step; `None` when every guess was exhausted.
    pub value: Option<f64>,
    pub accepted_guess: Option<f64>,
    pub trace: Vec<SweepStep>,
    pub invocations: u64,
}

/// Outer guess `ã = B, B/2, …, floor`; for each, an inner sweep
/// `ā = B, B/2, …, ã` takes `X_ā` as the minimum of `r_search` runs and
/// returns it as soon as `X_ā ≥ (1+ε)·ā`.
pub fn geometric_search<E: GuessEstimator + ?Sized>(estimator: &mut E, config: &SearchConfig) -> SearchResult {
    let mut trace = Vec::new();
    let mut invocations = 0u64;
    let mut outer = config.bound;
    while outer >= config.floor {
        let mut guess = config.bound;
        loop {
            let threshold = (1.0 + config.eps) * guess;
            let mut min_value: Option<f64> = None;
            let (mut runs, mut failed_runs) = (0u64, 0u64);
            for _ in 0..config.r_search {
                runs += 1;
                match estimator.estimate(guess, config.eps, config.delta_inner) {
                    Some(x) => {
                        min_value = Some(min_value.map_or(x, |m: f64| m.min(x)));
                        if config.short_circuit && x < threshold {
                            break;
                        }
                    }
                    None => failed_runs += 1,
                }
            }
            invocations += runs;
            let accepted = min_value.is_some_and(|x| x >= threshold);
            trace.push(SweepStep {
                outer,
                guess,
                min_value,
                runs,
                failed_runs,
                delta_inner: config.delta_inner,
                accepted,
            });
            if accepted {
                return SearchResult {
                    value: min_value,
                    accepted_guess: Some(guess),
                    trace,
                    invocations,
                };
            }
            if guess <= outer {
                break;
            }
            guess /= 2.0;
        }
        outer /= 2.0;
    }
    SearchResult {
        value: None,
        accepted_guess: None,
        trace,
        invocations,
    }
}

/// Where the edge estimate comes from.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "mode", content = "value")]
pub enum EdgeEstimate {
    /// `(1-ε/5)·m`, with `m` read off the graph outside the query budget.
    Exact,
    Supplied(f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AutoReport {
    pub estimate: f64,
    pub ok: bool,
    /// The search ran out of guesses. Kept even when the answer was
    /// converted to 0.
    pub raw_fail: bool,
    /// No run ever saw a clique, so 0 is reported instead of a fail.
    pub no_cliques_detectable: bool,
    pub m_bar: f64,
    pub config: Option<SearchConfig>,
    pub accepted_guess: Option<f64>,
    pub invocations: u64,
    pub failed_invocations: u64,
    pub queries: QueryCounts,
    pub trace: Vec<SweepStep>,
}

/// Runs the guess search over [`approximate_cliques`] with `ℓ = 2` and
/// `B = min(n^k, m̄^{k/2})`. Per-invocation seeds come from `seed`.
///
/// Outer guesses continue down to 1/4 so that a count of 1 still meets a
/// guess in `[C_k/4, C_k/2]`; guesses below 1 run the estimator with
/// `C̄_k = 1`.
pub fn approximate_cliques_auto(
    graph: &Graph,
    k: usize,
    eps: f64,
    edges: EdgeEstimate,
    seed: u64,
    constants: Constants,
) -> AutoReport {
    let oracle = QueryOracle::new(graph);
    let m_bar = match edges {
        EdgeEstimate::Exact => (1.0 - eps / 5.0) * graph.m() as f64,
        EdgeEstimate::Supplied(v) => v,
    };
    let mut report = AutoReport {
        estimate: 0.0,
        ok: true,
        raw_fail: false,
        no_cliques_detectable: false,
        m_bar,
        config: None,
        accepted_guess: None,
        invocations: 0,
        failed_invocations: 0,
        queries: QueryCounts::default(),
        trace: Vec::new(),
    };
    if m_bar < 1.0 || graph.n() < k {
        report.no_cliques_detectable = true;
        return report;
    }

    let kf = k as f64;
    let guess_cap = m_bar.powf(kf / 2.0);
    let bound = (graph.n() as f64).powf(kf).min(guess_cap);
    let config = SearchConfig {
        floor: 0.25,
        ..SearchConfig::new(bound, eps, 2)
    };
    let mut seeds = stream_rng(seed, Stream::Search);
    let mut estimator = |guess: f64, eps: f64, delta: f64| {
        // B is rounded up, so the top guesses may pass m̄^{k/2}.
        let ck_bar = guess.min(guess_cap).max(1.0);
        let params = Params::derive_with(graph.n(), k, m_bar, ck_bar, eps, delta, seeds.next_u64(), constants).ok()?;
        approximate_cliques(&oracle, &params).value()
    };
    let result = geometric_search(&mut estimator, &config);

    report.invocations = result.invocations;
    report.failed_invocations = result.trace.iter().map(|s| s.failed_runs).sum();
    report.queries = oracle.counts();
    report.accepted_guess = result.accepted_guess;
    match result.value {
        Some(v) => report.estimate = v,
        None => {
            report.raw_fail = true;
            let all_small = result.trace.iter().all(|s| s.min_value.is_none_or(|x| x < 1.0));
            if all_small {
                report.no_cliques_detectable = true;
            } else {
                report.ok = false;
            }
        }
    }
    report.trace = result.trace;
    report.config = Some(config);
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baseline::gen_path_plus_clique;

    #[test]
    fn config_values() {
        let c = SearchConfig::new(1000.0, 0.5, 2);
        assert_eq!(c.bound, 1024.0);
        assert_eq!(c.eps, 0.25);
        assert_eq!(c.delta_prime, 1.0 / 20.0);
        // (4/0.25)·ln(2·100·20) = 16·ln(4000)
        assert_eq!(c.r_search, (16.0 * 4000f64.ln()).ceil() as u64);
        assert_eq!(c.delta_inner, c.delta_prime / (2.0 * c.r_search as f64));
        assert_eq!(SearchConfig::new(0.3, 0.1, 2).bound, 1.0);
    }

    #[test]
    fn exact_stub_stops_at_first_consistent_guess() {
        let truth = 300.0;
        let config = SearchConfig::new(4096.0, 0.2, 2);
        let mut stub = |_: f64, _: f64, _: f64| Some(truth);
        let r = geometric_search(&mut stub, &config);
        // 300 ≥ 1.2·ā first holds at ā = 128
        assert_eq!(r.accepted_guess, Some(128.0));
        assert_eq!(r.value, Some(truth));
    }

    #[test]
    fn inflating_stub_still_terminates() {
        let config = SearchConfig::new(64.0, 0.25, 2);
        let mut stub = |guess: f64, _: f64, _: f64| Some(guess * 0.5);
        let r = geometric_search(&mut stub, &config);
        assert_eq!(r.value, None);
        assert_eq!(r.trace.last().unwrap().outer, 1.0);
        // outer 64..1 is 7 sweeps of 1..7 steps
        assert_eq!(r.trace.len(), 28);
    }

    #[test]
    fn inner_sweep_restarts_from_bound_and_halves() {
        let config = SearchConfig::new(32.0, 0.25, 2);
        let mut stub = |_: f64, _: f64, _: f64| None;
        let r = geometric_search(&mut stub, &config);
        let mut prev: Option<&SweepStep> = None;
        for step in &r.trace {
            match prev {
                Some(p) if p.outer == step.outer => assert_eq!(step.guess, p.guess / 2.0),
                _ => assert_eq!(step.guess, config.bound),
            }
            assert_eq!(step.failed_runs, config.r_search);
            prev = Some(step);
        }
    }

    #[test]
    fn minimum_is_over_every_run_once_accepting() {
        let config = SearchConfig::new(8.0, 0.25, 2);
        let mut i = 0u64;
        let mut stub = |_: f64, _: f64, _: f64| {
            i += 1;
            Some(if i.is_multiple_of(7) { 20.0 } else { 21.0 })
        };
        let r = geometric_search(&mut stub, &config);
        assert_eq!(r.value, Some(20.0));
        assert_eq!(r.trace.last().unwrap().runs, config.r_search);
    }

    #[test]
    fn floor_extends_the_outer_loop() {
        let config = SearchConfig {
            floor: 0.25,
            ..SearchConfig::new(4.0, 0.25, 2)
        };
        let mut stub = |_: f64, _: f64, _: f64| Some(1.0);
        let r = geometric_search(&mut stub, &config);
        assert_eq!(r.accepted_guess, Some(0.5));
        assert_eq!(r.value, Some(1.0));
    }

    #[test]
    fn single_triangle_is_found() {
        let g = gen_path_plus_clique(3, 3).unwrap();
        let r = approximate_cliques_auto(&g, 3, 0.5, EdgeEstimate::Exact, 4, Constants::default());
        assert!(r.ok && !r.raw_fail);
        assert!((r.estimate - 1.0).abs() <= 0.5, "{}", r.estimate);
    }

    #[test]
    fn triangle_free_graph_reports_zero() {
        let g = gen_path_plus_clique(30, 0).unwrap();
        let r = approximate_cliques_auto(&g, 3, 0.5, EdgeEstimate::Exact, 1, Constants::default());
        assert!(r.ok);
        assert!(r.raw_fail);
        assert!(r.no_cliques_detectable);
        assert_eq!(r.estimate, 0.0);
    }

    #[test]
    fn empty_graph_reports_zero() {
        let g = Graph::empty(10);
        let r = approximate_cliques_auto(&g, 3, 0.5, EdgeEstimate::Exact, 1, Constants::default());
        assert!(r.ok && r.no_cliques_detectable);
        assert_eq!(r.invocations, 0);
    }
}
