//! Repeated trials and their summary, shared by the CLI and the tests.

use serde::{Deserialize, Serialize};

use crate::estimator::{EstimateReport, Outcome};
use crate::graph::QueryCounts;

/// Version of the JSON report layout.
pub const REPORT_VERSION: u32 = 1;

/// Environment variable capping the worker count.
pub const THREADS_ENV: &str = "SUBCLIQUE_THREADS";

/// Worker count from [`THREADS_ENV`], if set to a positive integer.
pub fn threads_from_env() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&t| t > 0)
}

/// Runs `trial(i)` for `i in 0..trials` on a pool of at most `threads`
/// workers. Results come back in trial order.
pub fn run_trials<T, F>(trials: usize, threads: Option<usize>, trial: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    if threads == Some(1) || trials <= 1 {
        return (0..trials).map(trial).collect();
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        builder = builder.num_threads(t);
    }
    match builder.build() {
        Ok(pool) => pool.install(|| (0..trials).into_par_iter().map(&trial).collect()),
        Err(_) => (0..trials).map(trial).collect(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub seed: u64,
    pub estimate: f64,
    pub outcome: Outcome,
    pub chi_sum: u64,
    pub q_used: u64,
    pub s_used: usize,
    pub queries: QueryCounts,
    pub local_mode: bool,
    pub relative_error: Option<f64>,
    pub wallclock_ms: Option<f64>,
}

impl TrialRecord {
    pub fn from_report(trial: usize, seed: u64, r: &EstimateReport, exact: Option<u64>, timing: bool) -> Self {
        Self {
            trial,
            seed,
            estimate: r.estimate,
            outcome: r.outcome,
            chi_sum: r.chi_sum,
            q_used: r.q_used,
            s_used: r.s_used,
            queries: r.queries,
            local_mode: r.flags.local_mode,
            relative_error: exact.filter(|_| r.is_ok()).map(|c| relative_error(r.estimate, c as f64)),
            wallclock_ms: timing.then_some(r.wallclock.as_secs_f64() * 1e3),
        }
    }
}

/// `|x - truth| / truth`, or `|x|` when the truth is 0.
pub fn relative_error(x: f64, truth: f64) -> f64 {
    if truth == 0.0 {
        x.abs()
    } else {
        (x - truth).abs() / truth
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub trials: usize,
    pub ok: usize,
    pub mean: Option<f64>,
    pub stdev: Option<f64>,
    /// Share of trials that did not fail and, when the exact count is
    /// known, landed within `(1±ε)` of it.
    pub success_rate: f64,
    pub mean_queries: f64,
    pub mean_relative_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<u64>,
}

/// Summarizes estimates (`None` for failed trials) and total query counts.
pub fn summarize(values: &[Option<f64>], queries: &[u64], exact: Option<u64>, eps: f64) -> Summary {
    let ok: Vec<f64> = values.iter().flatten().copied().collect();
    let mean = (!ok.is_empty()).then(|| ok.iter().sum::<f64>() / ok.len() as f64);
    let stdev = mean.filter(|_| ok.len() > 1).map(|mu| {
        (ok.iter().map(|x| (x - mu).powi(2)).sum::<f64>() / (ok.len() - 1) as f64).sqrt()
    });
    let good = match exact {
        Some(c) => ok.iter().filter(|&&x| within(x, c as f64, eps)).count(),
        None => ok.len(),
    };
    let mean_relative_error = exact
        .filter(|_| !ok.is_empty())
        .map(|c| ok.iter().map(|&x| relative_error(x, c as f64)).sum::<f64>() / ok.len() as f64);
    Summary {
        trials: values.len(),
        ok: ok.len(),
        mean,
        stdev,
        success_rate: if values.is_empty() { 0.0 } else { good as f64 / values.len() as f64 },
        mean_queries: if queries.is_empty() {
            0.0
        } else {
            queries.iter().sum::<u64>() as f64 / queries.len() as f64
        },
        mean_relative_error,
        exact,
    }
}

/// `x ∈ [(1-ε)·truth, (1+ε)·truth]`.
pub fn within(x: f64, truth: f64, eps: f64) -> bool {
    x >= (1.0 - eps) * truth && x <= (1.0 + eps) * truth
}
