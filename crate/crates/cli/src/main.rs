use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use subclique::baseline::{count_cliques_exact, gen_gnm, gen_path_plus_clique};
use subclique::harness::{self, summarize, TrialRecord, REPORT_VERSION};
use subclique::{
    approximate_cliques, approximate_cliques_auto, load_edge_list, Constants, EdgeEstimate, Graph, LoopPolicy,
    Outcome, ParamError, Params, QueryOracle,
};

#[derive(Parser, Debug)]
#[command(name = "subclique", version, about = "Approximate k-clique counting from degree, neighbor and pair queries")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a synthetic graph as an edge list
    Gen(GenArgs),
    /// Count k-cliques exactly
    Exact(ExactArgs),
    /// Estimate with a supplied clique-count guess
    Estimate(EstimateArgs),
    /// Estimate without a guess, by halving search
    Auto(AutoArgs),
    /// Sweep a graph family and tabulate cost and accuracy
    Bench(BenchArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Family {
    PathClique,
    Gnm,
}

#[derive(Args, Debug)]
struct GenArgs {
    #[arg(long, value_enum)]
    family: Family,
    #[arg(long)]
    n: usize,
    /// Clique size for path-clique
    #[arg(long, default_value_t = 0)]
    t: usize,
    /// Edge count for gnm
    #[arg(long, default_value_t = 0)]
    edges: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file (stdout when absent)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct GraphArgs {
    #[arg(long)]
    graph: PathBuf,
    /// Drop self-loops instead of rejecting the file
    #[arg(long)]
    skip_self_loops: bool,
}

#[derive(Args, Debug)]
struct ExactArgs {
    #[command(flatten)]
    input: GraphArgs,
    #[arg(long)]
    k: usize,
    /// Include c_k(u) for every vertex
    #[arg(long)]
    per_vertex: bool,
    #[arg(long)]
    json_out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Serialize)]
struct TuningArgs {
    #[arg(long)]
    s_const: Option<f64>,
    #[arg(long)]
    q_const: Option<f64>,
    #[arg(long)]
    tau_c_const: Option<f64>,
    #[arg(long)]
    tau_d_const: Option<f64>,
    /// Replay every sampling call instead of skipping rejected ones in bulk
    #[arg(long)]
    no_accelerate: bool,
}

impl TuningArgs {
    fn constants(&self) -> Constants {
        let d = Constants::default();
        Constants {
            s_const: self.s_const.unwrap_or(d.s_const),
            q_const: self.q_const.unwrap_or(d.q_const),
            tau_c_const: self.tau_c_const.unwrap_or(d.tau_c_const),
            tau_d_const: self.tau_d_const.unwrap_or(d.tau_d_const),
            accelerate: !self.no_accelerate,
            ..d
        }
    }
}

#[derive(Args, Debug, Clone, Serialize)]
struct RunArgs {
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 0.5)]
    eps: f64,
    /// Edge estimate: "exact" for (1-ε/5)·m, or a number
    #[arg(long, default_value = "exact")]
    mbar: String,
    #[arg(long, default_value_t = 1)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Add the exact count and per-trial relative errors
    #[arg(long)]
    with_exact: bool,
    /// Record wall-clock time per trial (breaks byte-identical output)
    #[arg(long)]
    timing: bool,
    #[arg(long)]
    #[serde(skip)]
    json_out: Option<PathBuf>,
    #[command(flatten)]
    tuning: TuningArgs,
}

#[derive(Args, Debug)]
struct EstimateArgs {
    #[command(flatten)]
    input: GraphArgs,
    #[command(flatten)]
    run: RunArgs,
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
    /// Clique-count guess C̄_k
    #[arg(long)]
    ckbar: f64,
    /// Print derived parameters and stop
    #[arg(long)]
    dry_run: bool,
}

#[derive(Args, Debug)]
struct AutoArgs {
    #[command(flatten)]
    input: GraphArgs,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Args, Debug)]
struct BenchArgs {
    #[arg(long, value_enum)]
    family: Family,
    #[arg(long)]
    n: usize,
    /// Clique sizes for path-clique, comma separated
    #[arg(long, value_delimiter = ',')]
    ts: Vec<usize>,
    /// Edge counts for gnm, comma separated
    #[arg(long = "edges", value_delimiter = ',')]
    edge_counts: Vec<usize>,
    #[arg(long, default_value_t = 0)]
    graph_seed: u64,
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
    /// Guess as a fraction of the exact count
    #[arg(long, default_value_t = 0.5)]
    ckbar_ratio: f64,
    #[arg(long)]
    csv_out: Option<PathBuf>,
    #[arg(long)]
    dry_run: bool,
    #[command(flatten)]
    run: RunArgs,
}

/// Exit codes: 0 success, 1 every trial failed, 2 bad input or usage.
fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(a) => cmd_gen(&a),
        Command::Exact(a) => cmd_exact(&a),
        Command::Estimate(a) => cmd_estimate(&a),
        Command::Auto(a) => cmd_auto(&a),
        Command::Bench(a) => cmd_bench(&a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn load_graph(input: &GraphArgs) -> Result<Graph> {
    let file = File::open(&input.graph).with_context(|| format!("cannot open {}", input.graph.display()))?;
    let policy = if input.skip_self_loops {
        LoopPolicy::Skip
    } else {
        LoopPolicy::Reject
    };
    load_edge_list(BufReader::new(file), policy).with_context(|| format!("cannot read {}", input.graph.display()))
}

fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn to_json(value: &Value) -> Result<String> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    Ok(text)
}

fn parse_mbar(text: &str, eps: f64, graph: &Graph) -> Result<f64> {
    if text == "exact" {
        return Ok((1.0 - eps / 5.0) * graph.m() as f64);
    }
    text.parse::<f64>()
        .map_err(|_| anyhow!(format!("--mbar must be \"exact\" or a number (got {text:?})")))
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(ParamError::Epsilon.into());
    }
    Ok(())
}

fn cmd_gen(a: &GenArgs) -> Result<ExitCode> {
    let graph = match a.family {
        Family::PathClique => gen_path_plus_clique(a.n, a.t)?,
        Family::Gnm => gen_gnm(a.n, a.edges, a.seed)?,
    };
    match &a.out {
        Some(p) => {
            let file = File::create(p).with_context(|| format!("cannot write {}", p.display()))?;
            let mut w = BufWriter::new(file);
            graph.write_edge_list(&mut w)?;
            w.flush()?;
        }
        None => graph.write_edge_list(BufWriter::new(io::stdout().lock()))?,
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_exact(a: &ExactArgs) -> Result<ExitCode> {
    let graph = load_graph(&a.input)?;
    let census = count_cliques_exact(&graph, a.k)?;
    let mut report = json!({
        "version": REPORT_VERSION,
        "command": "exact",
        "graph": { "path": a.input.graph, "n": graph.n(), "m": graph.m() },
        "k": a.k,
        "total": census.total,
    });
    if a.per_vertex {
        report["per_vertex"] = json!(census.per_vertex);
    }
    write_output(a.json_out.as_deref(), &to_json(&report)?)?;
    Ok(ExitCode::SUCCESS)
}

fn exact_count(graph: &Graph, k: usize, wanted: bool) -> Result<Option<u64>> {
    Ok(if wanted {
        Some(count_cliques_exact(graph, k)?.total)
    } else {
        None
    })
}

/// Runs `trials` fixed-guess estimates on `graph`.
fn estimate_trials(graph: &Graph, base: &Params, run: &RunArgs, exact: Option<u64>) -> Vec<TrialRecord> {
    harness::run_trials(run.trials, harness::threads_from_env(), |i| {
        let seed = run.seed.wrapping_add(i as u64);
        let params = Params { seed, ..base.clone() };
        let oracle = QueryOracle::new(graph);
        let report = approximate_cliques(&oracle, &params);
        TrialRecord::from_report(i, seed, &report, exact, run.timing)
    })
}

fn summary_of(trials: &[TrialRecord], exact: Option<u64>, eps: f64) -> harness::Summary {
    let values: Vec<Option<f64>> = trials
        .iter()
        .map(|t| (t.outcome == Outcome::Ok).then_some(t.estimate))
        .collect();
    let queries: Vec<u64> = trials.iter().map(|t| t.queries.total()).collect();
    summarize(&values, &queries, exact, eps)
}

fn cmd_estimate(a: &EstimateArgs) -> Result<ExitCode> {
    check_eps(a.run.eps)?;
    let graph = load_graph(&a.input)?;
    let m_bar = parse_mbar(&a.run.mbar, a.run.eps, &graph)?;
    let params = Params::derive_with(
        graph.n(),
        a.run.k,
        m_bar,
        a.ckbar,
        a.run.eps,
        a.delta,
        a.run.seed,
        a.run.tuning.constants(),
    )?;
    let mut report = json!({
        "version": REPORT_VERSION,
        "command": "estimate",
        "config": {
            "graph": a.input.graph,
            "k": a.run.k,
            "eps": a.run.eps,
            "delta": a.delta,
            "mbar": a.run.mbar,
            "ckbar": a.ckbar,
            "trials": a.run.trials,
            "seed": a.run.seed,
            "with_exact": a.run.with_exact,
            "tuning": a.run.tuning,
        },
        "graph": { "n": graph.n(), "m": graph.m() },
        "params": params,
    });
    if a.dry_run {
        write_output(a.run.json_out.as_deref(), &to_json(&report)?)?;
        return Ok(ExitCode::SUCCESS);
    }
    let exact = exact_count(&graph, a.run.k, a.run.with_exact)?;
    let trials = estimate_trials(&graph, &params, &a.run, exact);
    let summary = summary_of(&trials, exact, a.run.eps);
    let all_failed = !trials.is_empty() && summary.ok == 0;
    report["trials"] = json!(trials);
    report["summary"] = json!(summary);
    write_output(a.run.json_out.as_deref(), &to_json(&report)?)?;
    Ok(if all_failed { ExitCode::from(1) } else { ExitCode::SUCCESS })
}

fn cmd_auto(a: &AutoArgs) -> Result<ExitCode> {
    check_eps(a.run.eps)?;
    let graph = load_graph(&a.input)?;
    let edges = match a.run.mbar.as_str() {
        "exact" => EdgeEstimate::Exact,
        other => EdgeEstimate::Supplied(parse_mbar(other, a.run.eps, &graph)?),
    };
    let exact = exact_count(&graph, a.run.k, a.run.with_exact)?;
    let constants = a.run.tuning.constants();
    let runs = harness::run_trials(a.run.trials, harness::threads_from_env(), |i| {
        let seed = a.run.seed.wrapping_add(i as u64);
        let start = std::time::Instant::now();
        let r = approximate_cliques_auto(&graph, a.run.k, a.run.eps, edges, seed, constants);
        let elapsed = start.elapsed();
        (seed, r, elapsed)
    });
    let values: Vec<Option<f64>> = runs.iter().map(|(_, r, _)| r.ok.then_some(r.estimate)).collect();
    let queries: Vec<u64> = runs.iter().map(|(_, r, _)| r.queries.total()).collect();
    let summary = summarize(&values, &queries, exact, a.run.eps);
    let trials: Vec<Value> = runs
        .iter()
        .enumerate()
        .map(|(i, (seed, r, elapsed))| {
            json!({
                "trial": i,
                "seed": seed,
                "estimate": r.estimate,
                "outcome": if r.ok { Outcome::Ok } else { Outcome::Fail },
                "chi_sum": Value::Null,
                "queries": r.queries,
                "raw_fail": r.raw_fail,
                "no_cliques_detectable": r.no_cliques_detectable,
                "accepted_guess": r.accepted_guess,
                "invocations": r.invocations,
                "failed_invocations": r.failed_invocations,
                "relative_error": exact.filter(|_| r.ok).map(|c| harness::relative_error(r.estimate, c as f64)),
                "wallclock_ms": a.run.timing.then_some(elapsed.as_secs_f64() * 1e3),
                "trace": r.trace,
            })
        })
        .collect();
    let search = runs.first().and_then(|(_, r, _)| r.config.clone());
    let report = json!({
        "version": REPORT_VERSION,
        "command": "auto",
        "config": {
            "graph": a.input.graph,
            "k": a.run.k,
            "eps": a.run.eps,
            "mbar": a.run.mbar,
            "trials": a.run.trials,
            "seed": a.run.seed,
            "with_exact": a.run.with_exact,
            "tuning": a.run.tuning,
        },
        "graph": { "n": graph.n(), "m": graph.m() },
        "params": { "m_bar": runs.first().map(|(_, r, _)| r.m_bar), "search": search },
        "trials": trials,
        "summary": summary,
    });
    write_output(a.run.json_out.as_deref(), &to_json(&report)?)?;
    let all_failed = !runs.is_empty() && summary.ok == 0;
    Ok(if all_failed { ExitCode::from(1) } else { ExitCode::SUCCESS })
}

#[derive(Debug, Serialize)]
struct BenchRow {
    family: Family,
    n: usize,
    m: usize,
    size: usize,
    k: usize,
    c_k: u64,
    ckbar: f64,
    mean_queries: f64,
    mean_relative_error: Option<f64>,
    success_rate: f64,
    /// n/C^{1/k} + m^{k/2}/C
    shape: f64,
    queries_per_shape: f64,
}

fn cmd_bench(a: &BenchArgs) -> Result<ExitCode> {
    check_eps(a.run.eps)?;
    let sizes = match a.family {
        Family::PathClique => &a.ts,
        Family::Gnm => &a.edge_counts,
    };
    if sizes.is_empty() {
        return Err(anyhow!("no instances"));
    }
    let k = a.run.k;
    let mut rows = Vec::new();
    let mut dry = Vec::new();
    for &size in sizes {
        let graph = match a.family {
            Family::PathClique => gen_path_plus_clique(a.n, size)?,
            Family::Gnm => gen_gnm(a.n, size, a.graph_seed)?,
        };
        let c_k = count_cliques_exact(&graph, k)?.total;
        if c_k == 0 {
            bail!("instance with size {size} has no {k}-cliques");
        }
        let m_bar = parse_mbar(&a.run.mbar, a.run.eps, &graph)?;
        let ckbar = (c_k as f64 * a.ckbar_ratio).max(1.0);
        let params = Params::derive_with(
            graph.n(),
            k,
            m_bar,
            ckbar,
            a.run.eps,
            a.delta,
            a.run.seed,
            a.run.tuning.constants(),
        )?;
        if a.dry_run {
            dry.push(json!({ "size": size, "n": graph.n(), "m": graph.m(), "c_k": c_k, "params": params }));
            continue;
        }
        let trials = estimate_trials(&graph, &params, &a.run, Some(c_k));
        let s = summary_of(&trials, Some(c_k), a.run.eps);
        let (n, m, c) = (graph.n() as f64, graph.m() as f64, c_k as f64);
        let shape = n / c.powf(1.0 / k as f64) + m.powf(k as f64 / 2.0) / c;
        rows.push(BenchRow {
            family: a.family,
            n: graph.n(),
            m: graph.m(),
            size,
            k,
            c_k,
            ckbar,
            mean_queries: s.mean_queries,
            mean_relative_error: s.mean_relative_error,
            success_rate: s.success_rate,
            shape,
            queries_per_shape: s.mean_queries / shape,
        });
    }
    if a.dry_run {
        let report = json!({ "version": REPORT_VERSION, "command": "bench", "dry_run": true, "instances": dry });
        write_output(a.run.json_out.as_deref(), &to_json(&report)?)?;
        return Ok(ExitCode::SUCCESS);
    }
    if let Some(path) = &a.csv_out {
        let mut w = csv::Writer::from_path(path).with_context(|| format!("cannot write {}", path.display()))?;
        for row in &rows {
            w.serialize(row)?;
        }
        w.flush()?;
    }
    let report = json!({
        "version": REPORT_VERSION,
        "command": "bench",
        "config": {
            "family": a.family,
            "n": a.n,
            "sizes": sizes,
            "k": k,
            "eps": a.run.eps,
            "delta": a.delta,
            "ckbar_ratio": a.ckbar_ratio,
            "trials": a.run.trials,
            "seed": a.run.seed,
        },
        "rows": rows,
    });
    write_output(a.run.json_out.as_deref(), &to_json(&report)?)?;
    Ok(ExitCode::SUCCESS)
}
