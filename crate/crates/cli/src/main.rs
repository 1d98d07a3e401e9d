use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use kset_core::bounds::{audit, bounds_report, BoundsReport};
use kset_core::fuzz::{sandwich_sweep, FuzzShape};
use kset_core::graph::{parse_graph, parse_model, product_reachability_search, product_set, GraphSpec, Reachability};
use kset_core::metrics::{covering_sequence, metrics_report};
use kset_core::solvability::{decide_solvability, replay_witness, simulate_min_protocol, MinStrategy, OracleOptions, ScenarioMode, Verdict};
use kset_core::topology::{
    certify_connectivity, closed_above_spec, find_shelling_order, input_pseudosphere, interpret, nerve, pseudosphere,
    reduced_homology_ranks, uninterpreted_complex, Complex,
};
use kset_core::{Budget, Error, Model};

/// Overrides every default enumeration limit when set to a positive integer.
const BUDGET_ENV: &str = "KSET_BUDGET";

const EXIT_INPUT: u8 = 2;
const EXIT_BUDGET: u8 = 3;
const EXIT_INCONSISTENT: u8 = 4;

#[derive(Parser, Debug)]
#[command(name = "kset", version, about = "k-set agreement on closed-above round-based models")]
struct Cli {
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    output: Format,
    /// Limit for every enumeration counter (default: built-in limits, or $KSET_BUDGET).
    #[arg(long, global = true)]
    budget: Option<u64>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Check {
    Pseudosphere,
    Homology,
    Shelling,
    Nerve,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Domination, covering and max-covering numbers of the model's generators.
    Metrics { model: PathBuf },
    /// Upper and lower bounds on k.
    Bounds {
        model: PathBuf,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
        rounds: u64,
    },
    /// Exact oblivious solvability of k-set agreement.
    Solve {
        model: PathBuf,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
        rounds: u64,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        k: u64,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        values: u64,
        /// Only the last round may be relaxed to a supergraph.
        #[arg(long)]
        relax_last: bool,
    },
    /// Worst case of the decide-the-minimum protocol.
    Simulate {
        model: PathBuf,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
        rounds: u64,
    },
    /// Topological checks on the uninterpreted (or, with --values, protocol) complex.
    Topology {
        model: PathBuf,
        #[arg(long, value_enum)]
        check: Check,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        values: Option<u64>,
    },
    /// r-fold products of the generators, or reachability of a target graph.
    Product {
        model: PathBuf,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
        rounds: u64,
        #[arg(long)]
        target: Option<PathBuf>,
    },
    /// Bounds checked against the oracle threshold.
    Audit {
        model: PathBuf,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
        rounds: u64,
    },
    /// Sandwich audit over seeded random models.
    Fuzz {
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 50)]
        count: usize,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
        rounds: u64,
        #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u64).range(2..=8))]
        max_n: u64,
        #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u64).range(1..))]
        max_generators: u64,
    },
}

/// A finished command: its JSON report, a text rendering and the exit code.
struct Out {
    json: Value,
    text: String,
    code: u8,
}

impl Out {
    fn ok(json: Value, text: String) -> Self {
        Out { json, text, code: 0 }
    }
}

#[derive(Debug)]
enum Failure {
    Io(PathBuf, std::io::Error),
    Core(Error),
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Core(e) if e.is_budget() => EXIT_BUDGET,
            Failure::Core(Error::Inconsistent(_)) => EXIT_INCONSISTENT,
            Failure::Core(Error::Overflow) => 1,
            _ => EXIT_INPUT,
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Io(p, e) => format!("cannot read {}: {e}", p.display()),
            Failure::Core(e) => e.to_string(),
            Failure::Usage(m) => m.clone(),
        }
    }
}

type Res<T> = std::result::Result<T, Failure>;

fn read(path: &Path) -> Res<String> {
    std::fs::read_to_string(path).map_err(|e| Failure::Io(path.to_path_buf(), e))
}

fn load_model(path: &Path) -> Res<Model> {
    Ok(parse_model(&read(path)?)?)
}

fn budget(flag: Option<u64>) -> Res<Budget> {
    let limit = match flag {
        Some(v) => Some(v),
        None => match std::env::var(BUDGET_ENV) {
            Ok(s) => Some(
                s.trim()
                    .parse::<u64>()
                    .map_err(|_| Failure::Usage(format!("{BUDGET_ENV} must be a positive integer, got {s:?}")))?,
            ),
            Err(_) => None,
        },
    };
    match limit {
        Some(0) => Err(Failure::Usage("budget must be positive".into())),
        Some(v) => Ok(Budget::uniform(v)),
        None => Ok(Budget::default()),
    }
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

fn bounds_text(r: &BoundsReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "n = {}, rounds = {}", r.model.n, r.rounds);
    for u in &r.upper {
        let _ = writeln!(s, "solvable   k = {:<2} {:?}: {}", u.k, u.method, u.cite);
    }
    for l in &r.lower {
        let _ = writeln!(s, "impossible k = {:<2} {:?} ({:?}): {}", l.k, l.method, l.applicability, l.cite);
    }
    let _ = writeln!(s, "best: impossible up to {}, solvable at {:?}, tight {:?}", r.best_lower, r.best_upper, r.tight);
    for n in &r.notes {
        let _ = writeln!(s, "note: {n}");
    }
    s
}

fn metrics(path: &Path) -> Res<Out> {
    let model = load_model(path)?;
    let gens = model.effective_generators();
    let report = metrics_report(&gens)?;
    let mut json = to_value(&report);
    let seq: Vec<Value> = (1..=model.n())
        .map(|i| covering_sequence(&gens, i, model.n() + 1).map(|s| json!({"i": i, "sequence": s})))
        .collect::<Result<_, _>>()?;
    json["covering_sequences"] = Value::Array(seq);
    let text = format!(
        "n = {}, graphs = {}\ndom = {:?}\nedom = {}\ncov = {:?}\nedom_over = {}\ncommon_dom = {}\nmax_cov = {:?}\nm_coeff = {:?}\n",
        report.n, report.graph_count, report.dom, report.edom, report.cov, report.edom_over, report.common_dom, report.max_cov, report.m_coeff
    );
    Ok(Out::ok(json, text))
}

fn bounds(path: &Path, rounds: usize, b: &Budget) -> Res<Out> {
    let r = bounds_report(&load_model(path)?, rounds, b)?;
    Ok(Out::ok(to_value(&r), bounds_text(&r)))
}

fn solve(path: &Path, rounds: usize, k: usize, m: usize, relax_last: bool, b: &Budget) -> Res<Out> {
    let model = load_model(path)?;
    let mode = if relax_last { ScenarioMode::RelaxLast } else { ScenarioMode::Exact };
    let verdict = decide_solvability(&model, rounds, k, m, &OracleOptions { mode, budget: *b })?;
    let mut json = json!({
        "result": verdict.label(),
        "rounds": rounds,
        "k": k,
        "values": m,
        "mode": mode,
    });
    let mut text = format!("{}: {k}-set agreement, {m} values, {rounds} round(s)\n", verdict.label());
    let mut code = 0;
    match &verdict {
        Verdict::Sat(map) => {
            let replay = replay_witness(&model, rounds, k, m, mode, map, b.scenarios)?;
            let _ = writeln!(text, "witness: {} views, replay {}", map.len(), if replay.ok { "ok" } else { "FAILED" });
            json["witness"] = to_value(map);
            json["replay"] = to_value(&replay);
        }
        Verdict::Unsat(cert) => {
            let _ = writeln!(
                text,
                "refuted over {} graphs, {} constraining scenarios, {} views",
                cert.graphs, cert.constraining_scenarios, cert.views
            );
            json["certificate"] = to_value(cert);
        }
        Verdict::Budget { what, limit } => {
            let _ = writeln!(text, "{what} budget of {limit} exhausted");
            json["budget"] = json!({"what": what, "limit": limit});
            code = EXIT_BUDGET;
        }
    }
    Ok(Out { json, text, code })
}

fn simulate(path: &Path, rounds: usize, b: &Budget) -> Res<Out> {
    let r = simulate_min_protocol(&load_model(path)?, rounds, MinStrategy::MinReceived, b.products)?;
    let text = format!(
        "worst case {} distinct decisions after {rounds} round(s) (exact: {}; on products: {})\n",
        r.worst_case, r.exact, r.worst_on_products
    );
    Ok(Out::ok(to_value(&r), text))
}

fn topology(path: &Path, check: Check, values: Option<usize>, b: &Budget) -> Res<Out> {
    let model = load_model(path)?;
    let n = model.n();
    let mut complex = uninterpreted_complex(&model, b.simplices)?;
    if let Some(m) = values {
        complex = interpret(&complex, &input_pseudosphere(n, m, b.simplices)?, b.simplices)?;
    }
    let label = if values.is_some() { "protocol" } else { "uninterpreted" };
    let (json, text) = match check {
        Check::Pseudosphere => {
            let gens = model.effective_generators();
            let mut rows = Vec::new();
            let mut text = String::new();
            for g in &gens {
                let spec = closed_above_spec(g);
                let single = uninterpreted_complex(&Model::simple(*g), b.simplices)?;
                let built = pseudosphere(&spec, b.simplices)?;
                let live = spec.live_colors();
                let ranks = reduced_homology_ranks(&built, live.saturating_sub(1), b.simplices)?;
                let equal = built == single;
                let _ = writeln!(text, "{:?}: {} facets, matches closure {equal}, ranks {ranks:?}", GraphSpec::from(g).edges, spec.facet_count());
                rows.push(json!({
                    "generator": GraphSpec::from(g),
                    "facets": spec.facet_count().to_string(),
                    "matches_closure": equal,
                    "reduced_ranks": ranks,
                }));
            }
            (json!({"check": "pseudosphere", "generators": rows}), text)
        }
        Check::Homology => {
            let ranks = reduced_homology_ranks(&complex, n.saturating_sub(1), b.simplices)?;
            let level = n as i64 - 2;
            let verdict = certify_connectivity(&complex, level, b)?;
            let text = format!("{label} complex: {} facets, reduced ranks {ranks:?}, {level}-connectivity {verdict:?}\n", complex.facets().len());
            (
                json!({"check": "homology", "complex": label, "facets": complex.facets().len(), "reduced_ranks": ranks, "level": level, "connectivity": verdict}),
                text,
            )
        }
        Check::Shelling => {
            let order = find_shelling_order(&complex, b.search_nodes)?;
            let text = match &order {
                Some(o) => format!("{label} complex is shellable; order {o:?}\n"),
                None => format!("{label} complex is not shellable\n"),
            };
            (json!({"check": "shelling", "complex": label, "shellable": order.is_some(), "order": order}), text)
        }
        Check::Nerve => {
            let cover: Vec<Complex> = model
                .effective_generators()
                .iter()
                .map(|g| uninterpreted_complex(&Model::simple(*g), b.simplices))
                .collect::<Result<_, _>>()?;
            let nv = nerve(&cover);
            let full = nv.facets().len() == 1 && nv.facets()[0].len() == cover.len();
            let text = format!("nerve of {} cover elements: full simplex {full}\n", cover.len());
            (json!({"check": "nerve", "cover": cover.len(), "full_simplex": full, "nerve": nv.to_json()}), text)
        }
    };
    Ok(Out::ok(json, text))
}

fn product(path: &Path, rounds: usize, target: Option<&Path>, b: &Budget) -> Res<Out> {
    let model = load_model(path)?;
    let Some(tp) = target else {
        let graphs = product_set(&model, rounds, b.products, false)?;
        let specs: Vec<GraphSpec> = graphs.iter().map(GraphSpec::from).collect();
        let text = format!("{} distinct {rounds}-round products\n", specs.len());
        return Ok(Out::ok(json!({"rounds": rounds, "count": specs.len(), "graphs": specs}), text));
    };
    let target = parse_graph(&read(tp)?)?;
    let gens = model.effective_generators();
    if target.n() != model.n() {
        return Err(Error::MismatchedN { left: model.n(), right: target.n() }.into());
    }
    // every tuple of generators is a candidate factor list
    let tuples = (gens.len() as u64).checked_pow(rounds as u32).filter(|&t| t <= b.products);
    let Some(tuples) = tuples else {
        return Err(Error::BudgetExceeded { what: "product", limit: b.products }.into());
    };
    let mut refutations = Vec::new();
    for idx in 0..tuples {
        let mut rest = idx;
        let factors: Vec<_> = (0..rounds)
            .map(|_| {
                let g = gens[(rest % gens.len() as u64) as usize];
                rest /= gens.len() as u64;
                g
            })
            .collect();
        match product_reachability_search(&factors, &target, b.search_nodes, false)? {
            Reachability::Witness(ws) => {
                let specs: Vec<GraphSpec> = ws.iter().map(GraphSpec::from).collect();
                let text = format!("reachable: factors {:?}\n", specs.iter().map(|s| &s.edges).collect::<Vec<_>>());
                return Ok(Out::ok(json!({"rounds": rounds, "target": GraphSpec::from(&target), "reachable": true, "witness": specs}), text));
            }
            Reachability::Refuted(r) => refutations.push(json!({
                "factors": factors.iter().map(GraphSpec::from).collect::<Vec<_>>(),
                "refutation": r,
            })),
        }
    }
    let text = format!("unreachable: {} factor tuples refuted\n", refutations.len());
    Ok(Out::ok(
        json!({"rounds": rounds, "target": GraphSpec::from(&target), "reachable": false, "refutations": refutations}),
        text,
    ))
}

fn audit_cmd(path: &Path, rounds: usize, b: &Budget) -> Res<Out> {
    let a = audit(&load_model(path)?, rounds, b)?;
    let mut text = bounds_text(&a.bounds);
    for run in &a.oracle {
        let _ = writeln!(text, "oracle k = {} ({} values): {}", run.k, run.values, run.result);
    }
    let _ = writeln!(text, "threshold: {:?}", a.threshold);
    let code = if a.budget_exhausted { EXIT_BUDGET } else { 0 };
    Ok(Out { json: to_value(&a), text, code })
}

fn fuzz(seed: u64, count: usize, rounds: usize, shape: FuzzShape, b: &Budget) -> Res<Out> {
    let r = sandwich_sweep(seed, count, rounds, shape, b)?;
    let mut text = format!(
        "seed {seed}: {} models, {} checked, {} tight, {} violations, {} excluded by budget\n",
        r.models, r.checked, r.tight, r.violations, r.budget_excluded
    );
    for e in r.entries.iter().filter(|e| e.message.is_some()) {
        let _ = writeln!(text, "model {}: {}", e.index, e.message.as_deref().unwrap_or(""));
    }
    let code = if r.violations > 0 { EXIT_INCONSISTENT } else { 0 };
    Ok(Out { json: to_value(&r), text, code })
}

fn usize_of(v: u64) -> Res<usize> {
    usize::try_from(v).map_err(|_| Failure::Usage(format!("{v} is too large")))
}

fn run(cli: &Cli) -> Res<Out> {
    let b = budget(cli.budget)?;
    match &cli.cmd {
        Cmd::Metrics { model } => metrics(model),
        Cmd::Bounds { model, rounds } => bounds(model, usize_of(*rounds)?, &b),
        Cmd::Solve { model, rounds, k, values, relax_last } => {
            solve(model, usize_of(*rounds)?, usize_of(*k)?, usize_of(*values)?, *relax_last, &b)
        }
        Cmd::Simulate { model, rounds } => simulate(model, usize_of(*rounds)?, &b),
        Cmd::Topology { model, check, values } => topology(model, *check, values.map(usize_of).transpose()?, &b),
        Cmd::Product { model, rounds, target } => product(model, usize_of(*rounds)?, target.as_deref(), &b),
        Cmd::Audit { model, rounds } => audit_cmd(model, usize_of(*rounds)?, &b),
        Cmd::Fuzz { seed, count, rounds, max_n, max_generators } => fuzz(
            *seed,
            *count,
            usize_of(*rounds)?,
            FuzzShape {
                max_n: usize_of(*max_n)?,
                max_generators: usize_of(*max_generators)?,
            },
            &b,
        ),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            let body = match cli.output {
                Format::Json => serde_json::to_string_pretty(&out.json).expect("reports serialize") + "\n",
                Format::Text => out.text,
            };
            // a closed pipe downstream is not our failure
            let _ = std::io::stdout().write_all(body.as_bytes());
            ExitCode::from(out.code)
        }
        Err(f) => {
            eprintln!("kset: {}", f.message());
            if cli.output == Format::Json {
                println!("{}", json!({"error": f.message(), "exit": f.code()}));
            }
            ExitCode::from(f.code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;
    use kset_core::graph::ModelSpec;

    #[test]
    fn cli_definition_is_valid() {
        Cli::command().debug_assert();
    }

    #[test]
    fn exit_codes() {
        let budget = Failure::Core(Error::BudgetExceeded { what: "x", limit: 1 });
        assert_eq!(budget.code(), EXIT_BUDGET);
        assert_eq!(Failure::Core(Error::Parse("x".into())).code(), EXIT_INPUT);
        assert_eq!(Failure::Core(Error::Inconsistent("x".into())).code(), EXIT_INCONSISTENT);
    }

    #[test]
    fn model_spec_round_trip() {
        let m = Model::star_family(4, 2).unwrap();
        let text = serde_json::to_string(&ModelSpec::from(&m)).unwrap();
        assert_eq!(parse_model(&text).unwrap(), m);
    }
}
