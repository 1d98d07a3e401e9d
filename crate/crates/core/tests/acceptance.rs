//! Acceptance criteria, one PASS/FAIL line each. Runs without the libtest
//! harness so the lines always reach the terminal.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use kset_core::bounds::{bounds_report, UpperMethod};
use kset_core::fuzz::{random_model, sandwich_sweep, FuzzShape, SweepStatus};
use kset_core::graph::{product_reachability_search, symmetric_closure, Reachability};
use kset_core::metrics::{cov, covering_sequence, edom, edom_over};
use kset_core::solvability::{decide_solvability, simulate_min_protocol, MinStrategy, OracleOptions, Verdict};
use kset_core::topology::{
    check_shelling_order, closed_above_spec, find_shelling_order, intersect_pseudospheres, nerve, pseudosphere,
    reduced_homology_ranks, uninterpreted_complex, Complex, PseudosphereSpec, Simplex, Vertex, View,
};
use kset_core::{Budget, Digraph, Model};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(start: Instant, limit: Duration, what: &str) -> Result<(), String> {
    let took = start.elapsed();
    ensure(took <= limit, || format!("{what} took {took:.1?}, limit {limit:?}"))
}

fn hub_cycle() -> Digraph {
    Digraph::new(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (2, 3), (3, 1)]).unwrap()
}

fn ring(n: usize) -> Digraph {
    let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    Digraph::new(n, &edges).unwrap()
}

fn random_graph(rng: &mut ChaCha8Rng, n: usize, p: f64) -> Digraph {
    let edges: Vec<_> = (0..n)
        .flat_map(|u| (0..n).map(move |v| (u, v)))
        .filter(|&(u, v)| u != v && rng.gen_bool(p))
        .collect();
    Digraph::new(n, &edges).unwrap()
}

/// `g` plus random extra edges.
fn random_super(rng: &mut ChaCha8Rng, g: &Digraph, p: f64) -> Digraph {
    let n = g.n();
    let mut edges = g.edges_without_loops();
    for u in 0..n {
        for v in 0..n {
            if u != v && !g.has_edge(u, v) && rng.gen_bool(p) {
                edges.push((u, v));
            }
        }
    }
    Digraph::new(n, &edges).unwrap()
}

/// Boolean-matrix composition, independent of the library's bitset code.
fn naive_product(g: &Digraph, h: &Digraph) -> Vec<(usize, usize)> {
    let n = g.n();
    let mut out = Vec::new();
    for u in 0..n {
        for v in 0..n {
            if (0..n).any(|w| g.has_edge(u, w) && h.has_edge(w, v)) {
                out.push((u, v));
            }
        }
    }
    out
}

fn simplex(vs: &[usize]) -> Simplex {
    Simplex::new(vs.iter().map(|&v| Vertex::new(v, View::Value(0))).collect()).unwrap()
}

fn c1_hub_cycle_metrics() -> Check {
    let start = Instant::now();
    let s = symmetric_closure(&[hub_cycle()]).map_err(|e| e.to_string())?;
    let (c2, e) = (cov(&s, 2).unwrap(), edom(&s).unwrap());
    ensure(c2 == 3 && e == 4, || format!("cov_2 = {c2}, eDom = {e}"))?;
    let model = Model::new(vec![hub_cycle()], true).unwrap();
    let r = bounds_report(&model, 1, &Budget::default()).map_err(|e| e.to_string())?;
    let k = |m| r.upper.iter().find(|u| u.method == m).map(|u| u.k);
    ensure(k(UpperMethod::Cov) == Some(3) && k(UpperMethod::Edom) == Some(4), || {
        format!("cov bound {:?}, edom bound {:?}", k(UpperMethod::Cov), k(UpperMethod::Edom))
    })?;
    within(start, Duration::from_secs(1), "hub-and-cycle metrics")?;
    Ok(format!("cov_2 = 3, eDom = 4, bounds 3 and 4 in {:.2?}", start.elapsed()))
}

fn c2_star_tightness() -> Check {
    let start = Instant::now();
    let mut runs = 0;
    for n in 3..=4 {
        for s in 1..n {
            let model = Model::star_family(n, s).unwrap();
            let over = edom_over(&model.effective_generators()).unwrap();
            ensure(over == n - s + 1, || format!("n = {n}, s = {s}: eDomOver = {over}"))?;
            for (k, want_sat) in [(n - s, false), (n - s + 1, true)] {
                let v = decide_solvability(&model, 1, k, k + 1, &OracleOptions::default()).map_err(|e| e.to_string())?;
                runs += 1;
                ensure(v.is_sat() == want_sat && !matches!(v, Verdict::Budget { .. }), || {
                    format!("n = {n}, s = {s}, k = {k}: {}", v.label())
                })?;
            }
        }
    }
    within(start, Duration::from_secs(600), "star tightness")?;
    Ok(format!("{runs} oracle runs, UNSAT at n-s and SAT at n-s+1, {:.1?}", start.elapsed()))
}

fn random_spec(rng: &mut ChaCha8Rng) -> PseudosphereSpec {
    let n = rng.gen_range(1..=5);
    let families = (0..n)
        .map(|_| {
            let size = rng.gen_range(0..=3);
            (0..size).map(|_| View::Value(rng.gen_range(0..5))).collect()
        })
        .collect();
    PseudosphereSpec::new(families)
}

fn c3_pseudosphere_connectivity() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut checked_dims = 0;
    for i in 0..100 {
        let spec = random_spec(&mut rng);
        let live = spec.live_colors();
        let c = pseudosphere(&spec, 1_000_000).map_err(|e| e.to_string())?;
        ensure(c.facets().len() as u128 == spec.facet_count(), || format!("spec {i}: facet count"))?;
        if live < 2 {
            continue;
        }
        let ranks = reduced_homology_ranks(&c, live - 2, 10_000_000).map_err(|e| e.to_string())?;
        checked_dims += ranks.len();
        ensure(ranks.iter().all(|&r| r == 0), || format!("spec {i} ({live} live colors): ranks {ranks:?}"))?;
    }
    within(start, Duration::from_secs(60), "pseudosphere connectivity")?;
    Ok(format!("100 specs, {checked_dims} vanishing ranks, {:.1?}", start.elapsed()))
}

fn c4_closed_above_connectivity() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let shape = FuzzShape::default();
    for i in 0..50 {
        let model = random_model(&mut rng, shape).map_err(|e| e.to_string())?;
        let n = model.n();
        let c = uninterpreted_complex(&model, 10_000_000).map_err(|e| e.to_string())?;
        let ranks = reduced_homology_ranks(&c, n - 2, 100_000_000).map_err(|e| e.to_string())?;
        ensure(ranks.iter().all(|&r| r == 0), || format!("model {i}: ranks {ranks:?}"))?;
        let cover: Vec<Complex> = model
            .effective_generators()
            .iter()
            .map(|g| uninterpreted_complex(&Model::simple(*g), 10_000_000).unwrap())
            .collect();
        let nv = nerve(&cover);
        ensure(nv.facets().len() == 1 && nv.facets()[0].len() == cover.len(), || {
            format!("model {i}: nerve has {} facets", nv.facets().len())
        })?;
    }
    within(start, Duration::from_secs(300), "closed-above connectivity")?;
    Ok(format!("50 models, vanishing ranks and full nerves, {:.1?}", start.elapsed()))
}

fn c5_intersection_of_pseudospheres() -> Check {
    let start = Instant::now();
    let universe = [View::Value(0), View::Value(1), View::Value(2)];
    let family = |bits: usize| -> Vec<View> { (0..3).filter(|b| bits >> b & 1 == 1).map(|b| universe[b].clone()).collect() };
    let specs: Vec<PseudosphereSpec> = (0..512)
        .map(|code| PseudosphereSpec::new((0..3).map(|c| family(code >> (3 * c) & 7)).collect()))
        .collect();
    let complexes: Vec<Complex> = specs.iter().map(|s| pseudosphere(s, 1_000).unwrap()).collect();
    let bad: Vec<(usize, usize)> = (0..specs.len())
        .into_par_iter()
        .flat_map_iter(|a| {
            let (specs, complexes) = (&specs, &complexes);
            (0..specs.len()).filter_map(move |b| {
                let spec = intersect_pseudospheres(&specs[a], &specs[b]).unwrap();
                let lhs = pseudosphere(&spec, 1_000).unwrap();
                (lhs != complexes[a].intersection(&complexes[b])).then_some((a, b))
            })
        })
        .collect();
    ensure(bad.is_empty(), || format!("{} mismatching pairs, first {:?}", bad.len(), bad[0]))?;
    Ok(format!("{} pairs equal, {:.1?}", specs.len() * specs.len(), start.elapsed()))
}

fn c6_simple_closed_pseudosphere() -> Check {
    let start = Instant::now();
    let same = |g: &Digraph| -> bool {
        let a = uninterpreted_complex(&Model::simple(*g), 1_000_000).unwrap();
        let b = pseudosphere(&closed_above_spec(g), 1_000_000).unwrap();
        a == b
    };
    let pairs: Vec<(usize, usize)> = (0..3).flat_map(|u| (0..3).map(move |v| (u, v))).filter(|(u, v)| u != v).collect();
    for bits in 0u32..1 << pairs.len() {
        let edges: Vec<_> = pairs.iter().enumerate().filter(|(i, _)| bits >> i & 1 == 1).map(|(_, &e)| e).collect();
        let g = Digraph::new(3, &edges).unwrap();
        ensure(same(&g), || format!("n = 3 graph {edges:?}"))?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..200 {
        let p = rng.gen_range(0.0..1.0);
        let g = random_graph(&mut rng, 4, p);
        ensure(same(&g), || format!("n = 4 graph {:?}", g.edges_without_loops()))?;
    }
    Ok(format!("64 + 200 graphs facet-for-facet, {:.1?}", start.elapsed()))
}

fn c7_product_inclusion() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for i in 0..500 {
        let n = rng.gen_range(2..=6);
        let g = random_graph(&mut rng, n, 0.25);
        let h = random_graph(&mut rng, n, 0.25);
        let g2 = random_super(&mut rng, &g, 0.3);
        let h2 = random_super(&mut rng, &h, 0.3);
        let small = g.path_product(&h).unwrap();
        let big = g2.path_product(&h2).unwrap();
        ensure(small.is_subgraph_of(&big), || format!("sample {i}: inclusion fails"))?;
        ensure(small.edges() == naive_product(&g, &h) && big.edges() == naive_product(&g2, &h2), || {
            format!("sample {i}: product disagrees with matrix composition")
        })?;
    }
    Ok("500 samples".into())
}

fn c8_ring_square_counterexample() -> Check {
    let start = Instant::now();
    let c6 = ring(6);
    let square = c6.path_product(&c6).unwrap();
    let extended = square.with_edge(1, 5);
    let refuted = product_reachability_search(&[c6, c6], &extended, 10_000_000, false).map_err(|e| e.to_string())?;
    ensure(matches!(refuted, Reachability::Refuted(_)), || format!("chord target: {refuted:?}"))?;
    let found = product_reachability_search(&[c6, c6], &square, 10_000_000, false).map_err(|e| e.to_string())?;
    let ok = matches!(&found, Reachability::Witness(ws) if ws[0].path_product(&ws[1]).unwrap() == square);
    ensure(ok, || format!("plain square: {found:?}"))?;
    within(start, Duration::from_secs(60), "reachability search")?;
    Ok(format!("chord refuted, square witnessed, {:.2?}", start.elapsed()))
}

fn c9_ring_consensus() -> Check {
    let c6 = ring(6);
    let seq = covering_sequence(&[c6], 1, 10).map_err(|e| e.to_string())?;
    ensure(seq.values == [2, 3, 4, 5, 6], || format!("sequence {:?}", seq.values))?;
    let sim = simulate_min_protocol(&Model::simple(c6), 5, MinStrategy::MinReceived, 1_000_000).map_err(|e| e.to_string())?;
    ensure(sim.worst_case == 1, || format!("worst case {}", sim.worst_case))?;
    Ok("sequence (2,3,4,5,6), one decision after 5 rounds".into())
}

fn c10_sandwich() -> Check {
    let start = Instant::now();
    let r = sandwich_sweep(2024, 200, 1, FuzzShape::default(), &Budget::default()).map_err(|e| e.to_string())?;
    if let Some(v) = r.entries.iter().find(|e| e.status == SweepStatus::Violation) {
        return Err(format!("model {}: {}", v.index, v.message.as_deref().unwrap_or("")));
    }
    ensure(r.violations == 0, || format!("{} violations", r.violations))?;
    ensure(r.excluded_fraction() < 0.2, || format!("{} of 200 excluded by budget", r.budget_excluded))?;
    within(start, Duration::from_secs(7200), "sandwich audit")?;
    Ok(format!(
        "{} checked, {} tight, {} excluded by budget, {:.1?}",
        r.checked,
        r.tight,
        r.budget_excluded,
        start.elapsed()
    ))
}

fn c11_shelling_fixtures() -> Check {
    let edge = Complex::new(vec![simplex(&[0, 1, 2]), simplex(&[1, 2, 3])]);
    let order = find_shelling_order(&edge, 1_000).map_err(|e| e.to_string())?;
    ensure(order.is_some(), || "shared edge not shelled".into())?;
    let vertex = Complex::new(vec![simplex(&[0, 1, 2]), simplex(&[2, 3, 4])]);
    let none = find_shelling_order(&vertex, 1_000).map_err(|e| e.to_string())?;
    ensure(none.is_none(), || "shared vertex shelled".into())?;
    let mut orders = 0;
    for d in 1..=4 {
        // facets of the boundary of the d-simplex on d + 1 vertices
        let boundary: Vec<Simplex> = (0..=d)
            .map(|skip| simplex(&(0..=d).filter(|&v| v != skip).collect::<Vec<_>>()))
            .collect();
        for pick in 1u32..1 << boundary.len() {
            let c = Complex::new((0..boundary.len()).filter(|i| pick >> i & 1 == 1).map(|i| boundary[i].clone()).collect());
            let m = c.facets().len();
            for perm in permutations(m) {
                orders += 1;
                ensure(check_shelling_order(&c, &perm).unwrap(), || format!("d = {d}, facets {pick:b}, order {perm:?}"))?;
            }
        }
    }
    Ok(format!("shared edge shells, shared vertex does not, {orders} boundary orderings accepted"))
}

fn permutations(m: usize) -> Vec<Vec<usize>> {
    if m == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(m - 1) {
        for at in 0..=p.len() {
            let mut q = p.clone();
            q.insert(at, m - 1);
            out.push(q);
        }
    }
    out
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("hub-and-cycle metrics and bound comparison", c1_hub_cycle_metrics),
        ("star-union tightness", c2_star_tightness),
        ("pseudosphere connectivity", c3_pseudosphere_connectivity),
        ("closed-above complex connectivity and nerve", c4_closed_above_connectivity),
        ("pseudosphere intersection", c5_intersection_of_pseudospheres),
        ("simple closed-above complex is a pseudosphere", c6_simple_closed_pseudosphere),
        ("product monotonicity", c7_product_inclusion),
        ("squared ring reachability", c8_ring_square_counterexample),
        ("ring consensus by covering sequence", c9_ring_consensus),
        ("bounds sandwich the oracle", c10_sandwich),
        ("shellability fixtures", c11_shelling_fixtures),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {why} ({:.1?})", i + 1, start.elapsed());
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
