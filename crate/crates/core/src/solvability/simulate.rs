//! Worst-case behaviour of the minimum-based protocols.
//!
//! With pairwise distinct inputs ranked by value, a process whose base
//! in-set is `I` can, in some supergraph, hear any process and therefore
//! decide any value whose rank is at most the minimum rank in `I`. The
//! largest number of distinct decisions over the closure of a graph is then
//! a greedy matching of processes to ranks under those thresholds.

use serde::{Deserialize, Serialize};

use crate::budget::Meter;
use crate::error::{Error, Result};
use crate::graph::{permutations, product_set, Digraph, GraphSpec, Model, ProcSet, SYMMETRY_LIMIT};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "set")]
pub enum MinStrategy {
    /// Decide the minimum value received.
    MinReceived,
    /// Decide the minimum value received from the given processes.
    MinOfFixedSet(ProcSet),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub strategy: MinStrategy,
    pub rounds: usize,
    /// Largest distinct-decision count over the closure of the r-fold
    /// generator products. Exact for one round, an upper bound otherwise.
    pub worst_case: usize,
    /// Largest count over the r-fold generator products themselves, a lower
    /// bound on the true worst case.
    pub worst_on_products: usize,
    pub exact: bool,
    pub product_graphs: usize,
    /// Base product and input ranking (process to rank) attaining `worst_case`.
    pub witness_graph: GraphSpec,
    pub witness_ranks: Vec<usize>,
}

/// Greedy count of distinct ranks assignable under per-process thresholds.
fn greedy(mut thresholds: Vec<usize>) -> usize {
    thresholds.sort_unstable();
    let mut next = 0;
    for t in thresholds {
        if next <= t {
            next += 1;
        }
    }
    next
}

/// Distinct decisions in `g` itself (no extra edges) and over its closure,
/// for inputs ranked by `rank`, restricted to the processes of `pool`.
fn counts(g: &Digraph, rank: &[usize], pool: ProcSet) -> (usize, usize) {
    let n = g.n();
    let mut exact = ProcSet::EMPTY;
    let mut thresholds = Vec::with_capacity(n);
    for p in 0..n {
        let heard = g.in_set(p).intersection(pool);
        let t = heard.iter().map(|q| rank[q]).min().expect("pool dominates");
        exact.insert(t);
        thresholds.push(t);
    }
    (exact.len(), greedy(thresholds))
}

/// Worst-case number of distinct decisions of a minimum-based protocol run
/// for `rounds` rounds against every adversary of `model`.
pub fn simulate_min_protocol(model: &Model, rounds: usize, strategy: MinStrategy, limit: u64) -> Result<SimulationReport> {
    let n = model.n();
    if rounds == 0 {
        return Err(Error::Precondition("round count must be at least 1".into()));
    }
    if n > SYMMETRY_LIMIT {
        return Err(Error::SymmetryGuard {
            n,
            limit: SYMMETRY_LIMIT,
        });
    }
    let pool = match strategy {
        MinStrategy::MinReceived => ProcSet::full(n),
        MinStrategy::MinOfFixedSet(p) => {
            if p.is_empty() || !p.is_subset(ProcSet::full(n)) {
                return Err(Error::Precondition(format!("fixed set {:?} is not a non-empty subset of the processes", p.to_vec())));
            }
            p
        }
    };
    let products = product_set(model, rounds, limit, false)?;
    if let Some(g) = products.iter().find(|g| !g.dominates(pool)) {
        return Err(Error::Precondition(format!(
            "fixed set {:?} does not dominate product graph {:?}",
            pool.to_vec(),
            g.edges_without_loops()
        )));
    }
    // only the relative order of the pool's inputs matters
    let members = pool.to_vec();
    let orders = permutations(members.len());
    let mut meter = Meter::new("simulation", limit);
    meter.charge((orders.len() as u64).saturating_mul(products.len() as u64))?;

    let mut best = (0usize, 0usize, Vec::new());
    let mut on_products = 0;
    for (gi, g) in products.iter().enumerate() {
        for order in &orders {
            let mut rank = vec![usize::MAX; n];
            for (i, &p) in members.iter().enumerate() {
                rank[p] = order[i];
            }
            let (plain, closed) = counts(g, &rank, pool);
            on_products = on_products.max(plain);
            if closed > best.0 {
                best = (closed, gi, rank.clone());
            }
        }
    }
    let (worst, gi, rank) = best;
    Ok(SimulationReport {
        strategy,
        rounds,
        worst_case: worst,
        worst_on_products: on_products,
        exact: rounds == 1 || worst == on_products,
        product_graphs: products.len(),
        witness_graph: GraphSpec::from(&products[gi]),
        witness_ranks: rank,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn greedy_matching() {
        assert_eq!(greedy(vec![0, 0, 0]), 1);
        assert_eq!(greedy(vec![2, 0, 1]), 3);
        assert_eq!(greedy(vec![1, 1, 1]), 2);
    }

    #[test]
    fn ring_consensus_after_five_rounds() {
        let m = Model::simple(Digraph::cycle(6).unwrap());
        let r = simulate_min_protocol(&m, 5, MinStrategy::MinReceived, 1_000_000).unwrap();
        assert_eq!(r.worst_case, 1);
        assert!(r.exact);
        let r = simulate_min_protocol(&m, 1, MinStrategy::MinReceived, 1_000_000).unwrap();
        assert_eq!(r.worst_case, 5);
    }

    #[test]
    fn star_family_min_received() {
        // a star with centre c: everyone hears c; n−s+1 values can survive
        for (n, s) in [(3, 1), (4, 1), (4, 2), (4, 3)] {
            let m = Model::star_family(n, s).unwrap();
            let r = simulate_min_protocol(&m, 1, MinStrategy::MinReceived, 1_000_000).unwrap();
            assert_eq!(r.worst_case, n - s + 1, "n={n} s={s}");
        }
    }

    #[test]
    fn fixed_set_must_dominate() {
        let m = Model::simple(Digraph::star(3, ProcSet::singleton(0)).unwrap());
        let ok = simulate_min_protocol(&m, 1, MinStrategy::MinOfFixedSet(ProcSet::singleton(0)), 1_000).unwrap();
        assert_eq!(ok.worst_case, 1);
        assert!(simulate_min_protocol(&m, 1, MinStrategy::MinOfFixedSet(ProcSet::singleton(1)), 1_000).is_err());
    }
}
