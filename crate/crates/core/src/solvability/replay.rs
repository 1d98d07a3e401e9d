//! Witness replay. Deliberately rebuilds the scenario space from the graph
//! primitives alone so that a bug in the oracle's enumeration or encoding
//! cannot hide itself.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::{DecisionMap, FlatView, ScenarioMode};
use crate::error::{Error, Result};
use crate::graph::{Digraph, Model};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplayReport {
    pub ok: bool,
    pub graphs: usize,
    pub scenarios: u64,
    pub views_used: usize,
    /// First failure found, if any.
    pub violation: Option<String>,
}

/// Every supergraph of `g`, by counting over the missing edges.
fn above(g: &Digraph, limit: u64) -> Result<Vec<Digraph>> {
    let n = g.n();
    let missing: Vec<(usize, usize)> = (0..n)
        .flat_map(|u| (0..n).map(move |v| (u, v)))
        .filter(|&(u, v)| !g.has_edge(u, v))
        .collect();
    if missing.len() >= 63 || (1u64 << missing.len()) > limit {
        return Err(Error::BudgetExceeded {
            what: "replay graph",
            limit,
        });
    }
    Ok((0u64..1 << missing.len())
        .map(|bits| {
            let mut h = *g;
            for (i, &(u, v)) in missing.iter().enumerate() {
                if bits >> i & 1 == 1 {
                    h = h.with_edge(u, v);
                }
            }
            h
        })
        .collect())
}

fn one_round(model: &Model, limit: u64) -> Result<HashSet<Digraph>> {
    let mut out = HashSet::new();
    for g in model.effective_generators() {
        out.extend(above(&g, limit)?);
    }
    Ok(out)
}

fn graph_space(model: &Model, rounds: usize, mode: ScenarioMode, limit: u64) -> Result<Vec<Digraph>> {
    if rounds == 0 {
        return Err(Error::Precondition("round count must be at least 1".into()));
    }
    let mut current: HashSet<Digraph> = match mode {
        ScenarioMode::Exact => one_round(model, limit)?,
        ScenarioMode::RelaxLast if rounds == 1 => one_round(model, limit)?,
        ScenarioMode::RelaxLast => model.effective_generators().into_iter().collect(),
    };
    for round in 2..=rounds {
        let step: HashSet<Digraph> = match mode {
            ScenarioMode::RelaxLast if round < rounds => model.effective_generators().into_iter().collect(),
            _ => one_round(model, limit)?,
        };
        let mut next = HashSet::new();
        for a in &current {
            for b in &step {
                next.insert(a.path_product(b)?);
                if next.len() as u64 > limit {
                    return Err(Error::BudgetExceeded {
                        what: "replay graph",
                        limit,
                    });
                }
            }
        }
        current = next;
    }
    let mut out: Vec<Digraph> = current.into_iter().collect();
    out.sort_by_key(|g| g.sort_key());
    Ok(out)
}

/// Replays `map` over every scenario and checks validity (a decision is a
/// value the process heard) and that at most `k` values are decided.
pub fn replay_witness(
    model: &Model,
    rounds: usize,
    k: usize,
    m: usize,
    mode: ScenarioMode,
    map: &DecisionMap,
    limit: u64,
) -> Result<ReplayReport> {
    let n = model.n();
    let graphs = graph_space(model, rounds, mode, limit)?;
    let per_graph = (m as u64).checked_pow(n as u32).unwrap_or(u64::MAX);
    if (graphs.len() as u64).saturating_mul(per_graph) > limit {
        return Err(Error::BudgetExceeded {
            what: "replay scenario",
            limit,
        });
    }
    let mut report = ReplayReport {
        ok: true,
        graphs: graphs.len(),
        scenarios: 0,
        views_used: 0,
        violation: None,
    };
    let mut used = HashSet::new();
    for g in &graphs {
        for idx in 0..per_graph {
            let mut inputs = vec![0usize; n];
            let mut rest = idx;
            for slot in inputs.iter_mut() {
                *slot = (rest % m as u64) as usize;
                rest /= m as u64;
            }
            report.scenarios += 1;
            let mut decided = Vec::with_capacity(n);
            for p in 0..n {
                let heard: Vec<(usize, usize)> = (0..n)
                    .filter(|&q| g.has_edge(q, p))
                    .map(|q| (q, inputs[q]))
                    .collect();
                let view = FlatView::new(heard.clone())?;
                let Some(d) = map.get(&view) else {
                    report.ok = false;
                    report.violation = Some(format!("no decision for view {heard:?}"));
                    return Ok(report);
                };
                if !heard.iter().any(|&(_, x)| x == d) {
                    report.ok = false;
                    report.violation = Some(format!("decision {d} not among heard values {heard:?}"));
                    return Ok(report);
                }
                used.insert(view);
                decided.push(d);
            }
            decided.sort_unstable();
            decided.dedup();
            if decided.len() > k {
                report.ok = false;
                report.violation = Some(format!(
                    "{} distinct decisions {decided:?} on inputs {inputs:?} in graph {:?}",
                    decided.len(),
                    g.edges_without_loops()
                ));
                return Ok(report);
            }
        }
    }
    report.views_used = used.len();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solvability::{decide_solvability, OracleOptions, Verdict};

    #[test]
    fn oracle_witness_replays() {
        let model = Model::star_family(3, 2).unwrap();
        let Verdict::Sat(map) = decide_solvability(&model, 1, 2, 3, &OracleOptions::default()).unwrap() else {
            panic!("expected SAT");
        };
        let r = replay_witness(&model, 1, 2, 3, ScenarioMode::Exact, &map, 1_000_000).unwrap();
        assert!(r.ok, "{:?}", r.violation);
    }

    #[test]
    fn bad_maps_are_caught() {
        let model = Model::simple(Digraph::identity(2).unwrap());
        let mut own = DecisionMap::default();
        let mut invalid = DecisionMap::default();
        for p in 0..2 {
            for a in 0..2 {
                own.insert(FlatView::new(vec![(p, a)]).unwrap(), a).unwrap();
                invalid.insert(FlatView::new(vec![(p, a)]).unwrap(), 1 - a).unwrap();
            }
        }
        for a in 0..2 {
            for b in 0..2 {
                let both = FlatView::new(vec![(0, a), (1, b)]).unwrap();
                own.insert(both.clone(), a.min(b)).unwrap();
                invalid.insert(both, a.min(b)).unwrap();
            }
        }
        let r = replay_witness(&model, 1, 2, 2, ScenarioMode::Exact, &own, 1_000).unwrap();
        assert!(r.ok);
        let r = replay_witness(&model, 1, 1, 2, ScenarioMode::Exact, &own, 1_000).unwrap();
        assert!(!r.ok && r.violation.unwrap().contains("distinct"));
        let r = replay_witness(&model, 1, 2, 2, ScenarioMode::Exact, &invalid, 1_000).unwrap();
        assert!(!r.ok && r.violation.unwrap().contains("not among"));
        let r = replay_witness(&model, 1, 2, 2, ScenarioMode::Exact, &DecisionMap::default(), 1_000).unwrap();
        assert!(!r.ok && r.violation.unwrap().contains("no decision"));
    }
}
