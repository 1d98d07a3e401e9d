//! Combinatorial graph parameters: domination, equal domination, covering
//! numbers, distributed domination, max-covering numbers and coefficients,
//! and covering-number sequences.
//!
//! Everything here is exact subset enumeration over bit-packed process sets.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{canonical_sort, Digraph, GraphSpec, ProcSet};

fn common_n(graphs: &[Digraph]) -> Result<usize> {
    let Some(first) = graphs.first() else {
        return Err(Error::Precondition("empty graph set".into()));
    };
    for g in graphs {
        if g.n() != first.n() {
            return Err(Error::MismatchedN {
                left: first.n(),
                right: g.n(),
            });
        }
    }
    Ok(first.n())
}

fn distinct(graphs: &[Digraph]) -> Vec<Digraph> {
    let mut v = graphs.to_vec();
    canonical_sort(&mut v);
    v
}

/// Size of a smallest dominating set.
pub fn dom(g: &Digraph) -> usize {
    let n = g.n();
    (1..=n)
        .find(|&i| ProcSet::subsets_of_size(n, i).any(|p| g.dominates(p)))
        .unwrap_or(n)
}

/// A smallest dominating set, first in increasing bit order.
pub fn min_dominating_set(g: &Digraph) -> ProcSet {
    let n = g.n();
    (1..=n)
        .find_map(|i| ProcSet::subsets_of_size(n, i).find(|&p| g.dominates(p)))
        .unwrap_or_else(|| ProcSet::full(n))
}

/// Smallest `i` such that every `i`-subset dominates `g`.
pub fn edom_graph(g: &Digraph) -> usize {
    let n = g.n();
    (1..=n)
        .find(|&i| ProcSet::subsets_of_size(n, i).all(|p| g.dominates(p)))
        .unwrap_or(n)
}

/// Equal-domination number of a set: the maximum over its graphs.
pub fn edom(graphs: &[Digraph]) -> Result<usize> {
    common_n(graphs)?;
    Ok(graphs.iter().map(edom_graph).max().unwrap_or(0))
}

/// Fewest processes reached by an `i`-subset of `g`.
pub fn cov_graph(g: &Digraph, i: usize) -> Result<usize> {
    let n = g.n();
    if i == 0 || i > n {
        return Err(Error::Domain(format!("covering index {i} outside [1, {n}]")));
    }
    Ok(ProcSet::subsets_of_size(n, i)
        .map(|p| g.reach(p).len())
        .min()
        .unwrap_or(n))
}

/// `i`-th covering number of a set: the minimum over its graphs.
///
/// Total on `[1, n]`; for `i >= edom` it equals `n`.
pub fn cov(graphs: &[Digraph], i: usize) -> Result<usize> {
    common_n(graphs)?;
    let mut best = usize::MAX;
    for g in graphs {
        best = best.min(cov_graph(g, i)?);
    }
    Ok(best)
}

/// Size of a smallest set dominating every graph of `graphs` at once.
///
/// Never exceeds [`edom`], and equals it on symmetric sets.
pub fn common_dom(graphs: &[Digraph]) -> Result<usize> {
    let n = common_n(graphs)?;
    Ok((1..=n)
        .find(|&i| ProcSet::subsets_of_size(n, i).any(|p| graphs.iter().all(|g| g.dominates(p))))
        .unwrap_or(n))
}

/// How a collection `S_i` of `min(i, |S|)` graphs may be drawn from `S`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GraphChoice {
    /// A sub-multiset: graphs may repeat, so a single graph is a valid
    /// choice on its own.
    Repeatable,
    /// A subset of pairwise distinct graphs.
    Distinct,
}

/// Semantics used by [`edom_over`] and [`max_cov`].
pub const GRAPH_CHOICE: GraphChoice = GraphChoice::Repeatable;

/// For a seed set `p`, the out-sets `reach_G(p)` grouped by a process `v`
/// they all miss, with the number of graphs missing `v`.
fn missing_groups(graphs: &[Digraph], p: ProcSet, n: usize) -> Vec<(usize, usize, Vec<ProcSet>)> {
    let reaches: Vec<ProcSet> = graphs.iter().map(|g| g.reach(p)).collect();
    let mut groups = Vec::new();
    for v in ProcSet::full(n).difference(p).iter() {
        let mut sets: Vec<ProcSet> = reaches.iter().copied().filter(|r| !r.contains(v)).collect();
        let count = sets.len();
        if count == 0 {
            continue;
        }
        sets.sort();
        sets.dedup();
        groups.push((v, count, sets));
    }
    groups
}

fn required_graphs(choice: GraphChoice, i: usize, set_size: usize) -> usize {
    match choice {
        GraphChoice::Repeatable => 1,
        GraphChoice::Distinct => i.min(set_size),
    }
}

/// Distributed domination number under an explicit graph-choice semantics.
pub fn edom_over_with(graphs: &[Digraph], choice: GraphChoice) -> Result<usize> {
    let n = common_n(graphs)?;
    let graphs = distinct(graphs);
    for i in 1..=n {
        let need = required_graphs(choice, i, graphs.len());
        let dominated = ProcSet::subsets_of_size(n, i).all(|p| {
            missing_groups(&graphs, p, n)
                .iter()
                .all(|(_, count, _)| *count < need)
        });
        if dominated {
            return Ok(i);
        }
    }
    Ok(n)
}

/// Smallest `i > 0` such that every `i`-subset of processes jointly
/// dominates every admissible choice of `min(i, |S|)` graphs.
pub fn edom_over(graphs: &[Digraph]) -> Result<usize> {
    edom_over_with(graphs, GRAPH_CHOICE)
}

/// Largest union of at most `k` sets drawn from `sets`.
fn max_union(sets: &[ProcSet], k: usize) -> usize {
    // only inclusion-maximal sets matter once padding is allowed
    let maximal: Vec<ProcSet> = sets
        .iter()
        .copied()
        .filter(|s| !sets.iter().any(|t| t != s && s.is_subset(*t)))
        .collect();
    let k = k.min(maximal.len());
    fn rec(sets: &[ProcSet], start: usize, left: usize, acc: ProcSet, best: &mut usize) {
        if left == 0 || start == sets.len() {
            *best = (*best).max(acc.len());
            return;
        }
        for idx in start..sets.len() {
            rec(sets, idx + 1, left - 1, acc.union(sets[idx]), best);
        }
    }
    let mut best = 0;
    rec(&maximal, 0, k, ProcSet::EMPTY, &mut best);
    best
}

/// Max-covering number under an explicit graph-choice semantics.
pub fn max_cov_with(graphs: &[Digraph], i: usize, choice: GraphChoice) -> Result<usize> {
    let n = common_n(graphs)?;
    let over = edom_over_with(graphs, choice)?;
    if i == 0 || i >= over {
        return Err(Error::Domain(format!(
            "max-covering number needs 1 <= i < {over} (distributed domination number), got {i}"
        )));
    }
    let graphs = distinct(graphs);
    let take = i.min(graphs.len());
    let need = required_graphs(choice, i, graphs.len());
    let mut best = 0;
    for p in ProcSet::subsets_of_size(n, i) {
        for (_, count, sets) in missing_groups(&graphs, p, n) {
            if count >= need {
                best = best.max(max_union(&sets, take));
            }
        }
    }
    Ok(best)
}

/// Largest non-dominating reach of an `i`-subset across an admissible
/// choice of `min(i, |S|)` graphs. Defined for `1 <= i < edom_over(S)`.
pub fn max_cov(graphs: &[Digraph], i: usize) -> Result<usize> {
    max_cov_with(graphs, i, GRAPH_CHOICE)
}

/// The coefficient formula applied to a known max-covering number.
pub fn m_coeff_from(n: usize, i: usize, max_cov: usize) -> usize {
    if max_cov > i {
        (n - i - 1) / (max_cov - i)
    } else {
        n - i
    }
}

/// Max-covering coefficient `M_i(S)`.
pub fn m_coeff(graphs: &[Digraph], i: usize) -> Result<usize> {
    let n = common_n(graphs)?;
    let mc = max_cov(graphs, i)?;
    Ok(m_coeff_from(n, i, mc))
}

/// A covering-number sequence, truncated at `n`, a fixed point, or a length cap.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoveringSequence {
    pub values: Vec<usize>,
    pub reaches_n: bool,
    /// 1-based position of the first `n`, i.e. the round count it needs.
    pub rounds_to_n: Option<usize>,
    pub fixed_point: bool,
}

/// Covering-number sequence of a set of graphs (a singleton gives the
/// single-graph sequence).
pub fn covering_sequence(graphs: &[Digraph], i: usize, max_len: usize) -> Result<CoveringSequence> {
    let n = common_n(graphs)?;
    if i == 0 || max_len == 0 {
        return Err(Error::Precondition("index and length must be positive".into()));
    }
    let threshold = edom(graphs)?;
    let mut values = vec![cov(graphs, i.min(n))?];
    let mut fixed_point = false;
    while values.len() < max_len {
        let cur = *values.last().unwrap();
        if cur == n {
            break;
        }
        let next = if cur >= threshold { n } else { cov(graphs, cur)? };
        if next == cur {
            // every later term repeats
            fixed_point = true;
            break;
        }
        values.push(next);
    }
    let rounds_to_n = values.iter().position(|&v| v == n).map(|p| p + 1);
    Ok(CoveringSequence {
        reaches_n: rounds_to_n.is_some(),
        rounds_to_n,
        fixed_point,
        values,
    })
}

/// Metrics of one set of graphs plus which graph realized each extremum.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub n: usize,
    pub graph_count: usize,
    pub graph_choice: GraphChoice,
    pub dom: Vec<usize>,
    pub edom: usize,
    pub cov: BTreeMap<usize, usize>,
    pub edom_over: usize,
    pub common_dom: usize,
    pub max_cov: BTreeMap<usize, usize>,
    pub m_coeff: BTreeMap<usize, usize>,
    pub provenance: Provenance,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub edom: GraphSpec,
    pub cov: BTreeMap<usize, GraphSpec>,
}

/// Computes every metric of `graphs` (taken in canonical order).
pub fn metrics_report(graphs: &[Digraph]) -> Result<MetricsReport> {
    let n = common_n(graphs)?;
    let graphs = distinct(graphs);
    let edom_v = edom(&graphs)?;
    let edom_src = graphs
        .iter()
        .find(|g| edom_graph(g) == edom_v)
        .expect("maximum is attained");

    let mut cov_map = BTreeMap::new();
    let mut cov_src = BTreeMap::new();
    for i in 1..edom_v {
        let mut best: Option<(usize, &Digraph)> = None;
        for g in &graphs {
            let c = cov_graph(g, i)?;
            if best.is_none_or(|(b, _)| c < b) {
                best = Some((c, g));
            }
        }
        let (c, g) = best.expect("non-empty");
        cov_map.insert(i, c);
        cov_src.insert(i, GraphSpec::from(g));
    }

    let over = edom_over(&graphs)?;
    let mut max_cov_map = BTreeMap::new();
    let mut m_map = BTreeMap::new();
    for i in 1..over {
        let mc = max_cov(&graphs, i)?;
        max_cov_map.insert(i, mc);
        m_map.insert(i, m_coeff_from(n, i, mc));
    }

    Ok(MetricsReport {
        n,
        graph_count: graphs.len(),
        graph_choice: GRAPH_CHOICE,
        dom: graphs.iter().map(dom).collect(),
        edom: edom_v,
        cov: cov_map,
        edom_over: over,
        common_dom: common_dom(&graphs)?,
        max_cov: max_cov_map,
        m_coeff: m_map,
        provenance: Provenance {
            edom: GraphSpec::from(edom_src),
            cov: cov_src,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::symmetric_closure;

    fn set(ps: &[usize]) -> ProcSet {
        ps.iter().copied().collect()
    }

    fn hub_cycle() -> Digraph {
        Digraph::new(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (2, 3), (3, 1)]).unwrap()
    }

    #[test]
    fn dom_examples() {
        assert_eq!(dom(&Digraph::complete(5).unwrap()), 1);
        assert_eq!(dom(&Digraph::star(4, set(&[0])).unwrap()), 1);
        assert_eq!(dom(&Digraph::cycle(6).unwrap()), 3);
        assert_eq!(dom(&Digraph::identity(4).unwrap()), 4);
    }

    #[test]
    fn edom_examples() {
        assert_eq!(edom(&[Digraph::complete(4).unwrap()]).unwrap(), 1);
        let sym = symmetric_closure(&[hub_cycle()]).unwrap();
        assert_eq!(edom(&sym).unwrap(), 4);
        assert_eq!(edom(&[Digraph::star(4, set(&[0])).unwrap()]).unwrap(), 4);
        assert_eq!(edom(&[Digraph::cycle(6).unwrap()]).unwrap(), 5);
    }

    #[test]
    fn cov_examples() {
        let sym = symmetric_closure(&[hub_cycle()]).unwrap();
        assert_eq!(cov(&sym, 2).unwrap(), 3);
        assert_eq!(cov(&[Digraph::complete(5).unwrap()], 1).unwrap(), 5);
        assert_eq!(cov(&[Digraph::star(4, set(&[0])).unwrap()], 1).unwrap(), 1);
        assert!(cov(&sym, 0).is_err());
        assert!(cov(&sym, 5).is_err());
    }

    #[test]
    fn edom_over_examples() {
        let g = hub_cycle();
        assert_eq!(edom_over(&[g]).unwrap(), edom(&[g]).unwrap());
        let k = Digraph::complete(4).unwrap();
        assert_eq!(edom_over(&[k, k]).unwrap(), 1);
        let two_stars = symmetric_closure(&[Digraph::star(4, set(&[0, 1])).unwrap()]).unwrap();
        assert_eq!(edom_over(&two_stars).unwrap(), 3);
        let one_star = symmetric_closure(&[Digraph::star(4, set(&[0])).unwrap()]).unwrap();
        assert_eq!(edom_over(&one_star).unwrap(), 4);
    }

    #[test]
    fn distinct_choice_is_never_larger() {
        let one_star = symmetric_closure(&[Digraph::star(4, set(&[0])).unwrap()]).unwrap();
        assert_eq!(edom_over_with(&one_star, GraphChoice::Distinct).unwrap(), 3);
        let two_stars = symmetric_closure(&[Digraph::star(4, set(&[0, 1])).unwrap()]).unwrap();
        assert_eq!(edom_over_with(&two_stars, GraphChoice::Distinct).unwrap(), 2);
    }

    #[test]
    fn max_cov_examples() {
        for s in 1..4 {
            let stars = symmetric_closure(&[Digraph::star(4, (0..s).collect()).unwrap()]).unwrap();
            let over = edom_over(&stars).unwrap();
            for t in 1..over {
                assert_eq!(max_cov(&stars, t).unwrap(), t);
                assert_eq!(m_coeff(&stars, t).unwrap(), 4 - t);
            }
        }
        assert_eq!(max_cov(&[hub_cycle()], 2).unwrap(), 3);
        assert_eq!(max_cov(&[Digraph::identity(3).unwrap()], 1).unwrap(), 1);
        assert!(matches!(max_cov(&[hub_cycle()], 4), Err(Error::Domain(_))));
        assert!(matches!(max_cov(&[hub_cycle()], 0), Err(Error::Domain(_))));
    }

    #[test]
    fn m_coeff_examples() {
        assert_eq!(m_coeff_from(6, 2, 3), 3);
        assert_eq!(m_coeff(&[hub_cycle()], 2).unwrap(), 1);
    }

    #[test]
    fn common_dom_below_edom() {
        let stars: Vec<Digraph> = (0..2).map(|c| Digraph::star(3, set(&[c])).unwrap()).collect();
        // {0, 1} hits both centres; eDom of a single star is 3
        assert_eq!(common_dom(&stars).unwrap(), 2);
        assert_eq!(edom(&stars).unwrap(), 3);
        let sym = symmetric_closure(&[Digraph::star(4, set(&[0])).unwrap()]).unwrap();
        assert_eq!(common_dom(&sym).unwrap(), edom(&sym).unwrap());
    }

    #[test]
    fn covering_sequence_examples() {
        let k = covering_sequence(&[Digraph::complete(5).unwrap()], 1, 10).unwrap();
        assert_eq!(k.values, vec![5]);
        assert_eq!(k.rounds_to_n, Some(1));

        let c6 = covering_sequence(&[Digraph::cycle(6).unwrap()], 1, 10).unwrap();
        assert_eq!(c6.values, vec![2, 3, 4, 5, 6]);
        assert_eq!(c6.rounds_to_n, Some(5));

        let id = covering_sequence(&[Digraph::identity(4).unwrap()], 1, 10).unwrap();
        assert_eq!(id.values, vec![1]);
        assert!(id.fixed_point);
        assert!(!id.reaches_n);

        let capped = covering_sequence(&[Digraph::cycle(6).unwrap()], 1, 3).unwrap();
        assert_eq!(capped.values, vec![2, 3, 4]);
        assert!(!capped.reaches_n);
    }

    #[test]
    fn report_for_hub_cycle() {
        let sym = symmetric_closure(&[hub_cycle()]).unwrap();
        let r = metrics_report(&sym).unwrap();
        assert_eq!(r.edom, 4);
        assert_eq!(r.cov.get(&2), Some(&3));
        assert!(r.edom_over <= r.edom);
        for d in &r.dom {
            assert!(1 <= *d && *d <= r.edom);
        }
    }
}
