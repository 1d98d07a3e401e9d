//! Ground truth for small instances: scenario enumeration, the exact
//! oblivious-solvability oracle, an independent witness replay checker, and
//! worst-case simulation of the minimum-based protocols.
//!
//! An oblivious decision map sees only the flattened set of
//! `(process, input)` pairs a process has heard. The oracle decides whether
//! such a map exists that is applied after exactly `r` rounds and keeps the
//! number of distinct decisions at most `k` in every scenario.

mod oracle;
mod replay;
mod simulate;

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::budget::Meter;
use crate::error::{Error, Result};
use crate::graph::{canonical_sort, product_set, Digraph, Model, ProcSet};

pub use oracle::{decide_solvability, DecisionMap, OracleOptions, UnsatCertificate, Verdict};
pub use replay::{replay_witness, ReplayReport};
pub use simulate::{simulate_min_protocol, MinStrategy, SimulationReport};

/// Largest value count the packed view encoding supports.
pub const MAX_VALUES: usize = 64;

/// The flattened view of one process: who it heard from and their inputs.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FlatView(Vec<(usize, usize)>);

impl FlatView {
    /// Builds a canonical view; at most one value per process.
    pub fn new(mut entries: Vec<(usize, usize)>) -> Result<Self> {
        entries.sort_unstable();
        entries.dedup();
        if entries.is_empty() {
            return Err(Error::Precondition("a flat view is never empty".into()));
        }
        if entries.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::Precondition(
                "a flat view holds one value per process".into(),
            ));
        }
        Ok(FlatView(entries))
    }

    /// View of `p` in `graph` under `assignment`.
    pub fn of(graph: &Digraph, assignment: &[usize], p: usize) -> Self {
        FlatView(
            graph
                .in_set(p)
                .iter()
                .map(|q| (q, assignment[q]))
                .collect(),
        )
    }

    pub fn entries(&self) -> &[(usize, usize)] {
        &self.0
    }

    pub fn processes(&self) -> ProcSet {
        self.0.iter().map(|&(p, _)| p).collect()
    }

    /// Distinct values present, ascending.
    pub fn values(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.0.iter().map(|&(_, x)| x).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    pub fn contains_value(&self, value: usize) -> bool {
        self.0.iter().any(|&(_, x)| x == value)
    }

    pub(crate) fn from_key(key: ViewKey) -> Self {
        let mask = ProcSet::from_bits(key.mask());
        FlatView(mask.iter().map(|p| (p, key.value(p))).collect())
    }

    #[cfg(test)]
    pub(crate) fn key(&self) -> ViewKey {
        let mut k = ViewKey(0);
        for &(p, v) in &self.0 {
            k = k.with(p, v);
        }
        k
    }
}

impl fmt::Debug for FlatView {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.0.iter()).finish()
    }
}

/// Packed flat view: presence mask in the low 16 bits, then six bits of
/// value per process.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub(crate) struct ViewKey(u128);

impl ViewKey {
    #[inline]
    fn with(self, p: usize, v: usize) -> Self {
        ViewKey(self.0 | (1u128 << p) | ((v as u128) << (16 + 6 * p)))
    }

    #[inline]
    pub(crate) fn of(in_set: ProcSet, assignment: &[usize]) -> Self {
        let mut k = ViewKey(0);
        for q in in_set.iter() {
            k = k.with(q, assignment[q]);
        }
        k
    }

    #[inline]
    pub(crate) fn mask(self) -> u16 {
        (self.0 & 0xffff) as u16
    }

    #[inline]
    pub(crate) fn value(self, p: usize) -> usize {
        ((self.0 >> (16 + 6 * p)) & 0x3f) as usize
    }

    /// Bitmask of values present.
    #[inline]
    pub(crate) fn value_mask(self) -> u64 {
        let mut m = 0u64;
        for p in ProcSet::from_bits(self.mask()).iter() {
            m |= 1 << self.value(p);
        }
        m
    }
}

/// A communication pattern together with an input assignment.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Scenario {
    pub graph: Digraph,
    pub assignment: Vec<usize>,
}

impl Scenario {
    pub fn view(&self, p: usize) -> FlatView {
        FlatView::of(&self.graph, &self.assignment, p)
    }
}

/// Which r-round communication patterns are enumerated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioMode {
    /// Every product `H_1 ⊗ ... ⊗ H_r` with each `H_j` in the model.
    Exact,
    /// `G_1 ⊗ ... ⊗ G_{r-1} ⊗ H` with generators `G_j` and `H` above a
    /// generator: edges are added to the last round only.
    RelaxLast,
}

/// Every graph of the model's single-round closure, in canonical order.
pub fn closure_graphs(model: &Model, limit: u64) -> Result<Vec<Digraph>> {
    let mut meter = Meter::new("scenario graph", limit);
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for g in model.effective_generators() {
        let count = g.supergraph_count();
        meter.charge(u64::try_from(count).unwrap_or(u64::MAX))?;
        for h in g.supergraphs() {
            if seen.insert(h) {
                out.push(h);
            }
        }
    }
    canonical_sort(&mut out);
    Ok(out)
}

/// Communication patterns after `rounds` rounds, deduplicated (a graph is
/// its own in-view profile), in canonical order.
pub fn scenario_graphs(model: &Model, rounds: usize, mode: ScenarioMode, limit: u64) -> Result<Vec<Digraph>> {
    if rounds == 0 {
        return Err(Error::Precondition("round count must be at least 1".into()));
    }
    if rounds == 1 {
        return closure_graphs(model, limit);
    }
    let mut meter = Meter::new("scenario graph", limit);
    match mode {
        ScenarioMode::Exact => {
            let one = closure_graphs(model, limit)?;
            let mut current = one.clone();
            for _ in 1..rounds {
                meter.charge((current.len() * one.len()) as u64)?;
                let mut seen = HashSet::new();
                let mut next = Vec::new();
                for a in &current {
                    for h in &one {
                        let g = a.compose(h);
                        if seen.insert(g) {
                            next.push(g);
                        }
                    }
                }
                canonical_sort(&mut next);
                current = next;
            }
            Ok(current)
        }
        ScenarioMode::RelaxLast => {
            let prefixes = product_set(model, rounds - 1, limit, false)?;
            let gens = model.effective_generators();
            let mut seen = HashSet::new();
            let mut out = Vec::new();
            for p in &prefixes {
                for g in &gens {
                    meter.charge(u64::try_from(g.supergraph_count()).unwrap_or(u64::MAX))?;
                    for h in g.supergraphs() {
                        let prod = p.compose(&h);
                        if seen.insert(prod) {
                            out.push(prod);
                        }
                    }
                }
            }
            canonical_sort(&mut out);
            Ok(out)
        }
    }
}

/// All assignments `[0, m)^n` in lexicographic order.
pub(crate) fn assignments(n: usize, m: usize) -> impl Iterator<Item = Vec<usize>> {
    let total = (m as u128).pow(n as u32);
    (0..total).map(move |mut idx| {
        let mut a = vec![0usize; n];
        for slot in a.iter_mut().rev() {
            *slot = (idx % m as u128) as usize;
            idx /= m as u128;
        }
        a
    })
}

/// Streams every scenario after `rounds` rounds with inputs in `[0, m)`.
pub fn scenarios(
    model: &Model,
    rounds: usize,
    m: usize,
    mode: ScenarioMode,
    limit: u64,
) -> Result<impl Iterator<Item = Scenario>> {
    check_values(m)?;
    let graphs = scenario_graphs(model, rounds, mode, limit)?;
    let n = model.n();
    let total = (graphs.len() as u128).saturating_mul((m as u128).pow(n as u32));
    if total > limit as u128 {
        return Err(Error::BudgetExceeded {
            what: "scenario",
            limit,
        });
    }
    Ok(graphs.into_iter().flat_map(move |g| {
        assignments(n, m).map(move |assignment| Scenario {
            graph: g,
            assignment,
        })
    }))
}

pub(crate) fn check_values(m: usize) -> Result<()> {
    if m == 0 || m > MAX_VALUES {
        Err(Error::Precondition(format!(
            "value count {m} outside [1, {MAX_VALUES}]"
        )))
    } else {
        Ok(())
    }
}
