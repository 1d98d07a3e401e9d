use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use varisat::{CnfFormula, ExtendFormula, Lit, Solver};

use super::{check_values, scenario_graphs, FlatView, ScenarioMode, ViewKey};
use crate::budget::{Budget, Meter};
use crate::error::{Error, Result};
use crate::graph::{Model, ProcSet};

/// Partial map from flat views to decision values.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "Vec<DecisionEntry>", try_from = "Vec<DecisionEntry>")]
pub struct DecisionMap {
    entries: BTreeMap<FlatView, usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct DecisionEntry {
    view: FlatView,
    decide: usize,
}

impl From<DecisionMap> for Vec<DecisionEntry> {
    fn from(map: DecisionMap) -> Self {
        map.entries
            .into_iter()
            .map(|(view, decide)| DecisionEntry { view, decide })
            .collect()
    }
}

impl TryFrom<Vec<DecisionEntry>> for DecisionMap {
    type Error = Error;

    fn try_from(entries: Vec<DecisionEntry>) -> Result<Self> {
        let mut map = DecisionMap::default();
        for e in entries {
            let view = FlatView::new(e.view.0)?;
            map.insert(view, e.decide)?;
        }
        Ok(map)
    }
}

impl DecisionMap {
    /// Adds an entry; a view decides once.
    pub fn insert(&mut self, view: FlatView, decide: usize) -> Result<()> {
        match self.entries.insert(view, decide) {
            Some(old) if old != decide => Err(Error::Precondition(format!(
                "conflicting decisions {old} and {decide} for one view"
            ))),
            _ => Ok(()),
        }
    }

    pub fn get(&self, view: &FlatView) -> Option<usize> {
        self.entries.get(view).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&FlatView, usize)> {
        self.entries.iter().map(|(v, &d)| (v, d))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleOptions {
    pub mode: ScenarioMode,
    pub budget: Budget,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions {
            mode: ScenarioMode::Exact,
            budget: Budget::default(),
        }
    }
}

/// What an exhaustive refutation looked at.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnsatCertificate {
    pub mode: ScenarioMode,
    pub graphs: usize,
    pub scenarios_examined: u64,
    /// Distinct scenarios whose inputs carry more than `k` values.
    pub constraining_scenarios: usize,
    pub views: usize,
    pub variables: usize,
    pub clauses: usize,
    /// A single scenario already forces more than `k` values.
    pub forced_conflict: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Sat(DecisionMap),
    Unsat(UnsatCertificate),
    Budget { what: &'static str, limit: u64 },
}

impl Verdict {
    pub fn is_sat(&self) -> bool {
        matches!(self, Verdict::Sat(_))
    }

    pub fn is_unsat(&self) -> bool {
        matches!(self, Verdict::Unsat(_))
    }

    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Sat(_) => "SAT",
            Verdict::Unsat(_) => "UNSAT",
            Verdict::Budget { .. } => "BUDGET",
        }
    }
}

/// Decides whether an oblivious decision map applied after exactly `rounds`
/// rounds solves `k`-set agreement with inputs in `[0, m)`.
///
/// UNSAT is an impossibility proof for every value domain of size at least
/// `m`; SAT certifies domains of size at most `m`. Exhausting a budget is
/// reported as [`Verdict::Budget`], never as UNSAT.
pub fn decide_solvability(
    model: &Model,
    rounds: usize,
    k: usize,
    m: usize,
    options: &OracleOptions,
) -> Result<Verdict> {
    match decide_inner(model, rounds, k, m, options) {
        Err(Error::BudgetExceeded { what, limit }) => Ok(Verdict::Budget { what, limit }),
        other => other,
    }
}

struct Instance {
    views: Vec<ViewKey>,
    /// Sorted view ids per constraining scenario.
    constraints: Vec<Vec<u32>>,
    graphs: usize,
    examined: u64,
}

fn collect(model: &Model, rounds: usize, k: usize, m: usize, options: &OracleOptions) -> Result<Instance> {
    let n = model.n();
    let graphs = scenario_graphs(model, rounds, options.mode, options.budget.products)?;
    let per_graph = (m as u64).checked_pow(n as u32).ok_or(Error::BudgetExceeded {
        what: "scenario",
        limit: options.budget.scenarios,
    })?;
    let mut meter = Meter::new("scenario", options.budget.scenarios);
    meter.charge((graphs.len() as u64).saturating_mul(per_graph))?;

    let mut ids: HashMap<ViewKey, u32> = HashMap::new();
    let mut views = Vec::new();
    let mut constraints = Vec::new();
    let mut assignment = vec![0usize; n];
    let mut scratch: Vec<u32> = Vec::with_capacity(n);
    for g in &graphs {
        let in_sets: Vec<ProcSet> = g.in_sets();
        assignment.iter_mut().for_each(|a| *a = 0);
        loop {
            let mut used = 0u64;
            for &a in &assignment {
                used |= 1 << a;
            }
            let constraining = used.count_ones() as usize > k;
            scratch.clear();
            for in_set in &in_sets {
                let key = ViewKey::of(*in_set, &assignment);
                let id = *ids.entry(key).or_insert_with(|| {
                    views.push(key);
                    (views.len() - 1) as u32
                });
                scratch.push(id);
            }
            if constraining {
                scratch.sort_unstable();
                scratch.dedup();
                constraints.push(scratch.clone());
            }
            if !advance(&mut assignment, m) {
                break;
            }
        }
    }
    constraints.sort_unstable();
    constraints.dedup();
    Ok(Instance {
        views,
        constraints,
        graphs: graphs.len(),
        examined: meter.used(),
    })
}

/// Odometer step over `[0, m)^n`; false after the last assignment.
fn advance(a: &mut [usize], m: usize) -> bool {
    for slot in a.iter_mut().rev() {
        *slot += 1;
        if *slot < m {
            return true;
        }
        *slot = 0;
    }
    false
}

fn decide_inner(model: &Model, rounds: usize, k: usize, m: usize, options: &OracleOptions) -> Result<Verdict> {
    if k == 0 {
        return Err(Error::Precondition("k must be at least 1".into()));
    }
    check_values(m)?;
    let inst = collect(model, rounds, k, m, options)?;

    let masks: Vec<u64> = inst.views.iter().map(|v| v.value_mask()).collect();
    let mut formula = CnfFormula::new();
    // choice literals per view, indexed by value; forced views have none
    let mut choice: Vec<Vec<Option<Lit>>> = vec![Vec::new(); inst.views.len()];
    let mut touched = vec![false; inst.views.len()];
    for c in &inst.constraints {
        for &v in c {
            touched[v as usize] = true;
        }
    }
    for (v, lits) in choice.iter_mut().enumerate() {
        let mask = masks[v];
        if !touched[v] || mask.count_ones() < 2 {
            continue;
        }
        *lits = (0..m)
            .map(|a| (mask >> a & 1 == 1).then(|| formula.new_var().positive()))
            .collect();
        let clause: Vec<Lit> = lits.iter().flatten().copied().collect();
        formula.add_clause(&clause);
    }

    let cert = |formula: &CnfFormula, forced_conflict| UnsatCertificate {
        mode: options.mode,
        graphs: inst.graphs,
        scenarios_examined: inst.examined,
        constraining_scenarios: inst.constraints.len(),
        views: inst.views.len(),
        variables: formula.var_count(),
        clauses: formula.len(),
        forced_conflict,
    };

    for c in &inst.constraints {
        let mut forced = 0u64;
        let mut union = 0u64;
        for &v in c {
            let mask = masks[v as usize];
            union |= mask;
            if mask.count_ones() == 1 {
                forced |= mask;
            }
        }
        let fixed = forced.count_ones() as usize;
        if fixed > k {
            return Ok(Verdict::Unsat(cert(&formula, true)));
        }
        let room = k - fixed;
        let free: Vec<usize> = (0..m).filter(|&a| union >> a & 1 == 1 && forced >> a & 1 == 0).collect();
        if free.len() <= room {
            continue;
        }
        // y_a: value a is decided by some process of this scenario
        let ys: Vec<Lit> = free
            .iter()
            .map(|&a| {
                let y = formula.new_var().positive();
                for &v in c {
                    if let Some(Some(x)) = choice[v as usize].get(a) {
                        formula.add_clause(&[!*x, y]);
                    }
                }
                y
            })
            .collect();
        for subset in ProcSet::subsets_of_size(ys.len(), room + 1) {
            let clause: Vec<Lit> = subset.iter().map(|i| !ys[i]).collect();
            formula.add_clause(&clause);
        }
    }

    let mut solver = Solver::new();
    solver.add_formula(&formula);
    let sat = solver
        .solve()
        .map_err(|e| Error::Precondition(format!("SAT solver failure: {e}")))?;
    if !sat {
        return Ok(Verdict::Unsat(cert(&formula, false)));
    }
    let model_lits = solver.model().unwrap_or_default();
    let truth: Vec<bool> = {
        let mut t = vec![false; formula.var_count()];
        for l in model_lits {
            if l.is_positive() {
                t[l.index()] = true;
            }
        }
        t
    };
    let mut map = DecisionMap::default();
    for (v, key) in inst.views.iter().enumerate() {
        let mask = masks[v];
        let picked = choice[v]
            .iter()
            .position(|x| matches!(x, Some(l) if truth[l.index()]))
            .unwrap_or(mask.trailing_zeros() as usize);
        map.insert(FlatView::from_key(*key), picked)?;
    }
    Ok(Verdict::Sat(map))
}
