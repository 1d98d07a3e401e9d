//! Upper and lower bounds on k-set agreement for closed-above models, and an
//! audit that checks them against the exact oracle.
//!
//! Upper bounds name a `k` for which k-set agreement is solvable. Lower
//! bounds name the largest `k` for which it is impossible (0 when the bound
//! says nothing). Both are reported with the method that produced them.

use serde::{Deserialize, Serialize};

use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::graph::{product_set, Digraph, Model};
use crate::metrics::{common_dom, cov, covering_sequence, dom, edom, edom_over, max_cov};
use crate::solvability::{decide_solvability, OracleOptions, ScenarioMode, Verdict};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UpperMethod {
    Dom,
    Edom,
    Cov,
    CovSequence,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LowerMethod {
    SimpleDom,
    GeneralFormula,
    SymmetricFormula,
    MultiRound,
    StarFamily,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Applicability {
    AllAlgorithms,
    ObliviousOnly,
}

/// `k`-set agreement is solvable in `rounds` rounds.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UpperBound {
    pub k: usize,
    pub method: UpperMethod,
    /// The index `i` for covering-number based bounds.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub index: Option<usize>,
    pub cite: String,
}

/// `k`-set agreement is impossible (and so is every smaller `k`). A `k` of 0
/// is vacuous.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LowerBound {
    pub k: usize,
    pub method: LowerMethod,
    pub cite: String,
    pub applicability: Applicability,
    pub vacuous: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelSummary {
    pub n: usize,
    pub generators: usize,
    pub effective_generators: usize,
    pub symmetric: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub model: ModelSummary,
    pub rounds: usize,
    pub upper: Vec<UpperBound>,
    pub lower: Vec<LowerBound>,
    /// Smallest solvable `k` among the upper bounds.
    pub best_upper: Option<usize>,
    /// Largest impossible `k` among the lower bounds (0 if none applies).
    pub best_lower: usize,
    /// Whether `best_upper - 1 == best_lower`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tight: Option<bool>,
    pub notes: Vec<String>,
}

const SCOPE_NOTE: &str = "multi-round bounds concern oblivious algorithms that decide after exactly r rounds";
const STRICT_NOTE: &str = "simple models: k < dom(G) is impossible; k = dom(G) itself is solvable in one round";

fn summary(model: &Model) -> ModelSummary {
    ModelSummary {
        n: model.n(),
        generators: model.generators().len(),
        effective_generators: model.effective_generators().len(),
        symmetric: model.is_symmetric(),
    }
}

/// The r-round communication patterns of the generators.
fn rounds_of(model: &Model, rounds: usize, budget: &Budget) -> Result<Vec<Digraph>> {
    if rounds == 0 {
        return Err(Error::Precondition("round count must be at least 1".into()));
    }
    product_set(model, rounds, budget.products, false)
}

/// Covering-sequence bound: smallest `i` whose sequence on the one-round
/// generators reaches `n` within `rounds` steps.
fn sequence_bound(gens: &[Digraph], n: usize, rounds: usize) -> Result<Option<UpperBound>> {
    for i in 1..=n {
        let seq = covering_sequence(gens, i, rounds)?;
        if seq.rounds_to_n.is_some_and(|r| r <= rounds) {
            return Ok(Some(UpperBound {
                k: i,
                method: UpperMethod::CovSequence,
                index: Some(i),
                cite: format!(
                    "covering sequence {:?} from index {i} reaches n after {} rounds",
                    seq.values,
                    seq.rounds_to_n.unwrap_or(0)
                ),
            }));
        }
    }
    Ok(None)
}

/// Every upper bound for `rounds` rounds. The covering-sequence bound is
/// still produced when the r-fold products exceed the budget.
pub fn upper_bounds(model: &Model, rounds: usize, budget: &Budget) -> Result<(Vec<UpperBound>, Vec<String>)> {
    let n = model.n();
    let gens = model.effective_generators();
    let mut out = Vec::new();
    let mut notes = Vec::new();
    match rounds_of(model, rounds, budget) {
        Ok(products) => {
            if model.single_generator().is_some() {
                let g = products[0];
                out.push(UpperBound {
                    k: dom(&g),
                    method: UpperMethod::Dom,
                    index: None,
                    cite: "a smallest dominating set of the only pattern is heard by everyone; decide the minimum heard from it".into(),
                });
            }
            let e = edom(&products)?;
            out.push(UpperBound {
                k: e,
                method: UpperMethod::Edom,
                index: None,
                cite: format!("every {e}-set of processes dominates each pattern; decide the minimum received"),
            });
            let mut best: Option<(usize, usize)> = None;
            for i in 1..e {
                let k = i + n - cov(&products, i)?;
                if best.is_none_or(|(bk, _)| k < bk) {
                    best = Some((k, i));
                }
            }
            if let Some((k, i)) = best {
                out.push(UpperBound {
                    k,
                    method: UpperMethod::Cov,
                    index: Some(i),
                    cite: format!("every {i}-set is heard by at least {} processes in each pattern", n + i - k),
                });
            }
        }
        Err(e) if e.is_budget() => notes.push(format!("r-fold products skipped: {e}")),
        Err(e) => return Err(e),
    }
    if let Some(b) = sequence_bound(&gens, n, rounds)? {
        out.push(b);
    }
    Ok((out, notes))
}

/// `min(threshold - 2, min_t t + M_t - 2)` with `M_t` from the given
/// max-covering numbers, as a largest impossible `k` (0 if vacuous).
fn formula(n: usize, threshold: usize, max_cov_of: impl Fn(usize) -> Result<usize>, denominator: impl Fn(usize, usize) -> usize) -> Result<usize> {
    let mut l = threshold as i64 - 2;
    for t in 1..threshold {
        let mc = max_cov_of(t)?;
        let m = if mc > t {
            (n - t - 1) / denominator(t, mc)
        } else {
            n - t
        };
        l = l.min((t + m) as i64 - 2);
    }
    Ok((l + 1).max(0) as usize)
}

/// The general formula on a set of graphs. The threshold is the common
/// domination number: below it, no set of processes reaches everyone in
/// every graph, which is what the impossibility argument needs. It equals
/// the distributed domination number on symmetric sets and can be smaller
/// on others, where using the latter would claim false impossibilities.
fn general_formula(graphs: &[Digraph], n: usize) -> Result<(usize, usize, usize)> {
    let threshold = common_dom(graphs)?;
    let over = edom_over(graphs)?;
    let k = formula(n, threshold, |t| max_cov(graphs, t), |t, mc| mc - t)?;
    Ok((k, threshold, over))
}

fn lower(k: usize, method: LowerMethod, applicability: Applicability, mut cite: String) -> LowerBound {
    if k == 0 {
        cite.push_str("; vacuous: no impossibility from this bound");
    }
    LowerBound {
        k,
        method,
        cite,
        applicability,
        vacuous: k == 0,
    }
}

/// One-round lower bounds; they hold for every algorithm.
pub fn lower_bound_one_round(model: &Model) -> Result<(Vec<LowerBound>, Vec<String>)> {
    let n = model.n();
    let gens = model.effective_generators();
    let mut out = Vec::new();
    let mut notes = Vec::new();
    if let Some(g) = model.single_generator() {
        let d = dom(&g);
        out.push(lower(
            d - 1,
            LowerMethod::SimpleDom,
            Applicability::AllAlgorithms,
            format!("dom(G) = {d}: with fewer than {d} values some process may miss them all"),
        ));
        notes.push(STRICT_NOTE.into());
    }
    let (k, threshold, over) = general_formula(&gens, n)?;
    out.push(lower(
        k,
        LowerMethod::GeneralFormula,
        Applicability::AllAlgorithms,
        format!("protocol complex is (k-1)-connected; common domination {threshold}, distributed domination {over}"),
    ));
    if threshold < over {
        notes.push(format!(
            "general formula uses the common domination number {threshold} instead of the distributed domination number {over}; the latter overstates impossibility on non-symmetric models"
        ));
    }
    if model.is_symmetric() && model.generators().len() == 1 {
        let g = [model.generators()[0]];
        let threshold = edom_over(&gens)?;
        let k = formula(n, threshold, |t| max_cov(&g, t), |t, mc| t * (mc - t))?;
        out.push(lower(
            k,
            LowerMethod::SymmetricFormula,
            Applicability::AllAlgorithms,
            "symmetric single-orbit specialization with max-covering of the generator alone".into(),
        ));
    }
    Ok((out, notes))
}

/// Lower bounds for `rounds` rounds, valid for oblivious algorithms.
pub fn lower_bound_multi(model: &Model, rounds: usize, budget: &Budget) -> Result<(Vec<LowerBound>, Vec<String>)> {
    let n = model.n();
    let products = rounds_of(model, rounds, budget)?;
    let mut out = Vec::new();
    let mut notes = vec![SCOPE_NOTE.to_string()];
    if model.single_generator().is_some() {
        let d = dom(&products[0]);
        out.push(lower(
            d - 1,
            LowerMethod::MultiRound,
            Applicability::ObliviousOnly,
            format!("dom(G^r) = {d} for the single r-round pattern"),
        ));
        notes.push("single-generator multi-round bound uses dom(G^r), not dom(G): the one-round value can exceed what r rounds allow".into());
    }
    let (k, threshold, over) = general_formula(&products, n)?;
    out.push(lower(
        k,
        LowerMethod::MultiRound,
        Applicability::ObliviousOnly,
        format!("general formula on the r-fold products; common domination {threshold}, distributed domination {over}"),
    ));
    Ok((out, notes))
}

fn assemble(model: ModelSummary, rounds: usize, upper: Vec<UpperBound>, lower: Vec<LowerBound>, notes: Vec<String>) -> Result<BoundsReport> {
    let best_upper = upper.iter().map(|u| u.k).min();
    let best_lower = lower.iter().map(|l| l.k).max().unwrap_or(0);
    if let Some(u) = best_upper {
        if best_lower >= u {
            return Err(Error::Inconsistent(format!(
                "{best_lower}-set agreement reported impossible but {u}-set agreement reported solvable"
            )));
        }
    }
    Ok(BoundsReport {
        model,
        rounds,
        tight: best_upper.map(|u| u - 1 == best_lower),
        best_upper,
        best_lower,
        upper,
        lower,
        notes,
    })
}

/// Upper and lower bounds for `rounds` rounds.
pub fn bounds_report(model: &Model, rounds: usize, budget: &Budget) -> Result<BoundsReport> {
    let (upper, mut notes) = upper_bounds(model, rounds, budget)?;
    let (lower, more) = if rounds == 1 {
        lower_bound_one_round(model)?
    } else {
        lower_bound_multi(model, rounds, budget)?
    };
    notes.extend(more);
    let of = |m| upper.iter().find(|u: &&UpperBound| u.method == m).map(|u| u.k);
    if let (Some(c), Some(e)) = (of(UpperMethod::Cov), of(UpperMethod::Edom)) {
        if c < e {
            notes.push(format!("covering bound ({c}) improves on the distributed domination bound ({e})"));
        }
    }
    assemble(summary(model), rounds, upper, lower, notes)
}

/// Closed-form bounds for the symmetric union of `s` stars on `n` processes.
pub fn star_family_report(n: usize, s: usize) -> Result<BoundsReport> {
    if !(1..n).contains(&s) || !(crate::graph::MIN_PROCESSES..=crate::graph::MAX_PROCESSES).contains(&n) {
        return Err(Error::Precondition(format!("need 1 <= s < n <= 16, got n = {n}, s = {s}")));
    }
    let upper = vec![UpperBound {
        k: n - s + 1,
        method: UpperMethod::Edom,
        index: None,
        cite: format!("any {} processes include a center of every star union", n - s + 1),
    }];
    let lower = vec![lower(
        n - s,
        LowerMethod::StarFamily,
        Applicability::ObliviousOnly,
        format!("distributed domination stays {} in every round", n - s + 1),
    )];
    let model = ModelSummary {
        n,
        generators: 1,
        effective_generators: 0,
        symmetric: true,
    };
    let mut notes = vec![SCOPE_NOTE.to_string()];
    notes.push("closed form; the symmetric closure is not materialized".into());
    assemble(model, 1, upper, lower, notes)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleRun {
    pub k: usize,
    pub values: usize,
    pub result: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditReport {
    pub bounds: BoundsReport,
    pub oracle: Vec<OracleRun>,
    /// Smallest `k` the oracle found solvable, when every run completed.
    pub threshold: Option<usize>,
    pub budget_exhausted: bool,
}

/// Runs the oracle for `k = 1, 2, ...` (with `k + 1` values) until the first
/// solvable `k`, and checks `best_lower < threshold <= best_upper`.
pub fn audit(model: &Model, rounds: usize, budget: &Budget) -> Result<AuditReport> {
    let bounds = bounds_report(model, rounds, budget)?;
    let opts = OracleOptions {
        mode: ScenarioMode::Exact,
        budget: *budget,
    };
    let mut oracle = Vec::new();
    let mut threshold = None;
    let mut budget_exhausted = false;
    for k in 1..=model.n() {
        let v = decide_solvability(model, rounds, k, k + 1, &opts)?;
        oracle.push(OracleRun {
            k,
            values: k + 1,
            result: v.label().into(),
        });
        match v {
            Verdict::Sat(_) => {
                threshold = Some(k);
                break;
            }
            Verdict::Unsat(_) => {}
            Verdict::Budget { .. } => {
                budget_exhausted = true;
                break;
            }
        }
    }
    if let Some(t) = threshold {
        if bounds.best_lower >= t {
            return Err(Error::Inconsistent(format!(
                "lower bound says {}-set agreement is impossible, oracle solves {t}-set agreement",
                bounds.best_lower
            )));
        }
        if let Some(u) = bounds.best_upper {
            if t > u {
                return Err(Error::Inconsistent(format!(
                    "upper bound says {u}-set agreement is solvable, oracle needs k = {t}"
                )));
            }
        }
    } else if !budget_exhausted {
        let last = oracle.last().map_or(0, |r| r.k);
        if bounds.best_upper.is_some_and(|u| u <= last) {
            return Err(Error::Inconsistent("oracle refutes a k the upper bounds call solvable".into()));
        }
    }
    Ok(AuditReport {
        bounds,
        oracle,
        threshold,
        budget_exhausted,
    })
}
