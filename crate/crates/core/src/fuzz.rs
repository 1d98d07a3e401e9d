//! Seeded random models and the sandwich sweep: on every model, bounds and
//! oracle must satisfy `best_lower < threshold <= best_upper`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bounds::audit;
use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::graph::{Digraph, Model, ModelSpec};

/// Shape of the random models.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FuzzShape {
    pub max_n: usize,
    pub max_generators: usize,
}

impl Default for FuzzShape {
    fn default() -> Self {
        FuzzShape {
            max_n: 4,
            max_generators: 3,
        }
    }
}

/// A random closed-above model. Edge densities vary per generator and about
/// a third of the models are symmetric.
pub fn random_model<R: Rng>(rng: &mut R, shape: FuzzShape) -> Result<Model> {
    if shape.max_n < 2 || shape.max_generators == 0 {
        return Err(Error::Precondition("need max_n >= 2 and at least one generator".into()));
    }
    let n = rng.gen_range(2..=shape.max_n);
    let count = rng.gen_range(1..=shape.max_generators);
    let mut gens = Vec::with_capacity(count);
    for _ in 0..count {
        let p = [0.15, 0.3, 0.5][rng.gen_range(0..3)];
        let edges: Vec<(usize, usize)> = (0..n)
            .flat_map(|u| (0..n).map(move |v| (u, v)))
            .filter(|&(u, v)| u != v && rng.gen_bool(p))
            .collect();
        gens.push(Digraph::new(n, &edges)?);
    }
    Model::new(gens, rng.gen_ratio(1, 3))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepStatus {
    Ok,
    Violation,
    Budget,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepEntry {
    pub index: usize,
    pub model: ModelSpec,
    pub status: SweepStatus,
    pub best_lower: Option<usize>,
    pub threshold: Option<usize>,
    pub best_upper: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepReport {
    pub seed: u64,
    pub rounds: usize,
    pub shape: FuzzShape,
    pub models: usize,
    pub checked: usize,
    pub violations: usize,
    pub budget_excluded: usize,
    pub tight: usize,
    pub entries: Vec<SweepEntry>,
}

impl SweepReport {
    pub fn excluded_fraction(&self) -> f64 {
        if self.models == 0 {
            0.0
        } else {
            self.budget_excluded as f64 / self.models as f64
        }
    }
}

/// Audits `count` random models drawn from `seed`. Budget exhaustion
/// excludes a model; an ordering violation is recorded, not raised.
pub fn sandwich_sweep(seed: u64, count: usize, rounds: usize, shape: FuzzShape, budget: &Budget) -> Result<SweepReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut entries = Vec::with_capacity(count);
    for index in 0..count {
        let model = random_model(&mut rng, shape)?;
        let mut entry = SweepEntry {
            index,
            model: ModelSpec::from(&model),
            status: SweepStatus::Ok,
            best_lower: None,
            threshold: None,
            best_upper: None,
            message: None,
        };
        match audit(&model, rounds, budget) {
            Ok(a) => {
                entry.best_lower = Some(a.bounds.best_lower);
                entry.best_upper = a.bounds.best_upper;
                entry.threshold = a.threshold;
                if a.budget_exhausted {
                    entry.status = SweepStatus::Budget;
                }
            }
            Err(e) if e.is_budget() => {
                entry.status = SweepStatus::Budget;
                entry.message = Some(e.to_string());
            }
            Err(e @ Error::Inconsistent(_)) => {
                entry.status = SweepStatus::Violation;
                entry.message = Some(e.to_string());
            }
            Err(e) => return Err(e),
        }
        entries.push(entry);
    }
    let count_of = |s| entries.iter().filter(|e| e.status == s).count();
    Ok(SweepReport {
        seed,
        rounds,
        shape,
        models: count,
        checked: count_of(SweepStatus::Ok),
        violations: count_of(SweepStatus::Violation),
        budget_excluded: count_of(SweepStatus::Budget),
        tight: entries
            .iter()
            .filter(|e| e.status == SweepStatus::Ok && e.threshold.is_some_and(|t| e.best_lower == Some(t - 1) && e.best_upper == Some(t)))
            .count(),
        entries,
    })
}
