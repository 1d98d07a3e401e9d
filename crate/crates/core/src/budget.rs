use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Enumeration limits shared by the exhaustive procedures.
///
/// Every exhaustive routine checks its own counter against one of these and
/// reports [`Error::BudgetExceeded`] instead of truncating silently.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    /// Graph products computed while building r-fold product sets.
    pub products: u64,
    /// Scenario graphs times assignments enumerated by the oracle.
    pub scenarios: u64,
    /// Faces materialized for homology computations.
    pub simplices: u64,
    /// Nodes visited by backtracking searches.
    pub search_nodes: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            products: 1_000_000,
            scenarios: 20_000_000,
            simplices: 2_000_000,
            search_nodes: 10_000_000,
        }
    }
}

impl Budget {
    /// Same limit for every counter.
    pub fn uniform(limit: u64) -> Self {
        Budget {
            products: limit,
            scenarios: limit,
            simplices: limit,
            search_nodes: limit,
        }
    }
}

/// Running counter against a single limit.
#[derive(Debug)]
pub(crate) struct Meter {
    what: &'static str,
    limit: u64,
    used: u64,
}

impl Meter {
    pub(crate) fn new(what: &'static str, limit: u64) -> Self {
        Meter { what, limit, used: 0 }
    }

    pub(crate) fn charge(&mut self, amount: u64) -> Result<()> {
        self.used = self.used.saturating_add(amount);
        if self.used > self.limit {
            Err(Error::BudgetExceeded {
                what: self.what,
                limit: self.limit,
            })
        } else {
            Ok(())
        }
    }

    pub(crate) fn used(&self) -> u64 {
        self.used
    }
}
