//! Instance check of the shelling-based connectivity transfer: if `A` is
//! shellable, the images of its facets satisfy the intersection equation on
//! shelling prefixes, and every `t+1`-wise image intersection around a facet
//! is `(ℓ−t)`-connected, then the union of the images is `ℓ`-connected.

use serde::{Deserialize, Serialize};

use super::{certify_connectivity, find_shelling_order, Complex, Connectivity};
use crate::budget::{Budget, Meter};
use crate::error::{Error, Result};
use crate::graph::ProcSet;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HypothesisStatus {
    /// Every check passed with certainty.
    Holds,
    /// Nothing refuted, but some connectivity only passed the homology test.
    HomologyConsistent,
    Fails,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransferReport {
    pub level: i64,
    pub shelling_order: Vec<usize>,
    pub intersection_equation: HypothesisStatus,
    pub local_connectivity: HypothesisStatus,
    /// Number of intersections whose connectivity was examined.
    pub local_checks: usize,
    pub first_failure: Option<String>,
    pub conclusion: Connectivity,
}

fn union_all<'a>(parts: impl Iterator<Item = &'a Complex>) -> Complex {
    Complex::new(parts.flat_map(|c| c.facets().iter().cloned()).collect())
}

/// Checks both hypotheses and the conclusion on one instance.
///
/// `images[i]` is the image of facet `i` of `a` (facets in canonical order).
/// The intersection equation is checked for every prefix of the shelling
/// order found, which is where the transfer argument applies it.
pub fn verify_connectivity_transfer(a: &Complex, images: &[Complex], level: i64, budget: &Budget) -> Result<TransferReport> {
    if images.len() != a.facets().len() {
        return Err(Error::Precondition(format!(
            "{} images for {} facets",
            images.len(),
            a.facets().len()
        )));
    }
    if level < -1 {
        return Err(Error::Precondition(format!("level {level} is vacuous")));
    }
    let order = find_shelling_order(a, budget.search_nodes)?
        .ok_or_else(|| Error::Precondition("the source complex is not shellable".into()))?;
    let facets = a.facets();
    let width = facets.first().map_or(0, |f| f.len());
    let adjacent = |i: usize, j: usize| i != j && facets[i].intersection(&facets[j]).len() + 1 == width;

    let mut first_failure = None;
    let mut equation = HypothesisStatus::Holds;
    for j in 1..order.len() {
        let phi = order[j];
        let prefix = &order[..j];
        let lhs = union_all(prefix.iter().map(|&i| &images[i])).intersection(&images[phi]);
        let rhs = union_all(
            prefix
                .iter()
                .filter(|&&i| adjacent(i, phi))
                .map(|&i| images[i].intersection(&images[phi]))
                .collect::<Vec<_>>()
                .iter(),
        );
        if lhs != rhs {
            equation = HypothesisStatus::Fails;
            first_failure.get_or_insert_with(|| format!("intersection equation fails at shelling step {j} (facet {phi})"));
            break;
        }
    }

    let mut local = HypothesisStatus::Holds;
    let mut checks = 0;
    let mut meter = Meter::new("transfer check", budget.search_nodes);
    'outer: for (i0, image0) in images.iter().enumerate() {
        let neighbours: Vec<usize> = (0..facets.len()).filter(|&j| adjacent(i0, j)).collect();
        let max_t = (level + 1).min(neighbours.len() as i64).max(0) as usize;
        for t in 0..=max_t {
            let target = level - t as i64;
            for pick in ProcSet::subsets_of_size(neighbours.len(), t) {
                meter.charge(1)?;
                let mut inter = image0.clone();
                for k in pick.iter() {
                    inter = inter.intersection(&images[neighbours[k]]);
                }
                checks += 1;
                let verdict = if target == -1 {
                    if inter.is_empty() {
                        Connectivity::CertifiedNo { dimension: -1, rank: 1 }
                    } else {
                        Connectivity::ShellableYes { order: Vec::new() }
                    }
                } else {
                    certify_connectivity(&inter, target, budget)?
                };
                match verdict {
                    Connectivity::CertifiedNo { dimension, .. } => {
                        local = HypothesisStatus::Fails;
                        first_failure.get_or_insert_with(|| {
                            let others: Vec<usize> = pick.iter().map(|k| neighbours[k]).collect();
                            format!(
                                "intersection of images {i0} and {others:?} is not {target}-connected (homology in dimension {dimension})"
                            )
                        });
                        break 'outer;
                    }
                    Connectivity::HomologyConsistent => local = HypothesisStatus::HomologyConsistent,
                    Connectivity::ShellableYes { .. } => {}
                }
            }
        }
    }

    let union = union_all(images.iter());
    let conclusion = certify_connectivity(&union, level, budget)?;
    Ok(TransferReport {
        level,
        shelling_order: order,
        intersection_equation: equation,
        local_connectivity: local,
        local_checks: checks,
        first_failure,
        conclusion,
    })
}
