use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::{find_shelling_order, Complex};
use crate::budget::{Budget, Meter};
use crate::error::{Error, Result};
use crate::graph::ProcSet;

/// Facets as ascending vertex-id lists.
fn indexed_facets(c: &Complex) -> Vec<Vec<u32>> {
    let ids: HashMap<_, u32> = c
        .vertices()
        .into_iter()
        .enumerate()
        .map(|(i, v)| (v, i as u32))
        .collect();
    c.facets()
        .iter()
        .map(|f| {
            let mut v: Vec<u32> = f.vertices().iter().map(|x| ids[x]).collect();
            v.sort_unstable();
            v
        })
        .collect()
}

/// Distinct faces with `size` vertices, in sorted order.
fn faces_of_size(facets: &[Vec<u32>], size: usize, meter: &mut Meter) -> Result<Vec<Vec<u32>>> {
    let mut seen = HashSet::new();
    for f in facets {
        if f.len() < size {
            continue;
        }
        for pick in ProcSet::subsets_of_size(f.len(), size) {
            meter.charge(1)?;
            seen.insert(pick.iter().map(|i| f[i]).collect::<Vec<u32>>());
        }
    }
    let mut out: Vec<Vec<u32>> = seen.into_iter().collect();
    out.sort_unstable();
    Ok(out)
}

/// Number of faces of each dimension, from 0 up to the complex dimension.
pub fn face_counts(c: &Complex, limit: u64) -> Result<Vec<u64>> {
    let facets = indexed_facets(c);
    let mut meter = Meter::new("simplex", limit);
    let top = facets.iter().map(Vec::len).max().unwrap_or(0);
    (1..=top)
        .map(|s| faces_of_size(&facets, s, &mut meter).map(|f| f.len() as u64))
        .collect()
}

/// Alternating sum of face counts (the empty face excluded).
pub fn euler_characteristic(c: &Complex, limit: u64) -> Result<i64> {
    Ok(face_counts(c, limit)?
        .iter()
        .enumerate()
        .map(|(d, &f)| if d % 2 == 0 { f as i64 } else { -(f as i64) })
        .sum())
}

type SparseRow = Vec<(u32, i128)>;

fn gcd(mut a: i128, mut b: i128) -> i128 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Row echelon form built incrementally with fraction-free integer steps.
#[derive(Default)]
struct Echelon {
    pivots: HashMap<u32, SparseRow>,
}

impl Echelon {
    /// Adds a row; true when it raised the rank.
    fn insert(&mut self, mut row: SparseRow) -> Result<bool> {
        while let Some(&(lead, _)) = row.first() {
            match self.pivots.get(&lead) {
                None => {
                    normalize(&mut row);
                    self.pivots.insert(lead, row);
                    return Ok(true);
                }
                Some(p) => row = eliminate(p, &row)?,
            }
        }
        Ok(false)
    }

    fn rank(&self) -> usize {
        self.pivots.len()
    }
}

fn normalize(row: &mut SparseRow) {
    let g = row.iter().fold(0, |g, &(_, x)| gcd(g, x));
    let sign = if row.first().is_some_and(|&(_, x)| x < 0) { -1 } else { 1 };
    if g > 1 || sign < 0 {
        for e in row.iter_mut() {
            e.1 = e.1 / g * sign;
        }
    }
}

/// `a·row - b·pivot` where `a`, `b` are the two leading coefficients; the
/// leading entry cancels.
fn eliminate(pivot: &SparseRow, row: &SparseRow) -> Result<SparseRow> {
    let g = gcd(pivot[0].1, row[0].1);
    let a = pivot[0].1 / g;
    let b = row[0].1 / g;
    let mut out = Vec::with_capacity(pivot.len() + row.len());
    let (mut i, mut j) = (1, 1);
    let scaled = |x: i128, f: i128| x.checked_mul(f).ok_or(Error::Overflow);
    while i < pivot.len() || j < row.len() {
        let (col, val) = match (pivot.get(i), row.get(j)) {
            (Some(&(pc, pv)), Some(&(rc, rv))) if pc == rc => {
                i += 1;
                j += 1;
                (pc, scaled(rv, a)?.checked_sub(scaled(pv, b)?).ok_or(Error::Overflow)?)
            }
            (Some(&(pc, pv)), Some(&(rc, _))) if pc < rc => {
                i += 1;
                (pc, scaled(pv, -b)?)
            }
            (Some(&(pc, pv)), None) => {
                i += 1;
                (pc, scaled(pv, -b)?)
            }
            (_, Some(&(rc, rv))) => {
                j += 1;
                (rc, scaled(rv, a)?)
            }
            (None, None) => unreachable!(),
        };
        if val != 0 {
            out.push((col, val));
        }
    }
    normalize(&mut out);
    Ok(out)
}

/// Rank of the boundary map from faces of `size` vertices to faces of
/// `size - 1` vertices.
fn boundary_rank(upper: &[Vec<u32>], lower: &[Vec<u32>]) -> Result<usize> {
    let index: HashMap<&[u32], u32> = lower
        .iter()
        .enumerate()
        .map(|(i, f)| (f.as_slice(), i as u32))
        .collect();
    let mut ech = Echelon::default();
    let mut buf = Vec::new();
    for face in upper {
        let mut row: SparseRow = Vec::with_capacity(face.len());
        for skip in 0..face.len() {
            buf.clear();
            buf.extend(face.iter().enumerate().filter(|&(i, _)| i != skip).map(|(_, &v)| v));
            let sign = if skip % 2 == 0 { 1 } else { -1 };
            row.push((index[buf.as_slice()], sign));
        }
        row.sort_unstable();
        ech.insert(row)?;
    }
    Ok(ech.rank())
}

/// Ranks of reduced homology over the rationals in dimensions `0..=up_to`.
/// The empty complex has all of these equal to zero (its only reduced
/// homology sits in dimension -1).
pub fn reduced_homology_ranks(c: &Complex, up_to: usize, limit: u64) -> Result<Vec<usize>> {
    let facets = indexed_facets(c);
    let mut meter = Meter::new("simplex", limit);
    // faces[s] holds the faces with s vertices, for s in 1..=up_to + 2
    let mut faces: Vec<Vec<Vec<u32>>> = vec![Vec::new()];
    for s in 1..=up_to + 2 {
        faces.push(faces_of_size(&facets, s, &mut meter)?);
    }
    // rank[d] = rank of the boundary out of dimension d; d = 0 is the
    // augmentation onto the empty face
    let mut rank = vec![0usize; up_to + 2];
    rank[0] = usize::from(!faces[1].is_empty());
    for d in 1..=up_to + 1 {
        rank[d] = boundary_rank(&faces[d + 1], &faces[d])?;
    }
    Ok((0..=up_to)
        .map(|d| faces[d + 1].len() - rank[d] - rank[d + 1])
        .collect())
}

/// Outcome of a connectivity check at some level `k`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "verdict")]
pub enum Connectivity {
    /// Reduced homology is non-zero in `dimension` (−1 for the empty
    /// complex), so the complex is not `k`-connected.
    CertifiedNo { dimension: i64, rank: usize },
    /// Homology vanishes up to `k`; homotopy not certified.
    HomologyConsistent,
    /// A shelling order exists and the dimension is at least `k + 1`.
    ShellableYes { order: Vec<usize> },
}

impl Connectivity {
    pub fn refuted(&self) -> bool {
        matches!(self, Connectivity::CertifiedNo { .. })
    }
}

/// Work cap for the optional shelling attempt inside
/// [`certify_connectivity`]; a miss only downgrades the verdict.
pub const SHELLING_ATTEMPT_LIMIT: u64 = 200_000;

/// Three-valued `k`-connectivity check: homology refutes, a shelling
/// confirms, anything else is reported as merely consistent.
pub fn certify_connectivity(c: &Complex, k: i64, budget: &Budget) -> Result<Connectivity> {
    if k < -1 {
        return Err(Error::Precondition(format!(
            "connectivity level {k} is vacuous; levels start at -1"
        )));
    }
    if c.is_empty() {
        return Ok(Connectivity::CertifiedNo { dimension: -1, rank: 1 });
    }
    if k >= 0 {
        let ranks = reduced_homology_ranks(c, k as usize, budget.simplices)?;
        if let Some((d, &r)) = ranks.iter().enumerate().find(|(_, &r)| r != 0) {
            return Ok(Connectivity::CertifiedNo {
                dimension: d as i64,
                rank: r,
            });
        }
    }
    if c.is_pure() && c.dim() > k {
        match find_shelling_order(c, budget.search_nodes.min(SHELLING_ATTEMPT_LIMIT)) {
            Ok(Some(order)) => return Ok(Connectivity::ShellableYes { order }),
            Ok(None) => {}
            Err(e) if e.is_budget() => {}
            Err(e) => return Err(e),
        }
    }
    Ok(Connectivity::HomologyConsistent)
}
