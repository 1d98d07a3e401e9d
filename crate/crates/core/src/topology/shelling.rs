use std::collections::{HashMap, HashSet};

use super::Complex;
use crate::budget::Meter;
use crate::error::{Error, Result};

/// Facets as ascending vertex ids; `mask(i, j)` has bit `x` set when the
/// `x`-th vertex of facet `j` also lies in facet `i`.
struct Overlaps {
    width: usize,
    ids: Vec<Vec<u32>>,
}

impl Overlaps {
    fn new(c: &Complex) -> Result<Self> {
        if !c.is_pure() {
            return Err(Error::NotPure);
        }
        let index: HashMap<_, u32> = c.vertices().into_iter().enumerate().map(|(i, v)| (v, i as u32)).collect();
        // vertex order inside a simplex matches the global vertex order
        let ids = c
            .facets()
            .iter()
            .map(|f| f.vertices().iter().map(|v| index[v]).collect())
            .collect();
        let width = c.facets().first().map_or(0, |f| f.len());
        Ok(Overlaps { width, ids })
    }

    fn mask(&self, i: usize, j: usize) -> u32 {
        let (a, b) = (&self.ids[i], &self.ids[j]);
        let (mut x, mut y, mut m) = (0, 0, 0u32);
        while x < a.len() && y < b.len() {
            match a[x].cmp(&b[y]) {
                std::cmp::Ordering::Less => x += 1,
                std::cmp::Ordering::Greater => y += 1,
                std::cmp::Ordering::Equal => {
                    m |= 1 << y;
                    x += 1;
                    y += 1;
                }
            }
        }
        m
    }

    /// Whether `next` may follow the facets in `placed`: the part of `next`
    /// already covered must be pure of codimension one in `next`.
    fn extends(&self, placed: impl Iterator<Item = usize> + Clone, next: usize) -> bool {
        let full = (1u32 << self.width) - 1;
        // vertices x of `next` whose opposite ridge is already covered
        let mut ridges = 0u32;
        for p in placed.clone() {
            let m = self.mask(p, next);
            if m.count_ones() as usize + 1 == self.width {
                ridges |= full & !m;
            }
        }
        // every overlap must lie inside one of those ridges
        placed.into_iter().all(|p| !self.mask(p, next) & ridges != 0)
    }
}

/// Checks that `order` is a permutation of the facet indices and a shelling.
pub fn check_shelling_order(c: &Complex, order: &[usize]) -> Result<bool> {
    let ov = Overlaps::new(c)?;
    let mut seen = vec![false; c.facets().len()];
    if order.len() != seen.len() {
        return Ok(false);
    }
    for (j, &f) in order.iter().enumerate() {
        if f >= seen.len() || std::mem::replace(&mut seen[f], true) {
            return Ok(false);
        }
        if j > 0 && !ov.extends(order[..j].iter().copied(), f) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Lexicographically first shelling order, or `None` when none exists.
///
/// Depth-first over facet indices with memoized dead prefixes: whether a
/// facet may be added depends only on the set already placed. `limit` caps
/// the work (nodes plus facet-pair overlap tests); exceeding it is an
/// error, never a `None`.
pub fn find_shelling_order(c: &Complex, limit: u64) -> Result<Option<Vec<usize>>> {
    let ov = Overlaps::new(c)?;
    let count = c.facets().len();
    if count == 0 {
        return Ok(Some(Vec::new()));
    }
    let words = count.div_ceil(64);
    let mut meter = Meter::new("search node", limit);
    let mut dead: HashSet<Vec<u64>> = HashSet::new();
    let mut used = vec![0u64; words];
    let mut order = Vec::with_capacity(count);

    fn go(
        ov: &Overlaps,
        count: usize,
        used: &mut Vec<u64>,
        order: &mut Vec<usize>,
        dead: &mut HashSet<Vec<u64>>,
        meter: &mut Meter,
    ) -> Result<bool> {
        if order.len() == count {
            return Ok(true);
        }
        if dead.contains(used) {
            return Ok(false);
        }
        meter.charge(1)?;
        for f in 0..count {
            if used[f / 64] >> (f % 64) & 1 == 1 {
                continue;
            }
            meter.charge(order.len() as u64)?;
            if !order.is_empty() && !ov.extends(order.iter().copied(), f) {
                continue;
            }
            used[f / 64] |= 1 << (f % 64);
            order.push(f);
            if go(ov, count, used, order, dead, meter)? {
                return Ok(true);
            }
            order.pop();
            used[f / 64] &= !(1 << (f % 64));
        }
        dead.insert(used.clone());
        Ok(false)
    }

    if go(&ov, count, &mut used, &mut order, &mut dead, &mut meter)? {
        Ok(Some(order))
    } else {
        Ok(None)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::{input_pseudosphere, Simplex, Vertex, View};

    fn s(vs: &[usize]) -> Simplex {
        Simplex::new(vs.iter().map(|&v| Vertex::new(v, View::Value(0))).collect()).unwrap()
    }

    #[test]
    fn shared_edge_and_shared_vertex() {
        let shared_edge = Complex::new(vec![s(&[0, 1, 2]), s(&[1, 2, 3])]);
        let order = find_shelling_order(&shared_edge, 100).unwrap().unwrap();
        assert!(check_shelling_order(&shared_edge, &order).unwrap());
        let shared_vertex = Complex::new(vec![s(&[0, 1, 2]), s(&[2, 3, 4])]);
        assert_eq!(find_shelling_order(&shared_vertex, 100).unwrap(), None);
    }

    #[test]
    fn points_always_shell() {
        let c = Complex::new(vec![s(&[0]), s(&[1]), s(&[2])]);
        assert_eq!(find_shelling_order(&c, 100).unwrap(), Some(vec![0, 1, 2]));
    }

    #[test]
    fn not_pure_is_an_error() {
        let c = Complex::new(vec![s(&[0, 1]), s(&[2])]);
        assert!(matches!(find_shelling_order(&c, 100), Err(Error::NotPure)));
    }

    #[test]
    fn octahedron_shells() {
        let c = input_pseudosphere(3, 2, 100).unwrap();
        let order = find_shelling_order(&c, 10_000).unwrap().unwrap();
        assert!(check_shelling_order(&c, &order).unwrap());
        assert!(!check_shelling_order(&c, &[0, 0, 1, 2, 3, 4, 5, 6]).unwrap());
    }

    #[test]
    fn budget_reported() {
        let c = input_pseudosphere(3, 3, 100).unwrap();
        assert!(find_shelling_order(&c, 2).unwrap_err().is_budget());
    }
}
