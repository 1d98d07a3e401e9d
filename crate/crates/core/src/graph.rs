//! Communication graphs on a fixed process set, closed-above models, and the
//! path product used to compose rounds.
//!
//! Every [`Digraph`] carries all self-loops: a process always hears itself.
//! Rows are bit-packed, one `u16` of out-neighbours per process.

use std::collections::HashSet;
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering as AtomicOrdering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::budget::Meter;
use crate::error::{Error, Result};

pub const MAX_PROCESSES: usize = 16;
pub const MIN_PROCESSES: usize = 2;
/// Largest n for which permutations are enumerated.
pub const SYMMETRY_LIMIT: usize = 8;

/// A set of process ids in `[0, 16)`.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ProcSet(u16);

impl ProcSet {
    pub const EMPTY: ProcSet = ProcSet(0);

    pub fn from_bits(bits: u16) -> Self {
        ProcSet(bits)
    }

    pub fn bits(self) -> u16 {
        self.0
    }

    pub fn full(n: usize) -> Self {
        debug_assert!(n <= MAX_PROCESSES);
        if n == MAX_PROCESSES {
            ProcSet(u16::MAX)
        } else {
            ProcSet(((1u32 << n) - 1) as u16)
        }
    }

    pub fn singleton(p: usize) -> Self {
        ProcSet(1 << p)
    }

    pub fn contains(self, p: usize) -> bool {
        p < MAX_PROCESSES && self.0 & (1 << p) != 0
    }

    pub fn insert(&mut self, p: usize) {
        self.0 |= 1 << p;
    }

    pub fn with(self, p: usize) -> Self {
        ProcSet(self.0 | (1 << p))
    }

    pub fn union(self, other: ProcSet) -> Self {
        ProcSet(self.0 | other.0)
    }

    pub fn intersection(self, other: ProcSet) -> Self {
        ProcSet(self.0 & other.0)
    }

    pub fn difference(self, other: ProcSet) -> Self {
        ProcSet(self.0 & !other.0)
    }

    pub fn is_subset(self, other: ProcSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn min(self) -> Option<usize> {
        (self.0 != 0).then(|| self.0.trailing_zeros() as usize)
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let p = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(p)
            }
        })
    }

    /// All subsets of `[0, n)` of cardinality `k`, in increasing bit order.
    pub fn subsets_of_size(n: usize, k: usize) -> impl Iterator<Item = ProcSet> {
        let limit: u32 = 1u32 << n;
        let mut next: Option<u32> = if k > n {
            None
        } else if k == 0 {
            Some(0)
        } else {
            Some((1u32 << k) - 1)
        };
        std::iter::from_fn(move || {
            let cur = next?;
            next = if cur == 0 {
                None
            } else {
                // Gosper's hack
                let c = cur & cur.wrapping_neg();
                let r = cur + c;
                let succ = (((r ^ cur) >> 2) / c) | r;
                (succ < limit).then_some(succ)
            };
            Some(ProcSet(cur as u16))
        })
    }

    /// All subsets of `[0, n)`.
    pub fn all_subsets(n: usize) -> impl Iterator<Item = ProcSet> {
        (0u32..(1u32 << n)).map(|b| ProcSet(b as u16))
    }

    pub fn to_vec(self) -> Vec<usize> {
        self.iter().collect()
    }
}

impl fmt::Debug for ProcSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl FromIterator<usize> for ProcSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut s = ProcSet::EMPTY;
        for p in iter {
            s.insert(p);
        }
        s
    }
}

/// Serialized as the sorted list of member ids.
impl Serialize for ProcSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_vec().serialize(s)
    }
}

impl<'de> Deserialize<'de> for ProcSet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let ids = Vec::<usize>::deserialize(d)?;
        if let Some(&bad) = ids.iter().find(|&&p| p >= MAX_PROCESSES) {
            return Err(serde::de::Error::custom(format!("process id {bad} out of range")));
        }
        Ok(ids.into_iter().collect())
    }
}

fn check_n(n: usize) -> Result<()> {
    if (MIN_PROCESSES..=MAX_PROCESSES).contains(&n) {
        Ok(())
    } else {
        Err(Error::ProcessCount(n))
    }
}

fn same_n(a: usize, b: usize) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::MismatchedN { left: a, right: b })
    }
}

/// Directed communication graph with mandatory self-loops.
///
/// An edge `(u, v)` means `v` receives the message of `u` in this round.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Digraph {
    n: u8,
    out: [u16; MAX_PROCESSES],
}

impl Digraph {
    /// Builds a graph from an edge list; self-loops are always added.
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        check_n(n)?;
        let mut g = Digraph::identity_unchecked(n);
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::EndpointOutOfRange { from: u, to: v, n });
            }
            g.out[u] |= 1 << v;
        }
        Ok(g)
    }

    fn identity_unchecked(n: usize) -> Self {
        let mut out = [0u16; MAX_PROCESSES];
        for (p, row) in out.iter_mut().enumerate().take(n) {
            *row = 1 << p;
        }
        Digraph { n: n as u8, out }
    }

    /// Only self-loops.
    pub fn identity(n: usize) -> Result<Self> {
        check_n(n)?;
        Ok(Digraph::identity_unchecked(n))
    }

    pub fn complete(n: usize) -> Result<Self> {
        check_n(n)?;
        let full = ProcSet::full(n).bits();
        let mut g = Digraph::identity_unchecked(n);
        for row in g.out.iter_mut().take(n) {
            *row = full;
        }
        Ok(g)
    }

    /// Union of the stars centred at every process of `centers`.
    pub fn star(n: usize, centers: ProcSet) -> Result<Self> {
        check_n(n)?;
        let full = ProcSet::full(n).bits();
        let mut g = Digraph::identity_unchecked(n);
        for c in centers.iter() {
            if c >= n {
                return Err(Error::ProcessOutOfRange { process: c, n });
            }
            g.out[c] = full;
        }
        Ok(g)
    }

    /// Directed ring `i -> i+1 (mod n)`.
    pub fn cycle(n: usize) -> Result<Self> {
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Digraph::new(n, &edges)
    }

    /// Builds a graph from raw out-rows; missing self-loops are added.
    pub fn from_out_rows(rows: &[u16]) -> Result<Self> {
        let n = rows.len();
        check_n(n)?;
        let full = ProcSet::full(n).bits();
        let mut g = Digraph::identity_unchecked(n);
        for (p, &row) in rows.iter().enumerate() {
            if row & !full != 0 {
                let bad = (row & !full).trailing_zeros() as usize;
                return Err(Error::EndpointOutOfRange { from: p, to: bad, n });
            }
            g.out[p] |= row;
        }
        Ok(g)
    }

    /// Builds a graph from in-sets; `in_sets[p]` lists who `p` hears.
    pub fn from_in_sets(in_sets: &[ProcSet]) -> Result<Self> {
        let n = in_sets.len();
        check_n(n)?;
        let mut g = Digraph::identity_unchecked(n);
        for (v, set) in in_sets.iter().enumerate() {
            for u in set.iter() {
                if u >= n {
                    return Err(Error::EndpointOutOfRange { from: u, to: v, n });
                }
                g.out[u] |= 1 << v;
            }
        }
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.n as usize
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n() && v < self.n() && self.out[u] & (1 << v) != 0
    }

    /// `Out_G(p)`, including `p` itself.
    pub fn out(&self, p: usize) -> ProcSet {
        ProcSet(self.out[p])
    }

    /// `In_G(p)`, including `p` itself.
    pub fn in_set(&self, p: usize) -> ProcSet {
        let mut s = ProcSet::EMPTY;
        for u in 0..self.n() {
            if self.out[u] & (1 << p) != 0 {
                s.insert(u);
            }
        }
        s
    }

    /// In-sets of every process.
    pub fn in_sets(&self) -> Vec<ProcSet> {
        let n = self.n();
        let mut ins = vec![ProcSet::EMPTY; n];
        for u in 0..n {
            for v in ProcSet(self.out[u]).iter() {
                ins[v].insert(u);
            }
        }
        ins
    }

    pub fn out_rows(&self) -> &[u16] {
        &self.out[..self.n()]
    }

    /// Union of `Out_G(p)` over `p` in `procs`.
    pub fn out_set(&self, procs: ProcSet) -> Result<ProcSet> {
        if let Some(bad) = procs.iter().find(|&p| p >= self.n()) {
            return Err(Error::ProcessOutOfRange {
                process: bad,
                n: self.n(),
            });
        }
        Ok(self.reach(procs))
    }

    /// Unchecked `out_set` for hot loops; `procs` must lie in `[0, n)`.
    #[inline]
    pub(crate) fn reach(&self, procs: ProcSet) -> ProcSet {
        let mut acc = 0u16;
        let mut bits = procs.0;
        while bits != 0 {
            let p = bits.trailing_zeros() as usize;
            acc |= self.out[p];
            bits &= bits - 1;
        }
        ProcSet(acc)
    }

    pub fn dominates(&self, procs: ProcSet) -> bool {
        self.reach(procs) == ProcSet::full(self.n())
    }

    /// Sorted edge list, self-loops included.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut e = Vec::new();
        for u in 0..self.n() {
            for v in ProcSet(self.out[u]).iter() {
                e.push((u, v));
            }
        }
        e
    }

    /// Sorted edge list without self-loops (the file representation).
    pub fn edges_without_loops(&self) -> Vec<(usize, usize)> {
        self.edges().into_iter().filter(|(u, v)| u != v).collect()
    }

    pub fn edge_count(&self) -> usize {
        self.out_rows().iter().map(|r| r.count_ones() as usize).sum()
    }

    pub fn with_edge(&self, u: usize, v: usize) -> Self {
        let mut g = *self;
        g.out[u] |= 1 << v;
        g
    }

    /// Edge-set inclusion: every edge of `self` is an edge of `other`.
    pub fn is_subgraph_of(&self, other: &Digraph) -> bool {
        self.n == other.n && (0..self.n()).all(|p| self.out[p] & !other.out[p] == 0)
    }

    /// Edge-wise union.
    pub fn union(&self, other: &Digraph) -> Result<Self> {
        same_n(self.n(), other.n())?;
        let mut g = *self;
        for p in 0..self.n() {
            g.out[p] |= other.out[p];
        }
        Ok(g)
    }

    /// First edge of `self` missing from `other`, if any.
    pub fn first_edge_outside(&self, other: &Digraph) -> Option<(usize, usize)> {
        (0..self.n()).find_map(|u| {
            let extra = self.out[u] & !other.out[u];
            (extra != 0).then(|| (u, extra.trailing_zeros() as usize))
        })
    }

    /// Image under the relabelling `p -> perm[p]`.
    pub fn permute(&self, perm: &[usize]) -> Self {
        let n = self.n();
        let mut g = Digraph::identity_unchecked(n);
        for u in 0..n {
            for v in ProcSet(self.out[u]).iter() {
                g.out[perm[u]] |= 1 << perm[v];
            }
        }
        g
    }

    /// Key realizing the canonical order: lexicographic on sorted edge lists.
    pub fn sort_key(&self) -> Vec<(u8, u8)> {
        self.edges()
            .into_iter()
            .map(|(u, v)| (u as u8, v as u8))
            .collect()
    }

    /// Unchecked path product; both graphs must share `n`.
    #[inline]
    pub(crate) fn compose(&self, other: &Digraph) -> Digraph {
        let mut g = Digraph {
            n: self.n,
            out: [0; MAX_PROCESSES],
        };
        for u in 0..self.n() {
            g.out[u] = other.reach(ProcSet(self.out[u])).0;
        }
        g
    }

    /// Graph path product `self ⊗ other`: `(u, v)` is an edge iff some `w`
    /// has `(u, w)` in `self` and `(w, v)` in `other`.
    pub fn path_product(&self, other: &Digraph) -> Result<Digraph> {
        same_n(self.n(), other.n())?;
        Ok(self.compose(other))
    }

    /// All supergraphs of `self` (edge sets containing its edges).
    pub fn supergraphs(&self) -> SupergraphIter {
        SupergraphIter::new(self)
    }

    /// Number of supergraphs, `2^(missing edges)`.
    pub fn supergraph_count(&self) -> u128 {
        let missing = self.n() * self.n() - self.edge_count();
        1u128 << missing
    }
}

impl fmt::Debug for Digraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Digraph(n={}, {:?})", self.n, self.edges_without_loops())
    }
}

impl PartialOrd for Digraph {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Digraph {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.n
            .cmp(&other.n)
            .then_with(|| self.sort_key().cmp(&other.sort_key()))
    }
}

/// Enumerates supergraphs by counting over the missing-edge positions.
pub struct SupergraphIter {
    base: Digraph,
    missing: Vec<(usize, usize)>,
    next: u64,
    end: u64,
}

impl SupergraphIter {
    fn new(base: &Digraph) -> Self {
        let n = base.n();
        let mut missing = Vec::new();
        for u in 0..n {
            for v in 0..n {
                if !base.has_edge(u, v) {
                    missing.push((u, v));
                }
            }
        }
        assert!(
            missing.len() < 64,
            "supergraph enumeration limited to fewer than 64 missing edges"
        );
        SupergraphIter {
            base: *base,
            end: 1u64 << missing.len(),
            missing,
            next: 0,
        }
    }
}

impl Iterator for SupergraphIter {
    type Item = Digraph;

    fn next(&mut self) -> Option<Digraph> {
        if self.next >= self.end {
            return None;
        }
        let mask = self.next;
        self.next += 1;
        let mut g = self.base;
        let mut bits = mask;
        while bits != 0 {
            let i = bits.trailing_zeros() as usize;
            let (u, v) = self.missing[i];
            g.out[u] |= 1 << v;
            bits &= bits - 1;
        }
        Some(g)
    }
}

/// Sorts by the canonical order and removes duplicates.
pub fn canonical_sort(graphs: &mut Vec<Digraph>) {
    graphs.sort_by_cached_key(|g| g.sort_key());
    graphs.dedup();
}

/// `E(H) ⊇ E(G)`: `h` lies in the upward closure of `g`.
pub fn upward_contains(g: &Digraph, h: &Digraph) -> Result<bool> {
    same_n(g.n(), h.n())?;
    Ok(g.is_subgraph_of(h))
}

/// All permutations of `[0, n)` in lexicographic order.
pub(crate) fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(cur: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if cur.len() == used.len() {
            out.push(cur.clone());
            return;
        }
        for p in 0..used.len() {
            if !used[p] {
                used[p] = true;
                cur.push(p);
                rec(cur, used, out);
                cur.pop();
                used[p] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::with_capacity(n), &mut vec![false; n], &mut out);
    out
}

/// All vertex-permuted images of `gens`, deduplicated, in canonical order.
pub fn symmetric_closure(gens: &[Digraph]) -> Result<Vec<Digraph>> {
    let Some(first) = gens.first() else {
        return Ok(Vec::new());
    };
    let n = first.n();
    for g in gens {
        same_n(n, g.n())?;
    }
    if n > SYMMETRY_LIMIT {
        return Err(Error::SymmetryGuard {
            n,
            limit: SYMMETRY_LIMIT,
        });
    }
    let perms = permutations(n);
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for g in gens {
        for perm in &perms {
            let img = g.permute(perm);
            if seen.insert(img) {
                out.push(img);
            }
        }
    }
    canonical_sort(&mut out);
    Ok(out)
}

/// A closed-above model: the upward closure of its generators, optionally
/// closed under process permutation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Model {
    n: usize,
    generators: Vec<Digraph>,
    symmetric: bool,
}

impl Model {
    /// Builds a model. Duplicate generators are dropped; for symmetric
    /// models generators in the same permutation orbit are merged, keeping
    /// the first occurrence.
    pub fn new(generators: Vec<Digraph>, symmetric: bool) -> Result<Self> {
        let Some(first) = generators.first() else {
            return Err(Error::EmptyModel);
        };
        let n = first.n();
        for g in &generators {
            same_n(n, g.n())?;
        }
        let mut kept: Vec<Digraph> = Vec::new();
        if symmetric {
            if n > SYMMETRY_LIMIT {
                return Err(Error::SymmetryGuard {
                    n,
                    limit: SYMMETRY_LIMIT,
                });
            }
            let perms = permutations(n);
            let mut covered: HashSet<Digraph> = HashSet::new();
            for g in generators {
                if covered.contains(&g) {
                    continue;
                }
                for perm in &perms {
                    covered.insert(g.permute(perm));
                }
                kept.push(g);
            }
        } else {
            let mut seen = HashSet::new();
            for g in generators {
                if seen.insert(g) {
                    kept.push(g);
                }
            }
        }
        Ok(Model {
            n,
            generators: kept,
            symmetric,
        })
    }

    pub fn simple(g: Digraph) -> Self {
        Model {
            n: g.n(),
            generators: vec![g],
            symmetric: false,
        }
    }

    /// Symmetric model of all unions of `s` stars with distinct centres.
    pub fn star_family(n: usize, s: usize) -> Result<Self> {
        if s == 0 || s > n {
            return Err(Error::Precondition(format!(
                "star count {s} outside [1, {n}]"
            )));
        }
        let centers: ProcSet = (0..s).collect();
        Model::new(vec![Digraph::star(n, centers)?], true)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Generators as supplied (orbit representatives when symmetric).
    pub fn generators(&self) -> &[Digraph] {
        &self.generators
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    /// The generator set actually in force: the symmetric closure when the
    /// model is flagged symmetric, the supplied list otherwise.
    pub fn effective_generators(&self) -> Vec<Digraph> {
        if self.symmetric {
            symmetric_closure(&self.generators).expect("guard checked at construction")
        } else {
            self.generators.clone()
        }
    }

    /// A single effective generator: the simple closed-above case.
    pub fn single_generator(&self) -> Option<Digraph> {
        let eff = self.effective_generators();
        (eff.len() == 1).then(|| eff[0])
    }

    /// Single-round membership: `h` contains some effective generator.
    pub fn contains(&self, h: &Digraph) -> Result<bool> {
        same_n(self.n, h.n())?;
        if self.symmetric {
            let perms = permutations(self.n);
            Ok(self
                .generators
                .iter()
                .any(|g| perms.iter().any(|p| g.permute(p).is_subgraph_of(h))))
        } else {
            Ok(self.generators.iter().any(|g| g.is_subgraph_of(h)))
        }
    }
}

pub fn model_contains(model: &Model, h: &Digraph) -> Result<bool> {
    model.contains(h)
}

/// All r-fold products of effective generators, deduplicated and in
/// canonical order. Each computed product is charged to `limit`.
pub fn product_set(model: &Model, rounds: usize, limit: u64, parallel: bool) -> Result<Vec<Digraph>> {
    if rounds == 0 {
        return Err(Error::Precondition("round count must be at least 1".into()));
    }
    let gens = model.effective_generators();
    product_set_of(&gens, rounds, limit, parallel)
}

/// r-fold products of an explicit generator list.
pub fn product_set_of(gens: &[Digraph], rounds: usize, limit: u64, parallel: bool) -> Result<Vec<Digraph>> {
    let mut meter = Meter::new("product", limit);
    let mut current: Vec<Digraph> = gens.to_vec();
    canonical_sort(&mut current);
    meter.charge(current.len() as u64)?;
    for _ in 1..rounds {
        meter.charge((current.len() * gens.len()) as u64)?;
        let mut next: Vec<Digraph> = if parallel {
            current
                .par_iter()
                .flat_map_iter(|a| gens.iter().map(move |g| a.compose(g)))
                .collect()
        } else {
            current
                .iter()
                .flat_map(|a| gens.iter().map(move |g| a.compose(g)))
                .collect()
        };
        let mut seen = HashSet::with_capacity(next.len());
        next.retain(|g| seen.insert(*g));
        canonical_sort(&mut next);
        current = next;
    }
    Ok(current)
}

/// Why a target graph is not a product of supergraphs of the factors.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Refutation {
    /// The product of the bare factors already has an edge the target lacks;
    /// products are monotone, so every choice of supergraphs does too.
    BaseProductEscapes { edge: (usize, usize) },
    /// Exhaustive search over every admissible edge addition found no
    /// factor choice whose product equals the target.
    Exhausted {
        candidate_edges: usize,
        nodes: u64,
    },
}

/// Outcome of a product reachability search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Reachability {
    /// Factors `G'_i ⊇ G_i` whose product is the target.
    Witness(Vec<Digraph>),
    Refuted(Refutation),
}

/// Decides whether `target ∈ ↑G1 ⊗ ... ⊗ ↑Gr`.
///
/// Only edges that, added alone to their factor, keep the product inside
/// the target are ever considered; a branch is cut as soon as its product
/// leaves the target or the most generous completion cannot cover it.
pub fn product_reachability_search(
    factors: &[Digraph],
    target: &Digraph,
    node_limit: u64,
    parallel: bool,
) -> Result<Reachability> {
    let Some(first) = factors.first() else {
        return Err(Error::Precondition("at least one factor required".into()));
    };
    for f in factors {
        same_n(first.n(), f.n())?;
    }
    same_n(first.n(), target.n())?;
    let n = target.n();

    let product = |fs: &[Digraph]| -> Digraph {
        fs[1..].iter().fold(fs[0], |acc, g| acc.compose(g))
    };
    let base = product(factors);
    if let Some(edge) = base.first_edge_outside(target) {
        return Ok(Reachability::Refuted(Refutation::BaseProductEscapes { edge }));
    }
    if base == *target {
        return Ok(Reachability::Witness(factors.to_vec()));
    }

    let mut candidates: Vec<(usize, usize, usize)> = Vec::new();
    for (i, f) in factors.iter().enumerate() {
        for u in 0..n {
            for v in 0..n {
                if f.has_edge(u, v) {
                    continue;
                }
                let mut trial = factors.to_vec();
                trial[i] = f.with_edge(u, v);
                if product(&trial).is_subgraph_of(target) {
                    candidates.push((i, u, v));
                }
            }
        }
    }

    let search = Search {
        candidates: &candidates,
        target,
        nodes: AtomicU64::new(0),
        limit: node_limit,
    };

    // Split on the first few include/exclude decisions; branch order matches
    // the sequential exclude-first traversal, so the first witness agrees.
    let split = if parallel { candidates.len().min(6) } else { 0 };
    let mut prefixes: Vec<Vec<Digraph>> = vec![factors.to_vec()];
    for &(i, u, v) in candidates.iter().take(split) {
        let mut next = Vec::with_capacity(prefixes.len() * 2);
        for p in prefixes {
            let mut with = p.clone();
            with[i] = with[i].with_edge(u, v);
            next.push(p);
            next.push(with);
        }
        prefixes = next;
    }
    // Exclude-first ordering across the split is a binary counter with the
    // first decision as the most significant bit.
    let order: Vec<usize> = (0..prefixes.len())
        .map(|idx| {
            let mut r = 0;
            for b in 0..split {
                if idx & (1 << b) != 0 {
                    r |= 1 << (split - 1 - b);
                }
            }
            r
        })
        .collect();
    let mut ordered: Vec<Option<Vec<Digraph>>> = vec![None; prefixes.len()];
    for (idx, p) in prefixes.into_iter().enumerate() {
        ordered[order[idx]] = Some(p);
    }
    let ordered: Vec<Vec<Digraph>> = ordered.into_iter().map(|p| p.unwrap()).collect();

    let results: Vec<Result<Option<Vec<Digraph>>>> = if parallel {
        ordered
            .into_par_iter()
            .map(|mut fs| search.dfs(&mut fs, split))
            .collect()
    } else {
        ordered
            .into_iter()
            .map(|mut fs| search.dfs(&mut fs, split))
            .collect()
    };
    for r in results {
        if let Some(w) = r? {
            return Ok(Reachability::Witness(w));
        }
    }
    Ok(Reachability::Refuted(Refutation::Exhausted {
        candidate_edges: candidates.len(),
        nodes: search.nodes.load(AtomicOrdering::Relaxed),
    }))
}

struct Search<'a> {
    candidates: &'a [(usize, usize, usize)],
    target: &'a Digraph,
    nodes: AtomicU64,
    limit: u64,
}

impl Search<'_> {
    fn product(fs: &[Digraph]) -> Digraph {
        fs[1..].iter().fold(fs[0], |acc, g| acc.compose(g))
    }

    fn dfs(&self, fs: &mut Vec<Digraph>, idx: usize) -> Result<Option<Vec<Digraph>>> {
        if self.nodes.fetch_add(1, AtomicOrdering::Relaxed) >= self.limit {
            return Err(Error::BudgetExceeded {
                what: "product search node",
                limit: self.limit,
            });
        }
        let prod = Self::product(fs);
        if !prod.is_subgraph_of(self.target) {
            return Ok(None);
        }
        if prod == *self.target {
            return Ok(Some(fs.clone()));
        }
        if idx == self.candidates.len() {
            return Ok(None);
        }
        let mut generous = fs.clone();
        for &(i, u, v) in &self.candidates[idx..] {
            generous[i] = generous[i].with_edge(u, v);
        }
        if !self.target.is_subgraph_of(&Self::product(&generous)) {
            return Ok(None);
        }
        if let Some(w) = self.dfs(fs, idx + 1)? {
            return Ok(Some(w));
        }
        let (i, u, v) = self.candidates[idx];
        let saved = fs[i];
        fs[i] = saved.with_edge(u, v);
        let found = self.dfs(fs, idx + 1);
        fs[i] = saved;
        found
    }
}

/// Graph file representation: self-loops omitted and implied.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphSpec {
    pub n: usize,
    pub edges: Vec<[usize; 2]>,
}

impl From<&Digraph> for GraphSpec {
    fn from(g: &Digraph) -> Self {
        GraphSpec {
            n: g.n(),
            edges: g.edges_without_loops().into_iter().map(|(u, v)| [u, v]).collect(),
        }
    }
}

impl TryFrom<&GraphSpec> for Digraph {
    type Error = Error;

    fn try_from(spec: &GraphSpec) -> Result<Self> {
        let edges: Vec<(usize, usize)> = spec.edges.iter().map(|e| (e[0], e[1])).collect();
        Digraph::new(spec.n, &edges)
    }
}

/// Model file representation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub n: usize,
    pub generators: Vec<GraphSpec>,
    #[serde(default)]
    pub symmetric: bool,
}

impl From<&Model> for ModelSpec {
    fn from(m: &Model) -> Self {
        ModelSpec {
            n: m.n(),
            generators: m.generators().iter().map(GraphSpec::from).collect(),
            symmetric: m.is_symmetric(),
        }
    }
}

impl TryFrom<&ModelSpec> for Model {
    type Error = Error;

    fn try_from(spec: &ModelSpec) -> Result<Self> {
        let mut gens = Vec::with_capacity(spec.generators.len());
        for g in &spec.generators {
            if g.n != spec.n {
                return Err(Error::MismatchedN {
                    left: spec.n,
                    right: g.n,
                });
            }
            gens.push(Digraph::try_from(g)?);
        }
        Model::new(gens, spec.symmetric)
    }
}

pub fn parse_graph(json: &str) -> Result<Digraph> {
    let spec: GraphSpec = serde_json::from_str(json).map_err(|e| Error::Parse(e.to_string()))?;
    Digraph::try_from(&spec)
}

pub fn parse_model(json: &str) -> Result<Model> {
    let spec: ModelSpec = serde_json::from_str(json).map_err(|e| Error::Parse(e.to_string()))?;
    Model::try_from(&spec)
}
