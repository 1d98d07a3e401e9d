//! Colored simplicial complexes built from communication graphs: uninterpreted
//! and interpreted simplices, pseudospheres, nerves, rational homology and
//! shellability.
//!
//! A [`Complex`] is stored by its facets; every face of a facet belongs to it
//! implicitly.

mod homology;
mod shelling;
mod transfer;

use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::budget::Meter;
use crate::error::{Error, Result};
use crate::graph::{Digraph, Model, ProcSet};
use crate::solvability::closure_graphs;

pub use homology::{certify_connectivity, euler_characteristic, face_counts, reduced_homology_ranks, Connectivity};
pub use shelling::{check_shelling_order, find_shelling_order};
pub use transfer::{verify_connectivity_transfer, HypothesisStatus, TransferReport};

/// The payload of a vertex.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(untagged)]
pub enum View {
    /// An input value, or a cover index in a nerve.
    Value(usize),
    /// The processes heard from.
    Procs(ProcSet),
    /// The `(process, value)` pairs heard.
    Flat(Vec<(usize, usize)>),
}

/// Serialized as `[color, view]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "(usize, View)", into = "(usize, View)")]
pub struct Vertex {
    pub color: usize,
    pub view: View,
}

impl From<(usize, View)> for Vertex {
    fn from((color, view): (usize, View)) -> Self {
        Vertex { color, view }
    }
}

impl From<Vertex> for (usize, View) {
    fn from(v: Vertex) -> Self {
        (v.color, v.view)
    }
}

impl Vertex {
    pub fn new(color: usize, view: View) -> Self {
        Vertex { color, view }
    }
}

/// Vertices with pairwise distinct colors, sorted by color.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vertex>", into = "Vec<Vertex>")]
pub struct Simplex(Vec<Vertex>);

impl TryFrom<Vec<Vertex>> for Simplex {
    type Error = Error;

    fn try_from(v: Vec<Vertex>) -> Result<Self> {
        Simplex::new(v)
    }
}

impl From<Simplex> for Vec<Vertex> {
    fn from(s: Simplex) -> Self {
        s.0
    }
}

impl Simplex {
    pub fn new(mut vertices: Vec<Vertex>) -> Result<Self> {
        vertices.sort();
        vertices.dedup();
        if vertices.windows(2).any(|w| w[0].color == w[1].color) {
            return Err(Error::InvalidComplex("two vertices share a color".into()));
        }
        Ok(Simplex(vertices))
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `len - 1`; the empty simplex has dimension -1.
    pub fn dim(&self) -> i64 {
        self.0.len() as i64 - 1
    }

    pub fn colors(&self) -> Vec<usize> {
        self.0.iter().map(|v| v.color).collect()
    }

    pub fn view_of(&self, color: usize) -> Option<&View> {
        self.0.iter().find(|v| v.color == color).map(|v| &v.view)
    }

    pub fn is_face_of(&self, other: &Simplex) -> bool {
        self.0.iter().all(|v| other.0.binary_search(v).is_ok())
    }

    pub fn intersection(&self, other: &Simplex) -> Simplex {
        Simplex(self.0.iter().filter(|v| other.0.binary_search(v).is_ok()).cloned().collect())
    }
}

/// A complex given by its facets, kept inclusion-maximal and sorted.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "RawComplex")]
pub struct Complex {
    facets: Vec<Simplex>,
}

#[derive(Deserialize)]
struct RawComplex {
    facets: Vec<Simplex>,
}

impl From<RawComplex> for Complex {
    fn from(raw: RawComplex) -> Self {
        Complex::new(raw.facets)
    }
}

impl Complex {
    /// Builds a complex from generating simplices; non-maximal ones and the
    /// empty simplex are dropped.
    pub fn new(simplices: Vec<Simplex>) -> Self {
        let mut s: Vec<Simplex> = simplices.into_iter().filter(|s| !s.is_empty()).collect();
        s.sort();
        s.dedup();
        // larger simplices first so each candidate is only checked against
        // possible supersets
        let mut by_size: Vec<Simplex> = s;
        by_size.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
        let mut kept: Vec<Simplex> = Vec::new();
        for c in by_size {
            if !kept.iter().any(|k| k.len() > c.len() && c.is_face_of(k)) {
                kept.push(c);
            }
        }
        kept.sort();
        Complex { facets: kept }
    }

    pub fn empty() -> Self {
        Complex::default()
    }

    pub fn facets(&self) -> &[Simplex] {
        &self.facets
    }

    pub fn is_empty(&self) -> bool {
        self.facets.is_empty()
    }

    pub fn dim(&self) -> i64 {
        self.facets.iter().map(Simplex::dim).max().unwrap_or(-1)
    }

    pub fn is_pure(&self) -> bool {
        self.facets.windows(2).all(|w| w[0].len() == w[1].len())
    }

    pub fn contains(&self, s: &Simplex) -> bool {
        s.is_empty() && !self.is_empty() || self.facets.iter().any(|f| s.is_face_of(f))
    }

    pub fn vertices(&self) -> BTreeSet<Vertex> {
        self.facets.iter().flat_map(|f| f.0.iter().cloned()).collect()
    }

    pub fn union(&self, other: &Complex) -> Complex {
        Complex::new(self.facets.iter().chain(&other.facets).cloned().collect())
    }

    /// Faces common to both complexes.
    pub fn intersection(&self, other: &Complex) -> Complex {
        let mut parts = Vec::new();
        for a in &self.facets {
            for b in &other.facets {
                parts.push(a.intersection(b));
            }
        }
        Complex::new(parts)
    }

    /// Canonical JSON export: `{"facets": [[[color, view], ...], ...]}`.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("complexes serialize")
    }
}

/// Per-color families of views; the induced complex takes one view from
/// every non-empty family.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "RawSpec")]
pub struct PseudosphereSpec {
    n: usize,
    families: Vec<Vec<View>>,
}

#[derive(Deserialize)]
struct RawSpec {
    families: Vec<Vec<View>>,
}

impl From<RawSpec> for PseudosphereSpec {
    fn from(raw: RawSpec) -> Self {
        PseudosphereSpec::new(raw.families)
    }
}

impl PseudosphereSpec {
    pub fn new(families: Vec<Vec<View>>) -> Self {
        let families: Vec<Vec<View>> = families
            .into_iter()
            .map(|mut f| {
                f.sort();
                f.dedup();
                f
            })
            .collect();
        PseudosphereSpec {
            n: families.len(),
            families,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn families(&self) -> &[Vec<View>] {
        &self.families
    }

    /// Colors with a non-empty family.
    pub fn live_colors(&self) -> usize {
        self.families.iter().filter(|f| !f.is_empty()).count()
    }

    /// Number of facets of the induced complex.
    pub fn facet_count(&self) -> u128 {
        if self.live_colors() == 0 {
            return 0;
        }
        self.families
            .iter()
            .filter(|f| !f.is_empty())
            .map(|f| f.len() as u128)
            .product()
    }
}

/// `σ_G`: each process with the set of processes it hears from.
pub fn uninterpreted_simplex(g: &Digraph) -> Simplex {
    Simplex(
        (0..g.n())
            .map(|p| Vertex::new(p, View::Procs(g.in_set(p))))
            .collect(),
    )
}

/// Materializes the pseudosphere of `spec`.
pub fn pseudosphere(spec: &PseudosphereSpec, limit: u64) -> Result<Complex> {
    let count = spec.facet_count();
    if count > limit as u128 {
        return Err(Error::BudgetExceeded {
            what: "simplex",
            limit,
        });
    }
    let live: Vec<(usize, &Vec<View>)> = spec
        .families
        .iter()
        .enumerate()
        .filter(|(_, f)| !f.is_empty())
        .collect();
    if live.is_empty() {
        return Ok(Complex::empty());
    }
    let mut facets = Vec::with_capacity(count as usize);
    let mut idx = vec![0usize; live.len()];
    loop {
        facets.push(Simplex(
            live.iter()
                .zip(&idx)
                .map(|(&(c, fam), &i)| Vertex::new(c, fam[i].clone()))
                .collect(),
        ));
        let mut pos = live.len();
        loop {
            if pos == 0 {
                // facets of a pseudosphere are pairwise incomparable
                facets.sort();
                return Ok(Complex { facets });
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < live[pos].1.len() {
                break;
            }
            idx[pos] = 0;
        }
    }
}

/// Componentwise intersection of the view families.
pub fn intersect_pseudospheres(a: &PseudosphereSpec, b: &PseudosphereSpec) -> Result<PseudosphereSpec> {
    if a.n != b.n {
        return Err(Error::MismatchedN { left: a.n, right: b.n });
    }
    Ok(PseudosphereSpec::new(
        a.families
            .iter()
            .zip(&b.families)
            .map(|(x, y)| x.iter().filter(|v| y.binary_search(v).is_ok()).cloned().collect())
            .collect(),
    ))
}

/// The closure of one graph as a pseudosphere: process `p` may hear any
/// superset of its in-set.
pub fn closed_above_spec(g: &Digraph) -> PseudosphereSpec {
    let n = g.n();
    let full = ProcSet::full(n);
    PseudosphereSpec::new(
        (0..n)
            .map(|p| {
                let base = g.in_set(p);
                let free = full.difference(base).to_vec();
                ProcSet::all_subsets(free.len())
                    .map(|sel| {
                        let extra: ProcSet = sel.iter().map(|i| free[i]).collect();
                        View::Procs(base.union(extra))
                    })
                    .collect()
            })
            .collect(),
    )
}

/// One pseudosphere per effective generator; their union is the
/// uninterpreted complex of the model.
pub fn uninterpreted_cover(model: &Model) -> Vec<PseudosphereSpec> {
    model
        .effective_generators()
        .iter()
        .map(closed_above_spec)
        .collect()
}

/// The uninterpreted complex: one facet `σ_H` per graph `H` of the model.
pub fn uninterpreted_complex(model: &Model, limit: u64) -> Result<Complex> {
    let graphs = closure_graphs(model, limit)?;
    // distinct graphs have distinct in-set profiles, hence distinct and
    // incomparable facets
    let mut facets: Vec<Simplex> = graphs.iter().map(uninterpreted_simplex).collect();
    facets.sort();
    Ok(Complex { facets })
}

/// Every color has the values `0..m`.
pub fn input_pseudosphere(n: usize, m: usize, limit: u64) -> Result<Complex> {
    if m == 0 {
        return Err(Error::Precondition("value count must be at least 1".into()));
    }
    pseudosphere(
        &PseudosphereSpec::new(vec![(0..m).map(View::Value).collect(); n]),
        limit,
    )
}

/// Interpretation of every facet of `a` (views are process sets) on every
/// facet of `inputs` (views are values).
pub fn interpret(a: &Complex, inputs: &Complex, limit: u64) -> Result<Complex> {
    if !inputs.is_pure() {
        return Err(Error::NotPure);
    }
    let mut meter = Meter::new("simplex", limit);
    meter.charge((a.facets.len() as u64).saturating_mul(inputs.facets.len() as u64))?;
    let mut out = HashSet::new();
    for tau in &inputs.facets {
        let values: Vec<Option<usize>> = {
            let mut v = vec![None; crate::graph::MAX_PROCESSES];
            for x in &tau.0 {
                match x.view {
                    View::Value(val) if x.color < v.len() => v[x.color] = Some(val),
                    _ => return Err(Error::InvalidComplex("input views must be values".into())),
                }
            }
            v
        };
        for sigma in &a.facets {
            out.insert(interpret_simplex(sigma, &values)?);
        }
    }
    Ok(Complex::new(out.into_iter().collect()))
}

fn interpret_simplex(sigma: &Simplex, values: &[Option<usize>]) -> Result<Simplex> {
    let mut verts = Vec::with_capacity(sigma.len());
    for v in &sigma.0 {
        let View::Procs(heard) = v.view else {
            return Err(Error::InvalidComplex("uninterpreted views must be process sets".into()));
        };
        let flat = heard
            .iter()
            .map(|q| {
                values[q].map(|x| (q, x)).ok_or_else(|| {
                    Error::InvalidComplex(format!("input simplex has no color {q}"))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        verts.push(Vertex::new(v.color, View::Flat(flat)));
    }
    Ok(Simplex(verts))
}

/// The interpretation of `a` on a single input facet.
pub fn interpret_on(a: &Complex, input: &Simplex, limit: u64) -> Result<Complex> {
    interpret(a, &Complex::new(vec![input.clone()]), limit)
}

/// Nerve of a cover: one vertex per element, and a simplex for every index
/// set whose members share a vertex. Vertices have color = view = index.
pub fn nerve(cover: &[Complex]) -> Complex {
    let mut groups: std::collections::BTreeMap<Vertex, Vec<usize>> = Default::default();
    for (i, c) in cover.iter().enumerate() {
        for v in c.vertices() {
            groups.entry(v).or_default().push(i);
        }
    }
    Complex::new(
        groups
            .into_values()
            .map(|ids| Simplex(ids.into_iter().map(|i| Vertex::new(i, View::Value(i))).collect()))
            .collect(),
    )
}
