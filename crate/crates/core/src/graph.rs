//! Uniform access to finite graphs and to countable graphs given by oracles.
//!
//! Every graph is simple and undirected, with vertices named by natural
//! numbers. A [`Graph`] exposes four oracles: vertex membership, ascending
//! neighbour enumeration (possibly infinite), adjacency, and connectivity in
//! `G - F` for a finite vertex set `F`. The last one cannot be derived from the
//! others on an infinite graph, so each infinite family implements it exactly.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A vertex name. Vertices are totally ordered by their numeric id, and that
/// order is used for every tie-break in the crate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexId(pub u64);

impl VertexId {
    pub const fn new(id: u64) -> Self {
        VertexId(id)
    }

    pub const fn get(self) -> u64 {
        self.0
    }
}

impl From<u64> for VertexId {
    fn from(id: u64) -> Self {
        VertexId(id)
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Ascending, duplicate-free enumeration of vertices. May be infinite.
pub type VertexIter<'a> = Box<dyn Iterator<Item = VertexId> + 'a>;

/// A finite set of vertices that can be tested and enumerated.
pub trait VertexSet {
    fn contains_vertex(&self, v: VertexId) -> bool;
    fn members(&self) -> VertexIter<'_>;
    fn member_count(&self) -> usize;
}

impl VertexSet for BTreeSet<VertexId> {
    fn contains_vertex(&self, v: VertexId) -> bool {
        self.contains(&v)
    }

    fn members(&self) -> VertexIter<'_> {
        Box::new(self.iter().copied())
    }

    fn member_count(&self) -> usize {
        self.len()
    }
}

/// The finite obstacle `F` handed to connectivity oracles: a vertex set,
/// optionally with one of its members put back.
#[derive(Clone, Copy)]
pub struct Avoid<'a> {
    set: Option<&'a dyn VertexSet>,
    except: Option<VertexId>,
}

impl<'a> Avoid<'a> {
    pub fn nothing() -> Self {
        Avoid { set: None, except: None }
    }

    pub fn set(set: &'a dyn VertexSet) -> Self {
        Avoid { set: Some(set), except: None }
    }

    /// `set` without `v`.
    pub fn all_but(set: &'a dyn VertexSet, v: VertexId) -> Self {
        Avoid { set: Some(set), except: Some(v) }
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.except != Some(v) && self.set.is_some_and(|s| s.contains_vertex(v))
    }

    pub fn iter(&self) -> impl Iterator<Item = VertexId> + 'a {
        let except = self.except;
        self.set
            .into_iter()
            .flat_map(|s| s.members())
            .filter(move |&v| Some(v) != except)
    }

    pub fn len(&self) -> usize {
        let base = self.set.map_or(0, |s| s.member_count());
        match (self.set, self.except) {
            (Some(s), Some(x)) if s.contains_vertex(x) => base - 1,
            _ => base,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn to_set(&self) -> BTreeSet<VertexId> {
        self.iter().collect()
    }
}

impl<'a> From<&'a BTreeSet<VertexId>> for Avoid<'a> {
    fn from(set: &'a BTreeSet<VertexId>) -> Self {
        Avoid::set(set)
    }
}

/// Oracle access to a simple undirected graph on natural-number vertices.
pub trait Graph {
    fn has_vertex(&self, v: VertexId) -> bool;

    /// All vertices in ascending order. Infinite for infinite graphs.
    fn vertices(&self) -> VertexIter<'_>;

    /// `None` for infinite graphs.
    fn vertex_count(&self) -> Option<usize>;

    /// Ascending enumeration of the neighbourhood of `v`.
    fn neighbors(&self, v: VertexId) -> Result<VertexIter<'_>>;

    fn is_adjacent(&self, u: VertexId, v: VertexId) -> bool;

    /// Exact decision whether `u` and `v` lie in the same component of `G - F`.
    /// Implementations may assume both are vertices outside `F`; callers go
    /// through [`same_component_avoiding`] which checks that.
    fn connected_avoiding(&self, u: VertexId, v: VertexId, avoid: Avoid<'_>) -> bool;

    /// The full component of `v` in `G - F` when it is finite and cheap to list.
    fn component_members(&self, _v: VertexId, _avoid: Avoid<'_>) -> Option<BTreeSet<VertexId>> {
        None
    }

    /// The smallest vertex of the component of `v` in `G - F`, for graphs
    /// that can name it without scanning ids.
    fn component_min(&self, _v: VertexId, _avoid: Avoid<'_>) -> Option<VertexId> {
        None
    }

    fn is_finite(&self) -> bool {
        self.vertex_count().is_some()
    }
}

impl<G: Graph + ?Sized> Graph for &G {
    fn has_vertex(&self, v: VertexId) -> bool {
        (**self).has_vertex(v)
    }
    fn vertices(&self) -> VertexIter<'_> {
        (**self).vertices()
    }
    fn vertex_count(&self) -> Option<usize> {
        (**self).vertex_count()
    }
    fn neighbors(&self, v: VertexId) -> Result<VertexIter<'_>> {
        (**self).neighbors(v)
    }
    fn is_adjacent(&self, u: VertexId, v: VertexId) -> bool {
        (**self).is_adjacent(u, v)
    }
    fn connected_avoiding(&self, u: VertexId, v: VertexId, avoid: Avoid<'_>) -> bool {
        (**self).connected_avoiding(u, v, avoid)
    }
    fn component_members(&self, v: VertexId, avoid: Avoid<'_>) -> Option<BTreeSet<VertexId>> {
        (**self).component_members(v, avoid)
    }
    fn component_min(&self, v: VertexId, avoid: Avoid<'_>) -> Option<VertexId> {
        (**self).component_min(v, avoid)
    }
}

impl<G: Graph + ?Sized> Graph for Box<G> {
    fn has_vertex(&self, v: VertexId) -> bool {
        (**self).has_vertex(v)
    }
    fn vertices(&self) -> VertexIter<'_> {
        (**self).vertices()
    }
    fn vertex_count(&self) -> Option<usize> {
        (**self).vertex_count()
    }
    fn neighbors(&self, v: VertexId) -> Result<VertexIter<'_>> {
        (**self).neighbors(v)
    }
    fn is_adjacent(&self, u: VertexId, v: VertexId) -> bool {
        (**self).is_adjacent(u, v)
    }
    fn connected_avoiding(&self, u: VertexId, v: VertexId, avoid: Avoid<'_>) -> bool {
        (**self).connected_avoiding(u, v, avoid)
    }
    fn component_members(&self, v: VertexId, avoid: Avoid<'_>) -> Option<BTreeSet<VertexId>> {
        (**self).component_members(v, avoid)
    }
    fn component_min(&self, v: VertexId, avoid: Avoid<'_>) -> Option<VertexId> {
        (**self).component_min(v, avoid)
    }
}

fn check_outside<G: Graph + ?Sized>(g: &G, v: VertexId, avoid: Avoid<'_>) -> Result<()> {
    if !g.has_vertex(v) {
        return Err(Error::UnknownVertex(v));
    }
    if avoid.contains(v) {
        return Err(Error::AvoidedVertex(v));
    }
    Ok(())
}

/// Whether `u` and `v` lie in the same component of `G - F`.
pub fn same_component_avoiding<G: Graph + ?Sized>(
    g: &G,
    u: VertexId,
    v: VertexId,
    avoid: Avoid<'_>,
) -> Result<bool> {
    check_outside(g, u, avoid)?;
    check_outside(g, v, avoid)?;
    Ok(u == v || g.connected_avoiding(u, v, avoid))
}

/// Canonical name of the component of `v` in `G - F`: its smallest vertex.
///
/// Unless the graph names it directly, scans vertex ids upwards and asks the
/// connectivity oracle; `v` itself bounds the scan.
pub fn component_rep<G: Graph + ?Sized>(g: &G, v: VertexId, avoid: Avoid<'_>) -> Result<VertexId> {
    check_outside(g, v, avoid)?;
    if let Some(min) = g.component_min(v, avoid) {
        return Ok(min);
    }
    if let Some(members) = g.component_members(v, avoid) {
        return members
            .first()
            .copied()
            .ok_or_else(|| Error::Invariant(format!("empty component listed for {v}")));
    }
    for w in g.vertices() {
        if w >= v {
            break;
        }
        if !avoid.contains(w) && g.connected_avoiding(w, v, avoid) {
            return Ok(w);
        }
    }
    Ok(v)
}

/// A finite simple graph. Neighbour sets are kept sorted.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FiniteGraph {
    adj: BTreeMap<VertexId, BTreeSet<VertexId>>,
}

impl FiniteGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_vertex(&mut self, v: VertexId) {
        self.adj.entry(v).or_default();
    }

    /// Adds `uv`, creating missing endpoints. Loops are rejected; returns
    /// `false` if the edge was already present.
    pub fn add_edge(&mut self, u: VertexId, v: VertexId) -> Result<bool> {
        if u == v {
            return Err(Error::InvalidGraph(format!("loop at {u}")));
        }
        let fresh = self.adj.entry(u).or_default().insert(v);
        self.adj.entry(v).or_default().insert(u);
        Ok(fresh)
    }

    pub fn from_edges<I>(vertices: impl IntoIterator<Item = u64>, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (u64, u64)>,
    {
        let mut g = FiniteGraph::new();
        for v in vertices {
            g.add_vertex(VertexId(v));
        }
        for (u, v) in edges {
            g.add_edge(VertexId(u), VertexId(v))?;
        }
        Ok(g)
    }

    pub fn len(&self) -> usize {
        self.adj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.values().map(BTreeSet::len).sum::<usize>() / 2
    }

    pub fn vertex_set(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.adj.keys().copied()
    }

    pub fn neighbor_set(&self, v: VertexId) -> Option<&BTreeSet<VertexId>> {
        self.adj.get(&v)
    }

    /// Edges `(u, v)` with `u < v`, ascending.
    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        self.adj
            .iter()
            .flat_map(|(&u, ns)| ns.range(u..).map(move |&v| (u, v)))
    }

    pub fn induced(&self, keep: &BTreeSet<VertexId>) -> FiniteGraph {
        let adj = self
            .adj
            .iter()
            .filter(|(v, _)| keep.contains(v))
            .map(|(&v, ns)| (v, ns.iter().copied().filter(|w| keep.contains(w)).collect()))
            .collect();
        FiniteGraph { adj }
    }

    pub fn without(&self, removed: &BTreeSet<VertexId>) -> FiniteGraph {
        let keep = self.vertex_set().filter(|v| !removed.contains(v)).collect();
        self.induced(&keep)
    }

    /// Breadth-first reach from `start` inside `G - F`.
    pub fn reach(&self, start: VertexId, avoid: Avoid<'_>) -> BTreeSet<VertexId> {
        let mut seen = BTreeSet::new();
        if !self.adj.contains_key(&start) || avoid.contains(start) {
            return seen;
        }
        let mut queue = VecDeque::from([start]);
        seen.insert(start);
        while let Some(u) = queue.pop_front() {
            for &w in &self.adj[&u] {
                if !avoid.contains(w) && seen.insert(w) {
                    queue.push_back(w);
                }
            }
        }
        seen
    }

    /// Components of `G - F`, each sorted, ordered by smallest member.
    pub fn components_avoiding(&self, avoid: Avoid<'_>) -> Vec<BTreeSet<VertexId>> {
        let mut done = BTreeSet::new();
        let mut out = Vec::new();
        for v in self.vertex_set() {
            if avoid.contains(v) || done.contains(&v) {
                continue;
            }
            let comp = self.reach(v, avoid);
            done.extend(comp.iter().copied());
            out.push(comp);
        }
        out
    }

    /// Returns a vertex unreachable from `root`, if any.
    pub fn unreachable_from(&self, root: VertexId) -> Option<VertexId> {
        let seen = self.reach(root, Avoid::nothing());
        self.vertex_set().find(|v| !seen.contains(v))
    }

    pub fn is_connected(&self) -> bool {
        match self.adj.keys().next() {
            None => true,
            Some(&r) => self.unreachable_from(r).is_none(),
        }
    }
}

impl Graph for FiniteGraph {
    fn has_vertex(&self, v: VertexId) -> bool {
        self.adj.contains_key(&v)
    }

    fn vertices(&self) -> VertexIter<'_> {
        Box::new(self.adj.keys().copied())
    }

    fn vertex_count(&self) -> Option<usize> {
        Some(self.adj.len())
    }

    fn neighbors(&self, v: VertexId) -> Result<VertexIter<'_>> {
        let ns = self.adj.get(&v).ok_or(Error::UnknownVertex(v))?;
        Ok(Box::new(ns.iter().copied()))
    }

    fn is_adjacent(&self, u: VertexId, v: VertexId) -> bool {
        self.adj.get(&u).is_some_and(|ns| ns.contains(&v))
    }

    fn connected_avoiding(&self, u: VertexId, v: VertexId, avoid: Avoid<'_>) -> bool {
        self.reach(u, avoid).contains(&v)
    }

    fn component_members(&self, v: VertexId, avoid: Avoid<'_>) -> Option<BTreeSet<VertexId>> {
        Some(self.reach(v, avoid))
    }
}

impl VertexSet for FiniteGraph {
    fn contains_vertex(&self, v: VertexId) -> bool {
        self.adj.contains_key(&v)
    }

    fn members(&self) -> VertexIter<'_> {
        Box::new(self.adj.keys().copied())
    }

    fn member_count(&self) -> usize {
        self.adj.len()
    }
}

#[derive(Serialize, Deserialize)]
struct GraphJson {
    vertices: Vec<u64>,
    edges: Vec<[u64; 2]>,
}

impl FiniteGraph {
    /// Parses `{ "vertices": [ids], "edges": [[u, v], ...] }`. Loops,
    /// duplicate edges, duplicate vertices and dangling endpoints are rejected.
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: GraphJson = serde_json::from_str(text)?;
        let mut g = FiniteGraph::new();
        for &v in &raw.vertices {
            if g.has_vertex(VertexId(v)) {
                return Err(Error::InvalidGraph(format!("duplicate vertex {v}")));
            }
            g.add_vertex(VertexId(v));
        }
        for &[u, v] in &raw.edges {
            for end in [u, v] {
                if !g.has_vertex(VertexId(end)) {
                    return Err(Error::InvalidGraph(format!("edge [{u},{v}] has dangling endpoint {end}")));
                }
            }
            if !g.add_edge(VertexId(u), VertexId(v))? {
                return Err(Error::InvalidGraph(format!("duplicate edge [{u},{v}]")));
            }
        }
        Ok(g)
    }

    pub fn to_json(&self) -> String {
        let raw = GraphJson {
            vertices: self.vertex_set().map(VertexId::get).collect(),
            edges: self.edges().map(|(u, v)| [u.0, v.0]).collect(),
        };
        serde_json::to_string(&raw).expect("graph serialization is infallible")
    }
}

/// A finite truncation of a graph around a set of seed vertices.
#[derive(Clone, Debug)]
pub struct Ball {
    pub center: VertexId,
    pub radius: usize,
    /// Induced subgraph on the vertices found.
    pub graph: FiniteGraph,
    /// Vertices whose neighbour enumeration was cut off at the degree cap.
    pub capped: BTreeSet<VertexId>,
    /// Distance from the seeds, as seen inside the truncation.
    pub distance: BTreeMap<VertexId, usize>,
}

impl Ball {
    pub fn truncated(&self) -> bool {
        !self.capped.is_empty()
    }
}

/// The ball of `radius` around `center`; see [`truncation`].
pub fn ball<G: Graph + ?Sized>(g: &G, center: VertexId, radius: usize, degree_cap: Option<usize>) -> Result<Ball> {
    truncation(g, &[center], radius, degree_cap)
}

/// Induced subgraph on every vertex within `radius` of some seed, where each
/// vertex only contributes its first `degree_cap` neighbours to the search.
/// Edges of the result come from the adjacency oracle, so they are exact for
/// the vertex set found. Vertices hit by the cap are reported, not hidden.
pub fn truncation<G: Graph + ?Sized>(
    g: &G,
    seeds: &[VertexId],
    radius: usize,
    degree_cap: Option<usize>,
) -> Result<Ball> {
    let center = *seeds
        .first()
        .ok_or_else(|| Error::InvalidArgument("truncation needs at least one seed".into()))?;
    let mut distance = BTreeMap::new();
    let mut queue = VecDeque::new();
    for &s in seeds {
        if !g.has_vertex(s) {
            return Err(Error::UnknownVertex(s));
        }
        if distance.insert(s, 0).is_none() {
            queue.push_back(s);
        }
    }
    let mut capped = BTreeSet::new();
    while let Some(u) = queue.pop_front() {
        let du = distance[&u];
        if du == radius {
            continue;
        }
        let mut taken = 0usize;
        for w in g.neighbors(u)? {
            if degree_cap.is_some_and(|cap| taken >= cap) {
                capped.insert(u);
                break;
            }
            taken += 1;
            if let std::collections::btree_map::Entry::Vacant(slot) = distance.entry(w) {
                slot.insert(du + 1);
                queue.push_back(w);
            }
        }
    }
    let verts: Vec<VertexId> = distance.keys().copied().collect();
    let mut graph = FiniteGraph::new();
    for &v in &verts {
        graph.add_vertex(v);
    }
    for (i, &u) in verts.iter().enumerate() {
        for &v in &verts[i + 1..] {
            if g.is_adjacent(u, v) {
                graph.add_edge(u, v)?;
            }
        }
    }
    Ok(Ball { center, radius, graph, capped, distance })
}
