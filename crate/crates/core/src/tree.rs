//! Finite rooted trees, the tree-order, and normality checks.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Avoid, FiniteGraph, Graph, VertexId, VertexIter, VertexSet};

/// Outcome of comparing two tree vertices in the tree-order.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TreeCmp {
    /// The first vertex is a strict ancestor of the second.
    Less,
    Greater,
    Equal,
    Incomparable,
}

/// A finite tree with a root, stored as parent pointers with depths and a
/// children index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootedTree {
    root: VertexId,
    parent: BTreeMap<VertexId, VertexId>,
    depth: BTreeMap<VertexId, usize>,
    children: BTreeMap<VertexId, BTreeSet<VertexId>>,
}

impl RootedTree {
    pub fn new(root: VertexId) -> Self {
        RootedTree {
            root,
            parent: BTreeMap::new(),
            depth: BTreeMap::from([(root, 0)]),
            children: BTreeMap::new(),
        }
    }

    pub fn root(&self) -> VertexId {
        self.root
    }

    pub fn len(&self) -> usize {
        self.depth.len()
    }

    /// Always false: a tree has its root.
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.depth.contains_key(&v)
    }

    pub fn vertices(&self) -> impl DoubleEndedIterator<Item = VertexId> + '_ {
        self.depth.keys().copied()
    }

    pub fn vertex_set(&self) -> BTreeSet<VertexId> {
        self.vertices().collect()
    }

    pub fn parent(&self, v: VertexId) -> Option<VertexId> {
        self.parent.get(&v).copied()
    }

    pub fn parents(&self) -> &BTreeMap<VertexId, VertexId> {
        &self.parent
    }

    pub fn depth(&self, v: VertexId) -> Result<usize> {
        self.depth.get(&v).copied().ok_or(Error::NotInTree(v))
    }

    pub fn height(&self) -> usize {
        self.depth.values().copied().max().unwrap_or(0)
    }

    /// Attaches the new vertex `child` below `parent`.
    pub fn add_leaf(&mut self, parent: VertexId, child: VertexId) -> Result<()> {
        let d = self.depth(parent)?;
        if self.contains(child) {
            return Err(Error::InvalidTree(format!("{child} is already in the tree")));
        }
        self.parent.insert(child, parent);
        self.depth.insert(child, d + 1);
        self.children.entry(parent).or_default().insert(child);
        Ok(())
    }

    /// Attaches a path whose first vertex is in the tree and whose other
    /// vertices are new.
    pub fn graft(&mut self, path: &[VertexId]) -> Result<()> {
        let (&anchor, rest) = path
            .split_first()
            .ok_or_else(|| Error::InvalidTree("empty graft path".into()))?;
        if !self.contains(anchor) {
            return Err(Error::NotInTree(anchor));
        }
        let mut prev = anchor;
        for &v in rest {
            self.add_leaf(prev, v)?;
            prev = v;
        }
        Ok(())
    }

    fn ancestor_at(&self, mut v: VertexId, mut d: usize, target: usize) -> VertexId {
        while d > target {
            v = self.parent[&v];
            d -= 1;
        }
        v
    }

    /// Compares `u` and `v` in the tree-order.
    pub fn tree_cmp(&self, u: VertexId, v: VertexId) -> Result<TreeCmp> {
        let du = self.depth(u)?;
        let dv = self.depth(v)?;
        Ok(match du.cmp(&dv) {
            std::cmp::Ordering::Equal if u == v => TreeCmp::Equal,
            std::cmp::Ordering::Equal => TreeCmp::Incomparable,
            std::cmp::Ordering::Less if self.ancestor_at(v, dv, du) == u => TreeCmp::Less,
            std::cmp::Ordering::Greater if self.ancestor_at(u, du, dv) == v => TreeCmp::Greater,
            _ => TreeCmp::Incomparable,
        })
    }

    pub fn comparable(&self, u: VertexId, v: VertexId) -> Result<bool> {
        Ok(self.tree_cmp(u, v)? != TreeCmp::Incomparable)
    }

    /// Whether `t` lies in the uptree rooted at `v`, i.e. `v <= t`.
    pub fn in_uptree(&self, v: VertexId, t: VertexId) -> Result<bool> {
        Ok(matches!(self.tree_cmp(v, t)?, TreeCmp::Less | TreeCmp::Equal))
    }

    /// The uptree rooted at `v`, ascending by id.
    pub fn uptree(&self, v: VertexId) -> Result<Vec<VertexId>> {
        self.depth(v)?;
        let mut out = vec![v];
        let mut i = 0;
        while i < out.len() {
            out.extend(self.children.get(&out[i]).into_iter().flatten().copied());
            i += 1;
        }
        out.sort();
        Ok(out)
    }

    /// Children of `v`, ascending.
    pub fn children(&self, v: VertexId) -> Vec<VertexId> {
        self.children.get(&v).into_iter().flatten().copied().collect()
    }

    /// Root-to-`v` path, root first.
    pub fn path_from_root(&self, v: VertexId) -> Result<Vec<VertexId>> {
        self.depth(v)?;
        let mut out = vec![v];
        let mut cur = v;
        while let Some(p) = self.parent(cur) {
            out.push(p);
            cur = p;
        }
        out.reverse();
        Ok(out)
    }

    /// Sorts `set` along the tree-order, or returns an incomparable pair.
    fn chain_order(&self, set: &BTreeSet<VertexId>) -> Result<std::result::Result<Vec<VertexId>, (VertexId, VertexId)>> {
        let mut by_depth = Vec::with_capacity(set.len());
        for &v in set {
            by_depth.push((self.depth(v)?, v));
        }
        by_depth.sort();
        for w in by_depth.windows(2) {
            let ((da, a), (db, b)) = (w[0], w[1]);
            if da == db || self.ancestor_at(b, db, da) != a {
                return Ok(Err((a, b)));
            }
        }
        Ok(Ok(by_depth.into_iter().map(|(_, v)| v).collect()))
    }

    /// Whether all members of `set` are pairwise comparable.
    pub fn is_chain(&self, set: &BTreeSet<VertexId>) -> Result<bool> {
        Ok(self.chain_order(set)?.is_ok())
    }

    /// Members of a chain listed bottom-up in the tree-order.
    pub fn sort_chain(&self, set: &BTreeSet<VertexId>) -> Result<Vec<VertexId>> {
        self.chain_order(set)?.map_err(|(a, b)| Error::NotAChain(a, b))
    }

    /// The top of a nonempty chain.
    pub fn chain_max(&self, set: &BTreeSet<VertexId>) -> Result<VertexId> {
        self.sort_chain(set)?
            .pop()
            .ok_or_else(|| Error::InvalidArgument("chain_max of an empty set".into()))
    }

    /// Vertices grouped by depth, each level ascending.
    pub fn levels(&self) -> Vec<Vec<VertexId>> {
        let mut out: Vec<Vec<VertexId>> = vec![Vec::new(); self.height() + 1];
        for (&v, &d) in &self.depth {
            out[d].push(v);
        }
        out
    }

    /// Checks that every tree vertex is a vertex of `g` and every parent edge
    /// is an edge of `g`.
    pub fn check_subgraph<G: Graph + ?Sized>(&self, g: &G) -> Result<()> {
        for v in self.vertices() {
            if !g.has_vertex(v) {
                return Err(Error::NotSubgraph(format!("vertex {v} is not in the graph")));
            }
        }
        for (&c, &p) in &self.parent {
            if !g.is_adjacent(c, p) {
                return Err(Error::NotSubgraph(format!("tree edge {p}-{c} is not a graph edge")));
            }
        }
        Ok(())
    }
}

impl VertexSet for RootedTree {
    fn contains_vertex(&self, v: VertexId) -> bool {
        self.contains(v)
    }

    fn members(&self) -> VertexIter<'_> {
        Box::new(self.vertices())
    }

    fn member_count(&self) -> usize {
        self.len()
    }
}

#[derive(Serialize, Deserialize)]
struct TreeJson {
    root: u64,
    parents: BTreeMap<u64, u64>,
}

impl RootedTree {
    /// `{ "root": id, "parents": { "v": parent, ... } }`
    pub fn to_json(&self) -> String {
        let raw = TreeJson {
            root: self.root.0,
            parents: self.parent.iter().map(|(c, p)| (c.0, p.0)).collect(),
        };
        serde_json::to_string(&raw).expect("tree serialization is infallible")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: TreeJson = serde_json::from_str(text)?;
        let parents: BTreeMap<VertexId, VertexId> =
            raw.parents.iter().map(|(&c, &p)| (VertexId(c), VertexId(p))).collect();
        Self::from_parents(VertexId(raw.root), parents)
    }

    pub fn from_parents(root: VertexId, parents: BTreeMap<VertexId, VertexId>) -> Result<Self> {
        if parents.contains_key(&root) {
            return Err(Error::InvalidTree(format!("root {root} has a parent")));
        }
        let mut depth = BTreeMap::from([(root, 0usize)]);
        for &start in parents.keys() {
            let mut trail = Vec::new();
            let mut cur = start;
            let base = loop {
                if let Some(&d) = depth.get(&cur) {
                    break d;
                }
                if trail.len() > parents.len() {
                    return Err(Error::InvalidTree(format!("parent pointers from {start} cycle")));
                }
                trail.push(cur);
                cur = *parents
                    .get(&cur)
                    .ok_or_else(|| Error::InvalidTree(format!("{cur} has no parent and is not the root")))?;
            };
            for (i, &v) in trail.iter().rev().enumerate() {
                depth.insert(v, base + i + 1);
            }
        }
        let mut children: BTreeMap<VertexId, BTreeSet<VertexId>> = BTreeMap::new();
        for (&c, &p) in &parents {
            children.entry(p).or_default().insert(c);
        }
        Ok(RootedTree { root, parent: parents, depth, children })
    }
}

/// A witness that a tree is not normal.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NormalityViolation {
    /// A graph edge between incomparable tree vertices.
    IncomparableEdge { u: VertexId, v: VertexId },
    /// Two incomparable tree vertices with neighbours in one component of
    /// `G - T`, named by its smallest vertex.
    IncomparableAttachments { component: VertexId, u: VertexId, v: VertexId },
}

/// Result of a normality check. `violation` is `None` iff the tree is normal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormalityReport {
    pub violation: Option<NormalityViolation>,
}

impl NormalityReport {
    pub fn holds(&self) -> bool {
        self.violation.is_none()
    }
}

/// Structural normality check.
///
/// A `T`-path either is a single edge with both ends in `T`, or has its
/// interior inside one component `D` of `G - T` and its ends in `N(D)`; every
/// pair of `N(D)` vertices is joined by such a path because `D` is connected.
/// So `T` is normal iff every edge inside `T` has comparable ends and every
/// `N(D)` is a chain.
pub fn is_normal(g: &FiniteGraph, t: &RootedTree) -> Result<NormalityReport> {
    t.check_subgraph(g)?;
    for u in t.vertices() {
        for &v in g.neighbor_set(u).into_iter().flatten() {
            if u < v && t.contains(v) && !t.comparable(u, v)? {
                return Ok(NormalityReport {
                    violation: Some(NormalityViolation::IncomparableEdge { u, v }),
                });
            }
        }
    }
    for comp in g.components_avoiding(Avoid::set(t)) {
        let attach: BTreeSet<VertexId> = comp
            .iter()
            .flat_map(|&w| g.neighbor_set(w).into_iter().flatten().copied())
            .filter(|&x| t.contains(x))
            .collect();
        if let Err((u, v)) = t.chain_order(&attach)? {
            let component = *comp.first().expect("components are nonempty");
            return Ok(NormalityReport {
                violation: Some(NormalityViolation::IncomparableAttachments { component, u, v }),
            });
        }
    }
    Ok(NormalityReport { violation: None })
}

pub const BRUTE_FORCE_LIMIT: usize = 12;

/// Normality by enumerating every `T`-path explicitly. Only for tiny graphs.
pub fn is_normal_bruteforce(g: &FiniteGraph, t: &RootedTree) -> Result<bool> {
    if g.len() > BRUTE_FORCE_LIMIT {
        return Err(Error::TooLarge { size: g.len(), limit: BRUTE_FORCE_LIMIT });
    }
    t.check_subgraph(g)?;

    // Extends the open T-path ending at `cur` (whose interior is `inner`).
    fn walk(
        g: &FiniteGraph,
        t: &RootedTree,
        start: VertexId,
        cur: VertexId,
        inner: &mut Vec<VertexId>,
    ) -> Result<bool> {
        for &w in g.neighbor_set(cur).into_iter().flatten() {
            if t.contains(w) {
                if w != start && !t.comparable(start, w)? {
                    return Ok(false);
                }
            } else if !inner.contains(&w) {
                inner.push(w);
                let ok = walk(g, t, start, w, inner)?;
                inner.pop();
                if !ok {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    for s in t.vertices() {
        if !walk(g, t, s, s, &mut Vec::new())? {
            return Ok(false);
        }
    }
    Ok(true)
}
