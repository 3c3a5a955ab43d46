//! Vertex-disjoint path systems and minimum vertex separators (Menger).
//!
//! All three flavours run the same unit-augmenting max flow on the split
//! network: each vertex `v` becomes `v_in -> v_out` carrying the vertex
//! capacity, and each edge `uv` becomes `u_out -> v_in` and `v_out -> u_in`.
//! Augmenting paths are found breadth-first with arcs scanned in ascending
//! vertex order, so every result is deterministic.
//!
//! * [`max_disjoint_paths`]: `A`-`B` paths whose interiors avoid `A ∪ B` and
//!   are pairwise disjoint. Endpoints may be shared. For `A = {s}`, `B = {t}`
//!   this is the classical internally disjoint `s`-`t` count.
//! * [`fan`]: paths from one centre to distinct vertices of a target set,
//!   disjoint except at the centre.
//! * [`set_disjoint_paths`]: fully disjoint `A`-`B` paths, each meeting `A` only
//!   in its first and `B` only in its last vertex.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{Avoid, FiniteGraph, VertexId};

const INF: u32 = u32::MAX / 2;
const SOURCE: usize = 0;
const SINK: usize = 1;

struct Network {
    vertices: Vec<VertexId>,
    index: BTreeMap<VertexId, usize>,
    adj: Vec<Vec<usize>>,
    to: Vec<usize>,
    cap: Vec<u32>,
    orig: Vec<u32>,
}

impl Network {
    fn node_in(i: usize) -> usize {
        2 + 2 * i
    }

    fn node_out(i: usize) -> usize {
        3 + 2 * i
    }

    fn new(vertices: Vec<VertexId>) -> Self {
        let index = vertices.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let n = 2 + 2 * vertices.len();
        Network { vertices, index, adj: vec![Vec::new(); n], to: Vec::new(), cap: Vec::new(), orig: Vec::new() }
    }

    fn arc(&mut self, a: usize, b: usize, c: u32) {
        self.adj[a].push(self.to.len());
        self.to.push(b);
        self.cap.push(c);
        self.orig.push(c);
        self.adj[b].push(self.to.len());
        self.to.push(a);
        self.cap.push(0);
        self.orig.push(0);
    }

    /// One breadth-first augmentation by a single unit.
    fn augment(&mut self) -> bool {
        let mut via = vec![usize::MAX; self.adj.len()];
        let mut seen = vec![false; self.adj.len()];
        seen[SOURCE] = true;
        let mut queue = VecDeque::from([SOURCE]);
        while let Some(u) = queue.pop_front() {
            if u == SINK {
                break;
            }
            for &e in &self.adj[u] {
                let w = self.to[e];
                if self.cap[e] > 0 && !seen[w] {
                    seen[w] = true;
                    via[w] = e;
                    queue.push_back(w);
                }
            }
        }
        if !seen[SINK] {
            return false;
        }
        let mut cur = SINK;
        while cur != SOURCE {
            let e = via[cur];
            self.cap[e] -= 1;
            self.cap[e ^ 1] += 1;
            cur = self.to[e ^ 1];
        }
        true
    }

    fn residual_reach(&self) -> Vec<bool> {
        let mut seen = vec![false; self.adj.len()];
        seen[SOURCE] = true;
        let mut queue = VecDeque::from([SOURCE]);
        while let Some(u) = queue.pop_front() {
            for &e in &self.adj[u] {
                let w = self.to[e];
                if self.cap[e] > 0 && !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        seen
    }

    /// Vertices whose capacity arc crosses the residual cut.
    fn cut(&self) -> BTreeSet<VertexId> {
        let reach = self.residual_reach();
        (0..self.vertices.len())
            .filter(|&i| reach[Self::node_in(i)] && !reach[Self::node_out(i)])
            .map(|i| self.vertices[i])
            .collect()
    }

    /// Splits the flow into unit source-sink walks, dropping any cycles.
    fn decompose(&mut self, units: usize) -> Vec<Vec<VertexId>> {
        let mut flow: Vec<u32> = (0..self.to.len())
            .map(|e| if e % 2 == 0 { self.orig[e] - self.cap[e].min(self.orig[e]) } else { 0 })
            .collect();
        let mut paths = Vec::with_capacity(units);
        for _ in 0..units {
            let mut nodes = vec![SOURCE];
            let mut arcs: Vec<usize> = Vec::new();
            let mut cur = SOURCE;
            while cur != SINK {
                let Some(&e) = self.adj[cur].iter().find(|&&e| e % 2 == 0 && flow[e] > 0) else {
                    return paths;
                };
                let next = self.to[e];
                arcs.push(e);
                if let Some(pos) = nodes.iter().position(|&n| n == next) {
                    // a cycle carries no source-sink flow: cancel it
                    for &c in &arcs[pos..] {
                        flow[c] -= 1;
                    }
                    nodes.truncate(pos + 1);
                    arcs.truncate(pos);
                } else {
                    nodes.push(next);
                }
                cur = next;
            }
            for &e in &arcs {
                flow[e] -= 1;
            }
            let verts: Vec<VertexId> = nodes
                .iter()
                .filter(|&&n| n >= 2 && n % 2 == 0)
                .map(|&n| self.vertices[(n - 2) / 2])
                .collect();
            paths.push(verts);
        }
        paths
    }
}

struct Regime<'a> {
    sources: &'a BTreeSet<VertexId>,
    sinks: &'a BTreeSet<VertexId>,
    unbounded: &'a BTreeSet<VertexId>,
    /// No graph arc enters a source and none leaves a sink.
    sealed: bool,
    /// Edges left out of the network.
    skip: &'a dyn Fn(VertexId, VertexId) -> bool,
}

fn build_network(g: &FiniteGraph, regime: &Regime<'_>) -> Network {
    let mut net = Network::new(g.vertex_set().collect());
    for i in 0..net.vertices.len() {
        let v = net.vertices[i];
        let c = if regime.unbounded.contains(&v) { INF } else { 1 };
        net.arc(Network::node_in(i), Network::node_out(i), c);
    }
    for &a in regime.sources {
        if let Some(&i) = net.index.get(&a) {
            net.arc(SOURCE, Network::node_in(i), INF);
        }
    }
    for &b in regime.sinks {
        if let Some(&i) = net.index.get(&b) {
            net.arc(Network::node_out(i), SINK, INF);
        }
    }
    for u in g.vertex_set() {
        for &w in g.neighbor_set(u).into_iter().flatten() {
            if regime.sealed && (regime.sinks.contains(&u) || regime.sources.contains(&w)) {
                continue;
            }
            if (regime.skip)(u, w) {
                continue;
            }
            let (iu, iw) = (net.index[&u], net.index[&w]);
            net.arc(Network::node_out(iu), Network::node_in(iw), INF);
        }
    }
    net
}

fn run_flow(net: &mut Network, limit: usize) -> usize {
    let mut value = 0;
    while value < limit && net.augment() {
        value += 1;
    }
    value
}

/// A path system with its dual separator.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SeparationResult {
    /// Number of paths found (at most the requested cap).
    pub count: usize,
    pub paths: Vec<Vec<VertexId>>,
    /// A minimum separator of size `count`. `None` when the cap stopped the
    /// search early or when direct `A`-`B` edges make separation impossible.
    pub separator: Option<BTreeSet<VertexId>>,
    /// Edges joining `A` and `B` directly; each is counted as one path.
    pub direct_edges: Vec<(VertexId, VertexId)>,
    pub capped: bool,
}

impl SeparationResult {
    pub fn inseparable(&self) -> bool {
        !self.direct_edges.is_empty()
    }
}

fn require_vertices(g: &FiniteGraph, set: &BTreeSet<VertexId>, what: &str) -> Result<()> {
    if set.is_empty() {
        return Err(Error::InvalidArgument(format!("{what} must be nonempty")));
    }
    match set.iter().find(|v| g.neighbor_set(**v).is_none()) {
        Some(&v) => Err(Error::UnknownVertex(v)),
        None => Ok(()),
    }
}

/// Maximum number (up to `cap`) of `A`-`B` paths with pairwise disjoint
/// interiors avoiding `A ∪ B`, and a minimum separator.
///
/// A vertex of `A ∩ B` is a trivial path and must lie in every separator. A
/// direct `A`-`B` edge is a path with empty interior; no vertex set outside
/// `A ∪ B` meets it, so such pairs are reported as inseparable.
pub fn max_disjoint_paths(
    g: &FiniteGraph,
    a: &BTreeSet<VertexId>,
    b: &BTreeSet<VertexId>,
    cap: usize,
) -> Result<SeparationResult> {
    require_vertices(g, a, "A")?;
    require_vertices(g, b, "B")?;
    let shared: BTreeSet<VertexId> = a.intersection(b).copied().collect();
    let a_only: BTreeSet<VertexId> = a.difference(&shared).copied().collect();
    let b_only: BTreeSet<VertexId> = b.difference(&shared).copied().collect();

    let mut paths: Vec<Vec<VertexId>> = shared.iter().map(|&v| vec![v]).collect();
    let mut direct_edges = Vec::new();
    for &x in &a_only {
        for &y in g.neighbor_set(x).into_iter().flatten() {
            if b_only.contains(&y) {
                direct_edges.push((x, y));
                paths.push(vec![x, y]);
            }
        }
    }
    if paths.len() >= cap {
        paths.truncate(cap);
        return Ok(SeparationResult { count: cap, paths, separator: None, direct_edges, capped: true });
    }

    let host = g.without(&shared);
    let unbounded: BTreeSet<VertexId> = a_only.union(&b_only).copied().collect();
    let skip = |u: VertexId, w: VertexId| a_only.contains(&u) && b_only.contains(&w);
    let regime = Regime { sources: &a_only, sinks: &b_only, unbounded: &unbounded, sealed: true, skip: &skip };
    let mut net = build_network(&host, &regime);
    let limit = cap - paths.len();
    let flow = run_flow(&mut net, limit);
    let capped = flow == limit;
    let separator = (!capped && direct_edges.is_empty()).then(|| {
        let mut s = net.cut();
        s.extend(shared.iter().copied());
        s
    });
    paths.extend(net.decompose(flow));
    Ok(SeparationResult { count: paths.len(), paths, separator, direct_edges, capped })
}

/// Outcome of a separator query.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Separation {
    Separator(BTreeSet<VertexId>),
    /// `A` and `B` are joined by an edge, so no separator avoids `A ∪ B`.
    Inseparable { edge: (VertexId, VertexId) },
}

/// A minimum vertex set, disjoint from `A ∪ B` apart from forced `A ∩ B`
/// vertices, meeting every `A`-`B` path.
pub fn min_separator(g: &FiniteGraph, a: &BTreeSet<VertexId>, b: &BTreeSet<VertexId>) -> Result<Separation> {
    let res = max_disjoint_paths(g, a, b, usize::MAX)?;
    if let Some(&edge) = res.direct_edges.first() {
        return Ok(Separation::Inseparable { edge });
    }
    let s = res
        .separator
        .ok_or_else(|| Error::Invariant("uncapped flow without a separator".into()))?;
    Ok(Separation::Separator(s))
}

/// Whether `G - S` has no path from `A \ S` to `B \ S`.
pub fn is_separator(g: &FiniteGraph, a: &BTreeSet<VertexId>, b: &BTreeSet<VertexId>, s: &BTreeSet<VertexId>) -> bool {
    let avoid = Avoid::set(s);
    let mut seen = BTreeSet::new();
    for &x in a {
        if s.contains(&x) || seen.contains(&x) {
            continue;
        }
        let reach = g.reach(x, avoid);
        if reach.iter().any(|v| b.contains(v)) {
            return false;
        }
        seen.extend(reach);
    }
    true
}

/// Up to `cap` paths from `center` to distinct vertices of `targets`, pairwise
/// disjoint except at `center`, each meeting `targets` only at its end.
pub fn fan(g: &FiniteGraph, center: VertexId, targets: &BTreeSet<VertexId>, cap: usize) -> Result<Vec<Vec<VertexId>>> {
    require_vertices(g, &BTreeSet::from([center]), "center")?;
    let targets: BTreeSet<VertexId> = targets.iter().copied().filter(|&t| t != center).collect();
    if targets.is_empty() || cap == 0 {
        return Ok(Vec::new());
    }
    require_vertices(g, &targets, "targets")?;
    let sources = BTreeSet::from([center]);
    let skip = |_: VertexId, _: VertexId| false;
    let regime = Regime { sources: &sources, sinks: &targets, unbounded: &sources, sealed: true, skip: &skip };
    let mut net = build_network(g, &regime);
    let flow = run_flow(&mut net, cap);
    Ok(net.decompose(flow))
}

/// Up to `cap` pairwise vertex-disjoint `A`-`B` paths.
pub fn set_disjoint_paths(
    g: &FiniteGraph,
    a: &BTreeSet<VertexId>,
    b: &BTreeSet<VertexId>,
    cap: usize,
) -> Result<Vec<Vec<VertexId>>> {
    if cap == 0 || a.is_empty() || b.is_empty() {
        return Ok(Vec::new());
    }
    require_vertices(g, a, "A")?;
    require_vertices(g, b, "B")?;
    let none = BTreeSet::new();
    let skip = |_: VertexId, _: VertexId| false;
    let regime = Regime { sources: a, sinks: b, unbounded: &none, sealed: false, skip: &skip };
    let mut net = build_network(g, &regime);
    let flow = run_flow(&mut net, cap);
    let mut paths = net.decompose(flow);
    for p in &mut paths {
        let end = p.iter().position(|v| b.contains(v)).expect("flow paths end in B");
        let start = p[..=end].iter().rposition(|v| a.contains(v)).expect("flow paths start in A");
        *p = p[start..=end].to_vec();
    }
    Ok(paths)
}

/// How paths in a system may touch each other.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Disjointness {
    /// No shared vertices at all.
    Full,
    /// Interiors pairwise disjoint and avoiding `A ∪ B`; endpoints may repeat.
    Internal,
    /// All paths start at the single vertex of `A`; otherwise fully disjoint.
    Fan,
}

/// Independent re-check of a path system: every path is a simple walk along
/// edges of `g` from `A` to `B`, and the paths touch only as `mode` allows.
pub fn check_path_system(
    g: &FiniteGraph,
    a: &BTreeSet<VertexId>,
    b: &BTreeSet<VertexId>,
    paths: &[Vec<VertexId>],
    mode: Disjointness,
) -> std::result::Result<(), String> {
    let mut used: BTreeMap<VertexId, usize> = BTreeMap::new();
    for (i, p) in paths.iter().enumerate() {
        let (first, last) = match (p.first(), p.last()) {
            (Some(&f), Some(&l)) => (f, l),
            _ => return Err(format!("path {i} is empty")),
        };
        if !a.contains(&first) || !b.contains(&last) {
            return Err(format!("path {i} does not run from A to B"));
        }
        let distinct: BTreeSet<_> = p.iter().collect();
        if distinct.len() != p.len() {
            return Err(format!("path {i} repeats a vertex"));
        }
        if let Some(w) = p.windows(2).find(|w| !g.neighbor_set(w[0]).is_some_and(|ns| ns.contains(&w[1]))) {
            return Err(format!("path {i} uses non-edge {}-{}", w[0], w[1]));
        }
        let interior = if p.len() > 2 { &p[1..p.len() - 1] } else { &[][..] };
        let checked: Vec<VertexId> = match mode {
            Disjointness::Full => p.clone(),
            Disjointness::Internal => {
                if let Some(v) = interior.iter().find(|v| a.contains(v) || b.contains(v)) {
                    return Err(format!("path {i} has terminal {v} in its interior"));
                }
                interior.to_vec()
            }
            Disjointness::Fan => {
                if let Some(v) = p[1..].iter().find(|v| a.contains(v)) {
                    return Err(format!("path {i} returns to the centre at {v}"));
                }
                p[1..].to_vec()
            }
        };
        for v in checked {
            if let Some(j) = used.insert(v, i) {
                return Err(format!("paths {j} and {i} share vertex {v}"));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{make_family, FamilySpec};

    fn v(id: u64) -> VertexId {
        VertexId(id)
    }

    fn set(ids: &[u64]) -> BTreeSet<VertexId> {
        ids.iter().copied().map(v).collect()
    }

    fn finite(spec: FamilySpec) -> FiniteGraph {
        make_family(spec).unwrap().as_finite().unwrap().clone()
    }

    #[test]
    fn path_has_one_route() {
        let g = finite(FamilySpec::Path(5));
        let res = max_disjoint_paths(&g, &set(&[0]), &set(&[4]), usize::MAX).unwrap();
        assert_eq!(res.count, 1);
        assert_eq!(res.paths, vec![vec![v(0), v(1), v(2), v(3), v(4)]]);
        let s = res.separator.unwrap();
        assert_eq!(s.len(), 1);
        assert!(s.is_subset(&set(&[1, 2, 3])));
        assert!(is_separator(&g, &set(&[0]), &set(&[4]), &s));
    }

    #[test]
    fn k5_adjacent_pair_counts_the_edge() {
        let g = finite(FamilySpec::Complete(5));
        let res = max_disjoint_paths(&g, &set(&[0]), &set(&[4]), usize::MAX).unwrap();
        assert_eq!(res.count, 4);
        assert!(res.inseparable());
        assert_eq!(res.direct_edges, vec![(v(0), v(4))]);
        assert_eq!(res.separator, None);
        check_path_system(&g, &set(&[0]), &set(&[4]), &res.paths, Disjointness::Internal).unwrap();
        assert_eq!(
            min_separator(&g, &set(&[0]), &set(&[4])).unwrap(),
            Separation::Inseparable { edge: (v(0), v(4)) }
        );
    }

    #[test]
    fn disconnected_sides() {
        let g = FiniteGraph::from_edges(0..4, [(0, 1), (2, 3)]).unwrap();
        let res = max_disjoint_paths(&g, &set(&[0]), &set(&[3]), usize::MAX).unwrap();
        assert_eq!(res.count, 0);
        assert_eq!(res.separator, Some(BTreeSet::new()));
    }

    #[test]
    fn separator_examples() {
        let g = finite(FamilySpec::Path(5));
        let Separation::Separator(s) = min_separator(&g, &set(&[0]), &set(&[4])).unwrap() else { panic!() };
        assert_eq!(s.len(), 1);
        let c4 = finite(FamilySpec::Cycle(4));
        assert_eq!(
            min_separator(&c4, &set(&[0]), &set(&[2])).unwrap(),
            Separation::Separator(set(&[1, 3]))
        );
        // everything else removed
        let k = FiniteGraph::from_edges(0..5, [(0, 1), (1, 4), (0, 2), (2, 4), (0, 3), (3, 4)]).unwrap();
        assert!(is_separator(&k, &set(&[0]), &set(&[4]), &set(&[1, 2, 3])));
        assert!(!is_separator(&k, &set(&[0]), &set(&[4]), &BTreeSet::new()));
    }

    #[test]
    fn shared_terminals_are_trivial_paths() {
        let g = finite(FamilySpec::Path(5));
        let res = max_disjoint_paths(&g, &set(&[0, 2]), &set(&[2, 4]), usize::MAX).unwrap();
        assert_eq!(res.count, 1);
        assert_eq!(res.separator, Some(set(&[2])));
    }

    #[test]
    fn cap_stops_early() {
        let g = finite(FamilySpec::Complete(6));
        let res = max_disjoint_paths(&g, &set(&[0]), &set(&[5]), 2).unwrap();
        assert_eq!(res.count, 2);
        assert!(res.capped);
    }

    #[test]
    fn fan_in_a_wheel() {
        // centre 0 joined to a 6-cycle 1..6; targets = the cycle
        let mut g = finite(FamilySpec::Cycle(6));
        let mut relabeled = FiniteGraph::new();
        for (x, y) in g.edges() {
            relabeled.add_edge(v(x.0 + 1), v(y.0 + 1)).unwrap();
        }
        for i in 1..=6 {
            relabeled.add_edge(v(0), v(i)).unwrap();
        }
        g = relabeled;
        let paths = fan(&g, v(0), &set(&[1, 2, 3, 4, 5, 6]), 10).unwrap();
        assert_eq!(paths.len(), 6);
        check_path_system(&g, &set(&[0]), &set(&[1, 2, 3, 4, 5, 6]), &paths, Disjointness::Fan).unwrap();
        // only two targets reachable disjointly through the cycle from outside
        let paths = fan(&g, v(1), &set(&[3, 5]), 10).unwrap();
        assert_eq!(paths.len(), 2);
    }

    #[test]
    fn set_paths_are_fully_disjoint() {
        let g = finite(FamilySpec::Path(9));
        let paths = set_disjoint_paths(&g, &set(&[0]), &set(&[8]), 2).unwrap();
        assert_eq!(paths.len(), 1);
        let k = finite(FamilySpec::Complete(6));
        let paths = set_disjoint_paths(&k, &set(&[0, 1, 2]), &set(&[2, 3, 4]), 10).unwrap();
        assert_eq!(paths.len(), 3);
        check_path_system(&k, &set(&[0, 1, 2]), &set(&[2, 3, 4]), &paths, Disjointness::Full).unwrap();
        assert!(paths.contains(&vec![v(2)]));
    }

    #[test]
    fn checker_catches_violations() {
        let g = finite(FamilySpec::Complete(5));
        let a = set(&[0]);
        let b = set(&[4]);
        let bad = vec![vec![v(0), v(1), v(4)], vec![v(0), v(1), v(2), v(4)]];
        assert!(check_path_system(&g, &a, &b, &bad, Disjointness::Internal).is_err());
        let g = finite(FamilySpec::Path(3));
        let bad = vec![vec![v(0), v(2)]];
        assert!(check_path_system(&g, &set(&[0]), &set(&[2]), &bad, Disjointness::Internal).is_err());
    }
}
