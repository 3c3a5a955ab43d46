//! Failure analysis for runs that leave a component `C` uncovered.
//!
//! The objects are the ones the spanning argument reasons about: the
//! attachment chain `N(C)`, the ray `R` of the tree through it, fans from
//! chain vertices onto `R` (domination), disjoint paths from the low cover
//! levels `U` onto `R` (inseparability), and a subdivided clique with branch
//! vertices in `N(C)`.
//!
//! Domination and inseparability are statements about infinite graphs. Here
//! they are only ever reported as finite evidence of an explicit size `k`,
//! found inside an explicit truncation; failing to find it is reported as
//! insufficient evidence, never as a refutation.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::Serialize;

use crate::construct::{build_budgeted, BuildReport};
use crate::cover::CoverAssignment;
use crate::error::{Error, Result};
use crate::graph::{component_rep, truncation, Avoid, Ball, FiniteGraph, Graph, VertexId, VertexIter};
use crate::separators::{check_path_system, fan, set_disjoint_paths, Disjointness};
use crate::tree::{RootedTree, TreeCmp};

/// Either a verified object or the partial object and why it fell short.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Evidence<T> {
    Verified { evidence: T },
    Insufficient { partial: T, reason: String },
}

impl<T> Evidence<T> {
    pub fn is_verified(&self) -> bool {
        matches!(self, Evidence::Verified { .. })
    }

    pub fn inner(&self) -> &T {
        match self {
            Evidence::Verified { evidence } => evidence,
            Evidence::Insufficient { partial, .. } => partial,
        }
    }

    fn judge(value: T, ok: bool, reason: impl FnOnce() -> String) -> Self {
        if ok {
            Evidence::Verified { evidence: value }
        } else {
            Evidence::Insufficient { partial: value, reason: reason() }
        }
    }
}

/// How far a truncation reaches around its seeds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Truncation {
    pub radius: usize,
    pub degree_cap: Option<usize>,
}

impl Default for Truncation {
    fn default() -> Self {
        Truncation { radius: 1, degree_cap: Some(64) }
    }
}

/// What a truncation actually contained, so cap effects are visible.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TruncationNote {
    pub radius: usize,
    pub degree_cap: Option<usize>,
    pub vertices: usize,
    pub edges: usize,
    pub capped_vertices: usize,
}

impl TruncationNote {
    fn of(ball: &Ball, t: Truncation) -> Self {
        TruncationNote {
            radius: t.radius,
            degree_cap: t.degree_cap,
            vertices: ball.graph.len(),
            edges: ball.graph.edge_count(),
            capped_vertices: ball.capped.len(),
        }
    }
}

/// An uncovered component `C` of a non-spanning snapshot.
#[derive(Clone, Debug, Serialize)]
pub struct FailureProbe {
    /// Smallest vertex of `C`.
    pub rep: VertexId,
    /// `n_C`: the minimal cover level occurring in `C`.
    pub level: u64,
    /// The vertex of `C` the cover picked at that level.
    pub pick: VertexId,
    #[serde(skip)]
    pub tree: RootedTree,
}

/// Probes the smallest pending component of a non-spanning report.
pub fn uncovered_probe(g: &dyn Graph, report: &BuildReport, cover: &CoverAssignment) -> Result<FailureProbe> {
    let rep = match report.pending.first() {
        Some(&rep) if !report.spanning => rep,
        _ => return Err(Error::NothingToWitness),
    };
    if report.tree.contains(rep) {
        return Err(Error::Invariant(format!("pending rep {rep} is in the tree")));
    }
    let pick = cover.pick(g, rep, &report.tree)?;
    Ok(FailureProbe { rep, level: cover.level(pick)?, pick, tree: report.tree.clone() })
}

/// Probes the component of the smallest uncovered vertex with id below
/// `region`. Budgeted runs on infinite hosts never span, so this is the
/// notion of "nothing to witness" there: the region is fully covered.
pub fn region_probe(g: &dyn Graph, report: &BuildReport, cover: &CoverAssignment, region: u64) -> Result<FailureProbe> {
    let uncovered = g.vertices().take_while(|v| v.0 < region).find(|&v| !report.tree.contains(v));
    let Some(v) = uncovered else { return Err(Error::NothingToWitness) };
    let rep = component_rep(g, v, Avoid::set(&report.tree))?;
    let pick = cover.pick(g, rep, &report.tree)?;
    Ok(FailureProbe { rep, level: cover.level(pick)?, pick, tree: report.tree.clone() })
}

/// The part of `N(C)` found within budget, and the tree path through it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ChainReport {
    /// Bottom-up along the tree-order.
    pub chain: Vec<VertexId>,
    /// A verified neighbour in `C` for every chain member.
    pub witnesses: BTreeMap<VertexId, VertexId>,
    /// Root-to-top tree path; every chain member lies on it.
    pub ray_prefix: Vec<VertexId>,
    pub steps: u64,
}

impl ChainReport {
    pub fn len(&self) -> usize {
        self.chain.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chain.is_empty()
    }
}

/// Scans the snapshot's tree vertices for neighbours in `C`, advancing their
/// neighbour cursors round-robin for at most `budget` steps in total.
pub fn attachment_chain(g: &dyn Graph, probe: &FailureProbe, budget: u64) -> Result<ChainReport> {
    let tree = &probe.tree;
    let avoid = Avoid::set(tree);
    let mut cursors: Vec<(VertexId, VertexIter<'_>)> = Vec::new();
    for x in tree.vertices() {
        cursors.push((x, g.neighbors(x)?));
    }
    let mut witnesses = BTreeMap::new();
    let mut steps = 0;
    let mut i = 0;
    while steps < budget && !cursors.is_empty() {
        i %= cursors.len();
        let (x, cursor) = &mut cursors[i];
        steps += 1;
        match cursor.next() {
            Some(y) if !tree.contains(y) && g.connected_avoiding(y, probe.rep, avoid) => {
                witnesses.insert(*x, y);
                drop(cursors.remove(i));
            }
            Some(_) => i += 1,
            None => drop(cursors.remove(i)),
        }
    }
    let members: BTreeSet<VertexId> = witnesses.keys().copied().collect();
    let chain = tree.sort_chain(&members).map_err(|e| match e {
        Error::NotAChain(a, b) => Error::Invariant(format!("N(C) is not a chain: {a}, {b}")),
        other => other,
    })?;
    let ray_prefix = match chain.last() {
        Some(&top) => tree.path_from_root(top)?,
        None => Vec::new(),
    };
    Ok(ChainReport { chain, witnesses, ray_prefix, steps })
}

/// Paths from `center` to distinct ray vertices, disjoint except at `center`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DominationFan {
    pub center: VertexId,
    pub requested: usize,
    pub paths: Vec<Vec<VertexId>>,
    pub truncation: TruncationNote,
}

/// The ray vertices strictly above `x` if `x` is on the ray, else all of them.
fn ray_targets(x: VertexId, ray: &[VertexId]) -> BTreeSet<VertexId> {
    match ray.iter().position(|&r| r == x) {
        Some(i) => ray[i + 1..].iter().copied().collect(),
        None => ray.iter().copied().collect(),
    }
}

/// Looks for a `k`-fan from `x` onto the ray prefix inside a truncation.
pub fn domination_fan(
    g: &dyn Graph,
    x: VertexId,
    ray_prefix: &[VertexId],
    k: usize,
    reach: Truncation,
) -> Result<Evidence<DominationFan>> {
    if k == 0 {
        return Err(Error::InvalidArgument("fan size must be at least 1".into()));
    }
    let mut seeds = vec![x];
    seeds.extend(ray_prefix.iter().copied().filter(|&r| r != x));
    let ball = truncation(g, &seeds, reach.radius, reach.degree_cap)?;
    let targets = ray_targets(x, ray_prefix);
    let paths = fan(&ball.graph, x, &targets, k)?;
    check_path_system(&ball.graph, &BTreeSet::from([x]), &targets, &paths, Disjointness::Fan)
        .map_err(|e| Error::Invariant(format!("fan from {x}: {e}")))?;
    let found = paths.len();
    let fan = DominationFan { center: x, requested: k, paths, truncation: TruncationNote::of(&ball, reach) };
    Ok(Evidence::judge(fan, found >= k, || {
        format!("only {found} of {k} fan paths from {x} inside the truncation")
    }))
}

/// Disjoint paths from `U = { v : level(v) <= n_C }` onto the ray prefix.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SeparationEvidence {
    pub level: u64,
    pub requested: usize,
    pub paths: Vec<Vec<VertexId>>,
    pub truncation: Option<TruncationNote>,
}

/// `k` fully disjoint `U`-`R` paths inside a truncation: no vertex set of
/// fewer than `k` vertices separates `U` from the ray prefix there.
pub fn inseparability_evidence(
    g: &dyn Graph,
    probe: &FailureProbe,
    cover: &CoverAssignment,
    ray_prefix: &[VertexId],
    k: usize,
    reach: Truncation,
) -> Result<Evidence<SeparationEvidence>> {
    if k == 0 || ray_prefix.is_empty() {
        let empty = SeparationEvidence { level: probe.level, requested: k, paths: Vec::new(), truncation: None };
        return Ok(Evidence::judge(empty, k == 0, || "empty ray prefix".to_string()));
    }
    let ball = truncation(g, ray_prefix, reach.radius, reach.degree_cap)?;
    let u = cover.up_to_level(ball.graph.vertex_set(), probe.level)?;
    let ray: BTreeSet<VertexId> = ray_prefix.iter().copied().collect();
    let paths = set_disjoint_paths(&ball.graph, &u, &ray, k)?;
    check_path_system(&ball.graph, &u, &ray, &paths, Disjointness::Full)
        .map_err(|e| Error::Invariant(format!("U-R paths: {e}")))?;
    let found = paths.len();
    let ev = SeparationEvidence {
        level: probe.level,
        requested: k,
        paths,
        truncation: Some(TruncationNote::of(&ball, reach)),
    };
    Ok(Evidence::judge(ev, found >= k, || format!("only {found} of {k} disjoint U-R paths inside the truncation")))
}

/// A neighbour of `x` and a member of `U` in the uptree above a ray edge.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HighEdgeWitness {
    pub x: VertexId,
    pub edge: (VertexId, VertexId),
    pub neighbor: Option<VertexId>,
    pub u_member: Option<VertexId>,
}

/// For a tree edge `uv` with `x < u < v`, searches the uptree `T_v` for a
/// neighbour of `x` and for a vertex satisfying `in_u`.
pub fn probe_high_edges(
    g: &dyn Graph,
    tree: &RootedTree,
    x: VertexId,
    in_u: &dyn Fn(VertexId) -> bool,
    edge: (VertexId, VertexId),
) -> Result<Evidence<HighEdgeWitness>> {
    let (u, v) = edge;
    let mut w = HighEdgeWitness { x, edge, neighbor: None, u_member: None };
    if !tree.contains(v) {
        return Ok(Evidence::Insufficient { partial: w, reason: format!("{v} is above the snapshot") });
    }
    if tree.parent(v) != Some(u) {
        return Err(Error::InvalidArgument(format!("{u}-{v} is not a tree edge")));
    }
    if tree.tree_cmp(x, u)? != TreeCmp::Less {
        return Err(Error::InvalidArgument(format!("{x} is not below {u} in the tree")));
    }
    let up = tree.uptree(v)?;
    w.neighbor = up.iter().copied().find(|&t| g.is_adjacent(x, t));
    w.u_member = up.iter().copied().find(|&t| in_u(t));
    let ok = w.neighbor.is_some() && w.u_member.is_some();
    Ok(Evidence::judge(w, ok, || format!("uptree of {v} lacks a witness so far")))
}

/// One subdivided edge of a clique: the path joining branch vertices `i < j`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SubdivisionPath {
    pub pair: (usize, usize),
    pub vertices: Vec<VertexId>,
}

/// A subdivided `K_m`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CliqueSubdivision {
    pub order: usize,
    pub branch: Vec<VertexId>,
    pub paths: Vec<SubdivisionPath>,
}

/// Why a path system is not a subdivided clique.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SubdivisionViolation {
    RepeatedBranchVertex { vertex: VertexId },
    PathCount { expected: usize, found: usize },
    BadPair { pair: (usize, usize) },
    DuplicatePair { pair: (usize, usize) },
    WrongEndpoints { pair: (usize, usize) },
    NotAnEdge { pair: (usize, usize), u: VertexId, v: VertexId },
    RepeatedVertex { pair: (usize, usize), vertex: VertexId },
    InteriorHitsBranch { pair: (usize, usize), vertex: VertexId },
    SharedInterior { vertex: VertexId, pairs: [(usize, usize); 2] },
}

/// Checks endpoints, edges, simplicity, and internal disjointness.
pub fn verify_subdivision(g: &dyn Graph, k: &CliqueSubdivision) -> std::result::Result<(), SubdivisionViolation> {
    let m = k.branch.len();
    let branch: BTreeSet<VertexId> = k.branch.iter().copied().collect();
    if branch.len() != m {
        let vertex = k.branch.iter().find(|b| k.branch.iter().filter(|c| c == b).count() > 1).copied().unwrap();
        return Err(SubdivisionViolation::RepeatedBranchVertex { vertex });
    }
    let expected = m * m.saturating_sub(1) / 2;
    if k.paths.len() != expected || k.order != m {
        return Err(SubdivisionViolation::PathCount { expected, found: k.paths.len() });
    }
    let mut pairs = BTreeSet::new();
    let mut owner: BTreeMap<VertexId, (usize, usize)> = BTreeMap::new();
    for p in &k.paths {
        let (i, j) = p.pair;
        if i >= j || j >= m {
            return Err(SubdivisionViolation::BadPair { pair: p.pair });
        }
        if !pairs.insert(p.pair) {
            return Err(SubdivisionViolation::DuplicatePair { pair: p.pair });
        }
        if p.vertices.len() < 2 || p.vertices[0] != k.branch[i] || *p.vertices.last().unwrap() != k.branch[j] {
            return Err(SubdivisionViolation::WrongEndpoints { pair: p.pair });
        }
        if let Some(w) = p.vertices.windows(2).find(|w| !g.is_adjacent(w[0], w[1])) {
            return Err(SubdivisionViolation::NotAnEdge { pair: p.pair, u: w[0], v: w[1] });
        }
        let mut seen = BTreeSet::new();
        for &v in &p.vertices {
            if !seen.insert(v) {
                return Err(SubdivisionViolation::RepeatedVertex { pair: p.pair, vertex: v });
            }
        }
        for &v in &p.vertices[1..p.vertices.len() - 1] {
            if branch.contains(&v) {
                return Err(SubdivisionViolation::InteriorHitsBranch { pair: p.pair, vertex: v });
            }
            if let Some(other) = owner.insert(v, p.pair) {
                return Err(SubdivisionViolation::SharedInterior { vertex: v, pairs: [other, p.pair] });
            }
        }
    }
    Ok(())
}

/// Shortest `from`-`to` path in `g` whose interior satisfies `allowed`;
/// lexicographically smallest among shortest ones.
fn route(g: &FiniteGraph, from: VertexId, to: VertexId, allowed: &dyn Fn(VertexId) -> bool) -> Option<Vec<VertexId>> {
    let mut prev: BTreeMap<VertexId, VertexId> = BTreeMap::new();
    let mut seen = BTreeSet::from([from]);
    let mut queue = VecDeque::from([from]);
    while let Some(u) = queue.pop_front() {
        for &w in g.neighbor_set(u)? {
            if w == to {
                let mut path = vec![to, u];
                let mut cur = u;
                while let Some(&p) = prev.get(&cur) {
                    path.push(p);
                    cur = p;
                }
                path.reverse();
                return Some(path);
            }
            if allowed(w) && seen.insert(w) {
                prev.insert(w, u);
                queue.push_back(w);
            }
        }
    }
    None
}

/// Routes a subdivided clique on the given branch vertices, pairs in
/// lexicographic order. Each path must keep its interior inside `region`,
/// off the branch vertices, and off everything earlier paths used.
pub fn route_subdivision(
    g: &FiniteGraph,
    branch: &[VertexId],
    region: &mut dyn FnMut(VertexId, &BTreeSet<VertexId>) -> bool,
    after_route: &mut dyn FnMut(&[VertexId]),
) -> Evidence<CliqueSubdivision> {
    let m = branch.len();
    let branch_set: BTreeSet<VertexId> = branch.iter().copied().collect();
    let mut used: BTreeSet<VertexId> = BTreeSet::new();
    let mut k = CliqueSubdivision { order: m, branch: branch.to_vec(), paths: Vec::new() };
    for i in 0..m {
        for j in i + 1..m {
            let snapshot = used.clone();
            let allowed: BTreeSet<VertexId> = g
                .vertex_set()
                .filter(|v| !branch_set.contains(v) && !snapshot.contains(v))
                .filter(|&v| region(v, &snapshot))
                .collect();
            match route(g, branch[i], branch[j], &|v| allowed.contains(&v)) {
                Some(path) => {
                    used.extend(path[1..path.len() - 1].iter().copied());
                    after_route(&path);
                    k.paths.push(SubdivisionPath { pair: (i, j), vertices: path });
                }
                None => {
                    let reason = format!("no route between branch vertices {} and {}", branch[i], branch[j]);
                    return Evidence::Insufficient { partial: k, reason };
                }
            }
        }
    }
    Evidence::Verified { evidence: k }
}

/// Builds a subdivided `K_m` whose branch vertices are the `m` lowest chain
/// members.
///
/// Pairs are routed in lexicographic order, each through a fresh region: the
/// component side of the truncation plus ray vertices above every tree vertex
/// used so far, minus every vertex already used.
pub fn build_clique_subdivision(
    g: &dyn Graph,
    tree: &RootedTree,
    chain: &ChainReport,
    m: usize,
    reach: Truncation,
) -> Result<Evidence<CliqueSubdivision>> {
    if m < 2 {
        return Err(Error::InvalidArgument("clique order must be at least 2".into()));
    }
    if chain.len() < m {
        return Err(Error::InvalidArgument(format!("chain has {} members, need {m}", chain.len())));
    }
    let branch = chain.chain[..m].to_vec();
    let mut seeds = chain.ray_prefix.clone();
    seeds.extend(branch.iter().filter_map(|x| chain.witnesses.get(x)).copied());
    let ball = truncation(g, &seeds, reach.radius, reach.degree_cap)?;
    let depth_of = |v: VertexId| tree.depth(v).ok();
    let mut frontier = branch.iter().filter_map(|&b| depth_of(b)).max().unwrap_or(0);
    let floor = std::cell::Cell::new(frontier);
    let mut region = |v: VertexId, _: &BTreeSet<VertexId>| depth_of(v).is_none_or(|d| d > floor.get());
    let mut advance = |path: &[VertexId]| {
        frontier = frontier.max(path.iter().filter_map(|&v| depth_of(v)).max().unwrap_or(0));
        floor.set(frontier);
    };
    let k = route_subdivision(&ball.graph, &branch, &mut region, &mut advance);
    if k.is_verified() {
        verify_subdivision(g, k.inner())
            .map_err(|v| Error::Invariant(format!("routed subdivision fails verification: {v:?}")))?;
    }
    Ok(k)
}

/// Knobs for the full witness pipeline.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct WitnessParams {
    /// Construction budget in scheduler ticks.
    pub budget: u64,
    pub root: VertexId,
    /// Cursor steps for the attachment chain scan.
    pub chain_budget: u64,
    /// Order of the subdivided clique.
    pub m: usize,
    /// Size of fans and of the disjoint `U`-`R` system.
    pub k: usize,
    /// Number of lowest chain vertices to fan from.
    pub fan_centers: usize,
    /// At most this many ray vertices are used above the highest vertex of
    /// interest.
    pub ray_window: usize,
    pub reach: Truncation,
    /// Only uncovered vertices with smaller ids are probed.
    pub region: u64,
}

impl Default for WitnessParams {
    fn default() -> Self {
        WitnessParams {
            budget: 100_000,
            root: VertexId(0),
            chain_budget: 1_000_000,
            m: 4,
            k: 5,
            fan_centers: 3,
            ray_window: 64,
            reach: Truncation::default(),
            region: 100,
        }
    }
}

/// Everything the pipeline found, ready to be written out.
#[derive(Clone, Debug, Serialize)]
pub struct WitnessBundle {
    pub probe: FailureProbe,
    pub tree_size: usize,
    pub chain: ChainReport,
    /// The part of the ray prefix the evidence was computed against.
    pub ray_window: Vec<VertexId>,
    pub fans: Vec<Evidence<DominationFan>>,
    pub high_edges: Vec<Evidence<HighEdgeWitness>>,
    pub inseparability: Evidence<SeparationEvidence>,
    pub subdivision: Option<Evidence<CliqueSubdivision>>,
    pub verified: bool,
    pub shortfalls: Vec<String>,
}

/// Runs build, probe, chain, fans, high-edge probes, inseparability and the
/// clique routing in sequence.
pub fn run_witness(g: &dyn Graph, cover: &CoverAssignment, params: &WitnessParams) -> Result<WitnessBundle> {
    let report = build_budgeted(g, cover, params.budget, params.root)?;
    let probe = region_probe(g, &report, cover, params.region)?;
    let chain = attachment_chain(g, &probe, params.chain_budget)?;
    let mut shortfalls = Vec::new();

    let anchor_count = params.fan_centers.max(params.m).min(chain.len());
    let window_end = if chain.is_empty() {
        0
    } else {
        let top = chain.chain[anchor_count.max(1) - 1];
        let pos = chain.ray_prefix.iter().position(|&r| r == top).expect("chain lies on the ray prefix");
        (pos + 1 + params.ray_window).min(chain.ray_prefix.len())
    };
    let ray_window = chain.ray_prefix[..window_end].to_vec();

    let mut fans = Vec::new();
    for &x in chain.chain.iter().take(params.fan_centers) {
        let f = domination_fan(g, x, &ray_window, params.k, params.reach)?;
        if let Evidence::Insufficient { reason, .. } = &f {
            shortfalls.push(reason.clone());
        }
        fans.push(f);
    }
    if chain.len() < params.fan_centers {
        shortfalls.push(format!("chain has {} members, wanted {} fan centres", chain.len(), params.fan_centers));
    }

    let in_u = |v: VertexId| cover.level(v).is_ok_and(|l| l <= probe.level);
    let mut high_edges = Vec::new();
    if let Some(&x) = chain.chain.first() {
        let pos = ray_window.iter().position(|&r| r == x).unwrap_or(0);
        for pair in ray_window[pos + 1..].windows(2).take(params.k) {
            let w = probe_high_edges(g, &probe.tree, x, &in_u, (pair[0], pair[1]))?;
            if let Evidence::Insufficient { reason, .. } = &w {
                shortfalls.push(reason.clone());
            }
            high_edges.push(w);
        }
    }

    let inseparability = inseparability_evidence(g, &probe, cover, &ray_window, params.k, params.reach)?;
    if let Evidence::Insufficient { reason, .. } = &inseparability {
        shortfalls.push(reason.clone());
    }

    let subdivision = if chain.len() >= params.m && params.m >= 2 {
        let s = build_clique_subdivision(g, &probe.tree, &chain, params.m, params.reach)?;
        if let Evidence::Insufficient { reason, .. } = &s {
            shortfalls.push(reason.clone());
        }
        Some(s)
    } else {
        shortfalls.push(format!("chain has {} members, need {} branch vertices", chain.len(), params.m));
        None
    };

    Ok(WitnessBundle {
        tree_size: probe.tree.len(),
        probe,
        chain,
        ray_window,
        fans,
        high_edges,
        inseparability,
        subdivision,
        verified: shortfalls.is_empty(),
        shortfalls,
    })
}
