//! Built-in graph families with exact oracles.
//!
//! Encodings (every family uses natural-number ids):
//!
//! * `path:n`, `cycle:n`, `complete:n` are finite, on `0..n`.
//! * `binary_tree` lives on the positive naturals; `i` has children `2i`, `2i+1`.
//! * `grid2d` is the quarter grid `N x N` with 4-neighbour adjacency; the point
//!   `(x, y)` has the Cantor pairing id `(x+y)(x+y+1)/2 + y`.
//! * `komega` is the complete graph on `N`.
//! * `star_of_rays:k` has centre `0`; position `i` of ray `j < k` is `1 + i*k + j`.
//! * `dominated_ray` has a dominating vertex `0`; ray position `i` is `i + 1`,
//!   and `0` is adjacent to every even ray position.
//! * `comb` has spine position `i` at `2i` and its tooth at `2i + 1`.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::graph::{Avoid, FiniteGraph, Graph, VertexId, VertexIter};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FamilySpec {
    Path(u64),
    Cycle(u64),
    Complete(u64),
    BinaryTree,
    Grid2d,
    KOmega,
    StarOfRays(u64),
    DominatedRay,
    Comb,
}

impl FamilySpec {
    pub fn validate(self) -> Result<Self> {
        let bad = |msg: &str| Err(Error::InvalidFamily(msg.to_string()));
        match self {
            FamilySpec::Path(0) => bad("path needs n >= 1"),
            FamilySpec::Cycle(n) if n < 3 => bad("cycle needs n >= 3"),
            FamilySpec::Complete(0) => bad("complete needs n >= 1"),
            FamilySpec::StarOfRays(0) => bad("star_of_rays needs k >= 1"),
            _ => Ok(self),
        }
    }
}

impl fmt::Display for FamilySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FamilySpec::Path(n) => write!(f, "path:{n}"),
            FamilySpec::Cycle(n) => write!(f, "cycle:{n}"),
            FamilySpec::Complete(n) => write!(f, "complete:{n}"),
            FamilySpec::BinaryTree => write!(f, "binary_tree"),
            FamilySpec::Grid2d => write!(f, "grid2d"),
            FamilySpec::KOmega => write!(f, "komega"),
            FamilySpec::StarOfRays(k) => write!(f, "star_of_rays:{k}"),
            FamilySpec::DominatedRay => write!(f, "dominated_ray"),
            FamilySpec::Comb => write!(f, "comb"),
        }
    }
}

impl FromStr for FamilySpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (s, None),
        };
        let num = || -> Result<u64> {
            let a = arg.ok_or_else(|| Error::InvalidFamily(format!("{name} needs a parameter, e.g. {name}:5")))?;
            a.parse().map_err(|_| Error::InvalidFamily(format!("bad parameter {a:?} for {name}")))
        };
        let no_arg = |spec: FamilySpec| match arg {
            None => Ok(spec),
            Some(a) => Err(Error::InvalidFamily(format!("{name} takes no parameter, got {a:?}"))),
        };
        let spec = match name {
            "path" => FamilySpec::Path(num()?),
            "cycle" => FamilySpec::Cycle(num()?),
            "complete" => FamilySpec::Complete(num()?),
            "star_of_rays" => FamilySpec::StarOfRays(num()?),
            "binary_tree" => no_arg(FamilySpec::BinaryTree)?,
            "grid2d" => no_arg(FamilySpec::Grid2d)?,
            "komega" => no_arg(FamilySpec::KOmega)?,
            "dominated_ray" => no_arg(FamilySpec::DominatedRay)?,
            "comb" => no_arg(FamilySpec::Comb)?,
            _ => return Err(Error::InvalidFamily(format!("unknown family {name:?}"))),
        };
        spec.validate()
    }
}

/// A family member ready for use through the [`Graph`] oracles.
#[derive(Clone, Debug)]
pub struct FamilyGraph {
    spec: FamilySpec,
    finite: Option<FiniteGraph>,
}

pub fn make_family(spec: FamilySpec) -> Result<FamilyGraph> {
    let spec = spec.validate()?;
    let finite = match spec {
        FamilySpec::Path(n) => Some(FiniteGraph::from_edges(0..n, (1..n).map(|i| (i - 1, i)))?),
        FamilySpec::Cycle(n) => Some(FiniteGraph::from_edges(0..n, (0..n).map(|i| (i, (i + 1) % n)))?),
        FamilySpec::Complete(n) => Some(FiniteGraph::from_edges(
            0..n,
            (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))),
        )?),
        _ => None,
    };
    Ok(FamilyGraph { spec, finite })
}

impl FamilyGraph {
    pub fn spec(&self) -> FamilySpec {
        self.spec
    }

    /// The underlying finite graph for `path`, `cycle` and `complete`.
    pub fn as_finite(&self) -> Option<&FiniteGraph> {
        self.finite.as_ref()
    }
}

// --- encodings -------------------------------------------------------------

pub fn grid_id(x: u64, y: u64) -> VertexId {
    let s = x + y;
    VertexId(s * (s + 1) / 2 + y)
}

pub fn grid_coords(v: VertexId) -> (u64, u64) {
    let z = v.0;
    let mut w = ((8 * z as u128 + 1).isqrt() as u64 - 1) / 2;
    // guard against rounding at the boundary of a diagonal
    while w * (w + 1) / 2 > z {
        w -= 1;
    }
    while (w + 1) * (w + 2) / 2 <= z {
        w += 1;
    }
    let y = z - w * (w + 1) / 2;
    (w - y, y)
}

pub const DOMINATOR: VertexId = VertexId(0);

pub fn dominated_ray_vertex(position: u64) -> VertexId {
    VertexId(position + 1)
}

pub fn star_ray_vertex(k: u64, ray: u64, position: u64) -> VertexId {
    VertexId(1 + position * k + ray)
}

pub fn comb_spine(position: u64) -> VertexId {
    VertexId(2 * position)
}

pub fn comb_tooth(position: u64) -> VertexId {
    VertexId(2 * position + 1)
}

fn grid_neighbors(v: VertexId) -> Vec<VertexId> {
    let (x, y) = grid_coords(v);
    let mut out = vec![grid_id(x + 1, y), grid_id(x, y + 1)];
    if x > 0 {
        out.push(grid_id(x - 1, y));
    }
    if y > 0 {
        out.push(grid_id(x, y - 1));
    }
    out.sort();
    out
}

/// Tree-shaped infinite families: parent pointer and depth, root at depth 0.
fn tree_parent(spec: FamilySpec, v: u64) -> Option<u64> {
    match spec {
        FamilySpec::BinaryTree => (v > 1).then_some(v / 2),
        FamilySpec::StarOfRays(k) => match v {
            0 => None,
            _ if v <= k => Some(0),
            _ => Some(v - k),
        },
        FamilySpec::Comb => match v {
            0 => None,
            _ if v % 2 == 1 => Some(v - 1),
            _ => Some(v - 2),
        },
        _ => unreachable!("not a tree family"),
    }
}

fn tree_depth(spec: FamilySpec, v: u64) -> u64 {
    match spec {
        FamilySpec::BinaryTree => 63 - v.leading_zeros() as u64,
        FamilySpec::StarOfRays(k) => match v {
            0 => 0,
            _ => (v - 1) / k + 1,
        },
        FamilySpec::Comb => v / 2 + v % 2,
        _ => unreachable!("not a tree family"),
    }
}

/// In a tree, `u` and `v` stay connected after deleting `F` iff the unique
/// `u`-`v` path avoids `F`.
fn tree_path_avoids(spec: FamilySpec, u: u64, v: u64, avoid: Avoid<'_>) -> bool {
    let (mut a, mut b) = (u, v);
    let (mut da, mut db) = (tree_depth(spec, a), tree_depth(spec, b));
    loop {
        if avoid.contains(VertexId(a)) || avoid.contains(VertexId(b)) {
            return false;
        }
        if a == b {
            return true;
        }
        if da >= db {
            a = tree_parent(spec, a).expect("non-root has a parent");
            da -= 1;
        } else {
            b = tree_parent(spec, b).expect("non-root has a parent");
            db -= 1;
        }
    }
}

/// Connectivity in `N x N - F` by breadth-first search inside the box
/// `[0, m+1]^2`, where `m` is the largest coordinate among `u`, `v` and `F`.
///
/// The box suffices: everything outside `[0, m]^2` is obstacle-free and the
/// layer `{x = m+1 or y = m+1}` inside the box is a connected L-shape, so any
/// `u`-`v` path that leaves `[0, m]^2` can be rerouted along that layer
/// between its first exit and its last re-entry.
fn grid_connected(u: VertexId, v: VertexId, avoid: Avoid<'_>) -> bool {
    let target = grid_coords(v);
    let mut hit = false;
    grid_box_search(u, v, avoid, &mut |p| {
        hit |= p == target;
        hit
    });
    hit
}

/// Smallest id in the component of `v`. Every point outside the box has
/// coordinate sum above `m+1`, hence a larger id than the box point `(m+1, 0)`
/// of the unbounded component, so the box search sees the minimum.
fn grid_component_min(v: VertexId, avoid: Avoid<'_>) -> VertexId {
    let mut min = v;
    grid_box_search(v, v, avoid, &mut |(x, y)| {
        min = min.min(grid_id(x, y));
        false
    });
    min
}

/// Breadth-first search from `start` inside the box `[0, m+1]^2`, where `m`
/// is the largest coordinate among `start`, `other` and `F`. Stops early when
/// `visit` returns true.
fn grid_box_search(start: VertexId, other: VertexId, avoid: Avoid<'_>, visit: &mut dyn FnMut((u64, u64)) -> bool) {
    let m = avoid
        .iter()
        .chain([start, other])
        .map(|w| {
            let (x, y) = grid_coords(w);
            x.max(y)
        })
        .max()
        .unwrap_or(0);
    let side = m + 2;
    let idx = |x: u64, y: u64| (y * side + x) as usize;
    let mut seen = vec![false; (side * side) as usize];
    for w in avoid.iter() {
        let (x, y) = grid_coords(w);
        seen[idx(x, y)] = true;
    }
    let (sx, sy) = grid_coords(start);
    let mut queue = VecDeque::from([(sx, sy)]);
    seen[idx(sx, sy)] = true;
    while let Some((x, y)) = queue.pop_front() {
        if visit((x, y)) {
            return;
        }
        let mut step = |nx: u64, ny: u64| {
            if nx < side && ny < side && !seen[idx(nx, ny)] {
                seen[idx(nx, ny)] = true;
                queue.push_back((nx, ny));
            }
        };
        step(x + 1, y);
        step(x, y + 1);
        if x > 0 {
            step(x - 1, y);
        }
        if y > 0 {
            step(x, y - 1);
        }
    }
}

/// Component key in `dominated_ray - F`.
#[derive(PartialEq, Eq)]
enum RayPiece {
    Hub,
    Segment(u64),
}

fn dominated_ray_piece(v: VertexId, avoid: Avoid<'_>) -> RayPiece {
    if v == DOMINATOR {
        return RayPiece::Hub;
    }
    let pos = v.0 - 1;
    let blocked: BTreeSet<u64> = avoid.iter().filter(|&w| w != DOMINATOR).map(|w| w.0 - 1).collect();
    let lo = blocked.range(..pos).next_back().map_or(0, |b| b + 1);
    let hi = blocked.range(pos + 1..).next().map(|b| b - 1);
    let has_even = lo % 2 == 0 || hi.is_none_or(|h| h > lo);
    if has_even && !avoid.contains(DOMINATOR) {
        RayPiece::Hub
    } else {
        RayPiece::Segment(lo)
    }
}

impl Graph for FamilyGraph {
    fn has_vertex(&self, v: VertexId) -> bool {
        match (&self.finite, self.spec) {
            (Some(g), _) => g.has_vertex(v),
            (None, FamilySpec::BinaryTree) => v.0 >= 1,
            (None, _) => true,
        }
    }

    fn vertices(&self) -> VertexIter<'_> {
        match (&self.finite, self.spec) {
            (Some(g), _) => g.vertices(),
            (None, FamilySpec::BinaryTree) => Box::new((1..).map(VertexId)),
            (None, _) => Box::new((0..).map(VertexId)),
        }
    }

    fn vertex_count(&self) -> Option<usize> {
        self.finite.as_ref().map(FiniteGraph::len)
    }

    fn neighbors(&self, v: VertexId) -> Result<VertexIter<'_>> {
        if let Some(g) = &self.finite {
            return g.neighbors(v);
        }
        if !self.has_vertex(v) {
            return Err(Error::UnknownVertex(v));
        }
        let i = v.0;
        let it: VertexIter<'_> = match self.spec {
            FamilySpec::BinaryTree => {
                let parent = (i > 1).then_some(i / 2);
                let kids = i.checked_mul(2).into_iter().flat_map(|c| [c, c + 1]);
                Box::new(parent.into_iter().chain(kids).map(VertexId))
            }
            FamilySpec::Grid2d => Box::new(grid_neighbors(v).into_iter()),
            FamilySpec::KOmega => Box::new((0..).filter(move |&w| w != i).map(VertexId)),
            FamilySpec::StarOfRays(k) => {
                let list: Vec<u64> = match i {
                    0 => (1..=k).collect(),
                    _ => vec![tree_parent(self.spec, i).unwrap(), i + k],
                };
                Box::new(list.into_iter().map(VertexId))
            }
            FamilySpec::DominatedRay => {
                if v == DOMINATOR {
                    Box::new((0..).map(|p| dominated_ray_vertex(2 * p)))
                } else {
                    let pos = i - 1;
                    let mut list = Vec::new();
                    if pos % 2 == 0 {
                        list.push(DOMINATOR);
                    }
                    if pos > 0 {
                        list.push(dominated_ray_vertex(pos - 1));
                    }
                    list.push(dominated_ray_vertex(pos + 1));
                    Box::new(list.into_iter())
                }
            }
            FamilySpec::Comb => {
                let list: Vec<u64> = if i % 2 == 1 {
                    vec![i - 1]
                } else if i == 0 {
                    vec![1, 2]
                } else {
                    vec![i - 2, i + 1, i + 2]
                };
                Box::new(list.into_iter().map(VertexId))
            }
            FamilySpec::Path(_) | FamilySpec::Cycle(_) | FamilySpec::Complete(_) => unreachable!(),
        };
        Ok(it)
    }

    fn is_adjacent(&self, u: VertexId, v: VertexId) -> bool {
        if let Some(g) = &self.finite {
            return g.is_adjacent(u, v);
        }
        if u == v || !self.has_vertex(u) || !self.has_vertex(v) {
            return false;
        }
        let (a, b) = (u.0.min(v.0), u.0.max(v.0));
        match self.spec {
            FamilySpec::BinaryTree | FamilySpec::StarOfRays(_) | FamilySpec::Comb => {
                tree_parent(self.spec, b) == Some(a)
            }
            FamilySpec::Grid2d => grid_neighbors(u).contains(&v),
            FamilySpec::KOmega => true,
            FamilySpec::DominatedRay => {
                if a == DOMINATOR.0 {
                    (b - 1) % 2 == 0
                } else {
                    b == a + 1
                }
            }
            FamilySpec::Path(_) | FamilySpec::Cycle(_) | FamilySpec::Complete(_) => unreachable!(),
        }
    }

    fn connected_avoiding(&self, u: VertexId, v: VertexId, avoid: Avoid<'_>) -> bool {
        if let Some(g) = &self.finite {
            return g.connected_avoiding(u, v, avoid);
        }
        match self.spec {
            FamilySpec::BinaryTree | FamilySpec::StarOfRays(_) | FamilySpec::Comb => {
                tree_path_avoids(self.spec, u.0, v.0, avoid)
            }
            FamilySpec::Grid2d => grid_connected(u, v, avoid),
            // u and v are adjacent
            FamilySpec::KOmega => true,
            FamilySpec::DominatedRay => dominated_ray_piece(u, avoid) == dominated_ray_piece(v, avoid),
            FamilySpec::Path(_) | FamilySpec::Cycle(_) | FamilySpec::Complete(_) => unreachable!(),
        }
    }

    fn component_members(&self, v: VertexId, avoid: Avoid<'_>) -> Option<BTreeSet<VertexId>> {
        self.finite.as_ref().and_then(|g| g.component_members(v, avoid))
    }

    fn component_min(&self, v: VertexId, avoid: Avoid<'_>) -> Option<VertexId> {
        if self.finite.is_some() {
            return None;
        }
        match self.spec {
            // parents have smaller ids, so the highest reachable ancestor wins
            FamilySpec::BinaryTree | FamilySpec::StarOfRays(_) | FamilySpec::Comb => {
                let mut top = v.0;
                while let Some(p) = tree_parent(self.spec, top).filter(|&p| !avoid.contains(VertexId(p))) {
                    top = p;
                }
                Some(VertexId(top))
            }
            FamilySpec::KOmega => (0..).map(VertexId).find(|&w| !avoid.contains(w)),
            FamilySpec::Grid2d => Some(grid_component_min(v, avoid)),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{ball, component_rep, same_component_avoiding};

    fn v(id: u64) -> VertexId {
        VertexId(id)
    }

    fn family(s: &str) -> FamilyGraph {
        make_family(s.parse().unwrap()).unwrap()
    }

    fn first(g: &FamilyGraph, x: u64, n: usize) -> Vec<u64> {
        g.neighbors(v(x)).unwrap().take(n).map(VertexId::get).collect()
    }


    #[test]
    fn component_min_matches_scan() {
        for name in ["binary_tree", "star_of_rays:3", "comb", "komega", "grid2d"] {
            let g = family(name);
            let ids: Vec<VertexId> = g.vertices().take(14).collect();
            for mask in 0u32..(1 << 8) {
                let avoid: BTreeSet<VertexId> =
                    ids.iter().take(8).enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &w)| w).collect();
                for &u in ids.iter().filter(|u| !avoid.contains(u)) {
                    let scanned = ids
                        .iter()
                        .copied()
                        .take_while(|&w| w < u)
                        .find(|&w| !avoid.contains(&w) && g.connected_avoiding(w, u, Avoid::set(&avoid)))
                        .unwrap_or(u);
                    assert_eq!(g.component_min(u, Avoid::set(&avoid)), Some(scanned), "{name} {u} {avoid:?}");
                }
            }
        }
    }

    #[test]
    fn spec_strings_round_trip() {
        for s in ["path:9", "cycle:4", "complete:5", "binary_tree", "grid2d", "komega", "star_of_rays:4", "dominated_ray", "comb"] {
            assert_eq!(s.parse::<FamilySpec>().unwrap().to_string(), s);
        }
        for bad in ["path:0", "cycle:2", "star_of_rays:0", "path", "komega:3", "torus", "path:x"] {
            assert!(bad.parse::<FamilySpec>().is_err(), "{bad}");
        }
    }

    #[test]
    fn neighbor_examples() {
        assert_eq!(first(&family("komega"), 5, 4), vec![0, 1, 2, 3]);
        assert_eq!(first(&family("binary_tree"), 1, 10), vec![2, 3]);
        assert_eq!(first(&family("star_of_rays:3"), 0, 10), vec![1, 2, 3]);
        assert_eq!(first(&family("dominated_ray"), 0, 4), vec![1, 3, 5, 7]);
        assert_eq!(first(&family("comb"), 4, 10), vec![2, 5, 6]);
        assert!(family("binary_tree").neighbors(v(0)).is_err());
    }

    #[test]
    fn grid_pairing_is_bijective_on_a_prefix() {
        for z in 0..5000 {
            let (x, y) = grid_coords(v(z));
            assert_eq!(grid_id(x, y), v(z));
        }
        assert_eq!(grid_coords(v(0)), (0, 0));
        assert_eq!(grid_id(0, 1), v(2));
        assert_eq!(grid_id(1, 0), v(1));
    }

    #[test]
    fn connectivity_examples() {
        let ko = family("komega");
        let f = BTreeSet::from([v(2), v(3)]);
        assert!(same_component_avoiding(&ko, v(0), v(1), (&f).into()).unwrap());
        let f = BTreeSet::from([v(0), v(1), v(2)]);
        assert!(same_component_avoiding(&ko, v(4), v(9), (&f).into()).unwrap());
        let f = BTreeSet::from([v(0), v(1)]);
        assert_eq!(component_rep(&ko, v(7), (&f).into()).unwrap(), v(2));

        let grid = family("grid2d");
        let f = BTreeSet::from([grid_id(1, 0), grid_id(0, 1)]);
        assert!(!same_component_avoiding(&grid, grid_id(0, 0), grid_id(5, 5), (&f).into()).unwrap());

        let bt = family("binary_tree");
        let f = BTreeSet::from([v(1), v(3)]);
        assert_eq!(component_rep(&bt, v(6), (&f).into()).unwrap(), v(6));
        assert_eq!(component_rep(&bt, v(5), (&f).into()).unwrap(), v(2));
    }

    #[test]
    fn ball_examples() {
        let bt = family("binary_tree");
        assert_eq!(ball(&bt, v(1), 2, None).unwrap().graph.len(), 7);
        let ko = family("komega");
        let b = ball(&ko, v(0), 1, Some(5)).unwrap();
        assert_eq!(b.graph.len(), 6);
        assert!(b.truncated());
        assert_eq!(b.graph.edge_count(), 15);
    }

    #[test]
    fn family_shapes() {
        let star = family("star_of_rays:3");
        assert_eq!(star.neighbors(v(0)).unwrap().count(), 3);
        let dr = family("dominated_ray");
        for p in 0..20 {
            assert_eq!(dr.is_adjacent(DOMINATOR, dominated_ray_vertex(p)), p % 2 == 0);
        }
        assert!(dr.is_adjacent(dominated_ray_vertex(3), dominated_ray_vertex(4)));
        let comb = family("comb");
        assert!(comb.is_adjacent(comb_spine(3), comb_tooth(3)));
        assert!(!comb.is_adjacent(comb_tooth(3), comb_tooth(4)));
    }
}
