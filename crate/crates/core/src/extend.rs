//! Finite extension of a normal tree into one component of `G - T`.
//!
//! Targets are covered one at a time in ascending id order. For a target `x`
//! in the component `D'` of `G - T'`, the new branch is a shortest path from
//! the top of the chain `N(D')` to `x` through `D'`. Since every old
//! attachment point of `D'` lies below the anchor, the grafted vertices are
//! comparable with all of them, and any later `T'`-path leaving a grafted
//! vertex comes back into `N(D')`, so normality survives each graft.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::error::{Error, Result};
use crate::graph::{same_component_avoiding, Avoid, Graph, VertexId};
use crate::tree::RootedTree;

/// A normal extension `T' ⊇ T` together with the paths grafted to build it.
#[derive(Clone, Debug)]
pub struct Extension {
    pub tree: RootedTree,
    /// Each path starts at a vertex already in the tree when it was grafted.
    pub grafts: Vec<Vec<VertexId>>,
    /// Oracle steps spent by the path searches.
    pub steps: u64,
}

impl Extension {
    pub fn new_vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.grafts.iter().flat_map(|p| p[1..].iter().copied())
    }
}

/// Extends the normal tree `tree` inside the component of `G - T` named by
/// `d_rep` until every vertex of `targets` is covered.
///
/// The grafts into one component always form a single subtree: after the
/// first graft, the rest of the component is only attached to the grafted
/// part from above, so each later anchor is a grafted vertex. This keeps
/// `D ∩ T'` connected, and is checked on every call.
pub fn extend_normal(
    g: &dyn Graph,
    tree: &RootedTree,
    d_rep: VertexId,
    targets: &BTreeSet<VertexId>,
    search_budget: u64,
) -> Result<Extension> {
    let mut out = tree.clone();
    let (grafts, steps) = extend_normal_in_place(g, &mut out, d_rep, targets, search_budget)?;
    Ok(Extension { tree: out, grafts, steps })
}

/// As [`extend_normal`], growing `tree` itself and returning the grafts and
/// the oracle steps spent. Arguments are validated before anything changes;
/// if the search budget runs out midway, the grafts made so far stay (each
/// one keeps the tree normal).
pub fn extend_normal_in_place(
    g: &dyn Graph,
    tree: &mut RootedTree,
    d_rep: VertexId,
    targets: &BTreeSet<VertexId>,
    search_budget: u64,
) -> Result<(Vec<Vec<VertexId>>, u64)> {
    if tree.contains(d_rep) {
        return Err(Error::AvoidedVertex(d_rep));
    }
    for &x in targets {
        if tree.contains(x) || !same_component_avoiding(g, x, d_rep, Avoid::set(&*tree))? {
            return Err(Error::OutsideComponent { target: x, rep: d_rep });
        }
    }

    let mut grafts: Vec<Vec<VertexId>> = Vec::new();
    let mut grafted: BTreeSet<VertexId> = BTreeSet::new();
    let mut budget = Budget { left: search_budget, total: search_budget };

    for &x in targets {
        if tree.contains(x) {
            continue;
        }
        let anchor = top_attachment(g, tree, x, &mut budget)?;
        if !grafts.is_empty() && !grafted.contains(&anchor) {
            return Err(Error::Invariant(format!(
                "component of {d_rep}: graft for {x} anchors at {anchor}, outside the grafted subtree"
            )));
        }
        let path = connect(g, tree, anchor, x, &mut budget)?;
        tree.graft(&path)?;
        grafted.extend(path[1..].iter().copied());
        grafts.push(path);
    }

    Ok((grafts, search_budget - budget.left))
}

/// The top of the chain `N(D')`, where `D'` is the component of `x` in `G - T`.
fn top_attachment(g: &dyn Graph, tree: &RootedTree, x: VertexId, budget: &mut Budget) -> Result<VertexId> {
    let not_a_chain = |e| match e {
        Error::NotAChain(a, b) => Error::Invariant(format!("N(D) of {x} is not a chain: {a}, {b}")),
        other => other,
    };
    if let Some(members) = g.component_members(x, Avoid::set(tree)) {
        let attach: BTreeSet<VertexId> = tree
            .vertices()
            .filter(|&t| members.iter().any(|&m| g.is_adjacent(t, m)))
            .collect();
        if attach.is_empty() {
            return Err(Error::NoAttachment(x));
        }
        return tree.chain_max(&attach).map_err(not_a_chain);
    }
    // Any attachment `a` is comparable with the top, so the top lies in the
    // uptree of `a`. A tree vertex `t` has a neighbour in D' iff `t` and `x`
    // are connected once the rest of the tree is removed.
    let a = some_attachment(g, tree, x, budget)?;
    let mut attach = BTreeSet::from([a]);
    for t in tree.uptree(a)? {
        if t != a && g.connected_avoiding(t, x, Avoid::all_but(tree, t)) {
            attach.insert(t);
        }
    }
    tree.chain_max(&attach).map_err(not_a_chain)
}

/// A tree vertex adjacent to the component of `x`, found by breadth-first
/// search from `x` with a doubling bound on depth and neighbours per vertex.
fn some_attachment(g: &dyn Graph, tree: &RootedTree, x: VertexId, budget: &mut Budget) -> Result<VertexId> {
    let mut bound = 1usize;
    loop {
        let mut seen = BTreeSet::from([x]);
        let mut queue = VecDeque::from([(x, 0usize)]);
        let mut truncated = false;
        while let Some((w, d)) = queue.pop_front() {
            let mut cursor = g.neighbors(w)?;
            for _ in 0..bound {
                let Some(n) = cursor.next() else { break };
                budget.spend(x)?;
                if tree.contains(n) {
                    return Ok(n);
                }
                if d + 1 < bound && seen.insert(n) {
                    queue.push_back((n, d + 1));
                } else if d + 1 >= bound {
                    truncated = true;
                }
            }
            if cursor.next().is_some() {
                truncated = true;
            }
        }
        if !truncated {
            return Err(Error::NoAttachment(x));
        }
        bound *= 2;
    }
}

struct Budget {
    left: u64,
    total: u64,
}

impl Budget {
    fn spend(&mut self, target: VertexId) -> Result<()> {
        if self.left == 0 {
            return Err(Error::BudgetExhausted { target, budget: self.total });
        }
        self.left -= 1;
        Ok(())
    }
}

enum Search {
    Found(Vec<VertexId>),
    /// The bound cut the search short somewhere.
    Truncated,
    /// Everything reachable was explored.
    Exhausted,
}

/// A path `from ... to` whose interior avoids the tree.
///
/// Bounded breadth-first search, doubling the bound: at bound `b` only paths
/// of at most `b` interior vertices are explored and each vertex contributes
/// only its first `b` neighbours, so infinite neighbourhoods cannot stall the
/// search. The last hop is tested with the adjacency oracle directly. Within
/// the explored region the result is shortest, and lexicographically smallest
/// among shortest ones.
fn connect(g: &dyn Graph, tree: &RootedTree, from: VertexId, to: VertexId, budget: &mut Budget) -> Result<Vec<VertexId>> {
    let mut bound = 1usize;
    loop {
        match bounded_search(g, tree, from, to, bound, budget)? {
            Search::Found(p) => return Ok(p),
            Search::Truncated => bound *= 2,
            Search::Exhausted => {
                return Err(Error::Invariant(format!("no path from {from} to {to} outside the tree")));
            }
        }
    }
}

fn bounded_search(
    g: &dyn Graph,
    tree: &RootedTree,
    from: VertexId,
    to: VertexId,
    bound: usize,
    budget: &mut Budget,
) -> Result<Search> {
    let mut prev: BTreeMap<VertexId, VertexId> = BTreeMap::new();
    let mut dist: BTreeMap<VertexId, usize> = BTreeMap::from([(from, 0)]);
    let mut queue = VecDeque::from([from]);
    let mut truncated = false;
    while let Some(w) = queue.pop_front() {
        budget.spend(to)?;
        if g.is_adjacent(w, to) {
            let mut path = vec![to, w];
            let mut cur = w;
            while let Some(&p) = prev.get(&cur) {
                path.push(p);
                cur = p;
            }
            path.reverse();
            return Ok(Search::Found(path));
        }
        let d = dist[&w];
        if d == bound {
            truncated = true;
            continue;
        }
        let mut cursor = g.neighbors(w)?;
        for _ in 0..bound {
            let Some(n) = cursor.next() else { break };
            budget.spend(to)?;
            if n == to || tree.contains(n) || dist.contains_key(&n) {
                continue;
            }
            dist.insert(n, d + 1);
            prev.insert(n, w);
            queue.push_back(n);
        }
        if cursor.next().is_some() {
            truncated = true;
        }
    }
    Ok(if truncated { Search::Truncated } else { Search::Exhausted })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{grid_id, make_family, FamilySpec};
    use crate::graph::{truncation, FiniteGraph};
    use crate::tree::{is_normal, is_normal_bruteforce};

    fn v(id: u64) -> VertexId {
        VertexId(id)
    }

    fn set(ids: &[u64]) -> BTreeSet<VertexId> {
        ids.iter().copied().map(v).collect()
    }

    #[test]
    fn path_extends_along_unique_path() {
        let g = make_family(FamilySpec::Path(5)).unwrap();
        let ext = extend_normal(&g, &RootedTree::new(v(0)), v(1), &set(&[4]), 1000).unwrap();
        assert_eq!(ext.tree.path_from_root(v(4)).unwrap(), vec![v(0), v(1), v(2), v(3), v(4)]);
        assert_eq!(ext.grafts, vec![vec![v(0), v(1), v(2), v(3), v(4)]]);
    }

    #[test]
    fn komega_targets_stay_comparable() {
        let g = make_family(FamilySpec::KOmega).unwrap();
        let ext = extend_normal(&g, &RootedTree::new(v(0)), v(1), &set(&[3, 7]), 1000).unwrap();
        let t = &ext.tree;
        assert_eq!(t.parent(v(3)), Some(v(0)));
        assert_eq!(t.parent(v(7)), Some(v(3)));
        assert!(t.is_chain(&set(&[0, 3, 7])).unwrap());
        // the 8-vertex truncation is K_8
        let ball = truncation(&g, &[v(0)], 1, Some(7)).unwrap();
        assert_eq!(ball.graph.len(), 8);
        assert!(is_normal_bruteforce(&ball.graph, t).unwrap());
    }

    #[test]
    fn grid_graft_stays_in_component() {
        let g = make_family(FamilySpec::Grid2d).unwrap();
        let mut t = RootedTree::new(grid_id(0, 0));
        t.add_leaf(grid_id(0, 0), grid_id(0, 1)).unwrap();
        let target = BTreeSet::from([grid_id(2, 0)]);
        let rep = crate::graph::component_rep(&g, grid_id(2, 0), Avoid::set(&t)).unwrap();
        let ext = extend_normal(&g, &t, rep, &target, 10_000).unwrap();
        assert!(ext.tree.contains(grid_id(2, 0)));
        for w in ext.new_vertices() {
            assert!(same_component_avoiding(&g, w, rep, Avoid::set(&t)).unwrap());
        }
        let seeds: Vec<_> = ext.tree.vertices().collect();
        let ball = truncation(&g, &seeds, 4, None).unwrap();
        assert!(is_normal(&ball.graph, &ext.tree).unwrap().holds());
    }

    #[test]
    fn target_outside_component_is_rejected() {
        let g = make_family(FamilySpec::Path(5)).unwrap();
        let mut t = RootedTree::new(v(2));
        t.add_leaf(v(2), v(3)).unwrap();
        let err = extend_normal(&g, &t, v(0), &set(&[4]), 1000).unwrap_err();
        assert!(matches!(err, Error::OutsideComponent { .. }));
        let err = extend_normal(&g, &t, v(0), &set(&[3]), 1000).unwrap_err();
        assert!(matches!(err, Error::OutsideComponent { .. }));
    }

    #[test]
    fn tiny_budget_is_reported() {
        let g = make_family(FamilySpec::Path(9)).unwrap();
        let err = extend_normal(&g, &RootedTree::new(v(0)), v(1), &set(&[8]), 3).unwrap_err();
        assert!(matches!(err, Error::BudgetExhausted { .. }));
    }

    #[test]
    fn grafts_form_one_subtree_in_the_component() {
        // a cycle with a pendant: several targets in one component
        let g = FiniteGraph::from_edges(0..7, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0), (3, 6)]).unwrap();
        let ext = extend_normal(&g, &RootedTree::new(v(0)), v(1), &set(&[1, 3, 5, 6]), 10_000).unwrap();
        assert!(is_normal(&g, &ext.tree).unwrap().holds());
        assert!(is_normal_bruteforce(&g, &ext.tree).unwrap());
        let inside: BTreeSet<_> = ext.new_vertices().collect();
        let reach = g.induced(&inside).reach(ext.grafts[0][1], Avoid::nothing());
        assert_eq!(reach, inside);
    }
}
