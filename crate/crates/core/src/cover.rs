//! Countable covers `V(G) = V_0 ∪ V_1 ∪ ...` given as level functions.
//!
//! A cover answers two questions: the level of a vertex, and a vertex of
//! minimal level inside a component of `G - T`. The second is only computable
//! exactly for the shapes shipped here.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::graph::{component_rep, same_component_avoiding, Avoid, Graph, VertexId};
use crate::tree::RootedTree;

/// Upper bound on candidates an avoiding pick inspects on an infinite host
/// before it gives up and returns the avoided vertex.
const AVOID_SCAN_LIMIT: usize = 100_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CoverAssignment {
    /// `V_n = {n}`: every vertex is its own level.
    Singleton,
    /// Everything on one level.
    Constant(u64),
    /// Explicit levels, for finite hosts. Every vertex must be listed.
    Table(BTreeMap<VertexId, u64>),
    /// Same levels as `inner`, but picks (and neighbour choices) steer clear
    /// of `avoid` whenever the minimality contract allows it.
    Avoiding { inner: Box<CoverAssignment>, avoid: VertexId },
}

impl CoverAssignment {
    pub fn avoiding(self, avoid: VertexId) -> Self {
        CoverAssignment::Avoiding { inner: Box::new(self), avoid }
    }

    pub fn level(&self, v: VertexId) -> Result<u64> {
        match self {
            CoverAssignment::Singleton => Ok(v.0),
            CoverAssignment::Constant(c) => Ok(*c),
            CoverAssignment::Table(t) => t
                .get(&v)
                .copied()
                .ok_or_else(|| Error::InvalidArgument(format!("cover table has no level for {v}"))),
            CoverAssignment::Avoiding { inner, .. } => inner.level(v),
        }
    }

    /// Whether neighbour choices should pass over `v` when they can.
    pub fn shuns(&self, v: VertexId) -> bool {
        matches!(self, CoverAssignment::Avoiding { avoid, .. } if *avoid == v)
    }

    /// Checks that the table covers every vertex of a finite host.
    pub fn check_total(&self, g: &dyn Graph) -> Result<()> {
        match self {
            CoverAssignment::Table(_) if !g.is_finite() => {
                Err(Error::InvalidArgument("table covers need a finite host".into()))
            }
            CoverAssignment::Table(_) => g.vertices().try_for_each(|v| self.level(v).map(drop)),
            CoverAssignment::Avoiding { inner, .. } => inner.check_total(g),
            _ => Ok(()),
        }
    }

    /// A vertex of minimal level in the component of `rep` in `G - T`.
    pub fn pick(&self, g: &dyn Graph, rep: VertexId, tree: &RootedTree) -> Result<VertexId> {
        let min = component_rep(g, rep, Avoid::set(tree))?;
        self.pick_from_min(g, min, tree)
    }

    /// As [`pick`](Self::pick), for a caller that already knows `min`, the
    /// smallest vertex of the component.
    pub fn pick_from_min(&self, g: &dyn Graph, min: VertexId, tree: &RootedTree) -> Result<VertexId> {
        let avoid = Avoid::set(tree);
        match self {
            // the smallest id has the smallest level, and any vertex is minimal
            CoverAssignment::Singleton | CoverAssignment::Constant(_) => Ok(min),
            CoverAssignment::Table(_) => {
                let members = g
                    .component_members(min, avoid)
                    .ok_or_else(|| Error::InvalidArgument("table covers need a finite host".into()))?;
                let mut best = None;
                for &m in &members {
                    let key = (self.level(m)?, m);
                    if best.is_none_or(|b| key < b) {
                        best = Some(key);
                    }
                }
                best.map(|(_, m)| m).ok_or(Error::UnknownVertex(min))
            }
            CoverAssignment::Avoiding { inner, avoid: shunned } => {
                let first = inner.pick_from_min(g, min, tree)?;
                if first != *shunned {
                    return Ok(first);
                }
                let level = inner.level(first)?;
                if let Some(members) = g.component_members(min, avoid) {
                    for &m in &members {
                        if m != *shunned && inner.level(m)? == level {
                            return Ok(m);
                        }
                    }
                    return Ok(first);
                }
                for w in g.vertices().skip_while(|&w| w < min).take(AVOID_SCAN_LIMIT) {
                    if w != *shunned
                        && !tree.contains(w)
                        && inner.level(w)? == level
                        && same_component_avoiding(g, w, min, avoid)?
                    {
                        return Ok(w);
                    }
                }
                Ok(first)
            }
        }
    }

    /// Parses `singleton`, `constant:N` or `table:<json>` where the JSON maps
    /// vertex ids to levels, e.g. `{"0": 1, "1": 0}`.
    pub fn parse_with_table(spec: &str, read_table: impl FnOnce(&str) -> Result<String>) -> Result<Self> {
        match spec.split_once(':') {
            None if spec == "singleton" => Ok(CoverAssignment::Singleton),
            Some(("constant", n)) => n
                .parse()
                .map(CoverAssignment::Constant)
                .map_err(|_| Error::InvalidArgument(format!("bad constant level {n:?}"))),
            Some(("table", src)) => {
                let text = read_table(src)?;
                let raw: BTreeMap<u64, u64> = serde_json::from_str(&text)?;
                Ok(CoverAssignment::Table(raw.into_iter().map(|(v, l)| (VertexId(v), l)).collect()))
            }
            _ => Err(Error::InvalidArgument(format!("unknown cover {spec:?}"))),
        }
    }

    /// `U = ⋃ { V_n : n <= threshold }` restricted to a finite vertex set.
    pub fn up_to_level(&self, vertices: impl IntoIterator<Item = VertexId>, threshold: u64) -> Result<BTreeSet<VertexId>> {
        let mut out = BTreeSet::new();
        for v in vertices {
            if self.level(v)? <= threshold {
                out.insert(v);
            }
        }
        Ok(out)
    }
}

impl FromStr for CoverAssignment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse_with_table(s, |_| Err(Error::InvalidArgument("table covers must be loaded from a file".into())))
    }
}

impl fmt::Display for CoverAssignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoverAssignment::Singleton => write!(f, "singleton"),
            CoverAssignment::Constant(c) => write!(f, "constant:{c}"),
            CoverAssignment::Table(t) => write!(f, "table({} entries)", t.len()),
            CoverAssignment::Avoiding { inner, avoid } => write!(f, "{inner} avoiding {avoid}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{make_family, FamilySpec};
    use crate::graph::FiniteGraph;

    fn v(id: u64) -> VertexId {
        VertexId(id)
    }

    #[test]
    fn singleton_picks_smallest() {
        let g = make_family(FamilySpec::KOmega).unwrap();
        let t = RootedTree::new(v(0));
        assert_eq!(CoverAssignment::Singleton.pick(&g, v(5), &t).unwrap(), v(1));
    }

    #[test]
    fn avoiding_pick_skips_the_avoided_vertex() {
        let g = make_family(FamilySpec::KOmega).unwrap();
        let mut t = RootedTree::new(v(0));
        for i in 1..9 {
            t.add_leaf(v(i - 1), v(i)).unwrap();
        }
        let cover = CoverAssignment::Constant(0).avoiding(v(9));
        assert_eq!(cover.pick(&g, v(9), &t).unwrap(), v(10));
        assert!(cover.shuns(v(9)) && !cover.shuns(v(10)));
        // minimality wins over avoidance: singleton level 9 is the unique minimum
        let strict = CoverAssignment::Singleton.avoiding(v(9));
        assert_eq!(strict.pick(&g, v(9), &t).unwrap(), v(9));
    }

    #[test]
    fn table_pick_is_minimal_level_then_id() {
        let g = FiniteGraph::from_edges(0..4, [(0, 1), (1, 2), (2, 3)]).unwrap();
        let cover = CoverAssignment::Table([(0, 5), (1, 3), (2, 1), (3, 1)].into_iter().map(|(a, b)| (v(a), b)).collect());
        let t = RootedTree::new(v(0));
        assert_eq!(cover.pick(&g, v(1), &t).unwrap(), v(2));
        cover.check_total(&g).unwrap();
        let partial = CoverAssignment::Table([(v(0), 0)].into_iter().collect());
        assert!(partial.check_total(&g).is_err());
        let ko = make_family(FamilySpec::KOmega).unwrap();
        assert!(cover.check_total(&ko).is_err());
    }

    #[test]
    fn parse_specs() {
        assert_eq!("singleton".parse::<CoverAssignment>().unwrap(), CoverAssignment::Singleton);
        assert_eq!("constant:0".parse::<CoverAssignment>().unwrap(), CoverAssignment::Constant(0));
        assert!("table:x.json".parse::<CoverAssignment>().is_err());
        assert!("bogus".parse::<CoverAssignment>().is_err());
        let c = CoverAssignment::parse_with_table("table:t", |_| Ok(r#"{"0":2,"1":0}"#.into())).unwrap();
        assert_eq!(c.level(v(0)).unwrap(), 2);
    }
}
