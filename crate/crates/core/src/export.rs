//! Graphviz output.

use std::collections::BTreeSet;
use std::fmt::Write;

use crate::graph::{FiniteGraph, VertexId};
use crate::separators::SeparationResult;
use crate::tree::RootedTree;
use crate::witness::WitnessBundle;

/// Tree edges solid, the remaining edges of `g` among tree vertices dashed.
/// Vertices of `g` outside the tree are drawn grey.
pub fn tree_dot(g: &FiniteGraph, tree: &RootedTree) -> String {
    let mut out = String::from("graph tree {\n  node [shape=circle];\n");
    for v in g.vertex_set() {
        if v == tree.root() {
            writeln!(out, "  {v} [style=bold];").unwrap();
        } else if !tree.contains(v) {
            writeln!(out, "  {v} [color=grey, fontcolor=grey];").unwrap();
        }
    }
    for (u, v) in g.edges() {
        let style = if tree.parent(v) == Some(u) || tree.parent(u) == Some(v) { "solid" } else { "dashed" };
        writeln!(out, "  {u} -- {v} [style={style}];").unwrap();
    }
    out.push_str("}\n");
    out
}

/// The snapshot tree, the uncovered rep, the chain, and the subdivision
/// paths; branch vertices are filled.
pub fn witness_dot(tree: &RootedTree, bundle: &WitnessBundle) -> String {
    let mut out = String::from("graph witness {\n  node [shape=circle];\n");
    let branch: BTreeSet<VertexId> = bundle
        .subdivision
        .as_ref()
        .map(|s| s.inner().branch.iter().copied().collect())
        .unwrap_or_default();
    let chain: BTreeSet<VertexId> = bundle.chain.chain.iter().copied().collect();
    let mut shown: BTreeSet<VertexId> = bundle.ray_window.iter().copied().collect();
    shown.extend(&chain);
    shown.insert(bundle.probe.rep);
    if let Some(s) = &bundle.subdivision {
        shown.extend(s.inner().paths.iter().flat_map(|p| p.vertices.iter().copied()));
    }
    for &v in &shown {
        let attrs = if branch.contains(&v) {
            "style=filled, fillcolor=gold"
        } else if v == bundle.probe.rep {
            "shape=doublecircle, color=red"
        } else if chain.contains(&v) {
            "color=blue"
        } else {
            ""
        };
        writeln!(out, "  {v} [{attrs}];").unwrap();
    }
    for &v in &shown {
        if let Some(p) = tree.parent(v).filter(|p| shown.contains(p)) {
            writeln!(out, "  {p} -- {v};").unwrap();
        }
    }
    if let Some(s) = &bundle.subdivision {
        for p in &s.inner().paths {
            for w in p.vertices.windows(2) {
                writeln!(out, "  {} -- {} [color=gold, penwidth=2];", w[0], w[1]).unwrap();
            }
        }
    }
    out.push_str("}\n");
    out
}

/// The graph with `A` and `B` marked, separator vertices boxed, and the
/// disjoint paths drawn bold.
pub fn separation_dot(g: &FiniteGraph, a: &BTreeSet<VertexId>, b: &BTreeSet<VertexId>, res: &SeparationResult) -> String {
    let mut out = String::from("graph separation {\n  node [shape=circle];\n");
    let cut = res.separator.clone().unwrap_or_default();
    for v in g.vertex_set() {
        let mut attrs = Vec::new();
        if cut.contains(&v) {
            attrs.push("shape=box");
        }
        match (a.contains(&v), b.contains(&v)) {
            (true, true) => attrs.push("style=filled, fillcolor=violet"),
            (true, false) => attrs.push("style=filled, fillcolor=lightblue"),
            (false, true) => attrs.push("style=filled, fillcolor=pink"),
            _ => {}
        }
        writeln!(out, "  {v} [{}];", attrs.join(", ")).unwrap();
    }
    let on_path: BTreeSet<(VertexId, VertexId)> = res
        .paths
        .iter()
        .flat_map(|p| p.windows(2).map(|w| (w[0].min(w[1]), w[0].max(w[1]))))
        .collect();
    for (u, v) in g.edges() {
        let style = if on_path.contains(&(u, v)) { " [penwidth=3]" } else { "" };
        writeln!(out, "  {u} -- {v}{style};").unwrap();
    }
    out.push_str("}\n");
    out
}
