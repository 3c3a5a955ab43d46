//! Acceptance suite. Prints one `[PASS]`/`[FAIL]` line per criterion and
//! exits non-zero if any criterion fails.

use std::collections::{BTreeMap, BTreeSet};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use nstree::construct::{build_budgeted, build_budgeted_observed, build_finite, log_from_jsonl, replay};
use nstree::cover::CoverAssignment;
use nstree::families::{make_family, FamilyGraph, FamilySpec};
use nstree::graph::{ball, truncation};
use nstree::separators::{check_path_system, is_separator, max_disjoint_paths, Disjointness};
use nstree::tree::{is_normal, is_normal_bruteforce, BRUTE_FORCE_LIMIT};
use nstree::witness::{
    attachment_chain, build_clique_subdivision, domination_fan, inseparability_evidence, uncovered_probe,
    verify_subdivision, Truncation,
};
use nstree::{FiniteGraph, Graph, RootedTree, VertexId};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn v(id: u64) -> VertexId {
    VertexId(id)
}

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

/// Graph on `0..n` from a bitmask over the pairs `(i, j)`, `i < j`, listed
/// lexicographically.
fn labelled(n: u64, mask: u64) -> FiniteGraph {
    let mut edges = Vec::new();
    let mut bit = 0;
    for i in 0..n {
        for j in i + 1..n {
            if mask >> bit & 1 == 1 {
                edges.push((i, j));
            }
            bit += 1;
        }
    }
    FiniteGraph::from_edges(0..n, edges).unwrap()
}

fn bfs_tree(g: &FiniteGraph, root: VertexId, limit: usize) -> RootedTree {
    let mut t = RootedTree::new(root);
    let mut queue = std::collections::VecDeque::from([root]);
    while let Some(u) = queue.pop_front() {
        for &w in g.neighbor_set(u).unwrap() {
            if t.len() < limit && !t.contains(w) {
                t.add_leaf(u, w).unwrap();
                queue.push_back(w);
            }
        }
    }
    t
}

fn spanning_and_normal(g: &FiniteGraph, cover: &CoverAssignment) -> Result<RootedTree, String> {
    let (tree, report) = build_finite(g, cover).map_err(err)?;
    ensure!(report.spanning && tree.len() == g.len(), "not spanning: {} of {}", tree.len(), g.len());
    for (c, p) in tree.parents() {
        ensure!(g.is_adjacent(*c, *p), "tree edge {p}-{c} missing from graph");
    }
    let normal = is_normal(g, &tree).map_err(err)?;
    ensure!(normal.holds(), "violation {:?}", normal.violation);
    Ok(tree)
}

fn criterion_1() -> Outcome {
    let mut graphs = 0;
    let mut compared = 0;
    for n in 1..=6u64 {
        let pairs = n * (n - 1) / 2;
        for mask in 0..1u64 << pairs {
            let g = labelled(n, mask);
            if !g.is_connected() {
                continue;
            }
            graphs += 1;
            let tree = spanning_and_normal(&g, &CoverAssignment::Singleton).map_err(|e| format!("n={n} mask={mask}: {e}"))?;
            ensure!(is_normal_bruteforce(&g, &tree).map_err(err)?, "n={n} mask={mask}: brute force disagrees");
            // both checkers on trees that need not be normal
            for limit in [n as usize, (n as usize).div_ceil(2)] {
                for root in 0..n {
                    let t = bfs_tree(&g, v(root), limit);
                    let fast = is_normal(&g, &t).map_err(err)?.holds();
                    let slow = is_normal_bruteforce(&g, &t).map_err(err)?;
                    ensure!(fast == slow, "n={n} mask={mask} root={root}: checkers disagree");
                    compared += 1;
                }
            }
        }
    }
    Ok(format!("{graphs} labelled connected graphs (n <= 6) normal and spanning; checkers agree on {compared} further trees"))
}

fn random_connected(rng: &mut ChaCha8Rng, n: usize) -> FiniteGraph {
    let mut ids: Vec<u64> = (0..4 * n as u64).collect();
    ids.shuffle(rng);
    ids.truncate(n);
    let mut g = FiniteGraph::new();
    for &id in &ids {
        g.add_vertex(v(id));
    }
    for i in 1..n {
        let j = rng.gen_range(0..i);
        g.add_edge(v(ids[i]), v(ids[j])).unwrap();
    }
    let density: f64 = rng.gen_range(0.0..0.5);
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(density) {
                g.add_edge(v(ids[i]), v(ids[j])).unwrap();
            }
        }
    }
    g
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0002);
    let mut brute = 0;
    for n in 7..=40usize {
        for round in 0..500 {
            let g = random_connected(&mut rng, n);
            let top = rng.gen_range(1..=n as u64);
            let cover = CoverAssignment::Table(g.vertex_set().map(|w| (w, rng.gen_range(0..top))).collect());
            let tree = spanning_and_normal(&g, &cover).map_err(|e| format!("n={n} round={round}: {e}"))?;
            if n <= BRUTE_FORCE_LIMIT {
                ensure!(is_normal_bruteforce(&g, &tree).map_err(err)?, "n={n} round={round}: brute force disagrees");
                brute += 1;
            }
        }
    }
    Ok(format!("17000 random connected graphs (n = 7..40, random table covers); {brute} also brute-force checked"))
}

/// Every id below 100 that is a vertex.
fn probe_ids(g: &dyn Graph) -> Vec<VertexId> {
    g.vertices().take_while(|w| w.0 < 100).collect()
}

fn criterion_3() -> Outcome {
    let mut lines = Vec::new();
    for spec in ["binary_tree", "grid2d", "komega", "star_of_rays:4"] {
        let g = make_family(spec.parse().unwrap()).unwrap();
        let ids = probe_ids(&g);
        let root = ids[0];
        let mut budget = 64u64;
        let mut runs = 0;
        let mut previous: Option<RootedTree> = None;
        let covered_at = loop {
            ensure!(budget <= 1_000_000, "{spec}: first 100 ids not covered at budget 10^6");
            let mut observe = |state: &nstree::construct::ConstructionState<'_>| -> nstree::Result<()> {
                let tree = state.tree();
                let event = state.log().last().expect("observed after a step");
                let attach: BTreeSet<VertexId> = event.attach.iter().copied().collect();
                if !tree.is_chain(&attach)? {
                    return Err(nstree::Error::Invariant(format!("attachments {attach:?} not a chain")));
                }
                let mut grafted = BTreeSet::new();
                for (i, path) in event.grafts.iter().enumerate() {
                    if i > 0 && !grafted.contains(&path[0]) {
                        return Err(nstree::Error::Invariant(format!("graft {path:?} leaves the grafted subtree")));
                    }
                    grafted.extend(path[1..].iter().copied());
                }
                Ok(())
            };
            let report = build_budgeted_observed(&g, &CoverAssignment::Singleton, budget, root, &mut observe)
                .map_err(|e| format!("{spec} at {budget}: {e}"))?;
            if let Some(prev) = &previous {
                for w in prev.vertices() {
                    ensure!(
                        report.tree.contains(w) && report.tree.parent(w) == prev.parent(w),
                        "{spec}: budget {budget} does not extend the previous run at {w}"
                    );
                }
            }
            let seeds: Vec<VertexId> = report.tree.vertices().collect();
            let local = truncation(&g, &seeds, 1, Some(8)).map_err(err)?;
            let normal = is_normal(&local.graph, &report.tree).map_err(err)?;
            ensure!(normal.holds(), "{spec} at {budget}: {:?}", normal.violation);
            let done = ids.iter().all(|&w| report.tree.contains(w));
            runs += 1;
            previous = Some(report.tree);
            if done {
                break budget;
            }
            budget *= 2;
        };
        lines.push(format!("{spec} at {covered_at} ({runs} nested runs)"));
    }
    Ok(format!("first 100 ids covered: {}", lines.join(", ")))
}

/// A path system check that uses only the host's adjacency oracle.
fn independent_fan_check(g: &dyn Graph, x: VertexId, ray: &BTreeSet<VertexId>, paths: &[Vec<VertexId>]) -> Result<(), String> {
    let mut used = BTreeSet::new();
    for p in paths {
        ensure!(p.first() == Some(&x), "fan path does not start at {x}");
        let end = *p.last().unwrap();
        ensure!(end != x && ray.contains(&end), "fan path ends off the ray at {end}");
        for w in p.windows(2) {
            ensure!(g.is_adjacent(w[0], w[1]), "{}-{} is not an edge", w[0], w[1]);
        }
        for &w in &p[1..] {
            ensure!(used.insert(w), "fan paths meet at {w}");
        }
        for &w in &p[1..p.len() - 1] {
            ensure!(!ray.contains(&w), "fan path touches the ray early at {w}");
        }
    }
    Ok(())
}

fn criterion_4() -> Outcome {
    const CHAIN_MIN: usize = 10;
    const K: usize = 5;
    const M: usize = 4;
    let g = make_family(FamilySpec::KOmega).unwrap();
    let cover = CoverAssignment::Constant(0).avoiding(v(9));
    let reach = Truncation::default();
    let mut chain_lengths = Vec::new();
    for budget in [100_000u64, 200_000] {
        let report = build_budgeted(&g, &cover, budget, v(0)).map_err(err)?;
        ensure!(!report.tree.contains(v(9)), "9 covered at {budget}");
        let probe = uncovered_probe(&g, &report, &cover).map_err(err)?;
        ensure!(probe.rep == v(9) && probe.level == 0, "probe {:?}", (probe.rep, probe.level));
        let chain = attachment_chain(&g, &probe, 10_000_000).map_err(err)?;
        ensure!(chain.len() >= CHAIN_MIN, "chain of {} at {budget}", chain.len());
        for (&x, &y) in &chain.witnesses {
            ensure!(g.is_adjacent(x, y) && !report.tree.contains(y), "bad chain witness {x}->{y}");
        }
        chain_lengths.push(chain.len());

        let window: Vec<VertexId> = chain.ray_prefix.iter().copied().take(64).collect();
        let ray: BTreeSet<VertexId> = window.iter().copied().collect();
        for &x in chain.chain.iter().take(3) {
            let fan = domination_fan(&g, x, &window, K, reach).map_err(err)?;
            ensure!(fan.is_verified(), "fan from {x} at {budget}: {fan:?}");
            let above: BTreeSet<VertexId> = window.iter().copied().skip_while(|&r| r != x).skip(1).collect();
            independent_fan_check(&g, x, &above, &fan.inner().paths)?;
            ensure!(fan.inner().paths.len() >= K, "fan from {x} has {} paths", fan.inner().paths.len());
        }

        let ev = inseparability_evidence(&g, &probe, &cover, &window, K, reach).map_err(err)?;
        ensure!(ev.is_verified(), "inseparability at {budget}: {ev:?}");
        let u: BTreeSet<VertexId> = ev.inner().paths.iter().map(|p| p[0]).collect();
        ensure!(u.len() >= K, "only {} disjoint U-R paths", u.len());
        let local = truncation(&g, &window, 1, Some(64)).map_err(err)?;
        check_path_system(&local.graph, &u, &ray, &ev.inner().paths, Disjointness::Full)?;

        let k = build_clique_subdivision(&g, &probe.tree, &chain, M, reach).map_err(err)?;
        ensure!(k.is_verified(), "K_{M} routing at {budget}: {k:?}");
        let k = k.inner();
        verify_subdivision(&g, k).map_err(|e| format!("{e:?}"))?;
        ensure!(k.paths.len() == M * (M - 1) / 2, "{} paths", k.paths.len());
        ensure!(k.branch.iter().all(|b| chain.chain.contains(b)), "branch vertices off the chain");
    }
    ensure!(chain_lengths[1] > chain_lengths[0], "chain did not grow: {chain_lengths:?}");
    Ok(format!(
        "9 uncovered; chain {} -> {}; 5-fans from 3 lowest chain vertices; 5 disjoint U-R paths; K_4 verified",
        chain_lengths[0], chain_lengths[1]
    ))
}

/// Smallest vertex set in `V - {s, t}` meeting every `s`-`t` path, by
/// enumeration; adjacency as bitmasks.
fn brute_force_separator(n: usize, adj: &[u32], s: usize, t: usize) -> usize {
    let inner: Vec<usize> = (0..n).filter(|&w| w != s && w != t).collect();
    let mut best = inner.len();
    for mask in 0u32..1 << inner.len() {
        let size = mask.count_ones() as usize;
        if size >= best {
            continue;
        }
        let removed: u32 = inner.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &w)| 1 << w).sum();
        let mut reach = 1u32 << s;
        loop {
            let mut next = reach;
            for w in 0..n {
                if reach >> w & 1 == 1 {
                    next |= adj[w] & !removed;
                }
            }
            if next == reach {
                break;
            }
            reach = next;
        }
        if reach >> t & 1 == 0 {
            best = size;
        }
    }
    best
}

fn criterion_5() -> Outcome {
    let mut checked = 0u64;
    let (s, t) = (v(0), v(1));
    for n in 2..=7u64 {
        let pairs = n * (n - 1) / 2;
        // bit 0 is the pair {0, 1}: keep it a non-edge
        for mask in (0..1u64 << pairs).filter(|m| m & 1 == 0) {
            let g = labelled(n, mask);
            let mut adj = vec![0u32; n as usize];
            for (a, b) in g.edges() {
                adj[a.0 as usize] |= 1 << b.0;
                adj[b.0 as usize] |= 1 << a.0;
            }
            let (a, b) = (BTreeSet::from([s]), BTreeSet::from([t]));
            let res = max_disjoint_paths(&g, &a, &b, usize::MAX).map_err(err)?;
            let brute = brute_force_separator(n as usize, &adj, 0, 1);
            ensure!(res.count == brute, "n={n} mask={mask}: {} paths, minimum separator {brute}", res.count);
            check_path_system(&g, &a, &b, &res.paths, Disjointness::Internal)?;
            let sep = res.separator.as_ref().ok_or_else(|| format!("n={n} mask={mask}: no separator"))?;
            ensure!(sep.len() == brute && is_separator(&g, &a, &b, sep), "n={n} mask={mask}: bad separator {sep:?}");
            checked += 1;
        }
    }
    Ok(format!("{checked} labelled graphs (n <= 7) with 0, 1 non-adjacent; flow = brute-force minimum separator"))
}

fn criterion_6() -> Outcome {
    let g: FamilyGraph = make_family(FamilySpec::BinaryTree).unwrap();
    let mut levels_by_radius: BTreeMap<usize, Vec<Vec<VertexId>>> = BTreeMap::new();
    let mut checks = 0;
    for radius in 4..=8usize {
        let local = ball(&g, v(1), radius, None).map_err(err)?;
        let (tree, _) = build_finite(&local.graph, &CoverAssignment::Singleton).map_err(err)?;
        let levels = tree.levels();
        for (i, level) in levels.iter().enumerate().skip(1) {
            let expected: Vec<VertexId> = (1u64 << i..1u64 << (i + 1)).map(v).collect();
            ensure!(*level == expected, "radius {radius}: level {i} is {level:?}");
            let sep: BTreeSet<VertexId> = level.iter().copied().collect();
            let deep: BTreeSet<VertexId> = tree.vertices().filter(|&w| tree.depth(w).unwrap() > i).collect();
            if deep.is_empty() {
                continue;
            }
            ensure!(is_separator(&local.graph, &BTreeSet::from([v(1)]), &deep, &sep), "radius {radius}: level {i} fails");
            let mut short = sep.clone();
            short.pop_first();
            ensure!(!is_separator(&local.graph, &BTreeSet::from([v(1)]), &deep, &short), "level {i} minus a vertex separates");
            checks += 1;
        }
        levels_by_radius.insert(radius, levels);
    }
    let widest = &levels_by_radius[&8];
    for (radius, levels) in &levels_by_radius {
        ensure!(levels[..] == widest[..levels.len()], "levels at radius {radius} differ from radius 8");
    }
    Ok(format!("{checks} level separations on balls of radius 4..8; levels constant across radii"))
}

fn criterion_7() -> Outcome {
    let grid = make_family(FamilySpec::Grid2d).unwrap();
    let komega = make_family(FamilySpec::KOmega).unwrap();
    let adversarial = CoverAssignment::Constant(0).avoiding(v(9));
    let runs: [(&dyn Graph, &CoverAssignment, u64); 2] =
        [(&grid, &CoverAssignment::Singleton, 20_000), (&komega, &adversarial, 20_000)];
    for (g, cover, budget) in runs {
        let first = build_budgeted(g, cover, budget, v(0)).map_err(err)?;
        let second = build_budgeted(g, cover, budget, v(0)).map_err(err)?;
        ensure!(first.tree.to_json() == second.tree.to_json(), "tree JSON differs between runs");
        let log = first.log_jsonl();
        ensure!(log == second.log_jsonl(), "event logs differ between runs");
        let rebuilt = replay(v(0), &log_from_jsonl(&log).map_err(err)?).map_err(err)?;
        ensure!(rebuilt == first.tree, "replay does not reproduce the tree");
    }
    let g = labelled(6, 0b101_1011_0110_1101);
    let (a, _) = build_finite(&g, &CoverAssignment::Singleton).map_err(err)?;
    let (b, report) = build_finite(&g, &CoverAssignment::Singleton).map_err(err)?;
    ensure!(a.to_json() == b.to_json(), "finite builds differ");
    ensure!(replay(a.root(), &report.log).map_err(err)? == a, "finite replay differs");
    Ok("grid2d, adversarial komega and a finite build: byte-identical trees and logs; replay exact".to_string())
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome, Duration); 7] = [
        ("1 exhaustive finite correctness", criterion_1, Duration::from_secs(120)),
        ("2 randomized finite correctness", criterion_2, Duration::from_secs(120)),
        ("3 infinite coverage", criterion_3, Duration::from_secs(300)),
        ("4 failure witness", criterion_4, Duration::from_secs(120)),
        ("5 Menger duality", criterion_5, Duration::from_secs(180)),
        ("6 levels separate", criterion_6, Duration::from_secs(60)),
        ("7 determinism and replay", criterion_7, Duration::from_secs(60)),
    ];
    let mut failed = 0;
    for (name, run, limit) in criteria {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > limit => Err(format!("{detail}; but took {elapsed:.1?}, limit {limit:?}")),
            other => other,
        };
        match outcome {
            Ok(detail) => println!("[PASS] {name}: {detail} ({elapsed:.1?})"),
            Err(why) => {
                failed += 1;
                println!("[FAIL] {name}: {why} ({elapsed:.1?})");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
