//! The greedy construction `T_0 ⊂ T_1 ⊂ ...` of finite (hence rayless) normal
//! trees.
//!
//! Each task names one component `D` of `G - T` by its smallest vertex and
//! asks for `T` to be extended into `D` so as to cover one chosen neighbour
//! `y_x ∈ D` of every attachment vertex `x ∈ N(D)`, plus a vertex `v_D ∈ D` of
//! minimal cover level. One round over all components is not executable when
//! there are infinitely many, so tasks go through a first-in-first-out queue,
//! and components are discovered by advancing every tree vertex's neighbour
//! cursor round-robin.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::cover::CoverAssignment;
use crate::error::{Error, Result};
use crate::extend::extend_normal_in_place;
use crate::graph::{component_rep, Avoid, FiniteGraph, Graph, VertexId, VertexIter};
use crate::tree::RootedTree;

/// Oracle steps granted to a single extension.
pub const DEFAULT_SEARCH_BUDGET: u64 = 50_000_000;

/// One pending extension into the component named by `rep`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtensionTask {
    pub rep: VertexId,
    /// `N(D)` as discovered so far.
    pub attach: BTreeSet<VertexId>,
    /// `x -> y_x`: the smallest discovered neighbour of `x` in `D`.
    pub chosen: BTreeMap<VertexId, VertexId>,
    /// `v_D` and its level `n_D`.
    pub pick: VertexId,
    pub pick_level: u64,
    /// Tree size when the task was first queued.
    pub created_at: usize,
}

impl ExtensionTask {
    pub fn targets(&self) -> BTreeSet<VertexId> {
        self.chosen.values().copied().chain([self.pick]).collect()
    }
}

/// One executed extension, as written to the event log.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepEvent {
    pub tick: u64,
    pub rep: VertexId,
    /// `N(D)` listed bottom-up along the tree-order.
    pub attach: Vec<VertexId>,
    pub grafts: Vec<Vec<VertexId>>,
}

/// What [`ConstructionState::step`] did with the oldest task.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StepOutcome {
    Extended(StepEvent),
    /// The component was already absorbed by earlier extensions.
    Dropped(VertexId),
    Idle,
}

struct Cursor<'g> {
    iter: VertexIter<'g>,
    done: bool,
}

/// The running construction: current tree, task queue, discovery frontier.
pub struct ConstructionState<'g> {
    graph: &'g dyn Graph,
    cover: &'g CoverAssignment,
    tree: RootedTree,
    /// Reps in queue order; the tasks themselves live in `tasks`.
    queue: VecDeque<VertexId>,
    tasks: BTreeMap<VertexId, ExtensionTask>,
    cursors: BTreeMap<VertexId, Cursor<'g>>,
    order: Vec<VertexId>,
    next: usize,
    live: usize,
    rep_cache: BTreeMap<VertexId, VertexId>,
    /// Discovered `(x, y)` pairs with `y` outside the tree, by component rep.
    /// Components only change when a step enters them, so only the entered
    /// group is regrouped afterwards.
    groups: BTreeMap<VertexId, BTreeSet<(VertexId, VertexId)>>,
    /// Groups whose task must be rebuilt.
    dirty: BTreeSet<VertexId>,
    ticks: u64,
    steps: u64,
    dropped: u64,
    log: Vec<StepEvent>,
    search_budget: u64,
}

impl<'g> ConstructionState<'g> {
    pub fn new(graph: &'g dyn Graph, cover: &'g CoverAssignment, root: VertexId) -> Result<Self> {
        if !graph.has_vertex(root) {
            return Err(Error::UnknownVertex(root));
        }
        cover.check_total(graph)?;
        let mut state = ConstructionState {
            graph,
            cover,
            tree: RootedTree::new(root),
            queue: VecDeque::new(),
            tasks: BTreeMap::new(),
            cursors: BTreeMap::new(),
            order: Vec::new(),
            next: 0,
            live: 0,
            rep_cache: BTreeMap::new(),
            groups: BTreeMap::new(),
            dirty: BTreeSet::new(),
            ticks: 0,
            steps: 0,
            dropped: 0,
            log: Vec::new(),
            search_budget: DEFAULT_SEARCH_BUDGET,
        };
        state.open_cursor(root)?;
        Ok(state)
    }

    pub fn with_search_budget(mut self, budget: u64) -> Self {
        self.search_budget = budget;
        self
    }

    pub fn tree(&self) -> &RootedTree {
        &self.tree
    }

    /// Queued tasks, oldest first.
    pub fn queue(&self) -> Vec<&ExtensionTask> {
        self.queue.iter().map(|rep| &self.tasks[rep]).collect()
    }

    pub fn log(&self) -> &[StepEvent] {
        &self.log
    }

    pub fn ticks(&self) -> u64 {
        self.ticks
    }

    pub fn live_cursors(&self) -> usize {
        self.live
    }

    fn open_cursor(&mut self, v: VertexId) -> Result<()> {
        let iter = self.graph.neighbors(v)?;
        self.cursors.insert(v, Cursor { iter, done: false });
        self.order.push(v);
        self.live += 1;
        Ok(())
    }

    /// Advances neighbour cursors round-robin for up to `tick_budget` steps,
    /// then rebuilds the tasks of components that gained pairs or split. Returns the
    /// number of cursor steps taken.
    pub fn discover_tasks(&mut self, tick_budget: u64) -> Result<u64> {
        let mut used = 0;
        let mut found = Vec::new();
        while used < tick_budget && self.live > 0 {
            if self.next == self.order.len() {
                // drop finished cursors once per round; the visiting order is unchanged
                let cursors = &self.cursors;
                self.order.retain(|x| !cursors[x].done);
                self.next = 0;
            }
            let x = self.order[self.next];
            self.next += 1;
            let cursor = self.cursors.get_mut(&x).expect("every tree vertex has a cursor");
            if cursor.done {
                continue;
            }
            match cursor.iter.next() {
                Some(y) if !self.tree.contains(y) => found.push((x, y)),
                Some(_) => {}
                None => {
                    cursor.done = true;
                    self.live -= 1;
                }
            }
            used += 1;
        }
        self.ticks += used;
        self.regroup(found)?;
        self.refresh_tasks()?;
        Ok(used)
    }

    /// The rep of `y`'s component in `G - T`. Components only shrink as the
    /// tree grows, so a cached rep stays valid while it is outside the tree
    /// and still connected to `y`, and a new rep is never smaller.
    fn rep_of(&mut self, y: VertexId, fresh: &mut Vec<VertexId>) -> Result<VertexId> {
        let avoid = Avoid::set(&self.tree);
        let old = self.rep_cache.get(&y).copied();
        if let Some(r) = old {
            if !self.tree.contains(r) && (r == y || self.graph.connected_avoiding(r, y, avoid)) {
                return Ok(r);
            }
        }
        let rep = if let Some(&k) = fresh.iter().find(|&&k| k == y || self.graph.connected_avoiding(k, y, avoid)) {
            k
        } else if let Some(min) = self.graph.component_min(y, avoid) {
            min
        } else if self.graph.component_members(y, avoid).is_some() {
            component_rep(self.graph, y, avoid)?
        } else {
            let start = old.unwrap_or(VertexId(0));
            let mut found = y;
            for w in self.graph.vertices().skip_while(|&w| w < start) {
                if w >= y {
                    break;
                }
                if !avoid.contains(w) && self.graph.connected_avoiding(w, y, avoid) {
                    found = w;
                    break;
                }
            }
            found
        };
        if !fresh.contains(&rep) {
            fresh.push(rep);
        }
        self.rep_cache.insert(y, rep);
        Ok(rep)
    }

    /// Files `(x, y)` pairs under the current rep of `y`'s component.
    fn regroup(&mut self, pairs: impl IntoIterator<Item = (VertexId, VertexId)>) -> Result<()> {
        let mut fresh = Vec::new();
        for (x, y) in pairs {
            if self.tree.contains(y) {
                continue;
            }
            let rep = self.rep_of(y, &mut fresh)?;
            self.groups.entry(rep).or_default().insert((x, y));
            self.dirty.insert(rep);
        }
        Ok(())
    }

    fn make_task(&self, rep: VertexId, pairs: &[(VertexId, VertexId)]) -> Result<ExtensionTask> {
        let attach: BTreeSet<VertexId> = pairs.iter().map(|&(x, _)| x).collect();
        let mut chosen: BTreeMap<VertexId, VertexId> = BTreeMap::new();
        for &(x, y) in pairs {
            if self.cover.shuns(y) {
                continue;
            }
            chosen.entry(x).and_modify(|c| *c = (*c).min(y)).or_insert(y);
        }
        let pick = self.cover.pick_from_min(self.graph, rep, &self.tree)?;
        Ok(ExtensionTask {
            rep,
            attach,
            chosen,
            pick,
            pick_level: self.cover.level(pick)?,
            created_at: self.tree.len(),
        })
    }

    fn refresh_tasks(&mut self) -> Result<()> {
        for rep in std::mem::take(&mut self.dirty) {
            let Some(group) = self.groups.get(&rep) else { continue };
            let pairs: Vec<_> = group.iter().copied().collect();
            let task = self.make_task(rep, &pairs)?;
            match self.tasks.get_mut(&rep) {
                Some(slot) => {
                    let created_at = slot.created_at;
                    *slot = ExtensionTask { created_at, ..task };
                }
                None => {
                    self.queue.push_back(rep);
                    self.tasks.insert(rep, task);
                }
            }
        }
        Ok(())
    }

    /// Pops the oldest task, revalidates it against the current tree and
    /// extends the tree into its component.
    pub fn step(&mut self) -> Result<StepOutcome> {
        let Some(rep) = self.queue.pop_front() else {
            return Ok(StepOutcome::Idle);
        };
        let task = self.tasks.remove(&rep).expect("queued reps have tasks");
        self.ticks += 1;
        if self.tree.contains(task.rep) {
            self.dropped += 1;
            return Ok(StepOutcome::Dropped(task.rep));
        }
        let pairs: Vec<_> = self.groups.get(&task.rep).into_iter().flatten().copied().collect();
        let task = ExtensionTask { created_at: task.created_at, ..self.make_task(task.rep, &pairs)? };

        let attach = self.tree.sort_chain(&task.attach).map_err(|e| match e {
            Error::NotAChain(a, b) => {
                Error::Invariant(format!("N(D) for component {} is not a chain: {a}, {b}", task.rep))
            }
            other => other,
        })?;
        let (grafts, _) =
            extend_normal_in_place(self.graph, &mut self.tree, task.rep, &task.targets(), self.search_budget)?;
        let entered = self.groups.remove(&task.rep).unwrap_or_default();
        self.regroup(entered)?;
        for path in &grafts {
            for &w in &path[1..] {
                self.open_cursor(w)?;
            }
        }
        self.steps += 1;
        let event = StepEvent { tick: self.ticks, rep: task.rep, attach, grafts };
        self.log.push(event.clone());
        Ok(StepOutcome::Extended(event))
    }

    /// Reps of the components met by discovered neighbours, ascending.
    pub fn pending(&self) -> Vec<VertexId> {
        self.groups.keys().copied().collect()
    }

    fn report(self, spanning_possible: bool) -> Result<BuildReport> {
        let pending = self.pending();
        let spanning = spanning_possible
            && self.graph.vertex_count() == Some(self.tree.len())
            && pending.is_empty()
            && self.live == 0;
        let mut notices = Vec::new();
        if self.dropped > 0 {
            notices.push(format!("{} absorbed tasks dropped on revalidation", self.dropped));
        }
        if !self.graph.is_finite() {
            notices.push("infinite host: coverage is a finite-budget snapshot".to_string());
        }
        Ok(BuildReport {
            tree: self.tree,
            spanning,
            pending,
            ticks: self.ticks,
            steps: self.steps,
            dropped_tasks: self.dropped,
            notices,
            log: self.log,
        })
    }
}

/// Outcome of a construction run.
#[derive(Clone, Debug)]
pub struct BuildReport {
    pub tree: RootedTree,
    pub spanning: bool,
    /// Reps of components still waiting to be entered.
    pub pending: Vec<VertexId>,
    /// Scheduler ticks spent.
    pub ticks: u64,
    pub steps: u64,
    pub dropped_tasks: u64,
    pub notices: Vec<String>,
    pub log: Vec<StepEvent>,
}

impl BuildReport {
    pub fn covered(&self) -> BTreeSet<VertexId> {
        self.tree.vertex_set()
    }

    pub fn verdict(&self) -> String {
        if self.spanning {
            format!("spanning: normal spanning tree on {} vertices", self.tree.len())
        } else {
            let shown: Vec<String> = self.pending.iter().take(10).map(ToString::to_string).collect();
            let more = if self.pending.len() > 10 { ", ..." } else { "" };
            format!(
                "not spanning: {} vertices covered after {} ticks; pending components [{}{}]",
                self.tree.len(),
                self.ticks,
                shown.join(", "),
                more
            )
        }
    }

    pub fn log_jsonl(&self) -> String {
        log_to_jsonl(&self.log)
    }
}

/// Builds a normal spanning tree of a finite connected graph, rooted at its
/// smallest vertex.
pub fn build_finite(g: &FiniteGraph, cover: &CoverAssignment) -> Result<(RootedTree, BuildReport)> {
    let root = g
        .vertex_set()
        .next()
        .ok_or_else(|| Error::InvalidGraph("empty graph".into()))?;
    if let Some(unreachable) = g.unreachable_from(root) {
        return Err(Error::Disconnected { root, unreachable });
    }
    let mut state = ConstructionState::new(g, cover, root)?;
    loop {
        state.discover_tasks(u64::MAX)?;
        if state.queue.is_empty() {
            break;
        }
        state.step()?;
    }
    let report = state.report(true)?;
    if !report.spanning {
        return Err(Error::Invariant(format!(
            "finite build stopped with {} of {} vertices",
            report.tree.len(),
            g.len()
        )));
    }
    Ok((report.tree.clone(), report))
}

/// Runs the construction for `budget` scheduler ticks: each tick advances one
/// neighbour cursor or executes one task. A full round-robin pass over the
/// tree's cursors alternates with one task.
pub fn build_budgeted(g: &dyn Graph, cover: &CoverAssignment, budget: u64, root: VertexId) -> Result<BuildReport> {
    build_budgeted_observed(g, cover, budget, root, &mut |_| Ok(()))
}

/// As [`build_budgeted`], calling `observe` after every executed task.
pub fn build_budgeted_observed(
    g: &dyn Graph,
    cover: &CoverAssignment,
    budget: u64,
    root: VertexId,
    observe: &mut dyn FnMut(&ConstructionState<'_>) -> Result<()>,
) -> Result<BuildReport> {
    let mut state = ConstructionState::new(g, cover, root)?;
    while state.ticks < budget {
        if state.live == 0 && state.queue.is_empty() {
            break;
        }
        let slice = (state.live.max(1) as u64).min(budget - state.ticks);
        state.discover_tasks(slice)?;
        if state.ticks >= budget {
            break;
        }
        if let StepOutcome::Extended(_) = state.step()? {
            observe(&state)?;
        }
    }
    state.report(true)
}

/// Rebuilds the tree from its root and an event log.
pub fn replay(root: VertexId, log: &[StepEvent]) -> Result<RootedTree> {
    let mut tree = RootedTree::new(root);
    for event in log {
        for path in &event.grafts {
            tree.graft(path)?;
        }
    }
    Ok(tree)
}

/// One JSON object per line: `{"tick":..,"rep":..,"attach":[..],"grafts":[[..]]}`.
pub fn log_to_jsonl(log: &[StepEvent]) -> String {
    let mut out = String::new();
    for event in log {
        out.push_str(&serde_json::to_string(event).expect("event serialization is infallible"));
        out.push('\n');
    }
    out
}

pub fn log_from_jsonl(text: &str) -> Result<Vec<StepEvent>> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(Error::from))
        .collect()
}
