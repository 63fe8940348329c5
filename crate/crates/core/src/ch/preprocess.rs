//! Node contraction: priority-driven independent-set contraction with
//! precomputed stored shortcuts and loop handling.

use std::collections::BTreeSet;

use rayon::prelude::*;

use crate::conn::{link_edges, minimum_connections, Connection, EdgeConnectionSet};
use crate::graph::StationGraph;
use crate::timetable::StationId;

use super::witness::{
    backward_witness_profiles, forward_witness_profiles, shortcut_needed, WitnessCtx,
};
use super::{ContractionParams, Hierarchy, StoredShortcut};

/// Hooks for tests and instrumentation; all calls happen on the serial path.
pub trait ContractionObserver {
    /// After every contraction round, with the augmented graph so far and
    /// the contracted flags.
    fn on_round(&mut self, _round: usize, _g: &StationGraph, _contracted: &[bool]) {}
    /// A candidate shortcut connection was omitted because a witness
    /// dominates it.
    fn on_omission(&mut self, _candidate: &Connection, _witness: &Connection) {}
}

pub struct NoObserver;
impl ContractionObserver for NoObserver {}

/// Priority of contracting a node: ten times the edge quotient (shortcuts
/// added per edge removed) plus the hierarchy depth.
pub fn node_priority(shortcuts_added: u32, edges_removed: u32, depth: u32) -> f64 {
    let quotient = if edges_removed == 0 {
        0.0
    } else {
        shortcuts_added as f64 / edges_removed as f64
    };
    10.0 * quotient + depth as f64
}

/// The nodes whose priority is minimal within their 2-neighborhood of the
/// remaining graph, ties broken by station id. Any two selected nodes are at
/// least three hops apart.
pub fn select_contraction_set(
    g: &StationGraph,
    contracted: &[bool],
    priorities: &[f64],
) -> Vec<StationId> {
    let mut out = Vec::new();
    for v in 0..g.node_count() as u32 {
        let v = StationId(v);
        if contracted[v.index()] {
            continue;
        }
        let mine = (priorities[v.index()], v.0);
        let minimal = two_neighborhood(g, contracted, v)
            .into_iter()
            .all(|y| y == v || mine < (priorities[y.index()], y.0));
        if minimal {
            out.push(v);
        }
    }
    out
}

fn neighbors(g: &StationGraph, contracted: &[bool], v: StationId) -> Vec<StationId> {
    let mut n: Vec<StationId> = g
        .out_neighbors(v)
        .chain(g.in_neighbors(v))
        .filter(|s| !contracted[s.index()] && *s != v)
        .collect();
    n.sort();
    n.dedup();
    n
}

fn two_neighborhood(g: &StationGraph, contracted: &[bool], v: StationId) -> Vec<StationId> {
    let mut seen = vec![v];
    for n in neighbors(g, contracted, v) {
        seen.push(n);
        seen.extend(neighbors(g, contracted, n));
    }
    seen.sort();
    seen.dedup();
    seen
}

/// The connections a shortcut `(u, w)` over `v` must carry: the links of the
/// two edges, merged with the variant that rides a loop at `v` in between.
fn candidate_connections(
    g: &StationGraph,
    u: StationId,
    v: StationId,
    w: StationId,
) -> Option<EdgeConnectionSet> {
    let tt = g.timetable();
    let e_uv = g.edge(u, v)?;
    let e_vw = g.edge(v, w)?;
    let combined = match g.edge(v, v) {
        Some(lp) => {
            // Rides of a loop at `v` can chain (a train may revisit `v`
            // through several contracted neighbors), so close the incoming
            // edge under loop-appending before linking onward. The closure
            // reaches a fixpoint because only non-dominated rides survive.
            let mut reach = e_uv.clone();
            loop {
                let lapped = link_edges(&reach, lp, tt);
                let next = minimum_connections(&reach, &lapped, tt);
                if next == reach {
                    break;
                }
                reach = next;
            }
            link_edges(&reach, e_vw, tt)
        }
        None => link_edges(e_uv, e_vw, tt),
    };
    (!combined.is_empty()).then_some(combined)
}

/// One necessity decision: the pair, whether a shortcut is needed, and the
/// omission witnesses when it is not.
struct Decision {
    at: StationId,
    pair: StoredShortcut,
    needed: bool,
    omissions: Vec<(Connection, Connection)>,
}

/// Decides all pairs `(u, w)` over the given middle nodes with one forward
/// witness search from `u`.
fn forward_decisions(ctx: &WitnessCtx, u: StationId, middles: &[StationId]) -> Vec<Decision> {
    let tt = ctx.g.timetable();
    let mut cands: Vec<(StationId, StationId, EdgeConnectionSet)> = Vec::new();
    for &v in middles {
        // a shortcut pair connects two neighbors of the contracted middle;
        // the loop edge only ever sits between them
        if v == u || ctx.contracted[v.index()] || ctx.g.edge(u, v).is_none() {
            continue;
        }
        for (w, _) in ctx.g.out_edges(v) {
            if w == v || ctx.contracted[w.index()] {
                continue;
            }
            if let Some(set) = candidate_connections(ctx.g, u, v, w) {
                cands.push((v, w, set));
            }
        }
    }
    if cands.is_empty() {
        return Vec::new();
    }
    let bound =
        cands.iter().map(|(_, _, s)| s.max_len()).max().unwrap() + ctx.params.duration_slack;
    let witnesses = forward_witness_profiles(ctx, u, bound);
    cands
        .into_iter()
        .map(|(v, w, set)| {
            let (needed, omissions) = shortcut_needed(&set, &witnesses[w.index()], tt);
            Decision {
                at: v,
                pair: StoredShortcut { from: u, to: w },
                needed,
                omissions,
            }
        })
        .collect()
}

/// Decides all pairs `(a, w)` over the middle node `u` with one backward
/// witness search from `w`.
fn backward_decisions(ctx: &WitnessCtx, w: StationId, u: StationId) -> Vec<Decision> {
    let tt = ctx.g.timetable();
    if w == u {
        return Vec::new();
    }
    let mut cands: Vec<(StationId, EdgeConnectionSet)> = Vec::new();
    for a in ctx.g.in_neighbors(u) {
        if a == u || ctx.contracted[a.index()] {
            continue;
        }
        if let Some(set) = candidate_connections(ctx.g, a, u, w) {
            cands.push((a, set));
        }
    }
    if cands.is_empty() {
        return Vec::new();
    }
    let bound = cands.iter().map(|(_, s)| s.max_len()).max().unwrap() + ctx.params.duration_slack;
    let witnesses = backward_witness_profiles(ctx, w, bound);
    cands
        .into_iter()
        .map(|(a, set)| {
            let (needed, omissions) = shortcut_needed(&set, &witnesses[a.index()], tt);
            Decision {
                at: u,
                pair: StoredShortcut { from: a, to: w },
                needed,
                omissions,
            }
        })
        .collect()
}

/// Stored-shortcut refresh work after contraction, ordered for determinism.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum RefreshTask {
    /// Recompute everything stored at a node (a loop appeared there).
    Recompute(StationId),
    /// A shortcut `(src, at)` appeared: redecide pairs `(src, *)` at `at`.
    Forward { src: StationId, at: StationId },
    /// A shortcut `(at, src)` appeared: redecide pairs `(*, src)` at `at`.
    Backward { src: StationId, at: StationId },
}

/// Contraction in progress: the augmented graph, the per-node stored
/// shortcuts kept current by refresh searches, and the rank bookkeeping.
pub struct Contraction {
    g: StationGraph,
    params: ContractionParams,
    contracted: Vec<bool>,
    depth: Vec<u32>,
    stored: Vec<Vec<StoredShortcut>>,
    rank: Vec<u32>,
    next_rank: u32,
    priorities: Vec<f64>,
    dirty: Vec<bool>,
    pending: BTreeSet<RefreshTask>,
    pool: Option<rayon::ThreadPool>,
}

impl Contraction {
    /// Builds the initial state: one one-to-many witness search per node
    /// decides the stored shortcuts for the contraction of all its
    /// neighbors.
    pub fn new(g: StationGraph, params: ContractionParams) -> Self {
        let n = g.node_count();
        let pool = (params.threads > 1).then(|| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(params.threads)
                .build()
                .expect("thread pool")
        });
        let mut c = Contraction {
            g,
            params,
            contracted: vec![false; n],
            depth: vec![0; n],
            stored: vec![Vec::new(); n],
            rank: vec![0; n],
            next_rank: 0,
            priorities: vec![0.0; n],
            dirty: vec![true; n],
            pending: BTreeSet::new(),
            pool,
        };
        c.precompute_stored_shortcuts(&mut NoObserver);
        c
    }

    pub fn graph(&self) -> &StationGraph {
        &self.g
    }

    pub fn contracted(&self) -> &[bool] {
        &self.contracted
    }

    pub fn is_done(&self) -> bool {
        (self.next_rank as usize) == self.g.node_count()
    }

    pub fn stored_shortcuts(&self, v: StationId) -> &[StoredShortcut] {
        &self.stored[v.index()]
    }

    fn ctx(&self) -> WitnessCtx<'_> {
        WitnessCtx {
            g: &self.g,
            contracted: &self.contracted,
            params: &self.params,
        }
    }

    fn precompute_stored_shortcuts(&mut self, observer: &mut dyn ContractionObserver) {
        let sources: Vec<StationId> = (0..self.g.node_count() as u32).map(StationId).collect();
        let ctx = self.ctx();
        let decisions = run_parallel(&self.pool, &sources, |&u| {
            let middles: Vec<StationId> = ctx.g.out_neighbors(u).collect();
            forward_decisions(&ctx, u, &middles)
        });
        for decision in decisions.iter().flatten() {
            apply_decision(&mut self.stored, observer, decision);
        }
    }

    /// Computes fresh shortcut connections for every valid stored pair of
    /// `v`; pure, runs on the frozen graph.
    fn shortcut_sets(&self, v: StationId) -> Vec<(StationId, StationId, EdgeConnectionSet)> {
        let mut sets = Vec::new();
        for pair in &self.stored[v.index()] {
            if self.contracted[pair.from.index()] || self.contracted[pair.to.index()] {
                continue;
            }
            if let Some(conns) = candidate_connections(&self.g, pair.from, v, pair.to) {
                sets.push((pair.from, pair.to, conns));
            }
        }
        sets
    }

    /// Contracts one node: merges the necessary shortcuts into the graph
    /// (never creating parallel edges), removes the node from the remaining
    /// graph, updates depths, and queues the stored-shortcut refreshes.
    /// Returns the edges that gained connections.
    pub fn contract_node(
        &mut self,
        v: StationId,
        observer: &mut dyn ContractionObserver,
    ) -> Vec<(StationId, StationId)> {
        let shortcuts = self.shortcut_sets(v);
        self.apply_contraction(v, shortcuts, observer)
    }

    fn apply_contraction(
        &mut self,
        v: StationId,
        shortcuts: Vec<(StationId, StationId, EdgeConnectionSet)>,
        _observer: &mut dyn ContractionObserver,
    ) -> Vec<(StationId, StationId)> {
        debug_assert!(!self.contracted[v.index()]);
        let mut added = Vec::new();
        for (u, w, conns) in shortcuts {
            if self.g.merge_edge(u, w, conns) {
                added.push((u, w));
                self.dirty[u.index()] = true;
                self.dirty[w.index()] = true;
                if u == w {
                    self.pending.insert(RefreshTask::Recompute(u));
                } else {
                    self.pending.insert(RefreshTask::Forward { src: u, at: w });
                    self.pending.insert(RefreshTask::Backward { src: w, at: u });
                }
            }
        }
        self.contracted[v.index()] = true;
        self.rank[v.index()] = self.next_rank;
        self.next_rank += 1;
        for nb in neighbors(&self.g, &self.contracted, v) {
            if self.depth[v.index()] + 1 > self.depth[nb.index()] {
                self.depth[nb.index()] = self.depth[v.index()] + 1;
            }
            self.dirty[nb.index()] = true;
        }
        added
    }

    /// Runs the queued refresh searches on the current graph and applies
    /// their decisions in deterministic order.
    pub fn run_refreshes(&mut self, observer: &mut dyn ContractionObserver) {
        let mut tasks: Vec<RefreshTask> = std::mem::take(&mut self.pending).into_iter().collect();
        let recomputes: BTreeSet<StationId> = tasks
            .iter()
            .filter_map(|t| match t {
                RefreshTask::Recompute(x) => Some(*x),
                _ => None,
            })
            .collect();
        tasks.retain(|t| match t {
            RefreshTask::Recompute(_) => true,
            RefreshTask::Forward { at, .. } | RefreshTask::Backward { at, .. } => {
                !recomputes.contains(at)
            }
        });
        let ctx = self.ctx();
        let results = run_parallel(&self.pool, &tasks, |task| match *task {
            RefreshTask::Forward { src, at } => (None, forward_decisions(&ctx, src, &[at])),
            RefreshTask::Backward { src, at } => (None, backward_decisions(&ctx, src, at)),
            RefreshTask::Recompute(at) => {
                let mut all = Vec::new();
                for a in ctx.g.in_neighbors(at) {
                    if ctx.contracted[a.index()] {
                        continue;
                    }
                    all.extend(forward_decisions(&ctx, a, &[at]));
                }
                (Some(at), all)
            }
        });
        for (recompute_at, decisions) in &results {
            if let Some(at) = recompute_at {
                self.stored[at.index()].clear();
                self.dirty[at.index()] = true;
            }
            for decision in decisions {
                apply_decision(&mut self.stored, observer, decision);
                self.dirty[decision.at.index()] = true;
            }
        }
    }

    fn refresh_priorities(&mut self) {
        for v in 0..self.g.node_count() {
            if self.contracted[v] || !self.dirty[v] {
                continue;
            }
            let v = StationId(v as u32);
            self.priorities[v.index()] = node_priority(
                self.valid_stored(v),
                self.edges_removed(v),
                self.depth[v.index()],
            );
            self.dirty[v.index()] = false;
        }
    }

    fn edges_removed(&self, v: StationId) -> u32 {
        let out = self
            .g
            .out_neighbors(v)
            .filter(|s| !self.contracted[s.index()])
            .count() as u32;
        let inc = self
            .g
            .in_neighbors(v)
            .filter(|s| !self.contracted[s.index()])
            .count() as u32;
        // a loop shows up on both sides but is one edge
        out + inc - u32::from(self.g.edge(v, v).is_some())
    }

    fn valid_stored(&self, v: StationId) -> u32 {
        self.stored[v.index()]
            .iter()
            .filter(|p| {
                !self.contracted[p.from.index()]
                    && !self.contracted[p.to.index()]
                    && self.g.edge(p.from, v).is_some()
                    && self.g.edge(v, p.to).is_some()
            })
            .count() as u32
    }

    /// One full round: refresh priorities, pick the independent set, compute
    /// all shortcut connections on the frozen graph, apply serially in id
    /// order, then refresh stored shortcuts. Returns the contracted nodes.
    pub fn round(&mut self, observer: &mut dyn ContractionObserver) -> Vec<StationId> {
        self.refresh_priorities();
        let set = select_contraction_set(&self.g, &self.contracted, &self.priorities);
        debug_assert!(!set.is_empty() || self.is_done());
        let jobs = {
            let me = &*self;
            run_parallel(&self.pool, &set, |&v| (v, me.shortcut_sets(v)))
        };
        for (v, shortcuts) in jobs {
            self.apply_contraction(v, shortcuts, observer);
        }
        self.run_refreshes(observer);
        set
    }

    pub fn into_hierarchy(self) -> Hierarchy {
        debug_assert!(self.is_done());
        Hierarchy {
            graph: self.g,
            rank: self.rank,
            params: self.params,
        }
    }
}

pub fn build_hierarchy(g: StationGraph, params: ContractionParams) -> Hierarchy {
    build_hierarchy_observed(g, params, &mut NoObserver)
}

pub fn build_hierarchy_observed(
    g: StationGraph,
    params: ContractionParams,
    observer: &mut dyn ContractionObserver,
) -> Hierarchy {
    let mut c = Contraction::new(g, params);
    let mut round = 0usize;
    while !c.is_done() {
        c.round(observer);
        observer.on_round(round, &c.g, &c.contracted);
        round += 1;
    }
    c.into_hierarchy()
}

/// Replaces the previous decision for the pair and reports omissions.
fn apply_decision(
    stored: &mut [Vec<StoredShortcut>],
    observer: &mut dyn ContractionObserver,
    decision: &Decision,
) {
    let list = &mut stored[decision.at.index()];
    list.retain(|p| *p != decision.pair);
    if decision.needed {
        list.push(decision.pair);
        list.sort();
    }
    for (cand, witness) in &decision.omissions {
        observer.on_omission(cand, witness);
    }
}

fn run_parallel<T: Sync, R: Send>(
    pool: &Option<rayon::ThreadPool>,
    items: &[T],
    f: impl Fn(&T) -> R + Sync,
) -> Vec<R> {
    match pool {
        Some(pool) => pool.install(|| items.par_iter().map(&f).collect()),
        None => items.iter().map(f).collect(),
    }
}
