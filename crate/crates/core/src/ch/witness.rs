//! Bounded one-to-many profile searches used to decide shortcut necessity.
//!
//! A search from a node explores the remaining graph with limits on path
//! duration, hops, and transfers. Missing a witness only adds a shortcut, so
//! every pruning here is safe; found witnesses are real connections.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use crate::conn::{
    close_profile, dominates_periodic, equivalent_connections, for_each_link, ConnLike, ConnSource,
    Connection, EdgeConnectionSet,
};
use crate::graph::StationGraph;
use crate::timetable::{StationId, Timetable};

use super::ContractionParams;

#[derive(Clone)]
pub(super) struct WitnessLabel {
    pub conn: Connection,
    pub hops: u32,
    pub transfers: u32,
}

impl ConnLike for WitnessLabel {
    fn conn(&self) -> &Connection {
        &self.conn
    }
}

pub(super) struct WitnessCtx<'a> {
    pub g: &'a StationGraph,
    pub contracted: &'a [bool],
    pub params: &'a ContractionParams,
}

impl<'a> WitnessCtx<'a> {
    fn remaining(&self, s: StationId) -> bool {
        !self.contracted[s.index()]
    }

    fn tt(&self) -> &'a Timetable {
        self.g.timetable()
    }
}

/// Number of transfers a linked connection takes at its junction.
fn junction_transfer(c: &Connection) -> u32 {
    match &c.source {
        ConnSource::Via(v) => u32::from(v.left.z2 != v.right.z1),
        ConnSource::Elem(_) => 0,
    }
}

/// Dominant witness profiles from `source` to every remaining station, over
/// paths of bounded duration, hops, and transfers.
pub(super) fn forward_witness_profiles(
    ctx: &WitnessCtx,
    source: StationId,
    duration_bound: u32,
) -> Vec<Vec<WitnessLabel>> {
    let tt = ctx.tt();
    let n = ctx.g.node_count();
    let mut labels: Vec<Vec<WitnessLabel>> = vec![Vec::new(); n];
    let mut heap: BinaryHeap<Reverse<(u32, u32)>> = BinaryHeap::new();
    let mut pending: Vec<Option<u32>> = vec![None; n];
    heap.push(Reverse((0, source.0)));
    pending[source.index()] = Some(0);

    while let Some(Reverse((key, s))) = heap.pop() {
        let station = StationId(s);
        if pending[station.index()] != Some(key) {
            continue;
        }
        pending[station.index()] = None;
        if key > duration_bound {
            break;
        }
        for (next, edge) in ctx.g.out_edges(station) {
            if !ctx.remaining(next) {
                continue;
            }
            let mut cands: Vec<WitnessLabel> = Vec::new();
            if station == source {
                cands.extend(edge.connections().iter().map(|c| WitnessLabel {
                    conn: c.clone(),
                    hops: 1,
                    transfers: 0,
                }));
            }
            for label in &labels[station.index()] {
                if label.hops + 1 > ctx.params.hop_limit {
                    continue;
                }
                let (hops, transfers) = (label.hops, label.transfers);
                for_each_link(&label.conn, edge, tt, &mut |c| {
                    cands.push(WitnessLabel {
                        transfers: transfers + junction_transfer(&c),
                        conn: c,
                        hops: hops + 1,
                    });
                });
            }
            if let Some(new_min) = merge_witness_labels(
                &mut labels[next.index()],
                cands,
                source,
                next,
                duration_bound,
                ctx.params.transfer_limit,
                tt,
            ) {
                if pending[next.index()].is_none_or(|p| new_min < p) {
                    pending[next.index()] = Some(new_min);
                    heap.push(Reverse((new_min, next.0)));
                }
            }
        }
    }
    labels
}

/// Dominant witness profiles from every remaining station to `target`.
pub(super) fn backward_witness_profiles(
    ctx: &WitnessCtx,
    target: StationId,
    duration_bound: u32,
) -> Vec<Vec<WitnessLabel>> {
    let tt = ctx.tt();
    let n = ctx.g.node_count();
    let mut labels: Vec<Vec<WitnessLabel>> = vec![Vec::new(); n];
    let mut meta: Vec<HashMap<ConnKey, (u32, u32)>> = vec![HashMap::new(); n];
    let mut heap: BinaryHeap<Reverse<(u32, u32)>> = BinaryHeap::new();
    let mut pending: Vec<Option<u32>> = vec![None; n];
    heap.push(Reverse((0, target.0)));
    pending[target.index()] = Some(0);

    while let Some(Reverse((key, s))) = heap.pop() {
        let station = StationId(s);
        if pending[station.index()] != Some(key) {
            continue;
        }
        pending[station.index()] = None;
        if key > duration_bound {
            break;
        }
        // Freeze this station's labels as an indexed set once per settle.
        let label_set = if labels[station.index()].is_empty() {
            None
        } else {
            Some(EdgeConnectionSet::from_closed(
                labels[station.index()]
                    .iter()
                    .map(|l| l.conn.clone())
                    .collect(),
                station,
                target,
                tt,
            ))
        };
        let metadata = meta[station.index()].clone();
        for prev in ctx.g.in_neighbors(station) {
            if !ctx.remaining(prev) {
                continue;
            }
            let edge = ctx.g.edge(prev, station).expect("adjacency mirror");
            let mut cands: Vec<WitnessLabel> = Vec::new();
            if station == target {
                cands.extend(edge.connections().iter().map(|c| WitnessLabel {
                    conn: c.clone(),
                    hops: 1,
                    transfers: 0,
                }));
            }
            if let Some(ls) = &label_set {
                for p in edge.connections() {
                    for_each_link(p, ls, tt, &mut |c| {
                        let ConnSource::Via(via) = &c.source else {
                            unreachable!("links carry via records")
                        };
                        let right = &via.right;
                        let (rh, rt) = metadata[&conn_key(right)];
                        if rh + 1 > ctx.params.hop_limit {
                            return;
                        }
                        cands.push(WitnessLabel {
                            transfers: rt + junction_transfer(&c),
                            conn: c,
                            hops: rh + 1,
                        });
                    });
                }
            }
            if let Some(new_min) = merge_witness_labels(
                &mut labels[prev.index()],
                cands,
                prev,
                target,
                duration_bound,
                ctx.params.transfer_limit,
                tt,
            ) {
                meta[prev.index()] = labels[prev.index()]
                    .iter()
                    .map(|l| (conn_key(&l.conn), (l.hops, l.transfers)))
                    .collect();
                if pending[prev.index()].is_none_or(|p| new_min < p) {
                    pending[prev.index()] = Some(new_min);
                    heap.push(Reverse((new_min, prev.0)));
                }
            }
        }
    }
    labels
}

type ConnKey = (u32, u32, u32, u32);

fn conn_key(c: &Connection) -> ConnKey {
    (c.z1.0, c.z2.0, c.dep, c.arr)
}

/// Merges pruned candidates into a witness label set; returns the minimal
/// length among new connections, `None` when nothing changed.
fn merge_witness_labels(
    existing: &mut Vec<WitnessLabel>,
    cands: Vec<WitnessLabel>,
    from: StationId,
    to: StationId,
    duration_bound: u32,
    transfer_limit: u32,
    tt: &Timetable,
) -> Option<u32> {
    let old_keys: Vec<ConnKey> = existing.iter().map(|l| conn_key(&l.conn)).collect();
    let mut tagged: Vec<(u32, WitnessLabel)> = existing.drain(..).map(|l| (0u32, l)).collect();
    tagged.extend(
        cands
            .into_iter()
            .filter(|l| l.conn.length() <= duration_bound && l.transfers <= transfer_limit)
            .map(|l| (1u32, l)),
    );
    *existing = close_profile(tagged, from, to, tt);
    existing
        .iter()
        .filter(|l| !old_keys.contains(&conn_key(&l.conn)))
        .map(|l| l.conn.length())
        .min()
}

/// Exact necessity test of one candidate set against a witness profile: the
/// shortcut can be omitted only when every candidate connection is strictly
/// dominated by a non-equivalent witness. Returns the surviving flag and the
/// omission pairs (candidate, witness) when fully dominated.
pub(super) fn shortcut_needed(
    cands: &EdgeConnectionSet,
    witnesses: &[WitnessLabel],
    tt: &Timetable,
) -> (bool, Vec<(Connection, Connection)>) {
    let mut omissions = Vec::new();
    let mut needed = false;
    for cand in cands.connections() {
        let witness = witnesses.iter().find(|w| {
            !equivalent_connections(&w.conn, cand, tt) && dominates_periodic(&w.conn, cand, tt)
        });
        match witness {
            Some(w) => omissions.push((cand.clone(), w.conn.clone())),
            None => needed = true,
        }
    }
    if needed {
        omissions.clear();
    }
    (needed, omissions)
}
