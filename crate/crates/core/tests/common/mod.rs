//! Shared helpers for the integration suites: naive all-pairs reference
//! implementations of the set operations, plus pools of realistic inputs
//! drawn from random timetables.
#![allow(dead_code)]

use stationgraph::conn::{
    compare_arrivals, compare_connections, dominates_arrival, dominates_periodic,
    equivalent_arrivals, equivalent_connections, ArrivalConnection, Boarding, ConnSource,
    Connection, EdgeConnectionSet, OrderKind,
};
use stationgraph::graph::{build_station_graph, StationGraph};
use stationgraph::oracle::{OracleConnection, OracleLabel};
use stationgraph::query::time_query;
use stationgraph::synth::random_timetable;
use stationgraph::time::{minute_of_day, next_instance, Minutes, MINUTES_PER_DAY};
use stationgraph::timetable::{StationId, Timetable};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

/// O(n^2) dominance closure of preference-tagged connections with the same
/// equivalence-representative rule as the engine: drop anything a
/// non-equivalent input member dominates, keep the best-tagged member of
/// each equivalence class, sort canonically.
pub fn naive_close_profile(items: Vec<(u32, Connection)>, tt: &Timetable) -> Vec<Connection> {
    let undominated: Vec<(u32, Connection)> = items
        .iter()
        .filter(|(_, x)| {
            !items
                .iter()
                .any(|(_, y)| !equivalent_connections(y, x, tt) && dominates_periodic(y, x, tt))
        })
        .cloned()
        .collect();
    let mut reps: Vec<(u32, Connection)> = Vec::new();
    for (rank, cand) in undominated {
        match reps
            .iter_mut()
            .find(|(_, r)| equivalent_connections(r, &cand, tt))
        {
            Some(slot) => {
                let better = (rank, &cand);
                let slot_key = (slot.0, &slot.1);
                if rank_key(tt, better) < rank_key(tt, (slot_key.0, slot_key.1)) {
                    *slot = (rank, cand);
                }
            }
            None => reps.push((rank, cand)),
        }
    }
    let mut out: Vec<Connection> = reps.into_iter().map(|(_, c)| c).collect();
    out.sort_by(|a, b| compare_connections(OrderKind::Profile, a, b, tt));
    out
}

fn rank_key(
    tt: &Timetable,
    (rank, c): (u32, &Connection),
) -> (u32, u32, u32, bool, bool, u32, u32) {
    (
        rank,
        c.dep,
        u32::MAX - c.length(),
        c.critical_dep(tt),
        c.critical_arr(tt),
        c.z1.0,
        c.z2.0,
    )
}

/// O(n^2) closure of preference-tagged arrival connections.
pub fn naive_close_arrivals(
    items: Vec<(u32, ArrivalConnection)>,
    tt: &Timetable,
) -> Vec<ArrivalConnection> {
    let undominated: Vec<(u32, ArrivalConnection)> = items
        .iter()
        .filter(|(_, x)| {
            !items
                .iter()
                .any(|(_, y)| !equivalent_arrivals(y, x, tt) && dominates_arrival(y, x, tt))
        })
        .cloned()
        .collect();
    let mut reps: Vec<(u32, ArrivalConnection)> = Vec::new();
    for (rank, cand) in undominated {
        match reps
            .iter_mut()
            .find(|(_, r)| equivalent_arrivals(r, &cand, tt))
        {
            Some(slot) => {
                if (rank, cand.z2) < (slot.0, slot.1.z2) {
                    *slot = (rank, cand);
                }
            }
            None => reps.push((rank, cand)),
        }
    }
    let mut out: Vec<ArrivalConnection> = reps.into_iter().map(|(_, a)| a).collect();
    out.sort_by(|a, b| compare_arrivals(a, b, tt));
    out
}

fn placeholder_source() -> ConnSource {
    ConnSource::Elem(stationgraph::timetable::ElemId(0))
}

/// All-pairs link of an arrival set over an edge: for each label and each
/// edge connection, the first boardable instance without and with transfer.
pub fn naive_link_time(
    ac: &[ArrivalConnection],
    edge: &EdgeConnectionSet,
    tt: &Timetable,
) -> Vec<ArrivalConnection> {
    let mut cands = Vec::new();
    for p in ac {
        for q in edge.connections() {
            let tod = minute_of_day(q.dep);
            match p.z2 {
                Boarding::Any => {
                    let d = next_instance(p.arr, tod);
                    cands.push((
                        1u32,
                        ArrivalConnection {
                            arr: d + q.length(),
                            z2: Boarding::At(q.z2),
                        },
                    ));
                }
                Boarding::At(z) => {
                    if z == q.z1 {
                        let d = next_instance(p.arr, tod);
                        cands.push((
                            1,
                            ArrivalConnection {
                                arr: d + q.length(),
                                z2: Boarding::At(q.z2),
                            },
                        ));
                    }
                    let d = next_instance(p.arr + tt.transfer(edge.from), tod);
                    cands.push((
                        1,
                        ArrivalConnection {
                            arr: d + q.length(),
                            z2: Boarding::At(q.z2),
                        },
                    ));
                }
            }
        }
    }
    naive_close_arrivals(cands, tt)
}

pub fn naive_minimum_arrivals(
    existing: &[ArrivalConnection],
    incoming: &[ArrivalConnection],
    tt: &Timetable,
) -> Vec<ArrivalConnection> {
    let tagged = existing
        .iter()
        .map(|a| (0u32, *a))
        .chain(incoming.iter().map(|a| (1u32, *a)))
        .collect();
    naive_close_arrivals(tagged, tt)
}

pub fn naive_link_and_minimum_time(
    ac: &[ArrivalConnection],
    edge: &EdgeConnectionSet,
    existing: &[ArrivalConnection],
    tt: &Timetable,
) -> Vec<ArrivalConnection> {
    let linked = naive_link_time(ac, edge, tt);
    naive_minimum_arrivals(existing, &linked, tt)
}

/// All-pairs link of two edges: both the shared-event and the transfer
/// instance per connection pair.
pub fn naive_link_edges(
    a: &EdgeConnectionSet,
    b: &EdgeConnectionSet,
    tt: &Timetable,
) -> Vec<Connection> {
    let mut cands = Vec::new();
    for p in a.connections() {
        for q in b.connections() {
            let tod = minute_of_day(q.dep);
            let mut push = |d: Minutes| {
                cands.push((
                    1u32,
                    Connection {
                        z1: p.z1,
                        z2: q.z2,
                        dep: p.dep,
                        arr: d + q.length(),
                        source: placeholder_source(),
                    },
                ));
            };
            if q.z1 == p.z2 {
                push(next_instance(p.arr, tod));
            }
            push(next_instance(p.arr + tt.transfer(b.from), tod));
        }
    }
    naive_close_profile(cands, tt)
}

pub fn naive_minimum_connections(
    a: &EdgeConnectionSet,
    b: &EdgeConnectionSet,
    tt: &Timetable,
) -> Vec<Connection> {
    let tagged = a
        .connections()
        .iter()
        .map(|c| (0u32, c.clone()))
        .chain(b.connections().iter().map(|c| (1u32, c.clone())))
        .collect();
    naive_close_profile(tagged, tt)
}

/// Inputs harvested from a random timetable: real edges, linked two-hop
/// sets, and dominance-closed arrival sets produced by actual queries.
pub struct Pools {
    pub tt: Timetable,
    pub graph: StationGraph,
    pub edges: Vec<EdgeConnectionSet>,
    pub arrival_sets: Vec<(StationId, Vec<ArrivalConnection>)>,
}

pub fn build_pools(seed: u64) -> Pools {
    let tt = random_timetable(seed, 12, 30);
    let graph = build_station_graph(tt.clone()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9);

    let mut edges: Vec<EdgeConnectionSet> = Vec::new();
    for u in 0..graph.node_count() as u32 {
        for (_, e) in graph.out_edges(StationId(u)) {
            edges.push(e.clone());
        }
    }
    // two-hop linked sets give longer, wait-heavy connections
    let base = edges.clone();
    for e1 in &base {
        for (w, e2) in graph.out_edges(e1.to) {
            let _ = w;
            let linked = stationgraph::conn::link_edges(e1, e2, &tt);
            if !linked.is_empty() {
                edges.push(linked);
            }
        }
    }

    let mut arrival_sets = Vec::new();
    for _ in 0..6 {
        let a = StationId(rng.gen_range(0..graph.node_count() as u32));
        let t0 = rng.gen_range(0..2 * MINUTES_PER_DAY);
        let b = StationId(rng.gen_range(0..graph.node_count() as u32));
        let r = time_query(&graph, a, b, t0).unwrap();
        for (s, labels) in r.labels.iter().enumerate() {
            if !labels.is_empty() {
                arrival_sets.push((StationId(s as u32), labels.clone()));
            }
        }
    }
    Pools {
        tt,
        graph,
        edges,
        arrival_sets,
    }
}

/// Engine-side connection label of an oracle leg sequence.
pub fn engine_conn(c: &OracleConnection, tt: &Timetable) -> Option<Connection> {
    let label = c.label(tt)?;
    Some(label_conn(&label))
}

pub fn label_conn(l: &OracleLabel) -> Connection {
    Connection {
        z1: l.z1,
        z2: l.z2,
        dep: l.dep,
        arr: l.arr,
        source: placeholder_source(),
    }
}

pub fn conn_label(c: &Connection) -> OracleLabel {
    OracleLabel {
        dep: c.dep,
        arr: c.arr,
        z1: c.z1,
        z2: c.z2,
    }
}

/// Evaluates a profile at a departure time: earliest arrival over all
/// day-shifted members departing at or after `t0`.
pub fn eval_profile(set: &[Connection], t0: Minutes) -> Option<Minutes> {
    set.iter()
        .map(|c| next_instance(t0, minute_of_day(c.dep)) + c.length())
        .min()
}
