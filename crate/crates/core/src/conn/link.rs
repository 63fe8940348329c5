//! The two elementary operations of every query: `link`, which extends
//! labels over an edge, and `minimum`, which merges label sets into a
//! dominant set. Link restricts itself to the relevant departure ranges of
//! the edge array: a short no-transfer window, then the dominant range of
//! the first connection reachable with a transfer.

use std::sync::Arc;

use super::edge_set::EdgeConnectionSet;
use super::sweep::{close_arrivals, close_profile};
use super::{ArrivalConnection, Boarding, ConnSource, Connection, ViaRecord};
use crate::time::{next_instance, Minutes};
use crate::timetable::Timetable;

/// Calls `f` with every link of `p` and a connection of `edge` that can
/// produce a dominant result: the no-transfer continuations of `p`'s arrival
/// event, plus the with-transfer links inside the dominant range. Dominated
/// results are skipped via the running minimal arrival.
pub(crate) fn for_each_link(
    p: &Connection,
    edge: &EdgeConnectionSet,
    tt: &Timetable,
    f: &mut impl FnMut(Connection),
) {
    if edge.is_empty() {
        return;
    }
    for &qi in edge.departures_from_event(p.z2) {
        let q = &edge.connections()[qi as usize];
        let dep_abs = next_instance(p.arr, crate::time::minute_of_day(q.dep));
        f(make_link(p, q, dep_abs, edge));
    }
    let anchor = p.arr + tt.transfer(edge.from);
    let Some(start) = edge.first_at_or_after(anchor) else {
        return;
    };
    let end = edge.dominant_end_at(start);
    let transfer_to = tt.transfer(edge.to);
    let mut best_arr = u32::MAX;
    for pos in start..end {
        let (q, dep_abs) = edge.at(pos);
        let arr = dep_abs + q.length();
        let skip = if q.critical_arr(tt) {
            arr >= best_arr.saturating_add(transfer_to)
        } else {
            arr >= best_arr
        };
        if skip {
            continue;
        }
        best_arr = best_arr.min(arr);
        f(make_link(p, q, dep_abs, edge));
    }
}

fn make_link(
    p: &Connection,
    q: &Connection,
    q_dep_abs: Minutes,
    edge: &EdgeConnectionSet,
) -> Connection {
    Connection {
        z1: p.z1,
        z2: q.z2,
        dep: p.dep,
        arr: q_dep_abs + q.length(),
        source: ConnSource::Via(Arc::new(ViaRecord {
            middle: edge.from,
            left: p.clone(),
            right: q.clone(),
            right_offset: q_dep_abs - p.dep,
        })),
    }
}

/// Links two edges `(S1,S2)` and `(S2,S3)` into the dominant connection set
/// of `(S1,S3)`. Every produced connection records the middle station and
/// its two constituents for unpacking.
pub fn link_edges(
    a: &EdgeConnectionSet,
    b: &EdgeConnectionSet,
    tt: &Timetable,
) -> EdgeConnectionSet {
    debug_assert_eq!(a.to, b.from);
    let mut cands = Vec::new();
    for p in a.connections().iter().rev() {
        for_each_link(p, b, tt, &mut |c| cands.push(c));
    }
    EdgeConnectionSet::from_connections(cands, a.from, b.to, tt)
}

/// Dominant union of two connection sets over the same station pair, with
/// preference for `a` among equivalent connections.
pub fn minimum_connections(
    a: &EdgeConnectionSet,
    b: &EdgeConnectionSet,
    tt: &Timetable,
) -> EdgeConnectionSet {
    debug_assert_eq!((a.from, a.to), (b.from, b.to));
    let tagged = a
        .connections()
        .iter()
        .map(|c| (0u32, c.clone()))
        .chain(b.connections().iter().map(|c| (1u32, c.clone())))
        .collect();
    let closed = close_profile(tagged, a.from, a.to, tt);
    EdgeConnectionSet::from_closed(closed, a.from, a.to, tt)
}

/// Fused link+minimum for profile labels: links `labels` over `edge` and
/// merges the results into `existing` in one closure. Returns the merged set
/// and the minimal length among newly added connections, `None` when nothing
/// changed.
pub fn link_and_minimum_profile(
    labels: &EdgeConnectionSet,
    edge: &EdgeConnectionSet,
    existing: Option<&EdgeConnectionSet>,
    tt: &Timetable,
) -> (EdgeConnectionSet, Option<u32>) {
    let mut tagged: Vec<(u32, Connection)> = Vec::new();
    if let Some(ex) = existing {
        tagged.extend(ex.connections().iter().map(|c| (0u32, c.clone())));
    }
    for p in labels.connections().iter().rev() {
        for_each_link(p, edge, tt, &mut |c| tagged.push((1, c)));
    }
    let closed = close_profile(tagged, labels.from, edge.to, tt);
    let new_min = {
        let old = existing.map(|e| e.connections()).unwrap_or(&[]);
        closed
            .iter()
            .filter(|c| !old.contains(c))
            .map(Connection::length)
            .min()
    };
    let set = EdgeConnectionSet::from_closed(closed, labels.from, edge.to, tt);
    (set, new_min)
}

/// Raw link candidates of an arrival-connection set over one edge.
///
/// With the boarding sentinel present, every connection from its time on is
/// boardable without transfer, so one stream anchored at the minimal arrival
/// suffices. Otherwise the window before `min + transfer` only admits
/// same-event continuations, and the with-transfer stream starts after it.
fn link_candidates_time(
    ac: &[ArrivalConnection],
    edge: &EdgeConnectionSet,
    tt: &Timetable,
    out: &mut Vec<ArrivalConnection>,
) {
    if ac.is_empty() || edge.is_empty() {
        return;
    }
    let min_arr = ac.iter().map(|a| a.arr).min().unwrap();
    let has_any = ac.iter().any(|a| a.z2 == Boarding::Any);
    let transfer_from = tt.transfer(edge.from);

    if has_any {
        stream_boardings(edge, tt, min_arr, out);
        return;
    }

    // No-transfer window [min_arr, min_arr + transfer): only same-event
    // continuations are consistent here.
    if transfer_from > 0 {
        if let Some(start) = edge.first_at_or_after(min_arr) {
            let mut pos = start;
            loop {
                let (q, dep_abs) = edge.at(pos);
                if dep_abs >= min_arr + transfer_from {
                    break;
                }
                let boardable = ac
                    .iter()
                    .any(|p| p.z2 == Boarding::At(q.z1) && p.arr <= dep_abs);
                if boardable {
                    out.push(ArrivalConnection {
                        arr: dep_abs + q.length(),
                        z2: Boarding::At(q.z2),
                    });
                }
                pos += 1;
            }
        }
    }
    stream_boardings(edge, tt, min_arr + transfer_from, out);
}

/// Emits the boardings of every edge connection from `anchor` on, limited to
/// the dominant range of the first one and skipping results the running
/// minimal arrival already dominates.
fn stream_boardings(
    edge: &EdgeConnectionSet,
    tt: &Timetable,
    anchor: Minutes,
    out: &mut Vec<ArrivalConnection>,
) {
    let Some(start) = edge.first_at_or_after(anchor) else {
        return;
    };
    let transfer_to = tt.transfer(edge.to);
    let end = edge.dominant_end_at(start);
    let mut best_arr = u32::MAX;
    for pos in start..end {
        let (q, dep_abs) = edge.at(pos);
        let arr = dep_abs + q.length();
        let skip = if q.critical_arr(tt) {
            arr >= best_arr.saturating_add(transfer_to)
        } else {
            arr >= best_arr
        };
        if skip {
            continue;
        }
        best_arr = best_arr.min(arr);
        out.push(ArrivalConnection {
            arr,
            z2: Boarding::At(q.z2),
        });
    }
}

/// Links an arrival-connection set over an edge and returns the dominant set
/// of arrival connections at the edge target.
pub fn link_time(
    ac: &[ArrivalConnection],
    edge: &EdgeConnectionSet,
    tt: &Timetable,
) -> Vec<ArrivalConnection> {
    let mut cands = Vec::new();
    link_candidates_time(ac, edge, tt, &mut cands);
    close_arrivals(cands.into_iter().map(|a| (1u32, a)).collect(), tt)
}

/// Dominant union of two arrival-connection sets; among equivalent arrivals
/// the one already in `existing` survives. The changed flag is false exactly
/// when the result equals `existing`.
pub fn minimum_arrivals(
    existing: &[ArrivalConnection],
    incoming: &[ArrivalConnection],
    tt: &Timetable,
) -> (Vec<ArrivalConnection>, bool) {
    let tagged = existing
        .iter()
        .map(|a| (0u32, *a))
        .chain(incoming.iter().map(|a| (1u32, *a)))
        .collect();
    let merged = close_arrivals(tagged, tt);
    let changed = merged.as_slice() != existing;
    (merged, changed)
}

/// Fused link+minimum for time-query labels.
pub fn link_and_minimum_time(
    ac: &[ArrivalConnection],
    edge: &EdgeConnectionSet,
    existing: &[ArrivalConnection],
    tt: &Timetable,
) -> (Vec<ArrivalConnection>, bool) {
    let mut tagged: Vec<(u32, ArrivalConnection)> = existing.iter().map(|a| (0u32, *a)).collect();
    let mut cands = Vec::new();
    link_candidates_time(ac, edge, tt, &mut cands);
    tagged.extend(cands.into_iter().map(|a| (1u32, a)));
    let merged = close_arrivals(tagged, tt);
    let changed = merged.as_slice() != existing;
    (merged, changed)
}
