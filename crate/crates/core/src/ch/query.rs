//! Hierarchy queries: a backward BFS corridor plus a forward time query, and
//! a bidirectional interleaved profile query. No stall-on-demand.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashSet, VecDeque};

use crate::conn::{
    close_profile, for_each_link, link_edges, minimum_connections, Connection, EdgeConnectionSet,
};
use crate::query::{
    max_duration, profile_slack, time_query_engine, ProfileQueryResult, QueryError, QueryStats,
    TimeQueryResult,
};
use crate::time::Minutes;
use crate::timetable::{StationId, TimedLeg};

use super::Hierarchy;

/// Nodes and edges reachable from the target by backward traversal of
/// upward edges, plus the loops of corridor nodes.
#[derive(Debug)]
pub struct Corridor {
    pub nodes: Vec<bool>,
    pub edges: HashSet<(StationId, StationId)>,
}

/// Breadth-first search over reverse edges that go upward in rank from the
/// corridor node. Terminates because upward edges form a DAG.
pub fn backward_corridor(h: &Hierarchy, target: StationId) -> Corridor {
    let mut nodes = vec![false; h.graph.node_count()];
    let mut edges = HashSet::new();
    let mut queue = VecDeque::new();
    nodes[target.index()] = true;
    queue.push_back(target);
    while let Some(x) = queue.pop_front() {
        if h.graph.edge(x, x).is_some() {
            edges.insert((x, x));
        }
        for y in h.graph.in_neighbors(x) {
            if y == x || !h.upward(x, y) {
                continue;
            }
            edges.insert((y, x));
            if !nodes[y.index()] {
                nodes[y.index()] = true;
                queue.push_back(y);
            }
        }
    }
    Corridor { nodes, edges }
}

fn check_station(h: &Hierarchy, s: StationId) -> Result<(), QueryError> {
    if s.index() >= h.graph.node_count() {
        Err(QueryError::UnknownStation(s.0))
    } else {
        Ok(())
    }
}

/// Earliest-arrival query on the hierarchy: backward corridor first, then a
/// forward label-correcting search over upward edges, loops, and corridor
/// edges. Exact.
pub fn ch_time_query(
    h: &Hierarchy,
    source: StationId,
    target: StationId,
    t0: Minutes,
) -> Result<TimeQueryResult, QueryError> {
    check_station(h, source)?;
    check_station(h, target)?;
    let corridor = backward_corridor(h, target);
    Ok(time_query_engine(&h.graph, source, target, t0, |s, t| {
        s == t || h.upward(s, t) || corridor.edges.contains(&(s, t))
    }))
}

/// One direction of the interleaved profile query. Labels are dominant
/// connection sets toward or from the origin, relaxed over upward edges and
/// loops only.
struct ProfileSearch<'a> {
    h: &'a Hierarchy,
    origin: StationId,
    forward: bool,
    labels: Vec<Option<EdgeConnectionSet>>,
    heap: BinaryHeap<Reverse<(u32, u32)>>,
    pending: Vec<Option<u32>>,
    delete_mins: u64,
}

impl<'a> ProfileSearch<'a> {
    fn new(h: &'a Hierarchy, origin: StationId, forward: bool) -> Self {
        let n = h.graph.node_count();
        let mut s = ProfileSearch {
            h,
            origin,
            forward,
            labels: vec![None; n],
            heap: BinaryHeap::new(),
            pending: vec![None; n],
            delete_mins: 0,
        };
        s.heap.push(Reverse((0, origin.0)));
        s.pending[origin.index()] = Some(0);
        s
    }

    /// Key of the next non-stale entry.
    fn peek_key(&mut self) -> Option<u32> {
        while let Some(Reverse((key, s))) = self.heap.peek().copied() {
            if self.pending[s as usize] == Some(key) {
                return Some(key);
            }
            self.heap.pop();
        }
        None
    }

    /// Settles one station and relaxes its edges; returns the station.
    fn step(&mut self) -> Option<StationId> {
        let tt = self.h.graph.timetable();
        loop {
            let Reverse((key, s)) = self.heap.pop()?;
            let station = StationId(s);
            if self.pending[station.index()] != Some(key) {
                continue;
            }
            self.pending[station.index()] = None;
            self.delete_mins += 1;

            let neighbors: Vec<StationId> = if self.forward {
                self.h.graph.out_neighbors(station).collect()
            } else {
                self.h.graph.in_neighbors(station).collect()
            };
            for next in neighbors {
                if next != station && !self.h.upward(station, next) {
                    continue;
                }
                let new_min = if self.forward {
                    let edge = self.h.graph.edge(station, next).expect("adjacency");
                    self.relax_forward(station, next, edge, tt)
                } else {
                    let edge = self.h.graph.edge(next, station).expect("adjacency");
                    self.relax_backward(station, next, edge, tt)
                };
                if let Some(new_min) = new_min {
                    if self.pending[next.index()].is_none_or(|p| new_min < p) {
                        self.pending[next.index()] = Some(new_min);
                        self.heap.push(Reverse((new_min, next.0)));
                    }
                }
            }
            return Some(station);
        }
    }

    /// Forward relaxation: extend origin->station labels over (station, next).
    fn relax_forward(
        &mut self,
        station: StationId,
        next: StationId,
        edge: &EdgeConnectionSet,
        tt: &crate::timetable::Timetable,
    ) -> Option<u32> {
        let mut tagged: Vec<(u32, Connection)> = Vec::new();
        if let Some(existing) = &self.labels[next.index()] {
            tagged.extend(existing.connections().iter().map(|c| (0u32, c.clone())));
        }
        if station == self.origin {
            tagged.extend(edge.connections().iter().map(|c| (1u32, c.clone())));
        }
        if let Some(ls) = &self.labels[station.index()] {
            for p in ls.connections().iter().rev() {
                for_each_link(p, edge, tt, &mut |c| tagged.push((1, c)));
            }
        }
        self.finish_relax(next, tagged, self.origin, next, tt)
    }

    /// Backward relaxation: prepend (next, station) to station->origin labels.
    fn relax_backward(
        &mut self,
        station: StationId,
        next: StationId,
        edge: &EdgeConnectionSet,
        tt: &crate::timetable::Timetable,
    ) -> Option<u32> {
        let mut tagged: Vec<(u32, Connection)> = Vec::new();
        if let Some(existing) = &self.labels[next.index()] {
            tagged.extend(existing.connections().iter().map(|c| (0u32, c.clone())));
        }
        if station == self.origin {
            tagged.extend(edge.connections().iter().map(|c| (1u32, c.clone())));
        }
        if let Some(ls) = &self.labels[station.index()] {
            for p in edge.connections().iter().rev() {
                for_each_link(p, ls, tt, &mut |c| tagged.push((1, c)));
            }
        }
        self.finish_relax(next, tagged, next, self.origin, tt)
    }

    fn finish_relax(
        &mut self,
        next: StationId,
        tagged: Vec<(u32, Connection)>,
        from: StationId,
        to: StationId,
        tt: &crate::timetable::Timetable,
    ) -> Option<u32> {
        if tagged.is_empty() {
            return None;
        }
        let closed = close_profile(tagged, from, to, tt);
        let old = self.labels[next.index()]
            .as_ref()
            .map(|e| e.connections())
            .unwrap_or(&[]);
        let new_min = closed
            .iter()
            .filter(|c| !old.contains(c))
            .map(Connection::length)
            .min()?;
        self.labels[next.index()] = Some(EdgeConnectionSet::from_closed(closed, from, to, tt));
        Some(new_min)
    }
}

/// Bidirectional interleaved profile query on the hierarchy: forward and
/// backward profile searches over upward edges, folding the two label sets
/// at every settled meeting node.
pub fn ch_profile_query(
    h: &Hierarchy,
    source: StationId,
    target: StationId,
) -> Result<ProfileQueryResult, QueryError> {
    check_station(h, source)?;
    check_station(h, target)?;
    if source == target {
        return Ok(ProfileQueryResult {
            set: Vec::new(),
            stats: QueryStats::default(),
        });
    }
    let tt = h.graph.timetable();
    let mut fwd = ProfileSearch::new(h, source, true);
    let mut bwd = ProfileSearch::new(h, target, false);
    let mut result: Option<EdgeConnectionSet> = None;
    let mut forward_turn = true;

    loop {
        let bound = result
            .as_ref()
            .and_then(|r| max_duration(r.connections()))
            .map(|d| d + profile_slack(tt, source, target));
        let fwd_key = fwd.peek_key().filter(|k| bound.is_none_or(|b| *k <= b));
        let bwd_key = bwd.peek_key().filter(|k| bound.is_none_or(|b| *k <= b));
        let settled = match (fwd_key, bwd_key) {
            (None, None) => break,
            (Some(_), None) => fwd.step(),
            (None, Some(_)) => bwd.step(),
            (Some(_), Some(_)) => {
                let s = if forward_turn { fwd.step() } else { bwd.step() };
                forward_turn = !forward_turn;
                s
            }
        };
        let Some(m) = settled else { break };

        // Fold the meeting node eagerly; duplicates are idempotent.
        let mut parts: Vec<EdgeConnectionSet> = Vec::new();
        if m == source {
            if let Some(b) = &bwd.labels[m.index()] {
                parts.push(b.clone());
            }
        }
        if m == target {
            if let Some(f) = &fwd.labels[m.index()] {
                parts.push(f.clone());
            }
        }
        if let (Some(f), Some(b)) = (&fwd.labels[m.index()], &bwd.labels[m.index()]) {
            parts.push(link_edges(f, b, tt));
        }
        for part in parts {
            if part.is_empty() {
                continue;
            }
            result = Some(match result.take() {
                Some(r) => minimum_connections(&r, &part, tt),
                None => part,
            });
        }
    }

    Ok(ProfileQueryResult {
        set: result.map(|r| r.connections().to_vec()).unwrap_or_default(),
        stats: QueryStats {
            delete_mins: fwd.delete_mins + bwd.delete_mins,
        },
    })
}

/// Expands a query-result connection into its elementary legs for the
/// instance departing at `dep`.
pub fn unpack(c: &Connection, dep: Minutes) -> Vec<TimedLeg> {
    let mut legs = Vec::new();
    c.unpack(dep, &mut legs);
    legs
}
