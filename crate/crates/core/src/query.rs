//! Baseline label-correcting queries on the station graph: the earliest
//! arrival time query and the profile query.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashSet};

use crate::conn::{
    close_profile, for_each_link, link_and_minimum_time, ArrivalConnection, Boarding, Connection,
    EdgeConnectionSet,
};
use crate::graph::StationGraph;
use crate::time::{cycle_difference, minute_of_day, Minutes, MINUTES_PER_DAY};
use crate::timetable::{StationId, TimedLeg, Timetable};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct QueryStats {
    /// Nodes removed from the priority queue.
    pub delete_mins: u64,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum QueryError {
    #[error("unknown station id {0}")]
    UnknownStation(u32),
}

#[derive(Debug)]
pub struct TimeQueryResult {
    /// Earliest arrival in absolute minutes; `None` means unreachable.
    pub arrival: Option<Minutes>,
    pub stats: QueryStats,
    /// Final dominant arrival-connection set per station.
    pub labels: Vec<Vec<ArrivalConnection>>,
    pub target: StationId,
}

impl TimeQueryResult {
    pub fn target_labels(&self) -> &[ArrivalConnection] {
        &self.labels[self.target.index()]
    }
}

fn check_station(g: &StationGraph, s: StationId) -> Result<(), QueryError> {
    if s.index() >= g.node_count() {
        Err(QueryError::UnknownStation(s.0))
    } else {
        Ok(())
    }
}

/// Earliest-arrival query from `source` at `t0` to `target`.
pub fn time_query(
    g: &StationGraph,
    source: StationId,
    target: StationId,
    t0: Minutes,
) -> Result<TimeQueryResult, QueryError> {
    check_station(g, source)?;
    check_station(g, target)?;
    Ok(time_query_engine(g, source, target, t0, |_, _| true))
}

/// Earliest-arrival query restricted to a station subset: only edges whose
/// endpoints are both allowed get relaxed. Used to check that contraction
/// preserves answers among the still-uncontracted stations.
pub fn time_query_restricted(
    g: &StationGraph,
    allowed: &[bool],
    source: StationId,
    target: StationId,
    t0: Minutes,
) -> Result<TimeQueryResult, QueryError> {
    check_station(g, source)?;
    check_station(g, target)?;
    Ok(time_query_engine(g, source, target, t0, |s, t| {
        allowed[s.index()] && allowed[t.index()]
    }))
}

/// The label-correcting core, shared with the hierarchy query via the edge
/// filter. Stores a dominant arrival-connection set per station; the queue
/// key is the minimal arrival time of a station's set.
pub(crate) fn time_query_engine(
    g: &StationGraph,
    source: StationId,
    target: StationId,
    t0: Minutes,
    mut relax_edge: impl FnMut(StationId, StationId) -> bool,
) -> TimeQueryResult {
    let tt = g.timetable();
    let n = g.node_count();
    let mut labels: Vec<Vec<ArrivalConnection>> = vec![Vec::new(); n];
    labels[source.index()].push(ArrivalConnection::source(t0));

    let mut heap: BinaryHeap<Reverse<(Minutes, u32)>> = BinaryHeap::new();
    let mut pending: Vec<Option<Minutes>> = vec![None; n];
    heap.push(Reverse((t0, source.0)));
    pending[source.index()] = Some(t0);

    let mut stats = QueryStats::default();
    let mut best_target: Option<Minutes> = if source == target { Some(t0) } else { None };
    let mut arrival = None;

    while let Some(Reverse((key, s))) = heap.pop() {
        let station = StationId(s);
        if pending[station.index()] != Some(key) {
            continue;
        }
        pending[station.index()] = None;
        stats.delete_mins += 1;

        if let Some(best) = best_target {
            if key >= best {
                arrival = Some(best);
                break;
            }
        }

        for (next, edge) in g.out_edges(station) {
            if !relax_edge(station, next) {
                continue;
            }
            let (merged, changed) =
                link_and_minimum_time(&labels[station.index()], edge, &labels[next.index()], tt);
            if !changed {
                continue;
            }
            let key = merged[0].arr;
            labels[next.index()] = merged;
            if next == target {
                best_target = Some(key);
            }
            if pending[next.index()].is_none_or(|p| key < p) {
                pending[next.index()] = Some(key);
                heap.push(Reverse((key, next.0)));
            }
        }
    }

    TimeQueryResult {
        arrival: arrival.or(best_target),
        stats,
        labels,
        target,
    }
}

#[derive(Debug)]
pub struct ProfileQueryResult {
    /// Dominant set of connections between the queried stations, stored as
    /// within-day representatives.
    pub set: Vec<Connection>,
    pub stats: QueryStats,
}

/// Profile query: the dominant set of all consistent connections from
/// `source` to `target`, under daily operation.
pub fn profile_query(
    g: &StationGraph,
    source: StationId,
    target: StationId,
) -> Result<ProfileQueryResult, QueryError> {
    check_station(g, source)?;
    check_station(g, target)?;
    Ok(profile_query_engine(g, source, target, |_, _| true))
}

pub(crate) fn profile_query_engine(
    g: &StationGraph,
    source: StationId,
    target: StationId,
    relax_edge: impl FnMut(StationId, StationId) -> bool,
) -> ProfileQueryResult {
    profile_engine_inner(g, source, target, relax_edge, true)
}

fn profile_engine_inner(
    g: &StationGraph,
    source: StationId,
    target: StationId,
    mut relax_edge: impl FnMut(StationId, StationId) -> bool,
    prune: bool,
) -> ProfileQueryResult {
    let tt = g.timetable();
    let n = g.node_count();
    let mut labels: Vec<Option<EdgeConnectionSet>> = vec![None; n];
    let mut heap: BinaryHeap<Reverse<(u32, u32)>> = BinaryHeap::new();
    let mut pending: Vec<Option<u32>> = vec![None; n];
    heap.push(Reverse((0, source.0)));
    pending[source.index()] = Some(0);

    let mut stats = QueryStats::default();
    let mut bound: Option<u32> = None;

    while let Some(Reverse((key, s))) = heap.pop() {
        let station = StationId(s);
        if pending[station.index()] != Some(key) {
            continue;
        }
        pending[station.index()] = None;
        stats.delete_mins += 1;

        if let Some(b) = bound {
            if key > b {
                break;
            }
        }

        for (next, edge) in g.out_edges(station) {
            if !relax_edge(station, next) {
                continue;
            }
            let new_min = relax_profile_edge(&mut labels, station, next, edge, source, tt);
            let Some(new_min) = new_min else { continue };
            if prune && next == target {
                bound = max_duration(labels[target.index()].as_ref().unwrap().connections())
                    .map(|d| d + profile_slack(tt, source, target));
            }
            if pending[next.index()].is_none_or(|p| new_min < p) {
                pending[next.index()] = Some(new_min);
                heap.push(Reverse((new_min, next.0)));
            }
        }
    }

    let set = labels[target.index()]
        .take()
        .map(|s| s.connections().to_vec())
        .unwrap_or_default();
    let set = if source == target { Vec::new() } else { set };
    ProfileQueryResult { set, stats }
}

/// Relaxes one edge for the profile search: links the labels at `station`
/// over the edge (the virtual identity label at the query source copies the
/// edge directly) and merges into the labels at `next`. Returns the minimal
/// length among newly added connections.
fn relax_profile_edge(
    labels: &mut [Option<EdgeConnectionSet>],
    station: StationId,
    next: StationId,
    edge: &EdgeConnectionSet,
    source: StationId,
    tt: &Timetable,
) -> Option<u32> {
    if station != source {
        let ls = labels[station.index()].as_ref()?;
        let (merged, new_min) =
            crate::conn::link_and_minimum_profile(ls, edge, labels[next.index()].as_ref(), tt);
        new_min?;
        labels[next.index()] = Some(merged);
        return new_min;
    }
    // At the source the virtual identity label copies the edge directly, on
    // top of any real source-to-source labels found so far.
    let mut tagged: Vec<(u32, Connection)> = Vec::new();
    if let Some(existing) = &labels[next.index()] {
        tagged.extend(existing.connections().iter().map(|c| (0u32, c.clone())));
    }
    tagged.extend(edge.connections().iter().map(|c| (1u32, c.clone())));
    if let Some(ls) = &labels[station.index()] {
        for p in ls.connections().iter().rev() {
            for_each_link(p, edge, tt, &mut |c| tagged.push((1, c)));
        }
    }
    let closed = close_profile(tagged, source, next, tt);
    let old = labels[next.index()]
        .as_ref()
        .map(|e| e.connections())
        .unwrap_or(&[]);
    let new_min = closed
        .iter()
        .filter(|c| !old.contains(c))
        .map(Connection::length)
        .min()?;
    labels[next.index()] = Some(EdgeConnectionSet::from_closed(closed, source, next, tt));
    Some(new_min)
}

/// Maximum over all departure minutes of the best duration the set offers:
/// the pruning bound of the profile search under daily operation.
pub(crate) fn max_duration(set: &[Connection]) -> Option<u32> {
    if set.is_empty() {
        return None;
    }
    let mut worst = 0;
    for q in set {
        let m = (q.dep + 1) % MINUTES_PER_DAY;
        let here = set
            .iter()
            .map(|c| {
                cycle_difference(
                    crate::time::TimeOfDay::new(m).unwrap(),
                    minute_of_day(c.dep),
                ) + c.length()
            })
            .min()
            .unwrap();
        worst = worst.max(here);
    }
    Some(worst)
}

pub(crate) fn profile_slack(tt: &Timetable, source: StationId, target: StationId) -> u32 {
    tt.transfer(source) + tt.transfer(target) + MINUTES_PER_DAY
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum ExtractError {
    #[error("label is not stored at the target station")]
    UnknownLabel,
    #[error("no predecessor chain reproduces the label")]
    NoPredecessor,
}

/// Reconstructs a consistent journey realizing `chosen` by walking the final
/// label sets backward from the target. Works on the plain graph and on the
/// augmented hierarchy graph alike; shortcut connections unpack into their
/// elementary legs.
pub fn extract_journey(
    g: &StationGraph,
    result: &TimeQueryResult,
    source: StationId,
    t0: Minutes,
    chosen: &ArrivalConnection,
) -> Result<Vec<TimedLeg>, ExtractError> {
    let target = result.target;
    if !result.labels[target.index()].contains(chosen) {
        return Err(ExtractError::UnknownLabel);
    }
    let tt = g.timetable();
    let mut failed: HashSet<(u32, Minutes, Boarding)> = HashSet::new();
    let mut legs = Vec::new();
    if walk_back(
        g,
        tt,
        &result.labels,
        source,
        t0,
        target,
        chosen,
        &mut legs,
        &mut failed,
        0,
    ) {
        legs.reverse();
        let mut flat = Vec::new();
        for chunk in legs {
            flat.extend(chunk);
        }
        Ok(flat)
    } else {
        Err(ExtractError::NoPredecessor)
    }
}

/// Depth-first search for a feeder chain; pushes unpacked leg chunks in
/// reverse journey order. States that lead nowhere are memoized.
#[allow(clippy::too_many_arguments)]
fn walk_back(
    g: &StationGraph,
    tt: &Timetable,
    labels: &[Vec<ArrivalConnection>],
    source: StationId,
    t0: Minutes,
    station: StationId,
    label: &ArrivalConnection,
    legs: &mut Vec<Vec<TimedLeg>>,
    failed: &mut HashSet<(u32, Minutes, Boarding)>,
    depth: u32,
) -> bool {
    if station == source && label.z2 == Boarding::Any && label.arr == t0 {
        return true;
    }
    let state = (station.0, label.arr, label.z2);
    if depth > 4096 || failed.contains(&state) {
        return false;
    }
    let Boarding::At(z2) = label.z2 else {
        return false;
    };

    for prev in g.in_neighbors(station) {
        let edge = g.edge(prev, station).expect("reverse adjacency mirror");
        for q in edge.connections() {
            if q.z2 != z2 || q.length() > label.arr {
                continue;
            }
            let dep_abs = label.arr - q.length();
            if dep_abs % MINUTES_PER_DAY != q.dep % MINUTES_PER_DAY {
                continue;
            }
            for feeder in &labels[prev.index()] {
                let ok = match feeder.z2 {
                    Boarding::Any => dep_abs >= feeder.arr,
                    Boarding::At(fz) => {
                        dep_abs >= feeder.arr
                            && (fz == q.z1 || dep_abs - feeder.arr >= tt.transfer(prev))
                    }
                };
                if !ok {
                    continue;
                }
                let mut chunk = Vec::new();
                q.unpack(dep_abs, &mut chunk);
                legs.push(chunk);
                if walk_back(
                    g,
                    tt,
                    labels,
                    source,
                    t0,
                    prev,
                    feeder,
                    legs,
                    failed,
                    depth + 1,
                ) {
                    return true;
                }
                legs.pop();
            }
        }
    }
    failed.insert(state);
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::graph::build_station_graph;
    use crate::timetable::{check_consistency, ElemId};

    #[test]
    fn overnight_time_query_takes_late_train() {
        let g = build_station_graph(fixtures::overnight_line()).unwrap();
        let r = time_query(&g, StationId(0), StationId(4), 1385).unwrap();
        assert_eq!(r.arrival, Some(1740)); // day 1, 5:00
    }

    #[test]
    fn query_to_self_returns_departure_time() {
        let g = build_station_graph(fixtures::overnight_line()).unwrap();
        let r = time_query(&g, StationId(0), StationId(0), 777).unwrap();
        assert_eq!(r.arrival, Some(777));
        assert_eq!(
            extract_journey(&g, &r, StationId(0), 777, &ArrivalConnection::source(777)).unwrap(),
            vec![]
        );
    }

    #[test]
    fn loop_line_needs_the_full_ride() {
        let g = build_station_graph(fixtures::loop_line()).unwrap();
        let r = time_query(&g, StationId(0), StationId(3), 720).unwrap();
        assert_eq!(r.arrival, Some(724)); // 12:04
    }

    #[test]
    fn unreachable_pair_reports_none() {
        let g = build_station_graph(fixtures::overnight_line()).unwrap();
        // Nothing leaves E.
        let r = time_query(&g, StationId(4), StationId(0), 0).unwrap();
        assert_eq!(r.arrival, None);
    }

    #[test]
    fn unknown_station_rejected() {
        let g = build_station_graph(fixtures::overnight_line()).unwrap();
        assert_eq!(
            time_query(&g, StationId(9), StationId(0), 0).unwrap_err(),
            QueryError::UnknownStation(9)
        );
    }

    #[test]
    fn journey_extraction_matches_reported_arrival() {
        let g = build_station_graph(fixtures::overnight_line()).unwrap();
        let r = time_query(&g, StationId(0), StationId(4), 1385).unwrap();
        let chosen = r.target_labels()[0];
        let legs = extract_journey(&g, &r, StationId(0), 1385, &chosen).unwrap();
        assert_eq!(legs, fixtures::overnight_journey_via_late_train());
        assert_eq!(check_consistency(&legs, g.timetable()), Ok(()));
        assert_eq!(legs.last().unwrap().arr, r.arrival.unwrap());
    }

    #[test]
    fn profile_of_overnight_pair_is_one_daily_connection() {
        let g = build_station_graph(fixtures::overnight_line()).unwrap();
        let r = profile_query(&g, StationId(0), StationId(4)).unwrap();
        assert_eq!(r.set.len(), 1);
        assert_eq!(r.set[0].dep, 1385);
        assert_eq!(r.set[0].length(), 355);
    }

    #[test]
    fn profile_direct_hop() {
        let g = build_station_graph(fixtures::overnight_line()).unwrap();
        let r = profile_query(&g, StationId(0), StationId(1)).unwrap();
        assert_eq!(r.set.len(), 1);
        assert_eq!(r.set[0].dep, 1385);
        assert_eq!(r.set[0].length(), 110);
    }

    #[test]
    fn profile_of_disconnected_pair_is_empty() {
        let g = build_station_graph(fixtures::overnight_line()).unwrap();
        let r = profile_query(&g, StationId(4), StationId(0)).unwrap();
        assert!(r.set.is_empty());
    }

    #[test]
    fn profile_evaluation_reproduces_time_query() {
        let g = build_station_graph(fixtures::overnight_line()).unwrap();
        let profile = profile_query(&g, StationId(0), StationId(4)).unwrap();
        for t0 in [0, 600, 1385, 1386, 2000] {
            let direct = time_query(&g, StationId(0), StationId(4), t0).unwrap();
            let via_profile = profile
                .set
                .iter()
                .map(|c| crate::time::next_instance(t0, minute_of_day(c.dep)) + c.length())
                .min();
            assert_eq!(direct.arrival, via_profile, "t0 = {t0}");
        }
    }

    #[test]
    fn profile_result_is_independent_of_pruning() {
        use crate::synth::random_timetable;
        for seed in 0..15 {
            let tt = random_timetable(seed, 10, 20);
            let g = build_station_graph(tt).unwrap();
            for a in 0..g.node_count() as u32 {
                for b in 0..g.node_count() as u32 {
                    if a == b {
                        continue;
                    }
                    let pruned =
                        profile_engine_inner(&g, StationId(a), StationId(b), |_, _| true, true);
                    let full =
                        profile_engine_inner(&g, StationId(a), StationId(b), |_, _| true, false);
                    assert_eq!(pruned.set, full.set, "({a},{b}) seed {seed}");
                }
            }
        }
    }

    #[test]
    fn loop_line_journey_passes_b_twice() {
        let g = build_station_graph(fixtures::loop_line()).unwrap();
        let r = time_query(&g, StationId(0), StationId(3), 720).unwrap();
        let chosen = r.target_labels()[0];
        let legs = extract_journey(&g, &r, StationId(0), 720, &chosen).unwrap();
        assert_eq!(
            legs.iter().map(|l| l.conn).collect::<Vec<_>>(),
            vec![ElemId(0), ElemId(1), ElemId(2), ElemId(3)]
        );
        assert_eq!(check_consistency(&legs, g.timetable()), Ok(()));
    }
}
