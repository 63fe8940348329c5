//! Independent brute-force reference for consistency, dominance, earliest
//! arrival, and profile sets on small instances.
//!
//! This module deliberately shares only the timetable model with the engine:
//! dominance and search are re-implemented from scratch on explicit timed
//! legs and stop-event instances, so equivalence tests against the
//! connection-set machinery are meaningful.

use std::collections::HashMap;

use crate::time::{next_instance, Minutes, MINUTES_PER_DAY};
use crate::timetable::{check_consistency, ElemId, EventId, StationId, TimedLeg, Timetable};

#[derive(Debug, Clone, Copy)]
pub struct OracleParams {
    pub horizon_days: u32,
    pub max_transfers: u32,
    pub max_legs: u32,
    /// Abort guard for the exhaustive enumeration.
    pub cap: usize,
}

impl Default for OracleParams {
    fn default() -> Self {
        OracleParams {
            horizon_days: 2,
            max_transfers: 6,
            max_legs: 12,
            cap: 2_000_000,
        }
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("enumeration cap exceeded")]
    CapExceeded,
}

/// A consistent connection as an explicit timed leg sequence. Empty legs
/// stand for the empty connection of a station to itself.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleConnection {
    pub legs: Vec<TimedLeg>,
}

impl OracleConnection {
    pub fn dep(&self) -> Option<Minutes> {
        self.legs.first().map(|l| l.dep)
    }

    pub fn arr(&self) -> Option<Minutes> {
        self.legs.last().map(|l| l.arr)
    }

    pub fn pattern(&self, _tt: &Timetable) -> Vec<ElemId> {
        self.legs.iter().map(|l| l.conn).collect()
    }

    pub fn label(&self, tt: &Timetable) -> Option<OracleLabel> {
        let first = self.legs.first()?;
        let last = self.legs.last()?;
        Some(OracleLabel {
            dep: first.dep,
            arr: last.arr,
            z1: tt.elem(first.conn).z1,
            z2: tt.elem(last.conn).z2,
        })
    }
}

/// The journey label `(z1, z2, dep, arr)` of a consistent connection, with
/// absolute times.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct OracleLabel {
    pub dep: Minutes,
    pub arr: Minutes,
    pub z1: EventId,
    pub z2: EventId,
}

fn critical_as_departure(tt: &Timetable, z: EventId) -> bool {
    // The departure event restricts replacement when the train arrived there
    // less than the transfer time before leaving.
    match tt.event(z).dwell() {
        Some(d) => d < tt.transfer(tt.event(z).station),
        None => false,
    }
}

fn critical_as_arrival(tt: &Timetable, z: EventId) -> bool {
    critical_as_departure(tt, z)
}

/// Instance-level domination per the replacement conditions, re-derived on
/// labels: same pair assumed, `p` departs later and arrives earlier, and the
/// boundary events permit the swap.
pub fn label_dominates(p: &OracleLabel, q: &OracleLabel, tt: &Timetable) -> bool {
    if q.dep > p.dep || p.arr > q.arr {
        return false;
    }
    let cond3 = p.z1 == q.z1 || !critical_as_departure(tt, q.z1) || {
        // gap from q's previous arrival (q.dep - dwell, possibly before
        // day 0) to p's departure, rearranged to stay nonnegative
        let dwell = tt.event(q.z1).dwell().unwrap();
        p.dep + dwell - q.dep >= tt.transfer(tt.event(q.z1).station)
    };
    if !cond3 {
        return false;
    }
    p.z2 == q.z2 || !critical_as_arrival(tt, q.z2) || {
        let dwell = tt.event(q.z2).dwell().unwrap();
        let next_dep = q.arr + dwell;
        next_dep >= p.arr && next_dep - p.arr >= tt.transfer(tt.event(q.z2).station)
    }
}

/// Domination allowing `p` to be shifted forward by whole days (daily
/// operation): some instance of `p` must dominate `q`.
pub fn label_dominates_shifted(p: &OracleLabel, q: &OracleLabel, tt: &Timetable) -> bool {
    let len_p = p.arr - p.dep;
    let mut shift = 0u32;
    if p.dep < q.dep {
        shift = (q.dep - p.dep).div_ceil(MINUTES_PER_DAY) * MINUTES_PER_DAY;
    }
    loop {
        let cand = OracleLabel {
            dep: p.dep + shift,
            arr: p.dep + shift + len_p,
            z1: p.z1,
            z2: p.z2,
        };
        if cand.arr > q.arr {
            return false;
        }
        if label_dominates(&cand, q, tt) {
            return true;
        }
        shift += MINUTES_PER_DAY;
    }
}

pub fn label_equivalent(p: &OracleLabel, q: &OracleLabel, tt: &Timetable) -> bool {
    p.dep == q.dep
        && p.arr == q.arr
        && (p.z1 == q.z1 || (!critical_as_departure(tt, p.z1) && !critical_as_departure(tt, q.z1)))
        && (p.z2 == q.z2 || (!critical_as_arrival(tt, p.z2) && !critical_as_arrival(tt, q.z2)))
}

/// All-pairs dominant subset: keeps exactly the labels not dominated by a
/// non-equivalent member, one representative per equivalence class.
pub fn dominant_filter_labels(labels: &[OracleLabel], tt: &Timetable) -> Vec<OracleLabel> {
    let mut out: Vec<OracleLabel> = Vec::new();
    'cand: for (i, q) in labels.iter().enumerate() {
        for (j, p) in labels.iter().enumerate() {
            if i == j {
                continue;
            }
            if label_equivalent(p, q, tt) {
                // keep the first member of each class
                if j < i {
                    continue 'cand;
                }
            } else if label_dominates_shifted(p, q, tt) {
                continue 'cand;
            }
        }
        out.push(*q);
    }
    out
}

/// Dominant subset of explicit connections via their labels.
pub fn dominant_filter(conns: &[OracleConnection], tt: &Timetable) -> Vec<OracleConnection> {
    let labels: Vec<Option<OracleLabel>> = conns.iter().map(|c| c.label(tt)).collect();
    let mut out = Vec::new();
    'cand: for (i, q) in labels.iter().enumerate() {
        let Some(q) = q else {
            out.push(conns[i].clone());
            continue;
        };
        for (j, p) in labels.iter().enumerate() {
            let Some(p) = p else { continue };
            if i == j {
                continue;
            }
            if label_equivalent(p, q, tt) {
                if j < i {
                    continue 'cand;
                }
            } else if label_dominates_shifted(p, q, tt) {
                continue 'cand;
            }
        }
        out.push(conns[i].clone());
    }
    out
}

/// Exhaustive depth-first enumeration of the consistent connections from
/// `from` to `to` within the given bounds. `t0 = None` enumerates day-0
/// departures. The empty connection is returned for `from == to`.
pub fn enumerate_consistent(
    tt: &Timetable,
    from: StationId,
    to: StationId,
    t0: Option<Minutes>,
    p: &OracleParams,
) -> Result<Vec<OracleConnection>, OracleError> {
    let mut out = Vec::new();
    if from == to {
        out.push(OracleConnection { legs: Vec::new() });
    }
    let mut visited = 0usize;
    for (idx, c) in tt.elementary.iter().enumerate() {
        if c.from != from {
            continue;
        }
        // Day-0 departures for open queries; all in-horizon instances for a
        // concrete departure time.
        let (instances, horizon_end): (Vec<Minutes>, Minutes) = match t0 {
            None => {
                let dep0 = c.dep.minutes();
                (vec![dep0], dep0 + p.horizon_days * MINUTES_PER_DAY)
            }
            Some(t) => {
                let end = t + p.horizon_days * MINUTES_PER_DAY;
                let mut v = Vec::new();
                let mut d = next_instance(t, c.dep);
                while d + c.length() <= end {
                    v.push(d);
                    d += MINUTES_PER_DAY;
                }
                (v, end)
            }
        };
        for dep in instances {
            let leg = TimedLeg {
                conn: ElemId(idx as u32),
                dep,
                arr: dep + c.length(),
            };
            let mut legs = vec![leg];
            extend(tt, to, horizon_end, p, &mut legs, 0, &mut out, &mut visited)?;
        }
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn extend(
    tt: &Timetable,
    to: StationId,
    horizon: Minutes,
    p: &OracleParams,
    legs: &mut Vec<TimedLeg>,
    transfers: u32,
    out: &mut Vec<OracleConnection>,
    visited: &mut usize,
) -> Result<(), OracleError> {
    *visited += 1;
    if *visited > p.cap {
        return Err(OracleError::CapExceeded);
    }
    let last = *legs.last().unwrap();
    let last_conn = tt.elem(last.conn);
    if last_conn.to == to {
        out.push(OracleConnection { legs: legs.clone() });
    }
    if legs.len() as u32 >= p.max_legs {
        return Ok(());
    }
    for (idx, d) in tt.elementary.iter().enumerate() {
        if d.from != last_conn.to {
            continue;
        }
        let same_event = d.z1 == last_conn.z2;
        if !same_event && transfers >= p.max_transfers {
            continue;
        }
        let earliest = if same_event {
            last.arr
        } else {
            last.arr + tt.transfer(last_conn.to)
        };
        let mut dep = next_instance(earliest, d.dep);
        while dep + d.length() <= horizon {
            legs.push(TimedLeg {
                conn: ElemId(idx as u32),
                dep,
                arr: dep + d.length(),
            });
            extend(
                tt,
                to,
                horizon,
                p,
                legs,
                transfers + u32::from(!same_event),
                out,
                visited,
            )?;
            legs.pop();
            dep += MINUTES_PER_DAY;
        }
    }
    Ok(())
}

/// State of the timed-event reachability search: a stop event reached on a
/// specific day with a transfer and leg budget spent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct EventState {
    event: EventId,
    day: u32,
}

/// Earliest arrival per station for a query from `from` at `t0`, by
/// exhaustive label search over stop-event instances. Complete within the
/// horizon and transfer/leg bounds.
pub fn earliest_arrival_all(
    tt: &Timetable,
    from: StationId,
    t0: Minutes,
    p: &OracleParams,
) -> Vec<Option<Minutes>> {
    let horizon = t0 + p.horizon_days * MINUTES_PER_DAY;
    let mut best: Vec<Option<Minutes>> = vec![None; tt.stations.len()];
    best[from.index()] = Some(t0);
    let mut frontier: Vec<(EventId, Minutes, u32, u32)> = Vec::new();
    let mut seen: HashMap<EventState, Vec<(u32, u32)>> = HashMap::new();

    // Board anything leaving the source at or after t0, no transfer needed.
    for (idx, c) in tt.elementary.iter().enumerate() {
        if c.from != from {
            continue;
        }
        let dep = next_instance(t0, c.dep);
        let arr = dep + c.length();
        if arr <= horizon {
            push_state(tt, &mut frontier, &mut seen, ElemId(idx as u32), arr, 0, 1);
        }
    }

    while let Some((event, arr, transfers, legs)) = frontier.pop() {
        let station = tt.event(event).station;
        if best[station.index()].is_none_or(|b| arr < b) {
            best[station.index()] = Some(arr);
        }
        if legs >= p.max_legs {
            continue;
        }
        for (idx, d) in tt.elementary.iter().enumerate() {
            if d.from != station {
                continue;
            }
            let same_event = d.z1 == event;
            if !same_event && transfers >= p.max_transfers {
                continue;
            }
            let earliest = if same_event {
                arr
            } else {
                arr + tt.transfer(station)
            };
            let dep = next_instance(earliest, d.dep);
            let next_arr = dep + d.length();
            if next_arr > horizon {
                continue;
            }
            push_state(
                tt,
                &mut frontier,
                &mut seen,
                ElemId(idx as u32),
                next_arr,
                transfers + u32::from(!same_event),
                legs + 1,
            );
        }
    }
    best
}

/// Pareto-prunes on (transfers, legs) per arrival-event instance before
/// expanding, so each useful state is expanded once.
fn push_state(
    tt: &Timetable,
    frontier: &mut Vec<(EventId, Minutes, u32, u32)>,
    seen: &mut HashMap<EventState, Vec<(u32, u32)>>,
    via: ElemId,
    arr: Minutes,
    transfers: u32,
    legs: u32,
) {
    let event = tt.elem(via).z2;
    let state = EventState {
        event,
        day: arr / MINUTES_PER_DAY,
    };
    let entry = seen.entry(state).or_default();
    if entry.iter().any(|&(t, l)| t <= transfers && l <= legs) {
        return;
    }
    entry.retain(|&(t, l)| !(transfers <= t && legs <= l));
    entry.push((transfers, legs));
    frontier.push((event, arr, transfers, legs));
}

pub fn earliest_arrival(
    tt: &Timetable,
    from: StationId,
    to: StationId,
    t0: Minutes,
    p: &OracleParams,
) -> Option<Minutes> {
    earliest_arrival_all(tt, from, t0, p)[to.index()]
}

/// Labels of the consistent day-0-departing connections from `from` to
/// every station, reachable within the bounds; feed a station's list
/// through `dominant_filter_labels` for its dominant profile set.
pub fn profile_labels_all(
    tt: &Timetable,
    from: StationId,
    p: &OracleParams,
) -> Vec<Vec<OracleLabel>> {
    let mut out: Vec<Vec<OracleLabel>> = vec![Vec::new(); tt.stations.len()];
    for (idx, c) in tt.elementary.iter().enumerate() {
        if c.from != from {
            continue;
        }
        let dep0 = c.dep.minutes();
        let horizon = dep0 + p.horizon_days * MINUTES_PER_DAY;
        let z1 = c.z1;
        let first_arr = dep0 + c.length();
        if first_arr > horizon {
            continue;
        }
        let mut frontier: Vec<(EventId, Minutes, u32, u32)> = Vec::new();
        let mut seen: HashMap<EventState, Vec<(u32, u32)>> = HashMap::new();
        push_state(
            tt,
            &mut frontier,
            &mut seen,
            ElemId(idx as u32),
            first_arr,
            0,
            1,
        );
        while let Some((event, arr, transfers, legs)) = frontier.pop() {
            let station = tt.event(event).station;
            let label = OracleLabel {
                dep: dep0,
                arr,
                z1,
                z2: event,
            };
            if !out[station.index()].contains(&label) {
                out[station.index()].push(label);
            }
            if legs >= p.max_legs {
                continue;
            }
            for (didx, d) in tt.elementary.iter().enumerate() {
                if d.from != station {
                    continue;
                }
                let same_event = d.z1 == event;
                if !same_event && transfers >= p.max_transfers {
                    continue;
                }
                let earliest = if same_event {
                    arr
                } else {
                    arr + tt.transfer(station)
                };
                let dep = next_instance(earliest, d.dep);
                let next_arr = dep + d.length();
                if next_arr > horizon {
                    continue;
                }
                push_state(
                    tt,
                    &mut frontier,
                    &mut seen,
                    ElemId(didx as u32),
                    next_arr,
                    transfers + u32::from(!same_event),
                    legs + 1,
                );
            }
        }
    }
    out
}

/// Day-0 profile labels for one station pair.
pub fn profile_labels(
    tt: &Timetable,
    from: StationId,
    to: StationId,
    p: &OracleParams,
) -> Vec<OracleLabel> {
    profile_labels_all(tt, from, p).swap_remove(to.index())
}

/// Enumerated enclosing connections for the replacement check: prefix and
/// suffix leg chains (in journey order) that extend `q` consistently, with
/// up to `ext_legs` legs on each side and two day-instances per candidate.
pub fn enclosing_connections(
    tt: &Timetable,
    q: &OracleConnection,
    ext_legs: u32,
) -> Vec<(Vec<TimedLeg>, Vec<TimedLeg>)> {
    let mut prefixes: Vec<Vec<TimedLeg>> = vec![Vec::new()];
    if let Some(first) = q.legs.first() {
        prefixes.extend(backward_chains(tt, *first, ext_legs));
    }
    let mut suffixes: Vec<Vec<TimedLeg>> = vec![Vec::new()];
    if let Some(last) = q.legs.last() {
        suffixes.extend(forward_chains(tt, *last, ext_legs));
    }
    let mut out = Vec::new();
    for pre in &prefixes {
        for suf in &suffixes {
            out.push((pre.clone(), suf.clone()));
        }
    }
    out
}

/// Leg chains that can immediately precede `next`, in journey order.
fn backward_chains(tt: &Timetable, next: TimedLeg, budget: u32) -> Vec<Vec<TimedLeg>> {
    let mut out = Vec::new();
    if budget == 0 {
        return out;
    }
    let next_conn = tt.elem(next.conn);
    for (idx, e) in tt.elementary.iter().enumerate() {
        if e.to != next_conn.from {
            continue;
        }
        let gap = if e.z2 == next_conn.z1 {
            0
        } else {
            tt.transfer(next_conn.from)
        };
        let Some(bound) = next.dep.checked_sub(gap) else {
            continue;
        };
        if bound < e.arr.minutes() {
            continue;
        }
        // latest aligned arrival not after the bound, then one day earlier
        let mut arr = bound - ((bound - e.arr.minutes()) % MINUTES_PER_DAY);
        for _ in 0..2 {
            if let Some(dep) = arr.checked_sub(e.length()) {
                let leg = TimedLeg {
                    conn: ElemId(idx as u32),
                    dep,
                    arr,
                };
                out.push(vec![leg]);
                for mut chain in backward_chains(tt, leg, budget - 1) {
                    chain.push(leg);
                    out.push(chain);
                }
            }
            match arr.checked_sub(MINUTES_PER_DAY) {
                Some(a) => arr = a,
                None => break,
            }
        }
    }
    out
}

/// Leg chains that can immediately follow `prev`, in journey order.
fn forward_chains(tt: &Timetable, prev: TimedLeg, budget: u32) -> Vec<Vec<TimedLeg>> {
    let mut out = Vec::new();
    if budget == 0 {
        return out;
    }
    let prev_conn = tt.elem(prev.conn);
    for (idx, e) in tt.elementary.iter().enumerate() {
        if e.from != prev_conn.to {
            continue;
        }
        let earliest = if e.z1 == prev_conn.z2 {
            prev.arr
        } else {
            prev.arr + tt.transfer(prev_conn.to)
        };
        let mut dep = next_instance(earliest, e.dep);
        for _ in 0..2 {
            let leg = TimedLeg {
                conn: ElemId(idx as u32),
                dep,
                arr: dep + e.length(),
            };
            out.push(vec![leg]);
            for chain in forward_chains(tt, leg, budget - 1) {
                let mut full = vec![leg];
                full.extend(chain);
                out.push(full);
            }
            dep += MINUTES_PER_DAY;
        }
    }
    out
}

/// Replacement oracle for connections: `p` dominates `q` exactly when every
/// enumerated enclosing connection of `q` stays consistent, and no worse,
/// after swapping in `p`. Returns the first violating enclosure found.
pub fn replacement_dominates(
    tt: &Timetable,
    p: &OracleConnection,
    q: &OracleConnection,
    ext_legs: u32,
) -> Result<(), Vec<TimedLeg>> {
    for (pre, suf) in enclosing_connections(tt, q, ext_legs) {
        let mut r: Vec<TimedLeg> = pre.clone();
        r.extend(q.legs.iter().copied());
        r.extend(suf.iter().copied());
        if check_consistency(&r, tt).is_err() {
            continue; // not a valid enclosure
        }
        let mut replaced: Vec<TimedLeg> = pre.clone();
        replaced.extend(p.legs.iter().copied());
        replaced.extend(suf.iter().copied());
        let consistent = check_consistency(&replaced, tt).is_ok();
        let dep_ok = replaced.first().map(|l| l.dep) >= r.first().map(|l| l.dep);
        let arr_ok = replaced.last().map(|l| l.arr) <= r.last().map(|l| l.arr);
        let dep_le_arr = match (replaced.first(), replaced.last()) {
            (Some(f), Some(l)) => f.dep <= l.arr,
            _ => true,
        };
        if !(consistent && dep_ok && arr_ok && dep_le_arr) {
            return Err(r);
        }
    }
    Ok(())
}

/// Replacement oracle for arrival connections: `p` may stand in for `q` as
/// the prefix of any consistent extension without arriving later. Returns a
/// violating extension when one exists.
pub fn replacement_dominates_arrival(
    tt: &Timetable,
    p: &OracleConnection,
    q: &OracleConnection,
    ext_legs: u32,
) -> Result<(), Vec<TimedLeg>> {
    let (Some(p_arr), Some(q_arr)) = (p.arr(), q.arr()) else {
        return Ok(());
    };
    if p_arr > q_arr {
        return Err(q.legs.clone());
    }
    let Some(last) = q.legs.last() else {
        return Ok(());
    };
    for suffix in forward_chains(tt, *last, ext_legs) {
        let mut r = q.legs.clone();
        r.extend(suffix.iter().copied());
        if check_consistency(&r, tt).is_err() {
            continue;
        }
        let mut replaced = p.legs.clone();
        replaced.extend(suffix.iter().copied());
        if check_consistency(&replaced, tt).is_err() {
            return Err(r);
        }
    }
    Ok(())
}
