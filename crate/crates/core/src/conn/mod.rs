//! Connections, arrival connections, and the relaxed Pareto dominance that
//! drives every set operation in the engine.
//!
//! A stored connection is a within-day representative: `dep` lies in
//! `[0, 1440)` and the array conceptually repeats every day (the outrolled
//! view). Query-side instances use absolute minutes instead.

mod edge_set;
mod link;
mod sweep;

pub use edge_set::{EdgeConnectionSet, EdgeSetError};
pub(crate) use link::for_each_link;
pub use link::{
    link_and_minimum_profile, link_and_minimum_time, link_edges, link_time, minimum_arrivals,
    minimum_connections,
};
pub use sweep::{close_arrivals, close_profile, SweepBuffer};

use std::fmt;
use std::sync::Arc;

use crate::time::{cycle_difference, minute_of_day, Minutes, MINUTES_PER_DAY};
use crate::timetable::{ElemId, EventId, StationId, TimedLeg, Timetable};

/// Where a connection came from: a single elementary hop, or the link of two
/// connections at a middle station (shortcuts and profile labels).
#[derive(Clone)]
pub enum ConnSource {
    Elem(ElemId),
    Via(Arc<ViaRecord>),
}

/// Unpacking record of a linked connection.
pub struct ViaRecord {
    pub middle: StationId,
    pub left: Connection,
    pub right: Connection,
    /// Minutes from the left part's departure to the right part's departure.
    pub right_offset: u32,
}

/// A journey label `(Z1, Z2, dep, arr)` between two stations that are given
/// by context (edge endpoints or query).
#[derive(Clone)]
pub struct Connection {
    pub z1: EventId,
    pub z2: EventId,
    pub dep: Minutes,
    pub arr: Minutes,
    pub source: ConnSource,
}

impl Connection {
    pub fn elementary(id: ElemId, tt: &Timetable) -> Connection {
        let c = tt.elem(id);
        Connection {
            z1: c.z1,
            z2: c.z2,
            dep: c.dep.minutes(),
            arr: c.dep.minutes() + c.length(),
            source: ConnSource::Elem(id),
        }
    }

    pub fn length(&self) -> u32 {
        self.arr - self.dep
    }

    /// True when the departure-side stop event restricts replaceability.
    pub fn critical_dep(&self, tt: &Timetable) -> bool {
        tt.event_critical(self.z1)
    }

    pub fn critical_arr(&self, tt: &Timetable) -> bool {
        tt.event_critical(self.z2)
    }

    /// Expands to elementary legs for the instance departing at `dep`.
    pub fn unpack(&self, dep: Minutes, out: &mut Vec<TimedLeg>) {
        match &self.source {
            ConnSource::Elem(id) => out.push(TimedLeg {
                conn: *id,
                dep,
                arr: dep + self.length(),
            }),
            ConnSource::Via(v) => {
                v.left.unpack(dep, out);
                v.right.unpack(dep + v.right_offset, out);
            }
        }
    }

    /// Number of graph edges this connection was linked from.
    pub fn link_hops(&self) -> u32 {
        match &self.source {
            ConnSource::Elem(_) => 1,
            ConnSource::Via(v) => v.left.link_hops() + 1,
        }
    }
}

/// Identity on `(z1, z2, dep, arr)`; the unpacking record does not
/// participate in comparisons.
impl PartialEq for Connection {
    fn eq(&self, other: &Self) -> bool {
        self.z1 == other.z1 && self.z2 == other.z2 && self.dep == other.dep && self.arr == other.arr
    }
}
impl Eq for Connection {}

impl fmt::Debug for Connection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Conn(z{}->z{}, {}->{})",
            self.z1.0, self.z2.0, self.dep, self.arr
        )
    }
}

/// Arrival side of a boarding reference: either a real stop event or the
/// boarding sentinel that a time query starts from.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Boarding {
    /// The query source sentinel: boards every connection departing at or
    /// after its time, with no transfer time added. Never critical.
    Any,
    At(EventId),
}

impl fmt::Debug for Boarding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Boarding::Any => write!(f, "*"),
            Boarding::At(z) => write!(f, "z{}", z.0),
        }
    }
}

/// A query label `(arr, Z2)` at a station given by context.
#[derive(Clone, Copy, PartialEq, Eq)]
pub struct ArrivalConnection {
    pub arr: Minutes,
    pub z2: Boarding,
}

impl ArrivalConnection {
    pub fn source(t0: Minutes) -> ArrivalConnection {
        ArrivalConnection {
            arr: t0,
            z2: Boarding::Any,
        }
    }

    pub fn critical(&self, tt: &Timetable) -> bool {
        match self.z2 {
            Boarding::Any => false,
            Boarding::At(z) => tt.event_critical(z),
        }
    }
}

impl fmt::Debug for ArrivalConnection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Arr({}, {:?})", self.arr, self.z2)
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum DominationError {
    #[error("connections do not run between the same station pair")]
    StationPairMismatch,
    #[error("arrival connections lie at different stations")]
    StationMismatch,
}

/// Instance-level domination of connections sharing a station pair:
/// `p` departs no earlier and arrives no later than `q`, and the boundary
/// stop events allow replacing `q` by `p` in any enclosing connection.
pub fn dominates_connection(p: &Connection, q: &Connection, tt: &Timetable) -> bool {
    if q.dep > p.dep || p.arr > q.arr {
        return false;
    }
    connection_transfer_conditions(p.z1, p.z2, p.dep, p.arr, q, tt)
}

/// Checked variant that enforces condition (1) on the supplied station pair.
pub fn try_dominates_connection(
    p: &Connection,
    q: &Connection,
    from: StationId,
    to: StationId,
    tt: &Timetable,
) -> Result<bool, DominationError> {
    let ok = |c: &Connection| tt.event(c.z1).station == from && tt.event(c.z2).station == to;
    if !ok(p) || !ok(q) {
        return Err(DominationError::StationPairMismatch);
    }
    Ok(dominates_connection(p, q, tt))
}

/// Transfer conditions (3) and (4) for an instance of `p` departing at
/// `p_dep` and arriving at `p_arr` against `q`: the replacement stays
/// consistent at a critical boundary when the events coincide or the gap to
/// the neighboring train covers the transfer time.
fn connection_transfer_conditions(
    p_z1: EventId,
    p_z2: EventId,
    p_dep: Minutes,
    p_arr: Minutes,
    q: &Connection,
    tt: &Timetable,
) -> bool {
    let cond3 = p_z1 == q.z1 || !q.critical_dep(tt) || {
        // p_dep - (q.dep - dwell) without going below day 0
        let dwell = tt.event(q.z1).dwell().expect("critical implies dwell");
        p_dep + dwell - q.dep >= tt.transfer(tt.event(q.z1).station)
    };
    if !cond3 {
        return false;
    }
    p_z2 == q.z2 || !q.critical_arr(tt) || {
        let ndep_q = tt
            .next_departure(q.z2, q.arr)
            .expect("critical implies dwell");
        ndep_q >= p_arr && ndep_q - p_arr >= tt.transfer(tt.event(q.z2).station)
    }
}

/// Periodic domination between within-day representatives under daily
/// operation: some day-shifted instance of `p` dominates every instance of
/// `q`. Only the two smallest aligned shifts can matter.
pub fn dominates_periodic(p: &Connection, q: &Connection, tt: &Timetable) -> bool {
    let (pl, ql) = (p.length(), q.length());
    if pl > ql {
        return false;
    }
    let d0 = cycle_difference(minute_of_day(q.dep), minute_of_day(p.dep));
    for delta in [d0, d0 + MINUTES_PER_DAY] {
        if delta + pl > ql {
            break;
        }
        let p_dep = q.dep + delta;
        let p_arr = p_dep + pl;
        if connection_transfer_conditions(p.z1, p.z2, p_dep, p_arr, q, tt) {
            return true;
        }
    }
    false
}

/// Domination of arrival connections at the same station. The boarding
/// sentinel dominates every later arrival (it boards anything with no
/// transfer) and is only ever dominated by itself.
pub fn dominates_arrival(p: &ArrivalConnection, q: &ArrivalConnection, tt: &Timetable) -> bool {
    if p.arr > q.arr {
        return false;
    }
    match (p.z2, q.z2) {
        (_, Boarding::Any) => p.z2 == Boarding::Any,
        (Boarding::Any, _) => true,
        (Boarding::At(pz), Boarding::At(qz)) => {
            pz == qz || !tt.event_critical(qz) || {
                let ndep_q = tt
                    .next_departure(qz, q.arr)
                    .expect("critical implies dwell");
                ndep_q >= p.arr && ndep_q - p.arr >= tt.transfer(tt.event(qz).station)
            }
        }
    }
}

/// Checked variant enforcing condition (1) for arrival connections.
pub fn try_dominates_arrival(
    p: &ArrivalConnection,
    q: &ArrivalConnection,
    station: StationId,
    tt: &Timetable,
) -> Result<bool, DominationError> {
    let ok = |a: &ArrivalConnection| match a.z2 {
        Boarding::Any => true,
        Boarding::At(z) => tt.event(z).station == station,
    };
    if !ok(p) || !ok(q) {
        return Err(DominationError::StationMismatch);
    }
    Ok(dominates_arrival(p, q, tt))
}

/// Equivalence of within-day representatives: same times and both end pairs
/// interchangeable (identical events, or not critical on that side).
pub fn equivalent_connections(p: &Connection, q: &Connection, tt: &Timetable) -> bool {
    p.dep == q.dep
        && p.arr == q.arr
        && (p.z1 == q.z1 || (!p.critical_dep(tt) && !q.critical_dep(tt)))
        && (p.z2 == q.z2 || (!p.critical_arr(tt) && !q.critical_arr(tt)))
}

pub fn equivalent_arrivals(p: &ArrivalConnection, q: &ArrivalConnection, tt: &Timetable) -> bool {
    p.arr == q.arr && (p.z2 == q.z2 || (!p.critical(tt) && !q.critical(tt)))
}

/// The two storage orders. `Profile` is the order of every stored connection
/// array; `Time` only shows up for arrival-connection handling.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrderKind {
    Time,
    Profile,
}

/// Total order on connections for the given kind. `Profile`: departure
/// ascending, length descending, non-critical before critical on both ends,
/// then stop events. `Time`: departure, arrival, critical arrival first.
pub fn compare_connections(
    kind: OrderKind,
    a: &Connection,
    b: &Connection,
    tt: &Timetable,
) -> std::cmp::Ordering {
    match kind {
        OrderKind::Profile => a
            .dep
            .cmp(&b.dep)
            .then(b.length().cmp(&a.length()))
            .then(a.critical_dep(tt).cmp(&b.critical_dep(tt)))
            .then(a.critical_arr(tt).cmp(&b.critical_arr(tt)))
            .then(a.z1.cmp(&b.z1))
            .then(a.z2.cmp(&b.z2)),
        OrderKind::Time => a
            .dep
            .cmp(&b.dep)
            .then(a.arr.cmp(&b.arr))
            .then(b.critical_arr(tt).cmp(&a.critical_arr(tt)))
            .then(a.z1.cmp(&b.z1))
            .then(a.z2.cmp(&b.z2)),
    }
}

/// Order of arrival-connection arrays: arrival ascending, then the boarding
/// sentinel, then critical arrivals before non-critical ones, so no entry
/// dominates an entry with a lower index.
pub fn compare_arrivals(
    a: &ArrivalConnection,
    b: &ArrivalConnection,
    tt: &Timetable,
) -> std::cmp::Ordering {
    a.arr
        .cmp(&b.arr)
        .then(arrival_sort_rank(a, tt).cmp(&arrival_sort_rank(b, tt)))
        .then(a.z2.cmp(&b.z2))
}

pub(crate) fn arrival_sort_rank(a: &ArrivalConnection, tt: &Timetable) -> u8 {
    match a.z2 {
        Boarding::Any => 0,
        Boarding::At(_) if a.critical(tt) => 1,
        Boarding::At(_) => 2,
    }
}

/// Access to the connection inside richer labels, so closure sweeps work on
/// plain connections and on labels carrying search metadata alike.
pub trait ConnLike {
    fn conn(&self) -> &Connection;
}

impl ConnLike for Connection {
    fn conn(&self) -> &Connection {
        self
    }
}
