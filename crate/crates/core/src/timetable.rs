//! Core timetable model: stations, stop events, elementary connections, and
//! the consistency rules for sequences of timed legs.

use std::fmt;

use crate::time::{
    cycle_difference, format_abs, minute_of_day, Minutes, TimeOfDay, MINUTES_PER_DAY,
};

macro_rules! id_type {
    ($name:ident) => {
        #[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub struct $name(pub u32);

        impl $name {
            pub fn index(self) -> usize {
                self.0 as usize
            }
        }

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, concat!(stringify!($name), "({})"), self.0)
            }
        }
    };
}

id_type!(StationId);
id_type!(EventId);
id_type!(TrainId);
id_type!(ElemId);

/// A station with its minimum transfer time in minutes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Station {
    pub name: String,
    pub transfer: u32,
}

/// One arrival/departure occurrence of a train at a station. A train that
/// begins at the station has no arrival time, one that ends there has no
/// departure time.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StopEvent {
    pub station: StationId,
    pub arrival: Option<TimeOfDay>,
    pub departure: Option<TimeOfDay>,
    pub train: TrainId,
}

impl StopEvent {
    /// Minutes the train rests at the station, when it both arrives and departs.
    pub fn dwell(&self) -> Option<u32> {
        match (self.arrival, self.departure) {
            (Some(a), Some(d)) => Some(cycle_difference(a, d)),
            _ => None,
        }
    }
}

/// One train hop between consecutive stops, `(z1, z2, s1, s2, td, ta)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ElementaryConnection {
    pub z1: EventId,
    pub z2: EventId,
    pub from: StationId,
    pub to: StationId,
    pub dep: TimeOfDay,
    pub arr: TimeOfDay,
}

impl ElementaryConnection {
    pub fn length(&self) -> u32 {
        cycle_difference(self.dep, self.arr)
    }
}

/// An elementary connection pinned to absolute departure/arrival minutes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TimedLeg {
    pub conn: ElemId,
    pub dep: Minutes,
    pub arr: Minutes,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Timetable {
    pub stations: Vec<Station>,
    pub events: Vec<StopEvent>,
    pub elementary: Vec<ElementaryConnection>,
    /// Number of traffic days. Trains run daily; this only bounds horizons.
    pub traffic_days: u32,
}

impl Timetable {
    pub fn station(&self, id: StationId) -> &Station {
        &self.stations[id.index()]
    }

    pub fn event(&self, id: EventId) -> &StopEvent {
        &self.events[id.index()]
    }

    pub fn elem(&self, id: ElemId) -> &ElementaryConnection {
        &self.elementary[id.index()]
    }

    pub fn transfer(&self, station: StationId) -> u32 {
        self.stations[station.index()].transfer
    }

    /// Whether a stop event restricts replaceability: it has both an arrival
    /// and a departure and the dwell is below the station's transfer time.
    pub fn event_critical(&self, id: EventId) -> bool {
        let ev = self.event(id);
        match ev.dwell() {
            Some(d) => d < self.transfer(ev.station),
            None => false,
        }
    }

    /// Arrival of the train at the departure-side event, aligned to the day
    /// of the given absolute departure; negative when that lies before day-0
    /// midnight. `None` when the train begins there.
    pub fn prev_arrival(&self, z1: EventId, dep: Minutes) -> Option<i64> {
        self.event(z1).dwell().map(|d| dep as i64 - d as i64)
    }

    /// Departure of the train from the arrival-side event, aligned to the day
    /// of the given absolute arrival. `None` when the train ends there.
    pub fn next_departure(&self, z2: EventId, arr: Minutes) -> Option<Minutes> {
        self.event(z2).dwell().map(|d| arr + d)
    }

    /// Validity hook for traffic days. Trains are assumed to operate daily,
    /// so every day is valid; the departure day of the first leg decides.
    pub fn valid_on_day(&self, _conn: ElemId, _day: u32) -> bool {
        true
    }

    pub fn validate(&self) -> Vec<Violation> {
        validate_timetable(self)
    }
}

/// Boundary context of a connection: previous arrival and next departure at
/// the end events, residence times, and criticality flags.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EventContext {
    pub prev_arrival: Option<i64>,
    pub next_departure: Option<Minutes>,
    pub residence_dep: Option<u32>,
    pub residence_arr: Option<u32>,
    pub critical_dep: bool,
    pub critical_arr: bool,
}

/// Context for a connection departing with event `z1` at absolute `dep` and
/// arriving with event `z2` at absolute `arr`. `None` events stand for the
/// boarding sentinel, which has no context and is never critical.
pub fn stop_event_context(
    tt: &Timetable,
    z1: Option<EventId>,
    dep: Minutes,
    z2: Option<EventId>,
    arr: Minutes,
) -> EventContext {
    let prev_arrival = z1.and_then(|z| tt.prev_arrival(z, dep));
    let next_departure = z2.and_then(|z| tt.next_departure(z, arr));
    let residence_dep = z1.and_then(|z| tt.event(z).dwell());
    let residence_arr = next_departure.map(|n| n - arr);
    let critical_dep = match (z1, residence_dep) {
        (Some(z), Some(r)) => r < tt.transfer(tt.event(z).station),
        _ => false,
    };
    let critical_arr = match (z2, residence_arr) {
        (Some(z), Some(r)) => r < tt.transfer(tt.event(z).station),
        _ => false,
    };
    EventContext {
        prev_arrival,
        next_departure,
        residence_dep,
        residence_arr,
        critical_dep,
        critical_arr,
    }
}

/// Why a leg sequence fails to be a consistent connection.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConsistencyError {
    Empty,
    DanglingConnection { leg: usize },
    InvalidDay { leg: usize, day: u32 },
    StationChain { leg: usize },
    DepartureMismatch { leg: usize },
    ArrivalMismatch { leg: usize },
    TransferGap { leg: usize, gap: i64, required: u32 },
}

impl fmt::Display for ConsistencyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConsistencyError::Empty => write!(f, "empty leg sequence"),
            ConsistencyError::DanglingConnection { leg } => {
                write!(f, "leg {leg}: unknown elementary connection")
            }
            ConsistencyError::InvalidDay { leg, day } => {
                write!(f, "leg {leg}: not valid on day {day}")
            }
            ConsistencyError::StationChain { leg } => {
                write!(
                    f,
                    "leg {leg}: departure station differs from previous arrival station"
                )
            }
            ConsistencyError::DepartureMismatch { leg } => {
                write!(
                    f,
                    "leg {leg}: departure time does not match the timetable minute"
                )
            }
            ConsistencyError::ArrivalMismatch { leg } => {
                write!(f, "leg {leg}: arrival is not departure plus length")
            }
            ConsistencyError::TransferGap { leg, gap, required } => {
                write!(f, "leg {leg}: gap {gap} below required {required}")
            }
        }
    }
}

/// Checks the five consistency conditions on a timed leg sequence and reports
/// the first violation.
pub fn check_consistency(legs: &[TimedLeg], tt: &Timetable) -> Result<(), ConsistencyError> {
    if legs.is_empty() {
        return Err(ConsistencyError::Empty);
    }
    for (i, leg) in legs.iter().enumerate() {
        if leg.conn.index() >= tt.elementary.len() {
            return Err(ConsistencyError::DanglingConnection { leg: i });
        }
        let c = tt.elem(leg.conn);
        let day = leg.dep / MINUTES_PER_DAY;
        if !tt.valid_on_day(leg.conn, day) {
            return Err(ConsistencyError::InvalidDay { leg: i, day });
        }
        if minute_of_day(leg.dep) != c.dep {
            return Err(ConsistencyError::DepartureMismatch { leg: i });
        }
        if leg.arr != leg.dep + c.length() {
            return Err(ConsistencyError::ArrivalMismatch { leg: i });
        }
        if i + 1 < legs.len() {
            let next = &legs[i + 1];
            if next.conn.index() >= tt.elementary.len() {
                return Err(ConsistencyError::DanglingConnection { leg: i + 1 });
            }
            let nc = tt.elem(next.conn);
            if c.to != nc.from {
                return Err(ConsistencyError::StationChain { leg: i + 1 });
            }
            let gap = next.dep as i64 - leg.arr as i64;
            let required = if nc.z1 == c.z2 { 0 } else { tt.transfer(c.to) };
            if gap < required as i64 {
                return Err(ConsistencyError::TransferGap {
                    leg: i + 1,
                    gap,
                    required,
                });
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub location: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.location, self.message)
    }
}

/// Structural validation of a timetable. Returns one entry per violation;
/// an empty report means all invariants hold.
pub fn validate_timetable(tt: &Timetable) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut bad = |location: String, message: String| {
        out.push(Violation { location, message });
    };

    for (i, ev) in tt.events.iter().enumerate() {
        let loc = format!("event {i}");
        if ev.station.index() >= tt.stations.len() {
            bad(loc.clone(), format!("unknown station {}", ev.station.0));
        }
        if ev.arrival.is_none() && ev.departure.is_none() {
            bad(loc, "stop event has neither arrival nor departure".into());
        }
    }
    for (i, c) in tt.elementary.iter().enumerate() {
        let loc = format!("connection {i}");
        if c.from.index() >= tt.stations.len() || c.to.index() >= tt.stations.len() {
            bad(loc.clone(), "unknown station".into());
            continue;
        }
        if c.z1.index() >= tt.events.len() || c.z2.index() >= tt.events.len() {
            bad(loc.clone(), "unknown stop event".into());
            continue;
        }
        let (z1, z2) = (tt.event(c.z1), tt.event(c.z2));
        if z1.station != c.from {
            bad(
                loc.clone(),
                "departure event lies at a different station".into(),
            );
        }
        if z2.station != c.to {
            bad(
                loc.clone(),
                "arrival event lies at a different station".into(),
            );
        }
        if z1.departure != Some(c.dep) {
            bad(
                loc.clone(),
                "departure time differs from its stop event".into(),
            );
        }
        if z2.arrival != Some(c.arr) {
            bad(loc, "arrival time differs from its stop event".into());
        }
    }
    out
}

/// Incremental construction of a timetable from stop sequences; stop events
/// and elementary connections are materialized per train.
pub struct TimetableBuilder {
    tt: Timetable,
}

impl TimetableBuilder {
    pub fn new() -> Self {
        TimetableBuilder {
            tt: Timetable {
                traffic_days: 7,
                ..Timetable::default()
            },
        }
    }

    pub fn station(&mut self, name: &str, transfer: u32) -> StationId {
        self.tt.stations.push(Station {
            name: name.to_string(),
            transfer,
        });
        StationId(self.tt.stations.len() as u32 - 1)
    }

    /// Adds a train as a stop sequence `(station, arrival, departure)` with
    /// `hh:mm` strings and `-` for absent times.
    pub fn train(&mut self, stops: &[(StationId, &str, &str)]) -> TrainId {
        let train = TrainId(
            self.tt
                .events
                .iter()
                .map(|e| e.train.0 + 1)
                .max()
                .unwrap_or(0),
        );
        let mut prev: Option<(EventId, StationId, TimeOfDay)> = None;
        for (station, arr, dep) in stops {
            let arrival = parse_stop_time(arr);
            let departure = parse_stop_time(dep);
            self.tt.events.push(StopEvent {
                station: *station,
                arrival,
                departure,
                train,
            });
            let z = EventId(self.tt.events.len() as u32 - 1);
            if let Some((z1, s1, td)) = prev {
                self.tt.elementary.push(ElementaryConnection {
                    z1,
                    z2: z,
                    from: s1,
                    to: *station,
                    dep: td,
                    arr: arrival.expect("intermediate stop needs an arrival"),
                });
            }
            prev = departure.map(|td| (z, *station, td));
        }
        train
    }

    pub fn build(self) -> Timetable {
        self.tt
    }
}

impl Default for TimetableBuilder {
    fn default() -> Self {
        Self::new()
    }
}

fn parse_stop_time(s: &str) -> Option<TimeOfDay> {
    if s == "-" {
        None
    } else {
        Some(crate::time::parse_hm(s).expect("stop time"))
    }
}

/// Renders a leg sequence as `station dep -> station arr` lines.
pub fn format_journey(legs: &[TimedLeg], tt: &Timetable) -> String {
    let mut s = String::new();
    for leg in legs {
        let c = tt.elem(leg.conn);
        s.push_str(&format!(
            "{} {} -> {} {}  (train {})\n",
            tt.station(c.from).name,
            format_abs(leg.dep),
            tt.station(c.to).name,
            format_abs(leg.arr),
            tt.event(c.z1).train.0,
        ));
    }
    s
}
