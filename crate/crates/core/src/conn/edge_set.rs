//! Canonically ordered, dominance-closed connection arrays with the lookup
//! indices the link operations need: departure buckets, per-connection
//! dominant ranges, and a departure-event map.

use std::collections::HashMap;

use super::sweep::close_profile;
use super::{compare_connections, Connection, OrderKind};
use crate::time::{Minutes, MINUTES_PER_DAY};
use crate::timetable::{EventId, StationId, Timetable};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum EdgeSetError {
    #[error("connections are not in canonical profile order at index {0}")]
    Unsorted(usize),
    #[error("stored representative at index {0} departs outside day 0")]
    NotRepresentative(usize),
}

/// The attribute of a station-graph edge `(from, to)`: a set of consistent
/// connections stored as within-day representatives of their daily
/// repetitions. The same structure also backs per-station profile labels.
#[derive(Debug, Clone)]
pub struct EdgeConnectionSet {
    pub from: StationId,
    pub to: StationId,
    conns: Vec<Connection>,
    min_len: u32,
    max_len: u32,
    /// Bucket b covers departure minutes [b*width, (b+1)*width); the value is
    /// the first index departing at or after the bucket start, or len() when
    /// that wraps to the next day.
    buckets: Vec<u32>,
    bucket_width: u32,
    /// Outrolled index of the first connection outside the dominant range of
    /// the connection at each index.
    dominant_end: Vec<u64>,
    by_dep_event: HashMap<EventId, Vec<u32>>,
}

impl EdgeConnectionSet {
    pub fn empty(from: StationId, to: StationId) -> Self {
        EdgeConnectionSet {
            from,
            to,
            conns: Vec::new(),
            min_len: 0,
            max_len: 0,
            buckets: Vec::new(),
            bucket_width: MINUTES_PER_DAY,
            dominant_end: Vec::new(),
            by_dep_event: HashMap::new(),
        }
    }

    /// Builds from arbitrary candidates: sorts canonically, removes dominated
    /// and duplicate-equivalent connections, and indexes the result.
    pub fn from_connections(
        cands: Vec<Connection>,
        from: StationId,
        to: StationId,
        tt: &Timetable,
    ) -> Self {
        let tagged = cands.into_iter().map(|c| (0u32, c)).collect();
        let closed = close_profile(tagged, from, to, tt);
        Self::from_closed(closed, from, to, tt)
    }

    /// Builds from an already canonical, dominance-closed list.
    pub fn from_closed(
        conns: Vec<Connection>,
        from: StationId,
        to: StationId,
        tt: &Timetable,
    ) -> Self {
        let mut set = Self::empty(from, to);
        set.conns = conns;
        set.rebuild_index(tt);
        set
    }

    /// Validates canonical order and representative departures, then indexes.
    pub fn try_from_sorted(
        conns: Vec<Connection>,
        from: StationId,
        to: StationId,
        tt: &Timetable,
    ) -> Result<Self, EdgeSetError> {
        for (i, c) in conns.iter().enumerate() {
            if c.dep >= MINUTES_PER_DAY {
                return Err(EdgeSetError::NotRepresentative(i));
            }
            if i > 0
                && compare_connections(OrderKind::Profile, &conns[i - 1], c, tt)
                    != std::cmp::Ordering::Less
            {
                return Err(EdgeSetError::Unsorted(i));
            }
        }
        Ok(Self::from_closed(conns, from, to, tt))
    }

    pub fn is_empty(&self) -> bool {
        self.conns.is_empty()
    }

    pub fn len(&self) -> usize {
        self.conns.len()
    }

    pub fn connections(&self) -> &[Connection] {
        &self.conns
    }

    pub fn min_len(&self) -> u32 {
        self.min_len
    }

    pub fn max_len(&self) -> u32 {
        self.max_len
    }

    /// Indices of connections departing with the given stop event.
    pub fn departures_from_event(&self, z: EventId) -> &[u32] {
        self.by_dep_event.get(&z).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Connection and absolute departure at an outrolled position.
    pub fn at(&self, pos: u64) -> (&Connection, Minutes) {
        let n = self.conns.len() as u64;
        let c = &self.conns[(pos % n) as usize];
        (c, c.dep + (pos / n) as u32 * MINUTES_PER_DAY)
    }

    /// Outrolled position of the first connection departing at or after `t`.
    pub fn first_at_or_after(&self, t: Minutes) -> Option<u64> {
        if self.conns.is_empty() {
            return None;
        }
        Some(self.lookup_end(t))
    }

    /// End of the dominant range that starts at outrolled position `pos`:
    /// linking past it can only produce dominated results.
    pub fn dominant_end_at(&self, pos: u64) -> u64 {
        let n = self.conns.len() as u64;
        let day = pos / n;
        (self.dominant_end[(pos % n) as usize] + day * n).max(pos + 1)
    }

    pub fn rebuild_index(&mut self, tt: &Timetable) {
        let n = self.conns.len();
        self.by_dep_event.clear();
        self.buckets.clear();
        self.dominant_end.clear();
        if n == 0 {
            self.min_len = 0;
            self.max_len = 0;
            self.bucket_width = MINUTES_PER_DAY;
            return;
        }
        self.min_len = self.conns.iter().map(Connection::length).min().unwrap();
        self.max_len = self.conns.iter().map(Connection::length).max().unwrap();

        self.bucket_width = MINUTES_PER_DAY.div_ceil(n as u32);
        let bucket_count = MINUTES_PER_DAY.div_ceil(self.bucket_width) as usize;
        let mut i = 0usize;
        for b in 0..bucket_count {
            let start = b as u32 * self.bucket_width;
            while i < n && self.conns[i].dep < start {
                i += 1;
            }
            self.buckets.push(i as u32);
        }

        let transfer_to = tt.transfer(self.to);
        for (i, c) in self.conns.iter().enumerate() {
            let slack = c.length() - self.min_len;
            let bound = c.dep + slack + transfer_to;
            // first_at_or_after needs the buckets built above
            let end = self.lookup_end(bound);
            self.dominant_end.push(end.max(i as u64 + 1));
        }

        for (i, c) in self.conns.iter().enumerate() {
            self.by_dep_event.entry(c.z1).or_default().push(i as u32);
        }
    }

    fn lookup_end(&self, t: Minutes) -> u64 {
        let n = self.conns.len() as u64;
        let day = (t / MINUTES_PER_DAY) as u64;
        let tod = t % MINUTES_PER_DAY;
        let mut i = self.buckets[(tod / self.bucket_width) as usize] as u64;
        while i < n && self.conns[i as usize].dep < tod {
            i += 1;
        }
        day * n + i
    }
}

impl PartialEq for EdgeConnectionSet {
    fn eq(&self, other: &Self) -> bool {
        self.from == other.from && self.to == other.to && self.conns == other.conns
    }
}
impl Eq for EdgeConnectionSet {}
