//! The station graph: one node per station, at most one edge per ordered
//! station pair, each edge carrying a dominance-closed connection set.

use std::collections::{BTreeMap, BTreeSet};

use crate::conn::{minimum_connections, Connection, EdgeConnectionSet};
use crate::timetable::{StationId, Timetable, Violation};

#[derive(Debug, Clone)]
pub struct StationGraph {
    tt: Timetable,
    out: Vec<BTreeMap<StationId, EdgeConnectionSet>>,
    rev: Vec<BTreeSet<StationId>>,
}

#[derive(Debug, thiserror::Error)]
#[error("timetable validation failed: {0:?}")]
pub struct BuildError(pub Vec<Violation>);

/// Builds the station graph of a timetable: every elementary connection
/// becomes a connection on the edge between its stations, and per-edge sets
/// are dominance-filtered and indexed.
pub fn build_station_graph(tt: Timetable) -> Result<StationGraph, BuildError> {
    let report = tt.validate();
    if !report.is_empty() {
        return Err(BuildError(report));
    }
    let n = tt.stations.len();
    let mut grouped: BTreeMap<(StationId, StationId), Vec<Connection>> = BTreeMap::new();
    for id in 0..tt.elementary.len() {
        let c = &tt.elementary[id];
        grouped
            .entry((c.from, c.to))
            .or_default()
            .push(Connection::elementary(
                crate::timetable::ElemId(id as u32),
                &tt,
            ));
    }
    let mut g = StationGraph {
        out: vec![BTreeMap::new(); n],
        rev: vec![BTreeSet::new(); n],
        tt,
    };
    for ((from, to), conns) in grouped {
        let set = EdgeConnectionSet::from_connections(conns, from, to, &g.tt);
        if !set.is_empty() {
            g.out[from.index()].insert(to, set);
            g.rev[to.index()].insert(from);
        }
    }
    Ok(g)
}

impl StationGraph {
    pub fn node_count(&self) -> usize {
        self.out.len()
    }

    pub fn timetable(&self) -> &Timetable {
        &self.tt
    }

    pub fn edge(&self, from: StationId, to: StationId) -> Option<&EdgeConnectionSet> {
        self.out[from.index()].get(&to)
    }

    /// Outgoing edges in ascending neighbor order.
    pub fn out_edges(
        &self,
        from: StationId,
    ) -> impl Iterator<Item = (StationId, &EdgeConnectionSet)> {
        self.out[from.index()].iter().map(|(k, v)| (*k, v))
    }

    /// Incoming neighbors in ascending order.
    pub fn in_neighbors(&self, to: StationId) -> impl Iterator<Item = StationId> + '_ {
        self.rev[to.index()].iter().copied()
    }

    pub fn out_neighbors(&self, from: StationId) -> impl Iterator<Item = StationId> + '_ {
        self.out[from.index()].keys().copied()
    }

    pub fn edge_count(&self) -> usize {
        self.out.iter().map(BTreeMap::len).sum()
    }

    pub fn connection_count(&self) -> usize {
        self.out
            .iter()
            .flat_map(|m| m.values())
            .map(EdgeConnectionSet::len)
            .sum()
    }

    /// Merges a connection set into the edge `(from, to)`, creating the edge
    /// if absent. There is never more than one edge per ordered pair. Returns
    /// whether the stored set changed.
    pub fn merge_edge(
        &mut self,
        from: StationId,
        to: StationId,
        incoming: EdgeConnectionSet,
    ) -> bool {
        if incoming.is_empty() {
            return false;
        }
        match self.out[from.index()].get(&to) {
            Some(existing) => {
                let merged = minimum_connections(existing, &incoming, &self.tt);
                let changed = &merged != existing;
                if changed {
                    self.out[from.index()].insert(to, merged);
                }
                changed
            }
            None => {
                self.out[from.index()].insert(to, incoming);
                self.rev[to.index()].insert(from);
                true
            }
        }
    }

    /// Replaces the stored timetable and graph wholesale; used by the loader.
    pub(crate) fn from_parts(
        tt: Timetable,
        out: Vec<BTreeMap<StationId, EdgeConnectionSet>>,
        rev: Vec<BTreeSet<StationId>>,
    ) -> StationGraph {
        StationGraph { tt, out, rev }
    }
}
