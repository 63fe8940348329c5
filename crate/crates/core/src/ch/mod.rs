//! Contraction hierarchies for the station graph: node contraction with
//! stored-shortcut witness searches, loop shortcuts, and the hierarchy
//! queries that use them.

mod preprocess;
mod query;
mod witness;

pub use preprocess::{
    build_hierarchy, build_hierarchy_observed, node_priority, select_contraction_set, Contraction,
    ContractionObserver, NoObserver,
};
pub use query::{backward_corridor, ch_profile_query, ch_time_query, unpack, Corridor};

use crate::graph::StationGraph;
use crate::timetable::StationId;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ContractionParams {
    /// Maximum edges in a witness path.
    pub hop_limit: u32,
    /// Maximum transfers in a witness path.
    pub transfer_limit: u32,
    /// Extra minutes on top of the longest candidate shortcut duration when
    /// bounding witness searches.
    pub duration_slack: u32,
    /// Worker threads for the parallel phases; the result is identical for
    /// any value.
    pub threads: usize,
}

impl Default for ContractionParams {
    fn default() -> Self {
        ContractionParams {
            hop_limit: 7,
            transfer_limit: 5,
            duration_slack: 0,
            threads: 1,
        }
    }
}

/// A shortcut `(from, to)` that becomes necessary when the node storing it
/// is contracted. Its connections are only computed at contraction time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct StoredShortcut {
    pub from: StationId,
    pub to: StationId,
}

/// A finished contraction hierarchy: the augmented graph (original edges
/// plus all shortcuts, with unpacking records) and the contraction rank of
/// every station.
#[derive(Debug, Clone)]
pub struct Hierarchy {
    pub graph: StationGraph,
    pub rank: Vec<u32>,
    pub params: ContractionParams,
}

impl Hierarchy {
    pub fn upward(&self, from: StationId, to: StationId) -> bool {
        self.rank[to.index()] > self.rank[from.index()]
    }
}



#[cfg(test)]
mod double_lap_tests {
    use super::*;
    use crate::graph::build_station_graph;
    use crate::query::{time_query, time_query_restricted};
    use crate::timetable::TimetableBuilder;

    /// One train that revisits the same station twice via two different
    /// neighbors. Contracting both neighbors first stacks two rides onto the
    /// loop edge; the shortcut for the final contraction must chain them.
    #[test]
    fn shortcut_chains_multiple_loop_rides() {
        let mut b = TimetableBuilder::new();
        let u = b.station("U", 5);
        let v = b.station("V", 5);
        let x = b.station("X", 5);
        let y = b.station("Y", 5);
        let w = b.station("W", 5);
        b.train(&[
            (u, "-", "12:00"),
            (v, "12:01", "12:01"),
            (x, "12:02", "12:02"),
            (v, "12:03", "12:03"),
            (y, "12:04", "12:04"),
            (v, "12:05", "12:05"),
            (w, "12:06", "-"),
        ]);
        let g = build_station_graph(b.build()).unwrap();
        let base = time_query(&g, u, w, 720).unwrap().arrival;
        assert_eq!(base, Some(726));

        // force the adversarial order: both loop makers before the hub
        let mut c = Contraction::new(g.clone(), ContractionParams::default());
        for node in [x, y] {
            c.contract_node(node, &mut NoObserver);
            c.run_refreshes(&mut NoObserver);
        }
        assert_eq!(c.graph().edge(v, v).map(|e| e.len()), Some(2));
        assert_eq!(c.stored_shortcuts(v), &[StoredShortcut { from: u, to: w }]);
        c.contract_node(v, &mut NoObserver);
        c.run_refreshes(&mut NoObserver);
        let shortcut = c.graph().edge(u, w).expect("chained shortcut");
        assert_eq!(shortcut.connections()[0].dep, 720);
        assert_eq!(shortcut.connections()[0].arr, 726);
        let allowed = vec![true, false, false, false, true];
        assert_eq!(
            time_query_restricted(c.graph(), &allowed, u, w, 720)
                .unwrap()
                .arrival,
            base
        );

        // and the natural order stays exact too
        let h = build_hierarchy(g, ContractionParams::default());
        assert_eq!(ch_time_query(&h, u, w, 720).unwrap().arrival, base);
    }
}
