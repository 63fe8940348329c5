//! Timetable routing engine on the station graph model.
//!
//! The graph has exactly one node per station and no parallel edges; every
//! edge carries a dominance-closed set of connections. Earliest-arrival and
//! profile queries run as label-correcting searches over these sets, and a
//! contraction hierarchy accelerates both while keeping answers exact under
//! realistic minimum transfer times.
//!
//! ```
//! use stationgraph::ch::{build_hierarchy, ch_time_query, ContractionParams};
//! use stationgraph::{build_station_graph, time_query};
//! use stationgraph::timetable::{StationId, TimetableBuilder};
//!
//! // Two trains; changing at B needs 5 minutes, which only the 8:40 makes.
//! let mut b = TimetableBuilder::new();
//! let (a, s_b, c) = (b.station("A", 5), b.station("B", 5), b.station("C", 5));
//! b.train(&[(a, "-", "8:00"), (s_b, "8:30", "-")]);
//! b.train(&[(s_b, "-", "8:33"), (c, "9:00", "-")]);
//! b.train(&[(s_b, "-", "8:40"), (c, "9:10", "-")]);
//! let graph = build_station_graph(b.build()).unwrap();
//!
//! let direct = time_query(&graph, a, c, 8 * 60).unwrap();
//! assert_eq!(direct.arrival, Some(9 * 60 + 10));
//!
//! let hierarchy = build_hierarchy(graph, ContractionParams::default());
//! let fast = ch_time_query(&hierarchy, a, c, 8 * 60).unwrap();
//! assert_eq!(fast.arrival, direct.arrival);
//! ```

pub mod bench;
pub mod ch;
pub mod conn;
pub mod fixtures;
pub mod format;
pub mod graph;
pub mod oracle;
pub mod query;
pub mod serialize;
pub mod synth;
pub mod time;
pub mod timetable;

pub use graph::{build_station_graph, StationGraph};
pub use query::{profile_query, time_query};
pub use timetable::Timetable;
