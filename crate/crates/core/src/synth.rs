//! Synthetic timetable generation: hierarchical networks of local clusters
//! around hub stations joined by a long-distance backbone, plus small
//! unstructured instances for randomized testing.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::fixtures::TimetableBuilder;
use crate::time::{TimeOfDay, MINUTES_PER_DAY};
use crate::timetable::{StationId, Timetable};

#[derive(Debug, Clone, Copy)]
pub struct SynthSpec {
    pub stations: u32,
    pub clusters: u32,
    /// Backbone edges per hub beyond the hub ring.
    pub backbone_degree: u32,
    pub trains_per_route: u32,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            stations: 100,
            clusters: 8,
            backbone_degree: 3,
            trains_per_route: 8,
            seed: 1,
        }
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum SynthError {
    #[error("stations must be positive")]
    NoStations,
    #[error("clusters must be positive and at most the station count")]
    BadClusters,
    #[error("trains per route must be positive")]
    NoTrains,
}

/// Deterministic hierarchical network: station `c` is the hub of cluster
/// `c`; local stations hang off their hub in short chains served in both
/// directions, and hubs are joined by a ring plus random backbone routes.
pub fn generate_synthetic(spec: &SynthSpec) -> Result<Timetable, SynthError> {
    if spec.stations == 0 {
        return Err(SynthError::NoStations);
    }
    if spec.clusters == 0 || spec.clusters > spec.stations {
        return Err(SynthError::BadClusters);
    }
    if spec.trains_per_route == 0 {
        return Err(SynthError::NoTrains);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut b = TimetableBuilder::new();
    let n = spec.stations;
    let hubs: Vec<StationId> = (0..spec.clusters)
        .map(|c| b.station(&format!("H{c}"), rng.gen_range(2..=10)))
        .collect();
    let mut members: Vec<Vec<StationId>> = vec![Vec::new(); spec.clusters as usize];
    for i in spec.clusters..n {
        let c = rng.gen_range(0..spec.clusters) as usize;
        let s = b.station(&format!("S{i}"), rng.gen_range(2..=10));
        members[c].push(s);
    }

    let mut routes: Vec<Vec<StationId>> = Vec::new();
    for (c, hub) in hubs.iter().enumerate() {
        for chain in members[c].chunks(3) {
            let mut fwd = vec![*hub];
            fwd.extend(chain.iter().copied());
            let mut rev = fwd.clone();
            rev.reverse();
            routes.push(fwd);
            routes.push(rev);
        }
    }
    let k = hubs.len();
    if k > 1 {
        for i in 0..k {
            routes.push(vec![hubs[i], hubs[(i + 1) % k]]);
            routes.push(vec![hubs[(i + 1) % k], hubs[i]]);
        }
        for i in 0..k {
            for _ in 2..spec.backbone_degree.max(2) {
                let j = rng.gen_range(0..k);
                if j != i {
                    routes.push(vec![hubs[i], hubs[j]]);
                    routes.push(vec![hubs[j], hubs[i]]);
                }
            }
        }
    }

    for route in routes {
        let long_distance = route.len() == 2 && route.iter().all(|s| s.0 < spec.clusters);
        let headway = (MINUTES_PER_DAY / spec.trains_per_route).max(1);
        let offset = rng.gen_range(0..headway);
        let hops: Vec<u32> = (1..route.len())
            .map(|_| {
                if long_distance {
                    rng.gen_range(30..=120)
                } else {
                    rng.gen_range(5..=25)
                }
            })
            .collect();
        let dwells: Vec<u32> = (0..route.len().saturating_sub(2))
            .map(|_| rng.gen_range(1..=3))
            .collect();
        for trip in 0..spec.trains_per_route {
            let start = (offset + trip * headway) % MINUTES_PER_DAY;
            add_route_train(&mut b, &route, start, &hops, &dwells);
        }
    }
    Ok(b.build())
}

fn add_route_train(
    b: &mut TimetableBuilder,
    route: &[StationId],
    start: u32,
    hops: &[u32],
    dwells: &[u32],
) {
    let mut stops: Vec<(StationId, String, String)> = Vec::new();
    let mut t = start;
    for (i, s) in route.iter().enumerate() {
        let arr = if i == 0 {
            "-".to_string()
        } else {
            tod_string(t)
        };
        if i > 0 && i < route.len() - 1 {
            t += dwells[i - 1];
        }
        let dep = if i == route.len() - 1 {
            "-".to_string()
        } else {
            tod_string(t)
        };
        stops.push((*s, arr, dep));
        if i < route.len() - 1 {
            t += hops[i];
        }
    }
    let as_refs: Vec<(StationId, &str, &str)> = stops
        .iter()
        .map(|(s, a, d)| (*s, a.as_str(), d.as_str()))
        .collect();
    b.train(&as_refs);
}

fn tod_string(t: u32) -> String {
    TimeOfDay::new(t % MINUTES_PER_DAY).unwrap().to_string()
}

/// Small unstructured random timetable for oracle-equivalence testing:
/// trains follow short random station sequences with random times, transfer
/// times include zero, and dwell times include zero so critical stop events
/// occur regularly.
///
/// A ring line over all stations runs four times a day, which bounds every
/// optimal journey by one ring wait plus one lap, comfortably inside the
/// two-day horizon the brute-force oracle explores.
pub fn random_timetable(seed: u64, max_stations: u32, max_trains: u32) -> Timetable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(4..=max_stations.max(4));
    let min_trains = (2 * n).clamp(6, max_trains);
    let trains = rng.gen_range(min_trains..=max_trains).saturating_sub(4);
    let mut b = TimetableBuilder::new();
    let stations: Vec<StationId> = (0..n)
        .map(|i| b.station(&format!("S{i}"), rng.gen_range(0..=8)))
        .collect();

    let mut ring = stations.clone();
    ring.shuffle(&mut rng);
    ring.push(ring[0]);
    for run in 0..4u32 {
        let mut t = run * 360 + rng.gen_range(0..90);
        let mut stops: Vec<(StationId, String, String)> = Vec::new();
        for (i, s) in ring.iter().enumerate() {
            let arr = if i == 0 { "-".into() } else { tod_string(t) };
            if i > 0 && i + 1 < ring.len() {
                t += rng.gen_range(1..=5);
            }
            let dep = if i + 1 == ring.len() {
                "-".into()
            } else {
                tod_string(t)
            };
            stops.push((*s, arr, dep));
            if i + 1 < ring.len() {
                t += rng.gen_range(10..=50);
            }
        }
        let refs: Vec<(StationId, &str, &str)> = stops
            .iter()
            .map(|(s, a, d)| (*s, a.as_str(), d.as_str()))
            .collect();
        b.train(&refs);
    }

    for _ in 0..trains {
        let len = rng.gen_range(2..=5usize);
        let mut seq: Vec<StationId> = Vec::new();
        let mut cur = stations[rng.gen_range(0..stations.len())];
        seq.push(cur);
        for _ in 1..len {
            let mut next = stations[rng.gen_range(0..stations.len())];
            while next == cur {
                next = stations[rng.gen_range(0..stations.len())];
            }
            seq.push(next);
            cur = next;
        }
        let mut t = rng.gen_range(0..MINUTES_PER_DAY);
        let mut stops: Vec<(StationId, String, String)> = Vec::new();
        for (i, s) in seq.iter().enumerate() {
            let arr = if i == 0 { "-".into() } else { tod_string(t) };
            if i > 0 && i + 1 < seq.len() {
                t += rng.gen_range(0..=8);
            }
            let dep = if i + 1 == seq.len() {
                "-".into()
            } else {
                tod_string(t)
            };
            stops.push((*s, arr, dep));
            if i + 1 < seq.len() {
                t += rng.gen_range(10..=180);
            }
        }
        let as_refs: Vec<(StationId, &str, &str)> = stops
            .iter()
            .map(|(s, a, d)| (*s, a.as_str(), d.as_str()))
            .collect();
        b.train(&as_refs);
    }
    b.build()
}
