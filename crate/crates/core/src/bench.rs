//! Benchmark harness: identical seeded random query sets run against the
//! baseline and hierarchy engines, with per-query answer cross-checks.
//! A mismatch is a correctness alarm, not a statistic.

use std::time::Instant;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::ch::{ch_profile_query, ch_time_query, Hierarchy};
use crate::conn::{dominates_periodic, equivalent_connections, Connection};
use crate::graph::StationGraph;
use crate::query::{profile_query, time_query};
use crate::time::{format_abs, Minutes, MINUTES_PER_DAY};
use crate::timetable::{StationId, Timetable};

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkRow {
    pub engine: &'static str,
    pub kind: &'static str,
    pub queries: u32,
    pub delete_mins_mean: f64,
    pub time_us_mean: f64,
    pub speedup: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct BenchmarkReport {
    pub rows: Vec<BenchmarkRow>,
}

impl BenchmarkReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("engine,kind,queries,delete_mins_mean,time_us_mean,speedup\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{:.2},{:.2},{:.2}\n",
                r.engine, r.kind, r.queries, r.delete_mins_mean, r.time_us_mean, r.speedup
            ));
        }
        out
    }
}

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("time query ({from} -> {to} at {t0}) disagrees: baseline {baseline:?}, hierarchy {hierarchy:?}")]
    TimeMismatch {
        from: u32,
        to: u32,
        t0: String,
        baseline: Option<String>,
        hierarchy: Option<String>,
    },
    #[error("profile query ({from} -> {to}) disagrees")]
    ProfileMismatch { from: u32, to: u32 },
    #[error("benchmark needs at least two stations")]
    TooSmall,
}

/// The seeded random query set: uniformly random ordered station pairs and
/// departure times within the first two days.
pub fn random_queries(
    node_count: usize,
    queries: u32,
    seed: u64,
) -> Vec<(StationId, StationId, Minutes)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(queries as usize);
    for _ in 0..queries {
        let a = rng.gen_range(0..node_count as u32);
        let mut b = rng.gen_range(0..node_count as u32);
        while b == a {
            b = rng.gen_range(0..node_count as u32);
        }
        let t0 = rng.gen_range(0..2 * MINUTES_PER_DAY);
        out.push((StationId(a), StationId(b), t0));
    }
    out
}

/// Two dominant sets describe the same profile when each member of one is
/// dominated by or equivalent to a member of the other.
pub fn profiles_equivalent(a: &[Connection], b: &[Connection], tt: &Timetable) -> bool {
    let covered = |xs: &[Connection], ys: &[Connection]| {
        xs.iter().all(|x| {
            ys.iter()
                .any(|y| equivalent_connections(x, y, tt) || dominates_periodic(y, x, tt))
        })
    };
    covered(a, b) && covered(b, a)
}

/// Runs the same query set against both engines and reports means per
/// engine and query kind. Every answer is cross-checked for equality.
pub fn run_benchmark(
    g: &StationGraph,
    h: &Hierarchy,
    time_queries: u32,
    profile_queries: u32,
    seed: u64,
) -> Result<BenchmarkReport, BenchError> {
    if g.node_count() < 2 {
        return Err(BenchError::TooSmall);
    }
    let tt = g.timetable();
    let mut report = BenchmarkReport::default();

    let set = random_queries(g.node_count(), time_queries, seed);
    let mut base = Tally::default();
    let mut ch = Tally::default();
    for &(a, b, t0) in &set {
        let started = Instant::now();
        let br = time_query(g, a, b, t0).expect("valid stations");
        base.add(br.stats.delete_mins, started);
        let started = Instant::now();
        let hr = ch_time_query(h, a, b, t0).expect("valid stations");
        ch.add(hr.stats.delete_mins, started);
        if br.arrival != hr.arrival {
            return Err(BenchError::TimeMismatch {
                from: a.0,
                to: b.0,
                t0: format_abs(t0),
                baseline: br.arrival.map(format_abs),
                hierarchy: hr.arrival.map(format_abs),
            });
        }
    }
    report
        .rows
        .push(base.row("dijkstra", "time", time_queries, None));
    report
        .rows
        .push(ch.row("ch", "time", time_queries, Some(&base)));

    let set = random_queries(g.node_count(), profile_queries, seed.wrapping_add(1));
    let mut base = Tally::default();
    let mut ch = Tally::default();
    for &(a, b, _) in &set {
        let started = Instant::now();
        let br = profile_query(g, a, b).expect("valid stations");
        base.add(br.stats.delete_mins, started);
        let started = Instant::now();
        let hr = ch_profile_query(h, a, b).expect("valid stations");
        ch.add(hr.stats.delete_mins, started);
        if !profiles_equivalent(&br.set, &hr.set, tt) {
            return Err(BenchError::ProfileMismatch { from: a.0, to: b.0 });
        }
    }
    report
        .rows
        .push(base.row("dijkstra", "profile", profile_queries, None));
    report
        .rows
        .push(ch.row("ch", "profile", profile_queries, Some(&base)));
    Ok(report)
}

#[derive(Debug, Default)]
struct Tally {
    delete_mins: u64,
    micros: u128,
}

impl Tally {
    fn add(&mut self, delete_mins: u64, started: Instant) {
        self.micros += started.elapsed().as_micros();
        self.delete_mins += delete_mins;
    }

    fn row(
        &self,
        engine: &'static str,
        kind: &'static str,
        queries: u32,
        baseline: Option<&Tally>,
    ) -> BenchmarkRow {
        let n = queries.max(1) as f64;
        let mean_us = self.micros as f64 / n;
        let speedup = match baseline {
            Some(b) if mean_us > 0.0 => (b.micros as f64 / n) / mean_us,
            _ => 1.0,
        };
        BenchmarkRow {
            engine,
            kind,
            queries,
            delete_mins_mean: self.delete_mins as f64 / n,
            time_us_mean: mean_us,
            speedup,
        }
    }
}
