//! Acceptance suite: one test per criterion, exact or with the stated
//! bounds, on worked examples, randomized instances, and synthetic networks.

mod common;

use std::time::{Duration, Instant};

use common::*;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use stationgraph::bench::{profiles_equivalent, random_queries, run_benchmark};
use stationgraph::ch::{
    build_hierarchy, build_hierarchy_observed, ch_profile_query, ch_time_query, Contraction,
    ContractionObserver, ContractionParams, NoObserver,
};
use stationgraph::conn::{dominates_arrival, dominates_connection, ArrivalConnection, Boarding};
use stationgraph::fixtures;
use stationgraph::graph::{build_station_graph, StationGraph};
use stationgraph::oracle::{
    dominant_filter_labels, earliest_arrival_all, enumerate_consistent, label_dominates_shifted,
    label_equivalent, profile_labels_all, replacement_dominates, replacement_dominates_arrival,
    OracleParams,
};
use stationgraph::query::{profile_query, time_query, time_query_restricted};
use stationgraph::serialize::{from_bytes, to_bytes};
use stationgraph::synth::{generate_synthetic, random_timetable, SynthSpec};
use stationgraph::time::MINUTES_PER_DAY;
use stationgraph::timetable::{check_consistency, StationId, Timetable};

fn pass(criterion: u32, detail: &str) {
    println!("criterion {criterion} PASS: {detail}");
}

#[test]
fn criterion_1_paper_worked_examples_exact() {
    let started = Instant::now();

    // Overnight line: the transfer-constrained earliest arrival is day 1,
    // 5:00, on both engines; swapping in the earlier onward train violates
    // the five consistency conditions.
    let g = build_station_graph(fixtures::overnight_line()).unwrap();
    let h = build_hierarchy(g.clone(), ContractionParams::default());
    let (a, e) = (StationId(0), StationId(4));
    assert_eq!(time_query(&g, a, e, 1385).unwrap().arrival, Some(1740));
    assert_eq!(ch_time_query(&h, a, e, 1385).unwrap().arrival, Some(1740));
    assert!(check_consistency(
        &fixtures::overnight_journey_via_early_train(),
        g.timetable()
    )
    .is_err());
    assert!(
        check_consistency(&fixtures::overnight_journey_via_late_train(), g.timetable()).is_ok()
    );

    // Loop network: 12:04 before and after full contraction.
    let g = build_station_graph(fixtures::loop_line()).unwrap();
    let (a, b, c, d) = (StationId(0), StationId(1), StationId(2), StationId(3));
    assert_eq!(time_query(&g, a, d, 720).unwrap().arrival, Some(724));
    let h = build_hierarchy(g.clone(), ContractionParams::default());
    assert_eq!(ch_time_query(&h, a, d, 720).unwrap().arrival, Some(724));

    // Contracting the far station of the loop requires a loop shortcut at
    // the revisited one, carrying the ride 12:01 -> 12:03.
    let mut contraction = Contraction::new(g.clone(), ContractionParams::default());
    assert!(contraction
        .stored_shortcuts(c)
        .iter()
        .any(|p| (p.from, p.to) == (b, b)));
    let added = contraction.contract_node(c, &mut NoObserver);
    assert!(added.contains(&(b, b)));
    let lp = contraction.graph().edge(b, b).expect("loop at B");
    assert_eq!(lp.len(), 1);
    assert_eq!(lp.connections()[0].dep, 721);
    assert_eq!(lp.connections()[0].arr, 723);
    let mut allowed = vec![true; 4];
    allowed[c.index()] = false;
    assert_eq!(
        time_query_restricted(contraction.graph(), &allowed, a, d, 720)
            .unwrap()
            .arrival,
        Some(724)
    );

    assert!(started.elapsed() < Duration::from_secs(1), "runtime >= 1s");
    pass(
        1,
        "worked examples exact on both engines, loop shortcut present",
    );
}

#[test]
fn criterion_2_oracle_equivalence_on_random_timetables() {
    let started = Instant::now();
    let oracle_params = OracleParams {
        horizon_days: 2,
        max_transfers: 6,
        max_legs: 28,
        cap: 10_000_000,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(0xacce97);
    let mut time_checks = 0u64;
    let mut profile_checks = 0u64;

    for seed in 0..200u64 {
        let tt = random_timetable(seed, 15, 40);
        let g = build_station_graph(tt.clone()).unwrap();
        let n = g.node_count() as u32;

        for source in 0..n {
            let source = StationId(source);
            for _ in 0..10 {
                let t0 = rng.gen_range(0..MINUTES_PER_DAY);
                let oracle = earliest_arrival_all(&tt, source, t0, &oracle_params);
                for target in 0..n {
                    let target = StationId(target);
                    let engine = time_query(&g, source, target, t0).unwrap().arrival;
                    assert_eq!(
                        engine,
                        oracle[target.index()],
                        "EAP mismatch seed {seed} {source:?}->{target:?} t0 {t0}"
                    );
                    time_checks += 1;
                }
            }
            let oracle_profiles = profile_labels_all(&tt, source, &oracle_params);
            for target in 0..n {
                let target = StationId(target);
                if source == target {
                    continue;
                }
                let engine = profile_query(&g, source, target).unwrap().set;
                let oracle = dominant_filter_labels(&oracle_profiles[target.index()], &tt);
                // mutual domination under the oracle's own predicates
                let engine_labels: Vec<_> = engine.iter().map(conn_label).collect();
                for o in &oracle {
                    assert!(
                        engine_labels
                            .iter()
                            .any(|e| label_equivalent(e, o, &tt)
                                || label_dominates_shifted(e, o, &tt)),
                        "oracle label {o:?} uncovered, seed {seed} {source:?}->{target:?}"
                    );
                }
                for e in &engine_labels {
                    assert!(
                        oracle
                            .iter()
                            .any(|o| label_equivalent(o, e, &tt)
                                || label_dominates_shifted(o, e, &tt)),
                        "engine label {e:?} uncovered, seed {seed} {source:?}->{target:?}"
                    );
                }
                profile_checks += 1;
            }
        }
    }
    assert!(time_checks >= 200 * 10 * 4 * 4);
    assert!(
        started.elapsed() < Duration::from_secs(300),
        "runtime {:?} >= 5 min",
        started.elapsed()
    );
    pass(
        2,
        &format!("{time_checks} time-query and {profile_checks} profile oracle checks, exact"),
    );
}

/// A small timetable whose trains all run inside one busy hour: departures
/// collide within transfer windows, so the critical-boundary conditions of
/// the domination relation actually bite.
fn dense_hour_timetable(seed: u64) -> Timetable {
    use stationgraph::timetable::TimetableBuilder;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut b = TimetableBuilder::new();
    let n = rng.gen_range(5..=8u32);
    let stations: Vec<StationId> = (0..n)
        .map(|i| b.station(&format!("S{i}"), rng.gen_range(2..=8)))
        .collect();
    for _ in 0..rng.gen_range(10..=16) {
        let len = rng.gen_range(2..=4usize);
        let mut cur = stations[rng.gen_range(0..stations.len())];
        let mut t = rng.gen_range(600..700u32);
        let mut stops: Vec<(StationId, String, String)> = Vec::new();
        for i in 0..len {
            let arr = if i == 0 {
                "-".into()
            } else {
                format!("{}:{:02}", t / 60, t % 60)
            };
            if i > 0 && i + 1 < len {
                t += rng.gen_range(0..=6);
            }
            let dep = if i + 1 == len {
                "-".into()
            } else {
                format!("{}:{:02}", t / 60, t % 60)
            };
            stops.push((cur, arr, dep));
            if i + 1 < len {
                t += rng.gen_range(4..=25);
                let mut next = stations[rng.gen_range(0..stations.len())];
                while next == cur {
                    next = stations[rng.gen_range(0..stations.len())];
                }
                cur = next;
            }
        }
        let refs: Vec<(StationId, &str, &str)> = stops
            .iter()
            .map(|(s, a, d)| (*s, a.as_str(), d.as_str()))
            .collect();
        b.train(&refs);
    }
    b.build()
}

#[test]
fn criterion_3_dominance_matches_replacement_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x1e44a);
    let enum_params = OracleParams {
        horizon_days: 2,
        max_transfers: 2,
        max_legs: 3,
        cap: 60_000,
    };
    let mut conn_pairs = 0u64;
    let mut conn_violations_shown = 0u64;
    let mut arrival_pairs = 0u64;
    let mut seed = 0u64;

    while conn_pairs < 10_000 || arrival_pairs < 5_000 || conn_violations_shown < 100 {
        seed += 1;
        let tt = if seed.is_multiple_of(2) {
            random_timetable(seed, 10, 24)
        } else {
            dense_hour_timetable(seed)
        };
        let n = tt.stations.len() as u32;
        let a = StationId(rng.gen_range(0..n));
        let b = StationId(rng.gen_range(0..n));
        if a == b {
            continue;
        }
        let Ok(conns) = enumerate_consistent(&tt, a, b, Some(0), &enum_params) else {
            continue;
        };
        let conns: Vec<_> = conns.into_iter().filter(|c| !c.legs.is_empty()).collect();
        if conns.len() < 2 {
            continue;
        }
        // Random pairs, plus every pair that satisfies the time condition
        // (2): those exercise the critical-boundary conditions (3) and (4).
        let mut pair_indices: Vec<(usize, usize)> = (0..40)
            .map(|_| (rng.gen_range(0..conns.len()), rng.gen_range(0..conns.len())))
            .collect();
        for (i, p) in conns.iter().enumerate() {
            for (j, q) in conns.iter().enumerate() {
                let (Some(pd), Some(qd)) = (p.dep(), q.dep()) else {
                    continue;
                };
                let (Some(pa), Some(qa)) = (p.arr(), q.arr()) else {
                    continue;
                };
                if qd <= pd && pa <= qa {
                    pair_indices.push((i, j));
                }
            }
        }
        pair_indices.truncate(160);
        for (i, j) in pair_indices {
            let p = &conns[i];
            let q = &conns[j];
            let (pc, qc) = (engine_conn(p, &tt).unwrap(), engine_conn(q, &tt).unwrap());
            let impl_dominates = dominates_connection(&pc, &qc, &tt);
            let oracle = replacement_dominates(&tt, p, q, 2);
            assert_eq!(
                impl_dominates,
                oracle.is_ok(),
                "connection dominance disagrees with replacement, seed {seed}, P {pc:?} Q {qc:?} (oracle {oracle:?})"
            );
            if !impl_dominates && qc.dep <= pc.dep && pc.arr <= qc.arr {
                assert!(oracle.is_err(), "no violating extension exhibited");
                conn_violations_shown += 1;
            }
            conn_pairs += 1;

            // The same check on the arrival sides of the pairs.
            if tt.event(qc.z2).station == tt.event(pc.z2).station {
                let pa = ArrivalConnection {
                    arr: pc.arr,
                    z2: Boarding::At(pc.z2),
                };
                let qa = ArrivalConnection {
                    arr: qc.arr,
                    z2: Boarding::At(qc.z2),
                };
                let impl_dom = dominates_arrival(&pa, &qa, &tt);
                let oracle = replacement_dominates_arrival(&tt, p, q, 2);
                assert_eq!(
                    impl_dom,
                    oracle.is_ok(),
                    "arrival dominance disagrees with replacement, seed {seed}, P {pa:?} Q {qa:?}"
                );
                if !impl_dom && pa.arr <= qa.arr {
                    assert!(oracle.is_err());
                }
                arrival_pairs += 1;
            }
        }
    }
    assert!(
        conn_violations_shown >= 100,
        "only {conn_violations_shown} violating extensions exercised"
    );
    pass(
        3,
        &format!(
            "{conn_pairs} connection pairs ({conn_violations_shown} violations exhibited), {arrival_pairs} arrival pairs"
        ),
    );
}

#[test]
fn criterion_4_link_algebra_equals_naive() {
    let mut sets_used = 0u64;
    let mut wrap_sets = 0u64;
    let mut link_time_checks = 0u64;
    let mut link_edges_checks = 0u64;
    let mut minimum_checks = 0u64;
    let mut fused_checks = 0u64;
    let mut rng = ChaCha8Rng::seed_from_u64(0x11a4);

    for seed in 0..40u64 {
        let pools = build_pools(seed);
        let tt = &pools.tt;
        sets_used += pools.edges.len() as u64;
        wrap_sets += pools
            .edges
            .iter()
            .filter(|e| e.connections().iter().any(|c| c.arr >= MINUTES_PER_DAY))
            .count() as u64;

        // link_time and the fused variant, from real arrival sets and from
        // the boarding sentinel
        for (station, ac) in &pools.arrival_sets {
            for edge in pools.edges.iter().filter(|e| e.from == *station).take(4) {
                let expect = naive_link_time(ac, edge, tt);
                assert_eq!(
                    stationgraph::conn::link_time(ac, edge, tt),
                    expect,
                    "link_time seed {seed}"
                );
                link_time_checks += 1;

                let existing = &pools.arrival_sets[rng.gen_range(0..pools.arrival_sets.len())];
                let (fused, changed) =
                    stationgraph::conn::link_and_minimum_time(ac, edge, &existing.1, tt);
                let composed = naive_link_and_minimum_time(ac, edge, &existing.1, tt);
                assert_eq!(fused, composed, "link_and_minimum_time seed {seed}");
                assert_eq!(changed, fused.as_slice() != existing.1.as_slice());
                fused_checks += 1;
            }
        }
        for edge in &pools.edges {
            let t0 = rng.gen_range(0..2 * MINUTES_PER_DAY);
            let ac = vec![ArrivalConnection::source(t0)];
            assert_eq!(
                stationgraph::conn::link_time(&ac, edge, tt),
                naive_link_time(&ac, edge, tt),
                "sentinel link_time seed {seed}"
            );
            link_time_checks += 1;
        }

        // link_edges on adjacent pairs, and the fused link+minimum against
        // the composition of its parts
        for e1 in &pools.edges {
            for e2 in pools.edges.iter().filter(|e| e.from == e1.to).take(3) {
                let linked = stationgraph::conn::link_edges(e1, e2, tt);
                assert_eq!(
                    linked.connections(),
                    naive_link_edges(e1, e2, tt).as_slice(),
                    "link_edges seed {seed}"
                );
                link_edges_checks += 1;

                let (fused, new_min) =
                    stationgraph::conn::link_and_minimum_profile(e1, e2, None, tt);
                assert_eq!(fused.connections(), linked.connections());
                assert_eq!(new_min.is_some(), !linked.is_empty());
                let (again, unchanged) =
                    stationgraph::conn::link_and_minimum_profile(e1, e2, Some(&fused), tt);
                assert_eq!(again.connections(), fused.connections());
                assert!(unchanged.is_none(), "re-merge must report no change");
                fused_checks += 1;
            }
        }

        // minimum on same-pair sets
        for e1 in &pools.edges {
            for e2 in pools
                .edges
                .iter()
                .filter(|e| (e.from, e.to) == (e1.from, e1.to))
                .take(3)
            {
                assert_eq!(
                    stationgraph::conn::minimum_connections(e1, e2, tt).connections(),
                    naive_minimum_connections(e1, e2, tt).as_slice(),
                    "minimum_connections seed {seed}"
                );
                minimum_checks += 1;
            }
        }
        for (s1, a1) in &pools.arrival_sets {
            for (_, a2) in pools.arrival_sets.iter().filter(|(s2, _)| s2 == s1).take(3) {
                let (merged, changed) = stationgraph::conn::minimum_arrivals(a1, a2, tt);
                assert_eq!(merged, naive_minimum_arrivals(a1, a2, tt));
                assert_eq!(changed, merged.as_slice() != a1.as_slice());
                minimum_checks += 1;
            }
        }
    }
    assert!(sets_used >= 1000, "only {sets_used} edge sets");
    assert!(wrap_sets >= 50, "only {wrap_sets} midnight-wrap sets");
    assert!(link_time_checks >= 1000 && link_edges_checks >= 1000 && minimum_checks >= 1000);
    pass(
        4,
        &format!(
            "{sets_used} sets ({wrap_sets} wrapping midnight); {link_time_checks}/{link_edges_checks}/{minimum_checks}/{fused_checks} op checks equal naive"
        ),
    );
}

struct PreservationChecker {
    original: StationGraph,
    seed: u64,
    checks: u64,
}

impl ContractionObserver for PreservationChecker {
    fn on_round(&mut self, round: usize, g: &StationGraph, contracted: &[bool]) {
        let remaining: Vec<StationId> = (0..g.node_count() as u32)
            .map(StationId)
            .filter(|s| !contracted[s.index()])
            .collect();
        if remaining.len() < 2 {
            return;
        }
        let allowed: Vec<bool> = contracted.iter().map(|c| !c).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ (round as u64) << 32);
        for _ in 0..50 {
            let a = remaining[rng.gen_range(0..remaining.len())];
            let b = remaining[rng.gen_range(0..remaining.len())];
            for _ in 0..3 {
                let t0 = rng.gen_range(0..2 * MINUTES_PER_DAY);
                let restricted = time_query_restricted(g, &allowed, a, b, t0)
                    .unwrap()
                    .arrival;
                let original = time_query(&self.original, a, b, t0).unwrap().arrival;
                assert_eq!(
                    restricted, original,
                    "preservation violated in round {round}: ({a:?},{b:?},{t0})"
                );
                self.checks += 1;
            }
        }
    }
}

#[test]
fn criterion_5_contraction_preserves_answers() {
    let started = Instant::now();
    let networks = [(100u32, 8u32, 21u64), (500, 20, 22)];
    let mut round_checks = 0u64;
    let mut final_checks = 0u64;

    for (stations, clusters, seed) in networks {
        let tt = generate_synthetic(&SynthSpec {
            stations,
            clusters,
            backbone_degree: 3,
            trains_per_route: 6,
            seed,
        })
        .unwrap();
        let g = build_station_graph(tt.clone()).unwrap();
        let mut edge_counts = Vec::new();
        for hop_limit in [2u32, 7, 18] {
            let params = ContractionParams {
                hop_limit,
                ..ContractionParams::default()
            };
            let mut checker = PreservationChecker {
                original: g.clone(),
                seed: seed ^ hop_limit as u64,
                checks: 0,
            };
            let h = build_hierarchy_observed(g.clone(), params, &mut checker);
            round_checks += checker.checks;
            edge_counts.push(h.graph.edge_count());

            for (a, b, t0) in random_queries(g.node_count(), 1000, seed ^ 0xf00d) {
                assert_eq!(
                    time_query(&g, a, b, t0).unwrap().arrival,
                    ch_time_query(&h, a, b, t0).unwrap().arrival,
                    "final time query ({a:?},{b:?},{t0}) hop {hop_limit}"
                );
                final_checks += 1;
            }
            for (a, b, _) in random_queries(g.node_count(), 100, seed ^ 0xbeef) {
                let base = profile_query(&g, a, b).unwrap().set;
                let ch = ch_profile_query(&h, a, b).unwrap().set;
                assert!(
                    profiles_equivalent(&base, &ch, g.timetable()),
                    "final profile ({a:?},{b:?}) hop {hop_limit}"
                );
                final_checks += 1;
            }
        }
        // more witness hops can only remove shortcuts
        assert!(
            edge_counts[0] >= edge_counts[1] && edge_counts[1] >= edge_counts[2],
            "shortcut counts increase with hop limit: {edge_counts:?}"
        );
    }
    assert!(
        started.elapsed() < Duration::from_secs(600),
        "runtime {:?} >= 10 min",
        started.elapsed()
    );
    pass(
        5,
        &format!("{round_checks} per-round and {final_checks} final checks exact"),
    );
}

#[test]
fn criterion_6_speedup_direction_and_thread_independence() {
    let tt = generate_synthetic(&SynthSpec {
        stations: 500,
        clusters: 20,
        backbone_degree: 3,
        trains_per_route: 6,
        seed: 33,
    })
    .unwrap();
    let g = build_station_graph(tt).unwrap();
    let single = build_hierarchy(
        g.clone(),
        ContractionParams {
            threads: 1,
            ..ContractionParams::default()
        },
    );
    let parallel = build_hierarchy(
        g.clone(),
        ContractionParams {
            threads: 4,
            ..ContractionParams::default()
        },
    );
    assert_eq!(
        to_bytes(&single),
        to_bytes(&parallel),
        "hierarchies differ across thread counts"
    );

    let mut base_dm = 0u64;
    let mut ch_dm = 0u64;
    for (a, b, t0) in random_queries(g.node_count(), 1000, 77) {
        let br = time_query(&g, a, b, t0).unwrap();
        let hr = ch_time_query(&single, a, b, t0).unwrap();
        assert_eq!(br.arrival, hr.arrival);
        base_dm += br.stats.delete_mins;
        ch_dm += hr.stats.delete_mins;
    }
    let ratio = ch_dm as f64 / base_dm as f64;
    assert!(
        ratio <= 0.5,
        "delete-min ratio {ratio:.3} above the hard bound 0.5"
    );
    let soft = if ratio <= 0.2 { "within" } else { "ABOVE" };
    pass(
        6,
        &format!(
            "delete-min ratio {ratio:.3} ({soft} the 0.2 target), thread counts agree byte-for-byte"
        ),
    );
}

#[test]
fn criterion_7_determinism_and_round_trip() {
    let spec = SynthSpec {
        stations: 80,
        clusters: 6,
        backbone_degree: 3,
        trains_per_route: 5,
        seed: 9,
    };
    let tt1 = generate_synthetic(&spec).unwrap();
    let tt2 = generate_synthetic(&spec).unwrap();
    assert_eq!(tt1, tt2, "generator not deterministic");

    let g = build_station_graph(tt1).unwrap();
    let params = ContractionParams::default();
    let h1 = build_hierarchy(g.clone(), params);
    let h2 = build_hierarchy(g.clone(), params);
    let bytes = to_bytes(&h1);
    assert_eq!(bytes, to_bytes(&h2), "hierarchy not deterministic");

    assert_eq!(
        random_queries(80, 500, 123),
        random_queries(80, 500, 123),
        "query sets differ for a fixed seed"
    );

    let loaded = from_bytes(&bytes).unwrap();
    assert_eq!(to_bytes(&loaded), bytes, "round trip not byte-stable");
    for (a, b, t0) in random_queries(g.node_count(), 300, 3) {
        assert_eq!(
            ch_time_query(&h1, a, b, t0).unwrap().arrival,
            ch_time_query(&loaded, a, b, t0).unwrap().arrival,
        );
    }
    for (a, b, _) in random_queries(g.node_count(), 30, 4) {
        assert!(profiles_equivalent(
            &ch_profile_query(&h1, a, b).unwrap().set,
            &ch_profile_query(&loaded, a, b).unwrap().set,
            g.timetable()
        ));
    }
    // the benchmark cross-check doubles as a correctness gate
    let report = run_benchmark(&g, &h1, 200, 20, 5).unwrap();
    assert_eq!(report.rows.len(), 4);
    pass(
        7,
        "hierarchies, query sets, and files reproduce byte-for-byte",
    );
}
