use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use stationgraph::bench::run_benchmark;
use stationgraph::ch::{
    build_hierarchy, ch_profile_query, ch_time_query, ContractionParams, Hierarchy,
};
use stationgraph::format::{parse_timetable, print_timetable};
use stationgraph::graph::{build_station_graph, StationGraph};
use stationgraph::query::{extract_journey, profile_query, time_query};
use stationgraph::serialize::{load_hierarchy, save_hierarchy};
use stationgraph::synth::{generate_synthetic, SynthSpec};
use stationgraph::time::{format_abs, minute_of_day, parse_abs};
use stationgraph::timetable::{format_journey, StationId};

/// Timetable routing on the station graph model, with contraction
/// hierarchies for fast exact queries.
#[derive(Parser)]
#[command(name = "stationgraph", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a timetable, build the station graph, and print statistics.
    Build { timetable: PathBuf },
    /// Build a contraction hierarchy and save it to a binary file.
    Contract {
        timetable: PathBuf,
        /// Output hierarchy file.
        #[arg(short, long)]
        output: PathBuf,
        #[command(flatten)]
        contraction: ContractionArgs,
    },
    /// Run a single query.
    Query {
        #[command(subcommand)]
        query: QueryCommand,
    },
    /// Generate a synthetic hierarchical timetable.
    Gen {
        #[arg(long, default_value_t = 100)]
        stations: u32,
        #[arg(long, default_value_t = 8)]
        clusters: u32,
        /// Backbone edges per hub.
        #[arg(long, default_value_t = 3)]
        degree: u32,
        #[arg(long, default_value_t = 8)]
        trains_per_route: u32,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Output timetable file.
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Benchmark both engines on a seeded random query set and print CSV.
    /// Exits non-zero if any answer cross-check fails.
    Bench {
        #[arg(long)]
        timetable: PathBuf,
        /// Reuse a saved hierarchy instead of contracting.
        #[arg(long)]
        hierarchy: Option<PathBuf>,
        #[arg(long, default_value_t = 1000)]
        queries: u32,
        /// Profile queries to run; defaults to a tenth of the time queries.
        #[arg(long)]
        profile_queries: Option<u32>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[command(flatten)]
        contraction: ContractionArgs,
    },
    /// Run the built-in example checks.
    Selftest,
}

#[derive(Subcommand)]
enum QueryCommand {
    /// Earliest arrival from A to B departing at T0 (hh:mm or d+hh:mm).
    Time {
        from: String,
        to: String,
        t0: String,
        #[command(flatten)]
        engine: EngineArgs,
    },
    /// Dominant connection set from A to B.
    Profile {
        from: String,
        to: String,
        #[command(flatten)]
        engine: EngineArgs,
    },
}

#[derive(Args)]
struct EngineArgs {
    #[arg(long)]
    timetable: PathBuf,
    /// Saved hierarchy; required for --engine ch unless contracting on the fly.
    #[arg(long)]
    hierarchy: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Engine::Dijkstra)]
    engine: Engine,
    #[command(flatten)]
    contraction: ContractionArgs,
}

#[derive(Args)]
struct ContractionArgs {
    #[arg(long, default_value_t = 7)]
    hop_limit: u32,
    #[arg(long, default_value_t = 5)]
    transfer_limit: u32,
    #[arg(long, default_value_t = 0)]
    duration_slack: u32,
    #[arg(long, default_value_t = 1)]
    threads: usize,
}

impl ContractionArgs {
    fn params(&self) -> ContractionParams {
        ContractionParams {
            hop_limit: self.hop_limit,
            transfer_limit: self.transfer_limit,
            duration_slack: self.duration_slack,
            threads: self.threads,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Engine {
    Dijkstra,
    Ch,
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run() -> Result<ExitCode> {
    match Cli::parse().command {
        Command::Build { timetable } => {
            let g = load_graph(&timetable)?;
            println!("stations:               {}", g.node_count());
            println!("stop events:            {}", g.timetable().events.len());
            println!("elementary connections: {}", g.timetable().elementary.len());
            println!("edges:                  {}", g.edge_count());
            println!("stored connections:     {}", g.connection_count());
            Ok(ExitCode::SUCCESS)
        }
        Command::Contract {
            timetable,
            output,
            contraction,
        } => {
            let g = load_graph(&timetable)?;
            let edges_before = g.edge_count();
            let started = std::time::Instant::now();
            let h = build_hierarchy(g, contraction.params());
            println!(
                "contracted {} stations in {:.1}s; edges {} -> {}",
                h.graph.node_count(),
                started.elapsed().as_secs_f64(),
                edges_before,
                h.graph.edge_count(),
            );
            save_hierarchy(&h, &output).with_context(|| format!("writing {}", output.display()))?;
            println!("saved {}", output.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Query { query } => run_query(query),
        Command::Gen {
            stations,
            clusters,
            degree,
            trains_per_route,
            seed,
            output,
        } => {
            let tt = generate_synthetic(&SynthSpec {
                stations,
                clusters,
                backbone_degree: degree,
                trains_per_route,
                seed,
            })?;
            std::fs::write(&output, print_timetable(&tt))
                .with_context(|| format!("writing {}", output.display()))?;
            println!(
                "generated {} stations, {} elementary connections -> {}",
                tt.stations.len(),
                tt.elementary.len(),
                output.display()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Bench {
            timetable,
            hierarchy,
            queries,
            profile_queries,
            seed,
            contraction,
        } => {
            let g = load_graph(&timetable)?;
            let h = match hierarchy {
                Some(path) => {
                    load_hierarchy(&path).with_context(|| format!("reading {}", path.display()))?
                }
                None => build_hierarchy(g.clone(), contraction.params()),
            };
            let profile_queries = profile_queries.unwrap_or(queries / 10);
            let report = run_benchmark(&g, &h, queries, profile_queries, seed)?;
            print!("{}", report.to_csv());
            Ok(ExitCode::SUCCESS)
        }
        Command::Selftest => selftest(),
    }
}

fn run_query(query: QueryCommand) -> Result<ExitCode> {
    match query {
        QueryCommand::Time {
            from,
            to,
            t0,
            engine,
        } => {
            let g = load_graph(&engine.timetable)?;
            let a = station_ref(&g, &from)?;
            let b = station_ref(&g, &to)?;
            let t0 = parse_abs(&t0).ok_or_else(|| anyhow!("bad departure time '{t0}'"))?;
            match engine.engine {
                Engine::Dijkstra => {
                    let r = time_query(&g, a, b, t0)?;
                    print_time_result(&g, &r.arrival, || {
                        let chosen = r.target_labels().first().copied();
                        chosen.and_then(|c| extract_journey(&g, &r, a, t0, &c).ok())
                    });
                }
                Engine::Ch => {
                    let h = load_or_contract(&g, &engine)?;
                    let r = ch_time_query(&h, a, b, t0)?;
                    print_time_result(&h.graph, &r.arrival, || {
                        let chosen = r.target_labels().first().copied();
                        chosen.and_then(|c| extract_journey(&h.graph, &r, a, t0, &c).ok())
                    });
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        QueryCommand::Profile { from, to, engine } => {
            let g = load_graph(&engine.timetable)?;
            let a = station_ref(&g, &from)?;
            let b = station_ref(&g, &to)?;
            let set = match engine.engine {
                Engine::Dijkstra => profile_query(&g, a, b)?.set,
                Engine::Ch => {
                    let h = load_or_contract(&g, &engine)?;
                    ch_profile_query(&h, a, b)?.set
                }
            };
            if set.is_empty() {
                println!("no connections");
            }
            for c in set {
                println!(
                    "dep {}  arr {}  ({} min)",
                    minute_of_day(c.dep),
                    format_abs(c.arr),
                    c.length()
                );
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn print_time_result(
    g: &StationGraph,
    arrival: &Option<u32>,
    journey: impl FnOnce() -> Option<Vec<stationgraph::timetable::TimedLeg>>,
) {
    match arrival {
        None => println!("unreachable"),
        Some(t) => {
            println!("arrival: {}", format_abs(*t));
            if let Some(legs) = journey() {
                print!("{}", format_journey(&legs, g.timetable()));
            }
        }
    }
}

fn load_graph(path: &PathBuf) -> Result<StationGraph> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let tt = parse_timetable(&text)?;
    build_station_graph(tt).map_err(|e| anyhow!("{e}"))
}

fn load_or_contract(g: &StationGraph, engine: &EngineArgs) -> Result<Hierarchy> {
    match &engine.hierarchy {
        Some(path) => load_hierarchy(path).with_context(|| format!("reading {}", path.display())),
        None => Ok(build_hierarchy(g.clone(), engine.contraction.params())),
    }
}

fn station_ref(g: &StationGraph, name: &str) -> Result<StationId> {
    let tt = g.timetable();
    if let Some(i) = tt.stations.iter().position(|s| s.name == name) {
        return Ok(StationId(i as u32));
    }
    if let Ok(id) = name.parse::<u32>() {
        if (id as usize) < tt.stations.len() {
            return Ok(StationId(id));
        }
    }
    bail!("unknown station '{name}'")
}

fn selftest() -> Result<ExitCode> {
    use stationgraph::fixtures;
    use stationgraph::timetable::check_consistency;

    let mut all_ok = true;
    let mut check = |name: &str, ok: bool| {
        println!("{} {name}", if ok { "PASS" } else { "FAIL" });
        all_ok &= ok;
    };

    let tt = fixtures::overnight_line();
    let g = build_station_graph(tt.clone()).map_err(|e| anyhow!("{e}"))?;
    let h = build_hierarchy(g.clone(), ContractionParams::default());
    let (a, e) = (StationId(0), StationId(4));

    let base = time_query(&g, a, e, 1385)?.arrival;
    check(
        "overnight transfer, baseline arrives day 1 at 05:00",
        base == Some(1740),
    );
    let ch = ch_time_query(&h, a, e, 1385)?.arrival;
    check("overnight transfer, hierarchy agrees", ch == Some(1740));
    check(
        "tight 3-minute transfer rejected",
        check_consistency(&fixtures::overnight_journey_via_early_train(), &tt).is_err(),
    );
    check(
        "valid one-transfer journey accepted",
        check_consistency(&fixtures::overnight_journey_via_late_train(), &tt).is_ok(),
    );

    let tt = fixtures::loop_line();
    let g = build_station_graph(tt).map_err(|e| anyhow!("{e}"))?;
    let h = build_hierarchy(g.clone(), ContractionParams::default());
    let (a, d) = (StationId(0), StationId(3));
    check(
        "loop line, baseline arrives 12:04",
        time_query(&g, a, d, 720)?.arrival == Some(724),
    );
    check(
        "loop line, hierarchy arrives 12:04",
        ch_time_query(&h, a, d, 720)?.arrival == Some(724),
    );
    let b = StationId(1);
    check(
        "loop shortcut exists at the revisited station",
        h.rank[2] >= h.rank[1] || h.graph.edge(b, b).is_some(),
    );

    Ok(if all_ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}
