use std::net::{TcpListener, TcpStream};
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use privpath_cli::bench::{run_bench, run_bench_alice, serve_bench_bob, BenchConfig};
use privpath_cli::config::{load_probe_config, load_sim_config};
use privpath_cli::pathfile::load_path;
use privpath_core::{
    brute_force_probe, flight_sim, keygen, AliceSession, BobSession, CountedChannel, Metrics,
};

#[derive(Parser)]
#[command(
    name = "privpath",
    about = "Privacy-preserving drone path comparison: two parties learn about collisions between their routes without revealing them",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, ValueEnum)]
enum Role {
    Alice,
    Bob,
}

#[derive(Subcommand)]
enum Command {
    /// Run one protocol session as either role over TCP.
    Run {
        /// alice initiates and learns her colliding segments; bob serves.
        #[arg(long, value_enum)]
        role: Role,
        /// Address to listen on (bob).
        #[arg(long)]
        listen: Option<String>,
        /// Address to connect to (alice).
        #[arg(long)]
        connect: Option<String>,
        /// Route file: one `x,y` point per line.
        #[arg(long)]
        path: PathBuf,
        /// Key size for the generated key pair (bob only).
        #[arg(long, default_value_t = 2048)]
        key_bits: u64,
        /// Write a JSON summary here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Repeated single-segment comparison benchmark with byte accounting.
    Bench {
        #[arg(long, default_value_t = 30)]
        trials: u32,
        #[arg(long, default_value_t = 2048)]
        key_bits: u64,
        #[arg(long)]
        seed: Option<u64>,
        /// Coordinate bounds as MIN:MAX.
        #[arg(long, default_value = "-99:99")]
        coord_range: String,
        /// Serve the responder side for a two-host run.
        #[arg(long)]
        listen: Option<String>,
        /// Drive trials against a remote responder.
        #[arg(long)]
        connect: Option<String>,
        /// Write the JSON report here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Discrete-time flight simulation with altitude deconfliction.
    Sim {
        #[arg(long)]
        config: PathBuf,
        /// Write the trace log here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cost out the raster brute-force probe against a victim route.
    Probe {
        #[arg(long)]
        config: PathBuf,
        /// Write the JSON report here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Serialize)]
struct RunSummary {
    role: String,
    collisions: Vec<usize>,
    metrics: Metrics,
}

fn parse_coord_range(s: &str) -> Result<(i64, i64)> {
    let Some((lo, hi)) = s.rsplit_once(':') else {
        bail!("--coord-range wants MIN:MAX, got {s:?}");
    };
    Ok((
        lo.parse().with_context(|| format!("bad MIN in {s:?}"))?,
        hi.parse().with_context(|| format!("bad MAX in {s:?}"))?,
    ))
}

fn write_or_print(out: &Option<PathBuf>, content: &str) -> Result<()> {
    match out {
        Some(file) => {
            std::fs::write(file, content)
                .with_context(|| format!("writing {}", file.display()))?;
            eprintln!("wrote {}", file.display());
        }
        None => print!("{content}"),
    }
    Ok(())
}

fn cmd_run(
    role: Role,
    listen: Option<String>,
    connect: Option<String>,
    path_file: PathBuf,
    key_bits: u64,
    out: Option<PathBuf>,
) -> Result<()> {
    let route = load_path(&path_file)?;
    match role {
        Role::Bob => {
            let Some(addr) = listen else {
                bail!("--role bob needs --listen HOST:PORT");
            };
            eprintln!("generating {key_bits}-bit key pair...");
            let (_, sk) = keygen(key_bits)?;
            let listener = TcpListener::bind(&addr).with_context(|| format!("binding {addr}"))?;
            eprintln!("listening on {addr}");
            let (stream, peer) = listener.accept()?;
            stream.set_nodelay(true)?;
            eprintln!("serving session for {peer}");
            let outcome = BobSession::new(&sk, &route).run(CountedChannel::new(stream))?;
            println!(
                "session complete: bytes_out={} bytes_in={} time_s={:.3}",
                outcome.metrics.bytes_out, outcome.metrics.bytes_in, outcome.metrics.wall_time_s
            );
            let summary = RunSummary {
                role: "bob".into(),
                collisions: Vec::new(),
                metrics: outcome.metrics,
            };
            if out.is_some() {
                write_or_print(&out, &serde_json::to_string_pretty(&summary)?)?;
            }
        }
        Role::Alice => {
            let Some(addr) = connect else {
                bail!("--role alice needs --connect HOST:PORT");
            };
            let stream = TcpStream::connect(&addr).with_context(|| format!("connecting {addr}"))?;
            stream.set_nodelay(true)?;
            let outcome = AliceSession::new(&route).run(CountedChannel::new(stream))?;
            let indices: Vec<usize> = outcome.collisions.iter().copied().collect();
            println!(
                "colliding_segments={}",
                if indices.is_empty() {
                    "none".to_string()
                } else {
                    indices
                        .iter()
                        .map(|i| i.to_string())
                        .collect::<Vec<_>>()
                        .join(",")
                }
            );
            println!(
                "bytes_total={} setup_s={:.3} compare_s={:.3} time_s={:.3} mult_calls={} sign_calls={}",
                outcome.metrics.bytes_total(),
                outcome.setup_s,
                outcome.compare_s,
                outcome.metrics.wall_time_s,
                outcome.metrics.mult_calls,
                outcome.metrics.sign_calls
            );
            let summary = RunSummary {
                role: "alice".into(),
                collisions: indices,
                metrics: outcome.metrics,
            };
            if out.is_some() {
                write_or_print(&out, &serde_json::to_string_pretty(&summary)?)?;
            }
        }
    }
    Ok(())
}

fn cmd_bench(
    trials: u32,
    key_bits: u64,
    seed: Option<u64>,
    coord_range: String,
    listen: Option<String>,
    connect: Option<String>,
    out: Option<PathBuf>,
) -> Result<()> {
    let (coord_min, coord_max) = parse_coord_range(&coord_range)?;
    let cfg = BenchConfig {
        trials,
        coord_min,
        coord_max,
        key_bits,
        seed,
    };
    if let Some(addr) = listen {
        return serve_bench_bob(&addr, &cfg);
    }
    let report = match connect {
        Some(addr) => run_bench_alice(&addr, &cfg)?,
        None => run_bench(&cfg)?,
    };
    print!("{}", report.render_text());
    if out.is_some() {
        write_or_print(&out, &serde_json::to_string_pretty(&report)?)?;
    }
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Run {
            role,
            listen,
            connect,
            path,
            key_bits,
            out,
        } => cmd_run(role, listen, connect, path, key_bits, out),
        Command::Bench {
            trials,
            key_bits,
            seed,
            coord_range,
            listen,
            connect,
            out,
        } => cmd_bench(trials, key_bits, seed, coord_range, listen, connect, out),
        Command::Sim { config, out } => {
            let (drones, cfg) = load_sim_config(&config)?;
            let log = flight_sim(&drones, &cfg)?;
            write_or_print(&out, &log.to_lines())
        }
        Command::Probe { config, out } => {
            let (cfg, victim) = load_probe_config(&config)?;
            let report = brute_force_probe(&cfg, &victim)?;
            print!("{}", report.to_kv_lines());
            if out.is_some() {
                write_or_print(&out, &serde_json::to_string_pretty(&report)?)?;
            }
            Ok(())
        }
    }
}
