use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use std::fs;
use std::path::{Path, PathBuf};
use zac::cache;
use zac::config::{KappaSpec, Method, SimConfig};
use zac::io::{self, LoadedNetwork};
use zac::sim::{run_prepared, Prepared};
use zac_core::network::synthetic::{generate_synthetic_city, synthetic_demand, SyntheticConfig};
use zac_core::pathstore::{prune_paths_data_driven, PruneConfig, DEFAULT_PATH_BUDGET};
use zac_core::zoning::ZoningMethod;

#[derive(Parser)]
#[command(name = "zac", version, about = "Zone-path ridesharing dispatch simulator")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Replay a demand trace with one dispatch method.
    Simulate(SimulateArgs),
    /// Write a synthetic city, one day of demand and sample days.
    GenSynthetic(GenArgs),
    /// Enumerate (or prune) partial paths into a cache file.
    BuildPaths(PathArgs),
    /// Cluster locations into zones.
    Cluster(ClusterArgs),
}

#[derive(Args)]
struct NetworkArgs {
    #[arg(long)]
    network: PathBuf,
    /// `id,x,y` node coordinates (needed by grid zoning).
    #[arg(long)]
    coords: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    net: NetworkArgs,
    #[arg(long)]
    trace: PathBuf,
    /// `key = value` settings file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    method: Option<Method>,
    #[arg(long)]
    delta: Option<i64>,
    #[arg(long)]
    tau: Option<i64>,
    #[arg(long)]
    lambda: Option<i64>,
    /// Capacity: an integer, uniform_4, uniform_10 or 80_20.
    #[arg(long)]
    kappa: Option<KappaSpec>,
    #[arg(long)]
    fleet: Option<usize>,
    /// Directory of historical traces for zacbenders.
    #[arg(long)]
    samples: Option<PathBuf>,
    #[arg(long)]
    rho: Option<i64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    horizon: Option<i64>,
    /// Comma-separated zone sizes, ascending from 0.
    #[arg(long)]
    zone_sizes: Option<String>,
    /// Per-epoch wall-clock budget, seconds.
    #[arg(long)]
    time_limit: Option<f64>,
    /// Directory for the path cache.
    #[arg(long)]
    cache: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value = "synthetic")]
    out: PathBuf,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 3600)]
    horizon: i64,
    #[arg(long, default_value_t = 8)]
    suburbs: usize,
    /// Mean uniform requests per epoch.
    #[arg(long, default_value_t = 8.0)]
    uniform_rate: f64,
    /// First/last-mile requests per station per train.
    #[arg(long, default_value_t = 6)]
    station_batch: usize,
    /// Extra days of demand written under `samples/`.
    #[arg(long, default_value_t = 5)]
    days: u64,
}

#[derive(Args)]
struct PathArgs {
    #[command(flatten)]
    net: NetworkArgs,
    #[arg(long, default_value_t = 120)]
    tau: i64,
    #[arg(long)]
    out: PathBuf,
    /// History trace; enables data-driven pruning.
    #[arg(long)]
    history: Option<PathBuf>,
    /// Comma-separated segment durations summing to tau.
    #[arg(long)]
    segments: Option<String>,
    /// Comma-separated thresholds, requests per minute.
    #[arg(long)]
    thresholds: Option<String>,
    #[arg(long, default_value_t = DEFAULT_PATH_BUDGET)]
    budget: usize,
}

#[derive(Args)]
struct ClusterArgs {
    #[command(flatten)]
    net: NetworkArgs,
    /// gbc, hac_max or hac_avg.
    #[arg(long, default_value = "hac_max")]
    method: String,
    #[arg(long)]
    size: i64,
    #[arg(long)]
    out: PathBuf,
}

fn load_net(a: &NetworkArgs) -> Result<LoadedNetwork> {
    io::load_network(&a.network, a.coords.as_deref()).context("loading network")
}

fn list<T: std::str::FromStr>(s: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    s.split(',').map(|x| x.trim().parse::<T>().map_err(|e| anyhow::anyhow!("`{x}`: {e}"))).collect()
}

fn simulate(a: SimulateArgs) -> Result<()> {
    let mut cfg = SimConfig::default();
    if let Some(p) = &a.config {
        cfg.apply_file(p)?;
    }
    macro_rules! over {
        ($($f:ident => $field:ident),*) => { $( if let Some(v) = a.$f.clone() { cfg.$field = v; } )* };
    }
    over!(method => method, delta => delta, tau => tau, lambda => lambda, kappa => kappa, fleet => fleet,
          rho => rho, seed => seed, horizon => horizon, time_limit => time_limit);
    if let Some(s) = &a.zone_sizes {
        cfg.zone_sizes = list(s)?;
    }
    cfg.validate()?;
    let net = load_net(&a.net)?;
    let trace = io::load_trace(&a.trace, &net)?;
    let samples = match &a.samples {
        Some(dir) => io::load_sample_dir(dir, &net)?,
        None => Vec::new(),
    };
    if cfg.method == Method::ZacBenders && samples.len() < cfg.num_samples {
        bail!("zacbenders needs --samples with at least {} traces", cfg.num_samples);
    }
    let paths = cache::enumerate_cached(&net.network, cfg.tau, DEFAULT_PATH_BUDGET, a.cache.as_deref())?;
    log::info!("{} partial paths, {} locations", paths.len(), net.network.len());
    let prep = Prepared::new(&net.network, &cfg, paths)?;
    let report = run_prepared(&cfg, &net.network, &prep, &trace, &samples)?;
    report.write_dir(&a.out).with_context(|| format!("writing {}", a.out.display()))?;
    fs::write(a.out.join("config.txt"), cfg.to_text())?;
    let s = &report.summary;
    println!(
        "{}: served {}/{} ({:.2}%), mean wait {:.1}s, mean delay {:.1}s, timeouts {}",
        s.method, s.served, s.total_requests, s.service_rate, s.mean_wait, s.mean_delay, s.timeouts
    );
    Ok(())
}

fn write(path: &Path, body: &str) -> Result<()> {
    fs::write(path, body).with_context(|| format!("writing {}", path.display()))
}

fn gen_synthetic(a: GenArgs) -> Result<()> {
    let cfg = SyntheticConfig {
        seed: a.seed,
        horizon: a.horizon,
        suburbs: a.suburbs,
        uniform_per_epoch: a.uniform_rate,
        station_batch: a.station_batch,
        ..Default::default()
    };
    let city = generate_synthetic_city(&cfg).map_err(|e| anyhow::anyhow!("{e}"))?;
    let net = &city.network;
    fs::create_dir_all(a.out.join("samples"))?;
    write(&a.out.join("graph.csv"), &io::graph_csv(net))?;
    write(&a.out.join("coords.csv"), &io::coords_csv(net).expect("synthetic city has coordinates"))?;
    write(&a.out.join("trace.csv"), &io::trace_csv(net, city.trace.requests()))?;
    let stations: String =
        std::iter::once("station".to_string()).chain(city.stations.iter().map(|&s| net.name(s).to_string())).collect::<Vec<_>>().join("\n");
    write(&a.out.join("stations.csv"), &(stations + "\n"))?;
    for d in 0..a.days {
        let seed = a.seed.wrapping_mul(1000).wrapping_add(d + 1);
        let day = synthetic_demand(&cfg, net, &city.stations, &city.suburb_of, seed).map_err(|e| anyhow::anyhow!("{e}"))?;
        write(&a.out.join("samples").join(format!("day_{d:02}.csv")), &io::trace_csv(net, day.requests()))?;
    }
    println!("{} locations, {} requests, {} sample days in {}", net.len(), city.trace.len(), a.days, a.out.display());
    Ok(())
}

fn build_paths(a: PathArgs) -> Result<()> {
    let net = load_net(&a.net)?;
    let (paths, settings) = match &a.history {
        None => (zac_core::pathstore::enumerate_paths(&net.network, a.tau, a.budget)?.paths, format!("enumerate tau={}", a.tau)),
        Some(h) => {
            let history = io::load_trace(h, &net)?.requests().to_vec();
            let segments: Vec<i64> = list(a.segments.as_deref().unwrap_or(&a.tau.to_string()))?;
            let thresholds: Vec<f64> = list(a.thresholds.as_deref().unwrap_or("0"))?;
            let settings = format!("prune segments={segments:?} thresholds={thresholds:?}");
            let pruned = prune_paths_data_driven(&net.network, &PruneConfig { segments, thresholds, history }, a.budget)?;
            if pruned.fallback_only {
                log::warn!("every segment was pruned; only shortest-path fallbacks remain");
            }
            (pruned.paths, settings)
        }
    };
    let key = cache::cache_key(&net.network, &settings);
    cache::save(&a.out, &key, &paths)?;
    println!("{} paths written to {}", paths.len(), a.out.display());
    Ok(())
}

fn cluster(a: ClusterArgs) -> Result<()> {
    let net = load_net(&a.net)?;
    let method = match a.method.to_ascii_lowercase().as_str() {
        "gbc" | "grid" => ZoningMethod::Grid,
        "hac_max" => ZoningMethod::HacMax,
        "hac_avg" => ZoningMethod::HacAvg,
        other => bail!("unknown clustering method {other}"),
    };
    let z = zac_core::zoning::cluster(&net.network, method, a.size)?;
    write(&a.out, &io::zoning_csv(&net.network, &z))?;
    println!("{} zones, largest internal time {} s", z.len(), z.max_internal_time(&net.network));
    Ok(())
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match Cli::parse().cmd {
        Cmd::Simulate(a) => simulate(a),
        Cmd::GenSynthetic(a) => gen_synthetic(a),
        Cmd::BuildPaths(a) => build_paths(a),
        Cmd::Cluster(a) => cluster(a),
    }
}
