use std::f64::consts::PI;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use d2d_caching::analytic::second_order_product_density;
use d2d_caching::experiments::{
    kind_name, optimized_policy, parse_kind, peak_gain, run_radii_profile, run_sweep, run_table2,
    run_utilization, write_radii_csv, write_sweep_csv, write_table2_csv, write_utilization_csv,
    ExperimentSpec, OutputKind, Sweep,
};
use d2d_caching::numerics::integrate;
use d2d_caching::simulator::{empirical_pair_density, estimate_hit, realize, write_realization_csv};
use d2d_caching::{Error, PlacementKind, ScenarioConfig, SimOptions, Strategy};

const EXIT_CONFIG: u8 = 2;
const EXIT_SOLVER: u8 = 3;
const EXIT_MISMATCH: u8 = 4;
const DEFAULT_REPLICATIONS: u64 = 10_000;

/// Spatial cache placement experiments for device-to-device networks.
///
/// Without --scenario the two-file example is used: intensity 1/π, D2D
/// radius 1, two files with demand (2/3, 1/3) and one cache slot.
#[derive(Parser)]
#[command(name = "d2dcache", version)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Scenario file with `key = value` lines.
    #[arg(long, global = true)]
    scenario: Option<PathBuf>,
    /// Overrides the scenario seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Monte Carlo replications per point.
    #[arg(long, global = true)]
    replications: Option<u64>,
    /// Output file; standard output if omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Comma-separated subset of mpc,gcp,mhc_a,mhc_b.
    #[arg(long, global = true, value_delimiter = ',')]
    strategies: Vec<String>,
    /// Full caches keep suppressing neighbours in later thinning rounds.
    #[arg(long, global = true)]
    full_cache_blocks: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Two-file example for seven D2D radii, checked against reference values.
    Table2,
    /// Hit probability of each strategy over a one-parameter sweep.
    Sweep {
        /// intensity, d2d_radius or cache_size.
        #[arg(long)]
        param: String,
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        /// Comma-separated subset of analytic,bounds,monte_carlo,utilization.
        #[arg(long, value_delimiter = ',', default_value = "analytic,bounds")]
        outputs: Vec<String>,
    },
    /// Cache utilization with the minimal intensities that beat independent placement.
    Utilization {
        /// Node intensities; the scenario intensity if omitted.
        #[arg(long, value_delimiter = ',')]
        intensities: Vec<f64>,
        #[arg(long, value_delimiter = ',', required = true)]
        radii: Vec<f64>,
    },
    /// Exclusion radius of every file for several cache sizes.
    Radii {
        #[arg(long, value_delimiter = ',', default_value = "1,10,50")]
        cache_sizes: Vec<usize>,
    },
    /// Monte Carlo hit estimates for the optimized policies.
    Simulate {
        /// Also write the first realization of the first strategy here.
        #[arg(long)]
        dump: Option<PathBuf>,
        /// Instead of hit estimates, histogram the pair density of a single
        /// file thinned with this exclusion radius.
        #[arg(long)]
        pair_density: Option<f64>,
        #[arg(long, default_value_t = 60)]
        bins: usize,
    },
}

enum Failure {
    Core(Error),
    Mismatch(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Core(e.into())
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Mismatch(msg)) => {
            eprintln!("mismatch: {msg}");
            ExitCode::from(EXIT_MISMATCH)
        }
        Err(Failure::Core(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Config { .. } | Error::InvalidArgument(_) | Error::Io(_) => EXIT_CONFIG,
                _ => EXIT_SOLVER,
            })
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let g = &cli.global;
    let mut out: Box<dyn Write> = match &g.out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    };
    let options = SimOptions { full_cache_blocks: g.full_cache_blocks, ..SimOptions::default() };
    match &cli.command {
        Command::Table2 => {
            let rows = run_table2()?;
            write_table2_csv(&rows, &mut out)?;
            out.flush()?;
            let bad: Vec<String> = rows
                .iter()
                .filter(|r| !r.mismatches().is_empty())
                .map(|r| format!("R={} ({})", r.label, r.mismatches().join(", ")))
                .collect();
            if !bad.is_empty() {
                return Err(Failure::Mismatch(bad.join("; ")));
            }
        }
        Command::Sweep { param, values, outputs } => {
            let mut spec = ExperimentSpec::new(scenario(g)?);
            spec.sweep = Some(Sweep { param: param.parse()?, values: values.clone() });
            spec.outputs = outputs.iter().map(|o| o.parse()).collect::<Result<_, _>>()?;
            spec.options = options;
            if let Some(s) = strategies(g)? {
                spec.strategies = s;
            }
            if spec.wants(OutputKind::MonteCarlo) {
                spec.replications = g.replications.unwrap_or(DEFAULT_REPLICATIONS);
            }
            let rows = run_sweep(&spec)?;
            write_sweep_csv(&spec, &rows, &mut out)?;
            for (a, b) in [
                (PlacementKind::MhcA, PlacementKind::Gcp),
                (PlacementKind::MhcB, PlacementKind::Gcp),
                (PlacementKind::MhcA, PlacementKind::Mpc),
            ] {
                if let Some((gain, at)) = peak_gain(&rows, a, b) {
                    eprintln!("peak gain of {} over {}: {:.1}% at {at}", kind_name(a), kind_name(b), 100.0 * gain);
                }
            }
        }
        Command::Utilization { intensities, radii } => {
            let base = scenario(g)?;
            let lts = if intensities.is_empty() { vec![base.intensity] } else { intensities.clone() };
            let rows = run_utilization(&base, &lts, radii, g.replications.unwrap_or(0), &options)?;
            write_utilization_csv(&rows, &mut out)?;
        }
        Command::Radii { cache_sizes } => {
            let rows = run_radii_profile(&scenario(g)?, cache_sizes)?;
            write_radii_csv(&rows, &mut out)?;
        }
        Command::Simulate { dump, pair_density, bins } => {
            let cfg = scenario(g)?;
            let reps = g.replications.unwrap_or(DEFAULT_REPLICATIONS);
            if let Some(r_m) = *pair_density {
                pair_density_csv(&cfg, r_m, reps, *bins, &mut out)?;
            } else {
                simulate(&cfg, &strategies(g)?.unwrap_or_else(all_kinds), reps, &options, dump.as_ref(), &mut out)?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

fn scenario(g: &Global) -> Result<ScenarioConfig, Error> {
    let cfg = match &g.scenario {
        Some(p) => ScenarioConfig::from_path(p)?,
        None => ScenarioConfig::two_file_example(1.0),
    };
    let cfg = match g.seed {
        Some(s) => cfg.with_seed(s),
        None => cfg,
    };
    cfg.validate()?;
    Ok(cfg)
}

fn all_kinds() -> Vec<PlacementKind> {
    vec![PlacementKind::Mpc, PlacementKind::Gcp, PlacementKind::MhcA, PlacementKind::MhcB]
}

fn strategies(g: &Global) -> Result<Option<Vec<PlacementKind>>, Error> {
    if g.strategies.is_empty() {
        return Ok(None);
    }
    g.strategies.iter().map(|s| parse_kind(s)).collect::<Result<_, _>>().map(Some)
}

fn simulate(
    cfg: &ScenarioConfig,
    kinds: &[PlacementKind],
    reps: u64,
    options: &SimOptions,
    dump: Option<&PathBuf>,
    out: &mut dyn Write,
) -> Result<(), Failure> {
    let pop = cfg.popularity()?;
    writeln!(out, "strategy,source,replications,mc_mean,mc_std_error,file_availability")?;
    for (k, &kind) in kinds.iter().enumerate() {
        let strategy = Strategy::from_policy(&optimized_policy(cfg, kind)?);
        let est = estimate_hit(cfg, &pop, &strategy, reps, options)?;
        let avail: Vec<String> = est.per_file_hit.iter().map(|a| format!("{a:.6}")).collect();
        writeln!(
            out,
            "{},monte_carlo,{},{:.6},{:.6},{}",
            kind_name(kind),
            est.replications,
            est.mean,
            est.std_error,
            avail.join(";")
        )?;
        if let (0, Some(path)) = (k, dump) {
            let pattern = realize(cfg, &pop, &strategy, 0, options)?;
            write_realization_csv(&pattern, BufWriter::new(File::create(path)?))?;
        }
    }
    Ok(())
}

fn pair_density_csv(
    cfg: &ScenarioConfig,
    r_m: f64,
    reps: u64,
    bins: usize,
    out: &mut dyn Write,
) -> Result<(), Failure> {
    let h = empirical_pair_density(cfg, r_m, reps, bins)?;
    writeln!(out, "r_lo,r_hi,empirical,analytic,pairs")?;
    for k in 0..bins {
        let (a, b) = (h.edges[k], h.edges[k + 1]);
        let mass = integrate(
            |r| 2.0 * PI * r * second_order_product_density(cfg, r_m, r).unwrap_or(f64::NAN),
            a,
            b,
            &[r_m, 2.0 * r_m],
            1e-10,
        )?;
        let want = mass / (PI * (b * b - a * a));
        writeln!(out, "{a:.6},{b:.6},{:.8},{want:.8},{}", h.density[k], h.pair_counts[k])?;
    }
    Ok(())
}
