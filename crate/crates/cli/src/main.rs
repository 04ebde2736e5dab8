mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use report::{config_hash, Format, RunRecord};

#[derive(Parser, Debug)]
#[command(name = "mechdelin", version, about = "Sample-based mechanism design: partitions, ERM, generalization bounds, SPM")]
pub struct Cli {
    /// Base seed; every random stream is derived from it.
    #[arg(long, global = true, env = "MECHDELIN_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (defaults to the number of CPUs). Results do not depend on it.
    #[arg(long, global = true, env = "MECHDELIN_WORKERS")]
    pub workers: Option<usize>,
    /// Output prefix: writes `<prefix>.json` and `<prefix>.csv` (and `.md` with `--format md`).
    /// Without it the record is printed to stdout in `--format`.
    #[arg(long, global = true, env = "MECHDELIN_OUT")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, env = "MECHDELIN_FORMAT", value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// Generating hyperplanes and cells of a class on one profile (or the overlay of a sample set).
    Partition(PartitionArgs),
    /// Evaluate one mechanism on a profile.
    Profit(ProfitArgs),
    /// Empirical profit maximization over a sample set.
    Erm(ErmArgs),
    /// Empirical Rademacher complexity by sign draws.
    Rademacher(RademacherArgs),
    /// Generalization and outlier-robust bounds from (U, d, t, N, δ).
    Bound(BoundArgs),
    /// Shattering check, either on a built-in construction or on a sample set.
    Shatter(ShatterArgs),
    /// Sample-versus-expected profit gap of the empirical maximizer over repeated draws.
    Gap(GapArgs),
    /// Compare U over an item-independent support with the sum of per-item sups.
    Decompose(DecomposeArgs),
    /// How often the sample quantile threshold is exceeded, over repeated draws.
    Outlier(OutlierArgs),
    /// Structural profit maximization over a hierarchy of nested classes.
    Spm(SpmArgs),
    /// Draw a sample set from a distribution file.
    Sample(SampleArgs),
    /// Run the subcommand(s) described by a JSON config file.
    Run(RunArgs),
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ClassArgs {
    /// Mechanism kind, e.g. two_part_tariff_menu, item_pricing, lottery_menu, mbarp.
    #[arg(long = "class")]
    pub kind: Option<String>,
    /// JSON file with a full class description (kind, anonymity, structure).
    #[arg(long)]
    pub class_file: Option<PathBuf>,
    /// anonymous or non_anonymous.
    #[arg(long)]
    pub anonymity: Option<String>,
    #[arg(long)]
    pub menu_length: Option<usize>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct BoxArgs {
    /// Lower corner of the search box, comma separated (default: the class's default box).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub lo: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub hi: Option<Vec<f64>>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct MethodArgs {
    /// exact, grid, random or cell_sampled.
    #[arg(long, default_value = "exact")]
    pub method: String,
    #[arg(long, default_value_t = 0.01)]
    pub resolution: f64,
    #[arg(long, default_value_t = 10_000)]
    pub draws: usize,
    #[arg(long, default_value_t = 2000)]
    pub probes: usize,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct PartitionArgs {
    #[command(flatten)]
    pub class: ClassArgs,
    /// Problem file with one profile (`buyers`) or a sample set (`profiles`, overlaid).
    #[arg(long)]
    pub profile: PathBuf,
    #[command(flatten)]
    pub bx: BoxArgs,
    /// Probes for sampled enumeration when d > 2.
    #[arg(long, default_value_t = 2000)]
    pub probes: usize,
    /// Random points per cell for the affine check (0 skips it).
    #[arg(long, default_value_t = 0)]
    pub verify_trials: usize,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ProfitArgs {
    #[command(flatten)]
    pub class: ClassArgs,
    #[arg(long)]
    pub profile: PathBuf,
    /// Mechanism parameters, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub params: Vec<f64>,
    /// For lottery menus: Monte Carlo draws of z for E_z[profit′] (0 skips it).
    #[arg(long, default_value_t = 0)]
    pub z_draws: usize,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ErmArgs {
    #[command(flatten)]
    pub class: ClassArgs,
    /// Problem file with `profiles` (or one profile in `buyers`).
    #[arg(long)]
    pub samples: PathBuf,
    #[command(flatten)]
    pub bx: BoxArgs,
    #[command(flatten)]
    pub method: MethodArgs,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct RademacherArgs {
    #[command(flatten)]
    pub class: ClassArgs,
    #[arg(long)]
    pub samples: PathBuf,
    #[arg(long, default_value_t = 100)]
    pub sigma_draws: usize,
    #[command(flatten)]
    pub bx: BoxArgs,
    #[command(flatten)]
    pub method: MethodArgs,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct BoundArgs {
    #[arg(long = "U")]
    pub u: f64,
    #[arg(long)]
    pub d: u64,
    #[arg(long)]
    pub t: u64,
    #[arg(long = "N")]
    pub n: u64,
    #[arg(long, default_value_t = 0.05)]
    pub delta: f64,
    /// Multiplier standing in for the unspecified constant of the O(·) bounds.
    #[arg(long, default_value_t = 1.0)]
    pub constant: f64,
    /// Outlier threshold a (with --b, also reports the outlier-robust bound).
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long)]
    pub b: Option<f64>,
    #[arg(long, default_value_t = 2.0)]
    pub log_base: f64,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ShatterArgs {
    /// Built-in construction: item_pricing.
    #[arg(long)]
    pub construction: Option<String>,
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    #[arg(long, default_value_t = 2)]
    pub m: usize,
    /// Per-buyer prices in the construction (anonymous otherwise).
    #[arg(long)]
    pub non_anonymous: bool,
    #[command(flatten)]
    pub class: ClassArgs,
    /// Sample set to test instead of a construction.
    #[arg(long)]
    pub samples: Option<PathBuf>,
    /// Witnesses z, comma separated (one per sample).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub z: Option<Vec<f64>>,
    #[command(flatten)]
    pub bx: BoxArgs,
    #[command(flatten)]
    pub method: MethodArgs,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct GapArgs {
    #[command(flatten)]
    pub class: ClassArgs,
    /// Distribution file (`atoms`, `marginals` or `profiles`).
    #[arg(long)]
    pub dist: PathBuf,
    #[arg(long = "N")]
    pub n: usize,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, default_value_t = 0.05)]
    pub delta: f64,
    #[command(flatten)]
    pub method: MethodArgs,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct DecomposeArgs {
    #[command(flatten)]
    pub class: ClassArgs,
    /// Item-independent distribution file (`marginals`).
    #[arg(long)]
    pub dist: PathBuf,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct OutlierArgs {
    /// Distribution file over single-item tariff profiles.
    #[arg(long)]
    pub dist: PathBuf,
    #[arg(long = "N")]
    pub n: usize,
    #[arg(long, value_delimiter = ',')]
    pub b: Vec<f64>,
    #[arg(long, default_value_t = 200)]
    pub trials: usize,
    #[arg(long, default_value_t = 0.05)]
    pub delta: f64,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SpmArgs {
    /// Hierarchy JSON: base class, levels, weights.
    #[arg(long)]
    pub hierarchy: PathBuf,
    #[arg(long)]
    pub samples: PathBuf,
    #[arg(long, default_value_t = 0.05)]
    pub delta: f64,
    /// geometric, uniform, or a JSON file with one weight per level.
    #[arg(long)]
    pub weights: Option<String>,
    #[arg(long, default_value_t = 1.0)]
    pub constant: f64,
    /// Profit range U (default: computed from --dist, else from the samples).
    #[arg(long = "U")]
    pub u: Option<f64>,
    /// Distribution the samples came from; enables the union-bound check.
    #[arg(long)]
    pub dist: Option<PathBuf>,
    /// Trials of the union-bound check (needs --dist).
    #[arg(long, default_value_t = 0)]
    pub union_trials: usize,
    #[command(flatten)]
    pub method: MethodArgs,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SampleArgs {
    #[arg(long)]
    pub dist: PathBuf,
    #[arg(long = "N")]
    pub n: usize,
    /// Where to write the sampled `profiles` file.
    #[arg(long)]
    pub write: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
}

/// Exit status: 2 for invalid input, 3 when a resource limit refuses the job.
fn exit_code(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if let Some(err) = cause.downcast_ref::<mechdelin::Error>() {
            return match err {
                mechdelin::Error::Domain(_) | mechdelin::Error::Json(_) | mechdelin::Error::Geometry(_) => 2,
                mechdelin::Error::Resource(_) => 3,
                _ => 1,
            };
        }
    }
    1
}

/// Runs one parsed command line and returns the records it produced.
pub fn execute(cli: &Cli) -> Result<Vec<RunRecord>> {
    if let Command::Run(args) = &cli.command {
        return config::run(args, cli);
    }
    let start = Instant::now();
    let (summary, table) = commands::dispatch(&cli.command, cli.seed)?;
    let name = serde_json::to_value(&cli.command)?;
    let command = name.as_object().and_then(|o| o.keys().next().cloned()).unwrap_or_default();
    let hashed = serde_json::json!({ "command": name, "seed": cli.seed });
    Ok(vec![RunRecord {
        command,
        version: env!("CARGO_PKG_VERSION").to_string(),
        config_hash: config_hash(&hashed),
        seed: cli.seed,
        wall_time_s: start.elapsed().as_secs_f64(),
        summary,
        table,
    }])
}

pub fn emit(records: &[RunRecord], out: Option<&std::path::Path>, format: Format) -> Result<()> {
    match out {
        Some(prefix) if records.len() == 1 => {
            records[0].write(prefix, format)?;
        }
        Some(prefix) => {
            for (k, r) in records.iter().enumerate() {
                let mut p = prefix.as_os_str().to_owned();
                p.push(format!(".{k}"));
                r.write(std::path::Path::new(&p), format)?;
            }
        }
        None => {
            for r in records {
                print!("{}", r.render(format)?);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(w) = cli.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(w.max(1)).build_global() {
            eprintln!("error: worker pool: {e}");
            return ExitCode::from(1);
        }
    }
    match execute(&cli).and_then(|r| emit(&r, cli.out.as_deref(), cli.format)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
