//! Command-line front end: genome scans, hotspot detection, one- vs two-QTL
//! dissection, the LDA diagnostic, and the power study. Every output file
//! embeds the analysis configuration and seed for provenance.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use eqtl_dissect::{Error, MapFunction, SearchMode};

#[derive(Parser, Serialize)]
#[command(name = "eqtl-dissect", version, about = "Dissection of trans-eQTL hotspots")]
pub struct Cli {
    /// Seed for every random choice (trait-tie shuffles, search starts,
    /// replicate simulation)
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,

    /// Worker threads; 0 uses one per core. Results do not depend on this.
    #[arg(long, global = true, default_value_t = 0)]
    #[serde(skip)]
    pub threads: usize,

    /// Directory for output files
    #[arg(long, global = true, default_value = "out")]
    #[serde(skip)]
    pub out_dir: PathBuf,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Serialize)]
pub enum Command {
    /// Normal-quantile transform, genotype probabilities, and Haley-Knott
    /// genome scans; writes peak records (and optionally full LOD curves)
    Scan(ScanArgs),
    /// Sliding-window trans-eQTL counts and hotspot intervals from scan peaks
    Hotspots(HotspotsArgs),
    /// One- versus two-QTL multivariate test on a hotspot interval
    Dissect(DissectArgs),
    /// Linear-discriminant scatter data for recombinant diagnosis
    Lda(LdaArgs),
    /// Power study for the two-versus-one test
    Power(PowerArgs),
}

fn parse_map_function(s: &str) -> Result<MapFunction, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_error_rate(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("bad error rate `{s}`"))?;
    if (0.0..0.5).contains(&v) {
        Ok(v)
    } else {
        Err(format!("error rate {v} outside [0, 0.5)"))
    }
}

fn parse_positive(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("bad number `{s}`"))?;
    if v > 0.0 {
        Ok(v)
    } else {
        Err(format!("{v} must be positive"))
    }
}

fn parse_non_negative(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("bad number `{s}`"))?;
    if v >= 0.0 {
        Ok(v)
    } else {
        Err(format!("{v} must be non-negative"))
    }
}

/// Shared input-file and genotype-probability options.
#[derive(Args, Serialize, Clone)]
pub struct InputArgs {
    /// Genotype CSV: header `id,<marker>,...`, cells BB/BR/RR/NA
    #[arg(long)]
    pub geno: PathBuf,

    /// Map CSV: header `marker,chr,pos_cM`
    #[arg(long)]
    pub map: PathBuf,

    /// Phenotype CSV: header `id,<trait>,...`, real or NA cells
    #[arg(long)]
    pub pheno: PathBuf,

    /// Covariate CSV: header `id,<col>,...`
    #[arg(long)]
    pub covar: Option<PathBuf>,

    /// Additive covariate column (repeat for several)
    #[arg(long = "additive")]
    pub additive: Vec<String>,

    /// Interactive covariate column (repeat for several)
    #[arg(long = "interactive")]
    pub interactive: Vec<String>,

    /// Trait annotation CSV: header `trait,chr,pos_cM`
    #[arg(long = "trait-meta")]
    pub trait_meta: Option<PathBuf>,

    /// Genotyping error rate for the hidden Markov model
    #[arg(long, default_value = "0.002", value_parser = parse_error_rate)]
    pub error_rate: f64,

    /// Map function: haldane or carter-falconer
    #[arg(long, default_value = "carter-falconer", value_parser = parse_map_function)]
    pub map_function: MapFunction,

    /// Maximum pseudomarker spacing in cM
    #[arg(long, default_value = "0.5", value_parser = parse_positive)]
    pub step: f64,

    /// Cache file for the genotype-probability tensor
    #[arg(long = "genoprob-cache")]
    pub genoprob_cache: Option<PathBuf>,

    /// Skip the normal-quantile transform of each trait
    #[arg(long)]
    pub no_normalize: bool,
}

#[derive(Args, Serialize)]
pub struct ScanArgs {
    #[command(flatten)]
    pub input: InputArgs,

    /// Keep peaks with LOD at or above this
    #[arg(long = "lod-min", default_value = "5", value_parser = parse_non_negative)]
    pub lod_min: f64,

    /// Also write the full LOD curves to CSV
    #[arg(long)]
    pub curves: bool,
}

#[derive(Args, Serialize)]
pub struct HotspotsArgs {
    /// Peaks JSON written by `scan`
    #[arg(long)]
    pub peaks: PathBuf,

    /// Map CSV (for the counting grid and chromosome ends)
    #[arg(long)]
    pub map: PathBuf,

    /// Trait annotation CSV for the local-eQTL exclusion
    #[arg(long = "trait-meta")]
    pub trait_meta: Option<PathBuf>,

    #[arg(long, default_value = "0.5", value_parser = parse_positive)]
    pub step: f64,

    /// Minimum peak LOD for a trait to count
    #[arg(long = "lod-min", default_value = "10", value_parser = parse_non_negative)]
    pub lod_min: f64,

    /// Sliding window length in cM
    #[arg(long, default_value = "10", value_parser = parse_positive)]
    pub window: f64,

    /// Counts must exceed this for a hotspot
    #[arg(long = "count-min", default_value = "50")]
    pub count_min: u32,

    /// Widening added to each side of the interval, in cM
    #[arg(long, default_value = "5", value_parser = parse_non_negative)]
    pub pad: f64,

    /// Same-chromosome peaks closer than this to the trait are local, in cM
    #[arg(long = "local-exclusion", default_value = "10", value_parser = parse_non_negative)]
    pub local_exclusion: f64,
}

#[derive(Args, Serialize)]
pub struct DissectArgs {
    #[command(flatten)]
    pub input: InputArgs,

    /// Hotspot interval, chr:lo-hi in cM
    #[arg(long)]
    pub interval: String,

    /// Number of top-LOD traits to dissect
    #[arg(long, default_value = "50")]
    pub top: usize,

    /// Minimum peak LOD for a trait to qualify
    #[arg(long = "lod-min", default_value = "10", value_parser = parse_non_negative)]
    pub lod_min: f64,

    #[arg(long = "local-exclusion", default_value = "10", value_parser = parse_non_negative)]
    pub local_exclusion: f64,

    /// Keep traits annotated to the hotspot chromosome (default drops them)
    #[arg(long = "keep-same-chr")]
    pub keep_same_chr: bool,

    /// Search mode: coordinate or exhaustive
    #[arg(long, default_value = "coordinate")]
    pub mode: String,

    /// Coordinate-ascent start points
    #[arg(long, default_value = "5")]
    pub starts: usize,

    /// Compute a p-value: bootstrap or permutation
    #[arg(long)]
    pub significance: Option<String>,

    /// Null replicates for the p-value
    #[arg(long = "n-reps", default_value = "1000")]
    pub n_reps: usize,

    /// Use the (r+1)/(N+1) p-value convention
    #[arg(long = "plus-one")]
    pub plus_one: bool,

    /// Permute covariate rows together with phenotype rows
    #[arg(long = "permute-covariates")]
    pub permute_covariates: bool,
}

#[derive(Args, Serialize)]
pub struct LdaArgs {
    #[command(flatten)]
    pub input: InputArgs,

    /// Hotspot interval, chr:lo-hi in cM
    #[arg(long)]
    pub interval: String,

    /// Number of top-LOD traits to use
    #[arg(long, default_value = "100")]
    pub top: usize,

    #[arg(long = "lod-min", default_value = "10", value_parser = parse_non_negative)]
    pub lod_min: f64,

    #[arg(long = "local-exclusion", default_value = "10", value_parser = parse_non_negative)]
    pub local_exclusion: f64,

    #[arg(long = "keep-same-chr")]
    pub keep_same_chr: bool,

    /// Ridge added to the within-class covariance diagonal
    #[arg(long, default_value = "0", value_parser = parse_non_negative)]
    pub ridge: f64,

    /// Label individuals by their imputed genotypes at this position (cM)
    #[arg(long)]
    pub lambda1: Option<f64>,

    /// Second position for the two-locus labels (cM)
    #[arg(long)]
    pub lambda2: Option<f64>,
}

#[derive(Args, Serialize)]
pub struct PowerArgs {
    /// Additive effect per QTL; comma-separated list sweeps a grid
    #[arg(long, default_value = "0.5")]
    pub a: String,

    /// Distance between the QTL in cM; comma-separated list sweeps a grid
    #[arg(long, default_value = "10")]
    pub distance: String,

    /// Traits per QTL as left,right
    #[arg(long, default_value = "5,5")]
    pub split: String,

    #[arg(long = "n-ind", default_value = "500")]
    pub n_ind: usize,

    #[arg(long = "n-markers", default_value = "100")]
    pub n_markers: usize,

    #[arg(long = "chr-length", default_value = "100", value_parser = parse_positive)]
    pub chr_length: f64,

    /// Simulation replicates per cell
    #[arg(long = "n-reps", default_value = "100")]
    pub n_reps: usize,

    /// Bootstrap replicates per simulation replicate
    #[arg(long = "null-reps", default_value = "1000")]
    pub null_reps: usize,

    /// Search mode: coordinate or exhaustive
    #[arg(long, default_value = "coordinate")]
    pub mode: String,

    #[arg(long, default_value = "5")]
    pub starts: usize,
}

pub fn parse_search_mode(mode: &str, starts: usize) -> Result<SearchMode, Error> {
    match mode {
        "exhaustive" => Ok(SearchMode::Exhaustive),
        "coordinate" => {
            if starts == 0 {
                return Err(Error::Invalid("--starts must be at least 1".into()));
            }
            Ok(SearchMode::Coordinate { starts })
        }
        other => Err(Error::Invalid(format!("unknown search mode `{other}`"))),
    }
}

/// Errors split by phase, for the exit code contract: 2 for input problems,
/// 1 for computation failures.
pub enum CliError {
    Input(Error),
    Compute(Error),
}

pub type CliResult<T> = Result<T, CliError>;

pub(crate) trait PhaseExt<T> {
    fn input_err(self) -> CliResult<T>;
    fn compute_err(self) -> CliResult<T>;
}

impl<T> PhaseExt<T> for Result<T, Error> {
    fn input_err(self) -> CliResult<T> {
        self.map_err(CliError::Input)
    }
    fn compute_err(self) -> CliResult<T> {
        self.map_err(CliError::Compute)
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
            .ok();
    }
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Input(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(CliError::Compute(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
