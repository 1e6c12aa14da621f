use std::fmt;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use fourier_pricing::models::{ModelFile, ModelKind};
use fourier_pricing::pricers::{EngineConfig, Method};

#[derive(Debug, Parser)]
#[command(name = "fourier-pricing", version, about = "Fourier pricing of European calls")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Price calls with one or more engines and write a CSV.
    Price(PriceArgs),
    /// Error curves over N = 2^d against reference prices.
    Converge(ConvergeArgs),
    /// Minimum-N search and batch timings.
    Bench(BenchArgs),
    /// Measure check, blow-up matrix and dampening sweep.
    Diagnose(DiagnoseArgs),
}

/// Bad flag combinations that clap cannot see.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

#[derive(Debug, Clone, Args)]
pub struct Selection {
    /// Model file (JSON).
    #[arg(long)]
    pub model: PathBuf,
    /// Engines, comma separated, or `all`.
    #[arg(long, value_delimiter = ',', default_value = "all")]
    pub method: Vec<String>,
    /// Strikes; 0.6, 1 and 1.4 times spot when absent.
    #[arg(long, value_delimiter = ',')]
    pub strikes: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = [0.1, 1.0])]
    pub tenors: Vec<f64>,
}

impl Selection {
    pub fn methods(&self) -> anyhow::Result<Vec<Method>> {
        let mut out = Vec::new();
        for tag in &self.method {
            if tag.eq_ignore_ascii_case("all") {
                out.extend(Method::ALL);
            } else {
                out.push(tag.parse::<Method>()?);
            }
        }
        out.dedup();
        Ok(out)
    }

    pub fn load(&self) -> anyhow::Result<ModelFile> {
        Ok(ModelFile::load(&self.model)?)
    }

    pub fn strikes(&self, s0: f64) -> Vec<f64> {
        if self.strikes.is_empty() {
            vec![0.6 * s0, s0, 1.4 * s0]
        } else {
            self.strikes.clone()
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct GridArgs {
    /// Upper integration limit W of the frequency grid.
    #[arg(long)]
    pub domain: Option<f64>,
    /// Grid intervals, FFT length or number of cosine terms.
    #[arg(long)]
    pub n: Option<usize>,
    /// COS truncation scale.
    #[arg(long = "L", value_name = "L")]
    pub l_scale: Option<f64>,
    /// Carr-Madan dampening.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// FFT log-strike half-width; derived from the domain when absent.
    #[arg(long)]
    pub kmax: Option<f64>,
}

impl GridArgs {
    /// The engine settings for `method`, falling back to per-model defaults.
    pub fn engine(&self, method: Method, kind: ModelKind) -> EngineConfig {
        let (w, l) = match kind {
            ModelKind::Bsm => (100.0, 13.0),
            ModelKind::Bates => (500.0, 30.0),
            ModelKind::Avg => (500.0, 12.0),
        };
        let domain = if method.is_cos() {
            self.l_scale.unwrap_or(l)
        } else {
            self.domain.unwrap_or(w)
        };
        let mut cfg = EngineConfig::new(method, domain, self.n.unwrap_or(4096));
        cfg.alpha = self.alpha;
        cfg.k_max = self.kmax;
        cfg
    }
}

#[derive(Debug, Args)]
pub struct PriceArgs {
    #[command(flatten)]
    pub sel: Selection,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Output CSV; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ConvergeArgs {
    #[command(flatten)]
    pub sel: Selection,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Tolerance for the reported minimum N.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Smallest exponent d of N = 2^d.
    #[arg(long, default_value_t = 4)]
    pub dmin: u32,
    /// Largest exponent d of N = 2^d.
    #[arg(long, default_value_t = 14)]
    pub dmax: u32,
    /// Also search the exact integer minimum N at `--tol`.
    #[arg(long)]
    pub min_n: bool,
    /// Also search the smallest domain (or L) reaching `--tol` at `--nsat`.
    #[arg(long)]
    pub min_domain: bool,
    #[arg(long, default_value_t = 1 << 20)]
    pub nsat: usize,
    /// Curve CSV, one row per (method, K, T, N).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Plot-data CSV with log2n and log10err columns.
    #[arg(long)]
    pub plot: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub sel: Selection,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Accuracy at which N is chosen.
    #[arg(long, default_value_t = 1e-4)]
    pub tol: f64,
    /// Search each engine's domain at `--domain-tol` first.
    #[arg(long)]
    pub search_domain: bool,
    #[arg(long, default_value_t = 1e-10)]
    pub domain_tol: f64,
    #[arg(long, default_value_t = 1 << 20)]
    pub nsat: usize,
    /// Batch sizes to time.
    #[arg(long, value_delimiter = ',', default_values_t = fourier_pricing::bench::BATCH_SIZES)]
    pub sizes: Vec<usize>,
    #[arg(long, default_value_t = 100)]
    pub runs: usize,
    #[arg(long, default_value_t = 5)]
    pub warmup: usize,
    /// Seed of the strike batches.
    #[arg(long, default_value_t = 0x5eed)]
    pub seed: u64,
    /// Threads for the searches; timing always runs on one thread.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// Timing CSV, one row per (method, batch size).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DiagnoseArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, value_delimiter = ',', default_values_t = [60.0, 90.0, 140.0])]
    pub strikes: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = [0.1, 1.0])]
    pub tenors: Vec<f64>,
    #[arg(long, default_value_t = 1 << 24)]
    pub n: usize,
    #[arg(long, default_value_t = 1.2e6)]
    pub domain: f64,
    #[arg(long = "L", value_name = "L", default_value_t = 12.0)]
    pub l_scale: f64,
    /// Dampening of the Carr-Madan rows of the blow-up matrix.
    #[arg(long, default_value_t = 1.75)]
    pub alpha: f64,
    /// Dampening values for the sweep.
    #[arg(long, value_delimiter = ',', default_values_t = [0.01, 0.35, 0.45, 0.55, 0.99, 1.75])]
    pub alphas: Vec<f64>,
    /// Tolerance separating converged from biased in the sweep.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Blow-up matrix CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Dampening sweep CSV.
    #[arg(long)]
    pub sweep_out: Option<PathBuf>,
}
