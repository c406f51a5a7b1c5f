use std::path::PathBuf;

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use modeshift::bandwidth::{log_spaced_candidates, median_pairwise_distance};
use modeshift::io::read_dataset;
use modeshift::{select_bandwidth_with, BandwidthSearch, DataSet, IntegralMethod, KernelKind};

use super::{
    csv_text, default_out, ensure_dir, float, resolve, write_text, CliResult, Clock, Manifest,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Monte Carlo estimate of the squared-density integral.
    Mc,
    /// Exact sum over point pairs.
    Pairwise,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kernel {
    Epanechnikov,
    Gaussian,
}

impl From<Kernel> for KernelKind {
    fn from(k: Kernel) -> Self {
        match k {
            Kernel::Epanechnikov => KernelKind::Epanechnikov,
            Kernel::Gaussian => KernelKind::Gaussian,
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct BandwidthArgs {
    /// Dataset CSV.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// How the squared-density integral is evaluated [default: mc].
    #[arg(long, value_enum)]
    pub method: Option<Method>,
    /// [default: epanechnikov]
    #[arg(long, value_enum)]
    pub kernel: Option<Kernel>,
    /// Explicit candidate bandwidths, comma-separated, increasing. Replaces the grid.
    #[arg(long, value_delimiter = ',')]
    pub candidates: Option<Vec<f64>>,
    /// Smallest grid bandwidth as a multiple of the median pairwise distance [default: 0.25].
    #[arg(long)]
    pub grid_low: Option<f64>,
    /// Largest grid bandwidth as a multiple of the median pairwise distance [default: 4].
    #[arg(long)]
    pub grid_high: Option<f64>,
    /// Number of log-spaced grid points [default: 20].
    #[arg(long)]
    pub grid_size: Option<usize>,
    /// Monte Carlo samples per candidate [default: 10 M].
    #[arg(long)]
    pub mc_samples: Option<usize>,
    /// Seed for the grid's pair sample and the Monte Carlo draws [default: 0].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory [default: .].
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON parameters or a previous manifest; flags override its values.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

/// Candidate grid and scoring settings, shared with `cluster --cv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchParams {
    #[serde(default = "default_method")]
    pub method: Method,
    #[serde(default = "default_kernel")]
    pub kernel: Kernel,
    #[serde(default)]
    pub candidates: Option<Vec<f64>>,
    #[serde(default = "default_grid_low")]
    pub grid_low: f64,
    #[serde(default = "default_grid_high")]
    pub grid_high: f64,
    #[serde(default = "default_grid_size")]
    pub grid_size: usize,
    #[serde(default)]
    pub mc_samples: Option<usize>,
}

fn default_method() -> Method {
    Method::Mc
}

fn default_kernel() -> Kernel {
    Kernel::Epanechnikov
}

fn default_grid_low() -> f64 {
    0.25
}

fn default_grid_high() -> f64 {
    4.0
}

fn default_grid_size() -> usize {
    20
}

impl SearchParams {
    pub fn with_method(method: Method) -> Self {
        Self {
            method,
            kernel: default_kernel(),
            candidates: None,
            grid_low: default_grid_low(),
            grid_high: default_grid_high(),
            grid_size: default_grid_size(),
            mc_samples: None,
        }
    }

    pub fn search(&self, data: &DataSet, seed: u64) -> CliResult<BandwidthSearch> {
        let candidates = match &self.candidates {
            Some(c) => c.clone(),
            None => {
                log_spaced_candidates(data, seed, self.grid_low, self.grid_high, self.grid_size)?
            }
        };
        let method = match self.method {
            Method::Mc => IntegralMethod::MonteCarlo {
                samples: self.mc_samples.unwrap_or(10 * data.len()),
                seed,
            },
            Method::Pairwise => IntegralMethod::Pairwise,
        };
        Ok(select_bandwidth_with(
            data,
            self.kernel.into(),
            &candidates,
            method,
        )?)
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct BandwidthParams {
    data: PathBuf,
    #[serde(flatten)]
    search: SearchParams,
    #[serde(default)]
    seed: u64,
    #[serde(default = "default_out")]
    out: PathBuf,
}

pub fn scores_csv(search: &BandwidthSearch) -> String {
    csv_text(
        "w,score",
        search
            .candidates
            .iter()
            .zip(&search.scores)
            .map(|(&w, &s)| vec![float(w), float(s)]),
    )
}

pub fn run(args: BandwidthArgs) -> CliResult {
    let mut clock = Clock::start();
    let p: BandwidthParams = resolve(&args, args.config.as_deref())?;
    let data = read_dataset(&p.data)?;
    clock.lap("load");
    let search = p.search.search(&data, p.seed)?;
    clock.lap("select");

    ensure_dir(&p.out)?;
    let scores_path = p.out.join("scores.csv");
    write_text(&scores_path, &scores_csv(&search))?;

    let mut manifest = Manifest::new("bandwidth", &p);
    manifest.seeds = json!({ "selection": p.seed });
    manifest.output(&scores_path);
    manifest.results = json!({
        "selected_w": search.selected_w,
        "candidates": search.candidates,
        "mc_samples": search.mc_samples(),
        "median_pairwise_distance": match p.search.candidates {
            None => Some(median_pairwise_distance(&data, p.seed)?),
            Some(_) => None,
        },
    });
    manifest.write(&p.out.join("bandwidth-manifest.json"), clock)?;
    println!("{}", float(search.selected_w));
    Ok(())
}
