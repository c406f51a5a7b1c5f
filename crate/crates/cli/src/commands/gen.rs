use std::path::PathBuf;

use clap::Args;
use serde::{Deserialize, Serialize};
use serde_json::json;

use modeshift::io::{write_dataset, write_labels};
use modeshift::synth::linear_sizes;
use modeshift::{generate, GmmSpec};

use super::{default_out, ensure_dir, resolve, CliError, CliResult, Clock, Manifest};

#[derive(Debug, Args, Serialize)]
pub struct GenArgs {
    /// Dimension.
    #[arg(long)]
    pub d: Option<usize>,
    /// Number of components.
    #[arg(long)]
    pub k: Option<usize>,
    /// Standard deviation of the component means around the origin [default: 2].
    #[arg(long)]
    pub centroid_std: Option<f64>,
    /// Standard deviation of each component [default: 1].
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Component sizes: `50k` for 50, 100, ..., a single count for equal
    /// sizes, or a comma-separated list of k counts [default: 50k].
    #[arg(long)]
    pub sizes: Option<String>,
    /// Sampling seed [default: 0].
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

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureParams {
    pub d: usize,
    pub k: usize,
    #[serde(default = "default_centroid_std")]
    pub centroid_std: f64,
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    #[serde(default = "default_sizes")]
    pub sizes: String,
}

fn default_centroid_std() -> f64 {
    2.0
}

fn default_sigma() -> f64 {
    1.0
}

fn default_sizes() -> String {
    "50k".into()
}

impl MixtureParams {
    pub fn spec(&self, seed: u64) -> CliResult<GmmSpec> {
        let spec = GmmSpec {
            dim: self.d,
            centroid_std: self.centroid_std,
            component_sigma: self.sigma,
            sizes: parse_sizes(&self.sizes, self.k)?,
            rng_seed: seed,
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct GenParams {
    #[serde(flatten)]
    mixture: MixtureParams,
    #[serde(default)]
    seed: u64,
    #[serde(default = "default_out")]
    out: PathBuf,
}

pub fn parse_sizes(text: &str, k: usize) -> CliResult<Vec<usize>> {
    let bad = || CliError::usage(format!("cannot parse --sizes {text:?}"));
    let text = text.trim();
    if let Some(step) = text.strip_suffix('k') {
        let step = step.trim().parse().map_err(|_| bad())?;
        return Ok(linear_sizes(k, step));
    }
    let sizes = text
        .split(',')
        .map(|s| s.trim().parse::<usize>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| bad())?;
    match sizes.len() {
        1 => Ok(vec![sizes[0]; k]),
        n if n == k => Ok(sizes),
        n => Err(CliError::usage(format!(
            "--sizes lists {n} counts but --k is {k}"
        ))),
    }
}

pub fn run(args: GenArgs) -> CliResult {
    let mut clock = Clock::start();
    let p: GenParams = resolve(&args, args.config.as_deref())?;
    let spec = p.mixture.spec(p.seed)?;
    let labeled = generate(&spec)?;
    clock.lap("generate");

    ensure_dir(&p.out)?;
    let data_path = p.out.join("dataset.csv");
    let labels_path = p.out.join("labels.csv");
    write_dataset(&data_path, &labeled.data)?;
    let labels: Vec<usize> = labeled.true_labels.iter().map(|l| l - 1).collect();
    write_labels(&labels_path, &labels)?;
    clock.lap("write");

    let mut manifest = Manifest::new("gen", &p);
    manifest.seeds = json!({ "data": p.seed });
    manifest.output(&data_path);
    manifest.output(&labels_path);
    manifest.results = json!({
        "points": labeled.data.len(),
        "dim": labeled.data.dim(),
        "components": spec.components(),
        "sizes": spec.sizes,
    });
    manifest.write(&p.out.join("manifest.json"), clock)?;
    println!(
        "wrote {} points in {} dimensions ({} components) to {}",
        labeled.data.len(),
        labeled.data.dim(),
        spec.components(),
        data_path.display()
    );
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes_forms() {
        assert_eq!(parse_sizes("50k", 3).unwrap(), vec![50, 100, 150]);
        assert_eq!(parse_sizes("7", 2).unwrap(), vec![7, 7]);
        assert_eq!(parse_sizes("1,2,3", 3).unwrap(), vec![1, 2, 3]);
        assert!(parse_sizes("1,2", 3).is_err());
        assert!(parse_sizes("xk", 3).is_err());
    }
}
