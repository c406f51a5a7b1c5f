use std::path::PathBuf;

use clap::Args;
use serde::{Deserialize, Serialize};
use serde_json::json;

use modeshift::evaluation::score_labels;
use modeshift::io::read_labels;

use super::{default_out, ensure_dir, resolve, write_text, CliResult, Clock, Manifest};

#[derive(Debug, Args, Serialize)]
pub struct EvalArgs {
    /// Labels to score (one 1-based integer per line).
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Ground-truth labels in the same format.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// Output directory [default: .].
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON parameters or a previous manifest; flags override its values.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Serialize, Deserialize)]
struct EvalParams {
    labels: PathBuf,
    truth: PathBuf,
    #[serde(default = "default_out")]
    out: PathBuf,
}

/// Confusion counts, one row per found cluster and one column per true class.
fn confusion_csv(confusion: &[Vec<u64>]) -> String {
    let mut out = String::new();
    for row in confusion {
        let cells: Vec<String> = row.iter().map(u64::to_string).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn run(args: EvalArgs) -> CliResult {
    let mut clock = Clock::start();
    let p: EvalParams = resolve(&args, args.config.as_deref())?;
    let found = read_labels(&p.labels)?;
    let truth = read_labels(&p.truth)?;
    let result = score_labels(&found, &truth)?;
    clock.lap("score");

    ensure_dir(&p.out)?;
    let confusion_path = p.out.join("confusion.csv");
    write_text(&confusion_path, &confusion_csv(&result.confusion))?;
    let mut manifest = Manifest::new("eval", &p);
    manifest.output(&confusion_path);
    let wrong = (result.error_ratio * found.len() as f64).round() as u64;
    manifest.results = json!({
        "error_ratio": result.error_ratio,
        "mislabeled": wrong,
        "points": found.len(),
        "permutation": result.permutation,
    });
    manifest.write(&p.out.join("eval-manifest.json"), clock)?;
    println!("{}", result.error_ratio);
    Ok(())
}
