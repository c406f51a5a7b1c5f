use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use serde_json::Value;

use super::cluster::TRACE_HEADER;
use super::{CliError, CliResult};

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// trace.csv written by `cluster --trace`.
    #[arg(long)]
    pub trace: PathBuf,
    /// Bandwidth of the traced runs [default: read from cluster-manifest.json
    /// next to the trace].
    #[arg(long)]
    pub w: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Row {
    seed: usize,
    t: usize,
    f: f64,
    inliers: usize,
    escape: bool,
    step_sq: f64,
}

fn parse_rows(text: &str) -> CliResult<Vec<Row>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == TRACE_HEADER => {}
        _ => {
            return Err(CliError::usage(format!(
                "trace must start with {TRACE_HEADER:?}"
            )))
        }
    }
    lines
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, line)| {
            let bad = |what: &str| CliError::usage(format!("line {}: bad {what}", i + 1));
            let cells: Vec<&str> = line.split(',').map(str::trim).collect();
            if cells.len() != 6 {
                return Err(bad("column count"));
            }
            Ok(Row {
                seed: cells[0].parse().map_err(|_| bad("seed_index"))?,
                t: cells[1].parse().map_err(|_| bad("t"))?,
                f: cells[2].parse().map_err(|_| bad("f_value"))?,
                inliers: cells[3].parse().map_err(|_| bad("inlier_count"))?,
                escape: match cells[4] {
                    "0" => false,
                    "1" => true,
                    _ => return Err(bad("boundary_escape")),
                },
                step_sq: cells[5].parse().map_err(|_| bad("step_sq_norm"))?,
            })
        })
        .collect()
}

fn manifest_bandwidth(trace: &Path) -> CliResult<f64> {
    let path = trace
        .parent()
        .unwrap_or(Path::new("."))
        .join("cluster-manifest.json");
    let missing = || {
        CliError::usage(format!(
            "no --w given and no bandwidth found in {}",
            path.display()
        ))
    };
    let text = fs::read_to_string(&path).map_err(|_| missing())?;
    let v: Value = serde_json::from_str(&text).map_err(|_| missing())?;
    v["results"]["bandwidth"].as_f64().ok_or_else(missing)
}

/// Checks every consecutive pair of rows of one run: `f` strictly
/// decreases; a mean step lowers `f` by at least `|I| ||Δz||²`; a boundary
/// escape satisfies `(|I|+1) ||Δz||² = w²/(|I|+1)` and lowers `f` by at
/// least `w²/(|I|+1)`, where `|I|` is the inlier count before the step.
/// Tolerances are 1e-9 relative to the larger of 1 and `f` before the step
/// (`f` sums M terms, so its rounding grows with its size).
fn check_pair(a: &Row, b: &Row, w2: f64) -> Option<String> {
    let drop = a.f - b.f;
    let slack = 1e-9 * a.f.abs().max(1.0);
    let n = a.inliers as f64;
    if drop.is_nan() || drop <= 0.0 {
        return Some(format!("f did not decrease ({} -> {})", a.f, b.f));
    }
    if b.escape {
        let bound = w2 / (n + 1.0);
        let surrogate = (n + 1.0) * b.step_sq;
        if (surrogate - bound).abs() > 1e-9 * bound {
            return Some(format!(
                "escape step (|I|+1)|dz|^2 = {surrogate}, expected w^2/(|I|+1) = {bound}"
            ));
        }
        if drop < bound - slack {
            return Some(format!("escape lowered f by {drop}, less than {bound}"));
        }
    } else if drop < n * b.step_sq - slack {
        return Some(format!(
            "mean step lowered f by {drop}, less than |I||dz|^2 = {}",
            n * b.step_sq
        ));
    }
    None
}

pub fn run(args: VerifyArgs) -> CliResult {
    let w = match args.w {
        Some(w) => w,
        None => manifest_bandwidth(&args.trace)?,
    };
    if !(w > 0.0 && w.is_finite()) {
        return Err(CliError::usage(format!(
            "bandwidth must be positive, got {w}"
        )));
    }
    let text = fs::read_to_string(&args.trace)
        .map_err(|e| CliError::usage(format!("{}: {e}", args.trace.display())))?;
    let rows = parse_rows(&text)?;

    let w2 = w * w;
    let mut runs = 0;
    let mut steps = 0;
    let mut escapes = 0;
    let mut failures = Vec::new();
    for (i, r) in rows.iter().enumerate() {
        if r.t == 0 {
            runs += 1;
            continue;
        }
        let prev = match i.checked_sub(1).map(|j| &rows[j]) {
            Some(p) if p.seed == r.seed && p.t + 1 == r.t => p,
            _ => {
                failures.push(format!("seed {} t {}: rows out of sequence", r.seed, r.t));
                continue;
            }
        };
        steps += 1;
        escapes += usize::from(r.escape);
        if let Some(msg) = check_pair(prev, r, w2) {
            failures.push(format!("seed {} t {}: {msg}", r.seed, r.t));
        }
    }

    println!("{runs} runs, {steps} steps ({escapes} boundary escapes), w = {w}");
    if failures.is_empty() {
        println!("all decrease checks passed");
        return Ok(());
    }
    for f in failures.iter().take(20) {
        eprintln!("{f}");
    }
    Err(CliError::internal(format!(
        "{} step(s) failed the decrease checks",
        failures.len()
    )))
}
