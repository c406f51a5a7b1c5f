//! Plain-text dataset and label files.
//!
//! Datasets are one point per line, comma-separated, no header, written with
//! 17 significant digits so that a write/read cycle is lossless. Label files
//! hold one 1-based integer per line. Writes go to a sibling temporary file
//! that is then renamed over the target.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use crate::data::DataSet;
use crate::error::{Error, Result};

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

/// Writes `contents` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let name = path
        .file_name()
        .ok_or_else(|| Error::Io(format!("{}: not a file path", path.display())))?;
    let tmp = dir.join(format!(
        ".{}.tmp{}",
        name.to_string_lossy(),
        std::process::id()
    ));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if let Err(e) = result {
        let _ = fs::remove_file(&tmp);
        return Err(Error::Io(format!("{}: {e}", path.display())));
    }
    Ok(())
}

pub fn format_rows<'a>(rows: impl Iterator<Item = &'a [f64]>) -> String {
    let mut out = String::new();
    for row in rows {
        for (j, v) in row.iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            write!(out, "{v:.16e}").unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn parse_dataset(text: &str) -> Result<DataSet> {
    let mut values = Vec::new();
    let mut d = None;
    let mut m = 0;
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let before = values.len();
        for field in line.split(',') {
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|_| parse_err(n + 1, format!("not a number: {field:?}")))?;
            if !v.is_finite() {
                return Err(parse_err(n + 1, "non-finite coordinate"));
            }
            values.push(v);
        }
        let width = values.len() - before;
        match d {
            None => d = Some(width),
            Some(d) if d != width => {
                return Err(parse_err(
                    n + 1,
                    format!("expected {d} columns, found {width}"),
                ));
            }
            _ => {}
        }
        m += 1;
    }
    let d = d.ok_or_else(|| parse_err(0, "dataset is empty"))?;
    DataSet::from_flat(m, d, values)
}

pub fn read_dataset(path: &Path) -> Result<DataSet> {
    let text =
        fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_dataset(&text)
}

pub fn write_dataset(path: &Path, data: &DataSet) -> Result<()> {
    write_atomic(path, format_rows(data.points()).as_bytes())
}

/// Parses 1-based labels and returns them 0-based.
pub fn parse_labels(text: &str) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let v: usize = line
            .parse()
            .map_err(|_| parse_err(n + 1, format!("not a label: {line:?}")))?;
        if v == 0 {
            return Err(parse_err(n + 1, "labels are 1-based"));
        }
        out.push(v - 1);
    }
    Ok(out)
}

pub fn read_labels(path: &Path) -> Result<Vec<usize>> {
    let text =
        fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_labels(&text)
}

/// Writes 0-based labels as 1-based integers.
pub fn write_labels(path: &Path, labels: &[usize]) -> Result<()> {
    let mut out = String::with_capacity(labels.len() * 3);
    for l in labels {
        writeln!(out, "{}", l + 1).unwrap();
    }
    write_atomic(path, out.as_bytes())
}
