//! Shared parsing and provenance helpers.

use qnet_core::proxy::Hyperrect;
use serde::Serialize;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

pub type CliResult<T = ()> = Result<T, String>;

pub const BUILD_ID: &str = env!("QNET_BUILD_ID");

pub fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

/// `{"subcommand": ..., "args": {...}, "build": ...}`
pub fn run_config<A: Serialize>(subcommand: &str, args: &A) -> serde_json::Value {
    serde_json::json!({ "subcommand": subcommand, "args": args, "build": BUILD_ID })
}

/// `#`-comment preamble lines for CSV outputs.
pub fn preamble(config: &serde_json::Value) -> Vec<String> {
    vec![format!("build: {BUILD_ID}"), format!("run_config: {config}")]
}

pub fn parse_list<T: std::str::FromStr>(text: &str, what: &str) -> CliResult<Vec<T>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<T>().map_err(|_| format!("cannot parse {what} value {s:?}")))
        .collect()
}

/// Integer list allowing `a..b` ranges (inclusive), e.g. `2..6,8`.
pub fn parse_ranges(text: &str) -> CliResult<Vec<usize>> {
    let mut out = Vec::new();
    for part in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        if let Some((a, b)) = part.split_once("..") {
            let a: usize = a.parse().map_err(|_| format!("bad range {part:?}"))?;
            let b: usize = b.trim_start_matches('=').parse().map_err(|_| format!("bad range {part:?}"))?;
            out.extend(a..=b);
        } else {
            out.push(part.parse().map_err(|_| format!("bad integer {part:?}"))?);
        }
    }
    Ok(out)
}

pub fn parse_box(lower: &str, upper: &str) -> CliResult<Hyperrect> {
    Hyperrect::new(parse_list(lower, "lower")?, parse_list(upper, "upper")?).map_err(err)
}

/// 1-based indices to 0-based.
pub fn parse_dims(text: &str, d: usize) -> CliResult<Vec<usize>> {
    parse_list::<usize>(text, "dimension")?
        .into_iter()
        .map(|j| {
            if j == 0 || j > d {
                Err(format!("dimension {j} is outside 1..={d}"))
            } else {
                Ok(j - 1)
            }
        })
        .collect()
}

/// `v` with 12 significant digits.
pub fn sig12(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let mag = v.abs().log10().floor() as i32;
    if (-4..12).contains(&mag) {
        format!("{:.*}", (11 - mag).max(0) as usize, v)
    } else {
        format!("{v:.11e}")
    }
}

/// Buffered writer to `path`, or stdout for `None` / `-`.
pub fn writer(path: Option<&Path>) -> CliResult<Box<dyn Write>> {
    match path {
        Some(p) if p != Path::new("-") => {
            let f = File::create(p).map_err(|e| format!("{}: {e}", p.display()))?;
            Ok(Box::new(BufWriter::new(f)))
        }
        _ => Ok(Box::new(BufWriter::new(io::stdout()))),
    }
}

/// Reads a samples CSV with columns `x1,...,xd,f` (header optional; `#` lines skipped).
pub fn read_samples(path: &Path) -> CliResult<(usize, Vec<f64>, Vec<f64>)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| format!("{}: {e}", path.display()))?;
    let (mut inputs, mut targets) = (Vec::new(), Vec::new());
    let mut d = 0;
    for (line, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| format!("{}: {e}", path.display()))?;
        let values: Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
        let Ok(values) = values else {
            if line == 0 {
                continue; // header row
            }
            return Err(format!("{}: row {} is not numeric", path.display(), line + 1));
        };
        if values.len() < 2 {
            return Err(format!("{}: rows need at least one coordinate and a value", path.display()));
        }
        if d == 0 {
            d = values.len() - 1;
        } else if values.len() - 1 != d {
            return Err(format!("{}: row {} has {} columns, expected {}", path.display(), line + 1, values.len(), d + 1));
        }
        inputs.extend_from_slice(&values[..d]);
        targets.push(values[d]);
    }
    if targets.is_empty() {
        return Err(format!("{}: no samples", path.display()));
    }
    Ok((d, inputs, targets))
}
