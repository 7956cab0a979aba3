use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use crate::CliError;

/// `x` rounded to 12 significant digits, printed without an exponent.
/// NaN prints as an empty field.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        return String::new();
    }
    let rounded: f64 = format!("{x:.11e}").parse().unwrap_or(x);
    if rounded == 0.0 {
        return "0".into();
    }
    format!("{rounded}")
}

/// Parses `a:b:step` into `a, a + step, ...` up to `b` inclusive.
pub fn parse_grid(flag: &str, text: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::Validation(format!("--{flag}: expected start:stop:step, got `{text}`"));
    let parts: Vec<f64> = text.split(':').map(|p| p.trim().parse::<f64>().map_err(|_| bad())).collect::<Result<_, _>>()?;
    let [a, b, step] = parts[..] else { return Err(bad()) };
    if !(a.is_finite() && b.is_finite() && step.is_finite()) || step <= 0.0 || b < a {
        return Err(bad());
    }
    let count = ((b - a) / step + 1e-9).floor() as usize;
    if count > 100_000 {
        return Err(CliError::Validation(format!("--{flag}: {count} grid points is too many")));
    }
    Ok((0..=count).map(|i| a + i as f64 * step).collect())
}

/// Parses `a,b,c` or `a:b:step`.
pub fn parse_list(flag: &str, text: &str) -> Result<Vec<f64>, CliError> {
    if text.contains(':') {
        return parse_grid(flag, text);
    }
    text.split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| CliError::Validation(format!("--{flag}: `{p}` is not a number")))
        })
        .collect()
}

/// CSV sink: a file when `--out` is given, stdout otherwise.
pub fn csv_writer(out: Option<&PathBuf>) -> Result<csv::Writer<Box<dyn Write>>, CliError> {
    let sink: Box<dyn Write> = match out {
        Some(path) => Box::new(create(path)?),
        None => Box::new(io::stdout().lock()),
    };
    Ok(csv::Writer::from_writer(sink))
}

fn create(path: &Path) -> Result<File, CliError> {
    File::create(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub fn write_row<W: Write>(w: &mut csv::Writer<W>, row: &[String]) -> Result<(), CliError> {
    w.write_record(row).map_err(|e| CliError::Io(e.to_string()))
}

pub fn finish<W: Write>(mut w: csv::Writer<W>) -> Result<(), CliError> {
    w.flush().map_err(|e| CliError::Io(e.to_string()))
}
