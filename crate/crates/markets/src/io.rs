//! CSV path files and JSON sidecars.
//!
//! A path file has the header `t,p0,p1,...` and one row per grid time. Values
//! are written with 17 significant digits so they read back bit-exactly.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use hermite_core::{PathKind, SamplePath};
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};

/// Formats with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_paths<W: Write>(path: &SamplePath, out: W) -> Result<()> {
    let mut out = BufWriter::new(out);
    write!(out, "t")?;
    for p in 0..path.num_paths() {
        write!(out, ",p{p}")?;
    }
    writeln!(out)?;
    for k in 0..=path.steps() {
        write!(out, "{}", fmt_f64(path.time(k)))?;
        for row in path.rows() {
            write!(out, ",{}", fmt_f64(row[k]))?;
        }
        writeln!(out)?;
    }
    out.flush()?;
    Ok(())
}

pub fn save_paths(path: &SamplePath, file: &Path) -> Result<()> {
    write_paths(path, File::create(file)?)
}

fn csv_error(line: u64, message: impl Into<String>) -> Error {
    Error::Csv {
        line,
        message: message.into(),
    }
}

/// Reads a path file. The grid must start at 0 and be uniform; the horizon
/// is the last time. `seed` is attached to the result.
pub fn read_paths<R: Read>(input: R, seed: u64) -> Result<SamplePath> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let headers = reader.headers().map_err(|e| csv_error(1, e.to_string()))?.clone();
    if headers.get(0) != Some("t") || headers.len() < 2 {
        return Err(csv_error(1, "header must be t,p0,p1,..."));
    }
    let paths = headers.len() - 1;
    let mut times = Vec::new();
    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); paths];
    for (i, record) in reader.records().enumerate() {
        let line = i as u64 + 2;
        let record = record.map_err(|e| csv_error(line, e.to_string()))?;
        if record.len() != paths + 1 {
            return Err(csv_error(line, format!("expected {} fields, found {}", paths + 1, record.len())));
        }
        let mut fields = record.iter().map(|f| {
            f.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| csv_error(line, format!("not a finite number: {f:?}")))
        });
        times.push(fields.next().expect("checked length")?);
        for col in columns.iter_mut() {
            col.push(fields.next().expect("checked length")?);
        }
    }
    if times.len() < 2 {
        return Err(csv_error(times.len() as u64 + 1, "need at least two grid times"));
    }
    let steps = times.len() - 1;
    let horizon = times[steps];
    if times[0] != 0.0 || !(horizon > 0.0) {
        return Err(csv_error(2, "grid must start at t = 0 and increase"));
    }
    for (k, &t) in times.iter().enumerate() {
        let expected = k as f64 * horizon / steps as f64;
        if (t - expected).abs() > 1e-9 * horizon {
            return Err(csv_error(k as u64 + 2, format!("non-uniform grid: t = {t}, expected {expected}")));
        }
    }
    Ok(SamplePath::from_rows(horizon, steps, columns.concat(), seed, PathKind::Driver))
}

pub fn load_paths(file: &Path, seed: u64) -> Result<SamplePath> {
    read_paths(File::open(file)?, seed)
}

/// `paths.csv` → `paths.csv.json`.
pub fn sidecar_path(file: &Path) -> PathBuf {
    let mut name = file.as_os_str().to_owned();
    name.push(".json");
    PathBuf::from(name)
}

pub fn write_json<T: Serialize>(value: &T, file: &Path) -> Result<()> {
    let mut out = BufWriter::new(File::create(file)?);
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

pub fn read_json<T: DeserializeOwned>(file: &Path) -> Result<T> {
    Ok(serde_json::from_reader(File::open(file)?)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let values = vec![0.0, 0.1, -1.0 / 3.0, 0.0, 2.5e-17, 1e300];
        let p = SamplePath::from_rows(0.7, 2, values.clone(), 5, PathKind::Driver);
        let mut buf = Vec::new();
        write_paths(&p, &mut buf).unwrap();
        let back = read_paths(buf.as_slice(), 5).unwrap();
        assert_eq!(back.values(), values.as_slice());
        assert_eq!(back.steps(), 2);
        assert_eq!(back.horizon(), 0.7);
    }

    #[test]
    fn bad_cell_reports_line() {
        let text = "t,p0\n0,0\n0.5,abc\n1,1\n";
        match read_paths(text.as_bytes(), 0) {
            Err(Error::Csv { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }
}
