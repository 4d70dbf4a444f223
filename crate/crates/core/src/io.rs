//! CSV and JSON persistence. Floats are written in shortest round-trip form,
//! so a file read back reproduces the in-memory values bit for bit.

use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::Serialize;

use crate::analysis::{EmergenceCurve, OriginHistogram};
use crate::error::{Error, Result};
use crate::resolvent::LocalLawReport;
use crate::trajectory::{Diagnostics, Method, TimeGrid, TrajectoryBundle};

pub const TRAJECTORY_HEADER: [&str; 5] = ["t", "j", "re", "im", "method"];
pub const LOCAL_LAW_HEADER: [&str; 4] = ["re", "im", "raw_error", "normalized_error"];
pub const EMERGENCE_HEADER: [&str; 4] = ["t", "frequency", "trials", "n"];
pub const ORIGIN_HEADER: [&str; 2] = ["rank", "count"];

/// Shortest decimal that parses back to `x`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

fn csv_err(e: csv::Error) -> Error {
    Error::Parse(e.to_string())
}

fn writer<W: Write>(w: W, header: &[&str]) -> Result<csv::Writer<W>> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(header).map_err(csv_err)?;
    Ok(out)
}

fn finish<W: Write>(mut out: csv::Writer<W>) -> Result<()> {
    out.flush()?;
    Ok(())
}

/// One row per `(t, j)` with `j` one-based, time-major.
pub fn write_trajectory_csv<W: Write>(w: W, bundle: &TrajectoryBundle) -> Result<()> {
    let mut out = writer(w, &TRAJECTORY_HEADER)?;
    let method = bundle.method.as_str();
    for (&t, row) in bundle.times().iter().zip(&bundle.lambdas) {
        let t = fmt_f64(t);
        for (j, z) in row.iter().enumerate() {
            out.write_record([t.as_str(), &(j + 1).to_string(), &fmt_f64(z.re), &fmt_f64(z.im), method])
                .map_err(csv_err)?;
        }
    }
    finish(out)
}

/// Parses a file written by [`write_trajectory_csv`]. Diagnostics and the
/// pole-anchored roots are not stored in the CSV and come back empty.
pub fn read_trajectory_csv<R: Read>(r: R) -> Result<TrajectoryBundle> {
    let mut reader = csv::Reader::from_reader(r);
    let header = reader.headers().map_err(csv_err)?.clone();
    if header.iter().ne(TRAJECTORY_HEADER) {
        return Err(Error::Parse(format!("unexpected trajectory header {header:?}")));
    }
    let mut times: Vec<f64> = vec![];
    let mut lambdas: Vec<Vec<Complex64>> = vec![];
    let mut method = None;
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(csv_err)?;
        let bad = |what: &str| Error::Parse(format!("row {}: bad {what}", line + 2));
        let num = |k: usize, what: &str| record[k].parse::<f64>().map_err(|_| bad(what));
        let t = num(0, "t")?;
        let j: usize = record[1].parse().map_err(|_| bad("j"))?;
        let z = Complex64::new(num(2, "re")?, num(3, "im")?);
        let m: Method = record[4].parse()?;
        if *method.get_or_insert(m) != m {
            return Err(bad("method (mixed methods in one file)"));
        }
        if times.last() != Some(&t) {
            times.push(t);
            lambdas.push(vec![]);
        }
        let row = lambdas.last_mut().expect("row pushed above");
        if j != row.len() + 1 {
            return Err(bad("j (rows must be ordered by index)"));
        }
        row.push(z);
    }
    let n = lambdas.first().map_or(0, Vec::len);
    if n == 0 || lambdas.iter().any(|r| r.len() != n) {
        return Err(Error::Parse("trajectory file is empty or ragged".into()));
    }
    Ok(TrajectoryBundle {
        grid: TimeGrid::new(times)?,
        lambdas,
        anchored: None,
        method: method.expect("non-empty file"),
        diagnostics: Diagnostics::default(),
    })
}

pub fn write_local_law_csv<W: Write>(w: W, report: &LocalLawReport) -> Result<()> {
    let mut out = writer(w, &LOCAL_LAW_HEADER)?;
    for ((z, raw), norm) in report.grid.iter().zip(&report.raw_error).zip(&report.normalized_error) {
        out.write_record([fmt_f64(z.re), fmt_f64(z.im), fmt_f64(*raw), fmt_f64(*norm)])
            .map_err(csv_err)?;
    }
    finish(out)
}

pub fn write_emergence_csv<W: Write>(w: W, curve: &EmergenceCurve) -> Result<()> {
    let mut out = writer(w, &EMERGENCE_HEADER)?;
    for (t, f) in curve.t.iter().zip(&curve.frequency) {
        out.write_record([fmt_f64(*t), fmt_f64(*f), curve.trials.to_string(), curve.n.to_string()])
            .map_err(csv_err)?;
    }
    finish(out)
}

pub fn write_origin_csv<W: Write>(w: W, hist: &OriginHistogram) -> Result<()> {
    let mut out = writer(w, &ORIGIN_HEADER)?;
    for (k, count) in hist.counts.iter().enumerate() {
        out.write_record([(k + 1).to_string(), count.to_string()]).map_err(csv_err)?;
    }
    finish(out)
}

/// Pretty-printed JSON with a trailing newline.
pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::Parse(e.to_string()))?;
    s.push('\n');
    std::fs::write(path, s)?;
    Ok(())
}

/// Creates `path` and hands a buffered writer to `f`.
pub fn write_file(path: &Path, f: impl FnOnce(&mut std::io::BufWriter<std::fs::File>) -> Result<()>) -> Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    f(&mut w)?;
    w.flush()?;
    Ok(())
}
