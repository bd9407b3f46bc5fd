//! CSV schemas shared by the subcommands.
//!
//! Numbers are written with 17 significant digits so that a write-read
//! cycle reproduces every `f64` exactly; undefined values are `NaN`.

use std::io::Write;
use std::path::Path;

use qjump_core::estimate::AggregatedEstimate;
use qjump_core::optics::Profile;
use qjump_core::{JumpProbabilities, SweepRecord};

use crate::error::{io_err, CliError, CliResult};

pub const THEORY_HEADER: [&str; 9] =
    ["p21", "p31", "p32", "rho11", "rho22", "rho33", "abs_sigma12", "abs_sigma13", "abs_sigma23"];
pub const ESTIMATE_ERR_HEADER: [&str; 6] =
    ["rho11_err", "rho22_err", "rho33_err", "abs_sigma12_err", "abs_sigma13_err", "abs_sigma23_err"];
pub const PROFILE_HEADER: [&str; 2] = ["position", "value"];

pub fn estimate_header() -> Vec<&'static str> {
    THEORY_HEADER.iter().chain(ESTIMATE_ERR_HEADER.iter()).copied().collect()
}

pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        "NaN".to_owned()
    } else {
        format!("{x:.16e}")
    }
}

/// One row of a theory or estimate table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Row {
    pub probs: [f64; 3],
    pub values: [f64; 6],
    /// Present only in estimate tables.
    pub errors: Option<[f64; 6]>,
}

impl Row {
    pub fn theory(rec: &SweepRecord) -> Self {
        let [a, b, c] = rec.populations;
        let [d, e, f] = rec.abs_sigma().map(|x| x.unwrap_or(f64::NAN));
        Self { probs: rec.probs.as_array(), values: [a, b, c, d, e, f], errors: None }
    }

    pub fn estimate(probs: &JumpProbabilities, est: &AggregatedEstimate) -> Self {
        Self { probs: probs.as_array(), values: est.mean, errors: Some(est.std) }
    }

    fn fields(&self) -> Vec<String> {
        let mut out: Vec<String> = self.probs.iter().chain(&self.values).map(|&x| fmt_num(x)).collect();
        if let Some(err) = &self.errors {
            out.extend(err.iter().map(|&x| fmt_num(x)));
        }
        out
    }
}

pub fn write_rows<W: Write>(out: W, rows: &[Row], with_errors: bool) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if with_errors {
        w.write_record(estimate_header())?;
    } else {
        w.write_record(THEORY_HEADER)?;
    }
    for row in rows {
        w.write_record(row.fields())?;
    }
    w.flush()?;
    Ok(())
}

/// Writes through a temporary file in the same directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let dir = path.parent().unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = dir.join(format!(".{name}.tmp"));
    std::fs::write(&tmp, bytes).map_err(io_err(&tmp))?;
    std::fs::rename(&tmp, path).map_err(io_err(path))
}

pub fn write_table(path: &Path, rows: &[Row], with_errors: bool) -> CliResult<()> {
    let mut buf = Vec::new();
    write_rows(&mut buf, rows, with_errors)
        .map_err(|e| CliError::Ingest { path: path.to_owned(), message: e.to_string() })?;
    write_atomic(path, &buf)
}

fn open(path: &Path) -> CliResult<csv::Reader<std::fs::File>> {
    let file = std::fs::File::open(path).map_err(io_err(path))?;
    Ok(csv::ReaderBuilder::new().has_headers(true).from_reader(file))
}

/// Compares a header against the expected columns and names the first offender.
fn check_header(path: &Path, got: &csv::StringRecord, want: &[&str]) -> CliResult<()> {
    let ingest = |message| CliError::Ingest { path: path.to_owned(), message };
    for (k, name) in want.iter().enumerate() {
        match got.get(k) {
            Some(g) if g.trim() == *name => {}
            Some(g) => return Err(ingest(format!("column {}: expected `{name}`, found `{g}`", k + 1))),
            None => return Err(ingest(format!("missing column `{name}`"))),
        }
    }
    if got.len() > want.len() {
        return Err(ingest(format!("unexpected column `{}`", &got[want.len()])));
    }
    Ok(())
}

fn parse_fields(path: &Path, rec: &csv::StringRecord, width: usize) -> CliResult<Vec<f64>> {
    let row = rec.position().map_or(0, |p| p.line());
    let row_err = |message| CliError::Row { path: path.to_owned(), row, message };
    if rec.len() != width {
        return Err(row_err(format!("expected {width} fields, found {}", rec.len())));
    }
    rec.iter().map(|f| f.trim().parse::<f64>().map_err(|_| row_err(format!("`{f}` is not a number")))).collect()
}

fn records(path: &Path) -> CliResult<(csv::StringRecord, Vec<csv::StringRecord>)> {
    let mut rdr = open(path)?;
    let header = rdr.headers().map_err(|e| CliError::Ingest { path: path.to_owned(), message: e.to_string() })?.clone();
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let row = e.position().map_or(0, |p| p.line());
            CliError::Row { path: path.to_owned(), row, message: e.to_string() }
        })?;
        out.push(rec);
    }
    Ok((header, out))
}

/// Reads a theory or estimate table; the header decides which.
pub fn read_table(path: &Path) -> CliResult<Vec<Row>> {
    let (header, recs) = records(path)?;
    let with_errors = header.len() > THEORY_HEADER.len();
    if with_errors {
        check_header(path, &header, &estimate_header())?;
    } else {
        check_header(path, &header, &THEORY_HEADER)?;
    }
    let width = header.len();
    recs.iter()
        .map(|rec| {
            let v = parse_fields(path, rec, width)?;
            let arr6 = |s: &[f64]| [s[0], s[1], s[2], s[3], s[4], s[5]];
            Ok(Row { probs: [v[0], v[1], v[2]], values: arr6(&v[3..9]), errors: with_errors.then(|| arr6(&v[9..15])) })
        })
        .collect()
}

pub fn read_profile(path: &Path) -> CliResult<Profile> {
    let (header, recs) = records(path)?;
    check_header(path, &header, &PROFILE_HEADER)?;
    let mut positions = Vec::with_capacity(recs.len());
    let mut values = Vec::with_capacity(recs.len());
    for rec in &recs {
        let v = parse_fields(path, rec, 2)?;
        if !(v[1].is_finite() && v[1] >= 0.0) {
            let row = rec.position().map_or(0, |p| p.line());
            return Err(CliError::Row {
                path: path.to_owned(),
                row,
                message: format!("value {} must be nonnegative", v[1]),
            });
        }
        positions.push(v[0]);
        values.push(v[1]);
    }
    Ok(Profile::new(positions, values)?)
}

pub fn write_profile(path: &Path, profile: &Profile) -> CliResult<()> {
    let mut buf = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        let res: csv::Result<()> = (|| {
            w.write_record(PROFILE_HEADER)?;
            for (p, v) in profile.positions.iter().zip(&profile.values) {
                w.write_record([fmt_num(*p), fmt_num(*v)])?;
            }
            w.flush()?;
            Ok(())
        })();
        res.map_err(|e| CliError::Ingest { path: path.to_owned(), message: e.to_string() })?;
    }
    write_atomic(path, &buf)
}
