//! CSV and JSON serialization of sweep results.

use crate::analysis::{PointStatus, ScanRecord};
use crate::error::{Error, Result};
use std::io::{Read, Write};

pub const CSV_COLUMNS: [&str; 10] = [
    "R", "omega", "alpha", "E0", "S_vN", "L", "prob_sum", "n_m", "l_m", "seconds",
];

/// Formats `x` with `digits` significant digits, `%g` style.
pub fn format_significant(x: f64, digits: usize) -> String {
    if !x.is_finite() {
        return if x.is_nan() {
            "NaN".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    if x == 0.0 {
        return "0".into();
    }
    let digits = digits.max(1);
    // the exponent after rounding to `digits` places
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent in scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -5 || exp >= digits as i32 {
        format!("{}e{}", trim_zeros(mantissa), exp)
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn row(rec: &ScanRecord, timing: bool) -> [String; 10] {
    let f = |x: f64| format_significant(x, 9);
    [
        f(rec.radius),
        rec.omega.to_string(),
        f(rec.alpha),
        f(rec.energy),
        f(rec.von_neumann),
        f(rec.linear),
        f(rec.probability_sum),
        rec.n_m.to_string(),
        rec.l_m.to_string(),
        f(if timing { rec.seconds } else { 0.0 }),
    ]
}

/// Writes records as CSV; with `timing = false` the seconds column is zeroed
/// so that repeated runs give byte-identical files.
pub fn write_csv<W: Write>(out: W, records: &[ScanRecord], timing: bool) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_COLUMNS).map_err(csv_err)?;
    for rec in records {
        w.write_record(row(rec, timing)).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    Error::Parse(e.to_string())
}

/// Reads a CSV produced by [`write_csv`]. Rows with missing values come back
/// with a `Failed` status.
pub fn read_csv<R: Read>(input: R) -> Result<Vec<ScanRecord>> {
    let mut rd = csv::Reader::from_reader(input);
    let headers = rd.headers().map_err(csv_err)?.clone();
    let cols: Vec<&str> = headers.iter().map(str::trim).collect();
    if cols != CSV_COLUMNS {
        return Err(Error::Parse(format!(
            "unexpected CSV header {cols:?}, expected {CSV_COLUMNS:?}"
        )));
    }
    let mut records = Vec::new();
    for (i, row) in rd.records().enumerate() {
        let row = row.map_err(csv_err)?;
        let line = i + 2;
        let float = |k: usize| -> Result<f64> {
            row[k].trim().parse().map_err(|_| {
                Error::Parse(format!(
                    "line {line}: bad {} value {:?}",
                    CSV_COLUMNS[k], &row[k]
                ))
            })
        };
        let int = |k: usize| -> Result<usize> {
            row[k].trim().parse().map_err(|_| {
                Error::Parse(format!(
                    "line {line}: bad {} value {:?}",
                    CSV_COLUMNS[k], &row[k]
                ))
            })
        };
        let mut rec = ScanRecord {
            radius: float(0)?,
            omega: int(1)?,
            alpha: float(2)?,
            energy: float(3)?,
            von_neumann: float(4)?,
            linear: float(5)?,
            probability_sum: float(6)?,
            n_m: int(7)?,
            l_m: int(8)?,
            seconds: float(9)?,
            status: PointStatus::Converged,
        };
        if !(rec.energy.is_finite() && rec.von_neumann.is_finite() && rec.linear.is_finite()) {
            rec.status = PointStatus::Failed(format!("line {line}: missing values"));
        }
        records.push(rec);
    }
    Ok(records)
}

pub fn write_json<W: Write>(mut out: W, records: &[ScanRecord], timing: bool) -> Result<()> {
    let records: Vec<ScanRecord> = records
        .iter()
        .map(|r| ScanRecord {
            seconds: if timing { r.seconds } else { 0.0 },
            ..r.clone()
        })
        .collect();
    serde_json::to_writer_pretty(&mut out, &records)?;
    writeln!(out)?;
    Ok(())
}
