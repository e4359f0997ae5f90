//! CSV exchange of loops and fields, and report emission.
//!
//! Loops are written as `t,x1,...,xn` with lifted chart coordinates (no
//! wrapping), one row per sample. A file whose last `t` equals 1 is read as a
//! path. On load, periodic chart coordinates are unwrapped and the winding is
//! inferred from the closure gap.

use crate::curve::{DiscreteLoop, TangentField};
use crate::error::{GeomError, Result};
use crate::manifold::Manifold;
use crate::suite::ReportRecord;
use nalgebra::DVector;
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_rows<W: Write>(
    out: W,
    prefix: &str,
    params: impl Iterator<Item = f64>,
    rows: &[DVector<f64>],
) -> Result<()> {
    let dim = rows.first().map(|r| r.len()).unwrap_or(0);
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["t".to_string()];
    header.extend((1..=dim).map(|i| format!("{prefix}{i}")));
    w.write_record(&header).map_err(csv_io)?;
    for (t, row) in params.zip(rows) {
        let mut rec = vec![fmt17(t)];
        rec.extend(row.iter().map(|&x| fmt17(x)));
        w.write_record(&rec).map_err(csv_io)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_io(e: csv::Error) -> GeomError {
    GeomError::Io(e.to_string())
}

/// Parsed table: parameters and row vectors, checked for shape and
/// strictly increasing `t`.
fn read_rows<R: Read>(input: R, prefix: &str) -> Result<(Vec<f64>, Vec<DVector<f64>>)> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let header = r
        .headers()
        .map_err(|e| GeomError::Parse {
            line: 1,
            msg: e.to_string(),
        })?
        .clone();
    if header.len() < 2 || &header[0] != "t" {
        return Err(GeomError::Parse {
            line: 1,
            msg: format!("expected header t,{prefix}1,...; got {:?}", header.iter().collect::<Vec<_>>()),
        });
    }
    for (i, name) in header.iter().enumerate().skip(1) {
        if name != format!("{prefix}{i}") {
            return Err(GeomError::Parse {
                line: 1,
                msg: format!("column {} should be {prefix}{i}, found {name:?}", i + 1),
            });
        }
    }
    let dim = header.len() - 1;
    let mut params = Vec::new();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| GeomError::Parse {
            line: e.position().map(|p| p.line() as usize).unwrap_or(0),
            msg: e.to_string(),
        })?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
        if rec.len() != dim + 1 {
            return Err(GeomError::Parse {
                line,
                msg: format!("expected {} columns, found {}", dim + 1, rec.len()),
            });
        }
        let vals = rec
            .iter()
            .map(|s| {
                s.parse::<f64>().map_err(|e| GeomError::Parse {
                    line,
                    msg: format!("{s:?}: {e}"),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        if let Some(&prev) = params.last() {
            if !(vals[0] > prev) {
                return Err(GeomError::Parse {
                    line,
                    msg: format!("t must be strictly increasing ({} after {prev})", vals[0]),
                });
            }
        }
        params.push(vals[0]);
        rows.push(DVector::from_column_slice(&vals[1..]));
    }
    if params.is_empty() {
        return Err(GeomError::Parse {
            line: 2,
            msg: "no data rows".into(),
        });
    }
    Ok((params, rows))
}

pub fn write_loop<W: Write>(gamma: &DiscreteLoop, out: W) -> Result<()> {
    write_rows(out, "x", (0..gamma.n()).map(|j| gamma.param(j)), gamma.samples())
}

pub fn emit_loop(gamma: &DiscreteLoop, path: &Path) -> Result<()> {
    write_loop(gamma, BufWriter::new(File::create(path)?))
}

/// Reads a loop (or a path, when the last `t` is 1) for manifold `m`.
pub fn read_loop<R: Read>(m: &Manifold, input: R) -> Result<DiscreteLoop> {
    let (params, mut rows) = read_rows(input, "x")?;
    if rows[0].len() != m.dim() {
        return Err(GeomError::DimensionMismatch {
            expected: m.dim(),
            actual: rows[0].len(),
        });
    }
    if params[0] < 0.0 || *params.last().unwrap() > 1.0 {
        return Err(GeomError::Parse {
            line: 2,
            msg: "t must lie in [0, 1]".into(),
        });
    }
    let periods = m.chart_periods();
    for (d, period) in periods.iter().enumerate() {
        if let Some(p) = period {
            for j in 1..rows.len() {
                let jump = rows[j][d] - rows[j - 1][d];
                let k = (jump / p).round();
                if k != 0.0 {
                    for row in rows.iter_mut().skip(j) {
                        row[d] -= k * p;
                    }
                }
            }
        }
    }
    if *params.last().unwrap() == 1.0 {
        return DiscreteLoop::path(rows);
    }
    let last = rows.len() - 1;
    let winding = DVector::from_fn(m.dim(), |d, _| match periods[d] {
        Some(p) => p * ((rows[last][d] - rows[0][d]) / p).round(),
        None => 0.0,
    });
    DiscreteLoop::closed(rows, winding)
}

pub fn load_loop(m: &Manifold, path: &Path) -> Result<DiscreteLoop> {
    read_loop(m, File::open(path)?)
}

pub fn write_field<W: Write>(gamma: &DiscreteLoop, field: &TangentField, out: W) -> Result<()> {
    write_rows(out, "v", (0..gamma.n()).map(|j| gamma.param(j)), field.vectors())
}

pub fn read_field<R: Read>(input: R) -> Result<TangentField> {
    Ok(TangentField::new(read_rows(input, "v")?.1))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
}

impl std::str::FromStr for ReportFormat {
    type Err = GeomError;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(Self::Json),
            "csv" => Ok(Self::Csv),
            other => Err(GeomError::Config(format!("unknown report format {other:?}"))),
        }
    }
}

pub fn write_report<W: Write>(records: &[ReportRecord], format: ReportFormat, mut out: W) -> Result<()> {
    match format {
        ReportFormat::Json => {
            serde_json::to_writer_pretty(&mut out, records).map_err(|e| GeomError::Io(e.to_string()))?;
            writeln!(out)?;
        }
        ReportFormat::Csv => {
            let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
            w.write_record(ReportRecord::FIELDS).map_err(csv_io)?;
            for r in records {
                w.serialize(r).map_err(csv_io)?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

pub fn emit_report(records: &[ReportRecord], path: &Path, format: ReportFormat) -> Result<()> {
    write_report(records, format, BufWriter::new(File::create(path)?))
}

pub fn read_report_json<R: Read>(input: R) -> Result<Vec<ReportRecord>> {
    serde_json::from_reader(input).map_err(|e| GeomError::Io(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dvector;
    use std::f64::consts::PI;

    #[test]
    fn loop_round_trip_is_exact() {
        let m = Manifold::euclidean(2);
        let g = DiscreteLoop::closed_from_fn(512, dvector![0.0, 0.0], |t| {
            dvector![(2.0 * PI * t).cos(), (2.0 * PI * t).sin() / 3.0]
        })
        .unwrap();
        let mut buf = Vec::new();
        write_loop(&g, &mut buf).unwrap();
        let back = read_loop(&m, buf.as_slice()).unwrap();
        assert_eq!(back.samples(), g.samples());
        assert!(back.is_periodic());
    }

    #[test]
    fn torus_winding_inferred() {
        let m = Manifold::flat_torus(2);
        let g = DiscreteLoop::closed_from_fn(64, dvector![1.0, 0.0], |t| dvector![t, 0.2]).unwrap();
        let mut buf = Vec::new();
        write_loop(&g, &mut buf).unwrap();
        assert_eq!(read_loop(&m, buf.as_slice()).unwrap().winding(), &dvector![1.0, 0.0]);
    }

    #[test]
    fn parse_errors_carry_lines() {
        let m = Manifold::euclidean(2);
        let missing = "t,x1,x2\n0,1,2\n0.5,1\n";
        assert!(matches!(read_loop(&m, missing.as_bytes()), Err(GeomError::Parse { line: 3, .. })));
        let unordered = "t,x1,x2\n0,1,2\n0.5,1,1\n0.25,0,0\n";
        assert!(matches!(read_loop(&m, unordered.as_bytes()), Err(GeomError::Parse { line: 4, .. })));
        assert!(matches!(read_loop(&m, "s,x1,x2\n".as_bytes()), Err(GeomError::Parse { line: 1, .. })));
    }

    #[test]
    fn empty_reports() {
        let mut json = Vec::new();
        write_report(&[], ReportFormat::Json, &mut json).unwrap();
        assert_eq!(String::from_utf8(json).unwrap().trim(), "[]");
        let mut csv = Vec::new();
        write_report(&[], ReportFormat::Csv, &mut csv).unwrap();
        assert_eq!(
            String::from_utf8(csv).unwrap().trim(),
            "suite,check_id,paper_anchor,value,tolerance,passed,runtime_ms"
        );
    }
}
