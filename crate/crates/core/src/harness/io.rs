//! CSV formats: sample paths (`t,x`), test trajectories
//! (`t,score_a,score_b`) and per-replication tables.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use crate::error::{CsvError, Error, Result};
use crate::sampler::SamplePath;
use crate::testprocess::TestTrajectory;

/// Relative tolerance on grid spacing.
pub const GRID_RTOL: f64 = 1e-9;

fn csv_err(e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io.to_string()),
        other => CsvError::Malformed {
            line,
            reason: format!("{other:?}"),
        }
        .into(),
    }
}

/// Writes `t,x` rows. Floats use the shortest representation that parses
/// back to the same value.
pub fn write_path<W: Write>(writer: W, path: &SamplePath) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["t", "x"]).map_err(csv_err)?;
    for (i, x) in path.values().iter().enumerate() {
        w.write_record([path.time(i).to_string(), x.to_string()])
            .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_path_csv(file: &Path, path: &SamplePath) -> Result<()> {
    write_path(BufWriter::new(File::create(file)?), path)
}

fn parse_field(field: Option<&str>, name: &str, line: usize) -> Result<f64> {
    let raw = field.ok_or_else(|| CsvError::Malformed {
        line,
        reason: format!("missing `{name}` column"),
    })?;
    let v: f64 = raw.trim().parse().map_err(|_| CsvError::Malformed {
        line,
        reason: format!("`{name}` value `{raw}` is not a number"),
    })?;
    if !v.is_finite() {
        return Err(CsvError::Malformed {
            line,
            reason: format!("`{name}` value `{raw}` is not finite"),
        }
        .into());
    }
    Ok(v)
}

/// Reads a `t,x` path, checking the header, a uniform grid and `x >= 0`.
pub fn read_path<R: Read>(reader: R) -> Result<SamplePath> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    let header = rdr.headers().map_err(csv_err)?.clone();
    if header.len() != 2 || &header[0] != "t" || &header[1] != "x" {
        return Err(CsvError::Header(header.iter().collect::<Vec<_>>().join(",")).into());
    }

    let mut times = Vec::new();
    let mut values = Vec::new();
    let mut step = f64::NAN;
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err)?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
        if rec.len() != 2 {
            return Err(CsvError::Malformed {
                line,
                reason: format!("expected 2 fields, found {}", rec.len()),
            }
            .into());
        }
        let t = parse_field(rec.get(0), "t", line)?;
        let x = parse_field(rec.get(1), "x", line)?;
        if x < 0.0 {
            return Err(CsvError::NegativeValue { line, value: x }.into());
        }
        if let Some(&prev) = times.last() {
            let s: f64 = t - prev;
            if times.len() == 1 {
                if s <= 0.0 {
                    return Err(CsvError::NonUniformGrid {
                        line,
                        step: s,
                        expected: f64::NAN,
                    }
                    .into());
                }
                step = s;
            } else if (s - step).abs() > GRID_RTOL * step {
                return Err(CsvError::NonUniformGrid {
                    line,
                    step: s,
                    expected: step,
                }
                .into());
            }
        }
        times.push(t);
        values.push(x);
    }
    if values.len() < 2 {
        return Err(CsvError::TooShort(values.len()).into());
    }
    // mean step is less sensitive to decimal rounding of individual rows
    let dt = (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64;
    SamplePath::new(times[0], dt, values)
}

pub fn read_path_csv(file: &Path) -> Result<SamplePath> {
    read_path(File::open(file)?)
}

/// Writes `t,score_a,score_b`.
pub fn write_trajectory<W: Write>(writer: W, traj: &TestTrajectory) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["t", "score_a", "score_b"]).map_err(csv_err)?;
    for (t, v) in traj.t_grid.iter().zip(&traj.values) {
        w.write_record([t.to_string(), v[0].to_string(), v[1].to_string()])
            .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes a header plus numeric rows.
pub fn write_table<W: Write>(writer: W, columns: &[String], rows: &[Vec<f64>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(columns).map_err(csv_err)?;
    for row in rows {
        w.write_record(row.iter().map(|v| v.to_string()))
            .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::CirParams;
    use crate::rng::RandomSource;
    use crate::sampler::{simulate_path, Start};

    fn read_str(s: &str) -> Result<SamplePath> {
        read_path(s.as_bytes())
    }

    #[test]
    fn round_trip_is_exact() {
        let p = CirParams::new(1.0, 1.0, 0.5).unwrap();
        let path = simulate_path(&p, Start::Stationary, 10.0, 0.01, &mut RandomSource::new(1)).unwrap();
        assert_eq!(path.len(), 1001);
        let mut buf = Vec::new();
        write_path(&mut buf, &path).unwrap();
        let back = read_path(buf.as_slice()).unwrap();
        assert_eq!(back.values(), path.values());
        assert_eq!(back.len(), path.len());
        assert!((back.dt() - path.dt()).abs() < 1e-15);
        for i in [0, 500, 1000] {
            assert!((back.time(i) - path.time(i)).abs() < 1e-12);
        }
    }

    #[test]
    fn round_trip_through_file() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("p.csv");
        let path = SamplePath::new(2.0, 0.25, vec![1.0, 0.5, 0.125]).unwrap();
        write_path_csv(&file, &path).unwrap();
        assert_eq!(read_path_csv(&file).unwrap(), path);
    }

    #[test]
    fn negative_value_names_line() {
        let err = read_str("t,x\n0,1\n0.1,-0.1\n0.2,1\n").unwrap_err();
        assert_eq!(err, Error::Csv(CsvError::NegativeValue { line: 3, value: -0.1 }));
    }

    #[test]
    fn skipped_timestamp_is_non_uniform() {
        let err = read_str("t,x\n0,1\n0.1,1\n0.3,1\n").unwrap_err();
        assert!(matches!(err, Error::Csv(CsvError::NonUniformGrid { line: 4, .. })), "{err:?}");
    }

    #[test]
    fn malformed_rows_and_headers() {
        assert!(matches!(
            read_str("time,x\n0,1\n1,1\n"),
            Err(Error::Csv(CsvError::Header(_)))
        ));
        assert!(matches!(
            read_str("t,x\n0,1\n1,abc\n"),
            Err(Error::Csv(CsvError::Malformed { line: 3, .. }))
        ));
        assert!(matches!(
            read_str("t,x\n0,1\n1,2,3\n"),
            Err(Error::Csv(CsvError::Malformed { line: 3, .. }))
        ));
        assert!(matches!(read_str("t,x\n0,1\n"), Err(Error::Csv(CsvError::TooShort(1)))));
        assert!(matches!(
            read_str("t,x\n0,1\n0,1\n"),
            Err(Error::Csv(CsvError::NonUniformGrid { .. }))
        ));
    }
}
