//! CSV reading and writing.
//!
//! All files are comma separated with a header row and LF line endings.
//! Floats are written with 17 significant digits so they read back bit for
//! bit.

use std::io::{Read, Write};

use thiserror::Error;

use crate::cluster::ClusterAssignment;
use crate::continuation::{CoordinateReport, PathRecord, SolutionPath, UpdateMethod};
use crate::objective::SurfacePoint;
use crate::oracle::OracleTable;

#[derive(Debug, Error)]
pub enum IoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("line {line}: {source}")]
    Csv {
        line: u64,
        #[source]
        source: csv::Error,
    },
    #[error("line {line}, column `{column}`: cannot parse `{value}` as {expected}")]
    Parse {
        line: u64,
        column: String,
        value: String,
        expected: &'static str,
    },
    #[error("line {line}: {message}")]
    Malformed { line: u64, message: String },
}

impl From<csv::Error> for IoError {
    fn from(e: csv::Error) -> Self {
        let line = e.position().map_or(0, |p| p.line());
        IoError::Csv { line, source: e }
    }
}

pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w)
}

fn reader<R: Read>(r: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r)
}

/// Numeric columns with their header names.
#[derive(Debug, Clone, PartialEq)]
pub struct DataTable {
    pub headers: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

impl DataTable {
    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.headers
            .iter()
            .position(|h| h == name)
            .map(|i| self.columns[i].as_slice())
    }

    pub fn rows(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }
}

/// Reads a header row followed by numeric records.
pub fn read_table<R: Read>(r: R) -> Result<DataTable, IoError> {
    let mut rdr = reader(r);
    let headers: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if headers.is_empty() || headers.iter().all(String::is_empty) {
        return Err(IoError::Malformed {
            line: 1,
            message: "missing header row".into(),
        });
    }
    let mut columns = vec![Vec::new(); headers.len()];
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        for (i, field) in rec.iter().enumerate() {
            let v = parse_f64(field, line, &headers[i])?;
            columns[i].push(v);
        }
    }
    if columns[0].is_empty() {
        return Err(IoError::Malformed {
            line: 2,
            message: "no data rows".into(),
        });
    }
    Ok(DataTable { headers, columns })
}

fn parse_f64(field: &str, line: u64, column: &str) -> Result<f64, IoError> {
    field.parse::<f64>().map_err(|_| IoError::Parse {
        line,
        column: column.to_string(),
        value: field.to_string(),
        expected: "a number",
    })
}

pub fn write_table<W: Write>(table: &DataTable, w: W) -> Result<(), IoError> {
    let mut wtr = writer(w);
    wtr.write_record(&table.headers)?;
    for i in 0..table.rows() {
        wtr.write_record(table.columns.iter().map(|c| format_float(c[i])))?;
    }
    wtr.flush()?;
    Ok(())
}

const PATH_FIXED: [&str; 7] = [
    "k",
    "objective",
    "penalty_count",
    "grad_norm",
    "sweeps",
    "converged",
    "jump",
];

/// One row per schedule step: the fixed diagnostics, `theta_j` for every
/// coordinate, then `iter_j, method_j, conv_j, resid_j` from the last sweep.
pub fn write_path_csv<W: Write>(path: &SolutionPath, w: W) -> Result<(), IoError> {
    write_path_records(&path.records, w)
}

pub fn write_path_records<W: Write>(records: &[PathRecord], w: W) -> Result<(), IoError> {
    let q = records.first().map_or(0, |r| r.theta.len());
    let mut wtr = writer(w);
    let mut header: Vec<String> = PATH_FIXED.iter().map(|s| s.to_string()).collect();
    header.extend((0..q).map(|j| format!("theta_{j}")));
    for j in 0..q {
        for prefix in ["iter", "method", "conv", "resid"] {
            header.push(format!("{prefix}_{j}"));
        }
    }
    wtr.write_record(&header)?;
    for r in records {
        let mut row = vec![
            format_float(r.k),
            format_float(r.objective),
            format_float(r.penalty_count),
            format_float(r.grad_norm),
            r.sweeps.to_string(),
            r.converged.to_string(),
            r.jump.to_string(),
        ];
        row.extend(r.theta.iter().map(|&t| format_float(t)));
        for rep in &r.reports {
            row.push(rep.iterations.to_string());
            row.push(rep.method.as_str().to_string());
            row.push(rep.converged.to_string());
            row.push(format_float(rep.residual));
        }
        wtr.write_record(&row)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_path_csv<R: Read>(r: R) -> Result<Vec<PathRecord>, IoError> {
    let mut rdr = reader(r);
    let headers = rdr.headers()?.clone();
    let width = headers.len();
    if width < PATH_FIXED.len() || (width - PATH_FIXED.len()) % 5 != 0 {
        return Err(IoError::Malformed {
            line: 1,
            message: format!("unexpected path header with {width} columns"),
        });
    }
    for (i, name) in PATH_FIXED.iter().enumerate() {
        if &headers[i] != *name {
            return Err(IoError::Malformed {
                line: 1,
                message: format!("expected column `{name}`, found `{}`", &headers[i]),
            });
        }
    }
    let q = (width - PATH_FIXED.len()) / 5;
    let mut records = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let num = |i: usize| parse_f64(&rec[i], line, &headers[i]);
        let int = |i: usize| {
            rec[i].parse::<usize>().map_err(|_| IoError::Parse {
                line,
                column: headers[i].to_string(),
                value: rec[i].to_string(),
                expected: "a count",
            })
        };
        let flag = |i: usize| {
            rec[i].parse::<bool>().map_err(|_| IoError::Parse {
                line,
                column: headers[i].to_string(),
                value: rec[i].to_string(),
                expected: "true or false",
            })
        };
        let theta = (0..q).map(|j| num(7 + j)).collect::<Result<Vec<_>, _>>()?;
        let mut reports = Vec::with_capacity(q);
        for j in 0..q {
            let base = 7 + q + 4 * j;
            let method = UpdateMethod::parse(&rec[base + 1]).ok_or_else(|| IoError::Parse {
                line,
                column: headers[base + 1].to_string(),
                value: rec[base + 1].to_string(),
                expected: "an update method",
            })?;
            reports.push(CoordinateReport {
                iterations: int(base)?,
                method,
                converged: flag(base + 2)?,
                residual: num(base + 3)?,
            });
        }
        records.push(PathRecord {
            k: num(0)?,
            objective: num(1)?,
            penalty_count: num(2)?,
            grad_norm: num(3)?,
            sweeps: int(4)?,
            converged: flag(5)?,
            jump: flag(6)?,
            theta,
            reports,
        });
    }
    Ok(records)
}

/// `observation, label_<name>..., merged, split`, observations numbered from 1.
pub fn write_cluster_csv<W: Write>(assignment: &ClusterAssignment, names: &[String], w: W) -> Result<(), IoError> {
    let mut wtr = writer(w);
    let mut header = vec!["observation".to_string()];
    header.extend(names.iter().map(|n| format!("label_{n}")));
    header.push("merged".into());
    header.push("split".into());
    wtr.write_record(&header)?;
    for i in 0..assignment.n() {
        let mut row = vec![(i + 1).to_string()];
        row.extend(assignment.per_coordinate_labels[i].iter().map(|l| l.to_string()));
        row.push(assignment.merged_labels[i].to_string());
        row.push(assignment.split_flags[i].to_string());
        wtr.write_record(&row)?;
    }
    wtr.flush()?;
    Ok(())
}

/// `pattern, p, loglik, ic, best, theta_j...`, one row per enumerated pattern.
pub fn write_oracle_csv<W: Write>(table: &OracleTable, w: W) -> Result<(), IoError> {
    let mut wtr = writer(w);
    let q = table.rows.first().map_or(0, |r| r.theta.len());
    let mut header: Vec<String> = ["pattern", "p", "loglik", "ic", "best"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    header.extend((0..q).map(|j| format!("theta_{j}")));
    wtr.write_record(&header)?;
    for (i, r) in table.rows.iter().enumerate() {
        let mut row = vec![
            r.pattern.to_string(),
            r.p.to_string(),
            format_float(r.loglik),
            format_float(r.ic),
            (i == table.best).to_string(),
        ];
        row.extend(r.theta.iter().map(|&t| format_float(t)));
        wtr.write_record(&row)?;
    }
    wtr.flush()?;
    Ok(())
}

/// `k, theta, surrogate_ic, exact_ic`.
pub fn write_surface_csv<W: Write>(points: &[SurfacePoint], w: W) -> Result<(), IoError> {
    let mut wtr = writer(w);
    wtr.write_record(["k", "theta", "surrogate_ic", "exact_ic"])?;
    for p in points {
        wtr.write_record([
            format_float(p.k),
            format_float(p.theta),
            format_float(p.surrogate_ic),
            format_float(p.exact_ic),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}
