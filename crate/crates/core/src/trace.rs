//! Per-iteration solver records and their CSV / JSON files.
//!
//! CSV columns: `iter,l,u,diameter,kkt_residual,z,grad_norm,ratio`.
//! `z` is semicolon-separated, absent values are blank and floats carry 17
//! significant digits, so a write/read cycle is exact.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const CSV_HEADER: [&str; 8] = ["iter", "l", "u", "diameter", "kkt_residual", "z", "grad_norm", "ratio"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub iter: usize,
    pub l: f64,
    pub u: Option<f64>,
    pub diameter: f64,
    pub kkt_residual: Option<f64>,
    pub z: Vec<f64>,
    pub grad_norm: Option<f64>,
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceFormat {
    Csv,
    Json,
}

impl std::str::FromStr for TraceFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(TraceFormat::Csv),
            "json" => Ok(TraceFormat::Json),
            other => Err(Error::config("format", format!("expected csv or json, got `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolverTrace {
    pub records: Vec<TraceRecord>,
}

fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

fn parse_f64(field: &str, s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|e| Error::TraceFormat(format!("column {field}: `{s}`: {e}")))
}

fn parse_opt(field: &str, s: &str) -> Result<Option<f64>> {
    if s.trim().is_empty() {
        Ok(None)
    } else {
        parse_f64(field, s).map(Some)
    }
}

impl SolverTrace {
    pub fn push(&mut self, r: TraceRecord) {
        self.records.push(r);
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> Option<&TraceRecord> {
        self.records.last()
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let io = |e: csv::Error| Error::Io(e.to_string());
        out.write_record(CSV_HEADER).map_err(io)?;
        for r in &self.records {
            let z = r.z.iter().map(|&c| fmt_f64(c)).collect::<Vec<_>>().join(";");
            out.write_record([
                r.iter.to_string(),
                fmt_f64(r.l),
                fmt_opt(r.u),
                fmt_f64(r.diameter),
                fmt_opt(r.kkt_residual),
                z,
                fmt_opt(r.grad_norm),
                fmt_opt(r.ratio),
            ])
            .map_err(io)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rd = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
        let fmt = |e: csv::Error| Error::TraceFormat(e.to_string());
        let header = rd.headers().map_err(fmt)?.clone();
        if header.iter().collect::<Vec<_>>() != CSV_HEADER {
            return Err(Error::TraceFormat(format!("unexpected header {header:?}")));
        }
        let mut records = Vec::new();
        for row in rd.records() {
            let row = row.map_err(fmt)?;
            let z = if row[5].trim().is_empty() {
                Vec::new()
            } else {
                row[5].split(';').map(|c| parse_f64("z", c)).collect::<Result<Vec<_>>>()?
            };
            records.push(TraceRecord {
                iter: row[0]
                    .trim()
                    .parse()
                    .map_err(|e| Error::TraceFormat(format!("column iter: {e}")))?,
                l: parse_f64("l", &row[1])?,
                u: parse_opt("u", &row[2])?,
                diameter: parse_f64("diameter", &row[3])?,
                kkt_residual: parse_opt("kkt_residual", &row[4])?,
                z,
                grad_norm: parse_opt("grad_norm", &row[6])?,
                ratio: parse_opt("ratio", &row[7])?,
            });
        }
        Ok(SolverTrace { records })
    }

    pub fn write_json<W: Write>(&self, w: W) -> Result<()> {
        serde_json::to_writer_pretty(w, &self.records).map_err(|e| Error::Io(e.to_string()))
    }

    pub fn read_json<R: Read>(r: R) -> Result<Self> {
        let records = serde_json::from_reader(r).map_err(|e| Error::TraceFormat(e.to_string()))?;
        Ok(SolverTrace { records })
    }

    pub fn save(&self, path: &Path, format: TraceFormat) -> Result<()> {
        let file = std::fs::File::create(path)?;
        let w = std::io::BufWriter::new(file);
        match format {
            TraceFormat::Csv => self.write_csv(w),
            TraceFormat::Json => self.write_json(w),
        }
    }

    /// Reads a trace, telling JSON from CSV by the first non-blank character.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        if text.trim_start().starts_with('[') {
            Self::read_json(text.as_bytes())
        } else {
            Self::read_csv(text.as_bytes())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> SolverTrace {
        SolverTrace {
            records: vec![
                TraceRecord {
                    iter: 1,
                    l: -0.1,
                    u: Some(1.0 / 3.0),
                    diameter: 2.0f64.sqrt(),
                    kkt_residual: Some(1e-17),
                    z: vec![0.1, -2.5e-300, 7.0],
                    grad_norm: Some(std::f64::consts::PI),
                    ratio: None,
                },
                TraceRecord {
                    iter: 2,
                    l: 0.0,
                    u: None,
                    diameter: 0.0,
                    kkt_residual: None,
                    z: vec![],
                    grad_norm: None,
                    ratio: Some(0.5),
                },
            ],
        }
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let t = sample();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("iter,l,u,diameter,kkt_residual,z,grad_norm,ratio\n"));
        assert_eq!(SolverTrace::read_csv(&buf[..]).unwrap(), t);
    }

    #[test]
    fn json_round_trip_is_exact() {
        let t = sample();
        let mut buf = Vec::new();
        t.write_json(&mut buf).unwrap();
        assert_eq!(SolverTrace::read_json(&buf[..]).unwrap(), t);
    }

    #[test]
    fn bad_header_is_rejected() {
        assert!(SolverTrace::read_csv("a,b\n1,2\n".as_bytes()).is_err());
    }
}
