//! CSV / JSON trial reports.

use std::io::{Read, Write};

use ipmatch::{Error, Result};
use serde::{Deserialize, Serialize};

use crate::config::OutputFormat;
use crate::sweep::SweepResult;
use crate::trial::TrialReport;

pub const CSV_HEADER: [&str; 18] = [
    "trial",
    "matcher",
    "n",
    "m",
    "d",
    "eps",
    "tau",
    "delta",
    "seed",
    "s",
    "alg",
    "opt",
    "ratio",
    "bound",
    "bound_satisfied",
    "flagged",
    "p50_us",
    "p99_us",
];

/// One emitted line; field order matches [`CSV_HEADER`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub trial: usize,
    pub matcher: String,
    pub n: usize,
    pub m: usize,
    pub d: usize,
    pub eps: f64,
    pub tau: f64,
    pub delta: f64,
    pub seed: u64,
    pub s: f64,
    pub alg: f64,
    pub opt: Option<f64>,
    pub ratio: Option<f64>,
    pub bound: Option<f64>,
    pub bound_satisfied: Option<bool>,
    pub flagged: bool,
    pub p50_us: Option<f64>,
    pub p99_us: Option<f64>,
}

impl From<&TrialReport> for ReportRow {
    fn from(r: &TrialReport) -> Self {
        ReportRow {
            trial: r.trial,
            matcher: r.matcher.name().into(),
            n: r.n,
            m: r.m,
            d: r.d,
            eps: r.eps,
            tau: r.tau,
            delta: r.delta,
            seed: r.seed,
            s: r.tracked_s,
            alg: r.realized_alg,
            opt: r.opt,
            ratio: r.ratio,
            bound: r.bound,
            bound_satisfied: r.bound_satisfied,
            flagged: r.flagged,
            p50_us: r.p50_us,
            p99_us: r.p99_us,
        }
    }
}

fn io(e: impl std::error::Error + Send + Sync + 'static) -> Error {
    Error::Io(std::io::Error::other(e))
}

pub fn emit_report<W: Write>(reports: &[TrialReport], format: OutputFormat, mut out: W) -> Result<()> {
    let rows: Vec<ReportRow> = reports.iter().map(ReportRow::from).collect();
    match format {
        OutputFormat::Csv => {
            let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(&mut out);
            w.write_record(CSV_HEADER).map_err(io)?;
            for row in &rows {
                w.serialize(row).map_err(io)?;
            }
            w.flush()?;
        }
        OutputFormat::Json => {
            serde_json::to_writer_pretty(&mut out, &rows).map_err(io)?;
            out.write_all(b"\n")?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn read_report<R: Read>(format: OutputFormat, input: R) -> Result<Vec<ReportRow>> {
    match format {
        OutputFormat::Csv => {
            let mut r = csv::Reader::from_reader(input);
            let header: Vec<String> = r.headers().map_err(io)?.iter().map(String::from).collect();
            if header != CSV_HEADER {
                return Err(Error::Parse {
                    line: 1,
                    msg: format!("unexpected header {header:?}"),
                });
            }
            r.deserialize().map(|row| row.map_err(io)).collect()
        }
        OutputFormat::Json => serde_json::from_reader(input).map_err(io),
    }
}

pub fn emit_sweep<W: Write>(sweep: &SweepResult, format: OutputFormat, mut out: W) -> Result<()> {
    match format {
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(&mut out);
            for p in &sweep.points {
                w.serialize(p).map_err(io)?;
            }
            w.flush()?;
            drop(w);
            for s in &sweep.slopes {
                writeln!(out, "# slope {} {:.4}", s.matcher, s.slope)?;
            }
            if let Some(rho) = sweep.reference_exponent {
                writeln!(out, "# reference time-optimal exponent {rho:.6}")?;
            }
        }
        OutputFormat::Json => {
            serde_json::to_writer_pretty(&mut out, sweep).map_err(io)?;
            out.write_all(b"\n")?;
        }
    }
    out.flush()?;
    Ok(())
}
