//! Dataset files.
//!
//! CSV: a first line `dim=<d>`, then one comma-separated vector per row.
//! NDJSON: one `{"v":[...]}` object per line.

use std::io::{BufRead, Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vector::Vector;

#[derive(Serialize, Deserialize)]
struct Row {
    v: Vec<f64>,
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

fn check_row(line: usize, dim: usize, values: Vec<f64>) -> Result<Vector> {
    if values.len() != dim {
        return Err(parse_err(
            line,
            format!("expected {dim} components, found {}", values.len()),
        ));
    }
    Vector::new(values).map_err(|e| parse_err(line, e.to_string()))
}

pub fn read_csv<R: Read>(reader: R) -> Result<Vec<Vector>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut records = rdr.records();
    let header = records
        .next()
        .ok_or_else(|| parse_err(1, "missing `dim=<d>` header"))?
        .map_err(|e| parse_err(1, e.to_string()))?;
    let dim = match header.iter().collect::<Vec<_>>().as_slice() {
        [h] => h
            .strip_prefix("dim=")
            .and_then(|d| d.parse::<usize>().ok())
            .ok_or_else(|| parse_err(1, format!("bad header `{h}`")))?,
        _ => return Err(parse_err(1, "header must be a single `dim=<d>` field")),
    };
    let mut out = Vec::new();
    for (k, rec) in records.enumerate() {
        let line = k + 2;
        let rec = rec.map_err(|e| parse_err(line, e.to_string()))?;
        let values = rec
            .iter()
            .map(|f| f.parse::<f64>().map_err(|e| parse_err(line, format!("`{f}`: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        out.push(check_row(line, dim, values)?);
    }
    Ok(out)
}

pub fn write_csv<W: Write>(writer: W, points: &[Vector]) -> Result<()> {
    let dim = points.first().map_or(0, Vector::dim);
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(writer);
    let io = |e: csv::Error| Error::Io(e.into());
    w.write_record([format!("dim={dim}")]).map_err(io)?;
    for p in points {
        w.write_record(p.as_slice().iter().map(|x| x.to_string()))
            .map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_ndjson<R: BufRead>(reader: R) -> Result<Vec<Vector>> {
    let mut out = Vec::new();
    let mut dim = None;
    for (k, line) in reader.lines().enumerate() {
        let line_no = k + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let row: Row = serde_json::from_str(&line).map_err(|e| parse_err(line_no, e.to_string()))?;
        let d = *dim.get_or_insert(row.v.len());
        out.push(check_row(line_no, d, row.v)?);
    }
    Ok(out)
}

pub fn write_ndjson<W: Write>(mut writer: W, points: &[Vector]) -> Result<()> {
    for p in points {
        let row = Row {
            v: p.as_slice().to_vec(),
        };
        serde_json::to_writer(&mut writer, &row).map_err(|e| Error::Io(e.into()))?;
        writer.write_all(b"\n")?;
    }
    writer.flush()?;
    Ok(())
}
