//! CSV rows for prices, convergence curves, timings and diagnostics.
//!
//! Floats are written in shortest round-trip form, so every file reads back
//! into exactly the rows that produced it.

use std::io;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::pricers::{Feasibility, Method, OptionKind, PriceVector};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceRow {
    pub method: Method,
    pub kind: OptionKind,
    pub t: f64,
    pub k: f64,
    pub value: f64,
    pub interpolated: bool,
}

pub fn price_rows(pv: &PriceVector) -> Vec<PriceRow> {
    pv.strikes
        .iter()
        .zip(&pv.values)
        .zip(&pv.interpolated)
        .map(|((&k, &value), &interpolated)| PriceRow {
            method: pv.method,
            kind: pv.kind,
            t: pv.t,
            k,
            value,
            interpolated,
        })
        .collect()
}

/// One point of a convergence curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub method: Method,
    pub domain: f64,
    pub k: f64,
    pub t: f64,
    pub n: usize,
    pub error: f64,
}

/// Figure-ready form of [`CurveRow`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotRow {
    pub method: Method,
    pub k: f64,
    pub t: f64,
    pub log2n: f64,
    pub log10err: f64,
}

impl From<&CurveRow> for PlotRow {
    fn from(r: &CurveRow) -> Self {
        PlotRow {
            method: r.method,
            k: r.k,
            t: r.t,
            log2n: (r.n as f64).log2(),
            // exact hits would otherwise plot at -inf
            log10err: r.error.max(f64::MIN_POSITIVE).log10(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingRow {
    pub method: Method,
    pub domain: f64,
    pub n: usize,
    pub batch: usize,
    pub mean_ms: f64,
}

/// One cell of the blow-up matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlowupRow {
    pub method: Method,
    pub n: usize,
    pub t: f64,
    pub k: f64,
    pub value: f64,
    pub feasibility: Feasibility,
}

pub fn write_csv<T: Serialize, W: io::Write>(out: W, rows: &[T]) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    for row in rows {
        writer.serialize(row)?;
    }
    writer.flush()?;
    Ok(())
}

pub fn read_csv<T: DeserializeOwned, R: io::Read>(input: R) -> Result<Vec<T>> {
    let mut reader = csv::Reader::from_reader(input);
    let mut rows = Vec::new();
    for row in reader.deserialize() {
        rows.push(row?);
    }
    Ok(rows)
}

pub fn write_csv_file<T: Serialize>(path: impl AsRef<Path>, rows: &[T]) -> Result<()> {
    write_csv(std::fs::File::create(path)?, rows)
}

pub fn read_csv_file<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<Vec<T>> {
    read_csv(std::fs::File::open(path)?)
}

pub fn to_csv_string<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(&mut buf, rows)?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}
