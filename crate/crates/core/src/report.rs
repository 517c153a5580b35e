//! CSV and JSON output of rate sweeps.
//!
//! CSV columns, in order: the sweep axis (`loss_db` or `N`), then `R`, `r_n`,
//! `V`, `n`, `zeta`, `zeta_digit`, `zeta_leak`, `snr`, `leak_bits`,
//! `R_code_star`, `m_sparse_star_bits`. Floats use the shortest
//! representation that parses back to the same value.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::keyrate::{RatePoint, SweepAxis};

pub const CSV_TAIL_COLUMNS: [&str; 11] = [
    "R",
    "r_n",
    "V",
    "n",
    "zeta",
    "zeta_digit",
    "zeta_leak",
    "snr",
    "leak_bits",
    "R_code_star",
    "m_sparse_star_bits",
];

/// One CSV row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CsvRecord {
    pub axis: f64,
    #[serde(rename = "R")]
    pub rate: f64,
    pub r_n: f64,
    #[serde(rename = "V")]
    pub v: f64,
    pub n: u64,
    pub zeta: f64,
    pub zeta_digit: f64,
    pub zeta_leak: f64,
    pub snr: f64,
    pub leak_bits: f64,
    #[serde(rename = "R_code_star")]
    pub r_code_star: f64,
    pub m_sparse_star_bits: f64,
}

impl CsvRecord {
    pub fn from_point(p: &RatePoint, axis: SweepAxis) -> Self {
        Self {
            axis: axis.value(p),
            rate: p.rate,
            r_n: p.r_n,
            v: p.v,
            n: p.n,
            zeta: p.zeta,
            zeta_digit: p.zeta_digit,
            zeta_leak: p.zeta_leak,
            snr: p.snr,
            leak_bits: p.leak_bits,
            r_code_star: p.r_code_star,
            m_sparse_star_bits: p.m_sparse_star_bits,
        }
    }

    fn fields(&self) -> [String; 12] {
        [
            self.axis.to_string(),
            self.rate.to_string(),
            self.r_n.to_string(),
            self.v.to_string(),
            self.n.to_string(),
            self.zeta.to_string(),
            self.zeta_digit.to_string(),
            self.zeta_leak.to_string(),
            self.snr.to_string(),
            self.leak_bits.to_string(),
            self.r_code_star.to_string(),
            self.m_sparse_star_bits.to_string(),
        ]
    }
}

pub fn write_csv<W: Write>(out: W, axis: SweepAxis, points: &[RatePoint]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec![axis.column()];
    header.extend(CSV_TAIL_COLUMNS);
    w.write_record(&header)?;
    for p in points {
        w.write_record(CsvRecord::from_point(p, axis).fields())?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Reads back a sweep CSV, returning its axis and rows.
pub fn read_csv<R: Read>(input: R) -> Result<(SweepAxis, Vec<CsvRecord>)> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers()?.clone();
    let axis = match header.get(0) {
        Some("loss_db") => SweepAxis::LossDb,
        Some("N") => SweepAxis::BlockSize,
        other => return Err(Error::Format(format!("unknown axis column {other:?}"))),
    };
    let tail: Vec<&str> = header.iter().skip(1).collect();
    if tail != CSV_TAIL_COLUMNS {
        return Err(Error::Format(format!("unexpected CSV columns {tail:?}")));
    }
    let mut canonical = csv::StringRecord::from(vec!["axis"]);
    canonical.extend(CSV_TAIL_COLUMNS);
    let mut rows = Vec::new();
    for rec in r.records() {
        rows.push(rec?.deserialize(Some(&canonical))?);
    }
    Ok((axis, rows))
}

pub fn write_json<W: Write>(out: W, points: &[RatePoint]) -> Result<()> {
    let mut out = out;
    serde_json::to_writer_pretty(&mut out, points)?;
    writeln!(out).map_err(|e| Error::Format(e.to_string()))?;
    Ok(())
}

pub fn read_json<R: Read>(input: R) -> Result<Vec<RatePoint>> {
    Ok(serde_json::from_reader(input)?)
}
