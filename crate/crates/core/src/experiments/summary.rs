use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// One fitted value from one replication.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawEstimate {
    pub n: usize,
    pub replication: usize,
    pub parameter: String,
    pub value: f64,
    pub true_value: f64,
    pub converged: bool,
}

/// Summary of one parameter at one sample size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub n: usize,
    pub parameter: String,
    pub mean: f64,
    pub median: f64,
    pub std: f64,
    /// Converged replications entering the statistics.
    pub count: usize,
    pub true_value: f64,
    /// Replications left out because the fit did not converge.
    pub excluded: usize,
}

/// Sample mean, median (midpoint for even counts) and standard deviation
/// with the `R - 1` divisor; the deviation of a single value is 0.
pub fn describe(values: &[f64]) -> (f64, f64, f64) {
    let r = values.len();
    if r == 0 {
        return (f64::NAN, f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / r as f64;
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let median = if r % 2 == 1 {
        sorted[r / 2]
    } else {
        (sorted[r / 2 - 1] + sorted[r / 2]) / 2.0
    };
    let std = if r > 1 {
        let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
        (ss / (r - 1) as f64).sqrt()
    } else {
        0.0
    };
    (mean, median, std)
}

/// Groups raw estimates by `(true_value, n, parameter)` in order of first
/// appearance and summarizes the converged ones in replication order.
pub fn summarize(raw: &[RawEstimate]) -> Vec<SummaryRow> {
    let mut keys: Vec<(u64, usize, &str)> = Vec::new();
    for e in raw {
        let key = (e.true_value.to_bits(), e.n, e.parameter.as_str());
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    keys.into_iter()
        .map(|(tv, n, parameter)| {
            let mut group: Vec<&RawEstimate> = raw
                .iter()
                .filter(|e| e.true_value.to_bits() == tv && e.n == n && e.parameter == parameter)
                .collect();
            group.sort_by_key(|e| e.replication);
            let values: Vec<f64> = group
                .iter()
                .filter(|e| e.converged)
                .map(|e| e.value)
                .collect();
            let excluded = group.len() - values.len();
            if values.len() == 1 {
                log::warn!(
                    "{parameter} at n = {n}: a single replication has no spread; std set to 0"
                );
            }
            if excluded > 0 {
                log::warn!("{parameter} at n = {n}: {excluded} non-converged fits excluded");
            }
            let (mean, median, std) = describe(&values);
            SummaryRow {
                n,
                parameter: parameter.to_string(),
                mean,
                median,
                std,
                count: values.len(),
                true_value: f64::from_bits(tv),
                excluded,
            }
        })
        .collect()
}

fn write_rows<W: Write, S: Serialize>(writer: W, rows: &[S]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(writer);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// `n,replication,parameter,value,true_value,converged`
pub fn write_raw_csv<W: Write>(writer: W, raw: &[RawEstimate]) -> Result<()> {
    write_rows(writer, raw)
}

/// `n,parameter,mean,median,std,count,true_value,excluded`
pub fn write_summary_csv<W: Write>(writer: W, rows: &[SummaryRow]) -> Result<()> {
    write_rows(writer, rows)
}

pub fn read_raw_csv<R: Read>(reader: R) -> Result<Vec<RawEstimate>> {
    let mut r = csv::Reader::from_reader(reader);
    let mut out = Vec::new();
    for rec in r.deserialize() {
        out.push(rec?);
    }
    Ok(out)
}
