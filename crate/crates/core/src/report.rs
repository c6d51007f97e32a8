//! Tabular sweep output. Column order is fixed by the field order of the row types.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::entanglement::EntanglementReport;
use crate::error::Result;
use crate::negativity::NegativityResult;

/// CSV columns `gamma_t,p_nw,min_w,converged`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PnwRow {
    pub gamma_t: f64,
    pub p_nw: f64,
    pub min_w: f64,
    pub converged: bool,
}

impl PnwRow {
    pub fn new(gamma_t: f64, r: &NegativityResult) -> Self {
        Self {
            gamma_t,
            p_nw: r.p_nw,
            min_w: r.min_value,
            converged: r.converged,
        }
    }
}

/// CSV columns `gamma_t,log_negativity,trace_norm,truncation_error`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpRow {
    pub gamma_t: f64,
    pub log_negativity: f64,
    pub trace_norm: f64,
    pub truncation_error: f64,
}

impl EpRow {
    pub fn new(gamma_t: f64, r: &EntanglementReport) -> Self {
        Self {
            gamma_t,
            log_negativity: r.log_negativity,
            trace_norm: r.trace_norm,
            truncation_error: r.truncation_error,
        }
    }
}

pub fn pnw_rows(sweep: &[(f64, NegativityResult)]) -> Vec<PnwRow> {
    sweep.iter().map(|(g, r)| PnwRow::new(*g, r)).collect()
}

pub fn ep_rows(sweep: &[(f64, EntanglementReport)]) -> Vec<EpRow> {
    sweep.iter().map(|(g, r)| EpRow::new(*g, r)).collect()
}

/// Header row followed by one record per row.
pub fn write_csv<R: Serialize, W: Write>(rows: &[R], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Pretty-printed JSON array of row objects.
pub fn write_json<R: Serialize, W: Write>(rows: &[R], mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, rows)?;
    out.write_all(b"\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Vec<PnwRow> {
        vec![
            PnwRow {
                gamma_t: 0.0,
                p_nw: 0.25,
                min_w: -0.5,
                converged: true,
            },
            PnwRow {
                gamma_t: 0.1,
                p_nw: 0.125,
                min_w: -0.25,
                converged: false,
            },
        ]
    }

    #[test]
    fn csv_layout() {
        let mut buf = Vec::new();
        write_csv(&sample(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "gamma_t,p_nw,min_w,converged\n0.0,0.25,-0.5,true\n0.1,0.125,-0.25,false\n"
        );
    }

    #[test]
    fn ep_csv_header() {
        let rows = [EpRow {
            gamma_t: 0.0,
            log_negativity: 1.0,
            trace_norm: 2.0,
            truncation_error: 0.0,
        }];
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("gamma_t,log_negativity,trace_norm,truncation_error\n"));
    }

    #[test]
    fn json_round_trip() {
        let mut buf = Vec::new();
        write_json(&sample(), &mut buf).unwrap();
        let back: Vec<PnwRow> = serde_json::from_slice(&buf).unwrap();
        assert_eq!(back, sample());
    }
}
