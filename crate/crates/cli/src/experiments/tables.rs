use isac_core::sensing::{complexity_counts, sensing_limits, ComplexityScheme};
use serde::Serialize;

use crate::config::Resolved;
use crate::error::Result;
use crate::output::CsvTable;

#[derive(Debug, Clone, Serialize)]
pub struct LimitsRow {
    pub block: String,
    pub n: usize,
    pub m: usize,
    pub range_resolution_m: f64,
    pub max_unambiguous_range_m: f64,
    pub max_unambiguous_velocity_mps: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ComplexityRow {
    pub scheme: &'static str,
    pub n: usize,
    pub m: usize,
    pub complex_multiplications: u64,
}

pub fn limits_rows(r: &Resolved) -> Result<Vec<LimitsRow>> {
    r.blocks
        .iter()
        .map(|b| {
            let l = sensing_limits(b.n, b.m, r.waveform())?;
            Ok(LimitsRow {
                block: b.name.clone(),
                n: b.n,
                m: b.m,
                range_resolution_m: l.range_resolution_m,
                max_unambiguous_range_m: l.max_unambiguous_range_m,
                max_unambiguous_velocity_mps: l.max_unambiguous_velocity_mps,
            })
        })
        .collect()
}

pub fn complexity_rows(r: &Resolved) -> Result<Vec<ComplexityRow>> {
    let mut rows = Vec::new();
    for s in &r.sizes {
        for (label, scheme) in [
            ("aac", ComplexityScheme::Aac),
            ("cm", ComplexityScheme::Cm),
            ("ofdm_prs", ComplexityScheme::OfdmPrs),
        ] {
            rows.push(ComplexityRow {
                scheme: label,
                n: s.n,
                m: s.m,
                complex_multiplications: complexity_counts(s.n, s.m, scheme)?,
            });
        }
    }
    Ok(rows)
}

pub(super) fn limits_tables(r: &Resolved) -> Result<Vec<CsvTable>> {
    let header = [
        "block",
        "n",
        "m",
        "range_resolution_m",
        "max_unambiguous_range_m",
        "max_unambiguous_velocity_mps",
    ];
    Ok(vec![CsvTable::from_rows(
        "limits.csv",
        &header,
        &limits_rows(r)?,
    )?])
}

pub(super) fn complexity_tables(r: &Resolved) -> Result<Vec<CsvTable>> {
    let header = ["scheme", "n", "m", "complex_multiplications"];
    Ok(vec![CsvTable::from_rows(
        "complexity.csv",
        &header,
        &complexity_rows(r)?,
    )?])
}
