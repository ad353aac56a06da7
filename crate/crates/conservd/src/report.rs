//! Versioned JSON reports and CSV exports.
//!
//! Reports are byte-reproducible for a fixed configuration and seed: no
//! timestamps, no filesystem paths, map keys ordered, and floats printed in
//! shortest round-trip form. `report_version` is 1.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::criteria::CriterionVerdict;
use crate::divergence::DivergenceReport;
use crate::error::{Error, Result};
use crate::growth::GrowthTable;
use crate::oracle::{ExplosionEstimate, FellerResult};

pub const REPORT_VERSION: u32 = 1;

/// One growth-table row flattened for serialization.
#[derive(Debug, Clone, Serialize)]
pub struct GrowthRowReport {
    pub n: u32,
    pub a_n: f64,
    pub a_witness: Vec<f64>,
    pub b_n: f64,
    pub c_n: f64,
    pub c_witness: Vec<f64>,
    pub vol_n: f64,
    pub vol_se: f64,
    pub bnorm_n: f64,
    pub bnorm_se: f64,
    pub a_hat_n: f64,
    pub log_q_n: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct GrowthTableReport {
    pub phi: crate::growth::PhiFamily,
    pub k0: f64,
    pub decay_time: f64,
    pub rows: Vec<GrowthRowReport>,
}

impl GrowthTableReport {
    pub fn new(table: &GrowthTable, decay_time: f64) -> Self {
        let log_q = table.decay_log_sequence(decay_time);
        GrowthTableReport {
            phi: table.phi,
            k0: table.k0,
            decay_time,
            rows: table
                .rows
                .iter()
                .zip(log_q)
                .map(|(r, lq)| GrowthRowReport {
                    n: r.n,
                    a_n: r.a_sup.value,
                    a_witness: r.a_sup.witness.clone(),
                    b_n: r.b_sup.value,
                    c_n: r.c_sup.value,
                    c_witness: r.c_sup.witness.clone(),
                    vol_n: r.volume.value,
                    vol_se: r.volume.std_error,
                    bnorm_n: r.drift_norm.value,
                    bnorm_se: r.drift_norm.std_error,
                    a_hat_n: r.a_hat,
                    log_q_n: lq,
                })
                .collect(),
        }
    }
}

/// Top-level report emitted by every command.
#[derive(Debug, Serialize)]
pub struct Report {
    pub report_version: u32,
    pub command: String,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub registry: Option<String>,
    /// Echo of the resolved run parameters (never contains paths).
    pub parameters: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub growth_table: Option<GrowthTableReport>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub criteria: Vec<CriterionVerdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub divergence: Option<DivergenceReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub feller: Option<FellerResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub escape: Option<ExplosionEstimate>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub messages: Vec<String>,
}

impl Report {
    pub fn new(command: &str, seed: u64) -> Self {
        Report {
            report_version: REPORT_VERSION,
            command: command.to_string(),
            seed,
            registry: None,
            parameters: Value::Null,
            growth_table: None,
            criteria: Vec::new(),
            divergence: None,
            feller: None,
            escape: None,
            messages: Vec::new(),
        }
    }

    pub fn to_json_bytes(&self) -> Result<Vec<u8>> {
        let mut bytes = serde_json::to_vec_pretty(self)?;
        bytes.push(b'\n');
        Ok(bytes)
    }
}

// ---------------------------------------------------------------------------
// CSV exports (column orders are part of the interface)
// ---------------------------------------------------------------------------

pub fn growth_csv(table: &GrowthTableReport) -> String {
    let mut out = String::from("n,a_n,b_n,c_n,vol_n,bnorm_n,A_hat_n,log_q_n\n");
    for r in &table.rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.n, r.a_n, r.b_n, r.c_n, r.vol_n, r.bnorm_n, r.a_hat_n, r.log_q_n
        ));
    }
    out
}

pub fn feller_csv(result: &FellerResult) -> String {
    let mut out = String::from("side,level,phi_big,phi_big_algebraic\n");
    for side in [&result.positive, &result.negative] {
        let tag = if side.levels.first().copied().unwrap_or(0.0) >= 0.0 {
            "positive"
        } else {
            "negative"
        };
        for ((level, phi), alg) in side
            .levels
            .iter()
            .zip(&side.phi_big)
            .zip(&side.phi_big_algebraic)
        {
            out.push_str(&format!("{tag},{level},{phi},{alg}\n"));
        }
    }
    out
}

pub fn escape_csv(est: &ExplosionEstimate) -> String {
    let mut out = String::from("radius,escaped,paths,p_hat,wilson_low,wilson_high\n");
    for r in &est.rungs {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.radius, r.escaped, est.paths, r.p_hat, r.wilson_low, r.wilson_high
        ));
    }
    out
}

/// Write the report and the CSV views of whatever tables it contains.
/// Returns the list of files written.
pub fn write_outputs(
    dir: &Path,
    report: &Report,
    json: bool,
    csv: bool,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    if json {
        let path = dir.join("report.json");
        fs::write(&path, report.to_json_bytes()?)?;
        written.push(path);
    }
    if csv {
        if let Some(table) = &report.growth_table {
            let path = dir.join("growth.csv");
            fs::write(&path, growth_csv(table))?;
            written.push(path);
        }
        if let Some(feller) = &report.feller {
            let path = dir.join("feller.csv");
            fs::write(&path, feller_csv(feller))?;
            written.push(path);
        }
        if let Some(escape) = &report.escape {
            let path = dir.join("escape.csv");
            fs::write(&path, escape_csv(escape))?;
            written.push(path);
        }
    }
    Ok(written)
}

/// Re-emit the CSV views from a previously written JSON report (plot-data).
pub fn csv_from_report_json(json_bytes: &[u8], dir: &Path) -> Result<Vec<PathBuf>> {
    let value: Value = serde_json::from_slice(json_bytes)?;
    let version = value
        .get("report_version")
        .and_then(Value::as_u64)
        .ok_or_else(|| Error::Config("input is not a conservd report".to_string()))?;
    if version != REPORT_VERSION as u64 {
        return Err(Error::Config(format!(
            "unsupported report_version {version} (expected {REPORT_VERSION})"
        )));
    }
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();

    if let Some(table) = value.get("growth_table") {
        let mut out = String::from("n,a_n,b_n,c_n,vol_n,bnorm_n,A_hat_n,log_q_n\n");
        for row in table
            .get("rows")
            .and_then(Value::as_array)
            .unwrap_or(&Vec::new())
        {
            let f = |k: &str| row.get(k).and_then(Value::as_f64).unwrap_or(f64::NAN);
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                row.get("n").and_then(Value::as_u64).unwrap_or(0),
                f("a_n"),
                f("b_n"),
                f("c_n"),
                f("vol_n"),
                f("bnorm_n"),
                f("a_hat_n"),
                f("log_q_n")
            ));
        }
        let path = dir.join("growth.csv");
        fs::write(&path, out)?;
        written.push(path);
    }

    if let Some(feller) = value.get("feller") {
        let mut out = String::from("side,level,phi_big,phi_big_algebraic\n");
        for (tag, key) in [("positive", "positive"), ("negative", "negative")] {
            if let Some(side) = feller.get(key) {
                let levels = side.get("levels").and_then(Value::as_array);
                let phi = side.get("phi_big").and_then(Value::as_array);
                let alg = side.get("phi_big_algebraic").and_then(Value::as_array);
                if let (Some(levels), Some(phi), Some(alg)) = (levels, phi, alg) {
                    for ((l, p), a) in levels.iter().zip(phi).zip(alg) {
                        out.push_str(&format!(
                            "{tag},{},{},{}\n",
                            l.as_f64().unwrap_or(f64::NAN),
                            p.as_f64().unwrap_or(f64::NAN),
                            a.as_f64().unwrap_or(f64::NAN)
                        ));
                    }
                }
            }
        }
        let path = dir.join("feller.csv");
        fs::write(&path, out)?;
        written.push(path);
    }

    if let Some(escape) = value.get("escape") {
        let paths_n = escape.get("paths").and_then(Value::as_u64).unwrap_or(0);
        let mut out = String::from("radius,escaped,paths,p_hat,wilson_low,wilson_high\n");
        for rung in escape
            .get("rungs")
            .and_then(Value::as_array)
            .unwrap_or(&Vec::new())
        {
            let f = |k: &str| rung.get(k).and_then(Value::as_f64).unwrap_or(f64::NAN);
            out.push_str(&format!(
                "{},{},{paths_n},{},{},{}\n",
                f("radius"),
                rung.get("escaped").and_then(Value::as_u64).unwrap_or(0),
                f("p_hat"),
                f("wilson_low"),
                f("wilson_high")
            ));
        }
        let path = dir.join("escape.csv");
        fs::write(&path, out)?;
        written.push(path);
    }

    Ok(written)
}
