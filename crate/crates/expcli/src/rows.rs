//! The CSV row schema shared by training and rank runs.
//!
//! Floats are written with 17 significant digits ('.' decimal, UTF-8), so
//! files round-trip f64 exactly and reruns diff byte-for-byte.

use std::path::Path;

use crate::config::ConfigError;

pub const SCHEMA_VERSION: &str = "1";

pub const COLUMNS: [&str; 23] = [
    "schema_version",
    "experiment_id",
    "family",
    "n",
    "m",
    "g",
    "l",
    "seed",
    "c_train",
    "c_test",
    "steps_e",
    "converged",
    "empirical_risk",
    "wall_time_s",
    "d_l",
    "r_l",
    "m_c",
    "r_inf",
    "l_c",
    "l_c_approx",
    "dla_dim",
    "spectral_gap",
    "status",
];

/// One output row; training runs fill the cost fields, rank runs the rank
/// fields, and unused fields stay empty.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ResultRow {
    pub experiment_id: String,
    pub family: String,
    pub n: usize,
    pub m: usize,
    pub g: usize,
    pub l: usize,
    pub seed: usize,
    pub c_train: Option<f64>,
    pub c_test: Option<f64>,
    pub steps_e: Option<usize>,
    pub converged: Option<bool>,
    pub empirical_risk: Option<f64>,
    pub wall_time_s: Option<f64>,
    pub d_l: Option<usize>,
    pub r_l: Option<usize>,
    pub m_c: Option<usize>,
    pub r_inf: Option<usize>,
    pub l_c: Option<usize>,
    pub l_c_approx: Option<f64>,
    pub dla_dim: Option<usize>,
    pub spectral_gap: Option<f64>,
    pub status: String,
}

/// 17-significant-digit float rendering.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt_f64(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

fn opt_usize(v: Option<usize>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl ResultRow {
    pub fn to_record(&self) -> Vec<String> {
        vec![
            SCHEMA_VERSION.to_string(),
            self.experiment_id.clone(),
            self.family.clone(),
            self.n.to_string(),
            self.m.to_string(),
            self.g.to_string(),
            self.l.to_string(),
            self.seed.to_string(),
            opt_f64(self.c_train),
            opt_f64(self.c_test),
            opt_usize(self.steps_e),
            self.converged.map(|b| b.to_string()).unwrap_or_default(),
            opt_f64(self.empirical_risk),
            opt_f64(self.wall_time_s),
            opt_usize(self.d_l),
            opt_usize(self.r_l),
            opt_usize(self.m_c),
            opt_usize(self.r_inf),
            opt_usize(self.l_c),
            opt_f64(self.l_c_approx),
            opt_usize(self.dla_dim),
            opt_f64(self.spectral_gap),
            self.status.clone(),
        ]
    }
}

pub fn write_csv(path: &Path, rows: &[ResultRow]) -> Result<(), ConfigError> {
    let mut w = csv::Writer::from_path(path)
        .map_err(|e| ConfigError(format!("cannot open {}: {e}", path.display())))?;
    w.write_record(COLUMNS)
        .map_err(|e| ConfigError(format!("csv header: {e}")))?;
    for row in rows {
        w.write_record(row.to_record())
            .map_err(|e| ConfigError(format!("csv row: {e}")))?;
    }
    w.flush()
        .map_err(|e| ConfigError(format!("csv flush: {e}")))
}

/// Reads rows back, rejecting unknown schema versions.
pub fn read_csv(path: &Path) -> Result<Vec<ResultRow>, ConfigError> {
    let mut r = csv::Reader::from_path(path)
        .map_err(|e| ConfigError(format!("cannot open {}: {e}", path.display())))?;
    let mut out = Vec::new();
    for record in r.records() {
        let record = record.map_err(|e| ConfigError(format!("csv parse: {e}")))?;
        if record.len() != COLUMNS.len() {
            return Err(ConfigError(format!(
                "row has {} fields, expected {}",
                record.len(),
                COLUMNS.len()
            )));
        }
        let version = &record[0];
        if version != SCHEMA_VERSION {
            return Err(ConfigError(format!(
                "unknown schema version '{version}' (expected {SCHEMA_VERSION})"
            )));
        }
        let parse_opt_f64 = |s: &str| -> Result<Option<f64>, ConfigError> {
            if s.is_empty() {
                Ok(None)
            } else {
                s.parse::<f64>()
                    .map(Some)
                    .map_err(|e| ConfigError(format!("bad float '{s}': {e}")))
            }
        };
        let parse_opt_usize = |s: &str| -> Result<Option<usize>, ConfigError> {
            if s.is_empty() {
                Ok(None)
            } else {
                s.parse::<usize>()
                    .map(Some)
                    .map_err(|e| ConfigError(format!("bad int '{s}': {e}")))
            }
        };
        out.push(ResultRow {
            experiment_id: record[1].to_string(),
            family: record[2].to_string(),
            n: record[3].parse().map_err(|e| ConfigError(format!("n: {e}")))?,
            m: record[4].parse().map_err(|e| ConfigError(format!("m: {e}")))?,
            g: record[5].parse().map_err(|e| ConfigError(format!("g: {e}")))?,
            l: record[6].parse().map_err(|e| ConfigError(format!("l: {e}")))?,
            seed: record[7]
                .parse()
                .map_err(|e| ConfigError(format!("seed: {e}")))?,
            c_train: parse_opt_f64(&record[8])?,
            c_test: parse_opt_f64(&record[9])?,
            steps_e: parse_opt_usize(&record[10])?,
            converged: if record[11].is_empty() {
                None
            } else {
                Some(&record[11] == "true")
            },
            empirical_risk: parse_opt_f64(&record[12])?,
            wall_time_s: parse_opt_f64(&record[13])?,
            d_l: parse_opt_usize(&record[14])?,
            r_l: parse_opt_usize(&record[15])?,
            m_c: parse_opt_usize(&record[16])?,
            r_inf: parse_opt_usize(&record[17])?,
            l_c: parse_opt_usize(&record[18])?,
            l_c_approx: parse_opt_f64(&record[19])?,
            dla_dim: parse_opt_usize(&record[20])?,
            spectral_gap: parse_opt_f64(&record[21])?,
            status: record[22].to_string(),
        });
    }
    Ok(out)
}
