//! Result records, CSV tables and the JSON manifest.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::Result;

/// One reconstruction run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub id: String,
    pub replicate: usize,
    pub seed: u64,
    pub algorithm: String,
    pub n_frames: usize,
    pub shift_pct: f64,
    pub loose_px: u32,
    pub iters: usize,
    pub quality: f64,
    pub final_residual: f64,
    /// Only for frames-sweep runs.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spectrum_rmse: Option<f64>,
    /// Wall-clock seconds; excluded from the CSV tables.
    pub runtime_s: f64,
    pub image: String,
    pub residual_csv: String,
    pub container: String,
    /// Section index of the reconstruction in `container`.
    pub section: u32,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentResult {
    pub scenario: String,
    pub toolkit_version: String,
    pub config_text: String,
    pub config: std::collections::BTreeMap<String, String>,
    pub records: Vec<RunRecord>,
    /// Every file written, relative to the output directory.
    pub artifacts: Vec<String>,
    #[serde(skip)]
    pub out_dir: PathBuf,
}

impl ExperimentResult {
    pub fn new(cfg: &ExperimentConfig, records: Vec<RunRecord>, artifacts: Vec<String>) -> Self {
        Self {
            scenario: cfg.scenario.to_string(),
            toolkit_version: env!("CARGO_PKG_VERSION").to_string(),
            config_text: cfg.to_text(),
            config: cfg.pairs().into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
            records,
            artifacts,
            out_dir: cfg.out.clone(),
        }
    }

    /// Records matching `pred`.
    pub fn select(&self, pred: impl Fn(&RunRecord) -> bool) -> Vec<&RunRecord> {
        self.records.iter().filter(|r| pred(r)).collect()
    }

    /// Median quality over replicates of the records matching `pred`.
    pub fn median_quality(&self, pred: impl Fn(&RunRecord) -> bool) -> Option<f64> {
        median(self.select(pred).iter().map(|r| r.quality).collect())
    }

    pub fn median_residual(&self, pred: impl Fn(&RunRecord) -> bool) -> Option<f64> {
        median(self.select(pred).iter().map(|r| r.final_residual).collect())
    }
}

pub fn median(mut v: Vec<f64>) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    Some(if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    })
}

pub fn residual_csv(history: &[f64]) -> String {
    let mut s = String::from("iteration,residual\n");
    for (i, r) in history.iter().enumerate() {
        writeln!(s, "{},{}", i + 1, r).expect("string write");
    }
    s
}

/// All runs, one row each.
pub fn quality_csv(records: &[RunRecord]) -> String {
    let mut s = String::from("id,replicate,seed,algorithm,n_frames,shift_pct,loose_px,iters,quality,final_residual,spectrum_rmse\n");
    for r in records {
        writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.id,
            r.replicate,
            r.seed,
            r.algorithm,
            r.n_frames,
            r.shift_pct,
            r.loose_px,
            r.iters,
            r.quality,
            r.final_residual,
            r.spectrum_rmse.map(|v| v.to_string()).unwrap_or_default()
        )
        .expect("string write");
    }
    s
}

/// Medians over replicates for every distinct parameter point, in first-seen order.
pub fn summary_csv(records: &[RunRecord]) -> String {
    let mut keys: Vec<(String, usize, String, u32)> = Vec::new();
    for r in records {
        let k = (r.algorithm.clone(), r.n_frames, r.shift_pct.to_string(), r.loose_px);
        if !keys.contains(&k) {
            keys.push(k);
        }
    }
    let mut s = String::from("algorithm,n_frames,shift_pct,loose_px,runs,median_quality,median_final_residual,median_spectrum_rmse\n");
    for (alg, n, shift, loose) in keys {
        let sel: Vec<&RunRecord> = records
            .iter()
            .filter(|r| r.algorithm == alg && r.n_frames == n && r.shift_pct.to_string() == shift && r.loose_px == loose)
            .collect();
        let q = median(sel.iter().map(|r| r.quality).collect()).unwrap_or(f64::NAN);
        let e = median(sel.iter().map(|r| r.final_residual).collect()).unwrap_or(f64::NAN);
        let rm = median(sel.iter().filter_map(|r| r.spectrum_rmse).collect())
            .map(|v| v.to_string())
            .unwrap_or_default();
        writeln!(s, "{alg},{n},{shift},{loose},{},{q},{e},{rm}", sel.len()).expect("string write");
    }
    s
}

/// Write `result` as `manifest.json` in `dir`; returns the path.
pub fn write_manifest(result: &ExperimentResult, dir: &Path) -> Result<PathBuf> {
    let path = dir.join("manifest.json");
    fs::write(&path, serde_json::to_string_pretty(result)? + "\n")?;
    Ok(path)
}
