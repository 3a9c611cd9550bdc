//! JSON run reports and CSV convergence histories.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ga::{GaConfig, GenerationStats};
use crate::tensor::Shape;
use crate::tt::FitnessRecord;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub input: String,
    pub original_shape: Shape,
    pub eps: f64,
    /// Search settings, absent when the shape was fixed by the caller.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub search: Option<GaConfig>,
    pub best_shape: Shape,
    pub compression_ratio: f64,
    pub relative_error: f64,
    pub ranks: Vec<usize>,
    pub param_count: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub evaluations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub cache_hits: Option<usize>,
    /// Only recorded on request so repeated runs stay byte-identical.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub wall_time_secs: Option<f64>,
    #[serde(default)]
    pub history: Vec<GenerationStats>,
}

impl RunReport {
    pub fn new(input: String, original_shape: Shape, eps: f64, best: &FitnessRecord) -> Self {
        RunReport {
            input,
            original_shape,
            eps,
            search: None,
            best_shape: best.shape.clone(),
            compression_ratio: best.compression_ratio,
            relative_error: best.relative_error,
            ranks: best.ranks.clone(),
            param_count: best.param_count,
            evaluations: None,
            cache_hits: None,
            wall_time_secs: None,
            history: Vec::new(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)
            .map_err(|e| Error::UnsupportedFormat(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }
}

#[derive(Serialize)]
struct HistoryRow {
    generation: usize,
    #[serde(rename = "best_C")]
    best_c: f64,
    #[serde(rename = "mean_C")]
    mean_c: f64,
    #[serde(rename = "best_E")]
    best_e: f64,
    best_shape: String,
}

/// `generation,best_C,mean_C,best_E,best_shape`, one row per generation,
/// shapes written as `n1xn2xn3`.
pub fn history_csv(rows: &[GenerationStats]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::UnsupportedFormat(e.to_string());
    if rows.is_empty() {
        w.write_record(["generation", "best_C", "mean_C", "best_E", "best_shape"])
            .map_err(csv_err)?;
    }
    for g in rows {
        w.serialize(HistoryRow {
            generation: g.generation,
            best_c: g.best_c,
            mean_c: g.mean_c,
            best_e: g.best_e,
            best_shape: g.best_shape.to_string(),
        })
        .map_err(csv_err)?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

pub fn write_history_csv(rows: &[GenerationStats], path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, history_csv(rows)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_schema() {
        let rows = vec![
            GenerationStats {
                generation: 1,
                best_c: 0.5,
                mean_c: 0.25,
                best_e: 0.0625,
                best_shape: Shape::new(vec![222, 16, 60]).unwrap(),
            },
            GenerationStats {
                generation: 2,
                best_c: 0.75,
                mean_c: -0.5,
                best_e: 0.09,
                best_shape: Shape::new(vec![437, 8, 60]).unwrap(),
            },
        ];
        let text = String::from_utf8(history_csv(&rows).unwrap()).unwrap();
        assert_eq!(
            text,
            "generation,best_C,mean_C,best_E,best_shape\n\
             1,0.5,0.25,0.0625,222x16x60\n\
             2,0.75,-0.5,0.09,437x8x60\n"
        );
        let empty = String::from_utf8(history_csv(&[]).unwrap()).unwrap();
        assert_eq!(empty, "generation,best_C,mean_C,best_E,best_shape\n");
    }

    #[test]
    fn report_json_round_trip() {
        let rec = FitnessRecord {
            shape: Shape::new(vec![4, 4]).unwrap(),
            compression_ratio: 0.5,
            relative_error: 0.01,
            ranks: vec![1, 2, 1],
            param_count: 16,
        };
        let report = RunReport::new("x.png".into(), Shape::new(vec![2, 8]).unwrap(), 0.1, &rec);
        let json = report.to_json().unwrap();
        assert!(!json.contains("wall_time_secs"));
        let back: RunReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, report);
    }
}
