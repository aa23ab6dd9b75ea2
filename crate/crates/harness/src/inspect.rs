//! `adaprox data inspect`: shape and label balance of a LIBSVM file.

use std::fmt;
use std::path::Path;

use adaprox_core::problems::LabelRule;
use serde::Serialize;

use crate::experiment::{read_raw, HarnessError};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RowNorms {
    pub min: f64,
    pub mean: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Inspection {
    pub path: String,
    pub n: usize,
    pub d: usize,
    pub nnz: usize,
    pub positive: usize,
    pub negative: usize,
    pub row_norms: RowNorms,
}

pub fn inspect(path: &Path, labels: LabelRule) -> Result<Inspection, HarnessError> {
    let raw = read_raw(path)?;
    let ds = raw.into_dataset(labels, None).map_err(|e| HarnessError::Data(format!("{}: {e}", path.display())))?;
    let norms: Vec<f64> = ds.rows().iter().map(|r| r.norm()).collect();
    let positive = ds.positive_count();
    Ok(Inspection {
        path: path.display().to_string(),
        n: ds.len(),
        d: ds.dim(),
        nnz: ds.rows().iter().map(|r| r.nnz()).sum(),
        positive,
        negative: ds.len() - positive,
        row_norms: RowNorms {
            min: norms.iter().copied().fold(f64::INFINITY, f64::min),
            mean: norms.iter().sum::<f64>() / norms.len() as f64,
            max: norms.iter().copied().fold(0.0, f64::max),
        },
    })
}

impl fmt::Display for Inspection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "file:      {}", self.path)?;
        writeln!(f, "samples:   {}", self.n)?;
        writeln!(f, "features:  {}", self.d)?;
        writeln!(f, "nonzeros:  {} ({:.2}%)", self.nnz, 100.0 * self.nnz as f64 / (self.n * self.d) as f64)?;
        writeln!(
            f,
            "labels:    {} positive / {} negative ({:.1}% positive)",
            self.positive,
            self.negative,
            100.0 * self.positive as f64 / self.n as f64
        )?;
        write!(f, "row norms: min {:.4} / mean {:.4} / max {:.4}", self.row_norms.min, self.row_norms.mean, self.row_norms.max)
    }
}
