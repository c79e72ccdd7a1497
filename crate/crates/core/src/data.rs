//! Replicated observation matrices.

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use serde::{Deserialize, Serialize};

/// What the entries of a [`DataStack`] represent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DataKind {
    Gaussian,
    Counts,
}

impl std::fmt::Display for DataKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DataKind::Gaussian => write!(f, "gaussian"),
            DataKind::Counts => write!(f, "counts"),
        }
    }
}

/// `m` replicate data matrices, each `p × n` with features along rows
/// and samples along columns.
#[derive(Debug, Clone, PartialEq)]
pub struct DataStack {
    replicates: Vec<DenseMatrix>,
    kind: DataKind,
}

impl DataStack {
    pub fn new(replicates: Vec<DenseMatrix>, kind: DataKind) -> Result<Self> {
        if replicates.is_empty() {
            return Err(Error::Dimension("need at least one replicate".into()));
        }
        let (p, n) = (replicates[0].rows(), replicates[0].cols());
        for (k, r) in replicates.iter().enumerate() {
            if r.rows() != p || r.cols() != n {
                return Err(Error::Dimension(format!(
                    "replicate {k} is {}x{}, expected {p}x{n}",
                    r.rows(),
                    r.cols()
                )));
            }
        }
        Ok(Self { replicates, kind })
    }

    pub fn m(&self) -> usize {
        self.replicates.len()
    }

    /// Feature count (rows of each replicate).
    pub fn p(&self) -> usize {
        self.replicates[0].rows()
    }

    /// Sample count (columns of each replicate).
    pub fn n(&self) -> usize {
        self.replicates[0].cols()
    }

    pub fn kind(&self) -> DataKind {
        self.kind
    }

    pub fn replicates(&self) -> &[DenseMatrix] {
        &self.replicates
    }

    pub fn replicate(&self, k: usize) -> &DenseMatrix {
        &self.replicates[k]
    }
}
