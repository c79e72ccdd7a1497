//! Rank-based pipeline for count (or any ordinal) data: estimate
//! `T̂`, `Ŝ` through Kendall or Spearman statistics with their sine
//! transforms, then run the same flip-flop solver as the Gaussian
//! path. The marginal transforms of the latent Gaussian are never
//! estimated; only the ordering of the data matters, so any strictly
//! increasing entrywise transform of the input leaves the result
//! bit-identical.

use crate::covariance::{estimate_cov_pair_detailed, CovEstimatorKind, RankWarning};
use crate::data::DataStack;
use crate::error::{Error, Result};
use crate::solver::{fit, FitResult, SolverConfig};

/// A rank-based fit request; the empirical estimator is rejected here.
#[derive(Debug, Clone)]
pub struct NpnFitRequest {
    pub data: DataStack,
    pub estimator: CovEstimatorKind,
    pub solver_cfg: SolverConfig,
}

/// Rank-based covariance estimation followed by [`fit`].
pub fn npn_fit(req: &NpnFitRequest) -> Result<FitResult> {
    Ok(npn_fit_detailed(req)?.0)
}

/// [`npn_fit`] plus the rank warnings gathered during estimation.
pub fn npn_fit_detailed(req: &NpnFitRequest) -> Result<(FitResult, Vec<RankWarning>)> {
    if req.estimator == CovEstimatorKind::Empirical {
        return Err(Error::Estimator(
            "the nonparanormal pipeline requires a rank-based estimator (kendall or spearman)"
                .into(),
        ));
    }
    if req.data.p() < 2 || req.data.n() < 2 {
        return Err(Error::Dimension(format!(
            "rank estimation needs p >= 2 and n >= 2, got p = {}, n = {}",
            req.data.p(),
            req.data.n()
        )));
    }
    let (cov, warnings) = estimate_cov_pair_detailed(&req.data, req.estimator)?;
    let result = fit(&cov, &req.solver_cfg, None)?;
    Ok((result, warnings))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{DataKind, DataStack};
    use crate::linalg::DenseMatrix;

    fn counts_stack() -> DataStack {
        let y = DenseMatrix::new(
            4,
            3,
            vec![3.0, 1.0, 0.0, 2.0, 5.0, 4.0, 0.0, 2.0, 7.0, 6.0, 1.0, 2.0],
        )
        .unwrap();
        DataStack::new(vec![y], DataKind::Counts).unwrap()
    }

    #[test]
    fn rejects_empirical_estimator() {
        let req = NpnFitRequest {
            data: counts_stack(),
            estimator: CovEstimatorKind::Empirical,
            solver_cfg: SolverConfig::default(),
        };
        assert!(matches!(npn_fit(&req), Err(Error::Estimator(_))));
    }

    #[test]
    fn monotone_transform_gives_bit_identical_fit() {
        let data = counts_stack();
        let transformed = {
            let reps = data
                .replicates()
                .iter()
                .map(|r| {
                    DenseMatrix::new(
                        r.rows(),
                        r.cols(),
                        r.as_slice().iter().map(|v| v * v * v + 5.0 * v).collect(),
                    )
                    .unwrap()
                })
                .collect();
            DataStack::new(reps, DataKind::Counts).unwrap()
        };
        let mut cfg = SolverConfig::default();
        cfg.beta1 = 0.1;
        cfg.beta2 = 0.1;
        cfg.max_iter = 5;
        let a = npn_fit(&NpnFitRequest {
            data,
            estimator: CovEstimatorKind::Kendall,
            solver_cfg: cfg.clone(),
        })
        .unwrap();
        let b = npn_fit(&NpnFitRequest {
            data: transformed,
            estimator: CovEstimatorKind::Kendall,
            solver_cfg: cfg,
        })
        .unwrap();
        assert_eq!(a.model.psi, b.model.psi);
        assert_eq!(a.model.theta, b.model.theta);
        assert_eq!(a.objective.to_bits(), b.objective.to_bits());
    }

    #[test]
    fn large_beta_gives_diagonal_model() {
        let mut cfg = SolverConfig::default();
        cfg.beta1 = 1e4;
        cfg.beta2 = 1e4;
        let res = npn_fit(&NpnFitRequest {
            data: counts_stack(),
            estimator: CovEstimatorKind::Spearman,
            solver_cfg: cfg,
        })
        .unwrap();
        let psi = &res.model.psi;
        let theta = &res.model.theta;
        for i in 0..psi.dim() {
            for j in 0..psi.dim() {
                if i != j {
                    assert_eq!(psi.get(i, j), 0.0);
                }
            }
        }
        for i in 0..theta.dim() {
            for j in 0..theta.dim() {
                if i != j {
                    assert_eq!(theta.get(i, j), 0.0);
                }
            }
        }
    }
}
