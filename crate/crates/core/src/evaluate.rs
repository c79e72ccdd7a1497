//! Support-recovery scoring, regularization sweeps and BIC.
//!
//! All metrics count unordered off-diagonal pairs only: diagonals are
//! always "present" in a precision matrix and would inflate every
//! score.

use crate::covariance::CovPair;
use crate::error::{Error, Result};
use crate::linalg::{ks_logdet, sym_eigen, KsModel, SymMatrix};
use crate::par;
use crate::solver::{fit, objective_value, FitResult, SolverConfig};
use serde::{Deserialize, Serialize};

/// Edge rule used when binarizing a precision matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BinarizeMode {
    /// `|m_ij| > threshold` is an edge (synthetic-data convention).
    AnyNonzero,
    /// `m_ij < -threshold` is an edge (real-data convention).
    NegativeOnly,
}

impl std::fmt::Display for BinarizeMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BinarizeMode::AnyNonzero => write!(f, "any_nonzero"),
            BinarizeMode::NegativeOnly => write!(f, "negative_only"),
        }
    }
}

/// Undirected graph on matrix indices: upper-triangle edge flags, no
/// self loops.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Adjacency {
    dim: usize,
    edges: Vec<bool>,
}

impl Adjacency {
    fn tri_index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < j);
        // offset of row i in the packed upper triangle
        i * self.dim - i * (i + 1) / 2 + (j - i - 1)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn edge(&self, i: usize, j: usize) -> bool {
        if i == j {
            return false;
        }
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        self.edges[self.tri_index(a, b)]
    }

    pub fn edge_count(&self) -> usize {
        self.edges.iter().filter(|e| **e).count()
    }

    pub fn pair_count(&self) -> usize {
        self.dim * (self.dim - 1) / 2
    }
}

/// Threshold a symmetric matrix into an adjacency.
pub fn binarize(m: &SymMatrix, zero_threshold: f64, mode: BinarizeMode) -> Adjacency {
    let dim = m.dim();
    let mut edges = Vec::with_capacity(dim * (dim - 1) / 2);
    for i in 0..dim {
        for j in (i + 1)..dim {
            let v = m.get(i, j);
            edges.push(match mode {
                BinarizeMode::AnyNonzero => v.abs() > zero_threshold,
                BinarizeMode::NegativeOnly => v < -zero_threshold,
            });
        }
    }
    Adjacency { dim, edges }
}

/// Which factor a report refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Psi,
    Theta,
}

/// Support-recovery confusion counts and rates over unordered
/// off-diagonal pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryReport {
    pub side: Side,
    pub tp: usize,
    pub tn: usize,
    pub fp: usize,
    pub fn_: usize,
    pub precision: f64,
    pub recall: f64,
    pub accuracy: f64,
    pub tpr: f64,
    pub fpr: f64,
}

/// Score `est` against `truth`.
///
/// Degenerate denominators resolve to the optimistic convention:
/// precision is 1 with no predicted edges, recall/TPR is 1 with no
/// true edges, FPR is 0 with no true non-edges.
pub fn recovery_metrics(est: &Adjacency, truth: &Adjacency, side: Side) -> Result<RecoveryReport> {
    if est.dim() != truth.dim() {
        return Err(Error::Dimension(format!(
            "adjacency dims disagree: {} vs {}",
            est.dim(),
            truth.dim()
        )));
    }
    let (mut tp, mut tn, mut fp, mut fn_) = (0usize, 0usize, 0usize, 0usize);
    for i in 0..est.dim() {
        for j in (i + 1)..est.dim() {
            match (est.edge(i, j), truth.edge(i, j)) {
                (true, true) => tp += 1,
                (false, false) => tn += 1,
                (true, false) => fp += 1,
                (false, true) => fn_ += 1,
            }
        }
    }
    let ratio = |num: usize, den: usize, empty: f64| {
        if den == 0 {
            empty
        } else {
            num as f64 / den as f64
        }
    };
    let total = tp + tn + fp + fn_;
    Ok(RecoveryReport {
        side,
        tp,
        tn,
        fp,
        fn_,
        precision: ratio(tp, tp + fp, 1.0),
        recall: ratio(tp, tp + fn_, 1.0),
        accuracy: ratio(tp + tn, total, 1.0),
        tpr: ratio(tp, tp + fn_, 1.0),
        fpr: ratio(fp, tn + fp, 0.0),
    })
}

/// Per-side BIC: `-2ℓ + k·log(N_eff)` with the joint unpenalized
/// log-likelihood `ℓ = -p·tr(Ψ T̂) - n·tr(Θ Ŝ) + Σ log(λ1_i + λ2_j)`
/// and `k` the count of nonzero upper-triangle off-diagonals of the
/// side's matrix. Effective sample sizes default to `m·n` for the `Ψ`
/// side and `m·p` for `Θ`.
pub fn bic(
    model: &KsModel,
    cov: &CovPair,
    n_eff_psi: usize,
    n_eff_theta: usize,
) -> Result<(f64, f64)> {
    if n_eff_psi == 0 || n_eff_theta == 0 {
        return Err(Error::Config("effective sample sizes must be >= 1".into()));
    }
    let n = model.n() as f64;
    let p = model.p() as f64;
    let eig_psi = sym_eigen(&model.psi)?;
    let eig_theta = sym_eigen(&model.theta)?;
    let k = ks_logdet(&eig_psi.values, &eig_theta.values)?;
    let ll = -p * model.psi.trace_product(&cov.t_hat)? - n * model.theta.trace_product(&cov.s_hat)?
        + k;
    let k_psi = model.psi.nonzero_upper_offdiag() as f64;
    let k_theta = model.theta.nonzero_upper_offdiag() as f64;
    Ok((
        -2.0 * ll + k_psi * (n_eff_psi as f64).ln(),
        -2.0 * ll + k_theta * (n_eff_theta as f64).ln(),
    ))
}

/// Options controlling [`beta_sweep`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepOptions {
    /// Start each grid point from the previous point's model instead of
    /// the identity. Serialises the sweep.
    pub warm_start: bool,
    pub mode: BinarizeMode,
    /// Replicate count behind the covariance estimate, for BIC sample
    /// sizes.
    pub m_replicates: usize,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            warm_start: false,
            mode: BinarizeMode::AnyNonzero,
            m_replicates: 1,
        }
    }
}

/// One `(β1, β2)` grid point of a sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepRow {
    pub beta1: f64,
    pub beta2: f64,
    pub converged: Option<bool>,
    pub iterations: Option<usize>,
    pub objective: Option<f64>,
    pub bic_psi: Option<f64>,
    pub bic_theta: Option<f64>,
    pub report_psi: Option<RecoveryReport>,
    pub report_theta: Option<RecoveryReport>,
    /// Identity or warm, recorded per row.
    pub init: String,
    pub error: Option<String>,
}

/// Fit every `(β1, β2)` pair in grid-major order (β1 outer) and score
/// against the optional truth. Individual failures are recorded in
/// their row and the sweep continues.
pub fn beta_sweep(
    cov: &CovPair,
    beta1_grid: &[f64],
    beta2_grid: &[f64],
    cfg: &SolverConfig,
    truth: Option<&KsModel>,
    opts: &SweepOptions,
) -> Result<Vec<SweepRow>> {
    if beta1_grid.is_empty() || beta2_grid.is_empty() {
        return Err(Error::Config("sweep grids must be nonempty".into()));
    }
    let points: Vec<(f64, f64)> = beta1_grid
        .iter()
        .flat_map(|b1| beta2_grid.iter().map(move |b2| (*b1, *b2)))
        .collect();
    let truth_adj = truth.map(|t| {
        (
            binarize(&t.psi, cfg.zero_threshold, opts.mode),
            binarize(&t.theta, cfg.zero_threshold, opts.mode),
        )
    });
    let run_point =
        |b1: f64, b2: f64, init: Option<KsModel>, init_label: &str| -> (SweepRow, Option<KsModel>) {
            let mut point_cfg = cfg.clone();
            point_cfg.beta1 = b1;
            point_cfg.beta2 = b2;
            let mut row = SweepRow {
                beta1: b1,
                beta2: b2,
                converged: None,
                iterations: None,
                objective: None,
                bic_psi: None,
                bic_theta: None,
                report_psi: None,
                report_theta: None,
                init: init_label.to_string(),
                error: None,
            };
            match fit(cov, &point_cfg, init) {
                Ok(res) => {
                    row.converged = Some(res.converged);
                    row.iterations = Some(res.iterations_run);
                    row.objective = Some(res.objective);
                    let n_eff_psi = opts.m_replicates * res.model.n();
                    let n_eff_theta = opts.m_replicates * res.model.p();
                    if let Ok((bp, bt)) = bic(&res.model, cov, n_eff_psi, n_eff_theta) {
                        row.bic_psi = Some(bp);
                        row.bic_theta = Some(bt);
                    }
                    if let Some((t_psi, t_theta)) = &truth_adj {
                        let est_psi =
                            binarize(&res.model.psi, point_cfg.zero_threshold, opts.mode);
                        let est_theta =
                            binarize(&res.model.theta, point_cfg.zero_threshold, opts.mode);
                        row.report_psi = recovery_metrics(&est_psi, t_psi, Side::Psi).ok();
                        row.report_theta = recovery_metrics(&est_theta, t_theta, Side::Theta).ok();
                    }
                    (row, Some(res.model))
                }
                Err(e) => {
                    row.error = Some(e.to_string());
                    (row, None)
                }
            }
        };
    if opts.warm_start {
        let mut rows = Vec::with_capacity(points.len());
        let mut carry: Option<KsModel> = None;
        for (b1, b2) in points {
            let label = if carry.is_some() { "warm" } else { "identity" };
            let (row, model) = run_point(b1, b2, carry.take(), label);
            if let Some(m) = model {
                carry = Some(m);
            }
            rows.push(row);
        }
        Ok(rows)
    } else {
        Ok(par::map_indexed(points.len(), |k| {
            let (b1, b2) = points[k];
            run_point(b1, b2, None, "identity").0
        }))
    }
}

/// Run a single fit and score it, the one-point analogue of a sweep row.
pub fn fit_and_score(
    cov: &CovPair,
    cfg: &SolverConfig,
    truth: &KsModel,
    mode: BinarizeMode,
) -> Result<(FitResult, RecoveryReport, RecoveryReport)> {
    let res = fit(cov, cfg, None)?;
    let truth_psi = binarize(&truth.psi, cfg.zero_threshold, mode);
    let truth_theta = binarize(&truth.theta, cfg.zero_threshold, mode);
    let est_psi = binarize(&res.model.psi, cfg.zero_threshold, mode);
    let est_theta = binarize(&res.model.theta, cfg.zero_threshold, mode);
    let rp = recovery_metrics(&est_psi, &truth_psi, Side::Psi)?;
    let rt = recovery_metrics(&est_theta, &truth_theta, Side::Theta)?;
    let _ = objective_value(&res.model, cov, cfg)?;
    Ok((res, rp, rt))
}
