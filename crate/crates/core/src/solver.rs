//! Flip-flop estimation of the Kronecker-sum factors.
//!
//! Each outer iteration sweeps the columns of `Ψ` and then of `Θ`. For
//! column `i` the quadratic coefficient matrix `A` is assembled from
//! the current eigendecompositions alone, the penalized column problem
//! is solved by cyclic coordinate descent with soft thresholding, and
//! the eigendecomposition of the updated factor is refreshed before
//! the next column. No object of size `n·p × n·p` is ever formed; all
//! working storage is `O(n² + p² + np)`.

use crate::covariance::CovPair;
use crate::error::{Error, Result};
use crate::linalg::{
    dot, ks_logdet, min_pair_sum_positive, sym_eigen, DenseMatrix, EigenDecomposition, KsModel,
    SymMatrix,
};
use crate::par;
use serde::{Deserialize, Serialize};

/// Penalties, iteration caps and tolerances for [`fit`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// l1 penalty on `Ψ`.
    pub beta1: f64,
    /// l1 penalty on `Θ`.
    pub beta2: f64,
    /// Outer flip-flop iteration cap.
    pub max_iter: usize,
    /// Outer stopping tolerance on parameter deltas.
    pub tol: f64,
    /// Coordinate-descent sweep cap per column solve.
    pub lasso_max_iter: usize,
    /// Coordinate-descent stopping tolerance (max coordinate change).
    pub lasso_tol: f64,
    /// Entries with `|v| <= zero_threshold` are reported as structural
    /// zeros when binarizing.
    pub zero_threshold: f64,
    /// Minimal admissible eigenvalue pair sum of the Kronecker sum.
    pub diag_floor: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            beta1: 0.01,
            beta2: 0.01,
            max_iter: 100,
            tol: 1e-6,
            lasso_max_iter: 200,
            lasso_tol: 1e-8,
            zero_threshold: 1e-8,
            diag_floor: 1e-8,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let check = |name: &str, v: f64, pos: bool| -> Result<()> {
            if !v.is_finite() || v < 0.0 || (pos && v == 0.0) {
                return Err(Error::Config(format!(
                    "{name} must be {} and finite, got {v}",
                    if pos { "positive" } else { "nonnegative" }
                )));
            }
            Ok(())
        };
        check("beta1", self.beta1, false)?;
        check("beta2", self.beta2, false)?;
        check("tol", self.tol, true)?;
        if self.tol >= 1.0 {
            return Err(Error::Config(format!("tol must be < 1, got {}", self.tol)));
        }
        check("lasso_tol", self.lasso_tol, true)?;
        check("zero_threshold", self.zero_threshold, false)?;
        check("diag_floor", self.diag_floor, true)?;
        if self.max_iter == 0 || self.lasso_max_iter == 0 {
            return Err(Error::Config("iteration caps must be >= 1".into()));
        }
        Ok(())
    }
}

/// Outcome of [`fit`].
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub model: KsModel,
    pub iterations_run: usize,
    pub converged: bool,
    /// Squared Frobenius deltas `(ΔΨ, ΔΘ)` per outer iteration.
    pub delta_history: Vec<(f64, f64)>,
    pub objective: f64,
    pub warnings: Vec<String>,
}

/// Solution of one penalized column problem.
#[derive(Debug, Clone, PartialEq)]
pub struct LassoOutcome {
    pub coefficients: Vec<f64>,
    pub converged: bool,
    pub sweeps: usize,
}

/// Quadratic coefficient matrix for the column-`i` subproblem,
/// assembled from eigendecompositions only.
///
/// Entry `(l, k)` (compressed indices skipping `i`) equals
/// `Σ_j (ψ_ii + λ2_j)⁻¹ Σ_q u_{l q} u_{k q} / (λ1_q + λ2_j)`; the `j`
/// sum is folded into per-eigenvalue weights first, which makes the
/// assembly `O(n³ + np)` per column and keeps `A` exactly symmetric.
pub fn build_a(
    i: usize,
    eig_psi: &EigenDecomposition,
    lambda2: &[f64],
    psi_ii: f64,
) -> Result<DenseMatrix> {
    let n = eig_psi.dim();
    let p = lambda2.len();
    if n < 2 {
        return Err(Error::Dimension("build_a needs dimension >= 2".into()));
    }
    if i >= n {
        return Err(Error::Dimension(format!("column index {i} out of range for n = {n}")));
    }
    if p == 0 {
        return Err(Error::Dimension("lambda2 must be nonempty".into()));
    }
    let mut w = Vec::with_capacity(p);
    for (j, l2) in lambda2.iter().enumerate() {
        let den = psi_ii + l2;
        if den <= 0.0 {
            return Err(Error::PositiveDefiniteness(format!(
                "psi[{i},{i}] + lambda2[{j}] = {den:e} <= 0"
            )));
        }
        w.push(1.0 / den);
    }
    let lambda1 = &eig_psi.values;
    for (q, l1) in lambda1.iter().enumerate() {
        for (j, l2) in lambda2.iter().enumerate() {
            if l1 + l2 <= 0.0 {
                return Err(Error::PositiveDefiniteness(format!(
                    "lambda1[{q}] + lambda2[{j}] = {:e} <= 0",
                    l1 + l2
                )));
            }
        }
    }
    // per-eigenvalue weights: s_q = Σ_j w_j / (λ1_q + λ2_j)
    let s: Vec<f64> = par::map_indexed(n, |q| {
        let l1 = lambda1[q];
        lambda2
            .iter()
            .zip(&w)
            .map(|(l2, wj)| wj / (l1 + l2))
            .sum()
    });
    let d = n - 1;
    let expand = |r: usize| if r < i { r } else { r + 1 };
    // rows of U with row i dropped, pre-scaled by s
    let mut scaled = DenseMatrix::zeros(d, n);
    for r in 0..d {
        let urow = eig_psi.vectors.row(expand(r));
        let out = scaled.row_mut(r);
        for q in 0..n {
            out[q] = urow[q] * s[q];
        }
    }
    let mut a = vec![0.0; d * d];
    par::for_each_chunk_mut(&mut a, d, |r, row| {
        let srow = scaled.row(r);
        for (c, slot) in row.iter_mut().enumerate().skip(r) {
            *slot = dot(srow, eig_psi.vectors.row(expand(c)));
        }
    });
    for r in 0..d {
        for c in (r + 1)..d {
            a[c * d + r] = a[r * d + c];
        }
    }
    DenseMatrix::new(d, d, a)
}

#[inline]
fn soft_threshold(z: f64, t: f64) -> f64 {
    if z > t {
        z - t
    } else if z < -t {
        z + t
    } else {
        0.0
    }
}

/// Minimise `½ xᵀÃx + p_dim·t_colᵀx + beta·‖x‖₁` with
/// `Ã = ½(A + Aᵀ)`, by cyclic coordinate descent with soft
/// thresholding, warm-started from `warm` when given.
pub fn lasso_column_warm(
    a: &DenseMatrix,
    t_col: &[f64],
    p_dim: usize,
    beta: f64,
    cfg: &SolverConfig,
    warm: Option<&[f64]>,
) -> Result<LassoOutcome> {
    let d = a.rows();
    if a.cols() != d || t_col.len() != d {
        return Err(Error::Dimension(format!(
            "lasso shapes disagree: A is {}x{}, t has {}",
            a.rows(),
            a.cols(),
            t_col.len()
        )));
    }
    if !beta.is_finite() || beta < 0.0 {
        return Err(Error::Config(format!("beta must be nonnegative, got {beta}")));
    }
    if t_col.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("lasso linear term".into()));
    }
    let mut sym = vec![0.0; d * d];
    for r in 0..d {
        for c in r..d {
            let v = 0.5 * (a.get(r, c) + a.get(c, r));
            sym[r * d + c] = v;
            sym[c * d + r] = v;
        }
    }
    let scale = p_dim as f64;
    let mut x = match warm {
        Some(w) => {
            if w.len() != d {
                return Err(Error::Dimension("warm start length mismatch".into()));
            }
            w.to_vec()
        }
        None => vec![0.0; d],
    };
    // gradient of the smooth part: g = Ãx + p·t
    let mut g: Vec<f64> = (0..d).map(|k| scale * t_col[k]).collect();
    if x.iter().any(|v| *v != 0.0) {
        for k in 0..d {
            if x[k] != 0.0 {
                let row = &sym[k * d..(k + 1) * d];
                let xk = x[k];
                for (gl, rl) in g.iter_mut().zip(row) {
                    *gl += xk * rl;
                }
            }
        }
    }
    let mut converged = false;
    let mut sweeps = 0;
    while sweeps < cfg.lasso_max_iter {
        sweeps += 1;
        let mut max_change = 0.0_f64;
        for k in 0..d {
            let akk = sym[k * d + k];
            if akk <= 0.0 {
                return Err(Error::Domain(format!(
                    "nonpositive curvature {akk:e} at lasso coordinate {k}"
                )));
            }
            let partial = g[k] - akk * x[k];
            let candidate = soft_threshold(-partial, beta) / akk;
            let delta = candidate - x[k];
            if delta != 0.0 {
                let row = &sym[k * d..(k + 1) * d];
                for (gl, rl) in g.iter_mut().zip(row) {
                    *gl += delta * rl;
                }
                x[k] = candidate;
                max_change = max_change.max(delta.abs());
            }
        }
        if max_change < cfg.lasso_tol {
            converged = true;
            break;
        }
    }
    if !converged {
        log::warn!("lasso column solve hit the sweep cap ({})", cfg.lasso_max_iter);
    }
    Ok(LassoOutcome {
        coefficients: x,
        converged,
        sweeps,
    })
}

/// [`lasso_column_warm`] started from zero.
pub fn lasso_column(
    a: &DenseMatrix,
    t_col: &[f64],
    p_dim: usize,
    beta: f64,
    cfg: &SolverConfig,
) -> Result<LassoOutcome> {
    lasso_column_warm(a, t_col, p_dim, beta, cfg, None)
}

#[derive(Debug, Default, Clone)]
struct PassStats {
    lasso_nonconverged: usize,
    backtracks: usize,
}

struct ColumnError {
    column: usize,
    source: Error,
}

/// One full column sweep over `mat`, updating `eig` alongside.
///
/// `other_lambda` is the fixed side's eigenvalue vector; its length is
/// the trace multiplier of the linear term.
fn column_pass(
    mat: &mut SymMatrix,
    eig: &mut EigenDecomposition,
    cov: &SymMatrix,
    other_lambda: &[f64],
    beta: f64,
    cfg: &SolverConfig,
    stats: &mut PassStats,
) -> std::result::Result<(), ColumnError> {
    let dim = mat.dim();
    if dim < 2 {
        return Ok(());
    }
    let other_min = other_lambda.iter().copied().fold(f64::INFINITY, f64::min);
    let p_dim = other_lambda.len();
    for i in 0..dim {
        let fail = |source: Error| ColumnError { column: i, source };
        let a = build_a(i, eig, other_lambda, mat.get(i, i)).map_err(fail)?;
        let expand = |r: usize| if r < i { r } else { r + 1 };
        let d = dim - 1;
        let t_col: Vec<f64> = (0..d).map(|r| cov.get(expand(r), i)).collect();
        let current: Vec<f64> = (0..d).map(|r| mat.get(expand(r), i)).collect();
        let sol = lasso_column_warm(&a, &t_col, p_dim, beta, cfg, Some(&current))
            .map_err(fail)?;
        if !sol.converged {
            stats.lasso_nonconverged += 1;
        }
        if sol.coefficients == current {
            // column unchanged: decomposition still valid
            continue;
        }
        // write the new column, backtracking towards the previous one
        // if the Kronecker sum would lose positive definiteness
        let mut factor = 1.0_f64;
        let mut accepted = false;
        for attempt in 0..=20 {
            for r in 0..d {
                let v = if attempt == 0 {
                    sol.coefficients[r]
                } else {
                    current[r] + (sol.coefficients[r] - current[r]) * factor
                };
                mat.set_sym(expand(r), i, v);
            }
            let cand = sym_eigen(mat).map_err(fail)?;
            if cand.values[0] + other_min > cfg.diag_floor {
                *eig = cand;
                accepted = true;
                if attempt > 0 {
                    stats.backtracks += 1;
                }
                break;
            }
            factor *= 0.5;
        }
        if !accepted {
            for r in 0..d {
                mat.set_sym(expand(r), i, current[r]);
            }
            return Err(fail(Error::PositiveDefiniteness(format!(
                "column update at {i} breaks positive definiteness even after 20 halvings"
            ))));
        }
    }
    Ok(())
}

/// One `Ψ` sweep against `t_hat` with the fixed-side eigenvalues
/// `lambda2`, using `cfg.beta1`. Diagonal entries are not touched.
pub fn update_psi_pass(
    psi: &SymMatrix,
    t_hat: &SymMatrix,
    lambda2: &[f64],
    cfg: &SolverConfig,
) -> Result<SymMatrix> {
    cfg.validate()?;
    if psi.dim() != t_hat.dim() {
        return Err(Error::Dimension(format!(
            "psi is {}x{} but t_hat is {}x{}",
            psi.dim(),
            psi.dim(),
            t_hat.dim(),
            t_hat.dim()
        )));
    }
    let mut mat = psi.clone();
    let mut eig = sym_eigen(&mat)?;
    let mut stats = PassStats::default();
    column_pass(&mut mat, &mut eig, t_hat, lambda2, cfg.beta1, cfg, &mut stats).map_err(|e| {
        Error::SolverAbort {
            iteration: 1,
            column: e.column,
            detail: e.source.to_string(),
        }
    })?;
    Ok(mat)
}

/// Alternate `Ψ` and `Θ` column sweeps until the stop rule fires or the
/// iteration cap is reached.
///
/// Stop rule: for `τ >= 3`, the maximum of `ΔΨ + ΔΘ` over the last
/// three iterations drops below `cfg.tol`.
pub fn fit(data_cov: &CovPair, cfg: &SolverConfig, init: Option<KsModel>) -> Result<FitResult> {
    cfg.validate()?;
    let n = data_cov.t_hat.dim();
    let p = data_cov.s_hat.dim();
    let model = match init {
        Some(m) => {
            if m.n() != n || m.p() != p {
                return Err(Error::Dimension(format!(
                    "init model is ({}, {}), covariances are ({n}, {p})",
                    m.n(),
                    m.p()
                )));
            }
            m
        }
        None => KsModel::identity(n, p),
    };
    let mut psi = model.psi;
    let mut theta = model.theta;
    let mut eig_psi = sym_eigen(&psi)?;
    let mut eig_theta = sym_eigen(&theta)?;
    if eig_psi.values[0] + eig_theta.values[0] <= cfg.diag_floor {
        return Err(Error::PositiveDefiniteness(format!(
            "initial model: min eigenvalue pair sum {:e} <= diag_floor",
            eig_psi.values[0] + eig_theta.values[0]
        )));
    }
    let mut stats = PassStats::default();
    let mut delta_history: Vec<(f64, f64)> = Vec::new();
    let mut converged = false;
    let mut iterations_run = 0;
    for tau in 1..=cfg.max_iter {
        let abort = |e: ColumnError| Error::SolverAbort {
            iteration: tau,
            column: e.column,
            detail: e.source.to_string(),
        };
        let prev_psi = psi.clone();
        let prev_theta = theta.clone();
        column_pass(
            &mut psi,
            &mut eig_psi,
            &data_cov.t_hat,
            &eig_theta.values,
            cfg.beta1,
            cfg,
            &mut stats,
        )
        .map_err(abort)?;
        column_pass(
            &mut theta,
            &mut eig_theta,
            &data_cov.s_hat,
            &eig_psi.values,
            cfg.beta2,
            cfg,
            &mut stats,
        )
        .map_err(abort)?;
        let d_psi = psi.frobenius_distance_sq(&prev_psi);
        let d_theta = theta.frobenius_distance_sq(&prev_theta);
        delta_history.push((d_psi, d_theta));
        iterations_run = tau;
        if tau >= 3 {
            let recent = delta_history[tau - 3..tau]
                .iter()
                .map(|(a, b)| a + b)
                .fold(f64::NEG_INFINITY, f64::max);
            if recent < cfg.tol {
                converged = true;
                break;
            }
        }
    }
    let model = KsModel::new(psi, theta);
    let objective = objective_value(&model, data_cov, cfg)?;
    let mut warnings = Vec::new();
    if stats.lasso_nonconverged > 0 {
        warnings.push(format!(
            "{} column solves hit the coordinate-descent sweep cap",
            stats.lasso_nonconverged
        ));
    }
    if stats.backtracks > 0 {
        warnings.push(format!(
            "{} column updates were backtracked to preserve positive definiteness",
            stats.backtracks
        ));
    }
    Ok(FitResult {
        model,
        iterations_run,
        converged,
        delta_history,
        objective,
        warnings,
    })
}

/// Penalized objective evaluated through the factor eigenvalues:
/// `n·tr(Θ Ŝ) + p·tr(Ψ T̂) − Σ_{ij} log(λ1_i + λ2_j)
///  + β1‖Ψ‖₁ + β2‖Θ‖₁`.
pub fn objective_value(model: &KsModel, cov: &CovPair, cfg: &SolverConfig) -> Result<f64> {
    let n = model.n();
    let p = model.p();
    if cov.t_hat.dim() != n || cov.s_hat.dim() != p {
        return Err(Error::Dimension(format!(
            "model is ({n}, {p}) but covariances are ({}, {})",
            cov.t_hat.dim(),
            cov.s_hat.dim()
        )));
    }
    let eig_psi = sym_eigen(&model.psi)?;
    let eig_theta = sym_eigen(&model.theta)?;
    min_pair_sum_positive(&eig_psi.values, &eig_theta.values)?;
    let k = ks_logdet(&eig_psi.values, &eig_theta.values)?;
    Ok(n as f64 * model.theta.trace_product(&cov.s_hat)?
        + p as f64 * model.psi.trace_product(&cov.t_hat)?
        - k
        + cfg.beta1 * model.psi.entrywise_l1()
        + cfg.beta2 * model.theta.entrywise_l1())
}
