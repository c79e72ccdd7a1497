//! Empirical and rank-based covariance estimation along both data axes.
//!
//! The data matrix `Y` is `p × n`: features along rows, samples along
//! columns. The sample-side estimate `T̂` is `n × n` and pairs with `Ψ`;
//! the feature-side estimate `Ŝ` is `p × p` and pairs with `Θ`. The
//! rank statistics correlate columns of `Y` for `T̂` and rows of `Y`
//! for `Ŝ`, each vector ranked within itself (mid-ranks on ties), and
//! are mapped to covariances by the sine transforms
//! `sin(π/2 · τ̂)` and `2 sin(π/6 · ρ̂)`.

use crate::data::{DataKind, DataStack};
use crate::error::{Error, Result};
use crate::linalg::{DenseMatrix, SymMatrix};
use crate::par;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Which covariance estimator feeds the solver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CovEstimatorKind {
    Empirical,
    Kendall,
    Spearman,
}

impl std::fmt::Display for CovEstimatorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CovEstimatorKind::Empirical => write!(f, "empirical"),
            CovEstimatorKind::Kendall => write!(f, "kendall"),
            CovEstimatorKind::Spearman => write!(f, "spearman"),
        }
    }
}

/// Sample-side and feature-side covariance estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct CovPair {
    /// `n × n`, pairs with `Ψ`.
    pub t_hat: SymMatrix,
    /// `p × p`, pairs with `Θ`.
    pub s_hat: SymMatrix,
}

/// A rank vector had zero variance (constant input); the affected
/// correlation entries were set to 0.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankWarning {
    pub replicate: usize,
    /// `"sample"` for T̂-side vectors (columns of Y), `"feature"` for
    /// Ŝ-side vectors (rows of Y).
    pub side: String,
    pub vector_index: usize,
}

impl std::fmt::Display for RankWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "replicate {}: constant {} vector {} has zero rank variance; correlations set to 0",
            self.replicate, self.side, self.vector_index
        )
    }
}

/// Subtract the grand (scalar) mean from every entry.
pub fn center(y: &DenseMatrix) -> DenseMatrix {
    let mu = y.mean();
    let mut out = y.clone();
    for v in out.as_mut_slice() {
        *v -= mu;
    }
    out
}

/// Centering for the empirical estimator: with several replicates the
/// entrywise mean matrix across replicates is removed; a single
/// replicate loses its scalar grand mean.
pub fn center_stack(stack: &DataStack) -> DataStack {
    if stack.m() == 1 {
        return DataStack::new(vec![center(stack.replicate(0))], stack.kind())
            .expect("same shape");
    }
    let (p, n) = (stack.p(), stack.n());
    let mut mean = vec![0.0; p * n];
    for rep in stack.replicates() {
        for (acc, v) in mean.iter_mut().zip(rep.as_slice()) {
            *acc += v;
        }
    }
    let inv_m = 1.0 / stack.m() as f64;
    for v in &mut mean {
        *v *= inv_m;
    }
    let centered = stack
        .replicates()
        .iter()
        .map(|rep| {
            let mut out = rep.clone();
            for (v, mu) in out.as_mut_slice().iter_mut().zip(&mean) {
                *v -= mu;
            }
            out
        })
        .collect();
    DataStack::new(centered, stack.kind()).expect("same shape")
}

/// Empirical covariances of a centered `p × n` matrix:
/// `T̂ = YᵀY / p` and `Ŝ = YYᵀ / n`.
pub fn empirical_cov_pair(y: &DenseMatrix) -> CovPair {
    let p = y.rows() as f64;
    let n = y.cols() as f64;
    let yt = y.transpose();
    let mut t = yt.mul_transpose(&yt).expect("shape");
    for v in t.as_mut_slice() {
        *v /= p;
    }
    let mut s = y.mul_transpose(y).expect("shape");
    for v in s.as_mut_slice() {
        *v /= n;
    }
    CovPair {
        t_hat: crate::linalg::dense_to_sym(&t).expect("square"),
        s_hat: crate::linalg::dense_to_sym(&s).expect("square"),
    }
}

/// Kendall correlation matrix of the rows of `vecs` (each row one
/// vector of length `len`), diagonal forced to 1. Ties contribute 0
/// through the sign function; the denominator stays `len·(len-1)/2`.
fn kendall_of_rows(vecs: &DenseMatrix) -> SymMatrix {
    let count = vecs.rows();
    let len = vecs.cols();
    let norm = 2.0 / (len as f64 * (len as f64 - 1.0));
    let mut out = vec![0.0; count * count];
    par::for_each_chunk_mut(&mut out, count, |a, row| {
        let va = vecs.row(a);
        row[a] = 1.0;
        for b in (a + 1)..count {
            let vb = vecs.row(b);
            let mut sum = 0i64;
            for i in 0..len {
                for j in (i + 1)..len {
                    let prod = (va[i] - va[j]) * (vb[i] - vb[j]);
                    if prod > 0.0 {
                        sum += 1;
                    } else if prod < 0.0 {
                        sum -= 1;
                    }
                }
            }
            row[b] = norm * sum as f64;
        }
    });
    for a in 0..count {
        for b in (a + 1)..count {
            out[b * count + a] = out[a * count + b];
        }
    }
    SymMatrix::new(count, out, crate::linalg::Symmetrize::Strict).expect("symmetric by mirror")
}

/// Mid-ranks (1-based, ties averaged) of one vector.
fn midranks(v: &[f64]) -> Vec<f64> {
    let len = v.len();
    let mut order: Vec<usize> = (0..len).collect();
    order.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut ranks = vec![0.0; len];
    let mut start = 0;
    while start < len {
        let mut stop = start + 1;
        while stop < len && v[order[stop]] == v[order[start]] {
            stop += 1;
        }
        // positions start+1 ..= stop, averaged
        let r = (start + stop + 1) as f64 / 2.0;
        for &idx in &order[start..stop] {
            ranks[idx] = r;
        }
        start = stop;
    }
    ranks
}

/// Spearman correlation matrix of the rows of `vecs`, with the fixed
/// rank mean `(len+1)/2`. Zero-variance rows yield 0 entries and a
/// warning per affected vector.
fn spearman_of_rows(vecs: &DenseMatrix, side: &str, replicate: usize) -> (SymMatrix, Vec<RankWarning>) {
    let count = vecs.rows();
    let len = vecs.cols();
    let c = (len as f64 + 1.0) / 2.0;
    let devs: Vec<Vec<f64>> = par::map_indexed(count, |a| {
        midranks(vecs.row(a)).into_iter().map(|r| r - c).collect()
    });
    let sumsq: Vec<f64> = devs.iter().map(|d| d.iter().map(|x| x * x).sum()).collect();
    let mut warnings = Vec::new();
    for (idx, ss) in sumsq.iter().enumerate() {
        if *ss == 0.0 {
            warnings.push(RankWarning {
                replicate,
                side: side.to_string(),
                vector_index: idx,
            });
        }
    }
    let mut out = vec![0.0; count * count];
    par::for_each_chunk_mut(&mut out, count, |a, row| {
        row[a] = 1.0;
        for b in (a + 1)..count {
            row[b] = if sumsq[a] == 0.0 || sumsq[b] == 0.0 {
                0.0
            } else {
                crate::linalg::dot(&devs[a], &devs[b]) / (sumsq[a] * sumsq[b]).sqrt()
            };
        }
    });
    for a in 0..count {
        for b in (a + 1)..count {
            out[b * count + a] = out[a * count + b];
        }
    }
    let m = SymMatrix::new(count, out, crate::linalg::Symmetrize::Strict).expect("mirrored");
    (m, warnings)
}

/// Kendall's tau between all column pairs of `y` (`n × n`, sample side).
pub fn kendall_tau_rows(y: &DenseMatrix) -> Result<SymMatrix> {
    if y.rows() < 2 {
        return Err(Error::Dimension(format!(
            "row-wise Kendall needs p >= 2 rows, got {}",
            y.rows()
        )));
    }
    Ok(kendall_of_rows(&y.transpose()))
}

/// Kendall's tau between all row pairs of `y` (`p × p`, feature side).
pub fn kendall_tau_cols(y: &DenseMatrix) -> Result<SymMatrix> {
    if y.cols() < 2 {
        return Err(Error::Dimension(format!(
            "column-wise Kendall needs n >= 2 columns, got {}",
            y.cols()
        )));
    }
    Ok(kendall_of_rows(y))
}

/// Spearman's rho between all column pairs of `y` (`n × n`).
pub fn spearman_rho_rows(y: &DenseMatrix) -> Result<SymMatrix> {
    Ok(spearman_rho_rows_detailed(y, 0)?.0)
}

pub fn spearman_rho_rows_detailed(
    y: &DenseMatrix,
    replicate: usize,
) -> Result<(SymMatrix, Vec<RankWarning>)> {
    if y.rows() < 2 {
        return Err(Error::Dimension(format!(
            "row-wise Spearman needs p >= 2 rows, got {}",
            y.rows()
        )));
    }
    Ok(spearman_of_rows(&y.transpose(), "sample", replicate))
}

/// Spearman's rho between all row pairs of `y` (`p × p`).
pub fn spearman_rho_cols(y: &DenseMatrix) -> Result<SymMatrix> {
    Ok(spearman_rho_cols_detailed(y, 0)?.0)
}

pub fn spearman_rho_cols_detailed(
    y: &DenseMatrix,
    replicate: usize,
) -> Result<(SymMatrix, Vec<RankWarning>)> {
    if y.cols() < 2 {
        return Err(Error::Dimension(format!(
            "column-wise Spearman needs n >= 2 columns, got {}",
            y.cols()
        )));
    }
    Ok(spearman_of_rows(y, "feature", replicate))
}

/// Map a rank-correlation matrix to a covariance estimate:
/// `sin(π/2 · τ̂)` for Kendall, `2 sin(π/6 · ρ̂)` for Spearman.
/// The diagonal is 1 by definition.
pub fn sine_transform(r: &SymMatrix, kind: CovEstimatorKind) -> Result<SymMatrix> {
    let f: fn(f64) -> f64 = match kind {
        CovEstimatorKind::Kendall => |t| (PI / 2.0 * t).sin(),
        CovEstimatorKind::Spearman => |t| 2.0 * (PI / 6.0 * t).sin(),
        CovEstimatorKind::Empirical => {
            return Err(Error::Estimator(
                "sine transform is defined for rank-based estimators only".into(),
            ))
        }
    };
    let dim = r.dim();
    let mut out = SymMatrix::zeros(dim);
    for i in 0..dim {
        out.set_sym(i, i, 1.0);
        for j in (i + 1)..dim {
            let v = r.get(i, j);
            if v.abs() > 1.0 + 1e-12 {
                return Err(Error::Domain(format!(
                    "rank correlation entry ({i}, {j}) = {v} outside [-1, 1]"
                )));
            }
            out.set_sym(i, j, f(v.clamp(-1.0, 1.0)));
        }
    }
    Ok(out)
}

fn accumulate(acc: &mut SymMatrix, m: &SymMatrix) {
    for i in 0..acc.dim() {
        for j in i..acc.dim() {
            acc.set_sym(i, j, acc.get(i, j) + m.get(i, j));
        }
    }
}

fn scale(acc: &mut SymMatrix, f: f64) {
    for i in 0..acc.dim() {
        for j in i..acc.dim() {
            acc.set_sym(i, j, acc.get(i, j) * f);
        }
    }
}

/// Per-replicate estimates averaged arithmetically over replicates.
pub fn estimate_cov_pair(data: &DataStack, kind: CovEstimatorKind) -> Result<CovPair> {
    Ok(estimate_cov_pair_detailed(data, kind)?.0)
}

/// Same as [`estimate_cov_pair`] but also surfaces rank warnings.
pub fn estimate_cov_pair_detailed(
    data: &DataStack,
    kind: CovEstimatorKind,
) -> Result<(CovPair, Vec<RankWarning>)> {
    let m = data.m();
    let per_rep: Vec<Result<(CovPair, Vec<RankWarning>)>> = match kind {
        CovEstimatorKind::Empirical => {
            let centered = center_stack(data);
            par::map_indexed(m, |k| {
                Ok((empirical_cov_pair(centered.replicate(k)), Vec::new()))
            })
        }
        CovEstimatorKind::Kendall => par::map_indexed(m, |k| {
            let y = data.replicate(k);
            let t = sine_transform(&kendall_tau_rows(y)?, kind)?;
            let s = sine_transform(&kendall_tau_cols(y)?, kind)?;
            Ok((CovPair { t_hat: t, s_hat: s }, Vec::new()))
        }),
        CovEstimatorKind::Spearman => par::map_indexed(m, |k| {
            let y = data.replicate(k);
            let (rho_t, mut w_t) = spearman_rho_rows_detailed(y, k)?;
            let (rho_s, w_s) = spearman_rho_cols_detailed(y, k)?;
            w_t.extend(w_s);
            let t = sine_transform(&rho_t, kind)?;
            let s = sine_transform(&rho_s, kind)?;
            Ok((CovPair { t_hat: t, s_hat: s }, w_t))
        }),
    };
    let mut t_acc = SymMatrix::zeros(data.n());
    let mut s_acc = SymMatrix::zeros(data.p());
    let mut warnings = Vec::new();
    for res in per_rep {
        let (pair, w) = res?;
        accumulate(&mut t_acc, &pair.t_hat);
        accumulate(&mut s_acc, &pair.s_hat);
        warnings.extend(w);
    }
    let inv_m = 1.0 / m as f64;
    scale(&mut t_acc, inv_m);
    scale(&mut s_acc, inv_m);
    Ok((
        CovPair {
            t_hat: t_acc,
            s_hat: s_acc,
        },
        warnings,
    ))
}

/// Convenience: the estimator implied by the data kind when the caller
/// does not choose (Gaussian data centres + empirical, counts rank).
pub fn default_estimator(kind: DataKind) -> CovEstimatorKind {
    match kind {
        DataKind::Gaussian => CovEstimatorKind::Empirical,
        DataKind::Counts => CovEstimatorKind::Kendall,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn mat(rows: usize, cols: usize, v: Vec<f64>) -> DenseMatrix {
        DenseMatrix::new(rows, cols, v).unwrap()
    }

    #[test]
    fn center_constant_matrix_is_zero() {
        let y = mat(2, 2, vec![3.0; 4]);
        let c = center(&y);
        assert!(c.as_slice().iter().all(|v| *v == 0.0));
        let z = mat(2, 2, vec![0.0; 4]);
        assert_eq!(center(&z), z);
    }

    #[test]
    fn center_single_replicate_grand_mean() {
        let y = mat(2, 2, vec![1.0, 3.0, 2.0, 4.0]);
        let c = center(&y);
        assert_eq!(c.as_slice(), &[-1.5, 0.5, -0.5, 1.5]);
    }

    #[test]
    fn center_stack_removes_mean_matrix() {
        let a = mat(1, 2, vec![1.0, 10.0]);
        let b = mat(1, 2, vec![3.0, 20.0]);
        let stack = DataStack::new(vec![a, b], DataKind::Gaussian).unwrap();
        let c = center_stack(&stack);
        assert_eq!(c.replicate(0).as_slice(), &[-1.0, -5.0]);
        assert_eq!(c.replicate(1).as_slice(), &[1.0, 5.0]);
    }

    #[test]
    fn empirical_identity() {
        let y = mat(2, 2, vec![1.0, 0.0, 0.0, 1.0]);
        let pair = empirical_cov_pair(&y);
        for i in 0..2 {
            for j in 0..2 {
                let expect = if i == j { 0.5 } else { 0.0 };
                assert_eq!(pair.t_hat.get(i, j), expect);
                assert_eq!(pair.s_hat.get(i, j), expect);
            }
        }
    }

    #[test]
    fn empirical_single_entry() {
        let y = mat(2, 2, vec![1.0, 0.0, 0.0, 0.0]);
        let pair = empirical_cov_pair(&y);
        assert_eq!(pair.t_hat.get(0, 0), 0.5);
        assert_eq!(pair.t_hat.get(0, 1), 0.0);
        assert_eq!(pair.t_hat.get(1, 1), 0.0);
        assert_eq!(pair.s_hat.get(0, 0), 0.5);
        assert_eq!(pair.s_hat.get(1, 1), 0.0);
    }

    #[test]
    fn empirical_trace_identity() {
        // p·tr(T̂) == n·tr(Ŝ) == ‖Y‖_F²
        let y = mat(3, 2, vec![1.0, -2.0, 0.5, 4.0, 2.0, 1.0]);
        let pair = empirical_cov_pair(&y);
        let frob2: f64 = y.as_slice().iter().map(|v| v * v).sum();
        assert_relative_eq!(pair.t_hat.trace() * 3.0, frob2, epsilon = 1e-12);
        assert_relative_eq!(pair.s_hat.trace() * 2.0, frob2, epsilon = 1e-12);
    }

    #[test]
    fn kendall_perfect_concordance_and_discordance() {
        let y = mat(3, 2, vec![1.0, 1.0, 2.0, 2.0, 3.0, 3.0]);
        let t = kendall_tau_rows(&y).unwrap();
        assert_eq!(t.get(0, 1), 1.0);
        let y = mat(3, 2, vec![1.0, 3.0, 2.0, 2.0, 3.0, 1.0]);
        let t = kendall_tau_rows(&y).unwrap();
        assert_eq!(t.get(0, 1), -1.0);
    }

    #[test]
    fn kendall_enumerated_example() {
        // columns (1,2,3) and (3,1,2): pair signs (-1,-1,+1) → -1/3
        let y = mat(3, 2, vec![1.0, 3.0, 2.0, 1.0, 3.0, 2.0]);
        let t = kendall_tau_rows(&y).unwrap();
        assert_relative_eq!(t.get(0, 1), -1.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn kendall_rows_cols_transpose_symmetry() {
        let y = mat(
            3,
            4,
            vec![0.0, 2.0, 1.0, 5.0, 4.0, 4.0, 2.0, 0.0, 1.0, 3.0, 3.0, 2.0],
        );
        let rows = kendall_tau_rows(&y).unwrap();
        let cols_of_t = kendall_tau_cols(&y.transpose()).unwrap();
        assert_eq!(rows, cols_of_t);
        let cols = kendall_tau_cols(&y).unwrap();
        let rows_of_t = kendall_tau_rows(&y.transpose()).unwrap();
        assert_eq!(cols, rows_of_t);
        // identical rows correlate to 1
        let y = mat(2, 3, vec![1.0, 2.0, 3.0, 1.0, 2.0, 3.0]);
        assert_eq!(kendall_tau_cols(&y).unwrap().get(0, 1), 1.0);
    }

    #[test]
    fn kendall_needs_two_rows() {
        let y = mat(1, 3, vec![1.0, 2.0, 3.0]);
        assert!(kendall_tau_rows(&y).is_err());
    }

    #[test]
    fn spearman_basic_cases() {
        let y = mat(3, 2, vec![1.0, 1.0, 2.0, 2.0, 3.0, 3.0]);
        assert_eq!(spearman_rho_rows(&y).unwrap().get(0, 1), 1.0);
        let y = mat(3, 2, vec![1.0, 3.0, 2.0, 2.0, 3.0, 1.0]);
        assert_eq!(spearman_rho_rows(&y).unwrap().get(0, 1), -1.0);
        // ranks (1,2,3) vs (2,1,3) → 0.5
        let y = mat(3, 2, vec![1.0, 2.0, 2.0, 1.0, 3.0, 3.0]);
        assert_relative_eq!(spearman_rho_rows(&y).unwrap().get(0, 1), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn spearman_constant_vector_warns_zero() {
        let y = mat(3, 2, vec![5.0, 1.0, 5.0, 2.0, 5.0, 3.0]);
        let (rho, warnings) = spearman_rho_rows_detailed(&y, 7).unwrap();
        assert_eq!(rho.get(0, 1), 0.0);
        assert_eq!(warnings.len(), 1);
        assert_eq!(warnings[0].replicate, 7);
        assert_eq!(warnings[0].vector_index, 0);
        assert_eq!(warnings[0].side, "sample");
    }

    #[test]
    fn midranks_average_ties() {
        assert_eq!(midranks(&[10.0, 20.0, 20.0, 30.0]), vec![1.0, 2.5, 2.5, 4.0]);
        assert_eq!(midranks(&[2.0, 1.0, 3.0]), vec![2.0, 1.0, 3.0]);
    }

    #[test]
    fn sine_transform_values() {
        let r = SymMatrix::new(2, vec![1.0, 1.0, 1.0, 1.0], crate::linalg::Symmetrize::Strict)
            .unwrap();
        let t = sine_transform(&r, CovEstimatorKind::Kendall).unwrap();
        assert_relative_eq!(t.get(0, 1), 1.0, epsilon = 1e-15);
        let r = SymMatrix::new(2, vec![1.0, 0.0, 0.0, 1.0], crate::linalg::Symmetrize::Strict)
            .unwrap();
        assert_eq!(sine_transform(&r, CovEstimatorKind::Kendall).unwrap().get(0, 1), 0.0);
        assert_eq!(sine_transform(&r, CovEstimatorKind::Spearman).unwrap().get(0, 1), 0.0);
        let r = SymMatrix::new(2, vec![1.0, 0.5, 0.5, 1.0], crate::linalg::Symmetrize::Strict)
            .unwrap();
        let s = sine_transform(&r, CovEstimatorKind::Spearman).unwrap();
        assert_relative_eq!(s.get(0, 1), 2.0 * (PI / 12.0).sin(), epsilon = 1e-15);
        assert_relative_eq!(s.get(0, 1), 0.5176380902050415, epsilon = 1e-12);
    }

    #[test]
    fn sine_transform_rejects_out_of_range() {
        let r = SymMatrix::new(2, vec![1.0, 1.5, 1.5, 1.0], crate::linalg::Symmetrize::Strict)
            .unwrap();
        assert!(sine_transform(&r, CovEstimatorKind::Kendall).is_err());
        assert!(sine_transform(&r, CovEstimatorKind::Empirical).is_err());
    }

    #[test]
    fn estimate_averages_replicates() {
        let a = mat(2, 2, vec![1.0, 2.0, 3.0, 4.0]);
        let b = mat(2, 2, vec![4.0, 3.0, 2.0, 1.0]);
        // m = 1 equals the single-replicate estimate
        let single = DataStack::new(vec![a.clone()], DataKind::Counts).unwrap();
        let est1 = estimate_cov_pair(&single, CovEstimatorKind::Kendall).unwrap();
        let direct_t = sine_transform(&kendall_tau_rows(&a).unwrap(), CovEstimatorKind::Kendall)
            .unwrap();
        assert_eq!(est1.t_hat, direct_t);
        // identical replicates: average is idempotent
        let twin = DataStack::new(vec![a.clone(), a.clone()], DataKind::Counts).unwrap();
        let est2 = estimate_cov_pair(&twin, CovEstimatorKind::Kendall).unwrap();
        assert_eq!(est2.t_hat, est1.t_hat);
        // distinct replicates: entrywise mean
        let both = DataStack::new(vec![a.clone(), b.clone()], DataKind::Counts).unwrap();
        let est3 = estimate_cov_pair(&both, CovEstimatorKind::Kendall).unwrap();
        let tb = sine_transform(&kendall_tau_rows(&b).unwrap(), CovEstimatorKind::Kendall).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert_relative_eq!(
                    est3.t_hat.get(i, j),
                    0.5 * (direct_t.get(i, j) + tb.get(i, j)),
                    epsilon = 1e-15
                );
            }
        }
    }

    #[test]
    fn monotone_invariance_exact() {
        // rank statistics depend only on order: strictly increasing
        // transforms leave them bit-identical
        let y = mat(
            4,
            3,
            vec![3.0, 1.0, 0.0, 2.0, 2.0, 5.0, 7.0, 0.0, 1.0, 4.0, 6.0, 2.0],
        );
        let g = |v: f64| v * v * v + 2.0 * v; // strictly increasing
        let gy = DenseMatrix::new(4, 3, y.as_slice().iter().map(|v| g(*v)).collect()).unwrap();
        assert_eq!(kendall_tau_rows(&y).unwrap(), kendall_tau_rows(&gy).unwrap());
        assert_eq!(kendall_tau_cols(&y).unwrap(), kendall_tau_cols(&gy).unwrap());
        assert_eq!(spearman_rho_rows(&y).unwrap(), spearman_rho_rows(&gy).unwrap());
        assert_eq!(spearman_rho_cols(&y).unwrap(), spearman_rho_cols(&gy).unwrap());
    }

    #[test]
    fn sine_preserves_sign_and_zero_pattern() {
        let r = SymMatrix::new(
            3,
            vec![1.0, -0.4, 0.0, -0.4, 1.0, 0.9, 0.0, 0.9, 1.0],
            crate::linalg::Symmetrize::Strict,
        )
        .unwrap();
        for kind in [CovEstimatorKind::Kendall, CovEstimatorKind::Spearman] {
            let s = sine_transform(&r, kind).unwrap();
            for i in 0..3 {
                for j in 0..3 {
                    if i == j {
                        assert_eq!(s.get(i, j), 1.0);
                    } else {
                        assert_eq!(s.get(i, j).signum(), r.get(i, j).signum());
                        assert_eq!(s.get(i, j) == 0.0, r.get(i, j) == 0.0);
                    }
                }
            }
        }
    }
}
