//! Dense symmetric linear algebra for Kronecker-sum structured models.
//!
//! The solver works exclusively with the two small factors of the
//! Kronecker sum `Ψ ⊕ Θ = Ψ ⊗ I_p + I_n ⊗ Θ`; the `np × np` sum itself
//! is only ever materialised by the size-guarded reference utilities
//! [`kronecker_sum_dense`] and [`block_trace_p`], which exist for
//! verification against the scalable code paths.

mod eigen;

pub use eigen::{sym_eigen, EigenDecomposition};

use crate::error::{Error, Result};

/// Hard cap on `n*p` for the dense reference utilities. Anything larger
/// would defeat the point of the factored representation.
pub const DENSE_GUARD: usize = 4096;

/// How a [`SymMatrix`] constructor treats asymmetric input.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Symmetrize {
    /// Reject input with any `m[i][j] != m[j][i]`.
    Strict,
    /// Replace both entries by their average.
    Average,
}

/// Dense symmetric real matrix, row-major storage.
///
/// Symmetry is exact (enforced at construction and by every mutator)
/// and all entries are finite.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    /// Build from row-major entries of a `dim × dim` matrix.
    pub fn new(dim: usize, mut data: Vec<f64>, mode: Symmetrize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Dimension("matrix dimension must be >= 1".into()));
        }
        if data.len() != dim * dim {
            return Err(Error::Dimension(format!(
                "expected {} entries for a {dim}x{dim} matrix, got {}",
                dim * dim,
                data.len()
            )));
        }
        for (k, v) in data.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite(format!(
                    "entry ({}, {}) = {v}",
                    k / dim,
                    k % dim
                )));
            }
        }
        let mut max_dev = 0.0_f64;
        for i in 0..dim {
            for j in (i + 1)..dim {
                let a = data[i * dim + j];
                let b = data[j * dim + i];
                max_dev = max_dev.max((a - b).abs());
                if let Symmetrize::Average = mode {
                    let avg = 0.5 * (a + b);
                    data[i * dim + j] = avg;
                    data[j * dim + i] = avg;
                }
            }
        }
        if mode == Symmetrize::Strict && max_dev > 0.0 {
            return Err(Error::Asymmetric { max_dev });
        }
        Ok(Self { dim, data })
    }

    pub fn from_rows(rows: &[Vec<f64>], mode: Symmetrize) -> Result<Self> {
        let dim = rows.len();
        for r in rows {
            if r.len() != dim {
                return Err(Error::Dimension(format!(
                    "row of length {} in a {dim}-row matrix",
                    r.len()
                )));
            }
        }
        Self::new(dim, rows.concat(), mode)
    }

    /// Fill from `f(i, j)` evaluated on the upper triangle and mirrored.
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut data = vec![0.0; dim * dim];
        for i in 0..dim {
            for j in i..dim {
                let v = f(i, j);
                data[i * dim + j] = v;
                data[j * dim + i] = v;
            }
        }
        Self::new(dim, data, Symmetrize::Strict)
    }

    pub fn identity(dim: usize) -> Self {
        let mut data = vec![0.0; dim * dim];
        for i in 0..dim {
            data[i * dim + i] = 1.0;
        }
        Self { dim, data }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let dim = diag.len();
        let mut data = vec![0.0; dim * dim];
        for (i, v) in diag.iter().enumerate() {
            data[i * dim + i] = *v;
        }
        Self { dim, data }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    /// Set `(i, j)` and `(j, i)` together so symmetry is preserved.
    #[inline]
    pub fn set_sym(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.dim + j] = v;
        self.data[j * self.dim + i] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Squared Frobenius distance to `other`.
    pub fn frobenius_distance_sq(&self, other: &SymMatrix) -> f64 {
        debug_assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    }

    /// Entrywise l1 norm, diagonal included.
    pub fn entrywise_l1(&self) -> f64 {
        self.data.iter().map(|v| v.abs()).sum()
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// `tr(AB)` for symmetric `A`, `B`: the entrywise product sum.
    pub fn trace_product(&self, other: &SymMatrix) -> Result<f64> {
        if self.dim != other.dim {
            return Err(Error::Dimension(format!(
                "trace product of {}x{} with {}x{}",
                self.dim, self.dim, other.dim, other.dim
            )));
        }
        Ok(self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum())
    }

    /// Count of strictly nonzero off-diagonal entries in the upper triangle.
    pub fn nonzero_upper_offdiag(&self) -> usize {
        let mut k = 0;
        for i in 0..self.dim {
            for j in (i + 1)..self.dim {
                if self.get(i, j) != 0.0 {
                    k += 1;
                }
            }
        }
        k
    }
}

/// Dense rectangular real matrix, row-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Dimension("matrix dimensions must be >= 1".into()));
        }
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                data.len()
            )));
        }
        for (k, v) in data.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite(format!(
                    "entry ({}, {}) = {v}",
                    k / cols,
                    k % cols
                )));
            }
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.data[i * cols + j] = f(i, j);
            }
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn transpose(&self) -> DenseMatrix {
        let mut t = DenseMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        t
    }

    /// `self * other`, ikj loop order.
    pub fn mul(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = DenseMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == 0.0 {
                    continue;
                }
                let b_row = &other.data[k * other.cols..(k + 1) * other.cols];
                for (o, b) in out_row.iter_mut().zip(b_row) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    /// `self * otherᵀ`; dot products of row pairs, cache-friendly.
    pub fn mul_transpose(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.cols != other.cols {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by transpose of {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = DenseMatrix::zeros(self.rows, other.rows);
        for i in 0..self.rows {
            let a_row = self.row(i);
            let out_row = &mut out.data[i * other.rows..(i + 1) * other.rows];
            for (j, o) in out_row.iter_mut().enumerate() {
                *o = dot(a_row, other.row(j));
            }
        }
        Ok(out)
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / (self.data.len() as f64)
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// The pair `(Ψ, Θ)` whose Kronecker sum is the joint precision matrix.
///
/// The `np × np` sum is never stored; positive definiteness of the sum
/// is equivalent to all eigenvalue pair sums `λ1_i + λ2_j` being positive
/// and is checked on demand.
#[derive(Debug, Clone, PartialEq)]
pub struct KsModel {
    pub psi: SymMatrix,
    pub theta: SymMatrix,
}

impl KsModel {
    pub fn new(psi: SymMatrix, theta: SymMatrix) -> Self {
        Self { psi, theta }
    }

    pub fn identity(n: usize, p: usize) -> Self {
        Self {
            psi: SymMatrix::identity(n),
            theta: SymMatrix::identity(p),
        }
    }

    pub fn n(&self) -> usize {
        self.psi.dim()
    }

    pub fn p(&self) -> usize {
        self.theta.dim()
    }

    /// Eigendecompose both factors and verify every pair sum is positive.
    pub fn check_positive_definite(&self) -> Result<(EigenDecomposition, EigenDecomposition)> {
        let eig_psi = sym_eigen(&self.psi)?;
        let eig_theta = sym_eigen(&self.theta)?;
        min_pair_sum_positive(&eig_psi.values, &eig_theta.values)?;
        Ok((eig_psi, eig_theta))
    }
}

/// Error unless `min_i λ1_i + min_j λ2_j > 0`.
pub(crate) fn min_pair_sum_positive(lambda1: &[f64], lambda2: &[f64]) -> Result<()> {
    // eigenvalues are sorted ascending, so the minimal pair is (0, 0)
    let sum = lambda1[0] + lambda2[0];
    if sum <= 0.0 {
        return Err(Error::PositiveDefiniteness(format!(
            "lambda1[0] + lambda2[0] = {sum:e} <= 0"
        )));
    }
    Ok(())
}

/// `log |Ψ ⊕ Θ|` from the factor eigenvalues alone:
/// `Σ_i Σ_j log(λ1_i + λ2_j)`. O(np) time, O(1) extra space.
pub fn ks_logdet(lambda1: &[f64], lambda2: &[f64]) -> Result<f64> {
    if lambda1.is_empty() || lambda2.is_empty() {
        return Err(Error::Dimension("eigenvalue vectors must be nonempty".into()));
    }
    let mut acc = 0.0;
    for (i, l1) in lambda1.iter().enumerate() {
        for (j, l2) in lambda2.iter().enumerate() {
            let s = l1 + l2;
            if s <= 0.0 {
                return Err(Error::PositiveDefiniteness(format!(
                    "lambda1[{i}] + lambda2[{j}] = {s:e} <= 0"
                )));
            }
            acc += s.ln();
        }
    }
    Ok(acc)
}

/// Materialise `Ψ ⊗ I_p + I_n ⊗ Θ` by direct expansion.
///
/// Reference utility for verification only; refuses `n*p > 4096` so it
/// cannot sneak an `O(n²p²)` allocation into a production path.
pub fn kronecker_sum_dense(psi: &SymMatrix, theta: &SymMatrix) -> Result<SymMatrix> {
    let n = psi.dim();
    let p = theta.dim();
    let np = n * p;
    if np > DENSE_GUARD {
        return Err(Error::Dimension(format!(
            "dense Kronecker sum guard exceeded: n*p = {np} > {DENSE_GUARD}"
        )));
    }
    let mut out = SymMatrix::zeros(np);
    for i in 0..n {
        for j in 0..n {
            let psi_ij = psi.get(i, j);
            for a in 0..p {
                for b in 0..p {
                    let mut v = if a == b { psi_ij } else { 0.0 };
                    if i == j {
                        v += theta.get(a, b);
                    }
                    if v != 0.0 {
                        out.data[(i * p + a) * np + (j * p + b)] = v;
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Block-wise trace: maps an `np × np` matrix of `n²` many `p × p`
/// blocks to the `n × n` matrix of per-block traces.
///
/// Reference utility, same guard as [`kronecker_sum_dense`].
pub fn block_trace_p(m: &DenseMatrix, p: usize) -> Result<DenseMatrix> {
    if m.rows() != m.cols() {
        return Err(Error::Dimension(format!(
            "block trace needs a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    if p == 0 || m.rows() % p != 0 {
        return Err(Error::Dimension(format!(
            "matrix dimension {} not divisible by block size {p}",
            m.rows()
        )));
    }
    if m.rows() > DENSE_GUARD {
        return Err(Error::Dimension(format!(
            "block trace guard exceeded: dim = {} > {DENSE_GUARD}",
            m.rows()
        )));
    }
    let n = m.rows() / p;
    let mut out = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let mut t = 0.0;
            for k in 0..p {
                t += m.get(i * p + k, j * p + k);
            }
            out.set(i, j, t);
        }
    }
    Ok(out)
}

/// Convert a symmetric matrix to the dense representation.
pub fn sym_to_dense(m: &SymMatrix) -> DenseMatrix {
    DenseMatrix {
        rows: m.dim(),
        cols: m.dim(),
        data: m.as_slice().to_vec(),
    }
}

/// Interpret a square dense matrix as symmetric, averaging stray
/// floating-point asymmetry.
pub fn dense_to_sym(m: &DenseMatrix) -> Result<SymMatrix> {
    if m.rows() != m.cols() {
        return Err(Error::Dimension(format!(
            "cannot symmetrise a {}x{} matrix",
            m.rows(),
            m.cols()
        )));
    }
    SymMatrix::new(m.rows(), m.as_slice().to_vec(), Symmetrize::Average)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn strict_construction_rejects_asymmetry() {
        let err = SymMatrix::new(2, vec![1.0, 2.0, 3.0, 4.0], Symmetrize::Strict).unwrap_err();
        assert!(matches!(err, Error::Asymmetric { .. }));
    }

    #[test]
    fn average_construction_symmetrizes() {
        let m = SymMatrix::new(2, vec![1.0, 2.0, 3.0, 4.0], Symmetrize::Average).unwrap();
        assert_eq!(m.get(0, 1), 2.5);
        assert_eq!(m.get(1, 0), 2.5);
    }

    #[test]
    fn nonfinite_rejected() {
        let err = SymMatrix::new(1, vec![f64::NAN], Symmetrize::Strict).unwrap_err();
        assert!(matches!(err, Error::NonFinite(_)));
        let err = DenseMatrix::new(1, 2, vec![1.0, f64::INFINITY]).unwrap_err();
        assert!(matches!(err, Error::NonFinite(_)));
    }

    #[test]
    fn kronecker_sum_scalar_case() {
        let psi = SymMatrix::new(1, vec![2.0], Symmetrize::Strict).unwrap();
        let theta = SymMatrix::new(1, vec![3.0], Symmetrize::Strict).unwrap();
        let ks = kronecker_sum_dense(&psi, &theta).unwrap();
        assert_eq!(ks.dim(), 1);
        assert_eq!(ks.get(0, 0), 5.0);
    }

    #[test]
    fn kronecker_sum_identities() {
        let ks = kronecker_sum_dense(&SymMatrix::identity(2), &SymMatrix::identity(2)).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(ks.get(i, j), if i == j { 2.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn kronecker_sum_mixed_example() {
        // Ψ = [[1, .5], [.5, 1]], Θ = diag(2, 2): diagonal 3, off blocks .5 I
        let psi = SymMatrix::new(2, vec![1.0, 0.5, 0.5, 1.0], Symmetrize::Strict).unwrap();
        let theta = SymMatrix::from_diag(&[2.0, 2.0]);
        let ks = kronecker_sum_dense(&psi, &theta).unwrap();
        for i in 0..4 {
            assert_eq!(ks.get(i, i), 3.0);
        }
        assert_eq!(ks.get(0, 2), 0.5);
        assert_eq!(ks.get(1, 3), 0.5);
        assert_eq!(ks.get(0, 3), 0.0);
        assert_eq!(ks.get(0, 1), 0.0);
    }

    #[test]
    fn kronecker_sum_guard() {
        let psi = SymMatrix::identity(65);
        let theta = SymMatrix::identity(64);
        assert!(matches!(
            kronecker_sum_dense(&psi, &theta),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn block_trace_identity() {
        let m = sym_to_dense(&SymMatrix::identity(4));
        let t = block_trace_p(&m, 2).unwrap();
        assert_eq!(t.get(0, 0), 2.0);
        assert_eq!(t.get(1, 1), 2.0);
        assert_eq!(t.get(0, 1), 0.0);
    }

    #[test]
    fn block_trace_p1_is_identity_op() {
        let m = DenseMatrix::new(2, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let t = block_trace_p(&m, 1).unwrap();
        assert_eq!(t, m);
    }

    #[test]
    fn block_trace_matches_manual_sum() {
        let mut rng = 17_u64;
        let mut next = || {
            // xorshift, plenty for test data
            rng ^= rng << 13;
            rng ^= rng >> 7;
            rng ^= rng << 17;
            (rng % 1000) as f64 / 100.0 - 5.0
        };
        let m = DenseMatrix::from_fn(6, 6, |_, _| next());
        let t = block_trace_p(&m, 3).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let manual: f64 = (0..3).map(|k| m.get(i * 3 + k, j * 3 + k)).sum();
                assert_eq!(t.get(i, j), manual);
            }
        }
    }

    #[test]
    fn block_trace_indivisible_errors() {
        let m = DenseMatrix::zeros(5, 5);
        assert!(matches!(block_trace_p(&m, 2), Err(Error::Dimension(_))));
    }

    #[test]
    fn block_trace_of_kron_with_identity_scales() {
        // tr_p(A ⊗ I_p) = p A
        let a = SymMatrix::new(2, vec![1.0, -0.3, -0.3, 2.0], Symmetrize::Strict).unwrap();
        let p = 3;
        let kron = DenseMatrix::from_fn(6, 6, |r, c| {
            let (i, x) = (r / p, r % p);
            let (j, y) = (c / p, c % p);
            if x == y {
                a.get(i, j)
            } else {
                0.0
            }
        });
        let t = block_trace_p(&kron, p).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert_relative_eq!(t.get(i, j), 3.0 * a.get(i, j));
            }
        }
    }

    #[test]
    fn ks_logdet_diagonal_cases() {
        let v = ks_logdet(&[1.0, 2.0], &[3.0]).unwrap();
        assert_relative_eq!(v, 20.0_f64.ln(), max_relative = 1e-14);
        let v = ks_logdet(&[1.0], &[1.0]).unwrap();
        assert_relative_eq!(v, 2.0_f64.ln(), max_relative = 1e-14);
    }

    #[test]
    fn ks_logdet_rejects_nonpositive_pair() {
        let err = ks_logdet(&[1.0, -2.0], &[1.5]).unwrap_err();
        match err {
            Error::PositiveDefiniteness(msg) => {
                assert!(msg.contains("lambda1[1]"), "{msg}");
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn trace_product_is_entrywise_sum() {
        let a = SymMatrix::new(2, vec![1.0, 2.0, 2.0, 3.0], Symmetrize::Strict).unwrap();
        let b = SymMatrix::new(2, vec![0.5, -1.0, -1.0, 4.0], Symmetrize::Strict).unwrap();
        // tr(AB) computed by hand: row0·col0 + row1·col1
        let ab00 = 1.0 * 0.5 + 2.0 * -1.0;
        let ab11 = 2.0 * -1.0 + 3.0 * 4.0;
        assert_relative_eq!(a.trace_product(&b).unwrap(), ab00 + ab11);
    }

    #[test]
    fn mul_transpose_matches_mul() {
        let a = DenseMatrix::new(2, 3, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        let b = DenseMatrix::new(4, 3, (0..12).map(|v| v as f64 * 0.5).collect()).unwrap();
        let via_t = a.mul_transpose(&b).unwrap();
        let direct = a.mul(&b.transpose()).unwrap();
        for i in 0..2 {
            for j in 0..4 {
                assert_relative_eq!(via_t.get(i, j), direct.get(i, j), epsilon = 1e-12);
            }
        }
    }
}
