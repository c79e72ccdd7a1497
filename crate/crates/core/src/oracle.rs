//! Brute-force reference computations used by the verification suite.
//!
//! Everything here materialises objects the scalable code paths are
//! specifically designed to avoid, so all entry points share the same
//! hard size guard as [`crate::linalg::kronecker_sum_dense`]. None of
//! these functions are called by the solver.

use crate::error::{Error, Result};
use crate::linalg::{DenseMatrix, EigenDecomposition, SymMatrix, DENSE_GUARD};

/// Dense Kronecker product `a ⊗ b`.
pub fn kron(a: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    let rows = a.rows() * b.rows();
    let cols = a.cols() * b.cols();
    if rows > DENSE_GUARD || cols > DENSE_GUARD {
        return Err(Error::Dimension(format!(
            "dense Kronecker product guard exceeded: {rows}x{cols}"
        )));
    }
    let mut out = DenseMatrix::zeros(rows, cols);
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            let aij = a.get(i, j);
            if aij == 0.0 {
                continue;
            }
            for r in 0..b.rows() {
                for c in 0..b.cols() {
                    out.set(i * b.rows() + r, j * b.cols() + c, aij * b.get(r, c));
                }
            }
        }
    }
    Ok(out)
}

/// Gauss-Jordan inverse with partial pivoting. Independent of the
/// eigendecomposition path, so it can stand witness against it.
pub fn invert_dense(m: &DenseMatrix) -> Result<DenseMatrix> {
    if m.rows() != m.cols() {
        return Err(Error::Dimension("inverse needs a square matrix".into()));
    }
    let n = m.rows();
    if n > DENSE_GUARD {
        return Err(Error::Dimension(format!(
            "dense inverse guard exceeded: dim = {n}"
        )));
    }
    let mut a = m.as_slice().to_vec();
    let mut inv = vec![0.0; n * n];
    for i in 0..n {
        inv[i * n + i] = 1.0;
    }
    for col in 0..n {
        let mut pivot = col;
        for r in (col + 1)..n {
            if a[r * n + col].abs() > a[pivot * n + col].abs() {
                pivot = r;
            }
        }
        if a[pivot * n + col] == 0.0 {
            return Err(Error::Domain("singular matrix in dense inverse".into()));
        }
        if pivot != col {
            for k in 0..n {
                a.swap(col * n + k, pivot * n + k);
                inv.swap(col * n + k, pivot * n + k);
            }
        }
        let d = a[col * n + col];
        for k in 0..n {
            a[col * n + k] /= d;
            inv[col * n + k] /= d;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = a[r * n + col];
            if f == 0.0 {
                continue;
            }
            for k in 0..n {
                a[r * n + k] -= f * a[col * n + k];
                inv[r * n + k] -= f * inv[col * n + k];
            }
        }
    }
    DenseMatrix::new(n, n, inv)
}

/// Log-determinant via LU with partial pivoting; errors unless the
/// determinant is strictly positive.
pub fn logdet_dense(m: &DenseMatrix) -> Result<f64> {
    if m.rows() != m.cols() {
        return Err(Error::Dimension("log-determinant needs a square matrix".into()));
    }
    let n = m.rows();
    if n > DENSE_GUARD {
        return Err(Error::Dimension(format!(
            "dense log-determinant guard exceeded: dim = {n}"
        )));
    }
    let mut a = m.as_slice().to_vec();
    let mut sign = 1.0_f64;
    let mut acc = 0.0_f64;
    for col in 0..n {
        let mut pivot = col;
        for r in (col + 1)..n {
            if a[r * n + col].abs() > a[pivot * n + col].abs() {
                pivot = r;
            }
        }
        let pv = a[pivot * n + col];
        if pv == 0.0 {
            return Err(Error::Domain("singular matrix in log-determinant".into()));
        }
        if pivot != col {
            for k in 0..n {
                a.swap(col * n + k, pivot * n + k);
            }
            sign = -sign;
        }
        sign *= pv.signum();
        acc += pv.abs().ln();
        for r in (col + 1)..n {
            let f = a[r * n + col] / pv;
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                a[r * n + k] -= f * a[col * n + k];
            }
        }
    }
    if sign <= 0.0 {
        return Err(Error::Domain("non-positive determinant".into()));
    }
    Ok(acc)
}

/// Dense `Ŵ = (U ⊗ I_p) D (Uᵀ ⊗ I_p)` with
/// `D = diag(1/(λ1_i + λ2_j))` in block order (i outer, j inner).
pub fn dense_w_hat(eig_psi: &EigenDecomposition, lambda2: &[f64]) -> Result<DenseMatrix> {
    let n = eig_psi.dim();
    let p = lambda2.len();
    if n * p > DENSE_GUARD {
        return Err(Error::Dimension(format!(
            "dense W-hat guard exceeded: n*p = {}",
            n * p
        )));
    }
    let eye_p = DenseMatrix::from_fn(p, p, |i, j| if i == j { 1.0 } else { 0.0 });
    let u_kron = kron(&eig_psi.vectors, &eye_p)?;
    let mut d = DenseMatrix::zeros(n * p, n * p);
    for (i, l1) in eig_psi.values.iter().enumerate() {
        for (j, l2) in lambda2.iter().enumerate() {
            let s = l1 + l2;
            if s <= 0.0 {
                return Err(Error::PositiveDefiniteness(format!(
                    "lambda1[{i}] + lambda2[{j}] = {s:e} <= 0"
                )));
            }
            d.set(i * p + j, i * p + j, 1.0 / s);
        }
    }
    u_kron.mul(&d)?.mul_transpose(&u_kron)
}

/// Dense inverse of the Kronecker sum, `W = (Ψ ⊕ Θ)⁻¹`.
pub fn dense_w(psi: &SymMatrix, theta: &SymMatrix) -> Result<DenseMatrix> {
    let ks = crate::linalg::kronecker_sum_dense(psi, theta)?;
    invert_dense(&crate::linalg::sym_to_dense(&ks))
}
