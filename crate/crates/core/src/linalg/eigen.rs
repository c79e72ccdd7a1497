//! Symmetric eigendecomposition via Householder tridiagonalization
//! followed by implicit QL with Wilkinson shifts (the classic
//! tred2/tql2 pair). Deterministic: fixed reduction order, eigenvalues
//! sorted ascending, eigenvector signs normalised.

use super::{DenseMatrix, SymMatrix};
use crate::error::{Error, Result};

/// QL iteration cap per eigenvalue.
const MAX_QL_ITER: usize = 30;

/// Orthogonal eigenvector matrix and ascending eigenvalues of a
/// [`SymMatrix`].
#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomposition {
    /// Columns are eigenvectors, in the order of `values`.
    pub vectors: DenseMatrix,
    /// Eigenvalues sorted ascending.
    pub values: Vec<f64>,
}

impl EigenDecomposition {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `U diag(λ) Uᵀ`.
    pub fn reconstruct(&self) -> DenseMatrix {
        let n = self.dim();
        let mut scaled = DenseMatrix::zeros(n, n);
        for i in 0..n {
            for (j, l) in self.values.iter().enumerate() {
                scaled.set(i, j, self.vectors.get(i, j) * l);
            }
        }
        scaled.mul_transpose(&self.vectors).expect("shape fixed")
    }

    /// `max |UᵀU - I|`.
    pub fn max_orthogonality_deviation(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0_f64;
        // column dot products; columns are strided so go through rows once
        let mut gram = vec![0.0; n * n];
        for r in 0..n {
            let row = self.vectors.row(r);
            for i in 0..n {
                for j in i..n {
                    gram[i * n + j] += row[i] * row[j];
                }
            }
        }
        for i in 0..n {
            for j in i..n {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((gram[i * n + j] - target).abs());
            }
        }
        worst
    }

    /// Relative Frobenius error of `U diag(λ) Uᵀ` against `m`.
    pub fn reconstruction_rel_error(&self, m: &SymMatrix) -> f64 {
        let rec = self.reconstruct();
        let mut num = 0.0;
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                let d = rec.get(i, j) - m.get(i, j);
                num += d * d;
            }
        }
        let denom = m.frobenius_norm().max(f64::MIN_POSITIVE);
        num.sqrt() / denom
    }
}

/// Eigendecompose a symmetric matrix.
///
/// Fails with [`Error::EigenNonConvergence`] if any eigenvalue needs
/// more than 30 QL iterations (does not happen for well-scaled input).
pub fn sym_eigen(m: &SymMatrix) -> Result<EigenDecomposition> {
    let n = m.dim();
    let mut a = m.as_slice().to_vec();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tred2(&mut a, n, &mut d, &mut e);
    // rows of zt are the accumulated basis vectors; QL rotations then
    // touch contiguous row pairs instead of strided column pairs
    let mut zt = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            zt[j * n + i] = a[i * n + j];
        }
    }
    tql2(&mut d, &mut e, n, &mut zt)?;
    Ok(sort_and_normalize(n, &d, &zt))
}

/// Householder reduction of `a` (row-major n×n, symmetric) to
/// tridiagonal form; `a` is overwritten with the accumulated orthogonal
/// transformation, `d` receives the diagonal and `e` the subdiagonal.
fn tred2(a: &mut [f64], n: usize, d: &mut [f64], e: &mut [f64]) {
    for i in (1..n).rev() {
        let l = i - 1;
        let mut h = 0.0;
        if l > 0 {
            let scale: f64 = a[i * n..i * n + l + 1].iter().map(|v| v.abs()).sum();
            if scale == 0.0 {
                e[i] = a[i * n + l];
            } else {
                for k in 0..=l {
                    a[i * n + k] /= scale;
                    h += a[i * n + k] * a[i * n + k];
                }
                let f = a[i * n + l];
                let g = if f >= 0.0 { -h.sqrt() } else { h.sqrt() };
                e[i] = scale * g;
                h -= f * g;
                a[i * n + l] = f - g;
                let mut f_acc = 0.0;
                for j in 0..=l {
                    a[j * n + i] = a[i * n + j] / h;
                    let mut g_acc = 0.0;
                    for k in 0..=j {
                        g_acc += a[j * n + k] * a[i * n + k];
                    }
                    for k in (j + 1)..=l {
                        g_acc += a[k * n + j] * a[i * n + k];
                    }
                    e[j] = g_acc / h;
                    f_acc += e[j] * a[i * n + j];
                }
                let hh = f_acc / (h + h);
                for j in 0..=l {
                    let f = a[i * n + j];
                    let g = e[j] - hh * f;
                    e[j] = g;
                    for k in 0..=j {
                        a[j * n + k] -= f * e[k] + g * a[i * n + k];
                    }
                }
            }
        } else {
            e[i] = a[i * n + l];
        }
        d[i] = h;
    }
    d[0] = 0.0;
    e[0] = 0.0;
    for i in 0..n {
        if d[i] != 0.0 {
            for j in 0..i {
                let mut g = 0.0;
                for k in 0..i {
                    g += a[i * n + k] * a[k * n + j];
                }
                for k in 0..i {
                    a[k * n + j] -= g * a[k * n + i];
                }
            }
        }
        d[i] = a[i * n + i];
        a[i * n + i] = 1.0;
        for j in 0..i {
            a[j * n + i] = 0.0;
            a[i * n + j] = 0.0;
        }
    }
}

/// Implicit QL with shifts on the tridiagonal `(d, e)`; rotations are
/// accumulated into the rows of `zt` (`zt` row `k` is basis vector `k`).
fn tql2(d: &mut [f64], e: &mut [f64], n: usize, zt: &mut [f64]) -> Result<()> {
    if n == 1 {
        return Ok(());
    }
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > MAX_QL_ITER {
                return Err(Error::EigenNonConvergence {
                    residual: e[l].abs(),
                });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let mut s = 1.0;
            let mut c = 1.0;
            let mut p = 0.0;
            let mut underflow = false;
            for i in (l..m).rev() {
                let mut f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                let (lo, hi) = zt.split_at_mut((i + 1) * n);
                let row_i = &mut lo[i * n..(i + 1) * n];
                let row_i1 = &mut hi[..n];
                for k in 0..n {
                    f = row_i1[k];
                    row_i1[k] = s * row_i[k] + c * f;
                    row_i[k] = c * row_i[k] - s * f;
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// Sort eigenvalues ascending, permute vectors accordingly, and fix
/// each vector's sign so its largest-magnitude component (first such
/// index on ties) is nonnegative.
fn sort_and_normalize(n: usize, d: &[f64], zt: &[f64]) -> EigenDecomposition {
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    let mut values = Vec::with_capacity(n);
    let mut vectors = DenseMatrix::zeros(n, n);
    for (col, &src) in order.iter().enumerate() {
        values.push(d[src]);
        let row = &zt[src * n..(src + 1) * n];
        let mut pivot = 0;
        for (k, v) in row.iter().enumerate() {
            if v.abs() > row[pivot].abs() {
                pivot = k;
            }
        }
        let flip = row[pivot] < 0.0;
        for (q, v) in row.iter().enumerate() {
            vectors.set(q, col, if flip { -v } else { *v });
        }
    }
    EigenDecomposition { vectors, values }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Symmetrize;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn two_by_two_example() {
        let m = SymMatrix::new(2, vec![2.0, 1.0, 1.0, 2.0], Symmetrize::Strict).unwrap();
        let eig = sym_eigen(&m).unwrap();
        assert_relative_eq!(eig.values[0], 1.0, epsilon = 1e-12);
        assert_relative_eq!(eig.values[1], 3.0, epsilon = 1e-12);
        let s = 0.5_f64.sqrt();
        // sign convention: first largest-magnitude component positive
        assert_relative_eq!(eig.vectors.get(0, 0), s, epsilon = 1e-12);
        assert_relative_eq!(eig.vectors.get(1, 0), -s, epsilon = 1e-12);
        assert_relative_eq!(eig.vectors.get(0, 1), s, epsilon = 1e-12);
        assert_relative_eq!(eig.vectors.get(1, 1), s, epsilon = 1e-12);
    }

    #[test]
    fn identity_three() {
        let eig = sym_eigen(&SymMatrix::identity(3)).unwrap();
        for v in &eig.values {
            assert_relative_eq!(*v, 1.0, epsilon = 1e-14);
        }
        assert!(eig.max_orthogonality_deviation() < 1e-12);
        assert!(eig.reconstruction_rel_error(&SymMatrix::identity(3)) < 1e-12);
    }

    #[test]
    fn diagonal_sorted_ascending() {
        let m = SymMatrix::from_diag(&[5.0, -2.0, 0.0]);
        let eig = sym_eigen(&m).unwrap();
        assert_eq!(eig.values, vec![-2.0, 0.0, 5.0]);
    }

    #[test]
    fn scalar_matrix() {
        let m = SymMatrix::new(1, vec![4.5], Symmetrize::Strict).unwrap();
        let eig = sym_eigen(&m).unwrap();
        assert_eq!(eig.values, vec![4.5]);
        assert_eq!(eig.vectors.get(0, 0), 1.0);
    }

    #[test]
    fn deterministic_for_fixed_input() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let m = SymMatrix::from_fn(12, |_, _| rng.gen_range(-2.0..2.0)).unwrap();
        let a = sym_eigen(&m).unwrap();
        let b = sym_eigen(&m).unwrap();
        assert_eq!(a.values, b.values);
        assert_eq!(a.vectors, b.vectors);
    }

    #[test]
    fn round_trip_thousand_random_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for case in 0..1000 {
            let dim = rng.gen_range(1..=32);
            let m = SymMatrix::from_fn(dim, |_, _| rng.gen_range(-5.0..5.0)).unwrap();
            let eig = sym_eigen(&m).expect("convergence");
            let ortho = eig.max_orthogonality_deviation();
            assert!(ortho <= 1e-10, "case {case}: orthogonality {ortho:e}");
            let rec = eig.reconstruction_rel_error(&m);
            assert!(rec <= 1e-8, "case {case}: reconstruction {rec:e}");
            for w in eig.values.windows(2) {
                assert!(w[0] <= w[1]);
            }
        }
    }
}
