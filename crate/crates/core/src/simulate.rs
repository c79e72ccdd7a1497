//! Synthetic data generation: sparse positive definite truth matrices,
//! Kronecker-sum matrix-normal sampling without materialising the
//! joint precision, and Gaussian-copula negative-binomial counts.
//!
//! All randomness flows through [`RngStream`] (ChaCha8, 64-bit seed).
//! Derived streams are keyed by purpose so replicate generation can run
//! in parallel yet stay bit-reproducible: stream 1 draws `Ψ₀`, stream 2
//! draws `Θ₀`, stream `10 + k` draws replicate `k`.

use crate::data::{DataKind, DataStack};
use crate::error::{Error, Result};
use crate::linalg::{sym_eigen, DenseMatrix, KsModel, SymMatrix};
use crate::par;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

const PSI_TRUTH_STREAM: u64 = 1;
const THETA_TRUTH_STREAM: u64 = 2;
const REPLICATE_STREAM_BASE: u64 = 10;

/// Negative-binomial parameters for the count transform: `r` successes
/// to observe, per-trial success probability `prob`; the variable
/// counts failures before the `r`-th success.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CountParams {
    pub r: u32,
    pub prob: f64,
}

impl Default for CountParams {
    fn default() -> Self {
        Self { r: 2, prob: 0.5 }
    }
}

/// Simulation recipe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimSpec {
    /// Sample-side dimension (Ψ is n×n).
    pub n: usize,
    /// Feature-side dimension (Θ is p×p).
    pub p: usize,
    /// Replicate count.
    pub m: usize,
    /// Probability that an upper-triangle entry of a truth matrix is nonzero.
    #[serde(default = "default_sparsity")]
    pub sparsity: f64,
    #[serde(default = "default_offdiag_mean")]
    pub offdiag_mean: f64,
    #[serde(default = "default_offdiag_sd")]
    pub offdiag_sd: f64,
    pub seed: u64,
    /// Present for count data; absent means Gaussian output.
    #[serde(default)]
    pub count_params: Option<CountParams>,
    /// Generate `Θ₀` as this many diagonal blocks (plus noise) instead
    /// of the sparse random pattern.
    #[serde(default)]
    pub theta_blocks: Option<usize>,
}

fn default_sparsity() -> f64 {
    0.1
}
fn default_offdiag_mean() -> f64 {
    1.0
}
fn default_offdiag_sd() -> f64 {
    std::f64::consts::SQRT_2
}

impl SimSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.p == 0 || self.m == 0 {
            return Err(Error::Config("n, p and m must be >= 1".into()));
        }
        if !(self.sparsity > 0.0 && self.sparsity < 1.0) {
            return Err(Error::Config(format!(
                "sparsity must lie in (0, 1), got {}",
                self.sparsity
            )));
        }
        if !self.offdiag_mean.is_finite() || !self.offdiag_sd.is_finite() || self.offdiag_sd < 0.0
        {
            return Err(Error::Config("off-diagonal moments must be finite".into()));
        }
        if let Some(cp) = &self.count_params {
            if cp.r == 0 {
                return Err(Error::Config("count r must be >= 1".into()));
            }
            if !(cp.prob > 0.0 && cp.prob < 1.0) {
                return Err(Error::Config(format!(
                    "count prob must lie in (0, 1), got {}",
                    cp.prob
                )));
            }
        }
        if let Some(b) = self.theta_blocks {
            if b == 0 || b > self.p {
                return Err(Error::Config(format!(
                    "theta_blocks must lie in 1..=p, got {b}"
                )));
            }
        }
        Ok(())
    }
}

/// Seeded deterministic generator; same seed gives the same sequence
/// on every platform. The algorithm (ChaCha8) is part of the output
/// metadata contract.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    inner: ChaCha8Rng,
}

/// Name recorded in manifests so outputs can be reproduced.
pub const RNG_ALGORITHM: &str = "chacha8";

impl RngStream {
    pub fn seeded(seed: u64) -> Self {
        Self {
            seed,
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Independent stream with the same key; position starts at zero.
    pub fn substream(&self, idx: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(self.seed);
        inner.set_stream(idx);
        Self {
            seed: self.seed,
            inner,
        }
    }

    pub fn uniform(&mut self) -> f64 {
        self.inner.gen::<f64>()
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.inner.sample(StandardNormal)
    }
}

/// Sparse symmetric positive definite matrix: each upper-triangle entry
/// is nonzero with probability `sparsity`, drawn from
/// `Normal(offdiag_mean, offdiag_sd²)`; the diagonal is the absolute
/// row sum plus 0.1 (strict diagonal dominance).
pub fn gen_sparse_pd(
    dim: usize,
    sparsity: f64,
    offdiag_mean: f64,
    offdiag_sd: f64,
    rng: &mut RngStream,
) -> SymMatrix {
    let mut m = SymMatrix::zeros(dim);
    for i in 0..dim {
        for j in (i + 1)..dim {
            if rng.uniform() < sparsity {
                let v = offdiag_mean + offdiag_sd * rng.standard_normal();
                m.set_sym(i, j, v);
            }
        }
    }
    force_diagonal_dominance(&mut m);
    m
}

/// Block-diagonal positive definite matrix: `blocks` near-equal
/// diagonal blocks of constant `block_value` off-diagonals, Gaussian
/// noise of standard deviation `noise_sd` added everywhere, diagonal
/// dominance enforced.
pub fn gen_block_diag_pd(
    dim: usize,
    blocks: usize,
    block_value: f64,
    noise_sd: f64,
    rng: &mut RngStream,
) -> SymMatrix {
    let blocks = blocks.max(1).min(dim);
    let base = dim / blocks;
    let rem = dim % blocks;
    let mut block_of = Vec::with_capacity(dim);
    for b in 0..blocks {
        let size = base + usize::from(b < rem);
        block_of.extend(std::iter::repeat(b).take(size));
    }
    let mut m = SymMatrix::zeros(dim);
    for i in 0..dim {
        for j in (i + 1)..dim {
            let mut v = noise_sd * rng.standard_normal();
            if block_of[i] == block_of[j] {
                v += block_value;
            }
            m.set_sym(i, j, v);
        }
    }
    force_diagonal_dominance(&mut m);
    m
}

fn force_diagonal_dominance(m: &mut SymMatrix) {
    let dim = m.dim();
    for i in 0..dim {
        let row_abs: f64 = (0..dim)
            .filter(|j| *j != i)
            .map(|j| m.get(i, j).abs())
            .sum();
        m.set_sym(i, i, row_abs + 0.1);
    }
}

/// Draw `m` replicates of the `p × n` matrix normal whose vectorised
/// covariance is `(Ψ ⊕ Θ)⁻¹`.
///
/// Each replicate is `X = V G Uᵀ` with `G[q][j] = ε_qj / √(λ1_j + λ2_q)`
/// and i.i.d. standard normal `ε`, which realises the factored square
/// root of the covariance without any `np × np` object. With `m >= 2`
/// the entrywise mean matrix across replicates is subtracted afterwards
/// (a single replicate is returned as drawn).
pub fn sample_ks_normal(model: &KsModel, m: usize, base: &RngStream) -> Result<DataStack> {
    if m == 0 {
        return Err(Error::Config("replicate count must be >= 1".into()));
    }
    let eig_psi = sym_eigen(&model.psi)?;
    let eig_theta = sym_eigen(&model.theta)?;
    let n = model.n();
    let p = model.p();
    let mut root_inv = DenseMatrix::zeros(p, n);
    for q in 0..p {
        for j in 0..n {
            let s = eig_psi.values[j] + eig_theta.values[q];
            if s <= 0.0 {
                return Err(Error::PositiveDefiniteness(format!(
                    "lambda1[{j}] + lambda2[{q}] = {s:e} <= 0"
                )));
            }
            root_inv.set(q, j, 1.0 / s.sqrt());
        }
    }
    let mut reps: Vec<DenseMatrix> = {
        let results: Vec<Result<DenseMatrix>> = par::map_indexed(m, |k| {
            let mut rng = base.substream(REPLICATE_STREAM_BASE + k as u64);
            let mut g = DenseMatrix::zeros(p, n);
            for q in 0..p {
                for j in 0..n {
                    g.set(q, j, rng.standard_normal() * root_inv.get(q, j));
                }
            }
            let gu = g.mul_transpose(&eig_psi.vectors)?;
            eig_theta.vectors.mul(&gu)
        });
        results.into_iter().collect::<Result<Vec<_>>>()?
    };
    if m >= 2 {
        let inv_m = 1.0 / m as f64;
        let mut mean = vec![0.0; p * n];
        for rep in &reps {
            for (acc, v) in mean.iter_mut().zip(rep.as_slice()) {
                *acc += v;
            }
        }
        for v in &mut mean {
            *v *= inv_m;
        }
        for rep in &mut reps {
            for (v, mu) in rep.as_mut_slice().iter_mut().zip(&mean) {
                *v -= mu;
            }
        }
    }
    DataStack::new(reps, DataKind::Gaussian)
}

/// Standard normal CDF through the complementary error function;
/// absolute error below 1e-12 over the whole line.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(-x / std::f64::consts::SQRT_2)
}

/// Smallest integer `k >= 0` with `CDF_NB(k; r, prob) >= p_val`, where
/// the distribution counts failures before the `r`-th success.
pub fn nb_quantile(p_val: f64, r: u32, prob: f64) -> Result<u64> {
    if r == 0 {
        return Err(Error::Config("r must be >= 1".into()));
    }
    if !(prob > 0.0 && prob < 1.0) {
        return Err(Error::Config(format!("prob must lie in (0, 1), got {prob}")));
    }
    if !p_val.is_finite() || !(0.0..1.0).contains(&p_val) {
        return Err(Error::Domain(format!(
            "quantile level must lie in [0, 1), got {p_val}"
        )));
    }
    let mut pmf = prob.powi(r as i32);
    let mut cdf = pmf;
    let mut k: u64 = 0;
    while cdf < p_val {
        let next = pmf * (1.0 - prob) * ((k + r as u64) as f64) / ((k + 1) as f64);
        if next <= 0.0 {
            return Err(Error::Domain(format!(
                "negative binomial quantile stalled at k = {k}, cdf = {cdf}"
            )));
        }
        pmf = next;
        cdf += pmf;
        k += 1;
    }
    Ok(k)
}

/// Entrywise `Y = QNB(Φ(X), r, prob)`: push each Gaussian entry through
/// the standard normal CDF and the negative-binomial quantile.
///
/// Total by construction: the CDF output is clamped away from 1 by one
/// part in 1e12 so the quantile stays finite for extreme entries.
pub fn gaussian_to_counts(x_stack: &DataStack, r: u32, prob: f64) -> Result<DataStack> {
    const P_CAP: f64 = 1.0 - 1e-12;
    let reps: Vec<Result<DenseMatrix>> = par::map_indexed(x_stack.m(), |k| {
        let x = x_stack.replicate(k);
        let mut out = x.clone();
        for v in out.as_mut_slice() {
            let p_val = normal_cdf(*v).min(P_CAP);
            *v = nb_quantile(p_val, r, prob)? as f64;
        }
        Ok(out)
    });
    let reps = reps.into_iter().collect::<Result<Vec<_>>>()?;
    DataStack::new(reps, DataKind::Counts)
}

/// Truth matrices for a [`SimSpec`].
pub fn generate_truth(spec: &SimSpec) -> Result<KsModel> {
    spec.validate()?;
    let base = RngStream::seeded(spec.seed);
    let psi = gen_sparse_pd(
        spec.n,
        spec.sparsity,
        spec.offdiag_mean,
        spec.offdiag_sd,
        &mut base.substream(PSI_TRUTH_STREAM),
    );
    let theta = match spec.theta_blocks {
        None => gen_sparse_pd(
            spec.p,
            spec.sparsity,
            spec.offdiag_mean,
            spec.offdiag_sd,
            &mut base.substream(THETA_TRUTH_STREAM),
        ),
        Some(blocks) => gen_block_diag_pd(
            spec.p,
            blocks,
            0.5,
            0.01,
            &mut base.substream(THETA_TRUTH_STREAM),
        ),
    };
    Ok(KsModel::new(psi, theta))
}

/// Truth plus Gaussian replicates.
pub fn simulate_gaussian(spec: &SimSpec) -> Result<(KsModel, DataStack)> {
    let truth = generate_truth(spec)?;
    let data = sample_ks_normal(&truth, spec.m, &RngStream::seeded(spec.seed))?;
    Ok((truth, data))
}

/// Truth plus copula negative-binomial count replicates.
pub fn simulate_counts(spec: &SimSpec) -> Result<(KsModel, DataStack)> {
    let cp = spec.count_params.unwrap_or_default();
    let (truth, gaussian) = simulate_gaussian(spec)?;
    let counts = gaussian_to_counts(&gaussian, cp.r, cp.prob)?;
    Ok((truth, counts))
}

/// Run the spec: Gaussian when `count_params` is absent, counts otherwise.
pub fn simulate(spec: &SimSpec) -> Result<(KsModel, DataStack)> {
    match spec.count_params {
        None => simulate_gaussian(spec),
        Some(_) => simulate_counts(spec),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn normal_cdf_values() {
        assert_relative_eq!(normal_cdf(0.0), 0.5, epsilon = 1e-15);
        assert_relative_eq!(normal_cdf(1.96), 0.9750021048517795, epsilon = 1e-12);
        for x in [-3.7, -1.2, -0.3, 0.0, 0.9, 2.4, 5.1] {
            assert_relative_eq!(normal_cdf(x) + normal_cdf(-x), 1.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn nb_quantile_enumerated() {
        assert_eq!(nb_quantile(0.0, 1, 0.5).unwrap(), 0);
        assert_eq!(nb_quantile(0.5, 1, 0.5).unwrap(), 0);
        assert_eq!(nb_quantile(0.6, 1, 0.5).unwrap(), 1);
        // r=2, prob=0.5: cdf(0)=0.25, cdf(1)=0.5, cdf(2)=0.6875
        assert_eq!(nb_quantile(0.3, 2, 0.5).unwrap(), 1);
        assert_eq!(nb_quantile(0.51, 2, 0.5).unwrap(), 2);
    }

    #[test]
    fn nb_quantile_domain_errors() {
        assert!(nb_quantile(1.0, 1, 0.5).is_err());
        assert!(nb_quantile(-0.1, 1, 0.5).is_err());
        assert!(nb_quantile(0.5, 0, 0.5).is_err());
        assert!(nb_quantile(0.5, 1, 1.0).is_err());
    }

    #[test]
    fn sparse_pd_is_positive_definite() {
        let mut rng = RngStream::seeded(100);
        for dim in [1, 3, 8, 20] {
            let m = gen_sparse_pd(dim, 0.3, 1.0, 2.0_f64.sqrt(), &mut rng);
            let eig = sym_eigen(&m).unwrap();
            assert!(eig.values[0] > 0.0, "dim {dim}: min eig {}", eig.values[0]);
        }
    }

    #[test]
    fn sparse_pd_zero_sparsity_limit_is_diagonal() {
        let mut rng = RngStream::seeded(4);
        let m = gen_sparse_pd(5, 0.0, 1.0, 1.0, &mut rng);
        for i in 0..5 {
            assert_eq!(m.get(i, i), 0.1);
            for j in 0..5 {
                if i != j {
                    assert_eq!(m.get(i, j), 0.0);
                }
            }
        }
    }

    #[test]
    fn sparse_pd_hits_target_fraction() {
        let mut rng = RngStream::seeded(7);
        let dim = 200;
        let m = gen_sparse_pd(dim, 0.1, 1.0, 2.0_f64.sqrt(), &mut rng);
        let nonzero = m.nonzero_upper_offdiag() as f64;
        let total = (dim * (dim - 1) / 2) as f64;
        let frac = nonzero / total;
        assert!((frac - 0.1).abs() < 0.02, "fraction {frac}");
    }

    #[test]
    fn block_diag_structure() {
        let mut rng = RngStream::seeded(9);
        let m = gen_block_diag_pd(9, 3, 0.5, 0.01, &mut rng);
        // within-block entries near 0.5, between-block near 0
        assert!((m.get(0, 1) - 0.5).abs() < 0.1);
        assert!((m.get(3, 5) - 0.5).abs() < 0.1);
        assert!(m.get(0, 3).abs() < 0.1);
        let eig = sym_eigen(&m).unwrap();
        assert!(eig.values[0] > 0.0);
    }

    #[test]
    fn sampler_scalar_case_variance() {
        let model = KsModel::new(
            SymMatrix::new(1, vec![2.0], crate::linalg::Symmetrize::Strict).unwrap(),
            SymMatrix::new(1, vec![2.0], crate::linalg::Symmetrize::Strict).unwrap(),
        );
        let m = 100_000;
        let stack = sample_ks_normal(&model, m, &RngStream::seeded(5)).unwrap();
        let var: f64 = stack
            .replicates()
            .iter()
            .map(|r| r.get(0, 0) * r.get(0, 0))
            .sum::<f64>()
            / m as f64;
        assert!((var - 0.25).abs() < 0.01, "variance {var}");
    }

    #[test]
    fn sampler_rejects_indefinite_model() {
        let model = KsModel::new(SymMatrix::from_diag(&[-2.0]), SymMatrix::from_diag(&[1.0]));
        assert!(sample_ks_normal(&model, 1, &RngStream::seeded(0)).is_err());
    }

    #[test]
    fn simulation_is_reproducible() {
        let spec = SimSpec {
            n: 4,
            p: 3,
            m: 3,
            sparsity: 0.4,
            offdiag_mean: 1.0,
            offdiag_sd: 1.0,
            seed: 12345,
            count_params: Some(CountParams::default()),
            theta_blocks: None,
        };
        let (t1, d1) = simulate(&spec).unwrap();
        let (t2, d2) = simulate(&spec).unwrap();
        assert_eq!(t1, t2);
        assert_eq!(d1, d2);
    }

    #[test]
    fn counts_transform_pointwise() {
        let x = DenseMatrix::zeros(2, 2);
        let stack = DataStack::new(vec![x], DataKind::Gaussian).unwrap();
        let counts = gaussian_to_counts(&stack, 1, 0.5).unwrap();
        assert!(counts.replicate(0).as_slice().iter().all(|v| *v == 0.0));
        let x = DenseMatrix::new(1, 2, vec![-30.0, -8.0]).unwrap();
        let stack = DataStack::new(vec![x], DataKind::Gaussian).unwrap();
        let counts = gaussian_to_counts(&stack, 3, 0.3).unwrap();
        assert!(counts.replicate(0).as_slice().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn counts_transform_is_monotone() {
        let vals = vec![-9.0, -2.0, -0.5, 0.0, 0.3, 1.0, 2.5, 8.0, 40.0];
        let x = DenseMatrix::new(3, 3, vals.clone()).unwrap();
        let stack = DataStack::new(vec![x], DataKind::Gaussian).unwrap();
        let counts = gaussian_to_counts(&stack, 2, 0.4).unwrap();
        let out = counts.replicate(0).as_slice().to_vec();
        for w in out.windows(2) {
            assert!(w[0] <= w[1], "{out:?} not monotone for {vals:?}");
        }
    }

    #[test]
    fn counts_preserve_rank_statistics_of_latents() {
        // discretisation introduces ties only; tau moves by < 0.05
        let spec = SimSpec {
            n: 4,
            p: 500,
            m: 1,
            sparsity: 0.5,
            offdiag_mean: 1.0,
            offdiag_sd: 1.0,
            seed: 77,
            count_params: None,
            theta_blocks: None,
        };
        let (_, gaussian) = simulate_gaussian(&spec).unwrap();
        let counts = gaussian_to_counts(&gaussian, 5, 0.5).unwrap();
        let tau_g = crate::covariance::kendall_tau_rows(gaussian.replicate(0)).unwrap();
        let tau_c = crate::covariance::kendall_tau_rows(counts.replicate(0)).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert!(
                    (tau_g.get(i, j) - tau_c.get(i, j)).abs() < 0.05,
                    "tau mismatch at ({i}, {j}): {} vs {}",
                    tau_g.get(i, j),
                    tau_c.get(i, j)
                );
            }
        }
    }
}
