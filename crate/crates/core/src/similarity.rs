//! Densities over the search space and Monte-Carlo task similarity.
//!
//! The similarity from a source task to a target task is
//! `KL(prior || target) - KL(source || target)`, where source and target are
//! the promising mixtures built from each task's archive. Positive values mean
//! the source says more about the target's good region than the prior does.

use nalgebra::{Cholesky, DVector, Dyn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::cmaes::{standard_normal_vector, Covariance};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::space::TrialArchive;
use crate::warmstart::{promising_gmm, PromisingGmm};

/// Default Monte-Carlo sample count.
pub const DEFAULT_SAMPLES: usize = 100_000;

/// Samples per independently seeded block. Fixed so that results do not depend
/// on how many worker threads evaluate the blocks.
const BLOCK: usize = 4096;

/// A log-density over `R^d` together with a sampler.
pub trait Density<T: Scalar>: Sync {
    fn dim(&self) -> usize;

    fn log_pdf(&self, x: &DVector<T>) -> T;

    fn sample(&self, rng: &mut ChaCha8Rng) -> DVector<T>;
}

fn half_log_two_pi<T: Scalar>() -> T {
    T::lit(0.5) * T::two_pi().ln()
}

/// Log-density of the equal-weight isotropic mixture, via log-sum-exp.
pub fn gmm_logpdf<T: Scalar>(gmm: &PromisingGmm<T>, x: &DVector<T>) -> T {
    let alpha = gmm.alpha();
    let inv_two_var = T::one() / (T::lit(2.0) * alpha * alpha);
    let exponents: Vec<T> = gmm.centers().iter().map(|c| -(x - c).norm_squared() * inv_two_var).collect();
    let max = exponents.iter().copied().fold(exponents[0], |a, b| a.max(b));
    let sum = exponents.iter().fold(T::zero(), |acc, &e| acc + (e - max).exp());
    let d = T::from_count(gmm.dim());
    max + sum.ln() - T::from_count(gmm.len()).ln() - d * (half_log_two_pi::<T>() + alpha.ln())
}

impl<T: Scalar> Density<T> for PromisingGmm<T> {
    fn dim(&self) -> usize {
        PromisingGmm::dim(self)
    }

    fn log_pdf(&self, x: &DVector<T>) -> T {
        gmm_logpdf(self, x)
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> DVector<T> {
        let k = rng.random_range(0..self.len());
        &self.centers()[k] + standard_normal_vector::<T>(self.dim(), rng) * self.alpha()
    }
}

/// Multivariate normal `N(mean, cov)`.
#[derive(Debug, Clone)]
pub struct GaussianDensity<T: Scalar> {
    mean: DVector<T>,
    chol: Cholesky<T, Dyn>,
    log_norm: T,
}

impl<T: Scalar> GaussianDensity<T> {
    pub fn new(mean: DVector<T>, cov: &Covariance<T>) -> Result<Self> {
        if cov.dim() != mean.len() {
            return Err(Error::DimensionMismatch { expected: mean.len(), got: cov.dim() });
        }
        cov.check_positive_definite()?;
        let chol = Cholesky::new(cov.to_matrix()).ok_or(Error::NotPositiveDefinite)?;
        let log_det = chol.l_dirty().diagonal().iter().fold(T::zero(), |a, &v| a + v.ln()) * T::lit(2.0);
        let log_norm = -(T::from_count(mean.len()) * half_log_two_pi::<T>() + T::lit(0.5) * log_det);
        Ok(Self { mean, chol, log_norm })
    }

    /// Independent coordinates with a common standard deviation.
    pub fn isotropic(mean: DVector<T>, std: T) -> Result<Self> {
        let dim = mean.len();
        Self::new(mean, &Covariance::Diagonal(DVector::from_element(dim, std * std)))
    }

    pub fn mean(&self) -> &DVector<T> {
        &self.mean
    }
}

impl<T: Scalar> Density<T> for GaussianDensity<T> {
    fn dim(&self) -> usize {
        self.mean.len()
    }

    fn log_pdf(&self, x: &DVector<T>) -> T {
        let diff = x - &self.mean;
        let w = self.chol.l_dirty().solve_lower_triangular(&diff).expect("cholesky factor is invertible");
        self.log_norm - T::lit(0.5) * w.norm_squared()
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> DVector<T> {
        &self.mean + self.chol.l() * standard_normal_vector::<T>(self.mean.len(), rng)
    }
}

/// Uniform on `[0,1]^d`.
#[derive(Debug, Clone, Copy)]
pub struct UniformCube {
    pub dim: usize,
}

impl<T: Scalar> Density<T> for UniformCube {
    fn dim(&self) -> usize {
        self.dim
    }

    fn log_pdf(&self, x: &DVector<T>) -> T {
        if x.iter().all(|&v| v >= T::zero() && v <= T::one()) {
            T::zero()
        } else {
            T::lit(f64::NEG_INFINITY)
        }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> DVector<T> {
        DVector::from_fn(self.dim, |_, _| T::unit_uniform(rng))
    }
}

/// Non-informative prior over the unit cube.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PriorKind {
    /// `N(0.5, 0.2^2)` per coordinate, the default CMA-ES start.
    #[default]
    Gaussian,
    Uniform,
}

impl PriorKind {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "gaussian" => Some(PriorKind::Gaussian),
            "uniform" => Some(PriorKind::Uniform),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            PriorKind::Gaussian => "gaussian",
            PriorKind::Uniform => "uniform",
        }
    }

    pub fn density<T: Scalar>(self, dim: usize) -> Box<dyn Density<T>> {
        match self {
            PriorKind::Gaussian => Box::new(
                GaussianDensity::isotropic(DVector::from_element(dim, T::lit(0.5)), T::lit(0.2))
                    .expect("isotropic prior is positive definite"),
            ),
            PriorKind::Uniform => Box::new(UniformCube { dim }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KlEstimate<T> {
    pub estimate: T,
    pub standard_error: T,
    pub n_samples: usize,
    /// Set when `n = 1`: the standard error is reported as zero but means nothing.
    pub low_confidence: bool,
}

/// Monte-Carlo `KL(p || q)` from `n` draws of `p`.
///
/// Draws are split into fixed blocks, each with its own ChaCha stream, so the
/// estimate is identical for any rayon pool size.
pub fn kl_mc<T: Scalar>(p: &dyn Density<T>, q: &dyn Density<T>, n: usize, seed: u64) -> Result<KlEstimate<T>> {
    if n == 0 {
        return Err(Error::InvalidParameter("Monte-Carlo sample count must be positive".into()));
    }
    if p.dim() != q.dim() {
        return Err(Error::DimensionMismatch { expected: p.dim(), got: q.dim() });
    }
    let blocks = n.div_ceil(BLOCK);
    let per_block: Vec<std::result::Result<Vec<T>, DVector<T>>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b as u64);
            let len = BLOCK.min(n - b * BLOCK);
            let mut diffs = Vec::with_capacity(len);
            for _ in 0..len {
                let x = p.sample(&mut rng);
                let d = p.log_pdf(&x) - q.log_pdf(&x);
                if !d.is_finite() {
                    return Err(x);
                }
                diffs.push(d);
            }
            Ok(diffs)
        })
        .collect();

    let mut diffs = Vec::with_capacity(n);
    for block in per_block {
        match block {
            Ok(d) => diffs.extend(d),
            Err(x) => {
                return Err(Error::NonFinite {
                    what: "log-density ratio",
                    point: x.iter().map(|v| v.as_f64()).collect(),
                })
            }
        }
    }

    let count = T::from_count(n);
    let mean = diffs.iter().fold(T::zero(), |a, &d| a + d) / count;
    let standard_error = if n > 1 {
        let ss = diffs.iter().fold(T::zero(), |a, &d| a + (d - mean) * (d - mean));
        (ss / T::from_count(n - 1)).sqrt() / count.sqrt()
    } else {
        T::zero()
    };
    Ok(KlEstimate { estimate: mean, standard_error, n_samples: n, low_confidence: n == 1 })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimilarityEstimate<T> {
    /// `kl_prior.estimate - kl_source.estimate`.
    pub s_hat: T,
    /// Both terms are independent, so their standard errors add in quadrature.
    pub standard_error: T,
    pub n_samples: usize,
    /// `KL(prior || target)`.
    pub kl_prior: KlEstimate<T>,
    /// `KL(source || target)`.
    pub kl_source: KlEstimate<T>,
}

/// Settings shared by every similarity estimate in an experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimilarityParams<T> {
    pub gamma_source: f64,
    pub gamma_target: f64,
    pub alpha: T,
    pub n_samples: usize,
    pub seed: u64,
}

pub fn gamma_similarity<T: Scalar>(
    source: &TrialArchive<T>,
    target: &TrialArchive<T>,
    prior: &dyn Density<T>,
    params: &SimilarityParams<T>,
) -> Result<SimilarityEstimate<T>> {
    if source.dim() != target.dim() {
        return Err(Error::DimensionMismatch { expected: target.dim(), got: source.dim() });
    }
    let source_gmm = promising_gmm(source, params.gamma_source, params.alpha)?;
    let target_gmm = promising_gmm(target, params.gamma_target, params.alpha)?;
    let kl_prior = kl_mc(prior, &target_gmm, params.n_samples, params.seed)?;
    // A distinct seed keeps the two estimators independent.
    let kl_source = kl_mc(&source_gmm, &target_gmm, params.n_samples, params.seed ^ 0x9e37_79b9_7f4a_7c15)?;
    let se = (kl_prior.standard_error * kl_prior.standard_error + kl_source.standard_error * kl_source.standard_error)
        .sqrt();
    Ok(SimilarityEstimate {
        s_hat: kl_prior.estimate - kl_source.estimate,
        standard_error: se,
        n_samples: params.n_samples,
        kl_prior,
        kl_source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{ParameterSpace, Trial};
    use nalgebra::DMatrix;

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(x)
    }

    fn mvn_logpdf_oracle(x: &[f64], mean: &[f64], var: f64) -> f64 {
        let d = x.len() as f64;
        let sq: f64 = x.iter().zip(mean).map(|(a, b)| (a - b).powi(2)).sum();
        -0.5 * d * (2.0 * std::f64::consts::PI * var).ln() - sq / (2.0 * var)
    }

    #[test]
    fn single_component_matches_normal() {
        let gmm = PromisingGmm::from_centers(vec![v(&[0.2, 0.7, 0.4])], 0.15).unwrap();
        for x in [[0.2, 0.7, 0.4], [0.0, 0.0, 0.0], [1.3, -0.2, 0.5]] {
            let expected = mvn_logpdf_oracle(&x, &[0.2, 0.7, 0.4], 0.15 * 0.15);
            assert!((gmm_logpdf(&gmm, &v(&x)) - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn log_density_at_center() {
        let gmm = PromisingGmm::from_centers(vec![v(&[0.4, 0.6])], 0.1).unwrap();
        let expected = -(2.0 * std::f64::consts::PI * 0.01).ln();
        assert!((expected - 2.7672).abs() < 1e-4);
        assert!((gmm_logpdf(&gmm, &v(&[0.4, 0.6])) - expected).abs() < 1e-12);
    }

    #[test]
    fn symmetric_centers_have_equal_density() {
        let gmm = PromisingGmm::from_centers(vec![v(&[0.2, 0.3]), v(&[0.8, 0.7])], 0.1).unwrap();
        assert!((gmm_logpdf(&gmm, &v(&[0.2, 0.3])) - gmm_logpdf(&gmm, &v(&[0.8, 0.7]))).abs() < 1e-12);
    }

    #[test]
    fn duplicate_centers_collapse() {
        let one = PromisingGmm::from_centers(vec![v(&[0.5, 0.5])], 0.1).unwrap();
        let two = PromisingGmm::from_centers(vec![v(&[0.5, 0.5]), v(&[0.5, 0.5])], 0.1).unwrap();
        for x in [[0.5, 0.5], [0.1, 0.9], [3.0, -2.0]] {
            assert!((gmm_logpdf(&one, &v(&x)) - gmm_logpdf(&two, &v(&x))).abs() < 1e-12);
        }
    }

    #[test]
    fn corner_mixture_density_at_midpoint() {
        let gmm = PromisingGmm::from_centers(vec![v(&[0.0, 0.0]), v(&[1.0, 1.0])], 0.1).unwrap();
        let var = 0.01;
        let pdf = |c: [f64; 2]| {
            let sq = (0.5 - c[0]).powi(2) + (0.5 - c[1]).powi(2);
            (-sq / (2.0 * var)).exp() / (2.0 * std::f64::consts::PI * var)
        };
        let expected = 0.5 * (pdf([0.0, 0.0]) + pdf([1.0, 1.0]));
        let got = gmm_logpdf(&gmm, &v(&[0.5, 0.5])).exp();
        assert!((got - expected).abs() / expected < 1e-12);
    }

    #[test]
    fn far_points_stay_finite() {
        let gmm = PromisingGmm::from_centers(vec![v(&[0.0]), v(&[1.0])], 0.01).unwrap();
        let lp = gmm_logpdf(&gmm, &v(&[50.0]));
        assert!(lp.is_finite());
        let expected = mvn_logpdf_oracle(&[50.0], &[1.0], 1e-4) - 2f64.ln();
        assert!((lp - expected).abs() / expected.abs() < 1e-12);
    }

    #[test]
    fn gaussian_density_matches_oracle() {
        let cov = DMatrix::from_row_slice(2, 2, &[0.04, 0.01, 0.01, 0.09]);
        let g = GaussianDensity::new(v(&[0.3, 0.6]), &Covariance::Full(cov.clone())).unwrap();
        let x = v(&[0.5, 0.1]);
        let diff = &x - v(&[0.3, 0.6]);
        let inv = cov.clone().try_inverse().unwrap();
        let quad = (diff.transpose() * inv * &diff)[(0, 0)];
        let expected = -(2.0 * std::f64::consts::PI).ln() - 0.5 * cov.determinant().ln() - 0.5 * quad;
        assert!((g.log_pdf(&x) - expected).abs() < 1e-12);
    }

    #[test]
    fn kl_of_identical_density_is_zero() {
        let p = GaussianDensity::isotropic(v(&[0.5, 0.5]), 0.2).unwrap();
        let kl = kl_mc(&p, &p, 1000, 3).unwrap();
        assert_eq!(kl.estimate, 0.0);
        assert_eq!(kl.standard_error, 0.0);
        let gmm = PromisingGmm::from_centers(vec![v(&[0.1, 0.2]), v(&[0.6, 0.6])], 0.1).unwrap();
        assert_eq!(kl_mc(&gmm, &gmm, 1000, 3).unwrap().estimate, 0.0);
    }

    #[test]
    fn gaussian_kl_matches_closed_form() {
        // KL(N(a, s^2 I) || N(b, s^2 I)) = |a - b|^2 / (2 s^2) = 0.01 / 0.08.
        let p = GaussianDensity::isotropic(v(&[0.0, 0.0]), 0.2).unwrap();
        let q = GaussianDensity::isotropic(v(&[0.1, 0.0]), 0.2).unwrap();
        let kl = kl_mc(&p, &q, 1_000_000, 17).unwrap();
        assert!((kl.estimate - 0.125).abs() < 3.0 * kl.standard_error, "{kl:?}");
    }

    #[test]
    fn single_sample_is_low_confidence() {
        let p = GaussianDensity::isotropic(v(&[0.0]), 1.0).unwrap();
        let q = GaussianDensity::isotropic(v(&[1.0]), 1.0).unwrap();
        let kl = kl_mc(&p, &q, 1, 0).unwrap();
        assert_eq!(kl.standard_error, 0.0);
        assert!(kl.low_confidence);
        assert!(!kl_mc(&p, &q, 2, 0).unwrap().low_confidence);
        assert!(kl_mc(&p, &q, 0, 0).is_err());
    }

    #[test]
    fn non_finite_log_ratio_reports_point() {
        let p = GaussianDensity::isotropic(v(&[0.5, 0.5]), 1.0).unwrap();
        let q = UniformCube { dim: 2 };
        let err = kl_mc(&p, &q, 10_000, 0).unwrap_err();
        match err {
            Error::NonFinite { point, .. } => assert!(point.iter().any(|c| !(0.0..=1.0).contains(c))),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn estimate_independent_of_worker_count() {
        let p = PromisingGmm::from_centers(vec![v(&[0.1, 0.2]), v(&[0.6, 0.6])], 0.1).unwrap();
        let q = GaussianDensity::isotropic(v(&[0.5, 0.5]), 0.2).unwrap();
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| kl_mc(&p, &q, 50_000, 99).unwrap())
        };
        assert_eq!(run(1), run(3));
    }

    #[test]
    fn standard_error_shrinks_with_sqrt_n() {
        let p = GaussianDensity::isotropic(v(&[0.0, 0.0]), 0.2).unwrap();
        let q = GaussianDensity::isotropic(v(&[0.1, 0.05]), 0.25).unwrap();
        let small = kl_mc(&p, &q, 2_000, 5).unwrap().standard_error;
        let large = kl_mc(&p, &q, 200_000, 5).unwrap().standard_error;
        let ratio = small / large;
        assert!((5.0..=20.0).contains(&ratio), "ratio {ratio}");
    }

    fn grid_archive(center: f64) -> TrialArchive<f64> {
        let mut trials = Vec::new();
        for i in 0..10 {
            for j in 0..10 {
                let x = vec![i as f64 / 9.0, j as f64 / 9.0];
                let f = (x[0] - center).powi(2) + (x[1] - center).powi(2);
                trials.push(Trial::new(x, f, "grid", (i * 10 + j) as u64).unwrap());
            }
        }
        TrialArchive::with_trials(ParameterSpace::unit_cube(2).unwrap(), trials).unwrap()
    }

    fn params(n: usize) -> SimilarityParams<f64> {
        SimilarityParams { gamma_source: 0.1, gamma_target: 0.1, alpha: 0.1, n_samples: n, seed: 4 }
    }

    #[test]
    fn identical_tasks() {
        let a = grid_archive(0.6);
        let prior = PriorKind::Gaussian.density(2);
        let s = gamma_similarity(&a, &a, prior.as_ref(), &params(20_000)).unwrap();
        assert_eq!(s.kl_source.estimate, 0.0);
        assert_eq!(s.s_hat, s.kl_prior.estimate - s.kl_source.estimate);
        assert!(s.s_hat >= -3.0 * s.standard_error);
        assert!(s.s_hat > 0.0);
    }

    #[test]
    fn closer_source_is_more_similar() {
        let target = grid_archive(0.6);
        let prior = PriorKind::Uniform.density(2);
        let near = gamma_similarity(&grid_archive(0.5), &target, prior.as_ref(), &params(20_000)).unwrap();
        let far = gamma_similarity(&grid_archive(0.2), &target, prior.as_ref(), &params(20_000)).unwrap();
        assert!(near.s_hat > far.s_hat);
        assert_eq!(far.s_hat, far.kl_prior.estimate - far.kl_source.estimate);
    }

    #[test]
    fn too_small_gamma_errors() {
        let a = grid_archive(0.6);
        let prior = PriorKind::Gaussian.density(2);
        let mut p = params(100);
        p.gamma_target = 0.001;
        assert!(matches!(gamma_similarity(&a, &a, prior.as_ref(), &p), Err(Error::EmptySelection { .. })));
    }
}
