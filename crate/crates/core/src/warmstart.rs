//! Warm-start initialization from a source-task archive.
//!
//! The best `floor(gamma * N)` source trials become the centers of an
//! equal-weight isotropic Gaussian mixture with component std `alpha`. The
//! Gaussian closest to that mixture in KL(mixture || Gaussian) is its moment
//! match: the mean of the centers and `alpha^2 I` plus their population
//! covariance.

use nalgebra::{DMatrix, DVector};

use crate::cmaes::{CmaConfig, Covariance, CovarianceMode, MgdState};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::space::{Trial, TrialArchive};

pub const DEFAULT_GAMMA: f64 = 0.1;
pub const DEFAULT_ALPHA: f64 = 0.1;

/// Number of trials kept for a given `gamma`. A decimal `gamma` such as `0.29`
/// is not exactly representable, so a tiny slack keeps `0.29 * 100` at 29.
pub fn top_count(gamma: f64, n: usize) -> usize {
    (gamma * n as f64 + 1e-9).floor() as usize
}

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma > 0.0 && gamma <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("gamma {gamma} must lie in (0, 1]")))
    }
}

/// The `floor(gamma * N)` best trials, ascending by `(value, eval_index)`.
pub fn select_top_gamma<T: Scalar>(archive: &TrialArchive<T>, gamma: f64) -> Result<Vec<Trial<T>>> {
    check_gamma(gamma)?;
    let n = archive.len();
    let keep = top_count(gamma, n);
    if keep == 0 {
        return Err(Error::EmptySelection { gamma, n });
    }
    let mut sorted: Vec<&Trial<T>> = archive.trials().iter().collect();
    sorted.sort_by(|a, b| {
        a.value.partial_cmp(&b.value).expect("trial values are finite").then(a.eval_index.cmp(&b.eval_index))
    });
    Ok(sorted.into_iter().take(keep).cloned().collect())
}

/// Equal-weight mixture of `N(center_i, alpha^2 I)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PromisingGmm<T: Scalar> {
    centers: Vec<DVector<T>>,
    alpha: T,
}

impl<T: Scalar> PromisingGmm<T> {
    pub fn from_centers(centers: Vec<DVector<T>>, alpha: T) -> Result<Self> {
        if !(alpha > T::zero() && alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!("alpha {alpha} must be positive")));
        }
        let first =
            centers.first().ok_or_else(|| Error::InvalidParameter("mixture needs at least one center".into()))?;
        let dim = first.len();
        if dim == 0 {
            return Err(Error::InvalidParameter("zero-dimensional center".into()));
        }
        if let Some(c) = centers.iter().find(|c| c.len() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, got: c.len() });
        }
        Ok(Self { centers, alpha })
    }

    pub fn centers(&self) -> &[DVector<T>] {
        &self.centers
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    pub fn dim(&self) -> usize {
        self.centers[0].len()
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }
}

/// Builds the mixture over `top` (re-sorted by `(value, eval_index)` so the
/// centers are ordered best first).
pub fn build_gmm<T: Scalar>(top: &[Trial<T>], alpha: T) -> Result<PromisingGmm<T>> {
    let mut sorted: Vec<&Trial<T>> = top.iter().collect();
    sorted.sort_by(|a, b| {
        a.value.partial_cmp(&b.value).expect("trial values are finite").then(a.eval_index.cmp(&b.eval_index))
    });
    let centers = sorted.iter().map(|t| DVector::from_column_slice(&t.unit_point)).collect();
    PromisingGmm::from_centers(centers, alpha)
}

/// Convenience: select, then build.
pub fn promising_gmm<T: Scalar>(archive: &TrialArchive<T>, gamma: f64, alpha: T) -> Result<PromisingGmm<T>> {
    build_gmm(&select_top_gamma(archive, gamma)?, alpha)
}

/// Initial mean and covariance for a warm-started run.
#[derive(Debug, Clone, PartialEq)]
pub struct WarmStartInit<T: Scalar> {
    pub mean: DVector<T>,
    pub covariance: Covariance<T>,
}

impl<T: Scalar> WarmStartInit<T> {
    pub fn mode(&self) -> CovarianceMode {
        self.covariance.mode()
    }

    /// Factors the covariance into `sigma^2 C` with `det(C) = 1`.
    pub fn to_state(&self, config: &CmaConfig<T>) -> Result<MgdState<T>> {
        MgdState::init_from(self.mean.clone(), &self.covariance, config)
    }
}

fn centers_mean<T: Scalar>(gmm: &PromisingGmm<T>) -> DVector<T> {
    let mut sum = DVector::zeros(gmm.dim());
    for c in &gmm.centers {
        sum += c;
    }
    sum / T::from_count(gmm.len())
}

/// Full-covariance moment match.
pub fn fit_full<T: Scalar>(gmm: &PromisingGmm<T>) -> WarmStartInit<T> {
    let dim = gmm.dim();
    let n = T::from_count(gmm.len());
    let mean = centers_mean(gmm);
    let mut scatter = DMatrix::zeros(dim, dim);
    for c in &gmm.centers {
        let d = c - &mean;
        for i in 0..dim {
            for j in 0..dim {
                scatter[(i, j)] += d[i] * d[j];
            }
        }
    }
    let alpha_sq = gmm.alpha * gmm.alpha;
    let mut cov = scatter / n;
    for i in 0..dim {
        cov[(i, i)] += alpha_sq;
    }
    WarmStartInit { mean, covariance: Covariance::Full(cov) }
}

/// Diagonal moment match. Bit-identical to the diagonal of [`fit_full`].
pub fn fit_separable<T: Scalar>(gmm: &PromisingGmm<T>) -> WarmStartInit<T> {
    let dim = gmm.dim();
    let n = T::from_count(gmm.len());
    let mean = centers_mean(gmm);
    let mut scatter = DVector::zeros(dim);
    for c in &gmm.centers {
        let d = c - &mean;
        for j in 0..dim {
            scatter[j] += d[j] * d[j];
        }
    }
    let alpha_sq = gmm.alpha * gmm.alpha;
    let diag = (scatter / n).map(|v| v + alpha_sq);
    WarmStartInit { mean, covariance: Covariance::Diagonal(diag) }
}

pub fn fit<T: Scalar>(gmm: &PromisingGmm<T>, mode: CovarianceMode) -> WarmStartInit<T> {
    match mode {
        CovarianceMode::Full => fit_full(gmm),
        CovarianceMode::Separable => fit_separable(gmm),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::ParameterSpace;
    use proptest::prelude::*;

    fn archive(values: &[f64]) -> TrialArchive<f64> {
        let trials = values
            .iter()
            .enumerate()
            .map(|(i, &v)| Trial::new(vec![i as f64 / values.len() as f64], v, "t", i as u64).unwrap())
            .collect();
        TrialArchive::with_trials(ParameterSpace::unit_cube(1).unwrap(), trials).unwrap()
    }

    fn two_corner_gmm() -> PromisingGmm<f64> {
        PromisingGmm::from_centers(vec![DVector::from_vec(vec![0.0, 0.0]), DVector::from_vec(vec![1.0, 1.0])], 0.1)
            .unwrap()
    }

    #[test]
    fn top_gamma_counts() {
        let values: Vec<f64> = (0..100).map(|i| ((i * 37) % 100) as f64).collect();
        let top = select_top_gamma(&archive(&values), 0.1).unwrap();
        assert_eq!(top.len(), 10);
        assert!(top.windows(2).all(|w| w[0].value <= w[1].value));
        assert_eq!(top[0].value, 0.0);
        assert_eq!(top[9].value, 9.0);

        let ten: Vec<f64> = (0..10).rev().map(f64::from).collect();
        let all = select_top_gamma(&archive(&ten), 1.0).unwrap();
        assert_eq!(all.len(), 10);
        assert_eq!(all.iter().map(|t| t.value).collect::<Vec<_>>(), (0..10).map(f64::from).collect::<Vec<_>>());

        let err = select_top_gamma(&archive(&[1.0; 5]), 0.1).unwrap_err();
        assert!(matches!(err, Error::EmptySelection { n: 5, .. }));
        assert!(err.to_string().contains("larger gamma"));
        assert!(select_top_gamma(&archive(&[1.0; 5]), 0.0).is_err());
        assert!(select_top_gamma(&archive(&[1.0; 5]), 1.5).is_err());
    }

    #[test]
    fn top_count_tolerates_decimal_gamma() {
        assert_eq!(top_count(0.29, 100), 29);
        assert_eq!(top_count(0.1, 100), 10);
        assert_eq!(top_count(0.05, 100), 5);
        assert_eq!(top_count(0.1, 5), 0);
    }

    #[test]
    fn ties_break_by_eval_index() {
        let a = archive(&[2.0, 1.0, 1.0, 1.0]);
        let top = select_top_gamma(&a, 0.5).unwrap();
        assert_eq!(top.iter().map(|t| t.eval_index).collect::<Vec<_>>(), [1, 2]);
    }

    #[test]
    fn build_gmm_validates() {
        assert!(build_gmm::<f64>(&[], 0.1).is_err());
        let top = select_top_gamma(&archive(&[3.0, 1.0]), 1.0).unwrap();
        assert!(build_gmm(&top, 0.0).is_err());
        assert!(build_gmm(&top, -1.0).is_err());
        let gmm = build_gmm(&top, 0.2).unwrap();
        assert_eq!(gmm.len(), 2);
        assert_eq!(gmm.centers()[0][0], 0.5);
    }

    #[test]
    fn single_center_fit() {
        let c = DVector::from_vec(vec![0.3, 0.8, 0.1]);
        let gmm = PromisingGmm::from_centers(vec![c.clone()], 0.1).unwrap();
        let full = fit_full(&gmm);
        assert_eq!(full.mean, c);
        let expected = DMatrix::identity(3, 3) * 0.1f64.powi(2);
        assert_eq!(full.covariance.to_matrix(), expected);
        let sep = fit_separable(&gmm);
        assert_eq!(sep.covariance, Covariance::Diagonal(DVector::from_element(3, 0.1f64.powi(2))));
    }

    #[test]
    fn two_corner_fit() {
        let full = fit_full(&two_corner_gmm());
        assert_eq!(full.mean.as_slice(), &[0.5, 0.5]);
        let c = full.covariance.to_matrix();
        let expected = [[0.26, 0.25], [0.25, 0.26]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((c[(i, j)] - expected[i][j]).abs() < 1e-15);
            }
        }
        let sep = fit_separable(&two_corner_gmm());
        let d = sep.covariance.diagonal();
        assert!((d[0] - 0.26).abs() < 1e-15 && (d[1] - 0.26).abs() < 1e-15);
    }

    #[test]
    fn warm_state_factorisation() {
        let init = fit_full(&two_corner_gmm());
        let cfg = CmaConfig::new(2, 8, CovarianceMode::Full, 0).unwrap();
        let state = init.to_state(&cfg).unwrap();
        assert!((state.covariance() - init.covariance.to_matrix()).amax() < 1e-15);
        let det: f64 = 0.26 * 0.26 - 0.25 * 0.25;
        assert!((state.sigma - det.powf(0.25)).abs() < 1e-15);
    }

    fn centers_strategy() -> impl Strategy<Value = (Vec<Vec<f64>>, f64)> {
        (1usize..=4, 1usize..=10).prop_flat_map(|(d, n)| {
            (proptest::collection::vec(proptest::collection::vec(0.0f64..=1.0, d), n), 0.01f64..0.5)
        })
    }

    fn gmm_of(centers: &[Vec<f64>], alpha: f64) -> PromisingGmm<f64> {
        PromisingGmm::from_centers(centers.iter().map(|c| DVector::from_column_slice(c)).collect(), alpha).unwrap()
    }

    proptest! {
        #[test]
        fn separable_is_exact_diagonal_of_full((centers, alpha) in centers_strategy()) {
            let gmm = gmm_of(&centers, alpha);
            let full = fit_full(&gmm);
            let sep = fit_separable(&gmm);
            prop_assert_eq!(&full.mean, &sep.mean);
            prop_assert_eq!(full.covariance.diagonal(), sep.covariance.diagonal());
        }

        #[test]
        fn spectrum_is_floored_by_alpha_squared((centers, alpha) in centers_strategy()) {
            let full = fit_full(&gmm_of(&centers, alpha));
            let c = full.covariance.to_matrix();
            prop_assert!((&c - c.transpose()).amax() == 0.0);
            let min = full.covariance.eigenvalues().unwrap().min();
            prop_assert!(min >= alpha * alpha - 1e-12, "min eig {} alpha^2 {}", min, alpha * alpha);
            let sep = fit_separable(&gmm_of(&centers, alpha));
            prop_assert!(sep.covariance.diagonal().iter().all(|&l| l >= alpha * alpha));
        }

        #[test]
        fn translation_equivariance((centers, alpha) in centers_strategy(), shift in -1.0f64..1.0) {
            let moved: Vec<Vec<f64>> = centers.iter().map(|c| c.iter().enumerate().map(|(j, v)| v + shift * (j as f64 + 1.0)).collect()).collect();
            let a = fit_full(&gmm_of(&centers, alpha));
            let b = fit_full(&gmm_of(&moved, alpha));
            for j in 0..a.mean.len() {
                prop_assert!((b.mean[j] - a.mean[j] - shift * (j as f64 + 1.0)).abs() < 1e-12);
            }
            prop_assert!((a.covariance.to_matrix() - b.covariance.to_matrix()).amax() < 1e-12);
        }
    }
}
