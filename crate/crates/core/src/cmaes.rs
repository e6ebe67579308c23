//! CMA-ES on the unit cube, full or separable (diagonal) covariance.
//!
//! The search distribution is `N(m, sigma^2 C)`. Strategy constants follow the
//! standard tutorial defaults with positive recombination weights only. The
//! state update is a pure function: [`MgdState::tell`] returns a new state.

use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Read, Write};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::ask_tell::AskTell;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Draws per candidate before falling back to clamping.
pub const MAX_RESAMPLES: usize = 100;

/// Learning-rate multiplier for the diagonal-only update, `(d + 2) / 3`
/// (Ros & Hansen, "A simple modification in CMA-ES achieving linear time and
/// space complexity", 2008).
pub fn separable_lr_factor(dim: usize) -> f64 {
    (dim as f64 + 2.0) / 3.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CovarianceMode {
    Full,
    Separable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bounds {
    /// Resample up to [`MAX_RESAMPLES`] times, then clamp into `[0,1]^d`.
    UnitCube,
    Unbounded,
}

/// Shape matrix, or a full covariance, in either representation.
#[derive(Debug, Clone, PartialEq)]
pub enum Covariance<T: Scalar> {
    Full(DMatrix<T>),
    Diagonal(DVector<T>),
}

impl<T: Scalar> Covariance<T> {
    pub fn identity(dim: usize, mode: CovarianceMode) -> Self {
        match mode {
            CovarianceMode::Full => Covariance::Full(DMatrix::identity(dim, dim)),
            CovarianceMode::Separable => Covariance::Diagonal(DVector::from_element(dim, T::one())),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Covariance::Full(c) => c.nrows(),
            Covariance::Diagonal(c) => c.len(),
        }
    }

    pub fn mode(&self) -> CovarianceMode {
        match self {
            Covariance::Full(_) => CovarianceMode::Full,
            Covariance::Diagonal(_) => CovarianceMode::Separable,
        }
    }

    /// Dense matrix view; off-diagonals are exactly zero for the diagonal form.
    pub fn to_matrix(&self) -> DMatrix<T> {
        match self {
            Covariance::Full(c) => c.clone(),
            Covariance::Diagonal(c) => DMatrix::from_diagonal(c),
        }
    }

    pub fn diagonal(&self) -> DVector<T> {
        match self {
            Covariance::Full(c) => c.diagonal(),
            Covariance::Diagonal(c) => c.clone(),
        }
    }

    fn scaled(&self, k: T) -> Self {
        match self {
            Covariance::Full(c) => Covariance::Full(c * k),
            Covariance::Diagonal(c) => Covariance::Diagonal(c * k),
        }
    }

    /// Eigenvalues (ascending is not guaranteed). Errors if the decomposition fails.
    pub fn eigenvalues(&self) -> Result<DVector<T>> {
        match self {
            Covariance::Full(c) => Ok(symmetric_eigen(c)?.eigenvalues),
            Covariance::Diagonal(c) => Ok(c.clone()),
        }
    }

    /// Checks symmetry and strict positive definiteness.
    pub fn check_positive_definite(&self) -> Result<()> {
        if let Covariance::Full(c) = self {
            if !c.is_square() {
                return Err(Error::NotPositiveDefinite);
            }
            let scale = c.amax();
            let tol = T::lit(1e-12) * scale.max(T::one());
            for i in 0..c.nrows() {
                for j in 0..i {
                    if (c[(i, j)] - c[(j, i)]).abs() > tol {
                        return Err(Error::NotPositiveDefinite);
                    }
                }
            }
        }
        let eig = self.eigenvalues().map_err(|_| Error::NotPositiveDefinite)?;
        if eig.iter().all(|&e| e.is_finite() && e > T::zero()) {
            Ok(())
        } else {
            Err(Error::NotPositiveDefinite)
        }
    }

    /// Log-determinant, assuming positive definiteness.
    pub fn log_det(&self) -> Result<T> {
        Ok(self.eigenvalues()?.iter().fold(T::zero(), |acc, &e| acc + e.ln()))
    }
}

fn symmetric_eigen<T: Scalar>(c: &DMatrix<T>) -> Result<SymmetricEigen<T, nalgebra::Dyn>> {
    SymmetricEigen::try_new(c.clone(), T::default_epsilon(), 0).ok_or(Error::Decomposition)
}

/// Maps standard normal draws to `N(0, C)`: `y = B D z` with `C = B D^2 B^T`,
/// along with the whitening `C^{-1/2}`.
#[derive(Debug, Clone)]
pub(crate) enum ShapeTransform<T: Scalar> {
    Full { bd: DMatrix<T>, inv_sqrt: DMatrix<T> },
    Diagonal { sqrt: DVector<T> },
}

impl<T: Scalar> ShapeTransform<T> {
    pub(crate) fn new(cov: &Covariance<T>) -> Result<Self> {
        match cov {
            Covariance::Full(c) => {
                let eig = symmetric_eigen(c)?;
                if !eig.eigenvalues.iter().all(|&e| e.is_finite() && e > T::zero()) {
                    return Err(Error::Decomposition);
                }
                let d = eig.eigenvalues.map(|e| e.sqrt());
                let b = eig.eigenvectors;
                let bd = &b * DMatrix::from_diagonal(&d);
                let inv_sqrt = &b * DMatrix::from_diagonal(&d.map(|e| T::one() / e)) * b.transpose();
                Ok(ShapeTransform::Full { bd, inv_sqrt })
            }
            Covariance::Diagonal(c) => {
                if !c.iter().all(|&e| e.is_finite() && e > T::zero()) {
                    return Err(Error::Decomposition);
                }
                Ok(ShapeTransform::Diagonal { sqrt: c.map(|e| e.sqrt()) })
            }
        }
    }

    pub(crate) fn apply(&self, z: &DVector<T>) -> DVector<T> {
        match self {
            ShapeTransform::Full { bd, .. } => bd * z,
            ShapeTransform::Diagonal { sqrt } => sqrt.component_mul(z),
        }
    }

    fn whiten(&self, y: &DVector<T>) -> DVector<T> {
        match self {
            ShapeTransform::Full { inv_sqrt, .. } => inv_sqrt * y,
            ShapeTransform::Diagonal { sqrt } => y.component_div(sqrt),
        }
    }
}

fn in_unit_cube<T: Scalar>(x: &DVector<T>) -> bool {
    x.iter().all(|&v| v >= T::zero() && v <= T::one())
}

pub(crate) fn standard_normal_vector<T: Scalar>(dim: usize, rng: &mut ChaCha8Rng) -> DVector<T> {
    DVector::from_fn(dim, |_, _| T::standard_normal(rng))
}

/// Samples `mean + scale * transform(z)` with the box handling selected by `bounds`.
/// Returns the candidate and the normal draw that produced it.
pub(crate) fn sample_constrained<T: Scalar>(
    mean: &DVector<T>,
    scale: T,
    transform: &ShapeTransform<T>,
    bounds: Bounds,
    rng: &mut ChaCha8Rng,
) -> (DVector<T>, DVector<T>) {
    constrained(bounds, || {
        let z = standard_normal_vector(mean.len(), rng);
        let x = mean + transform.apply(&z) * scale;
        (x, z)
    })
}

/// Calls `draw` until its point lands in the unit cube, at most [`MAX_RESAMPLES`]
/// times, and clamps the last draw otherwise.
pub(crate) fn constrained<T: Scalar, A>(bounds: Bounds, mut draw: impl FnMut() -> (DVector<T>, A)) -> (DVector<T>, A) {
    let mut last = draw();
    if bounds == Bounds::Unbounded {
        return last;
    }
    for _ in 1..MAX_RESAMPLES {
        if in_unit_cube(&last.0) {
            return last;
        }
        last = draw();
    }
    if !in_unit_cube(&last.0) {
        last.0.apply(|v| *v = v.max(T::zero()).min(T::one()));
    }
    last
}

/// Population size and the strategy constants derived from it.
#[derive(Debug, Clone, PartialEq)]
pub struct CmaConfig<T> {
    dim: usize,
    lambda: usize,
    mode: CovarianceMode,
    bounds: Bounds,
    seed: u64,
    weights: Vec<T>,
    mu_eff: T,
    c_sigma: T,
    d_sigma: T,
    c_c: T,
    c1: T,
    c_mu: T,
    chi_n: T,
}

impl<T: Scalar> CmaConfig<T> {
    pub fn new(dim: usize, lambda: usize, mode: CovarianceMode, seed: u64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("dimension must be at least 1".into()));
        }
        if lambda < 2 {
            return Err(Error::InvalidParameter(format!("population size {lambda} < 2")));
        }
        let n = dim as f64;
        let mu = lambda / 2;
        let raw: Vec<f64> = (1..=mu).map(|i| ((lambda as f64 + 1.0) / 2.0).ln() - (i as f64).ln()).collect();
        let total: f64 = raw.iter().sum();
        let weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
        let mu_eff = 1.0 / weights.iter().map(|w| w * w).sum::<f64>();

        let c_sigma = (mu_eff + 2.0) / (n + mu_eff + 5.0);
        let d_sigma = 1.0 + 2.0 * (((mu_eff - 1.0) / (n + 1.0)).sqrt() - 1.0).max(0.0) + c_sigma;
        let c_c = (4.0 + mu_eff / n) / (n + 4.0 + 2.0 * mu_eff / n);
        let mut c1 = 2.0 / ((n + 1.3).powi(2) + mu_eff);
        let mut c_mu = (2.0 * (mu_eff - 2.0 + 1.0 / mu_eff) / ((n + 2.0).powi(2) + mu_eff)).min(1.0 - c1);
        if mode == CovarianceMode::Separable {
            let k = separable_lr_factor(dim);
            c1 = (c1 * k).min(1.0);
            c_mu = (c_mu * k).min(1.0 - c1);
        }
        let chi_n = n.sqrt() * (1.0 - 1.0 / (4.0 * n) + 1.0 / (21.0 * n * n));

        Ok(Self {
            dim,
            lambda,
            mode,
            bounds: Bounds::UnitCube,
            seed,
            weights: weights.into_iter().map(T::lit).collect(),
            mu_eff: T::lit(mu_eff),
            c_sigma: T::lit(c_sigma),
            d_sigma: T::lit(d_sigma),
            c_c: T::lit(c_c),
            c1: T::lit(c1),
            c_mu: T::lit(c_mu.max(0.0)),
            chi_n: T::lit(chi_n),
        })
    }

    pub fn with_bounds(mut self, bounds: Bounds) -> Self {
        self.bounds = bounds;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lambda(&self) -> usize {
        self.lambda
    }

    pub fn mu(&self) -> usize {
        self.weights.len()
    }

    pub fn mode(&self) -> CovarianceMode {
        self.mode
    }

    pub fn bounds(&self) -> Bounds {
        self.bounds
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn mu_eff(&self) -> T {
        self.mu_eff
    }

    /// `(c_sigma, d_sigma, c_c, c1, c_mu)`.
    pub fn learning_rates(&self) -> (T, T, T, T, T) {
        (self.c_sigma, self.d_sigma, self.c_c, self.c1, self.c_mu)
    }
}

/// Mean, step size, shape matrix and evolution paths.
#[derive(Debug, Clone, PartialEq)]
pub struct MgdState<T: Scalar> {
    pub mean: DVector<T>,
    pub sigma: T,
    pub cov: Covariance<T>,
    pub p_sigma: DVector<T>,
    pub p_c: DVector<T>,
    pub generation: u64,
}

/// One sampled population. `draws[i]` is the normal vector behind `candidates[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Generation<T: Scalar> {
    pub generation: u64,
    pub candidates: Vec<DVector<T>>,
    pub draws: Vec<DVector<T>>,
}

impl<T: Scalar> MgdState<T> {
    /// `N(0.5, 0.2^2)` per coordinate.
    pub fn init_default(config: &CmaConfig<T>) -> Self {
        let dim = config.dim;
        Self {
            mean: DVector::from_element(dim, T::lit(0.5)),
            sigma: T::lit(0.2),
            cov: Covariance::identity(dim, config.mode),
            p_sigma: DVector::zeros(dim),
            p_c: DVector::zeros(dim),
            generation: 0,
        }
    }

    /// Factors `sigma0` as `sigma^2 C` with `det(C) = 1`.
    pub fn init_from(mean: DVector<T>, sigma0: &Covariance<T>, config: &CmaConfig<T>) -> Result<Self> {
        let dim = config.dim;
        if mean.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: mean.len() });
        }
        if sigma0.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: sigma0.dim() });
        }
        sigma0.check_positive_definite()?;
        let sigma0 = match (config.mode, sigma0) {
            (CovarianceMode::Full, Covariance::Diagonal(d)) => Covariance::Full(DMatrix::from_diagonal(d)),
            (CovarianceMode::Separable, Covariance::Full(_)) => {
                return Err(Error::InvalidParameter("separable mode needs a diagonal initial covariance".into()))
            }
            (_, s) => s.clone(),
        };
        let sigma = (sigma0.log_det()? / (T::lit(2.0) * T::from_count(dim))).exp();
        let cov = sigma0.scaled(T::one() / (sigma * sigma));
        Ok(Self { mean, sigma, cov, p_sigma: DVector::zeros(dim), p_c: DVector::zeros(dim), generation: 0 })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// `sigma^2 C`.
    pub fn covariance(&self) -> DMatrix<T> {
        self.cov.to_matrix() * (self.sigma * self.sigma)
    }

    /// Same distribution, evolution paths and generation counter cleared.
    pub fn with_reset_paths(&self) -> Self {
        Self { p_sigma: DVector::zeros(self.dim()), p_c: DVector::zeros(self.dim()), generation: 0, ..self.clone() }
    }

    fn check_config(&self, config: &CmaConfig<T>) -> Result<()> {
        if self.dim() != config.dim {
            return Err(Error::DimensionMismatch { expected: config.dim, got: self.dim() });
        }
        if self.cov.mode() != config.mode {
            return Err(Error::InvalidParameter("state and config disagree on covariance mode".into()));
        }
        if !(self.sigma > T::zero() && self.sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!("step size {} is not positive", self.sigma)));
        }
        Ok(())
    }

    /// Samples `lambda` candidates. The draws depend only on `(seed, generation)`.
    pub fn ask(&self, config: &CmaConfig<T>) -> Result<Generation<T>> {
        self.check_config(config)?;
        let transform = ShapeTransform::new(&self.cov)?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(self.generation);
        let (candidates, draws) = (0..config.lambda)
            .map(|_| sample_constrained(&self.mean, self.sigma, &transform, config.bounds, &mut rng))
            .unzip();
        Ok(Generation { generation: self.generation, candidates, draws })
    }

    /// Applies one CMA-ES update from the ranked candidates.
    ///
    /// Steps are recomputed from the candidates actually evaluated
    /// (`(x - m) / sigma`), so clamped points enter the update as evaluated.
    pub fn tell(&self, generation: &Generation<T>, values: &[T], config: &CmaConfig<T>) -> Result<Self> {
        self.check_config(config)?;
        if generation.generation != self.generation {
            return Err(Error::InvalidParameter(format!(
                "generation {} told to state at generation {}",
                generation.generation, self.generation
            )));
        }
        if values.len() != generation.candidates.len() || values.len() != config.lambda {
            return Err(Error::DimensionMismatch { expected: config.lambda, got: values.len() });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                what: "objective value",
                point: generation.candidates[i].iter().map(|c| c.as_f64()).collect(),
            });
        }

        let dim = self.dim();
        let n = T::from_count(dim);
        let two = T::lit(2.0);
        let (c_sigma, d_sigma, c_c, c1, c_mu) = config.learning_rates();
        let transform = ShapeTransform::new(&self.cov)?;

        let mut order: Vec<usize> = (0..values.len()).collect();
        order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).expect("finite").then(a.cmp(&b)));

        let steps: Vec<DVector<T>> =
            order[..config.mu()].iter().map(|&i| (&generation.candidates[i] - &self.mean) / self.sigma).collect();
        let mut y_w = DVector::zeros(dim);
        for (w, y) in config.weights.iter().zip(&steps) {
            y_w.axpy(*w, y, T::one());
        }

        let mean = &self.mean + &y_w * self.sigma;

        let p_sigma = &self.p_sigma * (T::one() - c_sigma)
            + transform.whiten(&y_w) * (c_sigma * (two - c_sigma) * config.mu_eff).sqrt();
        let ps_norm = p_sigma.norm();
        let sigma = self.sigma * ((c_sigma / d_sigma) * (ps_norm / config.chi_n - T::one())).exp();

        let gens_done = T::lit((self.generation + 1) as f64);
        let ps_correction = (T::one() - (T::one() - c_sigma).powf(two * gens_done)).sqrt();
        let h_sigma = ps_norm / ps_correction < (T::lit(1.4) + two / (n + T::one())) * config.chi_n;

        let mut p_c = &self.p_c * (T::one() - c_c);
        if h_sigma {
            p_c += &y_w * (c_c * (two - c_c) * config.mu_eff).sqrt();
        }
        let delta_h = if h_sigma { T::zero() } else { c_c * (two - c_c) };
        let weight_sum = config.weights.iter().fold(T::zero(), |a, &w| a + w);
        let decay = T::one() + c1 * delta_h - c1 - c_mu * weight_sum;

        let cov = match &self.cov {
            Covariance::Full(c) => {
                let mut next = c * decay;
                next.ger(c1, &p_c, &p_c, T::one());
                for (w, y) in config.weights.iter().zip(&steps) {
                    next.ger(c_mu * *w, y, y, T::one());
                }
                let sym = (&next + next.transpose()) * T::lit(0.5);
                Covariance::Full(sym)
            }
            Covariance::Diagonal(c) => {
                let mut next = c * decay;
                next += p_c.component_mul(&p_c) * c1;
                for (w, y) in config.weights.iter().zip(&steps) {
                    next += y.component_mul(y) * (c_mu * *w);
                }
                Covariance::Diagonal(next)
            }
        };

        // Keep det(C) = 1: move C's overall scale into sigma (and p_c, which lives
        // in the same units as C's square root). The sampled distribution is unchanged.
        let log_det = cov.log_det()?;
        if !log_det.is_finite() {
            return Err(Error::Decomposition);
        }
        let k = (log_det / (two * n)).exp();
        let cov = cov.scaled(T::one() / (k * k));
        let p_c = p_c / k;
        let sigma = sigma * k;

        if !(sigma.is_finite() && sigma > T::zero()) || !mean.iter().all(|v| v.is_finite()) {
            return Err(Error::Decomposition);
        }

        Ok(Self { mean, sigma, cov, p_sigma, p_c, generation: self.generation + 1 })
    }

    /// Writes the `#ws-mgd v1` text block.
    pub fn write_to<W: Write>(&self, mut out: W) -> Result<()> {
        let join = |v: &DVector<T>| v.iter().map(|x| x.to_decimal()).collect::<Vec<_>>().join(",");
        let c = self.cov.to_matrix();
        let mut text = String::new();
        let _ = writeln!(text, "#ws-mgd v1 d={}", self.dim());
        let _ = writeln!(text, "m={}", join(&self.mean));
        let _ = writeln!(text, "sigma={}", self.sigma.to_decimal());
        let _ = writeln!(text, "C=");
        for row in c.row_iter() {
            let _ = writeln!(text, "{}", row.iter().map(|x| x.to_decimal()).collect::<Vec<_>>().join(","));
        }
        let mode = match self.cov.mode() {
            CovarianceMode::Full => "full",
            CovarianceMode::Separable => "separable",
        };
        let _ = writeln!(text, "mode={mode}");
        let _ = writeln!(text, "p_sigma={}", join(&self.p_sigma));
        let _ = writeln!(text, "p_c={}", join(&self.p_c));
        let _ = writeln!(text, "generation={}", self.generation);
        out.write_all(text.as_bytes())?;
        out.flush()?;
        Ok(())
    }

    /// Reads a `#ws-mgd v1` block. Lines after the `C` rows are optional; missing
    /// paths default to zero and a missing mode to full.
    pub fn read_from<R: Read>(input: R) -> Result<Self> {
        let lines: Vec<String> = BufReader::new(input).lines().collect::<std::io::Result<_>>()?;
        let perr = |line: usize, message: String| Error::Parse { line, message };
        let get =
            |i: usize| lines.get(i).map(String::as_str).ok_or_else(|| perr(i + 1, "unexpected end of file".into()));
        let parse_vec = |s: &str, line: usize, dim: usize| -> Result<DVector<T>> {
            let vals = s
                .split(',')
                .map(|f| T::parse_decimal(f).ok_or_else(|| perr(line, format!("non-numeric field {f:?}"))))
                .collect::<Result<Vec<_>>>()?;
            if vals.len() != dim {
                return Err(perr(line, format!("expected {dim} values, found {}", vals.len())));
            }
            Ok(DVector::from_vec(vals))
        };

        let dim: usize = get(0)?
            .strip_prefix("#ws-mgd v1 d=")
            .and_then(|d| d.trim().parse().ok())
            .filter(|&d| d > 0)
            .ok_or_else(|| perr(1, "expected `#ws-mgd v1 d=<dim>`".into()))?;
        let mean = parse_vec(get(1)?.strip_prefix("m=").ok_or_else(|| perr(2, "expected `m=`".into()))?, 2, dim)?;
        let sigma = get(2)?
            .strip_prefix("sigma=")
            .and_then(T::parse_decimal)
            .ok_or_else(|| perr(3, "expected `sigma=<real>`".into()))?;
        if get(3)?.trim() != "C=" {
            return Err(perr(4, "expected `C=`".into()));
        }
        let mut c = DMatrix::zeros(dim, dim);
        for r in 0..dim {
            let row = parse_vec(get(4 + r)?, 5 + r, dim)?;
            c.set_row(r, &row.transpose());
        }

        let mut mode = CovarianceMode::Full;
        let mut p_sigma = DVector::zeros(dim);
        let mut p_c = DVector::zeros(dim);
        let mut generation = 0;
        for (i, line) in lines.iter().enumerate().skip(4 + dim) {
            let line_no = i + 1;
            if line.trim().is_empty() {
                continue;
            }
            let (key, value) =
                line.split_once('=').ok_or_else(|| perr(line_no, format!("expected key=value, got {line:?}")))?;
            match key {
                "mode" => {
                    mode = match value {
                        "full" => CovarianceMode::Full,
                        "separable" => CovarianceMode::Separable,
                        other => return Err(perr(line_no, format!("unknown mode {other:?}"))),
                    }
                }
                "p_sigma" => p_sigma = parse_vec(value, line_no, dim)?,
                "p_c" => p_c = parse_vec(value, line_no, dim)?,
                "generation" => {
                    generation = value.parse().map_err(|_| perr(line_no, format!("bad generation {value:?}")))?
                }
                other => return Err(perr(line_no, format!("unknown key {other:?}"))),
            }
        }

        let cov = match mode {
            CovarianceMode::Full => Covariance::Full(c),
            CovarianceMode::Separable => {
                if (0..dim).any(|i| (0..dim).any(|j| i != j && c[(i, j)] != T::zero())) {
                    return Err(perr(5, "separable state with non-zero off-diagonal".into()));
                }
                Covariance::Diagonal(c.diagonal())
            }
        };
        if !(sigma > T::zero() && sigma.is_finite()) {
            return Err(perr(3, format!("step size {sigma} is not positive")));
        }
        cov.check_positive_definite()?;
        Ok(Self { mean, sigma, cov, p_sigma, p_c, generation })
    }
}

/// CMA-ES behind the [`AskTell`] contract.
#[derive(Debug, Clone)]
pub struct CmaEs<T: Scalar> {
    config: CmaConfig<T>,
    state: MgdState<T>,
    pending: Option<Generation<T>>,
}

impl<T: Scalar> CmaEs<T> {
    pub fn new(config: CmaConfig<T>) -> Self {
        let state = MgdState::init_default(&config);
        Self { config, state, pending: None }
    }

    pub fn from_state(config: CmaConfig<T>, state: MgdState<T>) -> Result<Self> {
        state.check_config(&config)?;
        Ok(Self { config, state, pending: None })
    }

    pub fn state(&self) -> &MgdState<T> {
        &self.state
    }

    pub fn config(&self) -> &CmaConfig<T> {
        &self.config
    }

    pub fn into_state(self) -> MgdState<T> {
        self.state
    }
}

impl<T: Scalar> AskTell<T> for CmaEs<T> {
    fn dim(&self) -> usize {
        self.config.dim
    }

    fn ask(&mut self) -> Result<Vec<DVector<T>>> {
        let generation = self.state.ask(&self.config)?;
        let candidates = generation.candidates.clone();
        self.pending = Some(generation);
        Ok(candidates)
    }

    fn tell(&mut self, values: &[T]) -> Result<()> {
        let generation =
            self.pending.take().ok_or_else(|| Error::InvalidParameter("tell without a preceding ask".into()))?;
        self.state = self.state.tell(&generation, values, &self.config)?;
        Ok(())
    }
}
