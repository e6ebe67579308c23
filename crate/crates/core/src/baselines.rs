//! Every optimizer the experiments compare, behind the shared ask/tell contract.
//!
//! `cma` and `sep_cma` start from the default `N(0.5, 0.2^2)` distribution.
//! `ws_cma` and `ws_sep_cma` start from the moment-matched source mixture.
//! `ws_only` and `reuse_gmm` sample that Gaussian or that mixture without ever
//! adapting. `reuse_normal` restarts CMA-ES from a source run's final
//! distribution, and `random` samples uniformly.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ask_tell::{drive, AskTell, RunLog};
use crate::cmaes::{
    constrained, sample_constrained, Bounds, CmaConfig, CmaEs, CovarianceMode, MgdState, ShapeTransform,
};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::similarity::Density;
use crate::space::{ParameterSpace, TrialArchive};
use crate::warmstart::{fit, promising_gmm, PromisingGmm, WarmStartInit};

pub const DEFAULT_LAMBDA: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OptimizerKind {
    Cma,
    SepCma,
    WsCma,
    WsSepCma,
    Random,
    WsOnly,
    ReuseGmm,
    ReuseNormal,
}

impl OptimizerKind {
    pub const ALL: [OptimizerKind; 8] = [
        OptimizerKind::Cma,
        OptimizerKind::SepCma,
        OptimizerKind::WsCma,
        OptimizerKind::WsSepCma,
        OptimizerKind::Random,
        OptimizerKind::WsOnly,
        OptimizerKind::ReuseGmm,
        OptimizerKind::ReuseNormal,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            OptimizerKind::Cma => "cma",
            OptimizerKind::SepCma => "sep_cma",
            OptimizerKind::WsCma => "ws_cma",
            OptimizerKind::WsSepCma => "ws_sep_cma",
            OptimizerKind::Random => "random",
            OptimizerKind::WsOnly => "ws_only",
            OptimizerKind::ReuseGmm => "reuse_gmm",
            OptimizerKind::ReuseNormal => "reuse_normal",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.as_str() == s)
    }

    /// Kinds that read the source-task archive.
    pub fn needs_archive(self) -> bool {
        matches!(self, OptimizerKind::WsCma | OptimizerKind::WsSepCma | OptimizerKind::WsOnly | OptimizerKind::ReuseGmm)
    }

    pub fn is_cma(self) -> bool {
        matches!(
            self,
            OptimizerKind::Cma
                | OptimizerKind::SepCma
                | OptimizerKind::WsCma
                | OptimizerKind::WsSepCma
                | OptimizerKind::ReuseNormal
        )
    }

    fn covariance_mode(self) -> CovarianceMode {
        match self {
            OptimizerKind::SepCma | OptimizerKind::WsSepCma => CovarianceMode::Separable,
            _ => CovarianceMode::Full,
        }
    }
}

/// What a transfer method learns from.
#[derive(Debug, Clone, PartialEq)]
pub enum Source<T: Scalar> {
    Archive(TrialArchive<T>),
    /// Final distribution of a CMA-ES run on the source task.
    State(MgdState<T>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerSpec<T: Scalar> {
    pub kind: OptimizerKind,
    pub source: Option<Source<T>>,
    pub gamma: f64,
    pub alpha: T,
    pub lambda: usize,
    pub seed: u64,
}

impl<T: Scalar> OptimizerSpec<T> {
    pub fn new(kind: OptimizerKind, seed: u64) -> Self {
        Self {
            kind,
            source: None,
            gamma: crate::warmstart::DEFAULT_GAMMA,
            alpha: T::lit(crate::warmstart::DEFAULT_ALPHA),
            lambda: DEFAULT_LAMBDA,
            seed,
        }
    }

    pub fn with_source(mut self, source: Source<T>) -> Self {
        self.source = Some(source);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match (&self.source, self.kind) {
            (Some(Source::Archive(_)), k) => k.needs_archive(),
            (Some(Source::State(_)), k) => k == OptimizerKind::ReuseNormal,
            (None, k) => !k.needs_archive() && k != OptimizerKind::ReuseNormal,
        };
        if ok {
            Ok(())
        } else {
            let have = match &self.source {
                Some(Source::Archive(_)) => "a trial archive",
                Some(Source::State(_)) => "a persisted distribution",
                None => "no source",
            };
            Err(Error::InvalidParameter(format!("{} cannot run with {have}", self.kind.as_str())))
        }
    }

    fn archive(&self) -> Result<&TrialArchive<T>> {
        match &self.source {
            Some(Source::Archive(a)) => Ok(a),
            _ => Err(Error::InvalidParameter(format!("{} needs a source archive", self.kind.as_str()))),
        }
    }

    pub fn cma_config(&self, dim: usize) -> Result<CmaConfig<T>> {
        CmaConfig::new(dim, self.lambda, self.kind.covariance_mode(), self.seed)
    }

    /// Source mixture, for the kinds that use one.
    pub fn promising_gmm(&self) -> Result<PromisingGmm<T>> {
        promising_gmm(self.archive()?, self.gamma, self.alpha)
    }

    pub fn warm_start(&self) -> Result<WarmStartInit<T>> {
        Ok(fit(&self.promising_gmm()?, self.kind.covariance_mode()))
    }

    pub fn build(&self, dim: usize) -> Result<Box<dyn AskTell<T>>> {
        self.validate()?;
        if let Some(Source::Archive(a)) = &self.source {
            if a.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: a.dim() });
            }
        }
        Ok(match self.kind {
            OptimizerKind::Cma | OptimizerKind::SepCma => Box::new(CmaEs::new(self.cma_config(dim)?)),
            OptimizerKind::WsCma | OptimizerKind::WsSepCma => {
                let config = self.cma_config(dim)?;
                let state = self.warm_start()?.to_state(&config)?;
                Box::new(CmaEs::from_state(config, state)?)
            }
            OptimizerKind::ReuseNormal => {
                let Some(Source::State(state)) = &self.source else { unreachable!("validated") };
                Box::new(CmaEs::from_state(self.cma_config(dim)?, state.with_reset_paths())?)
            }
            OptimizerKind::Random => Box::new(RandomSearch::new(dim, self.seed)),
            OptimizerKind::WsOnly => Box::new(GaussianSampler::new(self.warm_start()?, self.seed)?),
            OptimizerKind::ReuseGmm => Box::new(GmmSampler::new(self.promising_gmm()?, self.seed)),
        })
    }
}

/// Independent uniform points on the unit cube.
#[derive(Debug, Clone)]
pub struct RandomSearch {
    dim: usize,
    rng: ChaCha8Rng,
}

impl RandomSearch {
    pub fn new(dim: usize, seed: u64) -> Self {
        Self { dim, rng: ChaCha8Rng::seed_from_u64(seed) }
    }
}

impl<T: Scalar> AskTell<T> for RandomSearch {
    fn dim(&self) -> usize {
        self.dim
    }

    fn ask(&mut self) -> Result<Vec<DVector<T>>> {
        let rng = &mut self.rng;
        Ok(vec![DVector::from_fn(self.dim, |_, _| T::unit_uniform(rng))])
    }

    fn tell(&mut self, _values: &[T]) -> Result<()> {
        Ok(())
    }
}

/// Draws from a fixed Gaussian with the CMA-ES box handling; never adapts.
#[derive(Debug, Clone)]
pub struct GaussianSampler<T: Scalar> {
    init: WarmStartInit<T>,
    transform: ShapeTransform<T>,
    rng: ChaCha8Rng,
}

impl<T: Scalar> GaussianSampler<T> {
    pub fn new(init: WarmStartInit<T>, seed: u64) -> Result<Self> {
        init.covariance.check_positive_definite()?;
        let transform = ShapeTransform::new(&init.covariance)?;
        Ok(Self { init, transform, rng: ChaCha8Rng::seed_from_u64(seed) })
    }

    pub fn distribution(&self) -> &WarmStartInit<T> {
        &self.init
    }
}

impl<T: Scalar> AskTell<T> for GaussianSampler<T> {
    fn dim(&self) -> usize {
        self.init.mean.len()
    }

    fn ask(&mut self) -> Result<Vec<DVector<T>>> {
        let (x, _) = sample_constrained(&self.init.mean, T::one(), &self.transform, Bounds::UnitCube, &mut self.rng);
        Ok(vec![x])
    }

    fn tell(&mut self, _values: &[T]) -> Result<()> {
        Ok(())
    }
}

/// Draws from a fixed mixture with the CMA-ES box handling; never adapts.
#[derive(Debug, Clone)]
pub struct GmmSampler<T: Scalar> {
    gmm: PromisingGmm<T>,
    rng: ChaCha8Rng,
}

impl<T: Scalar> GmmSampler<T> {
    pub fn new(gmm: PromisingGmm<T>, seed: u64) -> Self {
        Self { gmm, rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn distribution(&self) -> &PromisingGmm<T> {
        &self.gmm
    }

    /// One draw and the index of the component it came from.
    pub fn draw(&mut self) -> (DVector<T>, usize) {
        let (gmm, rng) = (&self.gmm, &mut self.rng);
        constrained(Bounds::UnitCube, || {
            let k = rng.random_range(0..gmm.len());
            let z = DVector::from_fn(gmm.dim(), |_, _| T::standard_normal(rng));
            (&gmm.centers()[k] + z * gmm.alpha(), k)
        })
    }
}

impl<T: Scalar> AskTell<T> for GmmSampler<T> {
    fn dim(&self) -> usize {
        Density::dim(&self.gmm)
    }

    fn ask(&mut self) -> Result<Vec<DVector<T>>> {
        Ok(vec![self.draw().0])
    }

    fn tell(&mut self, _values: &[T]) -> Result<()> {
        Ok(())
    }
}

pub fn random_search<T, F>(space: &ParameterSpace<T>, objective: F, budget: usize, seed: u64) -> Result<RunLog<T>>
where
    T: Scalar,
    F: FnMut(&DVector<T>) -> T,
{
    drive(&mut RandomSearch::new(space.dim(), seed), objective, budget, "random")
}

pub fn ws_only<T, F>(init: &WarmStartInit<T>, objective: F, budget: usize, seed: u64) -> Result<RunLog<T>>
where
    T: Scalar,
    F: FnMut(&DVector<T>) -> T,
{
    drive(&mut GaussianSampler::new(init.clone(), seed)?, objective, budget, "ws_only")
}

pub fn reuse_gmm<T, F>(gmm: &PromisingGmm<T>, objective: F, budget: usize, seed: u64) -> Result<RunLog<T>>
where
    T: Scalar,
    F: FnMut(&DVector<T>) -> T,
{
    drive(&mut GmmSampler::new(gmm.clone(), seed), objective, budget, "reuse_gmm")
}

/// CMA-ES from a source run's final mean, step size and shape; paths start at zero.
pub fn reuse_normal<T, F>(
    final_state: &MgdState<T>,
    objective: F,
    budget: usize,
    config: CmaConfig<T>,
) -> Result<RunLog<T>>
where
    T: Scalar,
    F: FnMut(&DVector<T>) -> T,
{
    final_state.cov.check_positive_definite()?;
    let mut opt = CmaEs::from_state(config, final_state.with_reset_paths())?;
    drive(&mut opt, objective, budget, "reuse_normal")
}

/// Runs default CMA-ES on the source task and returns its final distribution.
pub fn source_cma_run<T, F>(dim: usize, objective: F, budget: usize, lambda: usize, seed: u64) -> Result<MgdState<T>>
where
    T: Scalar,
    F: FnMut(&DVector<T>) -> T,
{
    let mut opt = CmaEs::new(CmaConfig::new(dim, lambda, CovarianceMode::Full, seed)?);
    drive(&mut opt, objective, budget, "source")?;
    Ok(opt.into_state())
}
