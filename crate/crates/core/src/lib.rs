//! Warm-started CMA-ES: transfer a source task's promising region into the
//! initial search distribution of a target task.
//!
//! The numerical core is generic over [`Scalar`] (implemented for `f32` and
//! `f64`); the aliases below fix it to `f64`.

pub mod ask_tell;
pub mod baselines;
pub mod bench;
pub mod cmaes;
pub mod error;
pub mod runner;
pub mod scalar;
pub mod similarity;
pub mod space;
pub mod warmstart;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type CmaEs = cmaes::CmaEs<f64>;
pub type CmaConfig = cmaes::CmaConfig<f64>;
pub type MgdState = cmaes::MgdState<f64>;
pub type Covariance = cmaes::Covariance<f64>;
pub type ParameterSpace = space::ParameterSpace<f64>;
pub type ParamSpec = space::ParamSpec<f64>;
pub type Trial = space::Trial<f64>;
pub type TrialArchive = space::TrialArchive<f64>;
pub type RunLog = ask_tell::RunLog<f64>;
pub type PromisingGmm = warmstart::PromisingGmm<f64>;
pub type WarmStartInit = warmstart::WarmStartInit<f64>;
pub type GaussianDensity = similarity::GaussianDensity<f64>;
pub type OptimizerSpec = baselines::OptimizerSpec<f64>;
pub type SyntheticProblem = bench::SyntheticProblem<f64>;

pub type CmaEsF32 = cmaes::CmaEs<f32>;
pub type TrialArchiveF32 = space::TrialArchive<f32>;
