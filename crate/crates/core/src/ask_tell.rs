//! The ask/tell contract shared by every optimizer, plus the run log they all emit.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::space::{ParameterSpace, Trial, TrialArchive};

/// An optimizer that proposes batches of unit-cube points and learns from their values.
///
/// `tell` receives one value per point of the most recent `ask`, in the same order.
pub trait AskTell<T: Scalar>: Send {
    fn dim(&self) -> usize;

    fn ask(&mut self) -> Result<Vec<DVector<T>>>;

    fn tell(&mut self, values: &[T]) -> Result<()>;
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalRecord<T> {
    pub eval_index: usize,
    pub point: DVector<T>,
    pub value: T,
}

/// Every evaluation of one run, in evaluation order.
#[derive(Debug, Clone, PartialEq)]
pub struct RunLog<T> {
    pub run_id: String,
    pub records: Vec<EvalRecord<T>>,
}

impl<T: Scalar> RunLog<T> {
    pub fn new(run_id: impl Into<String>) -> Self {
        Self { run_id: run_id.into(), records: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn push(&mut self, point: DVector<T>, value: T) {
        let eval_index = self.records.len();
        self.records.push(EvalRecord { eval_index, point, value });
    }

    /// Minimum value and its point; the earliest evaluation wins ties.
    pub fn best(&self) -> Result<(&DVector<T>, T)> {
        best_seen(&self.records)
    }

    /// Running minimum after each evaluation.
    pub fn best_so_far(&self) -> Vec<T> {
        let mut best: Option<T> = None;
        self.records
            .iter()
            .map(|r| {
                let b = match best {
                    Some(b) if b <= r.value => b,
                    _ => r.value,
                };
                best = Some(b);
                b
            })
            .collect()
    }

    /// Converts the log into archive trials. Points are clamped into `[0,1]` on the way.
    pub fn to_archive(&self, space: ParameterSpace<T>) -> Result<TrialArchive<T>> {
        let trials = self
            .records
            .iter()
            .map(|r| {
                let u = r.point.iter().map(|x| x.max(T::zero()).min(T::one())).collect();
                Trial::new(u, r.value, self.run_id.clone(), r.eval_index as u64)
            })
            .collect::<Result<Vec<_>>>()?;
        TrialArchive::with_trials(space, trials)
    }
}

/// Returns the lowest value seen and its point. Ties resolve to the earliest record.
pub fn best_seen<T: Scalar>(records: &[EvalRecord<T>]) -> Result<(&DVector<T>, T)> {
    let mut iter = records.iter();
    let first = iter.next().ok_or(Error::EmptyHistory)?;
    let best = iter.fold(first, |best, r| if r.value < best.value { r } else { best });
    Ok((&best.point, best.value))
}

/// Drives `optimizer` on `objective` for exactly `budget` evaluations.
///
/// A batch that would overshoot the budget is evaluated only up to the budget and
/// is never told back, so the optimizer's state reflects complete batches only.
pub fn drive<T, F>(optimizer: &mut dyn AskTell<T>, mut objective: F, budget: usize, run_id: &str) -> Result<RunLog<T>>
where
    T: Scalar,
    F: FnMut(&DVector<T>) -> T,
{
    let mut log = RunLog::new(run_id);
    while log.len() < budget {
        let batch = optimizer.ask()?;
        if batch.is_empty() {
            return Err(Error::InvalidParameter("optimizer proposed an empty batch".into()));
        }
        let batch_len = batch.len();
        let take = batch_len.min(budget - log.len());
        let mut values = Vec::with_capacity(take);
        for x in batch.into_iter().take(take) {
            let v = objective(&x);
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    what: "objective value",
                    point: x.iter().map(|c| c.as_f64()).collect(),
                });
            }
            values.push(v);
            log.push(x, v);
        }
        if take == batch_len {
            optimizer.tell(&values)?;
        }
    }
    Ok(log)
}
