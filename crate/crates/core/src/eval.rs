//! Objective contract, budgeted batch evaluation and run bookkeeping.

use rayon::prelude::*;
use rayon::ThreadPool;

use crate::error::{Error, Result};
use crate::surrogate::FomVector;

/// Inclusive integer bounds of one decision entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bounds {
    pub lo: i64,
    pub hi: i64,
}

impl Bounds {
    pub fn new(lo: i64, hi: i64) -> Self {
        debug_assert!(lo <= hi);
        Bounds { lo, hi }
    }

    pub fn range(&self) -> i64 {
        self.hi - self.lo
    }

    pub fn cardinality(&self) -> u64 {
        (self.hi - self.lo) as u64 + 1
    }

    pub fn contains(&self, x: i64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn clamp(&self, x: i64) -> i64 {
        x.clamp(self.lo, self.hi)
    }
}

/// Result of one objective call. The objective is maximized.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub objective: f64,
    pub feasible: bool,
    pub foms: Option<FomVector>,
}

impl Evaluation {
    pub fn plain(objective: f64) -> Self {
        Evaluation {
            objective,
            feasible: true,
            foms: None,
        }
    }
}

/// A pure, deterministic objective over an integer box.
pub trait Objective: Send + Sync {
    fn bounds(&self) -> &[Bounds];

    fn evaluate(&self, x: &[i64]) -> Result<Evaluation>;

    fn dim(&self) -> usize {
        self.bounds().len()
    }

    /// Uniform random point of the box.
    fn random_point(&self, rng: &mut dyn rand::RngCore) -> Vec<i64> {
        self.bounds()
            .iter()
            .map(|b| crate::rng::uniform_int(rng, b.lo, b.hi))
            .collect()
    }
}

/// One objective evaluation as logged by a run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub sample_idx: usize,
    pub worker: usize,
    pub vector: Vec<i64>,
    pub objective: f64,
    pub feasible: bool,
    pub foms: Option<FomVector>,
}

/// Everything a finished run hands back to the harness.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub records: Vec<RunRecord>,
    pub best_vector: Vec<i64>,
    pub best_objective: f64,
}

impl RunOutcome {
    /// Running maximum of the objective, one entry per record.
    pub fn best_so_far(&self) -> Vec<f64> {
        let mut best = f64::NEG_INFINITY;
        self.records
            .iter()
            .map(|r| {
                best = best.max(r.objective);
                best
            })
            .collect()
    }
}

/// Budgeted, order-stable batch evaluator shared by all optimizers.
///
/// Batches are evaluated on a fixed-size pool and collected by position, so
/// the log never depends on thread timing. Once `max_samples` evaluations
/// have been dispatched every later batch is truncated to zero.
pub struct Evaluator<'a> {
    objective: &'a dyn Objective,
    max_samples: usize,
    pool: Option<ThreadPool>,
    records: Vec<RunRecord>,
    best: Option<(Vec<i64>, f64)>,
}

impl<'a> Evaluator<'a> {
    pub fn new(objective: &'a dyn Objective, max_samples: usize, workers: usize) -> Result<Self> {
        let pool = if workers > 1 {
            Some(
                rayon::ThreadPoolBuilder::new()
                    .num_threads(workers)
                    .build()
                    .map_err(|e| Error::Config(format!("worker pool: {e}")))?,
            )
        } else {
            None
        };
        Ok(Evaluator {
            objective,
            max_samples,
            pool,
            records: Vec::with_capacity(max_samples.min(1 << 20)),
            best: None,
        })
    }

    pub fn objective(&self) -> &dyn Objective {
        self.objective
    }

    pub fn bounds(&self) -> &[Bounds] {
        self.objective.bounds()
    }

    pub fn used(&self) -> usize {
        self.records.len()
    }

    pub fn remaining(&self) -> usize {
        self.max_samples - self.records.len()
    }

    pub fn exhausted(&self) -> bool {
        self.remaining() == 0
    }

    pub fn records(&self) -> &[RunRecord] {
        &self.records
    }

    pub fn best(&self) -> Option<(&[i64], f64)> {
        self.best.as_ref().map(|(v, f)| (v.as_slice(), *f))
    }

    /// Evaluates `(worker, vector)` pairs in order. Returns the objectives of
    /// the evaluated prefix, which is shorter than the batch when the budget
    /// runs out.
    pub fn evaluate_batch(&mut self, batch: &[(usize, Vec<i64>)]) -> Result<Vec<f64>> {
        let take = batch.len().min(self.remaining());
        let batch = &batch[..take];
        let objective = self.objective;
        let eval_one = |x: &Vec<i64>| -> Result<Evaluation> {
            objective.evaluate(x).map_err(|e| match e {
                Error::ObjectiveRejected { .. } => e,
                other => Error::ObjectiveRejected {
                    vector: x.clone(),
                    reason: other.to_string(),
                },
            })
        };
        let results: Vec<Result<Evaluation>> = match (&self.pool, take) {
            (Some(pool), n) if n > 1 => {
                pool.install(|| batch.par_iter().map(|(_, x)| eval_one(x)).collect())
            }
            _ => batch.iter().map(|(_, x)| eval_one(x)).collect(),
        };

        let mut out = Vec::with_capacity(take);
        for ((worker, x), res) in batch.iter().zip(results) {
            let ev = res?;
            if self.best.as_ref().is_none_or(|(_, f)| ev.objective > *f) {
                self.best = Some((x.clone(), ev.objective));
            }
            out.push(ev.objective);
            self.records.push(RunRecord {
                sample_idx: self.records.len(),
                worker: *worker,
                vector: x.clone(),
                objective: ev.objective,
                feasible: ev.feasible,
                foms: ev.foms,
            });
        }
        Ok(out)
    }

    pub fn evaluate_one(&mut self, worker: usize, x: Vec<i64>) -> Result<Option<f64>> {
        Ok(self.evaluate_batch(&[(worker, x)])?.pop())
    }

    pub fn finish(self) -> RunOutcome {
        let (best_vector, best_objective) = self.best.unwrap_or((Vec::new(), f64::NEG_INFINITY));
        RunOutcome {
            records: self.records,
            best_vector,
            best_objective,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Sum(Vec<Bounds>);

    impl Objective for Sum {
        fn bounds(&self) -> &[Bounds] {
            &self.0
        }
        fn evaluate(&self, x: &[i64]) -> Result<Evaluation> {
            Ok(Evaluation::plain(x.iter().sum::<i64>() as f64))
        }
    }

    #[test]
    fn batch_truncates_at_budget() {
        let obj = Sum(vec![Bounds::new(0, 9); 2]);
        let mut ev = Evaluator::new(&obj, 5, 4).unwrap();
        let batch: Vec<_> = (0..4).map(|i| (i, vec![i as i64, 1])).collect();
        assert_eq!(ev.evaluate_batch(&batch).unwrap(), vec![1.0, 2.0, 3.0, 4.0]);
        assert_eq!(ev.evaluate_batch(&batch).unwrap(), vec![1.0]);
        assert!(ev.exhausted());
        assert!(ev.evaluate_batch(&batch).unwrap().is_empty());
        let out = ev.finish();
        assert_eq!(out.records.len(), 5);
        assert!(out.records.iter().enumerate().all(|(i, r)| r.sample_idx == i));
        assert_eq!(out.best_objective, 4.0);
        assert_eq!(out.best_vector, vec![3, 1]);
    }

    #[test]
    fn parallel_and_serial_agree() {
        let obj = Sum(vec![Bounds::new(0, 9); 3]);
        let batch: Vec<(usize, Vec<i64>)> = (0..64i64)
            .map(|i| ((i % 7) as usize, vec![i % 10, (i * 3) % 10, 2]))
            .collect();
        let mut a = Evaluator::new(&obj, 100, 1).unwrap();
        let mut b = Evaluator::new(&obj, 100, 8).unwrap();
        a.evaluate_batch(&batch).unwrap();
        b.evaluate_batch(&batch).unwrap();
        assert_eq!(a.finish().records, b.finish().records);
    }
}
