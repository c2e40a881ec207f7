use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

use crate::error::{Error, Result};

/// Fitness-sorted archive with rank-based prioritized sampling.
#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    capacity: usize,
    alpha: f64,
    entries: Vec<(Vec<i64>, f64)>,
}

impl ReplayBuffer {
    pub fn new(capacity: usize, alpha: f64) -> Result<Self> {
        if capacity == 0 || !(0.0..=1.0).contains(&alpha) {
            return Err(Error::Config("buffer: capacity must be positive and alpha in [0, 1]".into()));
        }
        Ok(ReplayBuffer {
            capacity,
            alpha,
            entries: Vec::with_capacity(capacity + 1),
        })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries, best first.
    pub fn entries(&self) -> &[(Vec<i64>, f64)] {
        &self.entries
    }

    /// Adds a batch, collapsing duplicate vectors to their best fitness,
    /// then re-sorts and truncates to capacity. Equal fitness keeps the
    /// earlier entry first.
    pub fn extend<I: IntoIterator<Item = (Vec<i64>, f64)>>(&mut self, items: I) {
        for (x, f) in items {
            match self.entries.iter_mut().find(|(y, _)| *y == x) {
                Some(e) => e.1 = e.1.max(f),
                None => self.entries.push((x, f)),
            }
        }
        self.entries.sort_by(|a, b| b.1.total_cmp(&a.1));
        self.entries.truncate(self.capacity);
    }

    /// Sampling probabilities (1/rank)^α, normalized.
    pub fn priorities(&self) -> Vec<f64> {
        let w: Vec<f64> = (1..=self.entries.len())
            .map(|r| (1.0 / r as f64).powf(self.alpha))
            .collect();
        let total: f64 = w.iter().sum();
        w.into_iter().map(|x| x / total).collect()
    }

    /// `n` draws with replacement.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Vec<(Vec<i64>, f64)>> {
        if self.entries.is_empty() {
            return Err(Error::EmptyBuffer);
        }
        let dist = WeightedIndex::new(self.priorities()).map_err(|e| Error::Config(e.to_string()))?;
        Ok((0..n).map(|_| self.entries[dist.sample(rng)].clone()).collect())
    }
}
