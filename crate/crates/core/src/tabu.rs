//! Parallel tabu search.
//!
//! Each chain samples a fraction of the single-entry perturbations of its
//! current point, moves to the best admissible one and falls back to a
//! sweep of the remaining entries when nothing beat its best. Chains share
//! their memory at segment barriers and restart from the per-chain best
//! pool.

use std::collections::HashMap;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::{Bounds, Evaluator, Objective, RunOutcome};
use crate::rng::{self, StreamRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Restart {
    Hard,
    Roulette,
    Rank,
    Softmax,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TsConfig {
    pub nchain: usize,
    pub chain_size: usize,
    pub sample_fraction: f64,
    /// Steps a (slot, value) attribute stays tabu. `usize::MAX` never expires.
    pub tenure: usize,
    pub penalization_weight: f64,
    pub reinforce_best: Restart,
    /// Selection pressure of rank restarts.
    pub m: f64,
    /// Inverse temperature of softmax restarts.
    pub kappa: f64,
    pub max_samples: usize,
}

impl Default for TsConfig {
    fn default() -> Self {
        TsConfig {
            nchain: 32,
            chain_size: 10,
            sample_fraction: 0.1,
            tenure: 6,
            penalization_weight: 1.0,
            reinforce_best: Restart::Rank,
            m: 5.0,
            kappa: 1.0,
            max_samples: 20_000,
        }
    }
}

impl TsConfig {
    pub fn validate(&self) -> Result<()> {
        if self.nchain == 0 || self.chain_size == 0 {
            return Err(Error::Config("tabu: nchain and chain_size must be at least 1".into()));
        }
        if !(self.sample_fraction > 0.0 && self.sample_fraction <= 1.0) {
            return Err(Error::Config("tabu: sample_fraction must lie in (0, 1]".into()));
        }
        if !(self.penalization_weight >= 0.0) || !(self.kappa >= 0.0) || !self.m.is_finite() {
            return Err(Error::Config("tabu: invalid penalization_weight, m or kappa".into()));
        }
        Ok(())
    }
}

/// Short-term (expiry step) and long-term (frequency) memory keyed by the
/// (slot, value) attribute of applied moves.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TabuMemory {
    pub expiry: HashMap<(usize, i64), usize>,
    pub frequency: HashMap<(usize, i64), u64>,
}

impl TabuMemory {
    pub fn is_tabu(&self, attr: (usize, i64), step: usize) -> bool {
        self.expiry.get(&attr).is_some_and(|&e| e > step)
    }

    pub fn frequency(&self, attr: (usize, i64)) -> u64 {
        self.frequency.get(&attr).copied().unwrap_or(0)
    }

    pub fn record(&mut self, attr: (usize, i64), step: usize, tenure: usize) {
        let e = self.expiry.entry(attr).or_insert(0);
        *e = (*e).max(step.saturating_add(tenure));
        *self.frequency.entry(attr).or_insert(0) += 1;
    }

    /// Drops short-term entries that can no longer be consulted.
    fn prune(&mut self, step: usize) {
        self.expiry.retain(|_, e| *e > step);
    }
}

/// A single-entry perturbation of a chain's current point.
#[derive(Debug, Clone, PartialEq)]
pub struct Move {
    pub slot: usize,
    pub value: i64,
    pub x: Vec<i64>,
}

/// ⌈fraction·dim⌉ distinct slots, each with one new value different from
/// the current one. Fixed slots are skipped.
pub fn sample_moves<R: Rng + ?Sized>(x: &[i64], fraction: f64, bounds: &[Bounds], rng: &mut R) -> Vec<Move> {
    let dim = x.len();
    let n = ((fraction * dim as f64).ceil() as usize).min(dim);
    let mut slots = index::sample(rng, dim, n).into_vec();
    slots.sort_unstable();
    slots.into_iter().filter_map(|k| perturb(x, k, bounds, rng)).collect()
}

fn perturb<R: Rng + ?Sized>(x: &[i64], k: usize, bounds: &[Bounds], rng: &mut R) -> Option<Move> {
    let b = bounds[k];
    if b.lo == b.hi {
        return None;
    }
    // uniform over the other values
    let mut v = rng::uniform_int(rng, b.lo, b.hi - 1);
    if v >= x[k] {
        v += 1;
    }
    let mut y = x.to_vec();
    y[k] = v;
    Some(Move { slot: k, value: v, x: y })
}

/// One candidate per slot not in `sampled`.
pub fn remainder_sweep<R: Rng + ?Sized>(x: &[i64], sampled: &[usize], bounds: &[Bounds], rng: &mut R) -> Vec<Move> {
    (0..x.len())
        .filter(|k| !sampled.contains(k))
        .filter_map(|k| perturb(x, k, bounds, rng))
        .collect()
}

/// Index of the best candidate strictly below `best_e`, if any.
pub fn best_improving(energies: &[f64], best_e: f64) -> Option<usize> {
    let mut pick: Option<usize> = None;
    for (i, &e) in energies.iter().enumerate() {
        if e < best_e && pick.is_none_or(|p| e < energies[p]) {
            pick = Some(i);
        }
    }
    pick
}

/// Picks the candidate with the lowest frequency-penalized energy that is
/// either not tabu or beats `best_e`, and records its attribute.
pub fn select_move(
    moves: &[Move],
    energies: &[f64],
    mem: &mut TabuMemory,
    best_e: f64,
    step: usize,
    cfg: &TsConfig,
) -> Option<usize> {
    let mut order: Vec<usize> = (0..moves.len()).collect();
    let score = |i: usize| energies[i] + cfg.penalization_weight * mem.frequency((moves[i].slot, moves[i].value)) as f64;
    order.sort_by(|&a, &b| score(a).total_cmp(&score(b)));
    let pick = order.into_iter().find(|&i| {
        let attr = (moves[i].slot, moves[i].value);
        !mem.is_tabu(attr, step) || energies[i] < best_e
    })?;
    mem.record((moves[pick].slot, moves[pick].value), step, cfg.tenure);
    Some(pick)
}

/// Restart distribution over chains from their best energies.
pub fn restart_probs(energies: &[f64], strategy: Restart, m: f64, kappa: f64) -> Vec<f64> {
    let n = energies.len();
    let normalize = |w: Vec<f64>| {
        let s: f64 = w.iter().sum();
        if s > 0.0 && s.is_finite() {
            w.into_iter().map(|x| x / s).collect()
        } else {
            vec![1.0 / n as f64; n]
        }
    };
    match strategy {
        Restart::Hard => {
            let mut best = 0;
            for (i, &e) in energies.iter().enumerate() {
                if e < energies[best] {
                    best = i;
                }
            }
            let mut p = vec![0.0; n];
            p[best] = 1.0;
            p
        }
        Restart::Roulette => {
            let max = energies.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            normalize(energies.iter().map(|e| max - e + 1e-9).collect())
        }
        Restart::Rank => {
            if n == 1 {
                return vec![1.0];
            }
            // rank 1 = worst; equal energies keep the lower index as better
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| energies[b].total_cmp(&energies[a]).then(a.cmp(&b).reverse()));
            let mut w = vec![0.0; n];
            for (r, &i) in order.iter().enumerate() {
                let v = (2.0 - m + 2.0 * (m - 1.0) * r as f64 / (n - 1) as f64) / n as f64;
                w[i] = v.max(0.0);
            }
            normalize(w)
        }
        Restart::Softmax => {
            let min = energies.iter().copied().fold(f64::INFINITY, f64::min);
            normalize(energies.iter().map(|e| (-kappa * (e - min)).exp()).collect())
        }
    }
}

#[derive(Debug, Clone)]
struct TsChain {
    x: Vec<i64>,
    e: f64,
    best_x: Vec<i64>,
    best_e: f64,
    mem: TabuMemory,
    rng: StreamRng,
}

/// A move applied by a chain, for trace assertions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AppliedMove {
    pub chain: usize,
    pub step: usize,
    pub slot: usize,
    pub value: i64,
    pub energy: f64,
    /// Best energy of the chain before the move.
    pub best_before: f64,
}

pub struct TabuRun {
    pub outcome: RunOutcome,
    pub moves: Vec<AppliedMove>,
    /// Per-chain best energy after every step.
    pub chain_bests: Vec<Vec<f64>>,
}

pub fn run_tabu(obj: &dyn Objective, cfg: &TsConfig, seed: u64, workers: usize) -> Result<TabuRun> {
    cfg.validate()?;
    let mut ev = Evaluator::new(obj, cfg.max_samples, workers)?;
    let bounds = obj.bounds().to_vec();
    let mut rngs = rng::streams(seed, 0, cfg.nchain);
    let mut restart_rng = rng::stream(seed, 1 << 20);
    let mut moves = Vec::new();
    let mut chain_bests = Vec::new();

    let starts: Vec<(usize, Vec<i64>)> = rngs
        .iter_mut()
        .enumerate()
        .map(|(l, r)| (l, obj.random_point(r)))
        .collect();
    let f = ev.evaluate_batch(&starts)?;
    let mut chains: Vec<TsChain> = starts
        .into_iter()
        .zip(f)
        .zip(rngs)
        .map(|(((_, x), f), rng)| TsChain {
            best_x: x.clone(),
            best_e: -f,
            x,
            e: -f,
            mem: TabuMemory::default(),
            rng,
        })
        .collect();
    let mut shared = TabuMemory::default();
    let mut step = 0usize;

    while !ev.exhausted() && !chains.is_empty() {
        for _ in 0..cfg.chain_size {
            let sampled: Vec<Vec<Move>> = chains
                .iter_mut()
                .map(|c| sample_moves(&c.x, cfg.sample_fraction, &bounds, &mut c.rng))
                .collect();
            let batch: Vec<(usize, Vec<i64>)> = sampled
                .iter()
                .enumerate()
                .flat_map(|(l, ms)| ms.iter().map(move |m| (l, m.x.clone())))
                .collect();
            let f = ev.evaluate_batch(&batch)?;
            let mut energies: Vec<Vec<f64>> = Vec::with_capacity(chains.len());
            let mut it = f.into_iter();
            for ms in &sampled {
                energies.push(it.by_ref().take(ms.len()).map(|f| -f).collect());
            }
            // the budget may have cut the batch short
            let sampled: Vec<Vec<Move>> = sampled
                .into_iter()
                .zip(&energies)
                .map(|(mut ms, es)| {
                    ms.truncate(es.len());
                    ms
                })
                .collect();

            let needs_sweep: Vec<bool> = chains
                .iter()
                .zip(&energies)
                .map(|(c, es)| best_improving(es, c.best_e).is_none())
                .collect();
            let mut sweeps: Vec<Vec<Move>> = vec![Vec::new(); chains.len()];
            if !ev.exhausted() {
                for (l, c) in chains.iter_mut().enumerate() {
                    if needs_sweep[l] {
                        let taken: Vec<usize> = sampled[l].iter().map(|m| m.slot).collect();
                        sweeps[l] = remainder_sweep(&c.x, &taken, &bounds, &mut c.rng);
                    }
                }
            }
            let batch: Vec<(usize, Vec<i64>)> = sweeps
                .iter()
                .enumerate()
                .flat_map(|(l, ms)| ms.iter().map(move |m| (l, m.x.clone())))
                .collect();
            let f = ev.evaluate_batch(&batch)?;
            let mut it = f.into_iter();
            let sweep_e: Vec<Vec<f64>> = sweeps
                .iter()
                .map(|ms| it.by_ref().take(ms.len()).map(|f| -f).collect())
                .collect();

            for (l, c) in chains.iter_mut().enumerate() {
                let ms = &sampled[l];
                let chosen = match best_improving(&sweep_e[l], c.best_e) {
                    Some(i) => {
                        let m = &sweeps[l][i];
                        c.mem.record((m.slot, m.value), step, cfg.tenure);
                        Some((m, sweep_e[l][i]))
                    }
                    None => select_move(ms, &energies[l], &mut c.mem, c.best_e, step, cfg)
                        .map(|i| (&ms[i], energies[l][i])),
                };
                if let Some((m, e)) = chosen {
                    moves.push(AppliedMove {
                        chain: l,
                        step,
                        slot: m.slot,
                        value: m.value,
                        energy: e,
                        best_before: c.best_e,
                    });
                    c.x.clone_from(&m.x);
                    c.e = e;
                    if e < c.best_e {
                        c.best_e = e;
                        c.best_x.clone_from(&m.x);
                    }
                }
            }
            chain_bests.push(chains.iter().map(|c| c.best_e).collect());
            step += 1;
            if ev.exhausted() {
                break;
            }
        }

        merge_memories(&mut shared, &mut chains, step);
        let energies: Vec<f64> = chains.iter().map(|c| c.best_e).collect();
        let p = restart_probs(&energies, cfg.reinforce_best, cfg.m, cfg.kappa);
        let dist = WeightedIndex::new(&p).map_err(|e| Error::Config(format!("tabu restart: {e}")))?;
        let pool: Vec<(Vec<i64>, f64)> = chains.iter().map(|c| (c.best_x.clone(), c.best_e)).collect();
        for c in chains.iter_mut() {
            let (x, e) = &pool[dist.sample(&mut restart_rng)];
            c.x.clone_from(x);
            c.e = *e;
            if *e < c.best_e {
                c.best_e = *e;
                c.best_x.clone_from(x);
            }
        }
    }
    Ok(TabuRun {
        outcome: ev.finish(),
        moves,
        chain_bests,
    })
}

/// Folds the chains' memories into `shared` (short-term union with the
/// latest expiry, frequency increments since the last barrier added) and
/// hands every chain a copy.
fn merge_memories(shared: &mut TabuMemory, chains: &mut [TsChain], step: usize) {
    let base = shared.clone();
    for c in chains.iter() {
        for (&attr, &e) in &c.mem.expiry {
            let s = shared.expiry.entry(attr).or_insert(0);
            *s = (*s).max(e);
        }
        for (&attr, &n) in &c.mem.frequency {
            *shared.frequency.entry(attr).or_insert(0) += n - base.frequency(attr);
        }
    }
    shared.prune(step);
    for c in chains.iter_mut() {
        c.mem = shared.clone();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mv(slot: usize, value: i64) -> Move {
        Move { slot, value, x: vec![] }
    }

    #[test]
    fn sample_size_and_flip() {
        let mut r = rng::master(4);
        let b = vec![Bounds::new(0, 9); 52];
        assert_eq!(sample_moves(&vec![0; 52], 0.1, &b, &mut r).len(), 6);
        assert_eq!(sample_moves(&vec![0; 52], 1.0, &b, &mut r).len(), 52);
        let bin = vec![Bounds::new(0, 1); 8];
        let x = vec![0, 1, 0, 1, 1, 0, 0, 1];
        for m in sample_moves(&x, 1.0, &bin, &mut r) {
            assert_eq!(m.value, 1 - x[m.slot]);
        }
    }

    #[test]
    fn selection_rules() {
        let cfg = TsConfig::default();
        let mut mem = TabuMemory::default();
        assert_eq!(select_move(&[mv(0, 1)], &[5.0], &mut mem, 0.0, 0, &cfg), Some(0));

        let mut mem = TabuMemory::default();
        mem.record((0, 1), 0, 10);
        mem.record((1, 1), 0, 10);
        let moves = [mv(0, 1), mv(1, 1)];
        assert_eq!(select_move(&moves, &[3.0, 1.0], &mut mem, 2.0, 1, &cfg), Some(1));
        assert_eq!(select_move(&moves, &[3.0, 2.5], &mut mem, 2.0, 1, &cfg), None);

        let mut mem = TabuMemory::default();
        mem.frequency.insert((0, 1), 3);
        assert_eq!(select_move(&moves, &[1.0, 1.0], &mut mem, 0.0, 0, &cfg), Some(1));
        assert!(mem.is_tabu((1, 1), 5) && !mem.is_tabu((1, 1), 6));
        assert_eq!(mem.frequency((1, 1)), 1);
    }

    #[test]
    fn best_improving_keeps_the_best() {
        assert_eq!(best_improving(&[3.0, 0.5, 0.7, 2.0], 1.0), Some(1));
        assert_eq!(best_improving(&[3.0, 2.0], 1.0), None);
    }

    #[test]
    fn restart_distributions() {
        assert_eq!(restart_probs(&[3.0, 1.0, 2.0], Restart::Hard, 5.0, 1.0), vec![0.0, 1.0, 0.0]);
        let p = restart_probs(&[4.0, 3.0, 2.0, 1.0], Restart::Rank, 2.0, 1.0);
        for (a, b) in p.iter().zip([0.0, 1.0 / 6.0, 1.0 / 3.0, 0.5]) {
            assert!((a - b).abs() < 1e-12);
        }
        let u = restart_probs(&[5.0, -3.0, 7.0], Restart::Softmax, 5.0, 0.0);
        assert!(u.iter().all(|x| (x - 1.0 / 3.0).abs() < 1e-12));
        let r = restart_probs(&[-10.0, 5.0, 0.0], Restart::Roulette, 5.0, 1.0);
        assert!(r[0] > r[2] && r[2] > r[1] && r[1] > 0.0);
    }

    #[test]
    fn merge_adds_increments_once() {
        let rng = rng::master(0);
        let chain = |attr| {
            let mut mem = TabuMemory::default();
            mem.record(attr, 0, 3);
            TsChain { x: vec![], e: 0.0, best_x: vec![], best_e: 0.0, mem, rng: rng.clone() }
        };
        let mut shared = TabuMemory::default();
        let mut chains = vec![chain((0, 1)), chain((0, 1)), chain((2, 0))];
        merge_memories(&mut shared, &mut chains, 1);
        assert_eq!(shared.frequency((0, 1)), 2);
        chains[0].mem.record((2, 0), 1, 3);
        merge_memories(&mut shared, &mut chains, 2);
        assert_eq!(shared.frequency((0, 1)), 2);
        assert_eq!(shared.frequency((2, 0)), 2);
        assert!(chains.iter().all(|c| c.mem == shared));
    }
}
