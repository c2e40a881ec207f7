//! Parallel simulated annealing with the Lam schedule and mixing of states.
//!
//! Energies are negated objectives. All chains share one temperature; after
//! every segment of `chain_size` steps the temperature is updated from the
//! segment's acceptance statistics and each chain restarts from a best state
//! drawn from the per-chain best pool.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::{Bounds, Evaluator, Objective, RunOutcome};
use crate::rng::{self, StreamRng};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PsaConfig {
    pub nchain: usize,
    pub chain_size: usize,
    /// Per-entry perturbation probability χ.
    pub chi: f64,
    /// Initialization factor α, T₀ = α·σ₀.
    pub alpha: f64,
    /// Quality factor λ of the Lam update.
    pub lambda_quality: f64,
    pub tmin: f64,
    pub min_accept_rate: f64,
    pub max_samples: usize,
    /// Start a fresh warm-up from the chain bests when the schedule stops
    /// before the budget is spent.
    pub reanneal: bool,
}

impl Default for PsaConfig {
    fn default() -> Self {
        PsaConfig {
            nchain: 32,
            chain_size: 10,
            chi: 0.1,
            alpha: 1.0,
            lambda_quality: 1.0,
            tmin: 0.005,
            min_accept_rate: 0.0,
            max_samples: 20_000,
            reanneal: true,
        }
    }
}

impl PsaConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(format!("psa: {m}")));
        if self.nchain == 0 || self.chain_size == 0 {
            return bad("nchain and chain_size must be at least 1");
        }
        if !(self.chi > 0.0 && self.chi <= 1.0) {
            return bad("chi must lie in (0, 1]");
        }
        if !(self.alpha > 0.0) || !(self.lambda_quality >= 0.0) {
            return bad("alpha must be positive and lambda_quality non-negative");
        }
        if self.tmin.is_nan() || !(0.0..=1.0).contains(&self.min_accept_rate) {
            return bad("tmin must be a number and min_accept_rate in [0, 1]");
        }
        Ok(())
    }
}

/// Resamples each entry with probability `chi`; at least one entry is
/// always resampled.
pub fn propose<R: Rng + ?Sized>(x: &[i64], chi: f64, bounds: &[Bounds], rng: &mut R) -> Vec<i64> {
    let mut y = x.to_vec();
    let mut touched = false;
    for (k, b) in bounds.iter().enumerate() {
        if rng.random::<f64>() < chi {
            y[k] = rng::uniform_int(rng, b.lo, b.hi);
            touched = true;
        }
    }
    if !touched && !bounds.is_empty() {
        let k = rng.random_range(0..bounds.len());
        y[k] = rng::uniform_int(rng, bounds[k].lo, bounds[k].hi);
    }
    y
}

/// Metropolis rule with `de = E_current − E_new`.
pub fn metropolis_accept<R: Rng + ?Sized>(de: f64, t: f64, rng: &mut R) -> bool {
    de > 0.0 || rng.random::<f64>() < (de / t).exp()
}

pub fn lam_f(rho: f64) -> f64 {
    4.0 * rho * (1.0 - rho).powi(2) / (2.0 - rho).powi(2)
}

/// One Lam step. Returns `t` unchanged when `sigma` is not positive.
pub fn lam_update(t: f64, sigma: f64, rho: f64, lambda: f64) -> f64 {
    if !(sigma > 0.0) {
        return t;
    }
    let inv = 1.0 / t + lambda * (t * t / (sigma * sigma)) / sigma * lam_f(rho);
    1.0 / inv
}

/// Boltzmann weights of the chain bests at temperature `t`.
pub fn mixing_distribution(energies: &[f64], t: f64) -> Vec<f64> {
    let min = energies.iter().copied().fold(f64::INFINITY, f64::min);
    let w: Vec<f64> = energies.iter().map(|e| (-(e - min) / t).exp()).collect();
    let total: f64 = w.iter().sum();
    w.into_iter().map(|x| x / total).collect()
}

#[derive(Debug, Clone)]
pub struct Chain {
    pub x: Vec<i64>,
    pub e: f64,
    pub best_x: Vec<i64>,
    pub best_e: f64,
}

impl Chain {
    fn new(x: Vec<i64>, e: f64) -> Self {
        Chain {
            best_x: x.clone(),
            best_e: e,
            x,
            e,
        }
    }

    fn moved(&mut self, x: Vec<i64>, e: f64) {
        if e < self.best_e {
            self.best_e = e;
            self.best_x.clone_from(&x);
        }
        self.x = x;
        self.e = e;
    }
}

/// Why the schedule stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stop {
    Budget,
    Cold,
    Frozen,
}

/// Annealer state, steppable one segment at a time so PESA can drive it.
pub struct Psa {
    cfg: PsaConfig,
    rngs: Vec<StreamRng>,
    mix_rng: StreamRng,
    worker_offset: usize,
    pub chains: Vec<Chain>,
    pub temperature: f64,
    /// Temperature at the start of every segment, warm-ups included.
    pub temperatures: Vec<f64>,
    /// Index into `temperatures` where each warm-up ended.
    pub warmups: Vec<usize>,
}

impl Psa {
    pub fn new(cfg: PsaConfig, seed: u64, worker_offset: usize) -> Result<Self> {
        cfg.validate()?;
        Ok(Psa {
            rngs: rng::streams(seed, 0, cfg.nchain),
            mix_rng: rng::stream(seed, 1 << 20),
            worker_offset,
            chains: Vec::new(),
            temperature: f64::INFINITY,
            temperatures: Vec::new(),
            warmups: Vec::new(),
            cfg,
        })
    }

    pub fn config(&self) -> &PsaConfig {
        &self.cfg
    }

    /// Random starts followed by `chain_size − 1` unconditionally accepted
    /// moves per chain. Sets T₀ = α·σ₀.
    pub fn warmup(&mut self, ev: &mut Evaluator) -> Result<()> {
        let bounds = ev.bounds().to_vec();
        let mut energies = Vec::new();
        if self.chains.is_empty() {
            let batch: Vec<(usize, Vec<i64>)> = self
                .rngs
                .iter_mut()
                .enumerate()
                .map(|(l, r)| (l, ev.objective().random_point(r)))
                .collect();
            let f = self.eval(ev, &batch)?;
            for ((_, x), f) in batch.into_iter().zip(f) {
                energies.push(-f);
                self.chains.push(Chain::new(x, -f));
            }
            if self.chains.is_empty() {
                return Ok(());
            }
        } else {
            for c in &mut self.chains {
                c.x.clone_from(&c.best_x);
                c.e = c.best_e;
            }
        }
        let first = if energies.is_empty() { 0 } else { 1 };
        for _ in first..self.cfg.chain_size {
            let batch = self.proposals(&bounds);
            let f = self.eval(ev, &batch)?;
            for ((l, x), f) in batch.into_iter().zip(f) {
                self.chains[l].moved(x, -f);
                energies.push(-f);
            }
        }
        let sigma = std_dev(&energies);
        self.temperature = if sigma > 0.0 { self.cfg.alpha * sigma } else { self.cfg.alpha };
        self.warmups.push(self.temperatures.len());
        self.temperatures.push(self.temperature);
        Ok(())
    }

    /// One segment of `chain_size` Metropolis steps per chain, then the Lam
    /// update. Returns the segment acceptance rate.
    pub fn segment(&mut self, ev: &mut Evaluator) -> Result<f64> {
        let bounds = ev.bounds().to_vec();
        let mut accepted = Vec::new();
        let mut proposed = 0usize;
        for _ in 0..self.cfg.chain_size {
            let batch = self.proposals(&bounds);
            let f = self.eval(ev, &batch)?;
            proposed += f.len();
            for ((l, x), f) in batch.into_iter().zip(f) {
                let e_new = -f;
                let c = &mut self.chains[l];
                if metropolis_accept(c.e - e_new, self.temperature, &mut self.rngs[l]) {
                    c.moved(x, e_new);
                    accepted.push(e_new);
                }
            }
            if ev.exhausted() {
                break;
            }
        }
        let rho = if proposed == 0 { 0.0 } else { accepted.len() as f64 / proposed as f64 };
        self.temperature = lam_update(
            self.temperature,
            std_dev(&accepted),
            rho,
            self.cfg.lambda_quality,
        );
        self.temperatures.push(self.temperature);
        Ok(rho)
    }

    /// Restarts every chain from a best state drawn by `mixing_distribution`.
    pub fn mix(&mut self) {
        let energies: Vec<f64> = self.chains.iter().map(|c| c.best_e).collect();
        let p = mixing_distribution(&energies, self.temperature);
        let Ok(dist) = WeightedIndex::new(&p) else {
            return;
        };
        let starts: Vec<usize> = (0..self.chains.len()).map(|_| dist.sample(&mut self.mix_rng)).collect();
        let pool: Vec<(Vec<i64>, f64)> = self.chains.iter().map(|c| (c.best_x.clone(), c.best_e)).collect();
        for (c, s) in self.chains.iter_mut().zip(starts) {
            let (x, e) = &pool[s];
            c.moved(x.clone(), *e);
        }
    }

    /// Restarts every chain from an externally supplied state.
    pub fn restart_from(&mut self, starts: Vec<(Vec<i64>, f64)>) {
        for (c, (x, e)) in self.chains.iter_mut().zip(starts) {
            c.moved(x, e);
        }
    }

    /// Runs until the budget is spent or, without re-annealing, until the
    /// schedule stops.
    pub fn run(&mut self, ev: &mut Evaluator) -> Result<Stop> {
        self.warmup(ev)?;
        loop {
            if ev.exhausted() {
                return Ok(Stop::Budget);
            }
            let stop = if self.temperature < self.cfg.tmin {
                Some(Stop::Cold)
            } else {
                let rho = self.segment(ev)?;
                self.mix();
                (rho < self.cfg.min_accept_rate).then_some(Stop::Frozen)
            };
            if let Some(stop) = stop {
                if !self.cfg.reanneal || ev.exhausted() {
                    return Ok(if ev.exhausted() { Stop::Budget } else { stop });
                }
                self.warmup(ev)?;
            }
        }
    }

    fn proposals(&mut self, bounds: &[Bounds]) -> Vec<(usize, Vec<i64>)> {
        let chi = self.cfg.chi;
        self.chains
            .iter()
            .zip(&mut self.rngs)
            .enumerate()
            .map(|(l, (c, r))| (l, propose(&c.x, chi, bounds, r)))
            .collect()
    }

    fn eval(&self, ev: &mut Evaluator, batch: &[(usize, Vec<i64>)]) -> Result<Vec<f64>> {
        let tagged: Vec<(usize, Vec<i64>)> = batch
            .iter()
            .map(|(l, x)| (self.worker_offset + l, x.clone()))
            .collect();
        ev.evaluate_batch(&tagged)
    }
}

/// Population standard deviation; zero for fewer than two values.
pub(crate) fn std_dev(v: &[f64]) -> f64 {
    if v.len() < 2 {
        return 0.0;
    }
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt()
}

/// Result of [`run_psa`] with the schedule trace.
pub struct PsaRun {
    pub outcome: RunOutcome,
    pub temperatures: Vec<f64>,
    pub warmups: Vec<usize>,
    pub stop: Stop,
}

pub fn run_psa(obj: &dyn Objective, cfg: &PsaConfig, seed: u64, workers: usize) -> Result<PsaRun> {
    let mut psa = Psa::new(cfg.clone(), seed, 0)?;
    let mut ev = Evaluator::new(obj, cfg.max_samples, workers)?;
    let stop = psa.run(&mut ev)?;
    Ok(PsaRun {
        outcome: ev.finish(),
        temperatures: psa.temperatures,
        warmups: psa.warmups,
        stop,
    })
}
