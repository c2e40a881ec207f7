//! PPO in its contextual-bandit form.
//!
//! The state is constant and an episode is one full decision vector, so the
//! policy is a table of independent per-slot categorical logits and the
//! value function is a single scalar baseline. Gradients are analytic.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::{Bounds, Evaluator, Objective, RunOutcome};
use crate::rng::{self, StreamRng};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PpoConfig {
    pub ncores: usize,
    pub n_steps: usize,
    pub clip_eps: f64,
    pub vf_coef: f64,
    pub ent_coef: f64,
    pub lr: f64,
    pub epochs: usize,
    pub minibatch: usize,
    pub reward_norm: bool,
    pub incumbent_conditioning: bool,
    pub max_samples: usize,
}

impl Default for PpoConfig {
    fn default() -> Self {
        PpoConfig {
            ncores: 32,
            n_steps: 8,
            clip_eps: 0.2,
            vf_coef: 0.5,
            ent_coef: 0.001,
            lr: 3e-3,
            epochs: 20,
            minibatch: 32,
            reward_norm: true,
            incumbent_conditioning: false,
            max_samples: 20_000,
        }
    }
}

impl PpoConfig {
    pub fn validate(&self) -> Result<()> {
        if self.ncores == 0 || self.n_steps == 0 || self.epochs == 0 || self.minibatch == 0 {
            return Err(Error::Config("ppo: ncores, n_steps, epochs and minibatch must be at least 1".into()));
        }
        if !(self.clip_eps > 0.0 && self.clip_eps < 1.0) {
            return Err(Error::Config("ppo: clip_eps must lie in (0, 1)".into()));
        }
        if !(self.lr >= 0.0) || !(self.vf_coef >= 0.0) || !(self.ent_coef >= 0.0) {
            return Err(Error::Config("ppo: lr, vf_coef and ent_coef must be non-negative".into()));
        }
        Ok(())
    }
}

/// Logits per slot, the incumbent bias per slot, and the scalar value.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyParams {
    pub logits: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
    pub value: f64,
}

impl PolicyParams {
    pub fn zeros(bounds: &[Bounds]) -> Self {
        PolicyParams {
            logits: bounds.iter().map(|b| vec![0.0; b.cardinality() as usize]).collect(),
            bias: vec![0.0; bounds.len()],
            value: 0.0,
        }
    }

    pub fn n_params(&self) -> usize {
        self.logits.iter().map(Vec::len).sum::<usize>() + self.bias.len() + 1
    }

    pub fn to_flat(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.logits.iter().flatten().copied().collect();
        v.extend(&self.bias);
        v.push(self.value);
        v
    }

    pub fn set_flat(&mut self, v: &[f64]) {
        let mut it = v.iter().copied();
        for l in self.logits.iter_mut().flatten() {
            *l = it.next().expect("flat length");
        }
        for b in self.bias.iter_mut() {
            *b = it.next().expect("flat length");
        }
        self.value = it.next().expect("flat length");
    }

    /// Effective logits of slot `k` given an optional incumbent.
    fn slot_logits(&self, k: usize, incumbent: Option<&[usize]>) -> Vec<f64> {
        let mut z = self.logits[k].clone();
        if let Some(inc) = incumbent {
            z[inc[k]] += self.bias[k];
        }
        z
    }

    /// Per-slot probabilities.
    pub fn probs(&self, incumbent: Option<&[usize]>) -> Vec<Vec<f64>> {
        (0..self.logits.len())
            .map(|k| softmax(&self.slot_logits(k, incumbent)))
            .collect()
    }
}

pub fn softmax(z: &[f64]) -> Vec<f64> {
    let m = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = z.iter().map(|x| (x - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|x| x / s).collect()
}

pub fn log_softmax(z: &[f64]) -> Vec<f64> {
    let m = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = m + z.iter().map(|x| (x - m).exp()).sum::<f64>().ln();
    z.iter().map(|x| x - lse).collect()
}

fn entropy(logp: &[f64]) -> f64 {
    -logp.iter().map(|l| if l.is_finite() { l.exp() * l } else { 0.0 }).sum::<f64>()
}

/// Samples one action index per slot; returns it with per-slot log-probs.
pub fn sample_action<R: Rng + ?Sized>(
    params: &PolicyParams,
    incumbent: Option<&[usize]>,
    rng: &mut R,
) -> (Vec<usize>, Vec<f64>) {
    let mut action = Vec::with_capacity(params.logits.len());
    let mut logps = Vec::with_capacity(params.logits.len());
    for k in 0..params.logits.len() {
        let lp = log_softmax(&params.slot_logits(k, incumbent));
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut pick = lp.len() - 1;
        for (j, l) in lp.iter().enumerate() {
            acc += l.exp();
            if u < acc {
                pick = j;
                break;
            }
        }
        action.push(pick);
        logps.push(lp[pick]);
    }
    (action, logps)
}

/// Total log-probability of `action` and the policy entropy.
pub fn logprob_and_entropy(params: &PolicyParams, action: &[usize], incumbent: Option<&[usize]>) -> (f64, f64) {
    let mut logp = 0.0;
    let mut h = 0.0;
    for (k, &a) in action.iter().enumerate() {
        let lp = log_softmax(&params.slot_logits(k, incumbent));
        logp += lp[a];
        h += entropy(&lp);
    }
    (logp, h)
}

/// Samples collected under one policy snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryBatch {
    pub actions: Vec<Vec<usize>>,
    /// Per-slot log-probabilities under the snapshot.
    pub old_logp: Vec<Vec<f64>>,
    /// Rewards after optional normalization.
    pub returns: Vec<f64>,
    /// `returns − V` with V the snapshot baseline.
    pub advantages: Vec<f64>,
    pub incumbent: Option<Vec<usize>>,
}

impl TrajectoryBatch {
    pub fn new(
        actions: Vec<Vec<usize>>,
        old_logp: Vec<Vec<f64>>,
        rewards: &[f64],
        normalize: bool,
        value: f64,
        incumbent: Option<Vec<usize>>,
    ) -> Self {
        let returns = if normalize { standardize(rewards) } else { rewards.to_vec() };
        let advantages = returns.iter().map(|r| r - value).collect();
        TrajectoryBatch {
            actions,
            old_logp,
            returns,
            advantages,
            incumbent,
        }
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }
}

/// Subtract the mean and divide by the standard deviation plus 1e-8.
pub fn standardize(x: &[f64]) -> Vec<f64> {
    let n = x.len().max(1) as f64;
    let mean = x.iter().sum::<f64>() / n;
    let sd = (x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
    x.iter().map(|v| (v - mean) / (sd + 1e-8)).collect()
}

/// Clipped-surrogate loss and its gradient over the samples `idx`, in
/// [`PolicyParams::to_flat`] order. With `clip = false` the plain
/// importance-weighted policy-gradient objective is used instead.
pub fn loss_and_grad(
    batch: &TrajectoryBatch,
    idx: &[usize],
    params: &PolicyParams,
    cfg: &PpoConfig,
    clip: bool,
) -> (f64, Vec<f64>) {
    let inc = batch.incumbent.as_deref();
    let n_slots = params.logits.len();
    let logp: Vec<Vec<f64>> = (0..n_slots).map(|k| log_softmax(&params.slot_logits(k, inc))).collect();
    let p: Vec<Vec<f64>> = logp.iter().map(|l| l.iter().map(|x| x.exp()).collect()).collect();
    let n = idx.len() as f64;

    // d loss / d z for the effective logits
    let mut dz: Vec<Vec<f64>> = p.iter().map(|pk| vec![0.0; pk.len()]).collect();
    let mut surrogate = 0.0;
    let mut coef_total = 0.0;
    for &i in idx {
        let a = &batch.actions[i];
        let new: f64 = (0..n_slots).map(|k| logp[k][a[k]]).sum();
        let old: f64 = batch.old_logp[i].iter().sum();
        let r = (new - old).exp();
        let adv = batch.advantages[i];
        let unclipped = r * adv;
        let bound = if adv >= 0.0 { (1.0 + cfg.clip_eps) * adv } else { (1.0 - cfg.clip_eps) * adv };
        let (s, c) = if !clip || unclipped < bound { (unclipped, adv * r) } else { (bound, 0.0) };
        surrogate += s;
        if c != 0.0 {
            coef_total += c;
            for k in 0..n_slots {
                dz[k][a[k]] -= c / n;
            }
        }
    }
    let mut h = 0.0;
    for k in 0..n_slots {
        let hk = entropy(&logp[k]);
        h += hk;
        for j in 0..dz[k].len() {
            // policy term: −(1/n) Σ c_i (onehot − p)
            dz[k][j] += coef_total / n * p[k][j];
            // entropy term: −ent · dH/dz, dH/dz_j = −p_j (log p_j + H)
            let lpj = if logp[k][j].is_finite() { logp[k][j] } else { 0.0 };
            dz[k][j] += cfg.ent_coef * p[k][j] * (lpj + hk);
        }
    }
    let mse = idx.iter().map(|&i| (params.value - batch.returns[i]).powi(2)).sum::<f64>() / n;
    let dv = cfg.vf_coef * idx.iter().map(|&i| 2.0 * (params.value - batch.returns[i])).sum::<f64>() / n;
    let loss = -surrogate / n + cfg.vf_coef * mse - cfg.ent_coef * h;

    let mut grad: Vec<f64> = dz.iter().flatten().copied().collect();
    grad.extend((0..n_slots).map(|k| inc.map_or(0.0, |inc| dz[k][inc[k]])));
    grad.push(dv);
    (loss, grad)
}

pub fn ppo_loss(batch: &TrajectoryBatch, params: &PolicyParams, cfg: &PpoConfig) -> (f64, Vec<f64>) {
    let idx: Vec<usize> = (0..batch.len()).collect();
    loss_and_grad(batch, &idx, params, cfg, true)
}

/// Adam on a flat parameter vector.
#[derive(Debug, Clone)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    pub fn new(n: usize, lr: f64) -> Self {
        Adam {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
        }
    }

    /// One descent step on `theta` along `grad`.
    pub fn step(&mut self, theta: &mut [f64], grad: &[f64]) {
        self.t += 1;
        let c1 = 1.0 - self.beta1.powi(self.t);
        let c2 = 1.0 - self.beta2.powi(self.t);
        for i in 0..theta.len() {
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * grad[i];
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * grad[i] * grad[i];
            theta[i] -= self.lr * (self.m[i] / c1) / ((self.v[i] / c2).sqrt() + self.eps);
        }
    }
}

/// Learner state: parameters plus optimizer moments.
pub struct Ppo {
    pub cfg: PpoConfig,
    pub params: PolicyParams,
    adam: Adam,
    shuffle_rng: StreamRng,
}

impl Ppo {
    pub fn new(cfg: PpoConfig, bounds: &[Bounds], seed: u64) -> Result<Self> {
        cfg.validate()?;
        let params = PolicyParams::zeros(bounds);
        Ok(Ppo {
            adam: Adam::new(params.n_params(), cfg.lr),
            shuffle_rng: rng::stream(seed, 1 << 20),
            params,
            cfg,
        })
    }

    /// `epochs` passes of shuffled minibatch steps on the clipped loss.
    pub fn update(&mut self, batch: &TrajectoryBatch) {
        if batch.is_empty() {
            return;
        }
        let mut theta = self.params.to_flat();
        let mut order: Vec<usize> = (0..batch.len()).collect();
        for _ in 0..self.cfg.epochs {
            order.shuffle(&mut self.shuffle_rng);
            for mb in order.chunks(self.cfg.minibatch) {
                let (_, g) = loss_and_grad(batch, mb, &self.params, &self.cfg, true);
                self.adam.step(&mut theta, &g);
                self.params.set_flat(&theta);
            }
        }
    }
}

pub fn run_ppo(obj: &dyn Objective, cfg: &PpoConfig, seed: u64, workers: usize) -> Result<RunOutcome> {
    let bounds = obj.bounds().to_vec();
    let mut ppo = Ppo::new(cfg.clone(), &bounds, seed)?;
    let mut ev = Evaluator::new(obj, cfg.max_samples, workers)?;
    let mut rngs = rng::streams(seed, 0, cfg.ncores);
    let to_x = |a: &[usize]| -> Vec<i64> { a.iter().zip(&bounds).map(|(&i, b)| b.lo + i as i64).collect() };
    let to_a = |x: &[i64]| -> Vec<usize> { x.iter().zip(&bounds).map(|(&v, b)| (v - b.lo) as usize).collect() };

    while !ev.exhausted() {
        let incumbent = if cfg.incumbent_conditioning {
            ev.best().map(|(x, _)| to_a(x))
        } else {
            None
        };
        let mut actions = Vec::new();
        let mut logps = Vec::new();
        let mut batch = Vec::new();
        for _ in 0..cfg.n_steps {
            for (w, r) in rngs.iter_mut().enumerate() {
                let (a, lp) = sample_action(&ppo.params, incumbent.as_deref(), r);
                batch.push((w, to_x(&a)));
                actions.push(a);
                logps.push(lp);
            }
        }
        let rewards = ev.evaluate_batch(&batch)?;
        actions.truncate(rewards.len());
        logps.truncate(rewards.len());
        let traj = TrajectoryBatch::new(actions, logps, &rewards, cfg.reward_norm, ppo.params.value, incumbent);
        ppo.update(&traj);
    }
    Ok(ev.finish())
}
