//! (μ,λ) evolution strategy with two-point crossover and log-normal
//! self-adaptive mutation on integer vectors.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::{Bounds, Evaluator, Objective, RunOutcome};
use crate::rng::{self, StreamRng};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EsConfig {
    pub mu: usize,
    pub lambda_pop: usize,
    pub cxpb: f64,
    pub mutpb: f64,
    /// Strategy bounds and initial value as fractions of each entry's range.
    pub s_min_frac: f64,
    pub s_max_frac: f64,
    pub s_init_frac: f64,
    pub max_samples: usize,
}

impl Default for EsConfig {
    fn default() -> Self {
        EsConfig {
            mu: 2,
            lambda_pop: 32,
            cxpb: 0.65,
            mutpb: 0.3,
            s_min_frac: 0.01,
            s_max_frac: 0.5,
            s_init_frac: 0.1,
            max_samples: 20_000,
        }
    }
}

impl EsConfig {
    pub fn validate(&self) -> Result<()> {
        if self.mu == 0 || self.mu > self.lambda_pop {
            return Err(Error::Config("es: need 1 <= mu <= lambda_pop".into()));
        }
        if !(self.cxpb >= 0.0 && self.mutpb >= 0.0) || self.cxpb + self.mutpb > 1.0 + 1e-12 {
            return Err(Error::Config("es: cxpb + mutpb must not exceed 1".into()));
        }
        if !(0.0 <= self.s_min_frac && self.s_min_frac <= self.s_max_frac) {
            return Err(Error::Config("es: need 0 <= s_min_frac <= s_max_frac".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Individual {
    pub y: Vec<i64>,
    pub s: Vec<f64>,
    pub fitness: f64,
}

/// Per-entry strategy bounds derived from the decision bounds.
#[derive(Debug, Clone)]
pub struct StrategyBounds {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl StrategyBounds {
    pub fn new(bounds: &[Bounds], min_frac: f64, max_frac: f64) -> Self {
        StrategyBounds {
            lo: bounds.iter().map(|b| min_frac * b.range() as f64).collect(),
            hi: bounds.iter().map(|b| max_frac * b.range() as f64).collect(),
        }
    }

    fn clamp(&self, k: usize, s: f64) -> f64 {
        s.clamp(self.lo[k], self.hi[k])
    }
}

/// The μ fittest, stable on ties.
pub fn select_mu(pop: &[Individual], mu: usize) -> Vec<Individual> {
    let mut order: Vec<usize> = (0..pop.len()).collect();
    order.sort_by(|&a, &b| pop[b].fitness.total_cmp(&pop[a].fitness));
    order.into_iter().take(mu).map(|i| pop[i].clone()).collect()
}

/// `ind1` with `[pt1, pt2)` of `y` and `s` taken from `ind2`.
pub fn splice(ind1: &Individual, ind2: &Individual, pt1: usize, pt2: usize) -> Result<Individual> {
    if ind1.y.len() != ind2.y.len() {
        return Err(Error::LengthMismatch(ind1.y.len(), ind2.y.len()));
    }
    let mut child = ind1.clone();
    child.y[pt1..pt2].copy_from_slice(&ind2.y[pt1..pt2]);
    child.s[pt1..pt2].copy_from_slice(&ind2.s[pt1..pt2]);
    Ok(child)
}

/// Two distinct cut points from `0..=dim`.
pub fn two_point_crossover<R: Rng + ?Sized>(ind1: &Individual, ind2: &Individual, rng: &mut R) -> Result<Individual> {
    let dim = ind1.y.len();
    if dim == 0 {
        return splice(ind1, ind2, 0, 0);
    }
    let a = rng.random_range(0..=dim);
    let mut b = rng.random_range(0..dim);
    if b >= a {
        b += 1;
    }
    splice(ind1, ind2, a.min(b), a.max(b))
}

/// (τ, τ*) for dimension `n`.
pub fn learning_rates(n: usize) -> (f64, f64) {
    let n = n.max(1) as f64;
    (1.0 / (2.0 * n).sqrt(), 1.0 / (2.0 * n.sqrt()).sqrt())
}

/// Log-normal step-size update followed by a rounded Gaussian step.
pub fn mutate_lognormal<R: Rng + ?Sized>(
    ind: &Individual,
    rng: &mut R,
    bounds: &[Bounds],
    sb: &StrategyBounds,
) -> Individual {
    let (tau, tau_star) = learning_rates(ind.y.len());
    let g: f64 = rng.sample(StandardNormal);
    let g_star: f64 = rng.sample(StandardNormal);
    let noise: Vec<f64> = (0..ind.y.len()).map(|_| rng.sample(StandardNormal)).collect();
    mutate_with(ind, g, g_star, &noise, tau, tau_star, bounds, sb)
}

/// Deterministic core of [`mutate_lognormal`] given the normal draws.
#[allow(clippy::too_many_arguments)]
pub fn mutate_with(
    ind: &Individual,
    g: f64,
    g_star: f64,
    noise: &[f64],
    tau: f64,
    tau_star: f64,
    bounds: &[Bounds],
    sb: &StrategyBounds,
) -> Individual {
    let factor = (tau * g + tau_star * g_star).exp();
    let mut out = ind.clone();
    for k in 0..ind.y.len() {
        out.s[k] = sb.clamp(k, ind.s[k] * factor);
        let step = (ind.y[k] as f64 + out.s[k] * noise[k]).round() as i64;
        out.y[k] = bounds[k].clamp(step);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variation {
    Crossover,
    Mutation,
    Clone,
}

/// Draws which operator builds the next offspring.
pub fn pick_variation<R: Rng + ?Sized>(cxpb: f64, mutpb: f64, rng: &mut R) -> Variation {
    let u: f64 = rng.random();
    if u < cxpb {
        Variation::Crossover
    } else if u < cxpb + mutpb {
        Variation::Mutation
    } else {
        Variation::Clone
    }
}

/// ES state, steppable one generation at a time.
pub struct Es {
    cfg: EsConfig,
    rng: StreamRng,
    worker_offset: usize,
    sb: StrategyBounds,
    pub population: Vec<Individual>,
    pub generations: usize,
}

impl Es {
    pub fn new(cfg: EsConfig, bounds: &[Bounds], seed: u64, worker_offset: usize) -> Result<Self> {
        cfg.validate()?;
        Ok(Es {
            sb: StrategyBounds::new(bounds, cfg.s_min_frac, cfg.s_max_frac),
            rng: rng::stream(seed, 2 << 20),
            worker_offset,
            population: Vec::new(),
            generations: 0,
            cfg,
        })
    }

    pub fn config(&self) -> &EsConfig {
        &self.cfg
    }

    pub fn initial_strategy(&self, bounds: &[Bounds]) -> Vec<f64> {
        bounds
            .iter()
            .enumerate()
            .map(|(k, b)| self.sb.clamp(k, self.cfg.s_init_frac * b.range() as f64))
            .collect()
    }

    /// Evaluates λ uniform individuals.
    pub fn init(&mut self, ev: &mut Evaluator) -> Result<()> {
        let bounds = ev.bounds().to_vec();
        let s = self.initial_strategy(&bounds);
        let ys: Vec<Vec<i64>> = (0..self.cfg.lambda_pop)
            .map(|_| ev.objective().random_point(&mut self.rng))
            .collect();
        let inds = ys
            .into_iter()
            .map(|y| Individual { y, s: s.clone(), fitness: f64::NAN })
            .collect();
        self.population = self.evaluate(ev, inds)?;
        Ok(())
    }

    /// Selection, variation and evaluation of one generation.
    pub fn generation(&mut self, ev: &mut Evaluator) -> Result<()> {
        if self.population.is_empty() {
            return self.init(ev);
        }
        let bounds = ev.bounds().to_vec();
        let parents = select_mu(&self.population, self.cfg.mu);
        let mut offspring = Vec::with_capacity(self.cfg.lambda_pop);
        for _ in 0..self.cfg.lambda_pop {
            let child = match pick_variation(self.cfg.cxpb, self.cfg.mutpb, &mut self.rng) {
                Variation::Crossover => {
                    let (i, j) = self.two_parents(parents.len());
                    two_point_crossover(&parents[i], &parents[j], &mut self.rng)?
                }
                Variation::Mutation => {
                    let p = &parents[self.rng.random_range(0..parents.len())];
                    mutate_lognormal(p, &mut self.rng, &bounds, &self.sb)
                }
                Variation::Clone => parents[self.rng.random_range(0..parents.len())].clone(),
            };
            offspring.push(child);
        }
        self.population = self.evaluate(ev, offspring)?;
        self.generations += 1;
        Ok(())
    }

    /// Replaces the weakest individuals with the given evaluated points.
    pub fn inject(&mut self, points: Vec<(Vec<i64>, f64)>, bounds: &[Bounds]) {
        let s = self.initial_strategy(bounds);
        let mut order: Vec<usize> = (0..self.population.len()).collect();
        order.sort_by(|&a, &b| self.population[a].fitness.total_cmp(&self.population[b].fitness));
        for (slot, (y, fitness)) in order.into_iter().zip(points) {
            self.population[slot] = Individual { y, s: s.clone(), fitness };
        }
    }

    fn two_parents(&mut self, n: usize) -> (usize, usize) {
        if n == 1 {
            return (0, 0);
        }
        let i = self.rng.random_range(0..n);
        let mut j = self.rng.random_range(0..n - 1);
        if j >= i {
            j += 1;
        }
        (i, j)
    }

    fn evaluate(&self, ev: &mut Evaluator, mut inds: Vec<Individual>) -> Result<Vec<Individual>> {
        let batch: Vec<(usize, Vec<i64>)> = inds
            .iter()
            .enumerate()
            .map(|(i, ind)| (self.worker_offset + i, ind.y.clone()))
            .collect();
        let f = ev.evaluate_batch(&batch)?;
        inds.truncate(f.len());
        for (ind, f) in inds.iter_mut().zip(f) {
            ind.fitness = f;
        }
        if inds.is_empty() {
            // out of budget: keep the last evaluated generation
            return Ok(self.population.clone());
        }
        Ok(inds)
    }
}

pub fn run_es(obj: &dyn Objective, cfg: &EsConfig, seed: u64, workers: usize) -> Result<RunOutcome> {
    let mut ev = Evaluator::new(obj, cfg.max_samples, workers)?;
    let mut es = Es::new(cfg.clone(), obj.bounds(), seed, 0)?;
    es.init(&mut ev)?;
    while !ev.exhausted() {
        es.generation(&mut ev)?;
    }
    Ok(ev.finish())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ind(y: Vec<i64>, fitness: f64) -> Individual {
        let s = vec![1.0; y.len()];
        Individual { y, s, fitness }
    }

    #[test]
    fn truncation_selection() {
        let pop = vec![ind(vec![0], 3.0), ind(vec![1], 1.0), ind(vec![2], 2.0)];
        let sel: Vec<f64> = select_mu(&pop, 2).iter().map(|i| i.fitness).collect();
        assert_eq!(sel, vec![3.0, 2.0]);
        let flat = vec![ind(vec![0], 1.0), ind(vec![1], 1.0), ind(vec![2], 1.0)];
        let sel: Vec<i64> = select_mu(&flat, 2).iter().map(|i| i.y[0]).collect();
        assert_eq!(sel, vec![0, 1]);
        assert_eq!(select_mu(&pop, 3).len(), 3);
    }

    #[test]
    fn splice_by_hand() {
        let a = ind(vec![1, 2, 3, 4], 0.0);
        let b = Individual { s: vec![2.0; 4], ..ind(vec![7, 8, 9, 10], 0.0) };
        let c = splice(&a, &b, 1, 3).unwrap();
        assert_eq!(c.y, vec![1, 8, 9, 4]);
        assert_eq!(c.s, vec![1.0, 2.0, 2.0, 1.0]);
        assert_eq!(splice(&a, &b, 0, 4).unwrap().y, b.y);
        assert!(splice(&a, &ind(vec![1], 0.0), 0, 1).is_err());
        let mut r = rng::master(5);
        assert_eq!(two_point_crossover(&a, &a, &mut r).unwrap(), a);
    }

    #[test]
    fn tau_values() {
        let (t, ts) = learning_rates(52);
        assert!((t - 0.098058).abs() < 1e-6);
        assert!((ts - 0.263320).abs() < 1e-6);
    }

    #[test]
    fn zero_noise_and_clamp() {
        let b = vec![Bounds::new(0, 10); 3];
        let sb = StrategyBounds::new(&b, 0.01, 0.5);
        let x = Individual { y: vec![1, 5, 9], s: vec![1.0, 5.0, 0.5], fitness: 0.0 };
        let same = mutate_with(&x, 0.0, 0.0, &[0.0; 3], 0.3, 0.4, &b, &sb);
        assert_eq!(same, x);
        let up = mutate_with(&x, 3.0, 3.0, &[0.0; 3], 0.3, 0.4, &b, &sb);
        assert_eq!(up.s[1], 5.0);
        let far = mutate_with(&x, 0.0, 0.0, &[100.0, -100.0, 0.0], 0.3, 0.4, &b, &sb);
        assert_eq!(far.y, vec![10, 0, 9]);
    }

    #[test]
    fn bad_probabilities_rejected() {
        let cfg = EsConfig { cxpb: 0.8, mutpb: 0.3, ..EsConfig::default() };
        assert!(cfg.validate().is_err());
    }
}
