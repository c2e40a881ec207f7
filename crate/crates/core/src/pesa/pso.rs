use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::{Bounds, Evaluator};
use crate::rng::{self, StreamRng};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PsoConfig {
    pub npar: usize,
    /// Swarm updates per PESA period.
    pub steps: usize,
    /// Constriction factor χ_c.
    pub chi: f64,
    pub c1: f64,
    pub c2: f64,
    /// Velocity limit as a fraction of each entry's range.
    pub v_max_frac: f64,
}

impl Default for PsoConfig {
    fn default() -> Self {
        PsoConfig {
            npar: 10,
            steps: 10,
            chi: 0.7298,
            c1: 2.05,
            c2: 2.05,
            v_max_frac: 0.25,
        }
    }
}

impl PsoConfig {
    pub fn validate(&self) -> Result<()> {
        if self.npar == 0 || self.steps == 0 {
            return Err(Error::Config("pso: npar and steps must be at least 1".into()));
        }
        if !(self.chi > 0.0) || !(self.c1 >= 0.0) || !(self.c2 >= 0.0) || !(self.v_max_frac > 0.0) {
            return Err(Error::Config("pso: coefficients must be non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Particle {
    pub x: Vec<i64>,
    pub v: Vec<f64>,
    pub fitness: f64,
    pub pbest: Vec<i64>,
    pub pbest_fitness: f64,
}

/// Constriction velocity update and rounded position move for one
/// particle, with explicit uniform draws `r1`, `r2` per entry.
#[allow(clippy::too_many_arguments)]
pub fn move_particle(
    p: &mut Particle,
    gbest: &[i64],
    r1: &[f64],
    r2: &[f64],
    cfg: &PsoConfig,
    v_max: &[f64],
    bounds: &[Bounds],
) {
    for k in 0..p.x.len() {
        let x = p.x[k] as f64;
        let v = cfg.chi
            * (p.v[k] + cfg.c1 * r1[k] * (p.pbest[k] as f64 - x) + cfg.c2 * r2[k] * (gbest[k] as f64 - x));
        p.v[k] = v.clamp(-v_max[k], v_max[k]);
        p.x[k] = bounds[k].clamp((x + p.v[k]).round() as i64);
    }
}

/// Moves every particle once.
pub fn pso_step<R: Rng + ?Sized>(
    swarm: &mut [Particle],
    gbest: &[i64],
    cfg: &PsoConfig,
    v_max: &[f64],
    bounds: &[Bounds],
    rng: &mut R,
) {
    let dim = bounds.len();
    for p in swarm {
        let r1: Vec<f64> = (0..dim).map(|_| rng.random()).collect();
        let r2: Vec<f64> = (0..dim).map(|_| rng.random()).collect();
        move_particle(p, gbest, &r1, &r2, cfg, v_max, bounds);
    }
}

/// Records new fitnesses and updates personal bests.
pub fn update_bests(swarm: &mut [Particle], fitness: &[f64]) {
    for (p, &f) in swarm.iter_mut().zip(fitness) {
        p.fitness = f;
        if f > p.pbest_fitness {
            p.pbest_fitness = f;
            p.pbest.clone_from(&p.x);
        }
    }
}

pub struct Pso {
    cfg: PsoConfig,
    rng: StreamRng,
    worker_offset: usize,
    v_max: Vec<f64>,
    pub swarm: Vec<Particle>,
    pub gbest: Option<(Vec<i64>, f64)>,
}

impl Pso {
    pub fn new(cfg: PsoConfig, bounds: &[Bounds], seed: u64, worker_offset: usize) -> Result<Self> {
        cfg.validate()?;
        Ok(Pso {
            v_max: bounds.iter().map(|b| cfg.v_max_frac * b.range() as f64).collect(),
            rng: rng::stream(seed, 3 << 20),
            worker_offset,
            swarm: Vec::new(),
            gbest: None,
            cfg,
        })
    }

    pub fn config(&self) -> &PsoConfig {
        &self.cfg
    }

    /// One period: the initial swarm counts as the first step.
    pub fn period(&mut self, ev: &mut Evaluator) -> Result<()> {
        let bounds = ev.bounds().to_vec();
        let mut first = 0;
        if self.swarm.is_empty() {
            let xs: Vec<Vec<i64>> = (0..self.cfg.npar).map(|_| ev.objective().random_point(&mut self.rng)).collect();
            let f = self.eval(ev, &xs)?;
            for (x, f) in xs.into_iter().zip(f) {
                let v = self
                    .v_max
                    .iter()
                    .map(|&m| if m > 0.0 { self.rng.random_range(-m..=m) } else { 0.0 })
                    .collect();
                self.swarm.push(Particle {
                    pbest: x.clone(),
                    pbest_fitness: f,
                    fitness: f,
                    x,
                    v,
                });
            }
            self.refresh_gbest();
            first = 1;
        }
        for _ in first..self.cfg.steps {
            let Some((g, _)) = self.gbest.clone() else {
                return Ok(());
            };
            pso_step(&mut self.swarm, &g, &self.cfg, &self.v_max, &bounds, &mut self.rng);
            let xs: Vec<Vec<i64>> = self.swarm.iter().map(|p| p.x.clone()).collect();
            let f = self.eval(ev, &xs)?;
            // particles past the budget keep their previous fitness
            let n = f.len();
            update_bests(&mut self.swarm[..n], &f);
            self.refresh_gbest();
            if ev.exhausted() {
                break;
            }
        }
        Ok(())
    }

    /// Replaces the particles with the weakest personal bests, zeroing
    /// their velocity.
    pub fn inject(&mut self, points: Vec<(Vec<i64>, f64)>) {
        let mut order: Vec<usize> = (0..self.swarm.len()).collect();
        order.sort_by(|&a, &b| self.swarm[a].pbest_fitness.total_cmp(&self.swarm[b].pbest_fitness));
        for (i, (x, f)) in order.into_iter().zip(points) {
            let dim = x.len();
            self.swarm[i] = Particle {
                pbest: x.clone(),
                pbest_fitness: f,
                fitness: f,
                x,
                v: vec![0.0; dim],
            };
        }
        self.refresh_gbest();
    }

    fn refresh_gbest(&mut self) {
        for p in &self.swarm {
            if self.gbest.as_ref().is_none_or(|(_, f)| p.pbest_fitness > *f) {
                self.gbest = Some((p.pbest.clone(), p.pbest_fitness));
            }
        }
    }

    fn eval(&self, ev: &mut Evaluator, xs: &[Vec<i64>]) -> Result<Vec<f64>> {
        let batch: Vec<(usize, Vec<i64>)> = xs
            .iter()
            .enumerate()
            .map(|(i, x)| (self.worker_offset + i, x.clone()))
            .collect();
        ev.evaluate_batch(&batch)
    }
}
