use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::eval::{Bounds, Evaluation, Objective};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BenchmarkKind {
    NegSphere,
    NegRastrigin,
}

impl BenchmarkKind {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "neg_sphere" => Ok(BenchmarkKind::NegSphere),
            "neg_rastrigin" => Ok(BenchmarkKind::NegRastrigin),
            other => Err(Error::UnknownObjective(other.to_string())),
        }
    }
}

/// Negated sphere or Rastrigin on an integer lattice, maximum 0 at `target`.
#[derive(Debug, Clone)]
pub struct BenchmarkObjective {
    pub kind: BenchmarkKind,
    bounds: Vec<Bounds>,
    pub target: Vec<i64>,
}

impl BenchmarkObjective {
    pub fn new(kind: BenchmarkKind, bounds: Vec<Bounds>, target: Vec<i64>) -> Result<Self> {
        if bounds.len() != target.len() {
            return Err(Error::LengthMismatch(bounds.len(), target.len()));
        }
        Ok(BenchmarkObjective { kind, bounds, target })
    }
}

/// Builds a named benchmark with the optimum at `target` (all zeros when
/// `None`).
pub fn benchmark_objective(
    name: &str,
    dim: usize,
    bounds: Bounds,
    target: Option<Vec<i64>>,
) -> Result<BenchmarkObjective> {
    let kind = BenchmarkKind::parse(name)?;
    let target = target.unwrap_or_else(|| vec![0; dim]);
    BenchmarkObjective::new(kind, vec![bounds; dim], target)
}

impl Objective for BenchmarkObjective {
    fn bounds(&self) -> &[Bounds] {
        &self.bounds
    }

    fn evaluate(&self, x: &[i64]) -> Result<Evaluation> {
        if x.len() != self.target.len() {
            return Err(Error::LengthMismatch(x.len(), self.target.len()));
        }
        let d = x.iter().zip(&self.target).map(|(a, t)| (a - t) as f64);
        let value = match self.kind {
            BenchmarkKind::NegSphere => -d.map(|z| z * z).sum::<f64>(),
            BenchmarkKind::NegRastrigin => {
                let s: f64 = d.map(|z| z * z - 10.0 * (2.0 * PI * z).cos()).sum();
                -(10.0 * x.len() as f64 + s)
            }
        };
        Ok(Evaluation::plain(value))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_values() {
        let s = benchmark_objective("neg_sphere", 2, Bounds::new(-5, 5), None).unwrap();
        assert_eq!(s.evaluate(&[0, 0]).unwrap().objective, 0.0);
        assert_eq!(s.evaluate(&[1, 2]).unwrap().objective, -5.0);
        let shifted = benchmark_objective("neg_sphere", 3, Bounds::new(-5, 5), Some(vec![1, -2, 3])).unwrap();
        assert_eq!(shifted.evaluate(&[1, -2, 3]).unwrap().objective, 0.0);
    }

    #[test]
    fn rastrigin_optimum_is_zero() {
        let r = benchmark_objective("neg_rastrigin", 4, Bounds::new(-5, 5), Some(vec![2; 4])).unwrap();
        assert!(r.evaluate(&[2; 4]).unwrap().objective.abs() < 1e-12);
        // integer lattice: cos term is 1, so the value reduces to −Σ z²
        assert!((r.evaluate(&[3, 2, 2, 0]).unwrap().objective + 5.0).abs() < 1e-9);
    }

    #[test]
    fn unknown_name_rejected() {
        assert!(matches!(
            benchmark_objective("ackley", 2, Bounds::new(0, 1), None),
            Err(Error::UnknownObjective(_))
        ));
    }
}
