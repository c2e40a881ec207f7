use crate::error::{Error, Result};
use crate::eval::{Evaluation, Objective};

/// Largest search space `brute_force` will enumerate.
pub const BRUTE_FORCE_LIMIT: u128 = 1_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct BruteForce {
    pub best: Vec<i64>,
    pub objective: f64,
    pub count: u64,
}

/// Exhaustive enumeration in lexicographic order (last entry fastest);
/// ties keep the first point met.
pub fn brute_force(obj: &dyn Objective) -> Result<BruteForce> {
    let mut best = Vec::new();
    let mut best_f = f64::NEG_INFINITY;
    let count = enumerate(obj, |x, e| {
        if e.objective > best_f {
            best_f = e.objective;
            best = x.to_vec();
        }
    })?;
    Ok(BruteForce {
        best,
        objective: best_f,
        count,
    })
}

/// Calls `visit` on every point of the box in lexicographic order and
/// returns the number of points.
pub fn enumerate(obj: &dyn Objective, mut visit: impl FnMut(&[i64], &Evaluation)) -> Result<u64> {
    let bounds = obj.bounds();
    let size = bounds
        .iter()
        .fold(1u128, |acc, b| acc.saturating_mul(b.cardinality() as u128));
    if size > BRUTE_FORCE_LIMIT {
        return Err(Error::SpaceTooLarge {
            size,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    let mut x: Vec<i64> = bounds.iter().map(|b| b.lo).collect();
    let mut count = 0u64;
    loop {
        visit(&x, &obj.evaluate(&x)?);
        count += 1;
        let mut k = x.len();
        loop {
            if k == 0 {
                return Ok(count);
            }
            k -= 1;
            if x[k] < bounds[k].hi {
                x[k] += 1;
                break;
            }
            x[k] = bounds[k].lo;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::Bounds;
    use crate::surrogate::benchmark_objective;

    #[test]
    fn sphere_cube() {
        let s = benchmark_objective("neg_sphere", 3, Bounds::new(-2, 2), None).unwrap();
        let r = brute_force(&s).unwrap();
        assert_eq!(r.best, vec![0, 0, 0]);
        assert_eq!(r.objective, 0.0);
        assert_eq!(r.count, 125);
    }

    #[test]
    fn guard_rejects_large_spaces() {
        let s = benchmark_objective("neg_sphere", 30, Bounds::new(0, 9), None).unwrap();
        match brute_force(&s) {
            Err(Error::SpaceTooLarge { size, .. }) => assert_eq!(size, 10u128.pow(30)),
            other => panic!("expected rejection, got {other:?}"),
        }
    }
}
