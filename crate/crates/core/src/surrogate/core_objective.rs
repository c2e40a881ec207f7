use std::sync::Arc;

use super::constraints::score_foms;
use super::physics::evaluate_core;
use crate::error::Result;
use crate::eval::{Bounds, Evaluation, Objective};
use crate::problem::ProblemInstance;

/// Decode, evaluate and score a loading pattern.
#[derive(Debug, Clone)]
pub struct CoreObjective {
    pub instance: Arc<ProblemInstance>,
}

impl CoreObjective {
    pub fn new(instance: ProblemInstance) -> Self {
        CoreObjective {
            instance: Arc::new(instance),
        }
    }
}

impl Objective for CoreObjective {
    fn bounds(&self) -> &[Bounds] {
        self.instance.bounds()
    }

    fn evaluate(&self, x: &[i64]) -> Result<Evaluation> {
        let inst = &self.instance;
        let core = inst.decode(x)?;
        let foms = evaluate_core(&core, inst, &inst.coefficients);
        Ok(Evaluation {
            objective: score_foms(&foms, &inst.constraints),
            feasible: inst.constraints.all_satisfied(&foms),
            foms: Some(foms),
        })
    }
}
