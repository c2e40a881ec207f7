use std::fmt;

use super::catalog::BurnClass;
use super::decode::{Assignment, CoreMap};
use super::instance::ProblemInstance;
use super::layout::LocationClass;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tactic {
    TwiceAtPeriphery,
    NoFreshAtPeriphery,
    FreshRing,
    NoFreshSquare,
}

impl fmt::Display for Tactic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Tactic::TwiceAtPeriphery => "twice_at_periphery",
            Tactic::NoFreshAtPeriphery => "no_fresh_at_periphery",
            Tactic::FreshRing => "fresh_ring",
            Tactic::NoFreshSquare => "no_fresh_square",
        })
    }
}

/// A broken tactic at a grid location. Squares report their top-left cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Violation {
    pub tactic: Tactic,
    pub row: usize,
    pub col: usize,
}

/// Lists every violation of the instance's active tactics on `core`.
pub fn check_tactics(core: &CoreMap, inst: &ProblemInstance) -> Vec<Violation> {
    let layout = &inst.layout;
    let t = inst.tactics;
    let mut out = Vec::new();
    let mut push = |tactic, cell| {
        let (row, col) = layout.coords(cell);
        out.push(Violation { tactic, row, col });
    };
    for cell in layout.in_core_cells() {
        let Some(a) = core.get(cell) else { continue };
        let class = layout.class(cell).expect("in-core");
        let periphery = class == LocationClass::Periphery;
        match a {
            Assignment::Fresh(_) => {
                if t.no_fresh_at_periphery && periphery {
                    push(Tactic::NoFreshAtPeriphery, cell);
                }
            }
            Assignment::Burned { batch, .. } => {
                if t.twice_at_periphery
                    && !periphery
                    && inst.burned[batch].burn_class == BurnClass::Twice
                {
                    push(Tactic::TwiceAtPeriphery, cell);
                }
                if t.fresh_ring && class == LocationClass::Ring {
                    push(Tactic::FreshRing, cell);
                }
            }
        }
    }
    if t.no_fresh_square {
        for block in layout.blocks() {
            if block
                .iter()
                .all(|&c| core.get(c).is_some_and(|a| a.is_fresh()))
            {
                push(Tactic::NoFreshSquare, block[0]);
            }
        }
    }
    out
}
