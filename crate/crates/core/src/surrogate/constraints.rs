use serde::{Deserialize, Serialize};

use super::physics::FomVector;
use crate::error::{Error, Result};

/// The constrained figures of merit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fom {
    CycleLength,
    FDeltaH,
    Fq,
    Boron,
    PeakBurnup,
    EnrichmentCount,
    IfbaCount,
}

impl Fom {
    pub fn name(&self) -> &'static str {
        match self {
            Fom::CycleLength => "l_cy",
            Fom::FDeltaH => "f_dh",
            Fom::Fq => "f_q",
            Fom::Boron => "cb",
            Fom::PeakBurnup => "bu_max",
            Fom::EnrichmentCount => "n_enr",
            Fom::IfbaCount => "n_ifba",
        }
    }

    pub fn value(&self, f: &FomVector) -> f64 {
        match self {
            Fom::CycleLength => f.l_cy,
            Fom::FDeltaH => f.f_dh,
            Fom::Fq => f.f_q,
            Fom::Boron => f.cb,
            Fom::PeakBurnup => f.bu_max,
            Fom::EnrichmentCount => f.n_enr as f64,
            Fom::IfbaCount => f.n_ifba as f64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Direction {
    AtMost(f64),
    AtLeast(f64),
    /// Two-sided target; satisfied within `tolerance`.
    Equal { target: f64, tolerance: f64 },
    Range { lo: f64, hi: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constraint {
    pub fom: Fom,
    pub direction: Direction,
    /// Penalty weight γ.
    pub weight: f64,
}

impl Constraint {
    /// The bound a violating value is measured against, or `None` when the
    /// constraint holds.
    pub fn violated_bound(&self, x: f64) -> Option<f64> {
        match self.direction {
            Direction::AtMost(c) => (x > c).then_some(c),
            Direction::AtLeast(c) => (x < c).then_some(c),
            Direction::Equal { target, tolerance } => ((x - target).abs() > tolerance).then_some(target),
            Direction::Range { lo, hi } => {
                if x < lo {
                    Some(lo)
                } else if x > hi {
                    Some(hi)
                } else {
                    None
                }
            }
        }
    }

    /// Relative squared distance to the violated bound, zero when satisfied.
    pub fn phi(&self, x: f64) -> f64 {
        match self.violated_bound(x) {
            Some(c) => ((x - c) / c).powi(2),
            None => 0.0,
        }
    }

    pub fn satisfied(&self, foms: &FomVector) -> bool {
        self.violated_bound(self.fom.value(foms)).is_none()
    }
}

/// Constraint thresholds and weights.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintSet {
    pub constraints: Vec<Constraint>,
}

pub const DEFAULT_GAMMA: f64 = 25_000.0;

impl Default for ConstraintSet {
    fn default() -> Self {
        ConstraintSection::default().into()
    }
}

impl ConstraintSet {
    pub fn validate(&self) -> Result<()> {
        for c in &self.constraints {
            if !(c.weight > 0.0) {
                return Err(Error::Instance(format!("{}: weight must be positive", c.fom.name())));
            }
            let ok = match c.direction {
                Direction::AtMost(v) | Direction::AtLeast(v) => v != 0.0,
                Direction::Equal { target, tolerance } => target != 0.0 && tolerance >= 0.0,
                Direction::Range { lo, hi } => lo <= hi && lo != 0.0 && hi != 0.0,
            };
            if !ok {
                return Err(Error::Instance(format!("{}: invalid threshold", c.fom.name())));
            }
        }
        Ok(())
    }

    pub fn all_satisfied(&self, foms: &FomVector) -> bool {
        self.constraints.iter().all(|c| c.satisfied(foms))
    }

    pub fn get(&self, fom: Fom) -> Option<&Constraint> {
        self.constraints.iter().find(|c| c.fom == fom)
    }
}

/// Penalized objective, to be maximized:
/// `−LCOE − Σ γ_i Φ(x_i) + 1·[all constraints hold]`.
pub fn score_foms(foms: &FomVector, cs: &ConstraintSet) -> f64 {
    let mut penalty = 0.0;
    let mut feasible = true;
    for c in &cs.constraints {
        let phi = c.phi(c.fom.value(foms));
        if c.violated_bound(c.fom.value(foms)).is_some() {
            feasible = false;
        }
        penalty += c.weight * phi;
    }
    -foms.lcoe - penalty + if feasible { 1.0 } else { 0.0 }
}

/// `[constraints]` section of an instance file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConstraintSection {
    pub gamma: f64,
    pub cycle_length: f64,
    pub cycle_tolerance: f64,
    pub f_dh_max: f64,
    pub f_q_max: f64,
    pub cb_max: f64,
    pub bu_max: f64,
    pub n_enr_range: [u32; 2],
    pub n_ifba_range: [u32; 2],
}

impl Default for ConstraintSection {
    fn default() -> Self {
        ConstraintSection {
            gamma: DEFAULT_GAMMA,
            cycle_length: 500.0,
            cycle_tolerance: 0.05,
            f_dh_max: 1.45,
            f_q_max: 1.85,
            cb_max: 1200.0,
            bu_max: 62.0,
            n_enr_range: [2, 3],
            n_ifba_range: [1, 3],
        }
    }
}

impl From<ConstraintSection> for ConstraintSet {
    fn from(s: ConstraintSection) -> Self {
        let c = |fom, direction| Constraint {
            fom,
            direction,
            weight: s.gamma,
        };
        ConstraintSet {
            constraints: vec![
                c(
                    Fom::CycleLength,
                    Direction::Equal {
                        target: s.cycle_length,
                        tolerance: s.cycle_tolerance,
                    },
                ),
                c(Fom::FDeltaH, Direction::AtMost(s.f_dh_max)),
                c(Fom::Fq, Direction::AtMost(s.f_q_max)),
                c(Fom::Boron, Direction::AtMost(s.cb_max)),
                c(Fom::PeakBurnup, Direction::AtMost(s.bu_max)),
                c(
                    Fom::EnrichmentCount,
                    Direction::Range {
                        lo: s.n_enr_range[0] as f64,
                        hi: s.n_enr_range[1] as f64,
                    },
                ),
                c(
                    Fom::IfbaCount,
                    Direction::Range {
                        lo: s.n_ifba_range[0] as f64,
                        hi: s.n_ifba_range[1] as f64,
                    },
                ),
            ],
        }
    }
}

impl ConstraintSet {
    /// Back to the file section. Only sets that came from a section (one
    /// shared weight, the seven standard constraints) round-trip.
    pub fn to_section(&self) -> Option<ConstraintSection> {
        let gamma = self.constraints.first()?.weight;
        if self.constraints.iter().any(|c| c.weight != gamma) {
            return None;
        }
        let mut s = ConstraintSection {
            gamma,
            ..ConstraintSection::default()
        };
        for c in &self.constraints {
            match (c.fom, c.direction) {
                (Fom::CycleLength, Direction::Equal { target, tolerance }) => {
                    s.cycle_length = target;
                    s.cycle_tolerance = tolerance;
                }
                (Fom::FDeltaH, Direction::AtMost(v)) => s.f_dh_max = v,
                (Fom::Fq, Direction::AtMost(v)) => s.f_q_max = v,
                (Fom::Boron, Direction::AtMost(v)) => s.cb_max = v,
                (Fom::PeakBurnup, Direction::AtMost(v)) => s.bu_max = v,
                (Fom::EnrichmentCount, Direction::Range { lo, hi }) => s.n_enr_range = [lo as u32, hi as u32],
                (Fom::IfbaCount, Direction::Range { lo, hi }) => s.n_ifba_range = [lo as u32, hi as u32],
                _ => return None,
            }
        }
        Some(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn foms(f_q: f64, f_dh: f64, cb: f64, bu: f64, l_cy: f64, lcoe: f64) -> FomVector {
        FomVector {
            l_cy,
            f_dh,
            f_q,
            cb,
            bu_max: bu,
            lcoe,
            n_enr: 3,
            n_ifba: 2,
        }
    }

    #[test]
    fn feasible_row_gets_the_bonus() {
        let f = foms(1.815, 1.436, 1178.0, 61.415, 500.0, 5.605);
        let s = score_foms(&f, &ConstraintSet::default());
        assert!((s - -4.605).abs() < 1e-12);
    }

    #[test]
    fn equality_is_two_sided() {
        let cs = ConstraintSet::default();
        let base = foms(1.8, 1.4, 1100.0, 55.0, 500.0, 5.0);
        let lo = FomVector { l_cy: 499.0, ..base };
        let hi = FomVector { l_cy: 501.0, ..base };
        let s_lo = score_foms(&lo, &cs);
        let s_hi = score_foms(&hi, &cs);
        assert!((s_lo - s_hi).abs() < 1e-12);
        assert!((s_lo - (-5.0 - 25_000.0 * (1.0f64 / 500.0).powi(2))).abs() < 1e-12);
        let inside = FomVector { l_cy: 500.04, ..base };
        assert_eq!(score_foms(&inside, &cs), -4.0);
    }

    #[test]
    fn range_uses_nearest_bound() {
        let c = Constraint {
            fom: Fom::EnrichmentCount,
            direction: Direction::Range { lo: 2.0, hi: 3.0 },
            weight: 1.0,
        };
        assert_eq!(c.phi(2.5), 0.0);
        assert!((c.phi(1.0) - 0.25).abs() < 1e-15);
        assert!((c.phi(6.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn section_round_trip() {
        let cs = ConstraintSet::default();
        let back: ConstraintSet = cs.to_section().unwrap().into();
        assert_eq!(cs, back);
    }
}
