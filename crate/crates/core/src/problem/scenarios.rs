//! Generators for the shipped instances.
//!
//! The five 193-location scenarios differ in fresh-batch size and symmetry.
//! All four tactics are active. Burned batches are sized so that the
//! periphery can be filled with burned fuel and the remaining burned
//! locations are spread over the interior in proportion to its slot count
//! per multiplicity. Half of the periphery batches are twice burned.

use super::catalog::{build_catalog, BurnClass, BurnedAssembly, FuelType};
use super::instance::{Choice, ProblemInstance, Tactics};
use super::layout::{pwr193_ascii, CoreLayout, LocationClass, Symmetry};
use crate::error::{Error, Result};
use crate::surrogate::{ConstraintSet, SurrogateCoefficients};

/// Surrogate coefficients of the shipped instances.
///
/// The generic defaults leave the peaking and cycle-length constraints
/// slack on the 193-location inventory: random patterns sit near 330 EFPD
/// with F_Δh around 1.05. These values raise fresh reactivity and its
/// spread so that random patterns straddle every constraint threshold and
/// the cycle-length target sits at the median.
pub fn calibrated_coefficients() -> SurrogateCoefficients {
    SurrogateCoefficients {
        a0: 1.432,
        a1: 0.2,
        w_ifba: 0.001,
        w_waba: 0.015,
        a_cy: 1000.0,
        delta_bu: 28.0,
        ..SurrogateCoefficients::default()
    }
}

/// Names accepted by [`scenario`], in shipping order.
pub const SCENARIOS: [&str; 6] = [
    "89-eighth",
    "81-eighth",
    "89-quarter",
    "85-quarter",
    "81-quarter",
    "toy4",
];

/// Builds a shipped instance by name.
pub fn scenario(name: &str) -> Result<ProblemInstance> {
    let (n_fresh, symmetry) = match name {
        "89-eighth" => (89, Symmetry::Eighth),
        "81-eighth" => (81, Symmetry::Eighth),
        "89-quarter" => (89, Symmetry::Quarter),
        "85-quarter" => (85, Symmetry::Quarter),
        "81-quarter" => (81, Symmetry::Quarter),
        "toy4" => return toy4(),
        _ => return Err(Error::Instance(format!("unknown scenario {name:?}"))),
    };
    pwr193(name, n_fresh, symmetry)
}

/// A 193-location scenario with the generated burned inventory.
pub fn pwr193(name: &str, n_fresh: usize, symmetry: Symmetry) -> Result<ProblemInstance> {
    let layout = CoreLayout::from_ascii(&pwr193_ascii(), symmetry)?;
    let burned = generate_inventory(&layout, n_fresh)?;
    ProblemInstance::new(
        name,
        layout,
        build_catalog(),
        burned,
        n_fresh,
        Tactics::all(),
        ConstraintSet::default(),
        calibrated_coefficients(),
        None,
    )
}

/// Burned batches for `layout` with `n_fresh` fresh assemblies.
///
/// Once-burned batch `j` gets k = 1.035 − 0.001·j and bu0 = 20 + 0.05·j,
/// twice-burned batch `j` gets k = 0.955 − 0.001·j and bu0 = 40 + 0.1·j.
/// Batches are listed by decreasing multiplicity within each class.
pub fn generate_inventory(layout: &CoreLayout, n_fresh: usize) -> Result<Vec<BurnedAssembly>> {
    let burned_locations = layout
        .n_locations()
        .checked_sub(n_fresh)
        .ok_or_else(|| Error::Instance("more fresh assemblies than locations".into()))?;
    let mut mults: Vec<usize> = layout.slots().iter().map(|s| s.multiplicity()).collect();
    mults.sort_unstable_by(|a, b| b.cmp(a));
    mults.dedup();

    let count = |m: usize, pred: &dyn Fn(LocationClass) -> bool| {
        layout
            .slots()
            .iter()
            .filter(|s| s.multiplicity() == m && pred(s.class))
            .count()
    };
    let periphery: Vec<usize> = mults
        .iter()
        .map(|&m| count(m, &|c| c == LocationClass::Periphery))
        .collect();
    let interior: Vec<usize> = mults
        .iter()
        .map(|&m| count(m, &|c| matches!(c, LocationClass::Interior | LocationClass::Center)))
        .collect();

    let base: usize = mults.iter().zip(&periphery).map(|(m, p)| m * p).sum();
    let extra = burned_locations.checked_sub(base).ok_or_else(|| {
        Error::Instance(format!(
            "{burned_locations} burned locations cannot cover the periphery ({base})"
        ))
    })?;
    let interior_locs: usize = mults.iter().zip(&interior).map(|(m, i)| m * i).sum();
    let targets: Vec<f64> = mults
        .iter()
        .zip(&interior)
        .map(|(m, i)| extra as f64 * (m * i) as f64 / interior_locs.max(1) as f64)
        .collect();
    let split = best_split(&mults, &interior, &targets, extra).ok_or_else(|| {
        Error::Instance(format!(
            "no batch split places {extra} burned locations in the interior"
        ))
    })?;

    let mut once = Vec::new();
    let mut twice = Vec::new();
    for (i, &m) in mults.iter().enumerate() {
        let n_twice = periphery[i] / 2;
        let n_once = periphery[i] - n_twice + split[i];
        once.extend(std::iter::repeat_n(m, n_once));
        twice.extend(std::iter::repeat_n(m, n_twice));
    }
    let mut out = Vec::with_capacity(once.len() + twice.len());
    for (j, &m) in once.iter().enumerate() {
        out.push(BurnedAssembly {
            id: format!("o{j:02}"),
            burn_class: BurnClass::Once,
            k_value: round6(1.035 - 0.001 * j as f64),
            bu0: round6(20.0 + 0.05 * j as f64),
            multiplicity: m,
        });
    }
    for (j, &m) in twice.iter().enumerate() {
        out.push(BurnedAssembly {
            id: format!("t{j:02}"),
            burn_class: BurnClass::Twice,
            k_value: round6(0.955 - 0.001 * j as f64),
            bu0: round6(40.0 + 0.1 * j as f64),
            multiplicity: m,
        });
    }
    Ok(out)
}

fn round6(x: f64) -> f64 {
    (x * 1e6).round() / 1e6
}

/// Interior batch counts per multiplicity summing to `extra` locations,
/// closest to `targets` in squared error. Ties go to the first split found
/// in lexicographic order.
fn best_split(mults: &[usize], caps: &[usize], targets: &[f64], extra: usize) -> Option<Vec<usize>> {
    fn rec(
        i: usize,
        left: usize,
        mults: &[usize],
        caps: &[usize],
        targets: &[f64],
        cur: &mut Vec<usize>,
        best: &mut Option<(f64, Vec<usize>)>,
    ) {
        if i == mults.len() {
            if left == 0 {
                let err: f64 = cur
                    .iter()
                    .zip(mults)
                    .zip(targets)
                    .map(|((x, m), t)| ((x * m) as f64 - t).powi(2))
                    .sum();
                if best.as_ref().is_none_or(|(e, _)| err < *e) {
                    *best = Some((err, cur.clone()));
                }
            }
            return;
        }
        for x in 0..=caps[i].min(left / mults[i]) {
            cur.push(x);
            rec(i + 1, left - x * mults[i], mults, caps, targets, cur, best);
            cur.pop();
        }
    }
    let mut best = None;
    rec(0, extra, mults, caps, targets, &mut Vec::new(), &mut best);
    best.map(|(_, v)| v)
}

/// A 4×4 all-in-core grid under quarter symmetry: four slots of four
/// locations each. Slots 0 and 1 choose among three fresh types, slots 2
/// and 3 among fresh type 0 and the two burned batches. Eight fresh and
/// eight burned assemblies, no tactics. Small enough to enumerate.
pub fn toy4() -> Result<ProblemInstance> {
    let layout = CoreLayout::from_ascii(&["####"; 4], Symmetry::Quarter)?;
    let catalog = vec![
        FuelType::new(4.00, 128, 0),
        FuelType::new(4.40, 128, 12),
        FuelType::new(4.95, 156, 0),
    ];
    let burned = vec![
        BurnedAssembly {
            id: "b1".into(),
            burn_class: BurnClass::Once,
            k_value: 1.035,
            bu0: 20.0,
            multiplicity: 4,
        },
        BurnedAssembly {
            id: "b2".into(),
            burn_class: BurnClass::Twice,
            k_value: 0.955,
            bu0: 40.0,
            multiplicity: 4,
        },
    ];
    let fresh = vec![Choice::Fresh(0), Choice::Fresh(1), Choice::Fresh(2)];
    let mixed = vec![Choice::Fresh(0), Choice::Burned(0), Choice::Burned(1)];
    ProblemInstance::new(
        "toy4",
        layout,
        catalog,
        burned,
        8,
        Tactics::default(),
        ConstraintSet::default(),
        calibrated_coefficients(),
        Some(vec![fresh.clone(), fresh, mixed.clone(), mixed]),
    )
}
