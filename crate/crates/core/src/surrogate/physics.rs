use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::{Assignment, CoreMap, FuelType, ProblemInstance};

/// LCOE reported for a core with zero cycle length, in $/MWh.
pub const LCOE_SENTINEL: f64 = 1.0e3;

/// Named constants of the surrogate formulas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SurrogateCoefficients {
    /// Fresh k-infinity intercept.
    pub a0: f64,
    /// k-infinity gain per enrichment weight percent.
    pub a1: f64,
    /// Reactivity worth per IFBA rod.
    pub w_ifba: f64,
    /// Reactivity worth per WABA pad.
    pub w_waba: f64,
    /// Neighbour coupling.
    pub nu: f64,
    /// Reflector return fraction for out-of-core sides.
    pub reflector: f64,
    /// Axial peaking factor, F_q = axial · F_Δh.
    pub axial: f64,
    /// EFPD per unit of mean excess reactivity.
    pub a_cy: f64,
    /// ppm per unit of unpoisoned excess reactivity.
    pub a_cb: f64,
    /// ppm hold-down per unit of mean poison worth.
    pub b_cb: f64,
    /// Burnup gained over a 500 EFPD cycle at unit relative power.
    pub delta_bu: f64,
    pub a_cost: f64,
    pub c0: f64,
    pub c_enr: f64,
    pub c_ifba: f64,
    pub c_waba: f64,
}

impl Default for SurrogateCoefficients {
    fn default() -> Self {
        SurrogateCoefficients {
            a0: 0.92,
            a1: 0.040,
            w_ifba: 0.00020,
            w_waba: 0.0020,
            nu: 0.25,
            reflector: 0.65,
            axial: 1.28,
            a_cy: 9500.0,
            a_cb: 11000.0,
            b_cb: 45000.0,
            delta_bu: 24.0,
            a_cost: 1000.0,
            c0: 1.5,
            c_enr: 0.9,
            c_ifba: 0.004,
            c_waba: 0.02,
        }
    }
}

impl SurrogateCoefficients {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.a0, self.a1, self.w_ifba, self.w_waba, self.nu, self.reflector, self.axial,
            self.a_cy, self.a_cb, self.b_cb, self.delta_bu, self.a_cost, self.c0, self.c_enr,
            self.c_ifba, self.c_waba,
        ];
        if all.iter().all(|c| c.is_finite() && *c >= 0.0) {
            Ok(())
        } else {
            Err(Error::Instance("surrogate coefficients must be finite and non-negative".into()))
        }
    }

    /// Burnable-poison worth of a fresh type.
    pub fn poison_worth(&self, t: &FuelType) -> f64 {
        self.w_ifba * t.ifba as f64 + self.w_waba * t.waba as f64
    }

    /// Fabrication cost of one fresh assembly.
    pub fn assembly_cost(&self, t: &FuelType) -> f64 {
        self.c0 + self.c_enr * t.enrichment + self.c_ifba * t.ifba as f64 + self.c_waba * t.waba as f64
    }
}

/// The eight figures of merit of a core.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FomVector {
    /// Cycle length, EFPD.
    pub l_cy: f64,
    pub f_dh: f64,
    pub f_q: f64,
    /// Peak boron, ppm.
    pub cb: f64,
    /// Peak burnup, GWd/tHm.
    pub bu_max: f64,
    /// $/MWh.
    pub lcoe: f64,
    pub n_enr: usize,
    pub n_ifba: usize,
}

/// k-infinity of a location's assignment.
pub fn kinf(a: Assignment, inst: &ProblemInstance, coeffs: &SurrogateCoefficients) -> f64 {
    match a {
        Assignment::Fresh(t) => fresh_kinf(&inst.catalog[t], coeffs),
        Assignment::Burned { batch, .. } => inst.burned[batch].k_value,
    }
}

pub(crate) fn fresh_kinf(t: &FuelType, c: &SurrogateCoefficients) -> f64 {
    c.a0 + c.a1 * t.enrichment - c.poison_worth(t)
}

/// Normalized power from k values and 4-neighbour lists over dense location
/// indices. `None` sides return `reflector · k_i`.
pub fn power_map_from(k: &[f64], neighbors: &[[Option<usize>; 4]], nu: f64, reflector: f64) -> Vec<f64> {
    let q: Vec<f64> = k
        .iter()
        .zip(neighbors)
        .map(|(&ki, nb)| {
            let side: f64 = nb
                .iter()
                .map(|n| match n {
                    Some(j) => k[*j],
                    None => reflector * ki,
                })
                .sum();
            (ki + nu * side) / (1.0 + 4.0 * nu)
        })
        .collect();
    let mean = q.iter().sum::<f64>() / q.len() as f64;
    q.into_iter().map(|x| x / mean).collect()
}

/// Relative power per in-core location, in row-major order; mean exactly 1.
pub fn power_map(core: &CoreMap, inst: &ProblemInstance, coeffs: &SurrogateCoefficients) -> Vec<f64> {
    let layout = &inst.layout;
    let k: Vec<f64> = layout
        .locations()
        .iter()
        .map(|&c| kinf(core.get(c).expect("decoded core"), inst, coeffs))
        .collect();
    power_map_from(&k, layout.location_neighbors(), coeffs.nu, coeffs.reflector)
}

/// Figures of merit of a decoded core.
pub fn evaluate_core(core: &CoreMap, inst: &ProblemInstance, coeffs: &SurrogateCoefficients) -> FomVector {
    let cells = inst.layout.locations();
    let n = cells.len() as f64;
    let mut k = Vec::with_capacity(cells.len());
    let mut poison = Vec::with_capacity(cells.len());
    let mut bu0 = Vec::with_capacity(cells.len());
    let mut cost = 0.0;
    let mut enr: Vec<u64> = Vec::new();
    let mut ifba: Vec<u32> = Vec::new();
    for &c in cells {
        match core.get(c).expect("decoded core") {
            Assignment::Fresh(t) => {
                let ft = &inst.catalog[t];
                k.push(fresh_kinf(ft, coeffs));
                poison.push(coeffs.poison_worth(ft));
                bu0.push(0.0);
                cost += coeffs.assembly_cost(ft);
                enr.push(ft.enrichment.to_bits());
                ifba.push(ft.ifba);
            }
            Assignment::Burned { batch, .. } => {
                let b = &inst.burned[batch];
                k.push(b.k_value);
                poison.push(0.0);
                bu0.push(b.bu0);
            }
        }
    }
    enr.sort_unstable();
    enr.dedup();
    ifba.sort_unstable();
    ifba.dedup();

    let p = power_map_from(&k, inst.layout.location_neighbors(), coeffs.nu, coeffs.reflector);
    let mean_k = k.iter().sum::<f64>() / n;
    let mean_poison = poison.iter().sum::<f64>() / n;
    let l_cy = coeffs.a_cy * (mean_k - 1.0).max(0.0);
    let f_dh = p.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let cb = coeffs.a_cb * (mean_k + mean_poison - 1.0) - coeffs.b_cb * mean_poison;
    let bu_max = bu0
        .iter()
        .zip(&p)
        .map(|(b, pi)| b + coeffs.delta_bu * pi * l_cy / 500.0)
        .fold(f64::NEG_INFINITY, f64::max);
    let lcoe = if l_cy > 0.0 {
        coeffs.a_cost * cost / (n * l_cy)
    } else {
        LCOE_SENTINEL
    };
    FomVector {
        l_cy,
        f_dh,
        f_q: coeffs.axial * f_dh,
        cb,
        bu_max,
        lcoe,
        n_enr: enr.len(),
        n_ifba: ifba.len(),
    }
}
