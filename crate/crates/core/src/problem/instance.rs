use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::catalog::{BurnClass, BurnedAssembly, FuelType};
use super::layout::{CoreLayout, LocationClass};
use crate::error::{Error, Result};
use crate::eval::Bounds;
use crate::surrogate::{ConstraintSet, SurrogateCoefficients};

/// Expert tactics enforced by the decoder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Tactics {
    /// Twice-burned batches may only sit at the periphery.
    #[serde(default)]
    pub twice_at_periphery: bool,
    #[serde(default)]
    pub no_fresh_at_periphery: bool,
    /// The ring one cell inboard of the periphery holds fresh fuel only.
    #[serde(default)]
    pub fresh_ring: bool,
    #[serde(default)]
    pub no_fresh_square: bool,
}

impl Tactics {
    pub fn all() -> Self {
        Tactics {
            twice_at_periphery: true,
            no_fresh_at_periphery: true,
            fresh_ring: true,
            no_fresh_square: true,
        }
    }
}

/// What one slot entry can select.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Choice {
    /// Index into the instance catalog.
    Fresh(usize),
    /// Index into the burned inventory.
    Burned(usize),
}

/// Precomputed bookkeeping for the counting feasibility check.
///
/// Slots with identical choice sets share a signature; burned batches that
/// are accepted by the same signatures share a group. Feasibility of the
/// remaining placement only depends on the per-signature and per-group
/// counts.
#[derive(Debug, Clone)]
pub(crate) struct DecodeTables {
    pub slot_sig: Vec<usize>,
    pub sig_fresh: Vec<bool>,
    pub batch_group: Vec<usize>,
    /// `eligible[group][sig]`
    pub eligible: Vec<Vec<bool>>,
    pub sig_count: Vec<usize>,
    pub group_count: Vec<usize>,
    pub fresh_only: Vec<bool>,
    /// Slots of every in-core 2×2 block, empty unless the square tactic is on.
    pub block_slots: Vec<[usize; 4]>,
}

/// A loading-pattern problem: layout, fuel, inventory, tactics, and the
/// per-slot choice lists that define the decision space.
#[derive(Debug, Clone)]
pub struct ProblemInstance {
    pub name: String,
    pub layout: CoreLayout,
    pub catalog: Vec<FuelType>,
    pub burned: Vec<BurnedAssembly>,
    pub n_fresh: usize,
    pub tactics: Tactics,
    pub constraints: ConstraintSet,
    pub coefficients: SurrogateCoefficients,
    slot_choices: Vec<Vec<Choice>>,
    explicit_choices: bool,
    bounds: Vec<Bounds>,
    pub(crate) tables: DecodeTables,
}

impl ProblemInstance {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: impl Into<String>,
        layout: CoreLayout,
        catalog: Vec<FuelType>,
        burned: Vec<BurnedAssembly>,
        n_fresh: usize,
        tactics: Tactics,
        constraints: ConstraintSet,
        coefficients: SurrogateCoefficients,
        explicit_choices: Option<Vec<Vec<Choice>>>,
    ) -> Result<Self> {
        let name = name.into();
        validate_inventory(&layout, &catalog, &burned, n_fresh)?;
        coefficients.validate()?;
        constraints.validate()?;
        let explicit = explicit_choices.is_some();
        let slot_choices = match explicit_choices {
            Some(c) => c,
            None => derive_choices(&layout, &catalog, &burned, &tactics),
        };
        validate_choices(&layout, &catalog, &burned, &slot_choices)?;
        let tables = build_tables(&layout, &burned, &tactics, &slot_choices)?;
        let bounds = slot_choices
            .iter()
            .map(|c| Bounds::new(0, c.len() as i64 - 1))
            .collect();
        let inst = ProblemInstance {
            name,
            layout,
            catalog,
            burned,
            n_fresh,
            tactics,
            constraints,
            coefficients,
            slot_choices,
            explicit_choices: explicit,
            bounds,
            tables,
        };
        // a feasible completion must exist for the decoder to be total
        inst.decode(&vec![0; inst.n_slots()])
            .map_err(|e| Error::Instance(format!("{}: no feasible loading pattern ({e})", inst.name)))?;
        Ok(inst)
    }

    pub fn n_slots(&self) -> usize {
        self.slot_choices.len()
    }

    pub fn slot_choices(&self) -> &[Vec<Choice>] {
        &self.slot_choices
    }

    pub fn has_explicit_choices(&self) -> bool {
        self.explicit_choices
    }

    /// Per-slot decision bounds `[0, cardinality − 1]`.
    pub fn bounds(&self) -> &[Bounds] {
        &self.bounds
    }

    /// log10 of the raw decision-space size.
    pub fn log10_space(&self) -> f64 {
        self.slot_choices.iter().map(|c| (c.len() as f64).log10()).sum()
    }

    pub fn batch_index(&self, id: &str) -> Option<usize> {
        self.burned.iter().position(|b| b.id == id)
    }
}

fn validate_inventory(
    layout: &CoreLayout,
    catalog: &[FuelType],
    burned: &[BurnedAssembly],
    n_fresh: usize,
) -> Result<()> {
    if catalog.is_empty() {
        return Err(Error::Instance("empty catalog".into()));
    }
    let mut ids = std::collections::HashSet::new();
    for b in burned {
        if !ids.insert(b.id.as_str()) {
            return Err(Error::Instance(format!("duplicate burned id {}", b.id)));
        }
        if !(b.k_value > 0.0) || !(b.bu0 >= 0.0) || b.multiplicity == 0 {
            return Err(Error::Instance(format!("burned {} has invalid data", b.id)));
        }
    }
    let burned_total: usize = burned.iter().map(|b| b.multiplicity).sum();
    if burned_total + n_fresh != layout.n_locations() {
        return Err(Error::Instance(format!(
            "{burned_total} burned + {n_fresh} fresh != {} locations",
            layout.n_locations()
        )));
    }
    Ok(())
}

fn derive_choices(
    layout: &CoreLayout,
    catalog: &[FuelType],
    burned: &[BurnedAssembly],
    tactics: &Tactics,
) -> Vec<Vec<Choice>> {
    layout
        .slots()
        .iter()
        .map(|slot| {
            let periphery = slot.class == LocationClass::Periphery;
            let ring = slot.class == LocationClass::Ring;
            let mut list = Vec::new();
            if !(tactics.no_fresh_at_periphery && periphery) {
                list.extend((0..catalog.len()).map(Choice::Fresh));
            }
            if !(tactics.fresh_ring && ring) {
                list.extend(
                    burned
                        .iter()
                        .enumerate()
                        .filter(|(_, b)| b.multiplicity == slot.multiplicity())
                        .filter(|(_, b)| {
                            !(tactics.twice_at_periphery
                                && b.burn_class == BurnClass::Twice
                                && !periphery)
                        })
                        .map(|(i, _)| Choice::Burned(i)),
                );
            }
            list
        })
        .collect()
}

fn validate_choices(
    layout: &CoreLayout,
    catalog: &[FuelType],
    burned: &[BurnedAssembly],
    choices: &[Vec<Choice>],
) -> Result<()> {
    if choices.len() != layout.slots().len() {
        return Err(Error::Instance(format!(
            "{} choice lists for {} slots",
            choices.len(),
            layout.slots().len()
        )));
    }
    for (k, (list, slot)) in choices.iter().zip(layout.slots()).enumerate() {
        if list.is_empty() {
            return Err(Error::Instance(format!("slot {k} has no choices")));
        }
        for c in list {
            match *c {
                Choice::Fresh(t) if t >= catalog.len() => {
                    return Err(Error::Instance(format!("slot {k}: fresh type {t} out of range")))
                }
                Choice::Burned(b) if b >= burned.len() => {
                    return Err(Error::Instance(format!("slot {k}: burned index {b} out of range")))
                }
                Choice::Burned(b) if burned[b].multiplicity != slot.multiplicity() => {
                    return Err(Error::Instance(format!(
                        "slot {k}: batch {} has multiplicity {}, slot needs {}",
                        burned[b].id,
                        burned[b].multiplicity,
                        slot.multiplicity()
                    )))
                }
                _ => {}
            }
        }
    }
    Ok(())
}

fn build_tables(
    layout: &CoreLayout,
    burned: &[BurnedAssembly],
    tactics: &Tactics,
    choices: &[Vec<Choice>],
) -> Result<DecodeTables> {
    let mut sig_index: BTreeMap<(bool, Vec<usize>), usize> = BTreeMap::new();
    let mut slot_sig = Vec::with_capacity(choices.len());
    let mut sig_fresh = Vec::new();
    let mut sig_batches: Vec<Vec<usize>> = Vec::new();
    for list in choices {
        let fresh = list.iter().any(|c| matches!(c, Choice::Fresh(_)));
        let mut bs: Vec<usize> = list
            .iter()
            .filter_map(|c| match c {
                Choice::Burned(b) => Some(*b),
                _ => None,
            })
            .collect();
        bs.sort_unstable();
        bs.dedup();
        let next = sig_index.len();
        let id = *sig_index.entry((fresh, bs.clone())).or_insert_with(|| {
            sig_fresh.push(fresh);
            sig_batches.push(bs);
            next
        });
        slot_sig.push(id);
    }
    let n_sigs = sig_fresh.len();

    let mut group_index: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
    let mut batch_group = Vec::with_capacity(burned.len());
    let mut group_sigs: Vec<Vec<usize>> = Vec::new();
    for b in 0..burned.len() {
        let sigs: Vec<usize> = (0..n_sigs).filter(|&s| sig_batches[s].contains(&b)).collect();
        if sigs.is_empty() {
            return Err(Error::Instance(format!(
                "burned batch {} is not selectable in any slot",
                burned[b].id
            )));
        }
        let next = group_index.len();
        let id = *group_index.entry(sigs.clone()).or_insert_with(|| {
            group_sigs.push(sigs);
            next
        });
        batch_group.push(id);
    }
    let eligible = group_sigs
        .iter()
        .map(|sigs| (0..n_sigs).map(|s| sigs.contains(&s)).collect())
        .collect();
    let mut sig_count = vec![0; n_sigs];
    for &s in &slot_sig {
        sig_count[s] += 1;
    }
    let mut group_count = vec![0; group_sigs.len()];
    for &g in &batch_group {
        group_count[g] += 1;
    }
    let fresh_only: Vec<bool> = slot_sig.iter().map(|&s| sig_batches[s].is_empty()).collect();

    let mut block_slots = Vec::new();
    if tactics.no_fresh_square {
        for block in layout.blocks() {
            let slots = block.map(|c| layout.slot_of(c).expect("in-core"));
            if slots.iter().all(|&k| fresh_only[k]) {
                let (i, j) = layout.coords(block[0]);
                return Err(Error::Instance(format!(
                    "2x2 block at ({i}, {j}) only admits fresh fuel"
                )));
            }
            block_slots.push(slots);
        }
    }
    Ok(DecodeTables {
        slot_sig,
        sig_fresh,
        batch_group,
        eligible,
        sig_count,
        group_count,
        fresh_only,
        block_slots,
    })
}
