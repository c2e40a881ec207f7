//! Instance file format (TOML, `schema_version = 1`).
//!
//! ```toml
//! schema_version = 1
//! name = "89-eighth"
//!
//! [layout]
//! symmetry = "eighth"          # eighth | quarter | none
//! grid = ["....#######....", ...]   # '#' in core, '.' empty
//!
//! [catalog]
//! types = [{ enrichment = 4.0, ifba = 128, waba = 0 }, ...]
//!
//! [inventory]
//! n_fresh = 89
//! burned = [{ id = "o01", class = "once", k = 1.035, bu0 = 20.0, multiplicity = 8 }, ...]
//!
//! [tactics]
//! twice_at_periphery = true
//! no_fresh_at_periphery = true
//! fresh_ring = true
//! no_fresh_square = true
//!
//! [constraints]   # optional, defaults shown by `lpopt oracle --dump`
//! [surrogate]     # optional coefficient overrides
//!
//! [slots]         # optional explicit choice lists: "f<catalog index>" or a burned id
//! choices = [["f0", "f1"], ["f0", "b1"]]
//! ```

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::catalog::{BurnedAssembly, FuelType};
use super::instance::{Choice, ProblemInstance, Tactics};
use super::layout::{CoreLayout, Symmetry};
use crate::error::{Error, Result};
use crate::surrogate::ConstraintSection;
use crate::surrogate::SurrogateCoefficients;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    schema_version: u32,
    name: String,
    layout: LayoutSection,
    catalog: CatalogSection,
    inventory: InventorySection,
    #[serde(default)]
    tactics: Tactics,
    #[serde(default)]
    constraints: ConstraintSection,
    #[serde(default)]
    surrogate: SurrogateCoefficients,
    #[serde(default)]
    slots: Option<SlotsSection>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LayoutSection {
    symmetry: Symmetry,
    grid: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CatalogSection {
    types: Vec<FuelType>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InventorySection {
    n_fresh: usize,
    #[serde(default)]
    burned: Vec<BurnedAssembly>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SlotsSection {
    choices: Vec<Vec<String>>,
}

impl ProblemInstance {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: InstanceFile = toml::from_str(text)?;
        if file.schema_version != SCHEMA_VERSION {
            return Err(Error::Instance(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                file.schema_version
            )));
        }
        let layout = CoreLayout::from_ascii(&file.layout.grid, file.layout.symmetry)?;
        let choices = match file.slots {
            None => None,
            Some(s) => Some(
                s.choices
                    .iter()
                    .enumerate()
                    .map(|(k, list)| {
                        list.iter()
                            .map(|c| parse_choice(c, &file.inventory.burned, k))
                            .collect::<Result<Vec<_>>>()
                    })
                    .collect::<Result<Vec<_>>>()?,
            ),
        };
        ProblemInstance::new(
            file.name,
            layout,
            file.catalog.types,
            file.inventory.burned,
            file.inventory.n_fresh,
            file.tactics,
            file.constraints.into(),
            file.surrogate,
            choices,
        )
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_toml_string()?).map_err(|e| Error::io(path, e))
    }

    /// Serializes to the instance file format with one-line inline tables.
    pub fn to_toml_string(&self) -> Result<String> {
        let section = self
            .constraints
            .to_section()
            .ok_or_else(|| Error::Instance("constraint set has no file representation".into()))?;
        let mut s = String::new();
        let sym = match self.layout.symmetry() {
            Symmetry::Eighth => "eighth",
            Symmetry::Quarter => "quarter",
            Symmetry::None => "none",
        };
        let _ = writeln!(s, "schema_version = {SCHEMA_VERSION}");
        let _ = writeln!(s, "name = {}", quote(&self.name));
        let _ = writeln!(s, "\n[layout]\nsymmetry = \"{sym}\"\ngrid = [");
        for row in self.layout.ascii() {
            let _ = writeln!(s, "  \"{row}\",");
        }
        s.push_str("]\n\n[catalog]\ntypes = [\n");
        for t in &self.catalog {
            let _ = writeln!(
                s,
                "  {{ enrichment = {:?}, ifba = {}, waba = {} }},",
                t.enrichment, t.ifba, t.waba
            );
        }
        let _ = writeln!(s, "]\n\n[inventory]\nn_fresh = {}\nburned = [", self.n_fresh);
        for b in &self.burned {
            let class = match b.burn_class {
                super::BurnClass::Once => "once",
                super::BurnClass::Twice => "twice",
            };
            let _ = writeln!(
                s,
                "  {{ id = {}, class = \"{class}\", k = {:?}, bu0 = {:?}, multiplicity = {} }},",
                quote(&b.id),
                b.k_value,
                b.bu0,
                b.multiplicity
            );
        }
        s.push_str("]\n\n[tactics]\n");
        s.push_str(&toml::to_string(&self.tactics)?);
        s.push_str("\n[constraints]\n");
        s.push_str(&toml::to_string(&section)?);
        s.push_str("\n[surrogate]\n");
        s.push_str(&toml::to_string(&self.coefficients)?);
        if self.has_explicit_choices() {
            s.push_str("\n[slots]\nchoices = [\n");
            for list in self.slot_choices() {
                let items: Vec<String> = list
                    .iter()
                    .map(|c| match c {
                        Choice::Fresh(t) => quote(&format!("f{t}")),
                        Choice::Burned(b) => quote(&self.burned[*b].id),
                    })
                    .collect();
                let _ = writeln!(s, "  [{}],", items.join(", "));
            }
            s.push_str("]\n");
        }
        Ok(s)
    }
}

fn quote(s: &str) -> String {
    format!("{s:?}")
}

fn parse_choice(text: &str, burned: &[BurnedAssembly], slot: usize) -> Result<Choice> {
    if let Some(b) = burned.iter().position(|b| b.id == text) {
        return Ok(Choice::Burned(b));
    }
    text.strip_prefix('f')
        .and_then(|n| n.parse().ok())
        .map(Choice::Fresh)
        .ok_or_else(|| Error::Instance(format!("slot {slot}: unknown choice {text:?}")))
}
