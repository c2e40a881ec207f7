use serde::{Deserialize, Serialize};

pub const ENRICHMENTS: [f64; 6] = [4.00, 4.20, 4.40, 4.60, 4.80, 4.95];
pub const IFBA_RODS: [u32; 2] = [128, 156];
pub const WABA_PADS: [u32; 3] = [0, 12, 24];

/// A fresh assembly design.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FuelType {
    /// U-235 weight percent.
    pub enrichment: f64,
    pub ifba: u32,
    pub waba: u32,
}

impl FuelType {
    pub fn new(enrichment: f64, ifba: u32, waba: u32) -> Self {
        FuelType {
            enrichment,
            ifba,
            waba,
        }
    }

    /// Whether every field is one of the catalog's discrete levels.
    pub fn is_catalog_level(&self) -> bool {
        ENRICHMENTS.iter().any(|e| (e - self.enrichment).abs() < 1e-9)
            && IFBA_RODS.contains(&self.ifba)
            && WABA_PADS.contains(&self.waba)
    }
}

/// The 24 usable fresh designs: the 6×2×3 cross product without the twelve
/// combinations that pair 156 IFBA rods with any WABA. Enrichment-major,
/// then IFBA, then WABA.
pub fn build_catalog() -> Vec<FuelType> {
    let mut out = Vec::with_capacity(24);
    for &e in &ENRICHMENTS {
        for &ifba in &IFBA_RODS {
            for &waba in &WABA_PADS {
                if ifba == 156 && waba > 0 {
                    continue;
                }
                out.push(FuelType::new(e, ifba, waba));
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BurnClass {
    Once,
    Twice,
}

/// A batch of `multiplicity` identical burned assemblies that move together
/// under the core symmetry. Each copy is a distinct assembly of the full
/// core.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BurnedAssembly {
    pub id: String,
    #[serde(rename = "class")]
    pub burn_class: BurnClass,
    #[serde(rename = "k")]
    pub k_value: f64,
    pub bu0: f64,
    pub multiplicity: usize,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_has_24_types() {
        assert_eq!(build_catalog().len(), 24);
    }

    #[test]
    fn catalog_membership() {
        let cat = build_catalog();
        assert_eq!(cat[0], FuelType::new(4.00, 128, 0));
        assert!(!cat.contains(&FuelType::new(4.00, 156, 24)));
        assert!(cat.iter().all(FuelType::is_catalog_level));
        assert!(cat.iter().all(|t| !(t.ifba == 156 && t.waba > 0)));
    }

    #[test]
    fn catalog_order_is_enrichment_major() {
        let cat = build_catalog();
        for w in cat.windows(2) {
            let a = (w[0].enrichment, w[0].ifba, w[0].waba);
            let b = (w[1].enrichment, w[1].ifba, w[1].waba);
            assert!(a < b, "{a:?} !< {b:?}");
        }
    }
}
