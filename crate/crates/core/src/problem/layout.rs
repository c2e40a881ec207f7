use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Mirror symmetry used to reduce the full core to the decision slots.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Symmetry {
    Eighth,
    Quarter,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LocationClass {
    Periphery,
    Ring,
    Interior,
    Center,
}

/// One decision slot: a representative cell of the reduced map and the
/// full-core cells it stands for.
#[derive(Debug, Clone, PartialEq)]
pub struct Slot {
    pub cell: usize,
    pub images: Vec<usize>,
    pub class: LocationClass,
}

impl Slot {
    pub fn multiplicity(&self) -> usize {
        self.images.len()
    }
}

const DIRS: [(isize, isize); 4] = [(-1, 0), (1, 0), (0, -1), (0, 1)];

/// Occupancy mask, location classes, adjacency and the reduced-map slots of
/// a core. Immutable once built.
#[derive(Debug, Clone)]
pub struct CoreLayout {
    rows: usize,
    cols: usize,
    mask: Vec<bool>,
    symmetry: Symmetry,
    classes: Vec<Option<LocationClass>>,
    neighbors: Vec<[Option<usize>; 4]>,
    slots: Vec<Slot>,
    cell_slot: Vec<Option<usize>>,
    locations: Vec<usize>,
    location_neighbors: Vec<[Option<usize>; 4]>,
}

impl CoreLayout {
    /// Builds a layout from ASCII rows where `#` marks an in-core location
    /// and `.` an empty one.
    pub fn from_ascii<S: AsRef<str>>(grid: &[S], symmetry: Symmetry) -> Result<Self> {
        let rows = grid.len();
        if rows == 0 {
            return Err(Error::Instance("empty grid".into()));
        }
        let cols = grid[0].as_ref().chars().count();
        let mut mask = Vec::with_capacity(rows * cols);
        for (i, line) in grid.iter().enumerate() {
            let line = line.as_ref();
            if line.chars().count() != cols {
                return Err(Error::Instance(format!("grid row {i} has wrong width")));
            }
            for ch in line.chars() {
                match ch {
                    '#' => mask.push(true),
                    '.' => mask.push(false),
                    other => {
                        return Err(Error::Instance(format!(
                            "grid row {i}: unexpected character {other:?}"
                        )))
                    }
                }
            }
        }
        Self::from_mask(rows, cols, mask, symmetry)
    }

    pub fn from_mask(rows: usize, cols: usize, mask: Vec<bool>, symmetry: Symmetry) -> Result<Self> {
        if mask.len() != rows * cols {
            return Err(Error::Instance("mask size mismatch".into()));
        }
        if symmetry == Symmetry::Eighth && rows != cols {
            return Err(Error::Instance("eighth symmetry needs a square grid".into()));
        }
        let mut layout = CoreLayout {
            rows,
            cols,
            mask,
            symmetry,
            classes: Vec::new(),
            neighbors: Vec::new(),
            slots: Vec::new(),
            cell_slot: Vec::new(),
            locations: Vec::new(),
            location_neighbors: Vec::new(),
        };
        for cell in 0..rows * cols {
            if layout.mask[cell] && layout.images(cell).iter().any(|&c| !layout.mask[c]) {
                let (i, j) = layout.coords(cell);
                return Err(Error::Instance(format!(
                    "grid is not {symmetry:?}-symmetric at ({i}, {j})"
                )));
            }
        }
        if !layout.mask.iter().any(|&m| m) {
            return Err(Error::Instance("grid has no in-core location".into()));
        }
        layout.build_adjacency();
        layout.build_locations();
        layout.build_classes();
        layout.build_slots();
        Ok(layout)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn symmetry(&self) -> Symmetry {
        self.symmetry
    }

    pub fn cell(&self, i: usize, j: usize) -> usize {
        i * self.cols + j
    }

    pub fn coords(&self, cell: usize) -> (usize, usize) {
        (cell / self.cols, cell % self.cols)
    }

    pub fn in_core(&self, cell: usize) -> bool {
        self.mask[cell]
    }

    pub fn n_cells(&self) -> usize {
        self.rows * self.cols
    }

    /// Number of in-core locations.
    pub fn n_locations(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    pub fn class(&self, cell: usize) -> Option<LocationClass> {
        self.classes[cell]
    }

    /// 4-neighbors of an in-core cell; `None` marks an out-of-core side.
    pub fn neighbors(&self, cell: usize) -> &[Option<usize>; 4] {
        &self.neighbors[cell]
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    pub fn slot_of(&self, cell: usize) -> Option<usize> {
        self.cell_slot[cell]
    }

    pub fn in_core_cells(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n_cells()).filter(move |&c| self.mask[c])
    }

    /// In-core cells in row-major order. Location `i` of a dense per-location
    /// vector is cell `locations()[i]`.
    pub fn locations(&self) -> &[usize] {
        &self.locations
    }

    /// 4-neighbors per location, as location indices.
    pub fn location_neighbors(&self) -> &[[Option<usize>; 4]] {
        &self.location_neighbors
    }

    /// Mask rows as ASCII.
    pub fn ascii(&self) -> Vec<String> {
        (0..self.rows)
            .map(|i| {
                (0..self.cols)
                    .map(|j| if self.mask[self.cell(i, j)] { '#' } else { '.' })
                    .collect()
            })
            .collect()
    }

    /// Every in-core 2×2 block, as four cells (top-left first).
    pub fn blocks(&self) -> Vec<[usize; 4]> {
        let mut out = Vec::new();
        for i in 0..self.rows.saturating_sub(1) {
            for j in 0..self.cols.saturating_sub(1) {
                let b = [
                    self.cell(i, j),
                    self.cell(i, j + 1),
                    self.cell(i + 1, j),
                    self.cell(i + 1, j + 1),
                ];
                if b.iter().all(|&c| self.mask[c]) {
                    out.push(b);
                }
            }
        }
        out
    }

    /// Symmetry orbit of a cell, the cell itself first, duplicates removed.
    pub fn images(&self, cell: usize) -> Vec<usize> {
        let (i, j) = self.coords(cell);
        let (ri, rj) = (self.rows - 1 - i, self.cols - 1 - j);
        let mut pts = vec![(i, j)];
        match self.symmetry {
            Symmetry::None => {}
            Symmetry::Quarter => pts.extend([(ri, j), (i, rj), (ri, rj)]),
            Symmetry::Eighth => {
                pts.extend([(ri, j), (i, rj), (ri, rj)]);
                pts.extend([(j, i), (rj, i), (j, ri), (rj, ri)]);
            }
        }
        let mut out: Vec<usize> = Vec::with_capacity(pts.len());
        for (a, b) in pts {
            let c = self.cell(a, b);
            if !out.contains(&c) {
                out.push(c);
            }
        }
        out
    }

    fn in_reduced_region(&self, cell: usize) -> bool {
        let (i, j) = self.coords(cell);
        let (r0, c0) = (self.rows / 2, self.cols / 2);
        match self.symmetry {
            Symmetry::None => true,
            Symmetry::Quarter => i >= r0 && j >= c0,
            Symmetry::Eighth => i >= r0 && j >= c0 && j <= i,
        }
    }

    fn build_adjacency(&mut self) {
        let (rows, cols) = (self.rows as isize, self.cols as isize);
        self.neighbors = (0..self.n_cells())
            .map(|cell| {
                let (i, j) = self.coords(cell);
                let mut out = [None; 4];
                for (slot, (di, dj)) in DIRS.iter().enumerate() {
                    let (a, b) = (i as isize + di, j as isize + dj);
                    if a >= 0 && b >= 0 && a < rows && b < cols {
                        let n = self.cell(a as usize, b as usize);
                        if self.mask[n] {
                            out[slot] = Some(n);
                        }
                    }
                }
                out
            })
            .collect();
    }

    fn build_locations(&mut self) {
        self.locations = self.in_core_cells().collect();
        let mut index = vec![usize::MAX; self.n_cells()];
        for (i, &c) in self.locations.iter().enumerate() {
            index[c] = i;
        }
        self.location_neighbors = self
            .locations
            .iter()
            .map(|&c| self.neighbors[c].map(|n| n.map(|m| index[m])))
            .collect();
    }

    fn build_classes(&mut self) {
        let n = self.n_cells();
        let periphery: Vec<bool> = (0..n)
            .map(|c| self.mask[c] && self.neighbors[c].iter().any(Option::is_none))
            .collect();
        let center = (self.rows % 2 == 1 && self.cols % 2 == 1)
            .then(|| self.cell(self.rows / 2, self.cols / 2));
        self.classes = (0..n)
            .map(|c| {
                if !self.mask[c] {
                    None
                } else if periphery[c] {
                    Some(LocationClass::Periphery)
                } else if self.neighbors[c].iter().flatten().any(|&m| periphery[m]) {
                    Some(LocationClass::Ring)
                } else if Some(c) == center {
                    Some(LocationClass::Center)
                } else {
                    Some(LocationClass::Interior)
                }
            })
            .collect();
    }

    fn build_slots(&mut self) {
        let mut slots: Vec<Slot> = self
            .in_core_cells()
            .filter(|&c| self.in_reduced_region(c))
            .map(|c| Slot {
                cell: c,
                images: self.images(c),
                class: self.classes[c].expect("in-core"),
            })
            .collect();
        // row-major over the reduced map, periphery last; sort is stable
        slots.sort_by_key(|s| s.class == LocationClass::Periphery);
        let mut cell_slot = vec![None; self.n_cells()];
        for (k, s) in slots.iter().enumerate() {
            for &c in &s.images {
                cell_slot[c] = Some(k);
            }
        }
        self.slots = slots;
        self.cell_slot = cell_slot;
    }
}

/// The 193-location four-loop PWR core on a 15×15 grid.
pub fn pwr193_ascii() -> Vec<String> {
    const WIDTHS: [usize; 15] = [7, 11, 13, 13, 15, 15, 15, 15, 15, 15, 15, 13, 13, 11, 7];
    WIDTHS
        .iter()
        .map(|&w| {
            let pad = (15 - w) / 2;
            format!("{}{}{}", ".".repeat(pad), "#".repeat(w), ".".repeat(pad))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pwr193_counts() {
        let l = CoreLayout::from_ascii(&pwr193_ascii(), Symmetry::Eighth).unwrap();
        assert_eq!(l.n_locations(), 193);
        let count = |cls| l.in_core_cells().filter(|&c| l.class(c) == Some(cls)).count();
        assert_eq!(count(LocationClass::Periphery), 44);
        assert_eq!(count(LocationClass::Ring), 40);
        assert_eq!(count(LocationClass::Center), 1);
        let total: usize = l.slots().iter().map(Slot::multiplicity).sum();
        assert_eq!(total, 193);
    }

    #[test]
    fn every_cell_in_exactly_one_slot() {
        for sym in [Symmetry::Eighth, Symmetry::Quarter, Symmetry::None] {
            let l = CoreLayout::from_ascii(&pwr193_ascii(), sym).unwrap();
            let mut seen = vec![0usize; l.n_cells()];
            for s in l.slots() {
                for &c in &s.images {
                    seen[c] += 1;
                }
            }
            for c in 0..l.n_cells() {
                assert_eq!(seen[c], usize::from(l.in_core(c)), "{sym:?} cell {c}");
            }
        }
    }

    #[test]
    fn slot_counts_per_symmetry() {
        let n = |sym| CoreLayout::from_ascii(&pwr193_ascii(), sym).unwrap().slots().len();
        assert_eq!(n(Symmetry::Eighth), 31);
        assert_eq!(n(Symmetry::Quarter), 56);
        assert_eq!(n(Symmetry::None), 193);
    }

    #[test]
    fn periphery_slots_come_last() {
        let l = CoreLayout::from_ascii(&pwr193_ascii(), Symmetry::Quarter).unwrap();
        let first_p = l
            .slots()
            .iter()
            .position(|s| s.class == LocationClass::Periphery)
            .unwrap();
        assert!(l.slots()[first_p..]
            .iter()
            .all(|s| s.class == LocationClass::Periphery));
        for part in [&l.slots()[..first_p], &l.slots()[first_p..]] {
            assert!(part.windows(2).all(|w| w[0].cell < w[1].cell));
        }
    }

    #[test]
    fn in_core_cells_have_neighbors() {
        let l = CoreLayout::from_ascii(&pwr193_ascii(), Symmetry::None).unwrap();
        for c in l.in_core_cells() {
            let k = l.neighbors(c).iter().flatten().count();
            assert!((1..=4).contains(&k));
            if l.class(c) == Some(LocationClass::Periphery) {
                assert!(k < 4);
            }
        }
    }

    #[test]
    fn asymmetric_mask_rejected() {
        let grid = ["##.", "###", "###"];
        assert!(CoreLayout::from_ascii(&grid, Symmetry::Quarter).is_err());
        assert!(CoreLayout::from_ascii(&grid, Symmetry::None).is_ok());
    }
}
