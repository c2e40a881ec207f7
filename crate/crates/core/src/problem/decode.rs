use super::instance::{Choice, DecodeTables, ProblemInstance};
use super::layout::CoreLayout;
use crate::error::{Error, Result};

/// Content of one full-core location.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Assignment {
    /// Catalog index of a fresh assembly.
    Fresh(usize),
    /// Copy `image` of burned batch `batch`.
    Burned { batch: usize, image: usize },
}

impl Assignment {
    pub fn is_fresh(&self) -> bool {
        matches!(self, Assignment::Fresh(_))
    }
}

/// A full core map. Out-of-core cells hold `None`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CoreMap {
    pub rows: usize,
    pub cols: usize,
    pub cells: Vec<Option<Assignment>>,
}

impl CoreMap {
    pub fn get(&self, cell: usize) -> Option<Assignment> {
        self.cells[cell]
    }

    pub fn fresh_count(&self) -> usize {
        self.cells.iter().flatten().filter(|a| a.is_fresh()).count()
    }

    /// Expands one choice per reduced slot to the full core by mirror
    /// reflection.
    pub fn expand(reduced: &[Choice], layout: &CoreLayout) -> CoreMap {
        assert_eq!(reduced.len(), layout.slots().len(), "one choice per slot");
        let mut cells = vec![None; layout.n_cells()];
        for (slot, choice) in layout.slots().iter().zip(reduced) {
            for (image, &c) in slot.images.iter().enumerate() {
                cells[c] = Some(match *choice {
                    Choice::Fresh(t) => Assignment::Fresh(t),
                    Choice::Burned(batch) => Assignment::Burned { batch, image },
                });
            }
        }
        CoreMap {
            rows: layout.rows(),
            cols: layout.cols(),
            cells,
        }
    }

    /// Reads the reduced map back from the slot representatives.
    pub fn restrict(&self, layout: &CoreLayout) -> Vec<Choice> {
        layout
            .slots()
            .iter()
            .map(|s| match self.cells[s.cell].expect("slot cell is in core") {
                Assignment::Fresh(t) => Choice::Fresh(t),
                Assignment::Burned { batch, .. } => Choice::Burned(batch),
            })
            .collect()
    }
}

/// Repair statistics of one decode.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DecodeTrace {
    /// Slots whose selected choice was replaced.
    pub repairs: usize,
    /// Slots revisited after a dead end.
    pub backtracks: usize,
}

struct State<'a> {
    tables: &'a DecodeTables,
    assign: Vec<Option<Choice>>,
    used: Vec<bool>,
    rem_sig: Vec<usize>,
    rem_group: Vec<usize>,
}

impl<'a> State<'a> {
    fn new(inst: &'a ProblemInstance) -> Self {
        let tables = &inst.tables;
        State {
            tables,
            assign: vec![None; inst.n_slots()],
            used: vec![false; inst.burned.len()],
            rem_sig: tables.sig_count.clone(),
            rem_group: tables.group_count.clone(),
        }
    }

    fn admissible(&mut self, k: usize, choice: Choice) -> bool {
        if let Choice::Burned(b) = choice {
            if self.used[b] {
                return false;
            }
        }
        self.place(k, choice);
        let ok = match self.block_demand() {
            Some(demand) => counts_feasible(self.tables, &self.rem_sig, &self.rem_group, &demand),
            None => false,
        };
        self.unplace(k);
        ok
    }

    /// Burned fuel still owed to 2×2 blocks that have no burned cell yet.
    ///
    /// Open slots are unassigned slots that may still go either way. Blocks
    /// sharing no open slot are packed greedily, fewest open slots first;
    /// each packed block needs a batch in one of its own open slots. The
    /// result counts packed blocks by the set of signatures of their open
    /// slots. `None` when some block can no longer get a burned cell.
    fn block_demand(&self) -> Option<Vec<(Vec<usize>, usize)>> {
        let t = self.tables;
        if t.block_slots.is_empty() {
            return Some(Vec::new());
        }
        // signatures no remaining batch can go to are fresh from here on
        let no_batch: Vec<bool> = (0..t.sig_fresh.len())
            .map(|s| !(0..t.group_count.len()).any(|g| t.eligible[g][s] && self.rem_group[g] > 0))
            .collect();
        let mut pending: Vec<([usize; 4], usize)> = Vec::with_capacity(t.block_slots.len());
        'blocks: for block in &t.block_slots {
            let mut open = [0usize; 4];
            let mut n_open = 0;
            for &k in block {
                let sig = t.slot_sig[k];
                match self.assign[k] {
                    Some(Choice::Burned(_)) => continue 'blocks,
                    Some(Choice::Fresh(_)) => {}
                    None if !t.sig_fresh[sig] => continue 'blocks,
                    None if t.fresh_only[k] || no_batch[sig] => {}
                    None => {
                        if !open[..n_open].contains(&k) {
                            open[n_open] = k;
                            n_open += 1;
                        }
                    }
                }
            }
            if n_open == 0 {
                return None;
            }
            pending.push((open, n_open));
        }
        pending.sort_by_key(|&(_, n)| n);
        let mut taken = vec![false; self.assign.len()];
        let mut demand: Vec<(Vec<usize>, usize)> = Vec::new();
        for (open, n_open) in pending {
            let open = &open[..n_open];
            if open.iter().any(|&k| taken[k]) {
                continue;
            }
            let mut sigs: Vec<usize> = open.iter().map(|&k| t.slot_sig[k]).collect();
            for &k in open {
                taken[k] = true;
            }
            sigs.sort_unstable();
            sigs.dedup();
            match demand.iter_mut().find(|(s, _)| *s == sigs) {
                Some((_, n)) => *n += 1,
                None => demand.push((sigs, 1)),
            }
        }
        Some(demand)
    }

    fn place(&mut self, k: usize, choice: Choice) {
        self.rem_sig[self.tables.slot_sig[k]] -= 1;
        if let Choice::Burned(b) = choice {
            self.used[b] = true;
            self.rem_group[self.tables.batch_group[b]] -= 1;
        }
        self.assign[k] = Some(choice);
    }

    fn unplace(&mut self, k: usize) {
        let choice = self.assign[k].take().expect("placed");
        self.rem_sig[self.tables.slot_sig[k]] += 1;
        if let Choice::Burned(b) = choice {
            self.used[b] = false;
            self.rem_group[self.tables.batch_group[b]] += 1;
        }
    }
}

/// Whether every remaining batch can still be placed while every
/// burned-only slot and every packed block (see `block_demand`) still gets
/// a batch.
///
/// Both are bipartite matching conditions on the aggregated counts; by the
/// Mendelsohn–Dulmage theorem a matching that satisfies both exists as soon
/// as each one is satisfiable on its own.
fn counts_feasible(
    t: &DecodeTables,
    rem_sig: &[usize],
    rem_group: &[usize],
    blocks: &[(Vec<usize>, usize)],
) -> bool {
    let batches: usize = rem_group.iter().sum();
    let burned_only: usize = (0..rem_sig.len())
        .filter(|&s| !t.sig_fresh[s])
        .map(|s| rem_sig[s])
        .sum();
    let block_total: usize = blocks.iter().map(|(_, n)| n).sum();
    let needed = burned_only + block_total;
    if batches == 0 {
        return needed == 0;
    }
    let (ng, ns) = (rem_group.len(), rem_sig.len());
    let big = usize::MAX / 4;

    // source, groups, signatures, sink
    let n = ng + ns + 2;
    let sink = n - 1;
    let mut cap = vec![0usize; n * n];
    for g in 0..ng {
        cap[1 + g] = rem_group[g];
        for s in 0..ns {
            if t.eligible[g][s] {
                cap[(1 + g) * n + 1 + ng + s] = big;
            }
        }
    }
    for s in 0..ns {
        cap[(1 + ng + s) * n + sink] = rem_sig[s];
    }
    if max_flow(&mut cap, n, 0, sink) < batches {
        return false;
    }
    if needed == 0 {
        return true;
    }

    // source, block classes, signatures in, signatures out, groups, sink
    let nb = blocks.len();
    let sig_in = 1 + nb;
    let sig_out = sig_in + ns;
    let grp = sig_out + ns;
    let n = grp + ng + 1;
    let sink = n - 1;
    let mut cap = vec![0usize; n * n];
    for (b, (sigs, count)) in blocks.iter().enumerate() {
        cap[1 + b] = *count;
        for &s in sigs {
            cap[(1 + b) * n + sig_in + s] = big;
        }
    }
    for s in 0..ns {
        if !t.sig_fresh[s] {
            cap[sig_in + s] = rem_sig[s];
        }
        cap[(sig_in + s) * n + sig_out + s] = rem_sig[s];
        for g in 0..ng {
            if t.eligible[g][s] {
                cap[(sig_out + s) * n + grp + g] = big;
            }
        }
    }
    for g in 0..ng {
        cap[(grp + g) * n + sink] = rem_group[g];
    }
    max_flow(&mut cap, n, 0, sink) >= needed
}

/// Edmonds–Karp on a dense row-major `n × n` capacity matrix (consumed).
fn max_flow(cap: &mut [usize], n: usize, source: usize, sink: usize) -> usize {
    let mut flow = 0;
    let mut parent = vec![usize::MAX; n];
    let mut queue = std::collections::VecDeque::with_capacity(n);
    loop {
        parent.iter_mut().for_each(|p| *p = usize::MAX);
        parent[source] = source;
        queue.clear();
        queue.push_back(source);
        while let Some(u) = queue.pop_front() {
            if u == sink {
                break;
            }
            for v in 0..n {
                if parent[v] == usize::MAX && cap[u * n + v] > 0 {
                    parent[v] = u;
                    queue.push_back(v);
                }
            }
        }
        if parent[sink] == usize::MAX {
            return flow;
        }
        let mut push = usize::MAX;
        let mut v = sink;
        while v != source {
            let u = parent[v];
            push = push.min(cap[u * n + v]);
            v = u;
        }
        let mut v = sink;
        while v != source {
            let u = parent[v];
            cap[u * n + v] -= push;
            cap[v * n + u] += push;
            v = u;
        }
        flow += push;
    }
}

impl ProblemInstance {
    /// Checks length and per-slot range of a decision vector.
    pub fn check_vector(&self, v: &[i64]) -> Result<()> {
        if v.len() != self.n_slots() {
            return Err(Error::VectorLength {
                expected: self.n_slots(),
                got: v.len(),
            });
        }
        for (k, (&x, b)) in v.iter().zip(self.bounds()).enumerate() {
            if !b.contains(x) {
                return Err(Error::InvalidVector {
                    slot: k,
                    reason: format!("entry {x} outside [{}, {}]", b.lo, b.hi),
                });
            }
        }
        Ok(())
    }

    /// Decodes a decision vector into a full core map.
    ///
    /// Slots are visited in layout order. Each slot takes the choice at its
    /// entry if that batch is still unused, keeps the remaining inventory
    /// placeable, and (with the square tactic) closes no all-fresh 2×2
    /// block; otherwise the choice list is scanned cyclically from the
    /// entry for the first choice that does. When no choice fits, the
    /// previous slot advances to its next admissible choice.
    pub fn decode(&self, v: &[i64]) -> Result<CoreMap> {
        self.decode_traced(v).map(|(m, _)| m)
    }

    pub fn decode_traced(&self, v: &[i64]) -> Result<(CoreMap, DecodeTrace)> {
        self.check_vector(v)?;
        let n = self.n_slots();
        let mut st = State::new(self);
        let mut offset = vec![0usize; n];
        let mut trace = DecodeTrace::default();
        let mut k = 0;
        while k < n {
            let list = &self.slot_choices()[k];
            let start = v[k] as usize;
            let mut placed = false;
            while offset[k] < list.len() {
                let choice = list[(start + offset[k]) % list.len()];
                if st.admissible(k, choice) {
                    st.place(k, choice);
                    placed = true;
                    break;
                }
                offset[k] += 1;
            }
            if placed {
                k += 1;
                if k < n {
                    offset[k] = 0;
                }
            } else {
                if k == 0 {
                    return Err(Error::Infeasible);
                }
                trace.backtracks += 1;
                offset[k] = 0;
                k -= 1;
                st.unplace(k);
                offset[k] += 1;
            }
        }
        trace.repairs = offset.iter().filter(|&&o| o > 0).count();
        let reduced: Vec<Choice> = st.assign.into_iter().map(|c| c.expect("all placed")).collect();
        Ok((CoreMap::expand(&reduced, &self.layout), trace))
    }
}
