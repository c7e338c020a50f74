//! Cells, maps, plans, and per-district tallies.
//!
//! A map is a connected graph of cells, each carrying a positive
//! population split between two parties. Grid maps use 4-neighborhood
//! adjacency over occupied coordinates (cells touching only at a corner
//! are not adjacent); planar maps take an explicit edge list. Every map
//! fixes the required district count `kappa`.

use std::collections::HashMap;
use std::fmt;
use thiserror::Error;

/// Internal cell index, dense in `0..map.cell_count()`.
pub type CellIx = u32;

/// Hard cap on total map population so that signed aggregates fit in
/// `i64`/f64-safe JSON numbers with room to spare.
pub const MAX_TOTAL_POP: u64 = 1 << 56;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("duplicate cell `{0}`")]
    DuplicateCell(String),
    #[error("cell `{0}` lies outside the {1}x{2} grid")]
    OutOfBounds(String, u32, u32),
    #[error("map cells do not form one connected region")]
    DisconnectedMap,
    #[error("cell `{0}` has invalid counts (pop {1}, party_a {2})")]
    InvalidCounts(String, u64, u64),
    #[error("total population exceeds the supported maximum")]
    PopulationOverflow,
    #[error("kappa must satisfy 1 < kappa < cell count; got kappa {0} with {1} cells")]
    KappaOutOfRange(u32, usize),
    #[error("self-loop on cell `{0}`")]
    SelfLoop(String),
    #[error("duplicate edge between `{0}` and `{1}`")]
    DuplicateEdge(String, String),
    #[error("edge references unknown cell `{0}`")]
    UnknownCell(String),
    #[error("map has no cells")]
    EmptyMap,
    #[error("plan does not cover every cell exactly once")]
    PartialPlan,
    #[error("district {0} is empty")]
    EmptyDistrict(u32),
    #[error("district index {0} out of range 1..={1}")]
    DistrictOutOfRange(u32, u32),
}

/// One of the two parties.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Party {
    A,
    B,
}

impl fmt::Display for Party {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Party::A => write!(f, "A"),
            Party::B => write!(f, "B"),
        }
    }
}

/// Per-cell counts. `party_b` is always derived as `pop - party_a`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CellData {
    pub pop: u64,
    pub party_a: u64,
}

impl CellData {
    pub fn party_b(&self) -> u64 {
        self.pop - self.party_a
    }
}

/// Map topology. Grid maps keep their occupied coordinates for
/// perimeter-based metrics; planar maps have no geometry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Topology {
    Grid {
        rows: u32,
        cols: u32,
        coords: Vec<(u32, u32)>,
    },
    Planar,
}

/// An immutable map instance: cells, adjacency, topology, and the
/// required district count.
#[derive(Debug, Clone)]
pub struct MapInstance {
    cells: Vec<CellData>,
    ids: Vec<String>,
    id_index: HashMap<String, CellIx>,
    adjacency: Vec<Vec<CellIx>>,
    topology: Topology,
    kappa: u32,
    scale: u64,
    /// True when a planar edge list violates the Euler bound
    /// |E| <= 3|V| - 6 (the graph is certainly nonplanar).
    nonplanar_warning: bool,
}

/// A total assignment of cells to districts `0..kappa` (0-based
/// internally; serialized forms are 1-based).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Plan {
    pub assignment: Vec<u16>,
}

/// Tallies for one district under a fixed tie preference.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DistrictStats {
    pub pop: u64,
    pub party_a: u64,
    pub party_b: u64,
    pub winner: Party,
    pub wasted_a_x2: u64,
    pub wasted_b_x2: u64,
}

fn check_counts(id: &str, pop: u64, party_a: u64) -> Result<(), ModelError> {
    if pop == 0 || party_a > pop {
        return Err(ModelError::InvalidCounts(id.to_string(), pop, party_a));
    }
    Ok(())
}

fn connected_all(adjacency: &[Vec<CellIx>]) -> bool {
    if adjacency.is_empty() {
        return false;
    }
    let mut seen = vec![false; adjacency.len()];
    let mut stack = vec![0 as CellIx];
    seen[0] = true;
    let mut count = 1usize;
    while let Some(u) = stack.pop() {
        for &v in &adjacency[u as usize] {
            if !seen[v as usize] {
                seen[v as usize] = true;
                count += 1;
                stack.push(v);
            }
        }
    }
    count == adjacency.len()
}

/// Builds a grid map from occupied coordinates. Adjacency is the
/// 4-neighborhood restricted to occupied cells; the occupied region must
/// be connected. Cell ids are `"row,col"`.
pub fn build_grid_map(
    rows: u32,
    cols: u32,
    cells: &[(u32, u32, u64, u64)],
    kappa: u32,
) -> Result<MapInstance, ModelError> {
    if cells.is_empty() {
        return Err(ModelError::EmptyMap);
    }
    let mut coord_index: HashMap<(u32, u32), CellIx> = HashMap::new();
    let mut data = Vec::with_capacity(cells.len());
    let mut ids = Vec::with_capacity(cells.len());
    let mut coords = Vec::with_capacity(cells.len());
    let mut total: u128 = 0;
    for (i, &(r, c, pop, party_a)) in cells.iter().enumerate() {
        let id = format!("{r},{c}");
        if r >= rows || c >= cols {
            return Err(ModelError::OutOfBounds(id, rows, cols));
        }
        if coord_index.insert((r, c), i as CellIx).is_some() {
            return Err(ModelError::DuplicateCell(id));
        }
        check_counts(&id, pop, party_a)?;
        total += u128::from(pop);
        data.push(CellData { pop, party_a });
        ids.push(id);
        coords.push((r, c));
    }
    if total > u128::from(MAX_TOTAL_POP) {
        return Err(ModelError::PopulationOverflow);
    }
    let mut adjacency = vec![Vec::new(); data.len()];
    for (&(r, c), &ix) in &coord_index {
        let mut push = |rr: u32, cc: u32| {
            if let Some(&other) = coord_index.get(&(rr, cc)) {
                adjacency[ix as usize].push(other);
            }
        };
        if r > 0 {
            push(r - 1, c);
        }
        push(r + 1, c);
        if c > 0 {
            push(r, c - 1);
        }
        push(r, c + 1);
    }
    for neigh in &mut adjacency {
        neigh.sort_unstable();
    }
    if !connected_all(&adjacency) {
        return Err(ModelError::DisconnectedMap);
    }
    let n = data.len();
    if kappa < 2 || (kappa as usize) >= n {
        return Err(ModelError::KappaOutOfRange(kappa, n));
    }
    let id_index = ids
        .iter()
        .enumerate()
        .map(|(i, id)| (id.clone(), i as CellIx))
        .collect();
    Ok(MapInstance {
        cells: data,
        ids,
        id_index,
        adjacency,
        topology: Topology::Grid { rows, cols, coords },
        kappa,
        scale: 1,
        nonplanar_warning: false,
    })
}

/// Builds a planar-topology map from an explicit simple edge list. The
/// graph must be connected; the Euler bound |E| <= 3|V| - 6 is checked
/// as a nonplanarity warning only.
pub fn build_planar_map(
    cells: &[(String, u64, u64)],
    edges: &[(String, String)],
    kappa: u32,
) -> Result<MapInstance, ModelError> {
    if cells.is_empty() {
        return Err(ModelError::EmptyMap);
    }
    let mut id_index: HashMap<String, CellIx> = HashMap::new();
    let mut data = Vec::with_capacity(cells.len());
    let mut ids = Vec::with_capacity(cells.len());
    let mut total: u128 = 0;
    for (i, (id, pop, party_a)) in cells.iter().enumerate() {
        if id_index.insert(id.clone(), i as CellIx).is_some() {
            return Err(ModelError::DuplicateCell(id.clone()));
        }
        check_counts(id, *pop, *party_a)?;
        total += u128::from(*pop);
        data.push(CellData {
            pop: *pop,
            party_a: *party_a,
        });
        ids.push(id.clone());
    }
    if total > u128::from(MAX_TOTAL_POP) {
        return Err(ModelError::PopulationOverflow);
    }
    let mut adjacency = vec![Vec::new(); data.len()];
    let mut seen_edges = std::collections::HashSet::new();
    for (a, b) in edges {
        let &ia = id_index
            .get(a)
            .ok_or_else(|| ModelError::UnknownCell(a.clone()))?;
        let &ib = id_index
            .get(b)
            .ok_or_else(|| ModelError::UnknownCell(b.clone()))?;
        if ia == ib {
            return Err(ModelError::SelfLoop(a.clone()));
        }
        let key = (ia.min(ib), ia.max(ib));
        if !seen_edges.insert(key) {
            return Err(ModelError::DuplicateEdge(a.clone(), b.clone()));
        }
        adjacency[ia as usize].push(ib);
        adjacency[ib as usize].push(ia);
    }
    for neigh in &mut adjacency {
        neigh.sort_unstable();
    }
    if !connected_all(&adjacency) {
        return Err(ModelError::DisconnectedMap);
    }
    let n = data.len();
    if kappa < 2 || (kappa as usize) >= n {
        return Err(ModelError::KappaOutOfRange(kappa, n));
    }
    let nonplanar_warning = n >= 3 && seen_edges.len() > 3 * n - 6;
    Ok(MapInstance {
        cells: data,
        ids,
        id_index,
        adjacency,
        topology: Topology::Planar,
        kappa,
        scale: 1,
        nonplanar_warning,
    })
}

impl MapInstance {
    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }

    pub fn kappa(&self) -> u32 {
        self.kappa
    }

    pub fn scale(&self) -> u64 {
        self.scale
    }

    /// Records the integer multiplier already applied to the stored
    /// counts (1 for natively integral input).
    pub fn with_scale(mut self, scale: u64) -> Self {
        assert!(scale >= 1, "scale must be positive");
        self.scale = scale;
        self
    }

    pub fn cell(&self, ix: CellIx) -> &CellData {
        &self.cells[ix as usize]
    }

    pub fn cells(&self) -> &[CellData] {
        &self.cells
    }

    pub fn id(&self, ix: CellIx) -> &str {
        &self.ids[ix as usize]
    }

    pub fn index_of(&self, id: &str) -> Option<CellIx> {
        self.id_index.get(id).copied()
    }

    pub fn neighbors(&self, ix: CellIx) -> &[CellIx] {
        &self.adjacency[ix as usize]
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn is_grid(&self) -> bool {
        matches!(self.topology, Topology::Grid { .. })
    }

    pub fn nonplanar_warning(&self) -> bool {
        self.nonplanar_warning
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(|n| n.len()).sum::<usize>() / 2
    }

    pub fn total_pop(&self) -> u64 {
        self.cells.iter().map(|c| c.pop).sum()
    }

    pub fn total_party_a(&self) -> u64 {
        self.cells.iter().map(|c| c.party_a).sum()
    }

    /// Returns a copy with every pop and party count multiplied by `t`.
    pub fn scaled_counts(&self, t: u64) -> Result<MapInstance, ModelError> {
        assert!(t >= 1, "scale factor must be positive");
        let mut out = self.clone();
        let mut total: u128 = 0;
        for cell in &mut out.cells {
            cell.pop = cell
                .pop
                .checked_mul(t)
                .ok_or(ModelError::PopulationOverflow)?;
            cell.party_a *= t;
            total += u128::from(cell.pop);
        }
        if total > u128::from(MAX_TOTAL_POP) {
            return Err(ModelError::PopulationOverflow);
        }
        out.scale = self.scale.saturating_mul(t);
        Ok(out)
    }

    /// Returns a copy with the cell counts replaced wholesale. Topology,
    /// ids, adjacency, and kappa are untouched; the new counts must keep
    /// every cell invariant.
    pub(crate) fn with_counts(&self, cells: Vec<CellData>) -> Result<MapInstance, ModelError> {
        assert_eq!(cells.len(), self.cells.len(), "cell count must not change");
        let mut total: u128 = 0;
        for (ix, cell) in cells.iter().enumerate() {
            if cell.pop == 0 || cell.party_a > cell.pop {
                return Err(ModelError::InvalidCounts(
                    self.ids[ix].clone(),
                    cell.pop,
                    cell.party_a,
                ));
            }
            total += u128::from(cell.pop);
        }
        if total > u128::from(MAX_TOTAL_POP) {
            return Err(ModelError::PopulationOverflow);
        }
        let mut out = self.clone();
        out.cells = cells;
        Ok(out)
    }
}

impl Plan {
    /// Validates totality against a map: right length, every district
    /// index in range, every district non-empty.
    pub fn validate_total(&self, map: &MapInstance) -> Result<(), ModelError> {
        if self.assignment.len() != map.cell_count() {
            return Err(ModelError::PartialPlan);
        }
        let kappa = map.kappa();
        let mut used = vec![false; kappa as usize];
        for &d in &self.assignment {
            if u32::from(d) >= kappa {
                return Err(ModelError::DistrictOutOfRange(u32::from(d) + 1, kappa));
            }
            used[d as usize] = true;
        }
        if let Some(j) = used.iter().position(|u| !u) {
            return Err(ModelError::EmptyDistrict(j as u32 + 1));
        }
        Ok(())
    }

    /// Cells of district `d` (0-based).
    pub fn district_cells(&self, d: u16) -> Vec<CellIx> {
        self.assignment
            .iter()
            .enumerate()
            .filter(|&(_, &a)| a == d)
            .map(|(i, _)| i as CellIx)
            .collect()
    }

    /// Relabels districts by first occurrence so label-equivalent plans
    /// compare equal.
    pub fn canonical(&self, kappa: u32) -> Plan {
        let mut relabel = vec![u16::MAX; kappa as usize];
        let mut next = 0u16;
        let mut out = Vec::with_capacity(self.assignment.len());
        for &d in &self.assignment {
            if relabel[d as usize] == u16::MAX {
                relabel[d as usize] = next;
                next += 1;
            }
            out.push(relabel[d as usize]);
        }
        Plan { assignment: out }
    }
}

/// Per-district tallies in district order `1..kappa` (index 0 of the
/// result is district 1). Winner rule: A wins iff `2*party_a > pop`, B
/// wins iff `2*party_a < pop`, ties go to `tie_pref`. Wasted votes are
/// stored doubled: the winner wastes `2*votes - pop`, the loser wastes
/// `2*votes`, so `wasted_a_x2 + wasted_b_x2 = pop` holds exactly.
pub fn district_stats(
    map: &MapInstance,
    plan: &Plan,
    tie_pref: Party,
) -> Result<Vec<DistrictStats>, ModelError> {
    plan.validate_total(map)?;
    let kappa = map.kappa() as usize;
    let mut pop = vec![0u64; kappa];
    let mut party_a = vec![0u64; kappa];
    for (i, &d) in plan.assignment.iter().enumerate() {
        let cell = map.cell(i as CellIx);
        pop[d as usize] += cell.pop;
        party_a[d as usize] += cell.party_a;
    }
    Ok((0..kappa)
        .map(|j| {
            let p = pop[j];
            let a = party_a[j];
            let b = p - a;
            let winner = match (2 * a).cmp(&p) {
                std::cmp::Ordering::Greater => Party::A,
                std::cmp::Ordering::Less => Party::B,
                std::cmp::Ordering::Equal => tie_pref,
            };
            let (wasted_a_x2, wasted_b_x2) = match winner {
                Party::A => (2 * a - p, 2 * b),
                Party::B => (2 * a, 2 * b - p),
            };
            DistrictStats {
                pop: p,
                party_a: a,
                party_b: b,
                winner,
                wasted_a_x2,
                wasted_b_x2,
            }
        })
        .collect())
}
