//! Shared helpers for unit tests.

use crate::model::{build_grid_map, MapInstance};

/// Full `rows x cols` grid, every cell (pop 2, party_a 1).
pub fn uniform_grid(rows: u32, cols: u32, kappa: u32) -> MapInstance {
    let cells: Vec<(u32, u32, u64, u64)> = (0..rows)
        .flat_map(|r| (0..cols).map(move |c| (r, c, 2, 1)))
        .collect();
    build_grid_map(rows, cols, &cells, kappa).unwrap()
}

/// Full grid with explicit per-cell (pop, party_a) values in row-major
/// order.
pub fn grid_with(rows: u32, cols: u32, vals: &[(u64, u64)], kappa: u32) -> MapInstance {
    assert_eq!(vals.len(), (rows * cols) as usize);
    let cells: Vec<(u32, u32, u64, u64)> = vals
        .iter()
        .enumerate()
        .map(|(i, &(pop, pa))| (i as u32 / cols, i as u32 % cols, pop, pa))
        .collect();
    build_grid_map(rows, cols, &cells, kappa).unwrap()
}
