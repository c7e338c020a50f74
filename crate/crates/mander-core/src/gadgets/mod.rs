//! Generators and verifiers for two families of hard benchmark
//! instances.
//!
//! [`seatvote`] builds grid maps from number-partitioning instances:
//! the minority party can win extra seats exactly when the underlying
//! numbers split evenly. [`mis`] builds planar maps from cubic graphs:
//! the efficiency-gap sum of a canonical plan is an affine function of
//! the independent-set size it encodes.
//!
//! Both generators work in exact integer counts. Rational design
//! parameters are cleared to integers by a common denominator, so every
//! verifier claim is an exact equality, never a tolerance.

pub mod mis;
pub mod seatvote;

pub use mis::{
    gen_mis_gadget, k4, local_node_tilings, plan_from_independent_set, q3, upsilon,
    verify_mis_gadget, MisGadget, NodeParams, SourceGraph,
};
pub use seatvote::{
    build_seatvote, gen_seatvote_grid, preprocess_partition, seatvote_exponent,
    seatvote_reference_plans, verify_seatvote_gadget, PartitionInstance, PreprocessedPartition,
    SeatVoteCheck, SeatVoteGadget, SeatVoteVariant,
};

use crate::metrics::MetricsError;
use crate::model::{CellData, MapInstance, ModelError};
use crate::validity::ValidityError;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use thiserror::Error;

/// Errors from gadget generation and verification.
#[derive(Debug, Error)]
pub enum GadgetError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Validity(#[from] ValidityError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("instance assumption violated: {0}")]
    AssumptionViolated(String),
    #[error("value {0} is odd; gadget cell counts require even values")]
    OddValue(u64),
    #[error("gadget aggregate mismatch: {0}")]
    AggregateMismatch(String),
    #[error("subset is not a solution: {0}")]
    NotASolution(String),
    #[error("enumeration budget exceeded before the claim was decided")]
    BudgetExceeded,
    #[error("exhaustive checks are refused on illustration-scale gadgets")]
    IllustrationOnly,
    #[error("source graph is not 3-regular")]
    NotCubic,
    #[error("source graph is not connected")]
    NotConnected,
    #[error("source graph violates the Euler planarity bound |E| <= 3|V| - 6")]
    EulerBoundViolated,
    #[error("node parameter constraints unsatisfiable: {0}")]
    ParamSolveFailed(String),
    #[error("set is not independent: nodes {0} and {1} are adjacent")]
    NotIndependent(u32, u32),
    #[error("set is not maximal: node {0} has no selected neighbor")]
    NotMaximal(u32),
    #[error("node-gadget tiling mismatch: {0}")]
    TilingMismatch(String),
    #[error("scaling by {0} makes counts of cell `{1}` non-integral")]
    NonIntegralResult(String, String),
    #[error("removing zero-population cells disconnects the map")]
    DisconnectedAfterRemoval,
}

/// Outcome of a gadget verification run. `completeness_holds` and
/// `soundness_holds` stay `None` when the corresponding check was not
/// requested.
#[derive(Debug, Clone)]
pub struct GadgetVerdict {
    pub trivial_plan_valid: bool,
    pub completeness_holds: Option<bool>,
    pub soundness_holds: Option<bool>,
    pub details: Vec<String>,
}

impl GadgetVerdict {
    /// True when every requested claim (and trivial-plan validity) held.
    pub fn all_hold(&self) -> bool {
        self.trivial_plan_valid
            && self.completeness_holds.unwrap_or(true)
            && self.soundness_holds.unwrap_or(true)
    }
}

/// Multiplies every cell count by a positive rational factor, erroring
/// unless all scaled counts are integers. Winners and vote shares are
/// unchanged because both counts scale together.
pub fn scale_populations(
    map: &MapInstance,
    factor: &BigRational,
) -> Result<MapInstance, GadgetError> {
    if !factor.is_positive() {
        return Err(GadgetError::AssumptionViolated(format!(
            "scale factor must be positive, got {factor}"
        )));
    }
    let mut cells = Vec::with_capacity(map.cell_count());
    for ix in 0..map.cell_count() {
        let cell = map.cell(ix as u32);
        let pop = BigRational::from_integer(cell.pop.into()) * factor;
        let party_a = BigRational::from_integer(cell.party_a.into()) * factor;
        if !pop.is_integer() || !party_a.is_integer() {
            return Err(GadgetError::NonIntegralResult(
                factor.to_string(),
                map.id(ix as u32).to_string(),
            ));
        }
        let to_u64 = |r: BigRational, what: &str| -> Result<u64, GadgetError> {
            r.to_integer().try_into().map_err(|_| {
                GadgetError::AssumptionViolated(format!("scaled {what} exceeds u64"))
            })
        };
        cells.push(CellData {
            pop: to_u64(pop, "population")?,
            party_a: to_u64(party_a, "party count")?,
        });
    }
    Ok(map.with_counts(cells)?)
}

/// Drops zero-population cells from a grid draft and builds the map
/// from the survivors, erroring when the removal disconnects them.
/// Cells are `(row, col, pop, party_a)` tuples as taken by the grid
/// builder; zero-population entries are construction intermediates that
/// a finished map must not contain.
pub fn remove_zero_pop_cells(
    rows: u32,
    cols: u32,
    cells: &[(u32, u32, u64, u64)],
    kappa: u32,
) -> Result<MapInstance, GadgetError> {
    let kept: Vec<(u32, u32, u64, u64)> = cells.iter().copied().filter(|c| c.2 > 0).collect();
    match crate::model::build_grid_map(rows, cols, &kept, kappa) {
        Ok(map) => Ok(map),
        Err(ModelError::DisconnectedMap) => Err(GadgetError::DisconnectedAfterRemoval),
        Err(e) => Err(e.into()),
    }
}

/// Converts a rational that must be an integer into `u64`, panicking on
/// fractions; generation code uses it after exactness is guaranteed.
pub(crate) fn rational_to_u64(r: &BigRational, what: &str) -> Result<u64, GadgetError> {
    if !r.is_integer() {
        return Err(GadgetError::ParamSolveFailed(format!(
            "{what} = {r} is not an integer after clearing denominators"
        )));
    }
    if r.is_negative() && !r.is_zero() {
        return Err(GadgetError::ParamSolveFailed(format!(
            "{what} = {r} is negative"
        )));
    }
    r.to_integer()
        .try_into()
        .map_err(|_| GadgetError::ParamSolveFailed(format!("{what} = {r} exceeds u64")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::ratio;
    use crate::model::{district_stats, Party, Plan};
    use crate::testutil::grid_with;

    #[test]
    fn scale_by_integer_and_ratio() {
        let map = grid_with(2, 2, &[(4, 2), (8, 2), (6, 4), (2, 2)], 2);
        let scaled = scale_populations(&map, &ratio(3, 2)).unwrap();
        assert_eq!(scaled.cell(0).pop, 6);
        assert_eq!(scaled.cell(0).party_a, 3);
        assert_eq!(scaled.total_pop(), 30);
        // 3/2 on pop 4 with party_a 1 leaves party_a fractional below.
        let odd = grid_with(2, 2, &[(4, 1), (4, 2), (6, 3), (2, 1)], 2);
        assert!(matches!(
            scale_populations(&odd, &ratio(3, 2)),
            Err(GadgetError::NonIntegralResult(_, _))
        ));
        assert!(matches!(
            scale_populations(&map, &ratio(-1, 2)),
            Err(GadgetError::AssumptionViolated(_))
        ));
    }

    #[test]
    fn scaling_preserves_winners() {
        let map = grid_with(2, 2, &[(4, 3), (4, 1), (6, 2), (2, 1)], 2);
        let plan = Plan {
            assignment: vec![0, 0, 1, 1],
        };
        let before = district_stats(&map, &plan, Party::A).unwrap();
        let scaled = scale_populations(&map, &BigRational::from_integer(7.into())).unwrap();
        let after = district_stats(&scaled, &plan, Party::A).unwrap();
        for (b, a) in before.iter().zip(&after) {
            assert_eq!(b.winner, a.winner);
        }
    }

    #[test]
    fn zero_pop_removal_checks_connectivity() {
        // 1x3 path with a zero-population middle cell: removal splits it.
        let err = remove_zero_pop_cells(1, 3, &[(0, 0, 2, 1), (0, 1, 0, 0), (0, 2, 2, 1)], 2);
        assert!(matches!(err, Err(GadgetError::DisconnectedAfterRemoval)));
        // Zero cell on the fringe: removal keeps a connected path.
        let map =
            remove_zero_pop_cells(1, 4, &[(0, 0, 0, 0), (0, 1, 2, 1), (0, 2, 2, 1), (0, 3, 2, 1)], 2)
                .unwrap();
        assert_eq!(map.cell_count(), 3);
    }
}
