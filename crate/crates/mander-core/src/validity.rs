//! Legal validity: district connectivity plus a population-balance
//! criterion.
//!
//! A plan is valid when every district induces a connected subgraph and
//! the multiset of district populations satisfies the chosen
//! [`BalanceCriterion`]. All comparisons are exact; the polynomial slack
//! variant resolves its bound through integer root bracketing.

use crate::exact;
use crate::model::{CellIx, MapInstance, ModelError, Plan};
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ValidityError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("unknown cell index {0}")]
    UnknownCell(u32),
    #[error("cell set is empty")]
    EmptyCellSet,
    #[error("negative balance parameter")]
    NegativeParameter,
    #[error("polynomial exponent must exceed 1")]
    ExponentTooSmall,
}

/// Population-balance rule for district populations `p_1..p_k` with map
/// total `P`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BalanceCriterion {
    /// Every district population in `{⌊P/κ⌋, ⌈P/κ⌉}`.
    Strict,
    /// `max/min <= 1 + eps`, `eps >= 0` rational.
    MultiplicativeRatio(BigRational),
    /// `max <= min + delta`, `delta >= 0` integer.
    AdditiveSlack(u64),
    /// `AdditiveSlack(⌊s^c⌋)` where `s` is the map's cell count and
    /// `c > 1` is rational; resolved at check time.
    AdditivePolynomial(BigRational),
}

impl BalanceCriterion {
    /// Validates parameter-side invariants.
    pub fn validate(&self) -> Result<(), ValidityError> {
        match self {
            BalanceCriterion::Strict | BalanceCriterion::AdditiveSlack(_) => Ok(()),
            BalanceCriterion::MultiplicativeRatio(eps) => {
                if eps.is_negative() {
                    Err(ValidityError::NegativeParameter)
                } else {
                    Ok(())
                }
            }
            BalanceCriterion::AdditivePolynomial(c) => {
                if *c <= BigRational::from_integer(BigInt::from(1)) {
                    Err(ValidityError::ExponentTooSmall)
                } else {
                    Ok(())
                }
            }
        }
    }

    /// The additive slack this criterion resolves to on a map with
    /// `cell_count` cells, when it is an additive variant.
    pub fn resolved_slack(&self, cell_count: usize) -> Option<u64> {
        match self {
            BalanceCriterion::AdditiveSlack(d) => Some(*d),
            BalanceCriterion::AdditivePolynomial(c) => {
                let p = c.numer().to_u32().expect("exponent numerator fits u32");
                let q = c.denom().to_u32().expect("exponent denominator fits u32");
                let s = BigUint::from(cell_count);
                Some(
                    exact::floor_pow_ratio(&s, p, q)
                        .to_u64()
                        .unwrap_or(u64::MAX),
                )
            }
            _ => None,
        }
    }

    /// Exact balance check on a complete district population vector.
    pub fn check(&self, pops: &[u64], total: u64, cell_count: usize) -> bool {
        let kappa = pops.len() as u64;
        let max = *pops.iter().max().expect("non-empty district list");
        let min = *pops.iter().min().expect("non-empty district list");
        match self {
            BalanceCriterion::Strict => {
                let lo = total / kappa;
                let hi = lo + u64::from(!total.is_multiple_of(kappa));
                pops.iter().all(|&p| p == lo || p == hi)
            }
            BalanceCriterion::MultiplicativeRatio(eps) => {
                // max/min <= 1 + eps  <=>  max*q <= min*(q+p)
                let p = eps.numer();
                let q = eps.denom();
                BigInt::from(max) * q <= BigInt::from(min) * (q + p)
            }
            BalanceCriterion::AdditiveSlack(delta) => max <= min + delta,
            BalanceCriterion::AdditivePolynomial(_) => {
                let delta = self.resolved_slack(cell_count).unwrap();
                max <= min + delta
            }
        }
    }

    /// Sound per-district population bounds implied by this criterion:
    /// any district of a satisfying plan has population within the
    /// returned closed interval. Used for search pruning; the exact
    /// check still runs on complete plans.
    pub fn district_pop_bounds(&self, total: u64, kappa: u32, cell_count: usize) -> (u64, u64) {
        let k = u64::from(kappa);
        match self {
            BalanceCriterion::Strict => {
                let lo = total / k;
                let hi = lo + u64::from(!total.is_multiple_of(k));
                (lo, hi)
            }
            BalanceCriterion::AdditiveSlack(_) | BalanceCriterion::AdditivePolynomial(_) => {
                let delta = self.resolved_slack(cell_count).unwrap();
                // total >= kappa*max - (kappa-1)*delta and
                // total <= kappa*min + (kappa-1)*delta.
                let spread = (k - 1).saturating_mul(delta);
                let lo = u64::try_from(
                    (u128::from(total).saturating_sub(u128::from(spread))).div_ceil(u128::from(k)),
                )
                .unwrap_or(0);
                let hi =
                    u64::try_from((u128::from(total) + u128::from(spread)) / u128::from(k))
                        .unwrap_or(u64::MAX);
                (lo, hi)
            }
            BalanceCriterion::MultiplicativeRatio(eps) => {
                // min <= total/kappa <= max and max <= min*(1+eps):
                // max <= (1+eps)*total/kappa, min >= total/((1+eps)*kappa).
                let p = eps.numer().to_biguint().unwrap_or_default();
                let q = eps.denom().to_biguint().expect("positive denominator");
                let t = BigUint::from(total);
                let hi = (&t * (&q + &p)) / (&q * k);
                let lo_num = &t * &q;
                let lo_den = (&q + &p) * k;
                // ceil division for the lower bound.
                let lo = (&lo_num + &lo_den - 1u32) / &lo_den;
                (
                    lo.to_u64().unwrap_or(0),
                    hi.to_u64().unwrap_or(u64::MAX),
                )
            }
        }
    }
}

/// Why a district fails validity.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub enum DistrictFailure {
    Disconnected,
    PopulationOutOfBalance,
}

/// Verdict of [`check_plan`]. The plan is valid iff
/// `connected_ok && balance_ok`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidityReport {
    pub connected_ok: bool,
    pub balance_ok: bool,
    pub max_pop: u64,
    pub min_pop: u64,
    /// `(district 1-based, reason)` pairs.
    pub offending_districts: Vec<(u32, DistrictFailure)>,
}

impl ValidityReport {
    pub fn is_valid(&self) -> bool {
        self.connected_ok && self.balance_ok
    }
}

/// True iff `cell_set` induces a connected subgraph of the map.
pub fn is_connected(map: &MapInstance, cell_set: &[CellIx]) -> Result<bool, ValidityError> {
    if cell_set.is_empty() {
        return Err(ValidityError::EmptyCellSet);
    }
    let n = map.cell_count() as u32;
    let mut member = vec![false; n as usize];
    for &c in cell_set {
        if c >= n {
            return Err(ValidityError::UnknownCell(c));
        }
        member[c as usize] = true;
    }
    let mut seen = vec![false; n as usize];
    let mut stack = vec![cell_set[0]];
    seen[cell_set[0] as usize] = true;
    let mut count = 1usize;
    while let Some(u) = stack.pop() {
        for &v in map.neighbors(u) {
            if member[v as usize] && !seen[v as usize] {
                seen[v as usize] = true;
                count += 1;
                stack.push(v);
            }
        }
    }
    Ok(count == cell_set.len())
}

/// Checks a total plan for per-district connectivity and population
/// balance.
pub fn check_plan(
    map: &MapInstance,
    plan: &Plan,
    criterion: &BalanceCriterion,
) -> Result<ValidityReport, ValidityError> {
    criterion.validate()?;
    plan.validate_total(map)?;
    let kappa = map.kappa() as usize;
    let mut pops = vec![0u64; kappa];
    for (i, &d) in plan.assignment.iter().enumerate() {
        pops[d as usize] += map.cell(i as CellIx).pop;
    }
    let mut offending = Vec::new();
    let mut connected_ok = true;
    for d in 0..kappa {
        let cells = plan.district_cells(d as u16);
        if !is_connected(map, &cells)? {
            connected_ok = false;
            offending.push((d as u32 + 1, DistrictFailure::Disconnected));
        }
    }
    let balance_ok = criterion.check(&pops, map.total_pop(), map.cell_count());
    if !balance_ok {
        // Attribute imbalance to extreme districts for diagnostics.
        let max = *pops.iter().max().unwrap();
        let min = *pops.iter().min().unwrap();
        for (j, &p) in pops.iter().enumerate() {
            if p == max || p == min {
                offending.push((j as u32 + 1, DistrictFailure::PopulationOutOfBalance));
            }
        }
    }
    Ok(ValidityReport {
        connected_ok,
        balance_ok,
        max_pop: *pops.iter().max().unwrap(),
        min_pop: *pops.iter().min().unwrap(),
        offending_districts: offending,
    })
}
