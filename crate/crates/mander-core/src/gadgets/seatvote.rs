//! Grid gadget family reduced from number partitioning.
//!
//! An instance is a set of distinct positive integers with even sum W.
//! The generated 3-row grid repeats a block per majority-target seat:
//! a row of value cells flanked by two heavy cells and filler cells,
//! with heavy connector cells chaining blocks together. Districts must
//! have near-equal populations, so any valid plan essentially picks,
//! per block, a subset of value cells to join the top half; the
//! minority party wins a seat exactly when that subset sums to W/2.
//!
//! Generation normally runs on a preprocessed (scaled-up) instance so
//! that the intended splits are the only valid ones; `illustration`
//! mode skips that guarantee and is refused by exhaustive verifiers.

use super::{GadgetError, GadgetVerdict};
use crate::exact::ceil_root;
use crate::model::{build_grid_map, district_stats, MapInstance, Party, Plan};
use crate::validity::{check_plan, BalanceCriterion};
use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};
use std::collections::BTreeMap;

/// A number-partitioning instance: distinct positive values with even
/// sum `w`, every value below `w/2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionInstance {
    values: Vec<u64>,
    w: u64,
}

impl PartitionInstance {
    pub fn new(values: Vec<u64>) -> Result<Self, GadgetError> {
        if values.len() < 2 {
            return Err(GadgetError::AssumptionViolated(
                "instance needs at least two values".into(),
            ));
        }
        if values.contains(&0) {
            return Err(GadgetError::AssumptionViolated(
                "values must be positive".into(),
            ));
        }
        let mut sorted = values.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(GadgetError::AssumptionViolated(
                "values must be distinct".into(),
            ));
        }
        let w = values
            .iter()
            .try_fold(0u64, |acc, &v| acc.checked_add(v))
            .ok_or_else(|| GadgetError::AssumptionViolated("value sum exceeds u64".into()))?;
        if w % 2 != 0 {
            return Err(GadgetError::AssumptionViolated(
                "value sum must be even".into(),
            ));
        }
        if let Some(&max) = sorted.last() {
            if max >= w / 2 {
                return Err(GadgetError::AssumptionViolated(format!(
                    "largest value {max} must be below half the sum {}",
                    w / 2
                )));
            }
        }
        Ok(PartitionInstance { values, w })
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }

    pub fn w(&self) -> u64 {
        self.w
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// A preprocessed instance: every value multiplied by a large even
/// multiplier so that value gaps dwarf the balance slack.
#[derive(Debug, Clone)]
pub struct PreprocessedPartition {
    pub instance: PartitionInstance,
    pub multiplier: u64,
    /// Whether the scaled sum clears the separation bound used by the
    /// soundness argument. Reported, not enforced: small benchmark
    /// instances may miss it and remain exhaustively checkable.
    pub w_bound_ok: bool,
}

/// The scaling exponent and extra factor for a district count: two
/// districts need `n^(2+2c)`; more districts need `kappa^2 * n^(3+2c)`.
pub fn seatvote_exponent(
    kappa: u32,
    c: &BigRational,
) -> Result<(BigRational, Option<u64>), GadgetError> {
    if kappa < 2 {
        return Err(GadgetError::AssumptionViolated(
            "gadget needs at least two districts".into(),
        ));
    }
    if *c <= BigRational::one() {
        return Err(GadgetError::AssumptionViolated(
            "balance exponent must exceed 1".into(),
        ));
    }
    let two = BigRational::from_integer(2.into());
    let exponent = if kappa == 2 {
        &two + &two * c
    } else {
        BigRational::from_integer(3.into()) + &two * c
    };
    let factor = if kappa == 2 {
        None
    } else {
        Some(u64::from(kappa) * u64::from(kappa))
    };
    Ok((exponent, factor))
}

/// Scales an instance by `ceil(factor * n^exponent)`, doubled if needed
/// so every scaled value is even and the scaled sum is divisible by 4.
pub fn preprocess_partition(
    instance: &PartitionInstance,
    exponent: &BigRational,
    factor: Option<u64>,
) -> Result<PreprocessedPartition, GadgetError> {
    if !exponent.is_positive() {
        return Err(GadgetError::AssumptionViolated(
            "scaling exponent must be positive".into(),
        ));
    }
    let p = exponent
        .numer()
        .to_u32()
        .ok_or_else(|| GadgetError::AssumptionViolated("exponent numerator too large".into()))?;
    let q = exponent
        .denom()
        .to_u32()
        .ok_or_else(|| GadgetError::AssumptionViolated("exponent denominator too large".into()))?;
    let n = instance.len() as u64;
    let kf = factor.unwrap_or(1);
    // multiplier = ceil((kf^q * n^p)^(1/q)) = ceil(kf * n^(p/q)).
    let radicand = BigUint::from(kf).pow(q) * BigUint::from(n).pow(p);
    let m0 = ceil_root(&radicand, q)
        .to_u64()
        .ok_or_else(|| GadgetError::AssumptionViolated("multiplier exceeds u64".into()))?;
    let needs_double = instance
        .values
        .iter()
        .any(|&v| v.checked_mul(m0).is_none_or(|s| s % 2 != 0))
        || instance
            .w
            .checked_mul(m0)
            .is_none_or(|s| s % 4 != 0);
    let multiplier = if needs_double { m0 * 2 } else { m0 };
    let values: Vec<u64> = instance
        .values
        .iter()
        .map(|&v| {
            v.checked_mul(multiplier)
                .ok_or_else(|| GadgetError::AssumptionViolated("scaled value exceeds u64".into()))
        })
        .collect::<Result<_, _>>()?;
    let scaled = PartitionInstance::new(values)?;
    // Separation bound from the soundness argument, in exact integer
    // powers: with exponent e = p/q, two districts need
    // W^q > n^(2p-2q); more need W^q > kf^q * n^(2p-3q).
    let wq = BigUint::from(scaled.w).pow(q);
    let w_bound_ok = match factor {
        None => 2 * p > 2 * q && wq > BigUint::from(n).pow(2 * p - 2 * q),
        Some(kf) => {
            2 * p > 3 * q
                && wq > BigUint::from(kf).pow(q) * BigUint::from(n).pow(2 * p - 3 * q)
        }
    };
    debug_assert!(scaled.w % 4 == 0 && scaled.values.iter().all(|v| v % 2 == 0));
    Ok(PreprocessedPartition {
        instance: scaled,
        multiplier,
        w_bound_ok,
    })
}

/// Which side of the seat-count claim the gadget encodes: variant A
/// leaves the minority party short of half the vote; variant B tops up
/// one heavy cell so the minority holds at least half the vote.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeatVoteVariant {
    A,
    B,
}

/// A generated partitioning gadget and the parameters that shaped it.
#[derive(Debug, Clone)]
pub struct SeatVoteGadget {
    pub map: MapInstance,
    pub variant: SeatVoteVariant,
    pub kappa: u32,
    /// Copies of the block (majority-target seats): `kappa = 3*alpha + r`.
    pub alpha: u32,
    pub r: i32,
    /// Connector cells: `beta = alpha + r`.
    pub beta: u32,
    pub n: u32,
    pub c: BigRational,
    /// False in illustration mode (instance used as-is, no scaling).
    pub scale_applied: bool,
    /// The preprocessing multiplier (1 when `scale_applied` is false).
    pub multiplier: u64,
    /// Variant-B top-up count; `None` for variant A.
    pub q: Option<u64>,
    /// The instance as embedded in the map (already scaled).
    pub instance: PartitionInstance,
    pub w_bound_ok: bool,
}

impl SeatVoteGadget {
    fn col_offset(&self, copy: u32) -> u32 {
        copy * (self.n + 2)
    }

    fn cell_ix(&self, row: u32, col: u32) -> u32 {
        self.map
            .index_of(&format!("{row},{col}"))
            .expect("gadget coordinates are occupied")
    }

    /// The balance criterion the gadget's claims are stated under.
    pub fn criterion(&self) -> BalanceCriterion {
        BalanceCriterion::AdditivePolynomial(self.c.clone())
    }
}

/// Builds the 3-row grid gadget for a (normally preprocessed) instance.
pub fn gen_seatvote_grid(
    instance: &PartitionInstance,
    kappa: u32,
    variant: SeatVoteVariant,
    c: &BigRational,
    illustration: bool,
) -> Result<SeatVoteGadget, GadgetError> {
    if kappa < 2 {
        return Err(GadgetError::AssumptionViolated(
            "gadget needs at least two districts".into(),
        ));
    }
    if *c <= BigRational::one() {
        return Err(GadgetError::AssumptionViolated(
            "balance exponent must exceed 1".into(),
        ));
    }
    let n = instance.len() as u64;
    let w = instance.w;
    for &v in &instance.values {
        if v % 2 != 0 {
            return Err(GadgetError::OddValue(v));
        }
    }
    if !w.is_multiple_of(4) {
        return Err(GadgetError::AssumptionViolated(
            "value sum must be divisible by 4".into(),
        ));
    }
    if w / 4 < 100 * n {
        return Err(GadgetError::AssumptionViolated(format!(
            "sum too small for the gadget margins: needs W/4 >= 100n, got {} < {}",
            w / 4,
            100 * n
        )));
    }
    // kappa = 3*alpha + r with r in {-1, 0, 1}; beta connectors.
    let alpha = (kappa + 1) / 3;
    let r = kappa as i64 - 3 * i64::from(alpha);
    debug_assert!((-1..=1).contains(&r));
    let beta = (i64::from(alpha) + r) as u32;

    let q = match variant {
        SeatVoteVariant::A => None,
        SeatVoteVariant::B => {
            // Smallest q >= 0 with q*alpha^2*n^2 + 100n >= 49*alpha*n +
            // alpha + 50*beta*n, which lifts the minority to half the
            // statewide vote exactly.
            let need = i128::from(alpha) * 49 * i128::from(n)
                + i128::from(alpha)
                + i128::from(beta) * 50 * i128::from(n)
                - 100 * i128::from(n);
            let unit = i128::from(alpha) * i128::from(alpha) * i128::from(n) * i128::from(n);
            let q = if need <= 0 { 0 } else { (need + unit - 1) / unit };
            let q = u64::try_from(q).expect("non-negative");
            if u128::from(q) * (unit as u128) > u128::from(w / 4) {
                return Err(GadgetError::AssumptionViolated(
                    "variant-B top-up exceeds the heavy cell population".into(),
                ));
            }
            Some(q)
        }
    };

    let half = w / 2;
    let quarter = w / 4;
    let heavy_plus_a = quarter + 52 * n - 2;
    if heavy_plus_a > half || quarter < 100 * n {
        return Err(GadgetError::AssumptionViolated(
            "heavy cell counts out of range".into(),
        ));
    }
    let nn = n as u32;
    let mut cells: Vec<(u32, u32, u64, u64)> = Vec::new();
    for copy in 0..alpha {
        let off = copy * (nn + 2);
        // Top row: filler cells, then the surplus heavy cell.
        for i in 0..nn {
            cells.push((0, off + i, 2, 1));
        }
        cells.push((0, off + nn, half, heavy_plus_a));
        // Middle row: value cells, then a filler junction.
        for (i, &v) in instance.values.iter().enumerate() {
            cells.push((1, off + i as u32, v, v / 2 - 1));
        }
        cells.push((1, off + nn, 2, 1));
        // Bottom row: filler cells (the last two lighter), then the
        // deficit heavy cell.
        for i in 0..nn.saturating_sub(2) {
            cells.push((2, off + i, 2, 1));
        }
        if nn >= 2 {
            cells.push((2, off + nn - 2, 1, 1));
            cells.push((2, off + nn - 1, 1, 1));
        }
        let minus_a = match (variant, copy) {
            (SeatVoteVariant::B, 0) => {
                let q = q.expect("variant B sets q");
                quarter + q * u64::from(alpha) * u64::from(alpha) * n * n
            }
            _ => quarter - 100 * n,
        };
        cells.push((2, off + nn, half, minus_a));
    }
    // Connectors: one between consecutive copies, the rest chained
    // after the last copy.
    let connector_a = half - 50 * n;
    let mut placed = 0u32;
    for copy in 0..alpha.saturating_sub(1) {
        cells.push((1, copy * (nn + 2) + nn + 1, w, connector_a));
        placed += 1;
    }
    let last_off = (alpha - 1) * (nn + 2);
    let mut col = last_off + nn + 1;
    while placed < beta {
        cells.push((1, col, w, connector_a));
        col += 1;
        placed += 1;
    }
    let total_cols = cells.iter().map(|c| c.1).max().unwrap() + 1;
    let map = build_grid_map(3, total_cols, &cells, kappa)?;

    // Aggregate cross-check against the closed forms.
    let a = u128::from(alpha);
    let b = u128::from(beta);
    let wn = u128::from(w);
    let n128 = u128::from(n);
    let expect_pop = a * (2 * wn + 4 * n128) + b * wn;
    let mut expect_a = a * (wn - 47 * n128 - 1) + b * (wn / 2 - 50 * n128);
    if let Some(q) = q {
        expect_a += u128::from(q) * a * a * n128 * n128 + 100 * n128;
    }
    if u128::from(map.total_pop()) != expect_pop || u128::from(map.total_party_a()) != expect_a {
        return Err(GadgetError::AggregateMismatch(format!(
            "pop {} vs {expect_pop}, party_a {} vs {expect_a}",
            map.total_pop(),
            map.total_party_a()
        )));
    }
    // Vote-share side: the minority party holds less than half the
    // statewide vote in variant A and at least half in variant B.
    let double_a = 2 * u128::from(map.total_party_a());
    let ok = match variant {
        SeatVoteVariant::A => double_a < expect_pop,
        SeatVoteVariant::B => double_a >= expect_pop,
    };
    if !ok {
        return Err(GadgetError::AggregateMismatch(
            "statewide vote share on the wrong side of one half".into(),
        ));
    }

    Ok(SeatVoteGadget {
        map,
        variant,
        kappa,
        alpha,
        r: r as i32,
        beta,
        n: nn,
        c: c.clone(),
        scale_applied: !illustration,
        multiplier: 1,
        q,
        instance: instance.clone(),
        w_bound_ok: false,
    })
}

/// Preprocesses raw values (unless `illustration`) and generates the
/// gadget, recording the multiplier used.
pub fn build_seatvote(
    values: &[u64],
    kappa: u32,
    variant: SeatVoteVariant,
    c: &BigRational,
    illustration: bool,
) -> Result<SeatVoteGadget, GadgetError> {
    let raw = PartitionInstance::new(values.to_vec())?;
    if illustration {
        return gen_seatvote_grid(&raw, kappa, variant, c, true);
    }
    let (exponent, factor) = seatvote_exponent(kappa, c)?;
    let pre = preprocess_partition(&raw, &exponent, factor)?;
    let mut gadget = gen_seatvote_grid(&pre.instance, kappa, variant, c, false)?;
    gadget.multiplier = pre.multiplier;
    gadget.w_bound_ok = pre.w_bound_ok;
    Ok(gadget)
}

/// The gadget's reference plans: the always-valid trivial plan and,
/// given a subset of values summing to W/2, the plan that hands the
/// minority party its extra seats.
///
/// The solution subset is given in the same units as the gadget's
/// embedded (scaled) instance values.
pub fn seatvote_reference_plans(
    gadget: &SeatVoteGadget,
    solution: Option<&[u64]>,
) -> Result<(Plan, Option<Plan>), GadgetError> {
    let trivial = reference_plan(gadget, None)?;
    let completeness = match solution {
        None => None,
        Some(sol) => Some(reference_plan(gadget, Some(sol))?),
    };
    Ok((trivial, completeness))
}

/// Builds one reference plan; `solution: None` gives the trivial plan.
fn reference_plan(gadget: &SeatVoteGadget, solution: Option<&[u64]>) -> Result<Plan, GadgetError> {
    let n = gadget.n;
    let w = gadget.instance.w();
    let in_solution: Vec<bool> = match solution {
        None => vec![false; n as usize],
        Some(sol) => {
            let mut by_value: BTreeMap<u64, usize> = BTreeMap::new();
            for (i, &v) in gadget.instance.values().iter().enumerate() {
                by_value.insert(v, i);
            }
            let mut mask = vec![false; n as usize];
            let mut sum: u128 = 0;
            for &s in sol {
                let Some(&i) = by_value.get(&s) else {
                    return Err(GadgetError::NotASolution(format!(
                        "{s} is not an instance value"
                    )));
                };
                if mask[i] {
                    return Err(GadgetError::NotASolution(format!("{s} listed twice")));
                }
                mask[i] = true;
                sum += u128::from(s);
            }
            if sum != u128::from(w / 2) {
                return Err(GadgetError::NotASolution(format!(
                    "subset sums to {sum}, needs {}",
                    w / 2
                )));
            }
            mask
        }
    };
    let mut assignment = vec![u16::MAX; gadget.map.cell_count()];
    let mut assign = |ix: u32, d: u16| {
        debug_assert_eq!(assignment[ix as usize], u16::MAX);
        assignment[ix as usize] = d;
    };
    for copy in 0..gadget.alpha {
        let off = gadget.col_offset(copy);
        let d_top = (2 * copy) as u16;
        let d_rest = d_top + 1;
        match solution {
            None => {
                // Trivial: value cells in one district, everything else
                // in the copy in the other.
                for i in 0..n {
                    assign(gadget.cell_ix(1, off + i), d_top);
                }
                for i in 0..=n {
                    assign(gadget.cell_ix(0, off + i), d_rest);
                    assign(gadget.cell_ix(2, off + i), d_rest);
                }
                assign(gadget.cell_ix(1, off + n), d_rest);
            }
            Some(_) => {
                // Split: top row takes the solution values, bottom row
                // the rest.
                for i in 0..=n {
                    assign(gadget.cell_ix(0, off + i), d_top);
                    assign(gadget.cell_ix(2, off + i), d_rest);
                }
                assign(gadget.cell_ix(1, off + n), d_top);
                for i in 0..n {
                    let d = if in_solution[i as usize] { d_top } else { d_rest };
                    assign(gadget.cell_ix(1, off + i), d);
                }
            }
        }
    }
    // Connector singletons.
    let mut d = (2 * gadget.alpha) as u16;
    for copy in 0..gadget.alpha.saturating_sub(1) {
        assign(gadget.cell_ix(1, gadget.col_offset(copy) + n + 1), d);
        d += 1;
    }
    let last_off = gadget.col_offset(gadget.alpha - 1);
    let mut col = last_off + n + 1;
    while u32::from(d) < gadget.kappa {
        assign(gadget.cell_ix(1, col), d);
        col += 1;
        d += 1;
    }
    debug_assert!(assignment.iter().all(|&a| a != u16::MAX));
    Ok(Plan { assignment })
}

/// Which claim to verify about a gadget.
#[derive(Debug, Clone)]
pub enum SeatVoteCheck {
    /// Check the plan derived from a claimed solution subset: it must
    /// be valid and hand the minority party the promised seat count.
    Completeness { solution: Vec<u64> },
    /// Enumerate every valid plan and confirm the minority party never
    /// wins a seat. Refused on illustration gadgets; errors out when
    /// the node budget is hit first.
    SoundnessExhaustive { node_budget: Option<u64> },
}

/// Verifies one claim, always also reporting trivial-plan validity.
pub fn verify_seatvote_gadget(
    gadget: &SeatVoteGadget,
    check: &SeatVoteCheck,
) -> Result<GadgetVerdict, GadgetError> {
    let criterion = gadget.criterion();
    let mut details = Vec::new();
    let (trivial, _) = seatvote_reference_plans(gadget, None)?;
    let trivial_report = check_plan(&gadget.map, &trivial, &criterion)?;
    let trivial_plan_valid = trivial_report.is_valid();
    details.push(format!(
        "trivial plan: pops {}..{}, valid = {trivial_plan_valid}",
        trivial_report.min_pop, trivial_report.max_pop
    ));

    let mut verdict = GadgetVerdict {
        trivial_plan_valid,
        completeness_holds: None,
        soundness_holds: None,
        details,
    };
    match check {
        SeatVoteCheck::Completeness { solution } => {
            let (_, plan) = seatvote_reference_plans(gadget, Some(solution))?;
            let plan = plan.expect("solution given");
            let report = check_plan(&gadget.map, &plan, &criterion)?;
            let stats = district_stats(&gadget.map, &plan, Party::A)?;
            let seats_a = stats.iter().filter(|s| s.winner == Party::A).count() as u32;
            let expected = gadget.alpha + u32::from(matches!(gadget.variant, SeatVoteVariant::B));
            for (i, s) in stats.iter().enumerate() {
                verdict.details.push(format!(
                    "district {}: pop {}, party_a {}, winner {}",
                    i + 1,
                    s.pop,
                    s.party_a,
                    s.winner
                ));
            }
            verdict.details.push(format!(
                "solution plan valid = {}, minority seats {seats_a} (target {expected})",
                report.is_valid()
            ));
            verdict.completeness_holds = Some(report.is_valid() && seats_a == expected);
        }
        SeatVoteCheck::SoundnessExhaustive { node_budget } => {
            if !gadget.scale_applied {
                return Err(GadgetError::IllustrationOnly);
            }
            let mut max_seats = 0u32;
            let mut visit = |plan: &Plan| {
                let stats = district_stats(&gadget.map, plan, Party::A)
                    .expect("enumerated plans are total");
                let seats_a = stats.iter().filter(|s| s.winner == Party::A).count() as u32;
                max_seats = max_seats.max(seats_a);
            };
            let (count, exhausted) = crate::enumerate::enumerate_plans_visit(
                &gadget.map,
                &criterion,
                *node_budget,
                &mut visit,
            )?;
            if !exhausted {
                return Err(GadgetError::BudgetExceeded);
            }
            verdict.details.push(format!(
                "{count} valid plans enumerated; max minority seats {max_seats}"
            ));
            verdict.soundness_holds = Some(max_seats == 0);
        }
    }
    Ok(verdict)
}
