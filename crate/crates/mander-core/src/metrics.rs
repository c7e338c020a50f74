//! Partisan metrics: seat/vote shares, efficiency gap, partisan bias
//! under a population-shift model, the seat-vote approximation factor,
//! and Polsby-Popper compactness on grid maps.
//!
//! Every quantity is exact. Vote-share powers with fractional exponents
//! are carried as `(value^q, q)` pairs so comparisons stay exact; pi in
//! compactness scores stays symbolic (scores are rational multiples of
//! pi when the conventional constant `4*pi` is used).

use crate::model::{district_stats, CellIx, MapInstance, ModelError, Party, Plan};
use crate::validity::{is_connected, ValidityError};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MetricsError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Validity(#[from] ValidityError),
    #[error("district populations are not all equal; the identity is only asserted for equal populations")]
    PreconditionUnequalDistricts,
    #[error("party A's total is below party B's; the bias procedure assumes the opposite")]
    AssumptionViolated,
    #[error("explicit shift must supply exactly {0} betas, got {1}")]
    BetaCountMismatch(u32, usize),
    #[error("beta for district {0} lies outside [0, 1]")]
    BetaOutOfRange(u32),
    #[error("explicit betas must sum to the vote-margin alpha")]
    BetaSumMismatch,
    #[error("shifted party-A count for district {0} leaves [0, pop]")]
    ShiftInfeasible(u32),
    #[error("party B has no votes; the seat-vote target is undefined")]
    PartyBEmpty,
    #[error("party A won no districts; the seat-vote ratio is undefined")]
    SeatsAZero,
    #[error("seat-vote exponent must be positive")]
    NonPositiveRho,
    #[error("seat-vote exponent numerator/denominator must fit in u32")]
    RhoTooLarge,
    #[error("compactness requires grid topology; planar maps carry no geometry")]
    PlanarTopologyUnsupported,
    #[error("district cells are not connected")]
    DisconnectedDistrict,
    #[error("compactness bounds are empty (lower bound exceeds upper)")]
    BoundsEmpty,
}

fn rat(n: u64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn rat_i(n: i128) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Whole-plan metric bundle. Party B's shares are `1 -` the stored A
/// shares and are not stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetricsReport {
    /// Seats won by A over kappa.
    pub n_seat_c_a: BigRational,
    /// `n_seat_c_a - 1/2`.
    pub n_seat_m_a: BigRational,
    /// PartyA(S) / Pop(S).
    pub n_vote_c_a: BigRational,
    /// `n_vote_c_a - 1/2`.
    pub n_vote_m_a: BigRational,
    /// `|sum_j (wasted_a_x2 - wasted_b_x2)|` in doubled units.
    pub effgap_x2: u64,
    /// Efficiency gap over total population: `effgap_x2 / (2 Pop(S))`.
    pub effgap_normalized: BigRational,
    pub raw_seats_a: u32,
}

fn half() -> BigRational {
    BigRational::new(BigInt::one(), BigInt::from(2))
}

/// Computes the §-style whole-plan report from per-district tallies.
pub fn metrics_report(
    map: &MapInstance,
    plan: &Plan,
    tie_pref: Party,
) -> Result<MetricsReport, MetricsError> {
    let stats = district_stats(map, plan, tie_pref)?;
    let kappa = map.kappa();
    let total_pop = map.total_pop();
    let total_a = map.total_party_a();
    let seats_a = stats.iter().filter(|s| s.winner == Party::A).count() as u32;
    let signed_sum: i128 = stats
        .iter()
        .map(|s| i128::from(s.wasted_a_x2) - i128::from(s.wasted_b_x2))
        .sum();
    let effgap_x2 = signed_sum.unsigned_abs() as u64;
    let n_seat_c_a = BigRational::new(BigInt::from(seats_a), BigInt::from(kappa));
    let n_vote_c_a = BigRational::new(BigInt::from(total_a), BigInt::from(total_pop));
    Ok(MetricsReport {
        n_seat_m_a: &n_seat_c_a - half(),
        n_vote_m_a: &n_vote_c_a - half(),
        n_seat_c_a,
        n_vote_c_a,
        effgap_x2,
        effgap_normalized: BigRational::new(BigInt::from(effgap_x2), BigInt::from(2 * total_pop)),
        raw_seats_a: seats_a,
    })
}

/// Residual of the identity `effgap/Pop = |2*N-Vote-M(A) - N-Seat-M(A)|`,
/// asserted to be exactly zero for equal district populations and
/// tie-free districts. Errors when district populations differ.
pub fn effgap_identity_residual(
    map: &MapInstance,
    plan: &Plan,
    tie_pref: Party,
) -> Result<BigRational, MetricsError> {
    let stats = district_stats(map, plan, tie_pref)?;
    let first = stats[0].pop;
    if stats.iter().any(|s| s.pop != first) {
        return Err(MetricsError::PreconditionUnequalDistricts);
    }
    let report = metrics_report(map, plan, tie_pref)?;
    let rhs = (rat_i(2) * &report.n_vote_m_a - &report.n_seat_m_a).abs();
    Ok((&report.effgap_normalized - rhs).abs())
}

/// Vote-shift model for the bias procedure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ShiftModel {
    /// `beta_j = alpha / kappa` for every district.
    Uniform,
    /// Caller-chosen betas; must be in `[0, 1]` and sum to alpha.
    Explicit(Vec<BigRational>),
}

/// Partisan bias: mirror A's overall vote margin via district-level
/// shifts and report the absolute change in A's normalized seat count.
///
/// The shift subtracts `beta_j * Pop(S)` (total population) from each
/// district's A count; a shifted count outside `[0, Pop(S_j)]` is an
/// error, never clamped.
pub fn partisan_bias(
    map: &MapInstance,
    plan: &Plan,
    shift: &ShiftModel,
    tie_pref: Party,
) -> Result<BigRational, MetricsError> {
    let stats = district_stats(map, plan, tie_pref)?;
    let kappa = map.kappa();
    let total_pop = map.total_pop();
    let total_a = map.total_party_a();
    let total_b = total_pop - total_a;
    if total_a < total_b {
        return Err(MetricsError::AssumptionViolated);
    }
    // alpha = N-Vote-C(A) - N-Vote-C(B) = (2 A(S) - Pop(S)) / Pop(S).
    let alpha = BigRational::new(
        BigInt::from(i128::from(2 * total_a) - i128::from(total_pop)),
        BigInt::from(total_pop),
    );
    let betas: Vec<BigRational> = match shift {
        ShiftModel::Uniform => {
            let beta = &alpha / rat(u64::from(kappa));
            vec![beta; kappa as usize]
        }
        ShiftModel::Explicit(betas) => {
            if betas.len() != kappa as usize {
                return Err(MetricsError::BetaCountMismatch(kappa, betas.len()));
            }
            for (j, b) in betas.iter().enumerate() {
                if b.is_negative() || *b > BigRational::one() {
                    return Err(MetricsError::BetaOutOfRange(j as u32 + 1));
                }
            }
            let sum: BigRational = betas.iter().sum();
            if sum != alpha {
                return Err(MetricsError::BetaSumMismatch);
            }
            betas.clone()
        }
    };
    let pop_s = rat(total_pop);
    let mut shifted_seats_a = 0u32;
    for (j, (s, beta)) in stats.iter().zip(&betas).enumerate() {
        let shifted_a = rat(s.party_a) - beta * &pop_s;
        if shifted_a.is_negative() || shifted_a > rat(s.pop) {
            return Err(MetricsError::ShiftInfeasible(j as u32 + 1));
        }
        let doubled = rat_i(2) * &shifted_a;
        let winner = match doubled.cmp(&rat(s.pop)) {
            std::cmp::Ordering::Greater => Party::A,
            std::cmp::Ordering::Less => Party::B,
            std::cmp::Ordering::Equal => tie_pref,
        };
        if winner == Party::A {
            shifted_seats_a += 1;
        }
    }
    let seats_a = stats.iter().filter(|s| s.winner == Party::A).count() as u32;
    let n = BigRational::new(BigInt::from(seats_a), BigInt::from(kappa));
    let n_tilde = BigRational::new(BigInt::from(shifted_seats_a), BigInt::from(kappa));
    Ok((n_tilde - n).abs())
}

/// Configuration for the seat-vote approximation factor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeatVoteConfig {
    /// Positive rational exponent rho of the target seats/votes relation.
    pub rho: BigRational,
    pub tie_pref: Party,
}

/// Exact seat-vote factor. For rho = p/q the irrational target
/// `T = (votes_A/votes_B)^(p/q)` is carried through its q-th power:
/// `pow_q = factor^q` is exact, and `q = 1` whenever rho is an integer
/// (then `pow_q` is the factor itself).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeatVoteFactor {
    pub pow_q: BigRational,
    pub q: u32,
}

impl SeatVoteFactor {
    /// The factor itself when it is exactly rational (q = 1).
    pub fn exact(&self) -> Option<&BigRational> {
        (self.q == 1).then_some(&self.pow_q)
    }

    /// Lossy numeric image `pow_q^(1/q)` for display.
    pub fn approx(&self) -> f64 {
        let v = self.pow_q.to_f64().unwrap_or(f64::INFINITY);
        if self.q == 1 {
            v
        } else {
            v.powf(1.0 / f64::from(self.q))
        }
    }
}

impl PartialOrd for SeatVoteFactor {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        // Comparable only at matching q (same rho); factors are >= 1 so
        // comparing q-th powers preserves order.
        (self.q == other.q).then(|| self.pow_q.cmp(&other.pow_q))
    }
}

/// How far the plan's seat ratio deviates from the rho-power of the
/// vote ratio: `max(R/T, T/R)` with `R = seats_A/seats_B` and
/// `T = (PartyA(S)/PartyB(S))^rho`. When party B wins no district the
/// factor falls back to the inverse of A's vote share.
pub fn seat_vote_factor(
    map: &MapInstance,
    plan: &Plan,
    cfg: &SeatVoteConfig,
) -> Result<SeatVoteFactor, MetricsError> {
    if !cfg.rho.is_positive() {
        return Err(MetricsError::NonPositiveRho);
    }
    let stats = district_stats(map, plan, cfg.tie_pref)?;
    let total_pop = map.total_pop();
    let total_a = map.total_party_a();
    let total_b = total_pop - total_a;
    if total_b == 0 {
        return Err(MetricsError::PartyBEmpty);
    }
    let seats_a = stats.iter().filter(|s| s.winner == Party::A).count() as u64;
    let seats_b = u64::from(map.kappa()) - seats_a;
    if seats_b == 0 {
        // Fallback: factor = (PartyA(S)/Pop(S))^(-1), exactly rational.
        return Ok(SeatVoteFactor {
            pow_q: BigRational::new(BigInt::from(total_pop), BigInt::from(total_a)),
            q: 1,
        });
    }
    if seats_a == 0 {
        return Err(MetricsError::SeatsAZero);
    }
    let p = cfg
        .rho
        .numer()
        .to_i32()
        .filter(|v| *v > 0)
        .ok_or(MetricsError::RhoTooLarge)?;
    let q = cfg
        .rho
        .denom()
        .to_i32()
        .filter(|v| *v > 0)
        .ok_or(MetricsError::RhoTooLarge)?;
    // T^q = (vA/vB)^p and R^q, both exact rationals.
    let t_pow_q = BigRational::new(BigInt::from(total_a), BigInt::from(total_b)).pow(p);
    let r_pow_q = BigRational::new(BigInt::from(seats_a), BigInt::from(seats_b)).pow(q);
    let ratio = &r_pow_q / &t_pow_q;
    let inverse = ratio.recip();
    Ok(SeatVoteFactor {
        pow_q: ratio.max(inverse),
        q: q as u32,
    })
}

/// The multiplicative constant of the compactness score.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CompactnessConstant {
    /// The conventional `c = 4*pi`; scores become rational multiples of
    /// pi and pi stays symbolic.
    FourPi,
    /// A plain rational constant.
    Rational(BigRational),
}

/// A compactness score: either a rational coefficient of pi (for the
/// conventional constant) or a plain rational.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CompactnessScore {
    PiMultiple(BigRational),
    Plain(BigRational),
}

impl CompactnessScore {
    pub fn approx(&self) -> f64 {
        match self {
            CompactnessScore::PiMultiple(r) => {
                r.to_f64().unwrap_or(f64::INFINITY) * std::f64::consts::PI
            }
            CompactnessScore::Plain(r) => r.to_f64().unwrap_or(f64::INFINITY),
        }
    }
}

/// Polsby-Popper score `c * A / B^2` of a connected grid district:
/// `A` = cell count, `B` = unit boundary edges (grid sides with the
/// district on exactly one side, map exterior included).
pub fn polsby_popper(
    map: &MapInstance,
    district_cells: &[CellIx],
    constant: &CompactnessConstant,
) -> Result<CompactnessScore, MetricsError> {
    if !map.is_grid() {
        return Err(MetricsError::PlanarTopologyUnsupported);
    }
    if !is_connected(map, district_cells)? {
        return Err(MetricsError::DisconnectedDistrict);
    }
    let member: std::collections::HashSet<CellIx> = district_cells.iter().copied().collect();
    let internal_edges: u64 = district_cells
        .iter()
        .map(|&u| {
            map.neighbors(u)
                .iter()
                .filter(|v| member.contains(v))
                .count() as u64
        })
        .sum::<u64>()
        / 2;
    let area = district_cells.len() as u64;
    let boundary = 4 * area - 2 * internal_edges;
    let a_over_b2 = BigRational::new(BigInt::from(area), BigInt::from(boundary * boundary));
    Ok(match constant {
        CompactnessConstant::FourPi => CompactnessScore::PiMultiple(rat_i(4) * a_over_b2),
        CompactnessConstant::Rational(c) => CompactnessScore::Plain(c * a_over_b2),
    })
}

/// Per-district check `L1 <= score <= L2` under the conventional
/// `4*pi` constant, with bounds given as rational coefficients of pi.
/// Returns one verdict per district, in district order.
pub fn compactness_check(
    map: &MapInstance,
    plan: &Plan,
    l1_pi: &BigRational,
    l2_pi: &BigRational,
) -> Result<Vec<bool>, MetricsError> {
    if l1_pi > l2_pi {
        return Err(MetricsError::BoundsEmpty);
    }
    plan.validate_total(map).map_err(MetricsError::Model)?;
    let mut out = Vec::with_capacity(map.kappa() as usize);
    for d in 0..map.kappa() as u16 {
        let cells = plan.district_cells(d);
        let score = polsby_popper(map, &cells, &CompactnessConstant::FourPi)?;
        let coeff = match score {
            CompactnessScore::PiMultiple(c) => c,
            CompactnessScore::Plain(_) => unreachable!("FourPi yields a pi multiple"),
        };
        out.push(coeff >= *l1_pi && coeff <= *l2_pi);
    }
    Ok(out)
}
