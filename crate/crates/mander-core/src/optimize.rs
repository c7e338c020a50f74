//! Boundary-flip local search over valid plans: seeded region growing
//! with balance repair for initial plans, exhaustive single-cell flip
//! moves that preserve validity, and hill-climbing or simulated
//! annealing over them with independent restarts.
//!
//! Restarts run in parallel but the outcome is deterministic: each
//! restart derives its own RNG stream from (seed, restart index), and
//! the merge prefers better value, then lower restart index. Objective
//! bookkeeping is exact; floating point enters only the annealing
//! acceptance probability.

use crate::enumerate::{Objective, ObjectiveValue};
use crate::model::{CellIx, MapInstance, ModelError, Party, Plan};
use crate::validity::{BalanceCriterion, ValidityError};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OptimizeError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Validity(#[from] ValidityError),
    #[error("no valid plan found within the construction budget")]
    NoValidPlanFound,
    #[error("invalid search parameters: {0}")]
    InvalidParams(&'static str),
}

/// Local-search configuration.
#[derive(Debug, Clone)]
pub struct SearchParams {
    pub seed: u64,
    /// Independent restarts; at least 1.
    pub restarts: u32,
    /// Iteration cap per restart.
    pub max_iters: u64,
    /// `Some((t0, decay))` anneals with geometric cooling, `None`
    /// hill-climbs. Requires `t0 > 0` and `decay` in (0, 1).
    pub temperature_schedule: Option<(BigRational, BigRational)>,
}

impl SearchParams {
    fn validate(&self) -> Result<(), OptimizeError> {
        if self.restarts == 0 {
            return Err(OptimizeError::InvalidParams("restarts must be at least 1"));
        }
        if let Some((t0, decay)) = &self.temperature_schedule {
            if !t0.is_positive() {
                return Err(OptimizeError::InvalidParams("temperature must be positive"));
            }
            if !decay.is_positive() || *decay >= BigRational::one() {
                return Err(OptimizeError::InvalidParams("decay must lie in (0, 1)"));
            }
        }
        Ok(())
    }
}

/// A single-cell reassignment between adjacent districts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Move {
    pub cell: CellIx,
    pub from: u16,
    pub to: u16,
}

/// One per-iteration snapshot of a restart's current plan.
#[derive(Debug, Clone)]
pub struct TracePoint {
    pub restart: u32,
    pub iter: u64,
    pub value: ObjectiveValue,
    /// False for a rejected annealing proposal (plan unchanged).
    pub accepted: bool,
    pub plan: Plan,
}

/// Search outcome: the best plan over all restarts plus the full
/// per-iteration trace in restart order.
#[derive(Debug, Clone)]
pub struct OptimizeOutcome {
    pub plan: Plan,
    pub value: ObjectiveValue,
    pub trace: Vec<TracePoint>,
    /// Restarts that produced a valid initial plan and a clean
    /// objective value.
    pub restarts_succeeded: u32,
}

fn district_pops(map: &MapInstance, plan: &Plan) -> Vec<u64> {
    let mut pops = vec![0u64; map.kappa() as usize];
    for (c, &d) in plan.assignment.iter().enumerate() {
        pops[d as usize] += map.cell(c as CellIx).pop;
    }
    pops
}

/// True when `district` minus `cell` stays connected and non-empty.
fn donor_survives(map: &MapInstance, plan: &Plan, cell: CellIx, district: u16) -> bool {
    let donor: Vec<CellIx> = plan
        .assignment
        .iter()
        .enumerate()
        .filter(|&(c, &d)| d == district && c as CellIx != cell)
        .map(|(c, _)| c as CellIx)
        .collect();
    if donor.is_empty() {
        return false;
    }
    let mut seen = vec![false; map.cell_count()];
    let mut stack = vec![donor[0]];
    seen[donor[0] as usize] = true;
    let mut visited = 0usize;
    while let Some(u) = stack.pop() {
        visited += 1;
        for &nb in map.neighbors(u) {
            if nb != cell
                && plan.assignment[nb as usize] == district
                && !seen[nb as usize]
            {
                seen[nb as usize] = true;
                stack.push(nb);
            }
        }
    }
    visited == donor.len()
}

/// All single-cell moves from a valid plan that keep the plan valid:
/// the cell must touch the receiving district, the donor must stay
/// non-empty and connected, and the new populations must satisfy the
/// criterion. Sorted by (cell, to-district).
pub fn boundary_flip_moves(
    map: &MapInstance,
    plan: &Plan,
    criterion: &BalanceCriterion,
) -> Vec<Move> {
    let pops = district_pops(map, plan);
    let total = map.total_pop();
    let n_cells = map.cell_count();
    let mut moves = Vec::new();
    for c in 0..n_cells as CellIx {
        let from = plan.assignment[c as usize];
        let mut targets: Vec<u16> = map
            .neighbors(c)
            .iter()
            .map(|&nb| plan.assignment[nb as usize])
            .filter(|&d| d != from)
            .collect();
        targets.sort_unstable();
        targets.dedup();
        if targets.is_empty() {
            continue;
        }
        if !donor_survives(map, plan, c, from) {
            continue;
        }
        let cpop = map.cell(c).pop;
        for to in targets {
            let mut new_pops = pops.clone();
            new_pops[from as usize] -= cpop;
            new_pops[to as usize] += cpop;
            if criterion.check(&new_pops, total, n_cells) {
                moves.push(Move { cell: c, from, to });
            }
        }
    }
    moves
}

/// Grows kappa districts from random seed cells by balanced BFS, then
/// sweeps any enclosed leftovers into an adjacent district.
fn region_grow(map: &MapInstance, rng: &mut ChaCha8Rng) -> Plan {
    let n = map.cell_count();
    let kappa = map.kappa() as usize;
    let mut order: Vec<CellIx> = (0..n as CellIx).collect();
    // Partial Fisher-Yates: pick kappa distinct seed cells.
    for i in 0..kappa {
        let j = rng.random_range(i..n);
        order.swap(i, j);
    }
    let mut assignment = vec![u16::MAX; n];
    let mut pops = vec![0u64; kappa];
    let mut frontiers: Vec<std::collections::VecDeque<CellIx>> = vec![Default::default(); kappa];
    for (d, &seed) in order.iter().take(kappa).enumerate() {
        assignment[seed as usize] = d as u16;
        pops[d] += map.cell(seed).pop;
        for &nb in map.neighbors(seed) {
            frontiers[d].push_back(nb);
        }
    }
    loop {
        // Lightest district with a non-empty frontier grows next.
        let mut pick: Option<usize> = None;
        for d in 0..kappa {
            if frontiers[d].is_empty() {
                continue;
            }
            if pick.is_none_or(|p| pops[d] < pops[p]) {
                pick = Some(d);
            }
        }
        let Some(d) = pick else { break };
        let c = frontiers[d].pop_front().expect("frontier non-empty");
        if assignment[c as usize] != u16::MAX {
            continue;
        }
        assignment[c as usize] = d as u16;
        pops[d] += map.cell(c).pop;
        for &nb in map.neighbors(c) {
            if assignment[nb as usize] == u16::MAX {
                frontiers[d].push_back(nb);
            }
        }
    }
    // Attach any cells walled off from every frontier to an assigned
    // neighbor; the map is connected, so this terminates.
    loop {
        let mut changed = false;
        for c in 0..n {
            if assignment[c] != u16::MAX {
                continue;
            }
            if let Some(&nb) = map
                .neighbors(c as CellIx)
                .iter()
                .find(|&&nb| assignment[nb as usize] != u16::MAX)
            {
                assignment[c] = assignment[nb as usize];
                changed = true;
            }
        }
        if assignment.iter().all(|&d| d != u16::MAX) {
            break;
        }
        assert!(changed, "connected map always leaves an attachable cell");
    }
    Plan { assignment }
}

/// Repairs population balance by spread-reducing boundary flips.
/// Returns true when the criterion holds on exit.
fn repair_balance(map: &MapInstance, plan: &mut Plan, criterion: &BalanceCriterion) -> bool {
    let total = map.total_pop();
    let n_cells = map.cell_count();
    let mut pops = district_pops(map, plan);
    for _ in 0..1000 {
        if criterion.check(&pops, total, n_cells) {
            return true;
        }
        let spread = pops.iter().max().unwrap() - pops.iter().min().unwrap();
        // Best spread-reducing flip, ties to lowest (cell, to).
        let mut best: Option<(u64, Move)> = None;
        for c in 0..n_cells as CellIx {
            let from = plan.assignment[c as usize];
            let mut targets: Vec<u16> = map
                .neighbors(c)
                .iter()
                .map(|&nb| plan.assignment[nb as usize])
                .filter(|&d| d != from)
                .collect();
            targets.sort_unstable();
            targets.dedup();
            if targets.is_empty() || !donor_survives(map, plan, c, from) {
                continue;
            }
            let cpop = map.cell(c).pop;
            for to in targets {
                let mut new_pops = pops.clone();
                new_pops[from as usize] -= cpop;
                new_pops[to as usize] += cpop;
                let new_spread =
                    new_pops.iter().max().unwrap() - new_pops.iter().min().unwrap();
                if new_spread < spread && best.as_ref().is_none_or(|(s, _)| new_spread < *s) {
                    best = Some((new_spread, Move { cell: c, from, to }));
                }
            }
        }
        let Some((_, mv)) = best else { return false };
        plan.assignment[mv.cell as usize] = mv.to;
        let cpop = map.cell(mv.cell).pop;
        pops[mv.from as usize] -= cpop;
        pops[mv.to as usize] += cpop;
    }
    criterion.check(&pops, total, n_cells)
}

/// Builds a valid plan by seeded region growing plus balance repair,
/// retrying with fresh random seeds up to a fixed attempt budget.
pub fn initial_plan(
    map: &MapInstance,
    criterion: &BalanceCriterion,
    seed: u64,
) -> Result<Plan, OptimizeError> {
    criterion.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..32 {
        let mut plan = region_grow(map, &mut rng);
        if repair_balance(map, &mut plan, criterion) {
            return Ok(plan);
        }
    }
    Err(OptimizeError::NoValidPlanFound)
}

struct RestartOutcome {
    best_plan: Plan,
    best_value: ObjectiveValue,
    trace: Vec<TracePoint>,
}

fn value_improves(objective: &Objective, new: &ObjectiveValue, old: &ObjectiveValue) -> bool {
    if minimizing(objective) {
        new < old
    } else {
        new > old
    }
}

fn minimizing(objective: &Objective) -> bool {
    !matches!(
        objective,
        Objective::MaximizeEffGap | Objective::MaximizeSeatsA
    )
}

#[allow(clippy::too_many_arguments)]
fn run_restart(
    map: &MapInstance,
    criterion: &BalanceCriterion,
    objective: &Objective,
    params: &SearchParams,
    tie_pref: Party,
    restart: u32,
) -> Option<RestartOutcome> {
    let restart_seed = params
        .seed
        .wrapping_add(u64::from(restart).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let mut rng = ChaCha8Rng::seed_from_u64(restart_seed);
    let mut plan = initial_plan(map, criterion, restart_seed).ok()?;
    let mut value = objective.evaluate(map, &plan, tie_pref).ok()?;
    let mut trace = vec![TracePoint {
        restart,
        iter: 0,
        value: value.clone(),
        accepted: true,
        plan: plan.clone(),
    }];
    let mut best_plan = plan.clone();
    let mut best_value = value.clone();
    let mut temperature = params
        .temperature_schedule
        .as_ref()
        .map(|(t0, _)| t0.clone());
    for iter in 1..=params.max_iters {
        let moves = boundary_flip_moves(map, &plan, criterion);
        if moves.is_empty() {
            break;
        }
        let accepted;
        match &mut temperature {
            None => {
                // Hill-climb: best strictly improving move; the sorted
                // move list makes ties resolve to lowest (cell, to).
                let mut chosen: Option<(ObjectiveValue, &Move)> = None;
                for mv in &moves {
                    let mut cand = plan.clone();
                    cand.assignment[mv.cell as usize] = mv.to;
                    let Ok(v) = objective.evaluate(map, &cand, tie_pref) else {
                        continue;
                    };
                    let beats_current = value_improves(objective, &v, &value);
                    let beats_chosen = chosen
                        .as_ref()
                        .is_none_or(|(cv, _)| value_improves(objective, &v, cv));
                    if beats_current && beats_chosen {
                        chosen = Some((v, mv));
                    }
                }
                let Some((v, mv)) = chosen else { break };
                plan.assignment[mv.cell as usize] = mv.to;
                value = v;
                accepted = true;
            }
            Some(t) => {
                let mv = moves[rng.random_range(0..moves.len())];
                let mut cand = plan.clone();
                cand.assignment[mv.cell as usize] = mv.to;
                match objective.evaluate(map, &cand, tie_pref) {
                    Err(_) => accepted = false,
                    Ok(v) => {
                        let improves = !value_improves(objective, &value, &v);
                        let take = if improves {
                            true
                        } else {
                            // Worsening move: exponential acceptance on
                            // the numeric gap at current temperature.
                            let gap = (value.approx() - v.approx()).abs();
                            let t_f = t.to_f64().unwrap_or(f64::MIN_POSITIVE);
                            rng.random_range(0.0..1.0) < (-gap / t_f).exp()
                        };
                        if take {
                            plan = cand;
                            value = v;
                        }
                        accepted = take;
                    }
                }
                let decay = &params
                    .temperature_schedule
                    .as_ref()
                    .expect("schedule present in annealing branch")
                    .1;
                *t *= decay;
            }
        }
        if value_improves(objective, &value, &best_value) {
            best_value = value.clone();
            best_plan = plan.clone();
        }
        trace.push(TracePoint {
            restart,
            iter,
            value: value.clone(),
            accepted,
            plan: plan.clone(),
        });
    }
    Some(RestartOutcome {
        best_plan,
        best_value,
        trace,
    })
}

/// Runs `params.restarts` independent local searches and returns the
/// best plan found, with the concatenated per-iteration trace.
/// Deterministic for fixed inputs, including across thread schedules.
pub fn optimize(
    map: &MapInstance,
    criterion: &BalanceCriterion,
    objective: &Objective,
    params: &SearchParams,
    tie_pref: Party,
) -> Result<OptimizeOutcome, OptimizeError> {
    params.validate()?;
    criterion.validate()?;
    let outcomes: Vec<Option<RestartOutcome>> = (0..params.restarts)
        .into_par_iter()
        .map(|r| run_restart(map, criterion, objective, params, tie_pref, r))
        .collect();
    let mut best: Option<(ObjectiveValue, Plan)> = None;
    let mut trace = Vec::new();
    let mut succeeded = 0u32;
    for outcome in outcomes.into_iter().flatten() {
        succeeded += 1;
        trace.extend(outcome.trace);
        let replace = match &best {
            None => true,
            Some((bv, _)) => value_improves(objective, &outcome.best_value, bv),
        };
        if replace {
            best = Some((outcome.best_value, outcome.best_plan));
        }
    }
    let Some((value, plan)) = best else {
        return Err(OptimizeError::NoValidPlanFound);
    };
    Ok(OptimizeOutcome {
        plan,
        value,
        trace,
        restarts_succeeded: succeeded,
    })
}
