//! Exhaustive enumeration of valid plans by canonical district growth.
//!
//! Districts are generated in first-occurrence order: district d is
//! grown as a connected superset of the lowest-indexed cell not covered
//! by districts 0..d, so every unlabeled partition is visited exactly
//! once and emitted plans are already in canonical label order. Include
//! and exclude decisions over a frontier queue enumerate the connected
//! supersets; population bounds and remainder-component counts prune
//! subtrees that cannot reach a valid plan.
//!
//! A deliberately naive reference enumerator over all label vectors is
//! kept public as a cross-check for the grower.

use crate::metrics::{
    metrics_report, partisan_bias, seat_vote_factor, MetricsError, SeatVoteConfig, ShiftModel,
};
use crate::model::{CellIx, MapInstance, Party, Plan};
use crate::validity::{is_connected, BalanceCriterion, ValidityError};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use std::collections::HashSet;

const UNASSIGNED: u16 = u16::MAX;

/// An exact objective value. Seat-vote factors are irrational in
/// general, so they are carried as `(value^q, q)`; everything else is
/// plain rational (`q = 1`). All objective values are non-negative,
/// which makes cross-exponent comparison by power-lifting sound.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ObjectiveValue {
    Rational(BigRational),
    Pow { pow_q: BigRational, q: u32 },
}

impl ObjectiveValue {
    fn as_pow(&self) -> (&BigRational, u32) {
        match self {
            ObjectiveValue::Rational(r) => (r, 1),
            ObjectiveValue::Pow { pow_q, q } => (pow_q, *q),
        }
    }

    /// Lossy numeric image for display.
    pub fn approx(&self) -> f64 {
        use num_traits::ToPrimitive;
        let (v, q) = self.as_pow();
        let f = v.to_f64().unwrap_or(f64::INFINITY);
        if q == 1 {
            f
        } else {
            f.powf(1.0 / f64::from(q))
        }
    }
}

impl Ord for ObjectiveValue {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        let (a, qa) = self.as_pow();
        let (b, qb) = other.as_pow();
        if qa == qb {
            return a.cmp(b);
        }
        let l = qa.lcm(&qb);
        a.pow((l / qa) as i32).cmp(&b.pow((l / qb) as i32))
    }
}

impl PartialOrd for ObjectiveValue {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// What the enumerator optimizes over the valid plans it visits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Objective {
    /// Minimize the doubled efficiency gap.
    MinimizeEffGap,
    /// Maximize the doubled efficiency gap.
    MaximizeEffGap,
    MaximizeSeatsA,
    MinimizeSeatsA,
    MinimizeSeatVoteFactor { rho: BigRational },
    MinimizeBias { shift: ShiftModel },
}

impl Objective {
    pub(crate) fn minimizing(&self) -> bool {
        !matches!(self, Objective::MaximizeEffGap | Objective::MaximizeSeatsA)
    }

    /// Exact value of this objective on one plan. Plan-dependent
    /// failures (an infeasible shift, a zero seat count) surface as
    /// errors; the enumerator counts such plans but excludes them from
    /// best tracking.
    pub fn evaluate(
        &self,
        map: &MapInstance,
        plan: &Plan,
        tie_pref: Party,
    ) -> Result<ObjectiveValue, MetricsError> {
        match self {
            Objective::MinimizeEffGap | Objective::MaximizeEffGap => {
                let report = metrics_report(map, plan, tie_pref)?;
                Ok(ObjectiveValue::Rational(BigRational::from_integer(
                    BigInt::from(report.effgap_x2),
                )))
            }
            Objective::MaximizeSeatsA | Objective::MinimizeSeatsA => {
                let report = metrics_report(map, plan, tie_pref)?;
                Ok(ObjectiveValue::Rational(BigRational::from_integer(
                    BigInt::from(report.raw_seats_a),
                )))
            }
            Objective::MinimizeSeatVoteFactor { rho } => {
                let cfg = SeatVoteConfig {
                    rho: rho.clone(),
                    tie_pref,
                };
                let f = seat_vote_factor(map, plan, &cfg)?;
                Ok(if f.q == 1 {
                    ObjectiveValue::Rational(f.pow_q)
                } else {
                    ObjectiveValue::Pow {
                        pow_q: f.pow_q,
                        q: f.q,
                    }
                })
            }
            Objective::MinimizeBias { shift } => {
                let bias = partisan_bias(map, plan, shift, tie_pref)?;
                Ok(ObjectiveValue::Rational(bias))
            }
        }
    }
}

/// Enumeration knobs. `node_budget` bounds search-tree nodes; hitting
/// it stops the search with `exhausted = false` rather than erroring.
#[derive(Debug, Clone)]
pub struct EnumerateOptions {
    pub objective: Option<Objective>,
    pub tie_pref: Party,
    pub node_budget: Option<u64>,
    /// Cap on retained optimal plans; ties past the cap set `truncated`.
    pub max_best_plans: usize,
}

impl Default for EnumerateOptions {
    fn default() -> Self {
        EnumerateOptions {
            objective: None,
            tie_pref: Party::A,
            node_budget: None,
            max_best_plans: 16,
        }
    }
}

/// Outcome of an enumeration run.
#[derive(Debug, Clone)]
pub struct EnumerationResult {
    /// Valid plans visited (all of them when `exhausted`).
    pub count: u64,
    /// Best objective value over visited plans, when an objective was
    /// given and at least one plan evaluated cleanly.
    pub best_value: Option<ObjectiveValue>,
    /// Plans achieving `best_value`, up to the configured cap.
    pub best_plans: Vec<Plan>,
    /// True when the search space was fully explored within budget.
    pub exhausted: bool,
    /// Search-tree nodes expanded.
    pub nodes_visited: u64,
    /// True when optimal ties were dropped at the plan cap.
    pub truncated: bool,
}

struct Engine<'a, 'v> {
    map: &'a MapInstance,
    kappa: u16,
    lo: u64,
    hi: u64,
    criterion: &'a BalanceCriterion,
    opts: &'a EnumerateOptions,
    assignment: Vec<u16>,
    in_cand: Vec<bool>,
    part_pops: Vec<u64>,
    count: u64,
    nodes: u64,
    stopped: bool,
    best_value: Option<ObjectiveValue>,
    best_plans: Vec<Plan>,
    truncated: bool,
    scratch: Vec<u32>,
    visit: Option<&'v mut dyn FnMut(&Plan)>,
}

impl<'a, 'v> Engine<'a, 'v> {
    fn tick(&mut self) -> bool {
        self.nodes += 1;
        if let Some(b) = self.opts.node_budget {
            if self.nodes > b {
                self.stopped = true;
            }
        }
        self.stopped
    }

    fn next_part(&mut self, parts_done: u16) {
        if self.tick() {
            return;
        }
        let root = match self.assignment.iter().position(|&d| d == UNASSIGNED) {
            None => {
                if parts_done == self.kappa {
                    self.finalize();
                }
                return;
            }
            Some(r) => r as CellIx,
        };
        if parts_done >= self.kappa {
            return;
        }
        let root_pop = self.map.cell(root).pop;
        if root_pop > self.hi {
            return;
        }
        if parts_done == self.kappa - 1 {
            // The last district must be exactly the remaining cells.
            let rest: Vec<CellIx> = (0..self.assignment.len() as CellIx)
                .filter(|&c| self.assignment[c as usize] == UNASSIGNED)
                .collect();
            let pop: u64 = rest.iter().map(|&c| self.map.cell(c).pop).sum();
            if pop < self.lo || pop > self.hi {
                return;
            }
            if !is_connected(self.map, &rest).expect("cells are in range") {
                return;
            }
            for &c in &rest {
                self.assignment[c as usize] = parts_done;
            }
            self.part_pops.push(pop);
            self.finalize();
            self.part_pops.pop();
            for &c in &rest {
                self.assignment[c as usize] = UNASSIGNED;
            }
            return;
        }
        self.assignment[root as usize] = parts_done;
        self.in_cand[root as usize] = true;
        let mut cand: Vec<CellIx> = Vec::new();
        for &nb in self.map.neighbors(root) {
            if self.assignment[nb as usize] == UNASSIGNED && !self.in_cand[nb as usize] {
                self.in_cand[nb as usize] = true;
                cand.push(nb);
            }
        }
        self.grow(parts_done, root_pop, &mut cand, 0);
        for &c in &cand {
            self.in_cand[c as usize] = false;
        }
        self.in_cand[root as usize] = false;
        self.assignment[root as usize] = UNASSIGNED;
    }

    fn grow(&mut self, part: u16, pop: u64, cand: &mut Vec<CellIx>, pos: usize) {
        if self.tick() {
            return;
        }
        if pos == cand.len() {
            self.seal_part(part, pop, cand);
            return;
        }
        let c = cand[pos];
        let cpop = self.map.cell(c).pop;
        if pop + cpop <= self.hi {
            self.assignment[c as usize] = part;
            let old = cand.len();
            for &nb in self.map.neighbors(c) {
                if self.assignment[nb as usize] == UNASSIGNED && !self.in_cand[nb as usize] {
                    self.in_cand[nb as usize] = true;
                    cand.push(nb);
                }
            }
            self.grow(part, pop + cpop, cand, pos + 1);
            for &added in &cand[old..] {
                self.in_cand[added as usize] = false;
            }
            cand.truncate(old);
            self.assignment[c as usize] = UNASSIGNED;
        }
        self.grow(part, pop, cand, pos + 1);
    }

    /// The grown part has no further frontier decisions; vet it and
    /// recurse into the next district.
    fn seal_part(&mut self, part: u16, pop: u64, cand: &[CellIx]) {
        if pop < self.lo {
            return;
        }
        let remaining_districts = u64::from(self.kappa - part - 1);
        let (ncomp, rest_pop, min_comp_pop) = self.remainder_components();
        if remaining_districts == 0 {
            if ncomp != 0 {
                return;
            }
        } else {
            if ncomp == 0 || ncomp > remaining_districts {
                return;
            }
            if u128::from(rest_pop) < u128::from(remaining_districts) * u128::from(self.lo)
                || u128::from(rest_pop) > u128::from(remaining_districts) * u128::from(self.hi)
            {
                return;
            }
            if min_comp_pop < self.lo {
                return;
            }
        }
        // Excluded candidates stay unassigned; unblock them for the
        // remaining districts.
        let blocked: Vec<CellIx> = cand
            .iter()
            .copied()
            .filter(|&c| self.assignment[c as usize] == UNASSIGNED)
            .collect();
        for &c in &blocked {
            self.in_cand[c as usize] = false;
        }
        self.part_pops.push(pop);
        self.next_part(part + 1);
        self.part_pops.pop();
        for &c in &blocked {
            self.in_cand[c as usize] = true;
        }
    }

    /// Components of the unassigned region: count, total population,
    /// and the smallest component population (u64::MAX when empty).
    fn remainder_components(&mut self) -> (u64, u64, u64) {
        let n = self.assignment.len();
        let seen = &mut self.scratch;
        seen.clear();
        seen.resize(n, 0);
        let mut ncomp = 0u64;
        let mut total = 0u64;
        let mut min_comp = u64::MAX;
        let mut queue: Vec<CellIx> = Vec::new();
        for start in 0..n {
            if self.assignment[start] != UNASSIGNED || seen[start] == 1 {
                continue;
            }
            ncomp += 1;
            let mut comp_pop = 0u64;
            seen[start] = 1;
            queue.clear();
            queue.push(start as CellIx);
            while let Some(u) = queue.pop() {
                comp_pop += self.map.cell(u).pop;
                for &nb in self.map.neighbors(u) {
                    if self.assignment[nb as usize] == UNASSIGNED && seen[nb as usize] == 0 {
                        seen[nb as usize] = 1;
                        queue.push(nb);
                    }
                }
            }
            total += comp_pop;
            min_comp = min_comp.min(comp_pop);
        }
        (ncomp, total, min_comp)
    }

    fn finalize(&mut self) {
        if !self
            .criterion
            .check(&self.part_pops, self.map.total_pop(), self.map.cell_count())
        {
            return;
        }
        self.count += 1;
        if self.visit.is_some() || self.opts.objective.is_some() {
            let plan = Plan {
                assignment: self.assignment.clone(),
            };
            if let Some(v) = self.visit.as_deref_mut() {
                v(&plan);
            }
            self.rank(plan);
        }
    }

    fn rank(&mut self, plan: Plan) {
        let Some(objective) = &self.opts.objective else {
            return;
        };
        let value = match objective.evaluate(self.map, &plan, self.opts.tie_pref) {
            Ok(v) => v,
            Err(_) => return,
        };
        let better = match &self.best_value {
            None => true,
            Some(best) => {
                if objective.minimizing() {
                    value < *best
                } else {
                    value > *best
                }
            }
        };
        if better {
            self.best_value = Some(value);
            self.best_plans.clear();
            self.best_plans.push(plan);
            self.truncated = false;
        } else if self.best_value.as_ref() == Some(&value) {
            if self.best_plans.len() < self.opts.max_best_plans {
                self.best_plans.push(plan);
            } else {
                self.truncated = true;
            }
        }
    }
}

/// Enumerates every valid plan of `map` under `criterion`, optionally
/// tracking an objective over them.
pub fn enumerate_plans(
    map: &MapInstance,
    criterion: &BalanceCriterion,
    opts: &EnumerateOptions,
) -> Result<EnumerationResult, ValidityError> {
    enumerate_plans_with(map, criterion, opts, None)
}

/// Enumerates every valid plan and invokes `visit` on each one as it is
/// found. Returns `(count, exhausted)`; `exhausted = false` means the
/// node budget cut the walk short.
pub fn enumerate_plans_visit(
    map: &MapInstance,
    criterion: &BalanceCriterion,
    node_budget: Option<u64>,
    visit: &mut dyn FnMut(&Plan),
) -> Result<(u64, bool), ValidityError> {
    let opts = EnumerateOptions {
        node_budget,
        ..EnumerateOptions::default()
    };
    let res = enumerate_plans_with(map, criterion, &opts, Some(visit))?;
    Ok((res.count, res.exhausted))
}

fn enumerate_plans_with(
    map: &MapInstance,
    criterion: &BalanceCriterion,
    opts: &EnumerateOptions,
    visit: Option<&mut dyn FnMut(&Plan)>,
) -> Result<EnumerationResult, ValidityError> {
    criterion.validate()?;
    let (lo, hi) = criterion.district_pop_bounds(map.total_pop(), map.kappa(), map.cell_count());
    let n = map.cell_count();
    let mut engine = Engine {
        map,
        kappa: map.kappa() as u16,
        lo,
        hi,
        criterion,
        opts,
        assignment: vec![UNASSIGNED; n],
        in_cand: vec![false; n],
        part_pops: Vec::with_capacity(map.kappa() as usize),
        count: 0,
        nodes: 0,
        stopped: false,
        best_value: None,
        best_plans: Vec::new(),
        truncated: false,
        scratch: Vec::new(),
        visit,
    };
    engine.next_part(0);
    Ok(EnumerationResult {
        count: engine.count,
        best_value: engine.best_value,
        best_plans: engine.best_plans,
        exhausted: !engine.stopped,
        nodes_visited: engine.nodes,
        truncated: engine.truncated,
    })
}

/// All partitions of the whole map into connected parts whose
/// populations lie in `[lo, hi]`, with no constraint on the number of
/// parts. Returns the count and up to `keep` of the partitions, each as
/// a list of parts in canonical (first-occurrence) order.
pub fn enumerate_window_partitions(
    map: &MapInstance,
    lo: u64,
    hi: u64,
    keep: usize,
) -> (u64, Vec<Vec<Vec<CellIx>>>) {
    struct W<'a> {
        map: &'a MapInstance,
        lo: u64,
        hi: u64,
        keep: usize,
        assignment: Vec<u16>,
        in_cand: Vec<bool>,
        count: u64,
        kept: Vec<Vec<Vec<CellIx>>>,
    }
    impl<'a> W<'a> {
        fn next_part(&mut self, parts_done: u16) {
            let root = match self.assignment.iter().position(|&d| d == UNASSIGNED) {
                None => {
                    self.count += 1;
                    if self.kept.len() < self.keep {
                        let mut parts = vec![Vec::new(); parts_done as usize];
                        for (c, &d) in self.assignment.iter().enumerate() {
                            parts[d as usize].push(c as CellIx);
                        }
                        self.kept.push(parts);
                    }
                    return;
                }
                Some(r) => r as CellIx,
            };
            let root_pop = self.map.cell(root).pop;
            if root_pop > self.hi {
                return;
            }
            self.assignment[root as usize] = parts_done;
            self.in_cand[root as usize] = true;
            let mut cand: Vec<CellIx> = Vec::new();
            for &nb in self.map.neighbors(root) {
                if self.assignment[nb as usize] == UNASSIGNED && !self.in_cand[nb as usize] {
                    self.in_cand[nb as usize] = true;
                    cand.push(nb);
                }
            }
            self.grow(parts_done, root_pop, &mut cand, 0);
            for &c in &cand {
                self.in_cand[c as usize] = false;
            }
            self.in_cand[root as usize] = false;
            self.assignment[root as usize] = UNASSIGNED;
        }

        fn grow(&mut self, part: u16, pop: u64, cand: &mut Vec<CellIx>, pos: usize) {
            if pos == cand.len() {
                if pop >= self.lo {
                    let blocked: Vec<CellIx> = cand
                        .iter()
                        .copied()
                        .filter(|&c| self.assignment[c as usize] == UNASSIGNED)
                        .collect();
                    for &c in &blocked {
                        self.in_cand[c as usize] = false;
                    }
                    self.next_part(part + 1);
                    for &c in &blocked {
                        self.in_cand[c as usize] = true;
                    }
                }
                return;
            }
            let c = cand[pos];
            let cpop = self.map.cell(c).pop;
            if pop + cpop <= self.hi {
                self.assignment[c as usize] = part;
                let old = cand.len();
                for &nb in self.map.neighbors(c) {
                    if self.assignment[nb as usize] == UNASSIGNED && !self.in_cand[nb as usize] {
                        self.in_cand[nb as usize] = true;
                        cand.push(nb);
                    }
                }
                self.grow(part, pop + cpop, cand, pos + 1);
                for &added in &cand[old..] {
                    self.in_cand[added as usize] = false;
                }
                cand.truncate(old);
                self.assignment[c as usize] = UNASSIGNED;
            }
            self.grow(part, pop, cand, pos + 1);
        }
    }
    let n = map.cell_count();
    let mut w = W {
        map,
        lo,
        hi,
        keep,
        assignment: vec![UNASSIGNED; n],
        in_cand: vec![false; n],
        count: 0,
        kept: Vec::new(),
    };
    w.next_part(0);
    (w.count, w.kept)
}

/// Reference enumerator: tries every label vector, keeps the valid
/// ones, and dedups by canonical relabeling. Exponential; use only on
/// tiny maps as an oracle for `enumerate_plans`.
pub fn naive_enumerate(
    map: &MapInstance,
    criterion: &BalanceCriterion,
) -> Result<u64, ValidityError> {
    naive_enumerate_full(map, criterion, None, Party::A).map(|(count, _)| count)
}

/// Naive oracle that also tracks the best objective value over the
/// valid plans, mirroring what `enumerate_plans` reports.
pub fn naive_enumerate_full(
    map: &MapInstance,
    criterion: &BalanceCriterion,
    objective: Option<&Objective>,
    tie_pref: Party,
) -> Result<(u64, Option<ObjectiveValue>), ValidityError> {
    criterion.validate()?;
    let n = map.cell_count();
    let kappa = map.kappa() as usize;
    assert!(
        (kappa as f64).powi(n as i32) <= 5e8,
        "naive enumeration is only for tiny instances"
    );
    let mut labels = vec![0u16; n];
    let mut seen: HashSet<Vec<u16>> = HashSet::new();
    let mut best: Option<ObjectiveValue> = None;
    loop {
        let plan = Plan {
            assignment: labels.clone(),
        };
        if plan_is_valid(map, &plan, criterion) {
            let fresh = seen.insert(plan.canonical(map.kappa()).assignment);
            if fresh {
                if let Some(obj) = objective {
                    if let Ok(value) = obj.evaluate(map, &plan, tie_pref) {
                        let better = match &best {
                            None => true,
                            Some(b) => {
                                if obj.minimizing() {
                                    value < *b
                                } else {
                                    value > *b
                                }
                            }
                        };
                        if better {
                            best = Some(value);
                        }
                    }
                }
            }
        }
        // Odometer increment over base-kappa label vectors.
        let mut i = 0;
        loop {
            if i == n {
                return Ok((seen.len() as u64, best));
            }
            labels[i] += 1;
            if (labels[i] as usize) < kappa {
                break;
            }
            labels[i] = 0;
            i += 1;
        }
    }
}

fn plan_is_valid(map: &MapInstance, plan: &Plan, criterion: &BalanceCriterion) -> bool {
    let kappa = map.kappa();
    let mut pops = vec![0u64; kappa as usize];
    let mut counts = vec![0u32; kappa as usize];
    for (c, &d) in plan.assignment.iter().enumerate() {
        pops[d as usize] += map.cell(c as CellIx).pop;
        counts[d as usize] += 1;
    }
    if counts.contains(&0) {
        return false;
    }
    for d in 0..kappa as u16 {
        let cells = plan.district_cells(d);
        if !is_connected(map, &cells).expect("cells are in range") {
            return false;
        }
    }
    criterion.check(&pops, map.total_pop(), map.cell_count())
}

/// Number of nonempty connected cell sets of at most `max_cells` cells.
/// Small-instance helper for sanity checks of the subset grower.
pub fn count_connected_subsets(map: &MapInstance, max_cells: usize) -> u64 {
    fn grow(
        map: &MapInstance,
        max_cells: usize,
        size: usize,
        cand: &mut Vec<CellIx>,
        pos: usize,
        state: &mut Vec<u8>, // 0 free, 1 in set, 2 blocked
        count: &mut u64,
    ) {
        if pos == cand.len() {
            *count += 1;
            return;
        }
        let c = cand[pos];
        if size < max_cells {
            state[c as usize] = 1;
            let old = cand.len();
            for &nb in map.neighbors(c) {
                if state[nb as usize] == 0 {
                    state[nb as usize] = 2;
                    cand.push(nb);
                }
            }
            grow(map, max_cells, size + 1, cand, pos + 1, state, count);
            for &added in &cand[old..] {
                state[added as usize] = 0;
            }
            cand.truncate(old);
            state[c as usize] = 2;
        }
        grow(map, max_cells, size, cand, pos + 1, state, count);
    }
    let n = map.cell_count();
    let mut count = 0u64;
    // Root r ranges over the minimum cell of the subset; cells below r
    // stay blocked.
    for r in 0..n {
        let mut state = vec![0u8; n];
        for s in state.iter_mut().take(r) {
            *s = 2;
        }
        state[r] = 1;
        let mut cand: Vec<CellIx> = Vec::new();
        for &nb in map.neighbors(r as CellIx) {
            if state[nb as usize] == 0 {
                state[nb as usize] = 2;
                cand.push(nb);
            }
        }
        grow(map, max_cells, 1, &mut cand, 0, &mut state, &mut count);
    }
    count
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::ratio;
    use crate::testutil::{grid_with, uniform_grid};
    use crate::validity::check_plan;
    use proptest::prelude::*;

    #[test]
    fn two_by_two_counts() {
        let map = uniform_grid(2, 2, 2);
        let loose = BalanceCriterion::AdditiveSlack(4);
        let res = enumerate_plans(&map, &loose, &EnumerateOptions::default()).unwrap();
        assert_eq!(res.count, 6);
        assert!(res.exhausted);
        let strict = BalanceCriterion::Strict;
        let res = enumerate_plans(&map, &strict, &EnumerateOptions::default()).unwrap();
        assert_eq!(res.count, 2);
    }

    #[test]
    fn one_by_three_counts() {
        let map = uniform_grid(1, 3, 2);
        let res = enumerate_plans(
            &map,
            &BalanceCriterion::AdditiveSlack(2),
            &EnumerateOptions::default(),
        )
        .unwrap();
        assert_eq!(res.count, 2);
        let res = enumerate_plans(
            &map,
            &BalanceCriterion::Strict,
            &EnumerateOptions::default(),
        )
        .unwrap();
        assert_eq!(res.count, 0);
    }

    #[test]
    fn two_by_three_strict_halves() {
        let map = uniform_grid(2, 3, 2);
        let res = enumerate_plans(
            &map,
            &BalanceCriterion::Strict,
            &EnumerateOptions::default(),
        )
        .unwrap();
        assert_eq!(res.count, 3);
    }

    #[test]
    fn singleton_heavy_partition() {
        // kappa = 5 on a 2x3 grid: sizes (1,1,1,1,2), so plans pick one
        // of the 7 grid edges as the pair; slack 2 admits all of them.
        let map = uniform_grid(2, 3, 5);
        let res = enumerate_plans(
            &map,
            &BalanceCriterion::AdditiveSlack(2),
            &EnumerateOptions::default(),
        )
        .unwrap();
        assert_eq!(res.count, 7);
        let res = enumerate_plans(
            &map,
            &BalanceCriterion::Strict,
            &EnumerateOptions::default(),
        )
        .unwrap();
        assert_eq!(res.count, 0);
    }

    #[test]
    fn emitted_plans_are_canonical_and_valid() {
        let map = grid_with(2, 3, &[(3, 1), (2, 2), (4, 0), (1, 1), (2, 0), (3, 3)], 3);
        let criterion = BalanceCriterion::AdditiveSlack(4);
        let opts = EnumerateOptions {
            objective: Some(Objective::MaximizeSeatsA),
            max_best_plans: 64,
            ..EnumerateOptions::default()
        };
        let res = enumerate_plans(&map, &criterion, &opts).unwrap();
        assert!(res.count > 0);
        for plan in &res.best_plans {
            assert!(check_plan(&map, plan, &criterion).unwrap().is_valid());
            assert_eq!(plan.assignment, plan.canonical(map.kappa()).assignment);
        }
    }

    #[test]
    fn objective_selects_extremes() {
        // Vertical split ties votes per district; horizontal split packs
        // them. A at cells 0 and 2 (one per row).
        let map = grid_with(2, 2, &[(2, 2), (2, 0), (2, 2), (2, 0)], 2);
        let min = enumerate_plans(
            &map,
            &BalanceCriterion::Strict,
            &EnumerateOptions {
                objective: Some(Objective::MinimizeEffGap),
                ..EnumerateOptions::default()
            },
        )
        .unwrap();
        assert_eq!(min.count, 2);
        assert_eq!(
            min.best_value,
            Some(ObjectiveValue::Rational(ratio(0, 1)))
        );
        assert_eq!(min.best_plans.len(), 1);
        // Columns of the 2x2 grid: cells (0, 2) and (1, 3).
        assert_eq!(min.best_plans[0].assignment, vec![0, 1, 0, 1]);

        let max = enumerate_plans(
            &map,
            &BalanceCriterion::Strict,
            &EnumerateOptions {
                objective: Some(Objective::MaximizeEffGap),
                ..EnumerateOptions::default()
            },
        )
        .unwrap();
        assert_eq!(
            max.best_value,
            Some(ObjectiveValue::Rational(ratio(8, 1)))
        );
        assert_eq!(max.best_plans[0].assignment, vec![0, 0, 1, 1]);

        let seats = enumerate_plans(
            &map,
            &BalanceCriterion::Strict,
            &EnumerateOptions {
                objective: Some(Objective::MaximizeSeatsA),
                ..EnumerateOptions::default()
            },
        )
        .unwrap();
        assert_eq!(
            seats.best_value,
            Some(ObjectiveValue::Rational(ratio(2, 1)))
        );
    }

    #[test]
    fn budget_stops_search_without_error() {
        let map = uniform_grid(3, 4, 3);
        let opts = EnumerateOptions {
            node_budget: Some(10),
            ..EnumerateOptions::default()
        };
        let res = enumerate_plans(&map, &BalanceCriterion::AdditiveSlack(8), &opts).unwrap();
        assert!(!res.exhausted);
        let full = enumerate_plans(
            &map,
            &BalanceCriterion::AdditiveSlack(8),
            &EnumerateOptions::default(),
        )
        .unwrap();
        assert!(full.exhausted);
        assert!(res.count <= full.count);
    }

    #[test]
    fn matches_naive_oracle_on_fixed_grids() {
        let cases: Vec<(MapInstance, BalanceCriterion)> = vec![
            (uniform_grid(2, 3, 2), BalanceCriterion::Strict),
            (uniform_grid(2, 3, 2), BalanceCriterion::AdditiveSlack(4)),
            (uniform_grid(2, 3, 3), BalanceCriterion::AdditiveSlack(2)),
            (uniform_grid(3, 3, 3), BalanceCriterion::Strict),
            (
                uniform_grid(3, 3, 2),
                BalanceCriterion::MultiplicativeRatio(ratio(1, 4)),
            ),
            (
                grid_with(2, 4, &[(3, 0), (1, 1), (4, 2), (2, 0), (5, 5), (1, 0), (2, 2), (2, 1)], 3),
                BalanceCriterion::AdditiveSlack(5),
            ),
        ];
        for (map, criterion) in cases {
            let fast = enumerate_plans(&map, &criterion, &EnumerateOptions::default()).unwrap();
            let slow = naive_enumerate(&map, &criterion).unwrap();
            assert_eq!(fast.count, slow, "criterion {criterion:?}");
            assert!(fast.exhausted);
        }
    }

    #[test]
    fn connected_subset_counts() {
        let map = uniform_grid(1, 3, 2);
        assert_eq!(count_connected_subsets(&map, 3), 6);
        let map = uniform_grid(2, 2, 2);
        assert_eq!(count_connected_subsets(&map, 2), 8);
        // All connected subsets of the 2x2 grid: 4 + 4 + 4 + 1.
        assert_eq!(count_connected_subsets(&map, 4), 13);
    }

    #[test]
    fn window_partitions_on_path() {
        let map = grid_with(1, 3, &[(1, 0), (1, 0), (1, 0)], 2);
        let (count, kept) = enumerate_window_partitions(&map, 1, 2, 16);
        // {a}{b}{c}, {ab}{c}, {a}{bc}.
        assert_eq!(count, 3);
        assert_eq!(kept.len(), 3);
        for parts in &kept {
            let mut cells: Vec<CellIx> = parts.iter().flatten().copied().collect();
            cells.sort_unstable();
            assert_eq!(cells, vec![0, 1, 2]);
            for part in parts {
                assert!(is_connected(&map, part).unwrap());
            }
        }
        let (count, _) = enumerate_window_partitions(&map, 1, 3, 0);
        assert_eq!(count, 4);
        let (count, _) = enumerate_window_partitions(&map, 3, 3, 4);
        assert_eq!(count, 1);
    }

    #[test]
    fn seat_vote_objective_handles_fallbacks() {
        // A wins everything in one split, splits 1-1 in the other.
        let map = grid_with(2, 2, &[(2, 2), (2, 0), (2, 2), (2, 0)], 2);
        let res = enumerate_plans(
            &map,
            &BalanceCriterion::Strict,
            &EnumerateOptions {
                objective: Some(Objective::MinimizeSeatVoteFactor { rho: ratio(1, 1) }),
                ..EnumerateOptions::default()
            },
        )
        .unwrap();
        // Column split: seats (1,1), votes equal, factor 1. Row split:
        // ties give A both seats, fallback factor 2. Minimum is 1.
        assert_eq!(
            res.best_value,
            Some(ObjectiveValue::Rational(ratio(1, 1)))
        );
    }

    #[test]
    fn objective_value_ordering_across_exponents() {
        let a = ObjectiveValue::Pow {
            pow_q: ratio(11, 9),
            q: 2,
        };
        let b = ObjectiveValue::Rational(ratio(1, 1));
        assert!(a > b);
        let c = ObjectiveValue::Pow {
            pow_q: ratio(8, 1),
            q: 3,
        };
        let d = ObjectiveValue::Rational(ratio(2, 1));
        assert_eq!(c.cmp(&d), std::cmp::Ordering::Equal);
        let e = ObjectiveValue::Pow {
            pow_q: ratio(9, 1),
            q: 2,
        };
        assert!(e > d);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn grower_matches_naive_oracle(
            rows in 2usize..4,
            cols in 2usize..4,
            kappa in 2u32..4,
            pops in proptest::collection::vec((1u64..5, 0u64..5), 9),
            slack in 0u64..7,
        ) {
            prop_assume!(rows * cols > kappa as usize);
            let cells: Vec<(u64, u64)> = pops
                .iter()
                .take(rows * cols)
                .map(|&(p, a)| (p, a.min(p)))
                .collect();
            prop_assume!(cells.len() == rows * cols);
            let map = grid_with(rows as u32, cols as u32, &cells, kappa);
            let criterion = BalanceCriterion::AdditiveSlack(slack);
            let fast = enumerate_plans(&map, &criterion, &EnumerateOptions::default()).unwrap();
            let slow = naive_enumerate(&map, &criterion).unwrap();
            prop_assert_eq!(fast.count, slow);
        }

        #[test]
        fn strict_grower_matches_naive_oracle(
            rows in 2usize..4,
            cols in 2usize..4,
            kappa in 2u32..4,
        ) {
            prop_assume!(rows * cols > kappa as usize);
            let map = uniform_grid(rows as u32, cols as u32, kappa);
            let fast =
                enumerate_plans(&map, &BalanceCriterion::Strict, &EnumerateOptions::default())
                    .unwrap();
            let slow = naive_enumerate(&map, &BalanceCriterion::Strict).unwrap();
            prop_assert_eq!(fast.count, slow);
        }
    }
}
